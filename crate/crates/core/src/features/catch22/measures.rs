//! The 22 measures. Each takes an already z-scored series of length >= 3.

use rustfft::num_complex::Complex64;

use super::splinefit::splinefit;
use super::stats::*;

fn histogram_mode(y: &[f64], n_bins: usize) -> f64 {
    let (counts, edges) = histcounts(y, n_bins);
    let mut max_count = 0i64;
    let mut num_maxs = 1.0;
    let mut out = 0.0;
    for i in 0..n_bins {
        let centre = (edges[i] + edges[i + 1]) * 0.5;
        if counts[i] > max_count {
            max_count = counts[i];
            num_maxs = 1.0;
            out = centre;
        } else if counts[i] == max_count {
            num_maxs += 1.0;
            out += centre;
        }
    }
    out / num_maxs
}

pub(super) fn dn_histogram_mode_5(y: &[f64]) -> f64 {
    histogram_mode(y, 5)
}

pub(super) fn dn_histogram_mode_10(y: &[f64]) -> f64 {
    histogram_mode(y, 10)
}

pub(super) fn co_f1ecac(y: &[f64]) -> f64 {
    let ac = co_autocorrs(y);
    let thresh = 1.0 / 1f64.exp();
    for i in 0..y.len() - 2 {
        if ac[i + 1] < thresh {
            let m = ac[i + 1] - ac[i];
            let dy = thresh - ac[i];
            return i as f64 + dy / m;
        }
    }
    y.len() as f64
}

pub(super) fn co_first_min_ac(y: &[f64]) -> f64 {
    let ac = co_autocorrs(y);
    for i in 1..y.len() - 1 {
        if ac[i] < ac[i - 1] && ac[i] < ac[i + 1] {
            return i as f64;
        }
    }
    y.len() as f64
}

pub(super) fn co_histogram_ami_even_2_5(y: &[f64]) -> f64 {
    const TAU: usize = 2;
    const NB: usize = 5;
    let n = y.len() - TAU;
    let (maxv, minv) = (max_(y), min_(y));
    let step = (maxv - minv + 0.2) / 5.0;
    let edges: Vec<f64> = (0..=NB).map(|i| minv + step * i as f64 - 0.1).collect();
    let assign = |v: f64| edges.iter().position(|&e| v < e).unwrap_or(0) as i64;
    let edges12: Vec<f64> = (0..(NB + 1) * (NB + 1)).map(|i| (i + 1) as f64).collect();
    let mut joint = vec![0i64; (NB + 1) * (NB + 1)];
    for i in 0..n {
        let b12 = ((assign(y[i]) - 1) * (NB as i64 + 1) + assign(y[i + TAU])) as f64;
        if let Some(j) = edges12.iter().position(|&e| b12 <= e) {
            joint[j] += 1;
        }
    }
    let mut pij = [[0.0f64; NB]; NB];
    let mut sum_bins = 0i64;
    for i in 0..NB {
        for j in 0..NB {
            pij[j][i] = joint[i * (NB + 1) + j] as f64;
            sum_bins += joint[i * (NB + 1) + j];
        }
    }
    for row in pij.iter_mut() {
        for v in row.iter_mut() {
            *v /= sum_bins as f64;
        }
    }
    let mut pi = [0.0f64; NB];
    let mut pj = [0.0f64; NB];
    for i in 0..NB {
        for j in 0..NB {
            pi[i] += pij[i][j];
            pj[j] += pij[i][j];
        }
    }
    let mut ami = 0.0;
    for i in 0..NB {
        for j in 0..NB {
            if pij[i][j] > 0.0 {
                ami += pij[i][j] * (pij[i][j] / (pj[j] * pi[i])).ln();
            }
        }
    }
    ami
}

pub(super) fn co_trev_1_num(y: &[f64]) -> f64 {
    let d: Vec<f64> = y.windows(2).map(|w| (w[1] - w[0]).powf(3.0)).collect();
    mean(&d)
}

pub(super) fn md_hrv_classic_pnn40(y: &[f64]) -> f64 {
    let count = y.windows(2).filter(|w| (w[1] - w[0]).abs() * 1000.0 > 40.0).count();
    count as f64 / (y.len() - 1) as f64
}

/// Longest stretch between trigger positions, with the final position
/// always counted as a trigger.
fn longest_stretch(bits: &[u8], trigger: u8) -> f64 {
    let n = bits.len();
    let mut best = 0usize;
    let mut last = 0usize;
    for (i, &b) in bits.iter().enumerate() {
        if b == trigger || i + 1 == n {
            best = best.max(i - last);
            last = i;
        }
    }
    best as f64
}

pub(super) fn sb_binary_stats_mean_longstretch1(y: &[f64]) -> f64 {
    let m = mean(y);
    let bits: Vec<u8> = y[..y.len() - 1].iter().map(|&v| u8::from(v - m > 0.0)).collect();
    longest_stretch(&bits, 0)
}

pub(super) fn sb_binary_stats_diff_longstretch0(y: &[f64]) -> f64 {
    let bits: Vec<u8> = y.windows(2).map(|w| u8::from(w[1] - w[0] >= 0.0)).collect();
    longest_stretch(&bits, 1)
}

/// Equiprobable symbol labels 1..=groups.
fn coarsegrain(y: &[f64], groups: usize) -> Vec<usize> {
    let ls = linspace(0.0, 1.0, groups + 1);
    let mut th: Vec<f64> = ls.iter().map(|&q| quantile(y, q)).collect();
    th[0] -= 1.0;
    let mut labels = vec![0usize; y.len()];
    for i in 0..groups {
        for (j, &v) in y.iter().enumerate() {
            if v > th[i] && v <= th[i + 1] {
                labels[j] = i + 1;
            }
        }
    }
    labels
}

pub(super) fn sb_transition_matrix_3ac_sumdiagcov(y: &[f64]) -> f64 {
    let size = y.len();
    let tau = co_firstzero(y, size).max(1);
    let n_down = (size - 1) / tau + 1;
    let down: Vec<f64> = (0..n_down).map(|i| y[i * tau]).collect();
    let cg = coarsegrain(&down, 3);
    let mut t = [[0.0f64; 3]; 3];
    for w in cg.windows(2) {
        if w[0] > 0 && w[1] > 0 {
            t[w[0] - 1][w[1] - 1] += 1.0;
        }
    }
    for row in t.iter_mut() {
        for v in row.iter_mut() {
            *v /= (n_down - 1) as f64;
        }
    }
    let mut out = 0.0;
    for c in 0..3 {
        let col = [t[0][c], t[1][c], t[2][c]];
        out += cov(&col, &col);
    }
    out
}

pub(super) fn pd_periodicity_wang_th0_01(y: &[f64]) -> f64 {
    const TH: f64 = 0.01;
    let size = y.len();
    let spline = splinefit(y);
    let sub: Vec<f64> = y.iter().zip(&spline).map(|(a, b)| a - b).collect();
    let acmax = (size as f64 / 3.0).ceil() as usize;
    let acf: Vec<f64> = (1..=acmax)
        .map(|tau| {
            let m = size - tau;
            let mut acc = 0.0;
            for i in 0..m {
                acc += sub[i] * sub[i + tau];
            }
            acc / m as f64
        })
        .collect();
    let mut troughs: Vec<usize> = Vec::new();
    for i in 1..acmax.saturating_sub(1) {
        let slope_in = acf[i] - acf[i - 1];
        let slope_out = acf[i + 1] - acf[i];
        if slope_in < 0.0 && slope_out > 0.0 {
            troughs.push(i);
        } else if slope_in > 0.0 && slope_out < 0.0 {
            let Some(&trough) = troughs.iter().rev().find(|&&t| t < i) else {
                continue;
            };
            if acf[i] - acf[trough] < TH || acf[i] < 0.0 {
                continue;
            }
            return i as f64;
        }
    }
    0.0
}

pub(super) fn co_embed2_dist_tau_d_expfit_meandiff(y: &[f64]) -> f64 {
    let size = y.len();
    let mut tau = co_firstzero(y, size);
    if tau as f64 > size as f64 / 10.0 {
        tau = size / 10;
    }
    let n = size - tau - 1;
    let d: Vec<f64> = (0..n)
        .map(|i| {
            let a = y[i + 1] - y[i];
            let b = y[i + tau] - y[i + tau + 1];
            (a * a + b * b).sqrt()
        })
        .collect();
    if d.iter().any(|v| v.is_nan()) {
        return f64::NAN;
    }
    let l = mean(&d);
    let n_bins = num_bins_auto(&d);
    if n_bins == 0 {
        return 0.0;
    }
    let (counts, edges) = histcounts(&d, n_bins);
    let diffs: Vec<f64> = (0..n_bins)
        .map(|i| {
            let norm = counts[i] as f64 / n as f64;
            let expf = ((-(edges[i] + edges[i + 1]) * 0.5 / l).exp() / l).max(0.0);
            (norm - expf).abs()
        })
        .collect();
    mean(&diffs)
}

pub(super) fn in_auto_mutual_info_stats_40_gaussian_fmmi(y: &[f64]) -> f64 {
    let tau = 40.min((y.len() + 1) / 2);
    if tau < 3 {
        return tau as f64;
    }
    let ami = |lag: usize| {
        let ac = autocorr_lag(y, lag);
        -0.5 * (1.0 - ac * ac).ln()
    };
    let mut prev = ami(1);
    let mut curr = ami(2);
    for i in 1..tau - 1 {
        let next = ami(i + 2);
        if curr < prev && curr < next {
            return i as f64;
        }
        prev = curr;
        curr = next;
    }
    tau as f64
}

fn mean_residuals(y: &[f64], train: usize) -> Vec<f64> {
    (0..y.len() - train)
        .map(|i| {
            let mut est = 0.0;
            for j in 0..train {
                est += y[i + j];
            }
            y[i + train] - est / train as f64
        })
        .collect()
}

pub(super) fn fc_local_simple_mean1_tauresrat(y: &[f64]) -> f64 {
    let res = mean_residuals(y, 1);
    co_firstzero(&res, res.len()) as f64 / co_firstzero(y, y.len()) as f64
}

pub(super) fn fc_local_simple_mean3_stderr(y: &[f64]) -> f64 {
    stddev(&mean_residuals(y, 3))
}

fn outlier_include(y: &[f64], sign: f64) -> f64 {
    const INC: f64 = 0.01;
    let size = y.len();
    let work: Vec<f64> = y.iter().map(|&v| sign * v).collect();
    let tot = work.iter().filter(|&&v| v >= 0.0).count() as f64;
    let max_val = max_(&work);
    if max_val < INC {
        return 0.0;
    }
    let n_thresh = (max_val / INC + 1.0) as usize;
    // 1-based positions at or above each threshold
    let positions: Vec<Vec<f64>> = (0..n_thresh)
        .map(|j| {
            let th = j as f64 * INC;
            work.iter().enumerate().filter(|(_, &v)| v >= th).map(|(i, _)| (i + 1) as f64).collect()
        })
        .collect();
    let mut mj = 0;
    let mut fbi = n_thresh - 1;
    for (j, p) in positions.iter().enumerate() {
        if (p.len() as f64 - 1.0) * 100.0 / tot > 2.0 {
            mj = j;
        }
    }
    for j in (0..n_thresh).rev() {
        if positions[j].len() == 1 {
            fbi = j;
        }
    }
    let trim = mj.min(fbi);
    let denom = size as f64 / 2.0;
    let ms: Vec<f64> = positions[..=trim].iter().map(|p| median(p) / denom - 1.0).collect();
    median(&ms)
}

pub(super) fn dn_outlier_include_p_001_mdrmd(y: &[f64]) -> f64 {
    outlier_include(y, 1.0)
}

pub(super) fn dn_outlier_include_n_001_mdrmd(y: &[f64]) -> f64 {
    outlier_include(y, -1.0)
}

/// Single rectangular-window periodogram as (angular frequency, density).
fn welch_rect(y: &[f64]) -> Option<(Vec<f64>, Vec<f64>)> {
    let size = y.len();
    let nfft = nextpow2(size);
    let df = 1.0 / nfft as f64;
    let m = mean(y);
    let window = vec![1.0; size];
    let kmu = norm_(&window).powi(2);
    let mut f: Vec<Complex64> = y.iter().map(|&v| Complex64::new(v - m, 0.0)).collect();
    f.resize(nfft, Complex64::new(0.0, 0.0));
    let tw = twiddles(nfft);
    fft(&mut f, &tw);
    let nout = nfft / 2 + 1;
    let mut w = Vec::with_capacity(nout);
    let mut sw = Vec::with_capacity(nout);
    for (i, c) in f.iter().take(nout).enumerate() {
        let mut pxx = c.re.hypot(c.im).powi(2) / kmu;
        if i > 0 && i < nout - 1 {
            pxx *= 2.0;
        }
        let s = pxx / (2.0 * PI_REF);
        if s.is_infinite() {
            return None;
        }
        w.push(2.0 * PI_REF * (i as f64 * df));
        sw.push(s);
    }
    Some((w, sw))
}

pub(super) fn sp_summaries_welch_rect_area_5_1(y: &[f64]) -> f64 {
    let Some((w, sw)) = welch_rect(y) else { return 0.0 };
    let dw = w[1] - w[0];
    let mut area = 0.0;
    for &s in &sw[..sw.len() / 5] {
        area += s;
    }
    area * dw
}

pub(super) fn sp_summaries_welch_rect_centroid(y: &[f64]) -> f64 {
    let Some((w, sw)) = welch_rect(y) else { return 0.0 };
    let mut cs = Vec::with_capacity(sw.len());
    let mut acc = 0.0;
    for &s in &sw {
        acc += s;
        cs.push(acc);
    }
    let thresh = cs[cs.len() - 1] * 0.5;
    cs.iter().position(|&c| c > thresh).map_or(0.0, |i| w[i])
}

fn fluct_anal(y: &[f64], lag: usize, dfa: bool) -> f64 {
    const STEPS: usize = 50;
    let size = y.len();
    let lin_low = 5f64.ln();
    let lin_high = ((size / 2) as f64).ln();
    let step = (lin_high - lin_low) / (STEPS - 1) as f64;
    let mut tau: Vec<i64> = (0..STEPS).map(|i| (lin_low + i as f64 * step).exp().round() as i64).collect();
    let mut n_tau = STEPS;
    for i in 0..STEPS - 1 {
        while tau[i] == tau[i + 1] && i < n_tau - 1 {
            for j in i + 1..STEPS - 1 {
                tau[j] = tau[j + 1];
            }
            n_tau -= 1;
        }
    }
    if n_tau < 12 {
        return 0.0;
    }
    let size_cs = size / lag;
    let mut ycs = vec![0.0; size_cs];
    ycs[0] = y[0];
    for i in 0..size_cs - 1 {
        ycs[i + 1] = ycs[i] + y[(i + 1) * lag];
    }
    let f: Vec<f64> = tau[..n_tau]
        .iter()
        .map(|&t| {
            let t = t as usize;
            let n_buffer = size_cs / t;
            let (mut sumx, mut sumx2) = (0.0, 0.0);
            for k in 0..t {
                let xv = (k + 1) as f64;
                sumx += xv;
                sumx2 += xv * xv;
            }
            let denom = t as f64 * sumx2 - sumx * sumx;
            let mut fi = 0.0;
            for j in 0..n_buffer {
                let w = &ycs[j * t..(j + 1) * t];
                let (mut sumxy, mut sumy) = (0.0, 0.0);
                for (k, &v) in w.iter().enumerate() {
                    sumxy += (k + 1) as f64 * v;
                    sumy += v;
                }
                let (m, b) = if denom == 0.0 {
                    (0.0, 0.0)
                } else {
                    ((t as f64 * sumxy - sumx * sumy) / denom, (sumy * sumx2 - sumx * sumxy) / denom)
                };
                let resid = w.iter().enumerate().map(|(k, &v)| v - (m * (k + 1) as f64 + b));
                if dfa {
                    for r in resid {
                        fi += r * r;
                    }
                } else {
                    let (mut mx, mut mn) = (f64::NEG_INFINITY, f64::INFINITY);
                    for r in resid {
                        mx = mx.max(r);
                        mn = mn.min(r);
                    }
                    fi += (mx - mn) * (mx - mn);
                }
            }
            if dfa {
                (fi / (n_buffer * t) as f64).sqrt()
            } else {
                (fi / n_buffer as f64).sqrt()
            }
        })
        .collect();
    let ntt = n_tau;
    let logtt: Vec<f64> = tau[..ntt].iter().map(|&t| (t as f64).ln()).collect();
    let logff: Vec<f64> = f.iter().map(|v| v.ln()).collect();
    const MIN_POINTS: usize = 6;
    let sserr: Vec<f64> = (MIN_POINTS..ntt - MIN_POINTS + 1)
        .map(|i| {
            let (m1, b1) = linreg(&logtt[..i], &logff[..i]);
            let (m2, b2) = linreg(&logtt[i - 1..], &logff[i - 1..]);
            let r1: Vec<f64> = (0..i).map(|j| logtt[j] * m1 + b1 - logff[j]).collect();
            let r2: Vec<f64> = (i - 1..ntt).map(|j| logtt[j] * m2 + b2 - logff[j]).collect();
            norm_(&r1) + norm_(&r2)
        })
        .collect();
    let minimum = min_(&sserr);
    let first = sserr.iter().position(|&v| v == minimum).map_or(0.0, |i| (i + MIN_POINTS - 1) as f64);
    (first + 1.0) / ntt as f64
}

pub(super) fn sc_fluct_anal_2_rsrangefit_50_1_logi_prop_r1(y: &[f64]) -> f64 {
    fluct_anal(y, 1, false)
}

pub(super) fn sc_fluct_anal_2_dfa_50_1_2_logi_prop_r1(y: &[f64]) -> f64 {
    fluct_anal(y, 2, true)
}

pub(super) fn sb_motif_three_quantile_hh(y: &[f64]) -> f64 {
    let size = y.len();
    let yt = coarsegrain(y, 3);
    let mut hh = 0.0;
    for i in 0..3 {
        let mut r1: Vec<usize> = (0..size).filter(|&k| yt[k] == i + 1).collect();
        if r1.last() == Some(&(size - 1)) {
            r1.pop();
        }
        let out2: Vec<f64> = (0..3)
            .map(|j| {
                let c = r1.iter().filter(|&&k| yt[k + 1] == j + 1).count();
                c as f64 / (size as f64 - 1.0)
            })
            .collect();
        hh += f_entropy(&out2);
    }
    hh
}
