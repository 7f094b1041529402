//! Numeric helpers with the exact summation order of the reference code.

use rustfft::num_complex::Complex64;

pub(super) fn min_(a: &[f64]) -> f64 {
    a[1..].iter().fold(a[0], |m, &v| if v < m { v } else { m })
}

pub(super) fn max_(a: &[f64]) -> f64 {
    a[1..].iter().fold(a[0], |m, &v| if v > m { v } else { m })
}

pub(super) fn mean(a: &[f64]) -> f64 {
    let mut m = 0.0;
    for &v in a {
        m += v;
    }
    m / a.len() as f64
}

pub(super) fn stddev(a: &[f64]) -> f64 {
    let m = mean(a);
    let mut sd = 0.0;
    for &v in a {
        sd += (v - m) * (v - m);
    }
    (sd / (a.len() as f64 - 1.0)).sqrt()
}

pub(super) fn median(a: &[f64]) -> f64 {
    let mut b = a.to_vec();
    sort(&mut b);
    let n = b.len();
    if n % 2 == 1 {
        b[n / 2]
    } else {
        (b[n / 2] + b[n / 2 - 1]) / 2.0
    }
}

pub(super) fn sort(a: &mut [f64]) {
    a.sort_by(|x, y| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal));
}

pub(super) fn cov(x: &[f64], y: &[f64]) -> f64 {
    let mx = mean(x);
    let my = mean(y);
    let mut c = 0.0;
    for i in 0..x.len() {
        c += (x[i] - mx) * (y[i] - my);
    }
    c / (x.len() as f64 - 1.0)
}

pub(super) fn corr(x: &[f64], y: &[f64]) -> f64 {
    let mx = mean(x);
    let my = mean(y);
    let (mut nom, mut dx, mut dy) = (0.0, 0.0, 0.0);
    for i in 0..x.len() {
        nom += (x[i] - mx) * (y[i] - my);
        dx += (x[i] - mx) * (x[i] - mx);
        dy += (y[i] - my) * (y[i] - my);
    }
    nom / (dx * dy).sqrt()
}

pub(super) fn autocorr_lag(x: &[f64], lag: usize) -> f64 {
    let n = x.len() - lag;
    corr(&x[..n], &x[lag..lag + n])
}

pub(super) fn zscore(a: &[f64]) -> Vec<f64> {
    let m = mean(a);
    let sd = stddev(a);
    a.iter().map(|&v| (v - m) / sd).collect()
}

pub(super) fn norm_(a: &[f64]) -> f64 {
    let mut out = 0.0;
    for &v in a {
        out += v * v;
    }
    out.sqrt()
}

/// Least-squares line `y = m·x + b`; `(0, 0)` when singular.
pub(super) fn linreg(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let (mut sx, mut sx2, mut sxy, mut sy) = (0.0, 0.0, 0.0, 0.0);
    for i in 0..x.len() {
        sx += x[i];
        sx2 += x[i] * x[i];
        sxy += x[i] * y[i];
        sy += y[i];
    }
    let denom = n * sx2 - sx * sx;
    if denom == 0.0 {
        return (0.0, 0.0);
    }
    ((n * sxy - sx * sy) / denom, (sy * sx2 - sx * sxy) / denom)
}

/// Linear-interpolated quantile with the reference's end clamping.
pub(super) fn quantile(y: &[f64], quant: f64) -> f64 {
    let mut tmp = y.to_vec();
    sort(&mut tmp);
    let size = tmp.len() as f64;
    let q = 0.5 / size;
    if quant < q {
        return tmp[0];
    } else if quant > 1.0 - q {
        return tmp[tmp.len() - 1];
    }
    let idx = size * quant - 0.5;
    let l = idx.floor();
    let r = idx.ceil();
    let (li, ri) = (l as usize, r as usize);
    tmp[li] + (idx - l) * (tmp[ri] - tmp[li]) / (r - l)
}

pub(super) fn linspace(start: f64, end: f64, n: usize) -> Vec<f64> {
    let step = (end - start) / (n as f64 - 1.0);
    let mut s = start;
    (0..n)
        .map(|_| {
            let v = s;
            s += step;
            v
        })
        .collect()
}

pub(super) fn f_entropy(a: &[f64]) -> f64 {
    let mut f = 0.0;
    for &v in a {
        if v > 0.0 {
            f += v * v.ln();
        }
    }
    -f
}

pub(super) fn nextpow2(n: usize) -> usize {
    n.next_power_of_two()
}

/// Fixed-bin histogram over `[min, max]`; returns counts and edges.
pub(super) fn histcounts(y: &[f64], n_bins: usize) -> (Vec<i64>, Vec<f64>) {
    let (mut lo, mut hi) = (f64::MAX, -f64::MAX);
    for &v in y {
        if v < lo {
            lo = v;
        }
        if v > hi {
            hi = v;
        }
    }
    let step = (hi - lo) / n_bins as f64;
    let mut counts = vec![0i64; n_bins];
    for &v in y {
        let mut b = ((v - lo) / step) as i64;
        if b < 0 {
            b = 0;
        }
        if b >= n_bins as i64 {
            b = n_bins as i64 - 1;
        }
        counts[b as usize] += 1;
    }
    let edges = (0..=n_bins).map(|i| i as f64 * step + lo).collect();
    (counts, edges)
}

pub(super) fn num_bins_auto(y: &[f64]) -> usize {
    let hi = max_(y);
    let lo = min_(y);
    let sd = stddev(y);
    if sd < 0.001 {
        return 0;
    }
    ((hi - lo) / (3.5 * sd / (y.len() as f64).powf(1.0 / 3.0))).ceil() as usize
}

// ---------------------------------------------------------------- FFT

/// The reference truncates π, and its twiddles inherit that.
pub(super) const PI_REF: f64 = 3.14159265359;

pub(super) fn twiddles(size: usize) -> Vec<Complex64> {
    (0..size)
        .map(|i| {
            let arg = -PI_REF * i as f64 / size as f64;
            Complex64::new(0.0, arg).exp()
        })
        .collect()
}

fn cmul(x: Complex64, y: Complex64) -> Complex64 {
    Complex64::new(x.re * y.re - x.im * y.im, x.re * y.im + x.im * y.re)
}

/// In-place radix-2 transform matching the reference recursion.
pub(super) fn fft(a: &mut [Complex64], tw: &[Complex64]) {
    let mut out = a.to_vec();
    let n = a.len();
    rec(a, &mut out, n, 1, 0, tw);
}

/// `a` and `out` are the full buffers; the current sub-problem reads and
/// writes them at stride `step` starting at `off`, as the C pointer
/// arithmetic does.
fn rec(a: &mut [Complex64], out: &mut [Complex64], size: usize, step: usize, off: usize, tw: &[Complex64]) {
    if step < size {
        rec(out, a, size, step * 2, off, tw);
        rec(out, a, size, step * 2, off + step, tw);
        let mut i = 0;
        while i < size {
            let t = cmul(tw[i], out[off + i + step]);
            let x = out[off + i];
            a[off + i / 2] = x + t;
            a[off + (i + size) / 2] = x - t;
            i += 2 * step;
        }
    }
}

/// Reference complex division, written out component-wise.
pub(super) fn cdiv(x: Complex64, y: Complex64) -> Complex64 {
    let (a, b, c, d) = (x.re, x.im, y.re, y.im);
    Complex64::new((a * c + b * d) / (c * c + d * d), (b * c - a * d) / (c * c + d * d))
}

/// Autocorrelation at every lag via a doubled FFT, normalised by lag 0.
pub(super) fn co_autocorrs(y: &[f64]) -> Vec<f64> {
    let m = mean(y);
    let n_fft = nextpow2(y.len()) << 1;
    let mut f: Vec<Complex64> = y.iter().map(|&v| Complex64::new(v - m, 0.0)).collect();
    f.resize(n_fft, Complex64::new(0.0, 0.0));
    let tw = twiddles(n_fft);
    fft(&mut f, &tw);
    for v in f.iter_mut() {
        *v = cmul(*v, v.conj());
    }
    fft(&mut f, &tw);
    let div = f[0];
    f.iter().map(|&v| cdiv(v, div).re).collect()
}

pub(super) fn co_firstzero(y: &[f64], maxtau: usize) -> usize {
    let ac = co_autocorrs(y);
    let mut i = 0;
    while ac[i] > 0.0 && i < maxtau {
        i += 1;
    }
    i
}
