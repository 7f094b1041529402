use log::debug;
use serde::{Deserialize, Serialize};

use super::ipfm::{ipfm_generate, PsvSdgParams};
use crate::error::{Error, Result};
use crate::features::compute_hrv;
use crate::preprocess::{RrSeries, RR_MAX_MS, RR_MIN_MS};
use crate::scalar::Scalar;

/// Calibration settings. Tolerances are relative to the targets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationOptions {
    pub max_evaluations: usize,
    /// Stop a one-coordinate search inside this band.
    pub coordinate_tol: f64,
    /// Stop sweeping once both targets are inside this band.
    pub sweep_tol: f64,
    /// Accept the result inside this band, otherwise report unreachable.
    pub accept_tol: f64,
    pub max_sweeps: usize,
}

impl Default for CalibrationOptions {
    fn default() -> Self {
        CalibrationOptions {
            max_evaluations: 40,
            coordinate_tol: 0.02,
            sweep_tol: 0.05,
            accept_tol: 0.10,
            max_sweeps: 6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub c_s: f64,
    pub c_v: f64,
    pub sd1: f64,
    pub sd2: f64,
    pub evaluations: usize,
}

/// Largest total modulation amplitude that keeps every instantaneous
/// interval inside the plausibility bounds used by the HRV statistics.
pub fn max_modulation(mu_hr: f64) -> f64 {
    let min_rate = 1000.0 / RR_MAX_MS;
    let max_rate = 1000.0 / RR_MIN_MS;
    (mu_hr - min_rate).min(max_rate - mu_hr).max(0.0)
}

/// (sd1, sd2) of a beat train generated with the given amplitudes.
pub fn measure_sd(mu_hr: f64, c_s: f64, c_v: f64, duration: f64) -> Result<(f64, f64)> {
    let train = ipfm_generate(&PsvSdgParams::new(mu_hr, c_s, c_v, duration), 0)?;
    let h = compute_hrv(&RrSeries::from_beat_times(train.beat_times)?)?;
    Ok((h.sd1, h.sd2))
}

pub fn calibrate_amplitudes<T: Scalar>(target_sd1: T, target_sd2: T, mu_hr: T, duration: T) -> Result<(T, T)> {
    let c = calibrate_with(
        target_sd1.as_f64(),
        target_sd2.as_f64(),
        mu_hr.as_f64(),
        duration.as_f64(),
        &CalibrationOptions::default(),
    )?;
    Ok((T::lit(c.c_s), T::lit(c.c_v)))
}

struct Search {
    mu: f64,
    duration: f64,
    targets: [f64; 2],
    evals: usize,
    budget: usize,
    best: Option<([f64; 2], [f64; 2], f64)>,
}

impl Search {
    /// Amplitudes are `[c_s, c_v]`, measurements `[sd1, sd2]`.
    fn eval(&mut self, c: [f64; 2]) -> Result<[f64; 2]> {
        self.evals += 1;
        let (sd1, sd2) = measure_sd(self.mu, c[0], c[1], self.duration)?;
        let m = [sd1, sd2];
        let err = self.error(m);
        if self.best.is_none_or(|b| err < b.2) {
            self.best = Some((c, m, err));
        }
        Ok(m)
    }

    fn error(&self, m: [f64; 2]) -> f64 {
        ((m[0] - self.targets[0]).abs() / self.targets[0]).max((m[1] - self.targets[1]).abs() / self.targets[1])
    }

    fn exhausted(&self) -> bool {
        self.evals >= self.budget
    }

    /// Moves amplitude `coord` (0 = c_s, 1 = c_v) to hit the measurement
    /// it drives (c_v → sd1, c_s → sd2) by Illinois false position, with
    /// bisection when the secant leaves the bracket. Returns the final
    /// point and its measurement, or `None` when the bound is hit short of
    /// the target.
    fn solve(
        &mut self,
        coord: usize,
        mut c: [f64; 2],
        mut m: [f64; 2],
        upper: f64,
        tol: f64,
    ) -> Result<([f64; 2], [f64; 2], bool)> {
        let idx = 1 - coord;
        let target = self.targets[idx];
        let f0 = m[idx] - target;
        if f0.abs() < tol * target {
            return Ok((c, m, true));
        }
        let at = |c: [f64; 2], v: f64| {
            let mut c = c;
            c[coord] = v;
            c
        };
        let (mut lo, mut flo, mut mlo, mut hi, mut fhi, mut mhi);
        if f0 < 0.0 {
            lo = c[coord];
            flo = f0;
            mlo = m;
            hi = upper;
            if self.exhausted() {
                return Ok((c, m, true));
            }
            mhi = self.eval(at(c, hi))?;
            fhi = mhi[idx] - target;
            if fhi < 0.0 {
                return Ok((at(c, hi), mhi, false));
            }
        } else {
            hi = c[coord];
            fhi = f0;
            mhi = m;
            lo = 0.0;
            if self.exhausted() {
                return Ok((c, m, true));
            }
            mlo = self.eval(at(c, lo))?;
            flo = mlo[idx] - target;
            if flo > 0.0 {
                return Ok((at(c, lo), mlo, true));
            }
        }
        let mut side = 0i8;
        while !self.exhausted() {
            let mut x = (lo * fhi - hi * flo) / (fhi - flo);
            if !x.is_finite() || x <= lo || x >= hi {
                x = 0.5 * (lo + hi);
            }
            let mx = self.eval(at(c, x))?;
            let fx = mx[idx] - target;
            c = at(c, x);
            m = mx;
            if fx.abs() < tol * target || hi - lo < 1e-9 {
                return Ok((c, m, true));
            }
            if fx * fhi > 0.0 {
                hi = x;
                fhi = fx;
                mhi = mx;
                if side == -1 {
                    flo /= 2.0;
                }
                side = -1;
            } else {
                lo = x;
                flo = fx;
                mlo = mx;
                if side == 1 {
                    fhi /= 2.0;
                }
                side = 1;
            }
        }
        let _ = (mlo, mhi);
        Ok((c, m, true))
    }
}

/// Coordinate descent on (c_s, c_v): c_v against the sd1 target, c_s
/// against the sd2 target. Amplitudes stay non-negative with
/// `c_s + c_v <= max_modulation(mu_hr)`.
pub fn calibrate_with(
    target_sd1: f64,
    target_sd2: f64,
    mu_hr: f64,
    duration: f64,
    opts: &CalibrationOptions,
) -> Result<Calibration> {
    if !(target_sd1 > 0.0 && target_sd2 > 0.0) {
        return Err(Error::NonPositiveTargets);
    }
    if !(mu_hr > 0.0) || !duration.is_finite() {
        return Err(Error::InvalidParams(format!("mu_hr {mu_hr}, duration {duration}")));
    }
    let cmax = max_modulation(mu_hr);
    let mut s = Search {
        mu: mu_hr,
        duration,
        targets: [target_sd1, target_sd2],
        evals: 0,
        budget: opts.max_evaluations.max(2),
        best: None,
    };
    let unreachable = |s: &Search| {
        let (c, m, _) = s.best.unwrap_or(([0.0; 2], [0.0; 2], f64::INFINITY));
        Error::TargetsUnreachable { best_sd1: m[0], best_sd2: m[1], c_s: c[0], c_v: c[1] }
    };
    let mut c = [0.0, 0.0];
    let mut m = s.eval(c)?;
    for sweep in 0..opts.max_sweeps {
        let (c1, m1, ok) = s.solve(1, c, m, cmax - c[0], opts.coordinate_tol)?;
        if !ok && c1[0] == 0.0 {
            // sd1 out of reach even with all modulation on the vagal side
            return Err(unreachable(&s));
        }
        let (c2, m2, _) = s.solve(0, c1, m1, cmax - c1[1], opts.coordinate_tol)?;
        c = c2;
        m = m2;
        debug!("calibration sweep {sweep}: c = {c:?}, sd = {m:?}, evals = {}", s.evals);
        if s.error(m) < opts.sweep_tol || s.exhausted() {
            break;
        }
    }
    let (c, m, err) = s.best.expect("at least one evaluation");
    if err <= opts.accept_tol {
        Ok(Calibration { c_s: c[0], c_v: c[1], sd1: m[0], sd2: m[1], evaluations: s.evals })
    } else {
        Err(unreachable(&s))
    }
}
