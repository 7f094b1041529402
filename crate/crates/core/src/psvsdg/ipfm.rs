use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::preprocess::RrSeries;
use crate::scalar::Scalar;

/// Sympathetic modulation frequency, Hz.
pub const F_SYMPATHETIC: f64 = 0.1;
/// Vagal modulation frequency, Hz.
pub const F_VAGAL: f64 = 0.25;
/// Default integration step, seconds.
pub const DEFAULT_DT: f64 = 1e-3;
/// Largest allowed integration step, seconds.
pub const MAX_DT: f64 = 5e-3;
/// Slack on the unit threshold so that accumulated rounding does not push a
/// crossing into the next step.
const CROSSING_EPS: f64 = 1e-9;

/// IPFM generator settings. Rates in beats/second.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PsvSdgParams<T: Scalar> {
    pub mu_hr: T,
    pub c_s: T,
    pub c_v: T,
    /// rad/s
    pub omega_s: T,
    /// rad/s
    pub omega_v: T,
    pub duration: T,
    pub dt: T,
    /// White noise added to the rate at every step, beats/second.
    pub noise_sd: T,
}

impl<T: Scalar> PsvSdgParams<T> {
    pub fn new(mu_hr: T, c_s: T, c_v: T, duration: T) -> Self {
        let two_pi = T::PI() + T::PI();
        PsvSdgParams {
            mu_hr,
            c_s,
            c_v,
            omega_s: two_pi * T::lit(F_SYMPATHETIC),
            omega_v: two_pi * T::lit(F_VAGAL),
            duration,
            dt: T::lit(DEFAULT_DT),
            noise_sd: T::zero(),
        }
    }

    pub fn with_dt(mut self, dt: T) -> Self {
        self.dt = dt;
        self
    }

    pub fn with_noise(mut self, noise_sd: T) -> Self {
        self.noise_sd = noise_sd;
        self
    }

    /// μ + m(t) without noise.
    pub fn rate(&self, t: T) -> T {
        self.mu_hr + self.c_s * (self.omega_s * t).sin() + self.c_v * (self.omega_v * t).sin()
    }

    pub fn validate(&self) -> Result<()> {
        let finite =
            [self.mu_hr, self.c_s, self.c_v, self.omega_s, self.omega_v, self.duration, self.dt, self.noise_sd]
                .iter()
                .all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidParams("non-finite parameter".into()));
        }
        if self.mu_hr - (self.c_s.abs() + self.c_v.abs()) <= T::zero() {
            return Err(Error::NonPositiveRate(format!(
                "mu_hr {} - (|c_s| {} + |c_v| {}) <= 0",
                self.mu_hr, self.c_s, self.c_v
            )));
        }
        if !(self.dt > T::zero()) || self.dt > T::lit(MAX_DT) {
            return Err(Error::InvalidParams(format!("dt must be in (0, {MAX_DT}], got {}", self.dt)));
        }
        if self.duration < T::lit(10.0) / self.mu_hr {
            return Err(Error::InvalidParams(format!(
                "duration {} shorter than 10 / mu_hr = {}",
                self.duration,
                T::lit(10.0) / self.mu_hr
            )));
        }
        if self.noise_sd < T::zero() {
            return Err(Error::InvalidParams("noise_sd must be >= 0".into()));
        }
        Ok(())
    }
}

/// Generated beat instants with the parameters that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct BeatTrain<T: Scalar> {
    pub beat_times: Vec<T>,
    pub params: PsvSdgParams<T>,
    pub seed: u64,
}

impl<T: Scalar> BeatTrain<T> {
    pub fn len(&self) -> usize {
        self.beat_times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.beat_times.is_empty()
    }

    /// Inter-beat intervals in ms.
    pub fn intervals_ms(&self) -> Vec<T> {
        self.beat_times.windows(2).map(|w| (w[1] - w[0]) * T::lit(1000.0)).collect()
    }

    pub fn rr(&self) -> Result<RrSeries<T>> {
        RrSeries::from_beat_times(self.beat_times.clone())
    }
}

/// Emits a beat each time the running trapezoidal integral of the rate
/// reaches 1. The crossing instant is interpolated linearly inside the step
/// and the excess carries into the next beat.
pub fn ipfm_generate<T: Scalar>(params: &PsvSdgParams<T>, seed: u64) -> Result<BeatTrain<T>> {
    params.validate()?;
    let dt = params.dt;
    let n_steps = (params.duration / dt).round().to_usize().unwrap_or(0);
    let mut noise = if params.noise_sd > T::zero() {
        let normal = Normal::new(0.0, params.noise_sd.as_f64()).map_err(|e| Error::InvalidParams(e.to_string()))?;
        Some((ChaCha8Rng::seed_from_u64(seed), normal))
    } else {
        None
    };
    let mut rate_at = |t: T| -> Result<T> {
        let mut r = params.rate(t);
        if let Some((rng, normal)) = noise.as_mut() {
            r = r + T::lit(normal.sample(rng));
        }
        if r <= T::zero() {
            return Err(Error::NonPositiveRate(format!("rate {r} at t = {t} s")));
        }
        Ok(r)
    };
    let one = T::one();
    let thresh = one - T::lit(CROSSING_EPS);
    let mut beats = Vec::with_capacity((params.mu_hr * params.duration).to_usize().unwrap_or(0) + 8);
    let mut acc = T::zero();
    let mut r_prev = rate_at(T::zero())?;
    for i in 1..=n_steps {
        let t_prev = T::from_usize_lossy(i - 1) * dt;
        let r = rate_at(T::from_usize_lossy(i) * dt)?;
        let inc = T::lit(0.5) * (r_prev + r) * dt;
        // fraction of this step already spent on earlier crossings
        let mut used = T::zero();
        while acc + inc * (one - used) >= thresh {
            let frac = ((one - acc) / inc).max(T::zero());
            used = (used + frac).min(one);
            beats.push(t_prev + used * dt);
            acc = T::zero();
            if used >= one {
                break;
            }
        }
        acc = acc + inc * (one - used);
        r_prev = r;
    }
    Ok(BeatTrain { beat_times: beats, params: *params, seed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn constant_rate_beats_every_second() {
        let p = PsvSdgParams::new(1.0, 0.0, 0.0, 10.0);
        let b = ipfm_generate(&p, 0).unwrap();
        assert_eq!(b.len(), 10);
        for (k, &t) in b.beat_times.iter().enumerate() {
            assert_abs_diff_eq!(t, (k + 1) as f64, epsilon = 1e-6);
        }
    }

    #[test]
    fn non_positive_rate_rejected() {
        let p = PsvSdgParams::new(1.0, 0.6, 0.5, 60.0);
        assert!(matches!(ipfm_generate(&p, 0), Err(Error::NonPositiveRate(_))));
    }

    #[test]
    fn invalid_dt_and_duration() {
        let p = PsvSdgParams::new(1.0, 0.0, 0.0, 60.0).with_dt(0.01);
        assert!(matches!(ipfm_generate(&p, 0), Err(Error::InvalidParams(_))));
        let p = PsvSdgParams::new(1.0, 0.0, 0.0, 5.0);
        assert!(matches!(ipfm_generate(&p, 0), Err(Error::InvalidParams(_))));
    }

    /// Beat times from a much finer plain Euler-free oracle: integrate the
    /// closed-form antiderivative and bisect each crossing.
    fn analytic_beats(mu: f64, cs: f64, cv: f64, t_end: f64) -> Vec<f64> {
        let ws = 2.0 * std::f64::consts::PI * F_SYMPATHETIC;
        let wv = 2.0 * std::f64::consts::PI * F_VAGAL;
        let big = |t: f64| mu * t + cs * (1.0 - (ws * t).cos()) / ws + cv * (1.0 - (wv * t).cos()) / wv;
        let mut out = Vec::new();
        let mut k = 1.0;
        let mut lo = 0.0;
        while big(t_end) >= k {
            let mut hi = lo;
            while big(hi) < k {
                hi += 0.01;
            }
            let mut a = lo;
            for _ in 0..80 {
                let m = 0.5 * (a + hi);
                if big(m) < k {
                    a = m
                } else {
                    hi = m
                }
            }
            out.push(hi);
            lo = hi;
            k += 1.0;
        }
        out
    }

    #[test]
    fn vagal_modulation_matches_closed_form() {
        let p = PsvSdgParams::new(1.2, 0.0, 0.1, 120.0);
        let b = ipfm_generate(&p, 0).unwrap();
        let want = analytic_beats(1.2, 0.0, 0.1, 120.0);
        assert_eq!(b.len(), want.len());
        for (g, w) in b.beat_times.iter().zip(&want) {
            assert!((g - w).abs() < 1e-6, "{g} vs {w}");
        }
        let rr = b.intervals_ms();
        let mean = rr.iter().sum::<f64>() / rr.len() as f64;
        assert!((mean - 1000.0 / 1.2).abs() < 0.01 * 1000.0 / 1.2);
    }

    #[test]
    fn noise_is_seeded() {
        let p = PsvSdgParams::new(1.0, 0.05, 0.05, 60.0).with_noise(0.05);
        let a = ipfm_generate(&p, 7).unwrap();
        let b = ipfm_generate(&p, 7).unwrap();
        let c = ipfm_generate(&p, 8).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.beat_times, c.beat_times);
    }

    #[test]
    fn f32_generation() {
        let p = PsvSdgParams::<f32>::new(1.0, 0.0, 0.0, 20.0);
        let b = ipfm_generate(&p, 0).unwrap();
        // single-precision accumulation may lose the beat that lands exactly on the end
        assert!(b.len() == 19 || b.len() == 20);
        for (k, &t) in b.beat_times.iter().take(19).enumerate() {
            assert!((t - (k + 1) as f32).abs() < 5e-3, "{t}");
        }
    }

    fn valid_params() -> impl Strategy<Value = (f64, f64, f64, f64)> {
        (0.9f64..1.6, 0.0f64..0.2, 0.0f64..0.2, 20.0f64..60.0)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn beat_count_matches_integral((mu, cs, cv, dur) in valid_params()) {
            let p = PsvSdgParams::new(mu, cs, cv, dur);
            let b = ipfm_generate(&p, 0).unwrap();
            let ws = p.omega_s;
            let wv = p.omega_v;
            let integral = mu * dur + cs * (1.0 - (ws * dur).cos()) / ws + cv * (1.0 - (wv * dur).cos()) / wv;
            prop_assert!((b.len() as f64 - integral.round()).abs() <= 1.0);
        }

        #[test]
        fn each_beat_integrates_to_one((mu, cs, cv, dur) in valid_params()) {
            let p = PsvSdgParams::new(mu, cs, cv, dur);
            let b = ipfm_generate(&p, 0).unwrap();
            let ws = p.omega_s;
            let wv = p.omega_v;
            let big = |t: f64| mu * t + cs * (1.0 - (ws * t).cos()) / ws + cv * (1.0 - (wv * t).cos()) / wv;
            let mut prev = 0.0;
            for &t in &b.beat_times {
                prop_assert!((big(t) - big(prev) - 1.0).abs() <= mu * p.dt);
                prev = t;
            }
        }

        #[test]
        fn halving_dt_moves_beats_less_than_step((mu, cs, cv, dur) in valid_params()) {
            let p = PsvSdgParams::new(mu, cs, cv, dur);
            let a = ipfm_generate(&p, 0).unwrap();
            let b = ipfm_generate(&p.with_dt(p.dt / 2.0), 0).unwrap();
            prop_assert!((a.len() as i64 - b.len() as i64).abs() <= 1);
            for (x, y) in a.beat_times.iter().zip(&b.beat_times) {
                prop_assert!((x - y).abs() < mu * p.dt);
            }
        }
    }
}
