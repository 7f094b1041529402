use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FilterKind {
    Bandpass,
    Highpass,
    Lowpass,
}

/// Butterworth filter request.
///
/// `low_hz` is the cutoff of a highpass, `high_hz` that of a lowpass; a
/// bandpass uses both. `order` is the prototype order, so a bandpass has
/// `2·order` poles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterSpec<T: Scalar> {
    pub kind: FilterKind,
    pub low_hz: T,
    pub high_hz: T,
    pub order: usize,
    pub zero_phase: bool,
}

impl<T: Scalar> FilterSpec<T> {
    pub fn bandpass(low_hz: T, high_hz: T) -> Self {
        Self { kind: FilterKind::Bandpass, low_hz, high_hz, order: 4, zero_phase: true }
    }

    pub fn highpass(low_hz: T) -> Self {
        Self { kind: FilterKind::Highpass, low_hz, high_hz: T::zero(), order: 4, zero_phase: true }
    }

    pub fn lowpass(high_hz: T) -> Self {
        Self { kind: FilterKind::Lowpass, low_hz: T::zero(), high_hz, order: 4, zero_phase: true }
    }

    pub fn validate(&self, rate: f64) -> Result<()> {
        let nyq = rate / 2.0;
        let lo = self.low_hz.as_f64();
        let hi = self.high_hz.as_f64();
        if self.order == 0 {
            return Err(Error::InvalidFilter("order must be ≥ 1".into()));
        }
        let check_cut = |c: f64| -> Result<()> {
            if !(c > 0.0) {
                return Err(Error::InvalidFilter(format!("cutoff must be > 0, got {c}")));
            }
            if c >= nyq {
                return Err(Error::CutoffAboveNyquist { cutoff: c, rate });
            }
            Ok(())
        };
        match self.kind {
            FilterKind::Lowpass => check_cut(hi),
            FilterKind::Highpass => check_cut(lo),
            FilterKind::Bandpass => {
                check_cut(lo)?;
                check_cut(hi)?;
                if lo >= hi {
                    return Err(Error::InvalidFilter(format!("low_hz {lo} ≥ high_hz {hi}")));
                }
                Ok(())
            }
        }
    }
}

/// One biquad, `[b0, b1, b2, a1, a2]` with `a0 = 1`.
pub type Section = [f64; 5];

/// Designs the filter as cascaded second-order sections (bilinear transform
/// of the analog Butterworth prototype, cutoffs pre-warped).
pub fn butterworth_sos<T: Scalar>(spec: &FilterSpec<T>, rate: f64) -> Result<Vec<Section>> {
    spec.validate(rate)?;
    let n = spec.order;
    let fs2 = 2.0 * rate;
    let warp = |f: f64| fs2 * (std::f64::consts::PI * f / rate).tan();

    let proto: Vec<Complex64> = (0..n)
        .map(|k| {
            let theta = std::f64::consts::PI * (2 * k + n + 1) as f64 / (2 * n) as f64;
            Complex64::new(theta.cos(), theta.sin())
        })
        .collect();

    let (poles, zeros, mut gain): (Vec<Complex64>, Vec<Complex64>, f64) = match spec.kind {
        FilterKind::Lowpass => {
            let w = warp(spec.high_hz.as_f64());
            (proto.iter().map(|p| p * w).collect(), Vec::new(), w.powi(n as i32))
        }
        FilterKind::Highpass => {
            let w = warp(spec.low_hz.as_f64());
            let prod = proto.iter().fold(Complex64::new(1.0, 0.0), |a, p| a * (-p));
            (proto.iter().map(|p| w / p).collect(), vec![Complex64::new(0.0, 0.0); n], 1.0 / prod.re)
        }
        FilterKind::Bandpass => {
            let w1 = warp(spec.low_hz.as_f64());
            let w2 = warp(spec.high_hz.as_f64());
            let bw = w2 - w1;
            let w0sq = w1 * w2;
            let mut ps = Vec::with_capacity(2 * n);
            for p in &proto {
                let lp = p * (bw / 2.0);
                let root = (lp * lp - w0sq).sqrt();
                ps.push(lp + root);
                ps.push(lp - root);
            }
            (ps, vec![Complex64::new(0.0, 0.0); n], bw.powi(n as i32))
        }
    };

    // Bilinear map; excess poles become zeros at Nyquist.
    let zmap = |s: &Complex64| (fs2 + s) / (fs2 - s);
    let num = zeros.iter().fold(Complex64::new(1.0, 0.0), |a, z| a * (fs2 - z));
    let den = poles.iter().fold(Complex64::new(1.0, 0.0), |a, p| a * (fs2 - p));
    gain *= (num / den).re;
    let pz: Vec<Complex64> = poles.iter().map(zmap).collect();
    let mut zz: Vec<f64> = zeros.iter().map(|z| zmap(z).re).collect();
    zz.extend(std::iter::repeat(-1.0).take(poles.len() - zeros.len()));
    // Interleave +1 and −1 zeros so bandpass sections get (1 − z⁻²).
    zz.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let (pos, neg): (Vec<f64>, Vec<f64>) = zz.iter().partition(|&&z| z > 0.0);
    let mut zeros_ordered = Vec::with_capacity(zz.len());
    let (mut i, mut j) = (0, 0);
    while i < pos.len() || j < neg.len() {
        if i < pos.len() {
            zeros_ordered.push(pos[i]);
            i += 1;
        }
        if j < neg.len() {
            zeros_ordered.push(neg[j]);
            j += 1;
        }
    }

    // Conjugate pairs first, real poles after.
    let mut complex: Vec<Complex64> = pz.iter().copied().filter(|p| p.im > 1e-12).collect();
    complex.sort_by(|a, b| a.norm().partial_cmp(&b.norm()).unwrap());
    let mut real: Vec<f64> = pz.iter().filter(|p| p.im.abs() <= 1e-12).map(|p| p.re).collect();
    real.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let mut den_sections: Vec<[f64; 2]> = complex.iter().map(|p| [-2.0 * p.re, p.norm_sqr()]).collect();
    let mut k = 0;
    while k + 1 < real.len() {
        den_sections.push([-(real[k] + real[k + 1]), real[k] * real[k + 1]]);
        k += 2;
    }
    let single = if k < real.len() { Some(real[k]) } else { None };

    let mut sos = Vec::new();
    let mut zi = zeros_ordered.into_iter();
    for a in den_sections {
        let z1 = zi.next().unwrap_or(0.0);
        let z2 = zi.next().unwrap_or(0.0);
        sos.push([1.0, -(z1 + z2), z1 * z2, a[0], a[1]]);
    }
    if let Some(p) = single {
        let z = zi.next().unwrap_or(0.0);
        sos.push([1.0, -z, 0.0, -p, 0.0]);
    }
    for v in &mut sos[0][..3] {
        *v *= gain;
    }
    Ok(sos)
}

/// Direct-form-II-transposed cascade; `state` holds `[z1, z2]` per section.
fn sosfilt(sos: &[Section], x: &mut [f64], state: &mut [[f64; 2]]) {
    for (s, st) in sos.iter().zip(state.iter_mut()) {
        let [b0, b1, b2, a1, a2] = *s;
        let (mut z1, mut z2) = (st[0], st[1]);
        for v in x.iter_mut() {
            let xin = *v;
            let y = b0 * xin + z1;
            z1 = b1 * xin - a1 * y + z2;
            z2 = b2 * xin - a2 * y;
            *v = y;
        }
        st[0] = z1;
        st[1] = z2;
    }
}

/// Steady-state section states for a unit step input.
fn sosfilt_zi(sos: &[Section]) -> Vec<[f64; 2]> {
    let mut scale = 1.0;
    sos.iter()
        .map(|&[b0, b1, b2, a1, a2]| {
            let y = (b0 + b1 + b2) / (1.0 + a1 + a2);
            let zi = [scale * (y - b0), scale * (b2 - a2 * y)];
            scale *= y;
            zi
        })
        .collect()
}

/// Forward–backward filtering with odd-extension padding and steady-state
/// initial conditions.
pub fn sosfiltfilt(sos: &[Section], x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let pad = (3 * (2 * sos.len() + 1)).min(n.saturating_sub(1));
    let mut ext = Vec::with_capacity(n + 2 * pad);
    for i in (1..=pad).rev() {
        ext.push(2.0 * x[0] - x[i]);
    }
    ext.extend_from_slice(x);
    for i in 1..=pad {
        ext.push(2.0 * x[n - 1] - x[n - 1 - i]);
    }
    let zi = sosfilt_zi(sos);

    let x0 = ext[0];
    let mut st: Vec<[f64; 2]> = zi.iter().map(|z| [z[0] * x0, z[1] * x0]).collect();
    sosfilt(sos, &mut ext, &mut st);

    ext.reverse();
    let y0 = ext[0];
    let mut st: Vec<[f64; 2]> = zi.iter().map(|z| [z[0] * y0, z[1] * y0]).collect();
    sosfilt(sos, &mut ext, &mut st);
    ext.reverse();
    ext[pad..pad + n].to_vec()
}

/// Filters `signal` sampled at `rate` Hz. Output has the input length.
pub fn apply_filter<T: Scalar>(signal: &[T], rate: f64, spec: &FilterSpec<T>) -> Result<Vec<T>> {
    let sos = butterworth_sos(spec, rate)?;
    let need = 3 * spec.order;
    if signal.len() <= need {
        return Err(Error::SignalTooShort(format!(
            "{} samples, filter of order {} needs more than {need}",
            signal.len(),
            spec.order
        )));
    }
    if signal.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    let x: Vec<f64> = signal.iter().map(|v| v.as_f64()).collect();
    let y = if spec.zero_phase {
        sosfiltfilt(&sos, &x)
    } else {
        let mut y = x;
        let mut st = vec![[0.0; 2]; sos.len()];
        sosfilt(&sos, &mut y, &mut st);
        y
    };
    Ok(y.into_iter().map(T::lit).collect())
}
