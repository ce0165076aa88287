//! Butterworth band-pass and notch design as cascaded biquads, applied either
//! causally or forward-backward.

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;

use super::{odd_extend, SignalRecord};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FilterKind {
    Bandpass { low_hz: f64, high_hz: f64 },
    Notch { center_hz: f64, quality: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterSpec {
    pub kind: FilterKind,
    /// Order of the low-pass prototype. A band-pass of order `n` has `2n`
    /// poles (`n` sections). Ignored for notches, which are always one biquad.
    pub order: usize,
    pub zero_phase: bool,
}

impl FilterSpec {
    pub fn bandpass(low_hz: f64, high_hz: f64, order: usize) -> Self {
        Self {
            kind: FilterKind::Bandpass { low_hz, high_hz },
            order,
            zero_phase: true,
        }
    }

    pub fn notch(center_hz: f64, quality: f64) -> Self {
        Self {
            kind: FilterKind::Notch { center_hz, quality },
            order: 2,
            zero_phase: true,
        }
    }

    pub fn causal(mut self) -> Self {
        self.zero_phase = false;
        self
    }

    pub fn validate(&self, fs: f64) -> Result<()> {
        let nyq = fs / 2.0;
        if !(fs.is_finite() && fs > 0.0) {
            return Err(Error::InvalidSpec(format!("sampling rate {fs}")));
        }
        if self.order == 0 {
            return Err(Error::InvalidSpec("order must be positive".into()));
        }
        match self.kind {
            FilterKind::Bandpass { low_hz, high_hz } => {
                if !(low_hz > 0.0) {
                    return Err(Error::InvalidSpec(format!("low corner {low_hz} Hz must be > 0")));
                }
                if !(high_hz > low_hz) {
                    return Err(Error::InvalidSpec(format!(
                        "high corner {high_hz} Hz must exceed low corner {low_hz} Hz"
                    )));
                }
                if !(high_hz < nyq) {
                    return Err(Error::InvalidSpec(format!(
                        "high corner {high_hz} Hz must be below Nyquist {nyq} Hz"
                    )));
                }
            }
            FilterKind::Notch { center_hz, quality } => {
                if !(center_hz > 0.0 && center_hz < nyq) {
                    return Err(Error::InvalidSpec(format!(
                        "notch center {center_hz} Hz must lie in (0, {nyq}) Hz"
                    )));
                }
                if !(quality > 0.0) {
                    return Err(Error::InvalidSpec(format!("quality factor {quality} must be > 0")));
                }
            }
        }
        Ok(())
    }
}

/// One second-order section, `a[0] == 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Biquad {
    pub b: [f64; 3],
    pub a: [f64; 3],
}

impl Biquad {
    fn response(&self, z_inv: Complex64) -> Complex64 {
        let z2 = z_inv * z_inv;
        (self.b[0] + z_inv * self.b[1] + z2 * self.b[2])
            / (self.a[0] + z_inv * self.a[1] + z2 * self.a[2])
    }

    fn dc_gain(&self) -> f64 {
        (self.b[0] + self.b[1] + self.b[2]) / (self.a[0] + self.a[1] + self.a[2])
    }

    /// Direct-form-II-transposed state reached after a unit step.
    fn step_state(&self) -> [f64; 2] {
        let g = self.dc_gain();
        [g - self.b[0], self.b[2] - self.a[2] * g]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FilterCoefficients {
    sections: Vec<Biquad>,
}

impl FilterCoefficients {
    pub fn sections(&self) -> &[Biquad] {
        &self.sections
    }

    /// Overall filter order.
    pub fn order(&self) -> usize {
        2 * self.sections.len()
    }

    /// Complex frequency response at `f_hz`.
    pub fn response(&self, f_hz: f64, fs: f64) -> Complex64 {
        let z_inv = Complex64::from_polar(1.0, -2.0 * PI * f_hz / fs);
        self.sections
            .iter()
            .fold(Complex64::new(1.0, 0.0), |acc, s| acc * s.response(z_inv))
    }

    pub fn gain(&self, f_hz: f64, fs: f64) -> f64 {
        self.response(f_hz, fs).norm()
    }

    fn initial_states(&self, x0: f64) -> Vec<[f64; 2]> {
        let mut scale = x0;
        self.sections
            .iter()
            .map(|s| {
                let st = s.step_state();
                let out = [st[0] * scale, st[1] * scale];
                scale *= s.dc_gain();
                out
            })
            .collect()
    }

    fn run(&self, x: &mut [f64], mut state: Vec<[f64; 2]>) {
        for (s, z) in self.sections.iter().zip(state.iter_mut()) {
            let [b0, b1, b2] = s.b;
            let [_, a1, a2] = s.a;
            for v in x.iter_mut() {
                let xin = *v;
                let y = b0 * xin + z[0];
                z[0] = b1 * xin - a1 * y + z[1];
                z[1] = b2 * xin - a2 * y;
                *v = y;
            }
        }
    }
}

/// Design the recursive filter described by `spec` at sampling rate `fs`.
pub fn design_filter(spec: &FilterSpec, fs: f64) -> Result<FilterCoefficients> {
    spec.validate(fs)?;
    let sections = match spec.kind {
        FilterKind::Bandpass { low_hz, high_hz } => butter_bandpass(spec.order, low_hz, high_hz, fs),
        FilterKind::Notch { center_hz, quality } => vec![notch(center_hz, quality, fs)],
    };
    Ok(FilterCoefficients { sections })
}

fn notch(center_hz: f64, quality: f64, fs: f64) -> Biquad {
    let w0 = 2.0 * PI * center_hz / fs;
    let bw = w0 / quality;
    let gain = 1.0 / (1.0 + (bw / 2.0).tan());
    let c = w0.cos();
    Biquad {
        b: [gain, -2.0 * gain * c, gain],
        a: [1.0, -2.0 * gain * c, 2.0 * gain - 1.0],
    }
}

fn butter_bandpass(order: usize, low_hz: f64, high_hz: f64, fs: f64) -> Vec<Biquad> {
    let fs2 = 2.0 * fs;
    // pre-warped analog corners
    let w_lo = fs2 * (PI * low_hz / fs).tan();
    let w_hi = fs2 * (PI * high_hz / fs).tan();
    let bw = w_hi - w_lo;
    let w0 = (w_lo * w_hi).sqrt();

    let n = order as f64;
    let mut z_poles = Vec::with_capacity(2 * order);
    for k in 0..order {
        let theta = PI * (2.0 * k as f64 + 1.0 + n) / (2.0 * n);
        let p = Complex64::from_polar(1.0, theta);
        let half = p * (bw / 2.0);
        let root = (half * half - w0 * w0).sqrt();
        for s in [half + root, half - root] {
            z_poles.push((fs2 + s) / (fs2 - s));
        }
    }

    let tol = 1e-10;
    let mut complex: Vec<Complex64> = z_poles.iter().copied().filter(|p| p.im > tol).collect();
    let mut real: Vec<f64> = z_poles.iter().filter(|p| p.im.abs() <= tol).map(|p| p.re).collect();
    complex.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    real.sort_by(f64::total_cmp);

    let mut sections: Vec<Biquad> = complex
        .iter()
        .map(|p| Biquad {
            b: [1.0, 0.0, -1.0],
            a: [1.0, -2.0 * p.re, p.norm_sqr()],
        })
        .collect();
    for pair in real.chunks(2) {
        let (r1, r2) = (pair[0], *pair.get(1).unwrap_or(&0.0));
        sections.push(Biquad {
            b: [1.0, 0.0, -1.0],
            a: [1.0, -(r1 + r2), r1 * r2],
        });
    }

    // unit gain at the (digital image of the) geometric centre frequency
    let fc = fs / PI * (w0 / fs2).atan();
    let coeffs = FilterCoefficients { sections };
    let g = coeffs.gain(fc, fs);
    let mut sections = coeffs.sections;
    for v in sections[0].b.iter_mut() {
        *v /= g;
    }
    sections
}

/// Filter one series. Zero-phase mode runs forward then backward over an
/// odd extension of `3 × order` samples per side, with steady-state initial
/// conditions; causal mode starts from the steady state of the first sample.
pub fn filter_series(x: &[f64], coeffs: &FilterCoefficients, zero_phase: bool) -> Result<Vec<f64>> {
    let pad = 3 * coeffs.order();
    if x.len() <= pad {
        return Err(Error::TooShort {
            needed: pad + 1,
            got: x.len(),
        });
    }
    if !zero_phase {
        let mut y = x.to_vec();
        coeffs.run(&mut y, coeffs.initial_states(x[0]));
        return Ok(y);
    }
    let mut ext = odd_extend(x, pad);
    let x0 = ext[0];
    coeffs.run(&mut ext, coeffs.initial_states(x0));
    ext.reverse();
    let y0 = ext[0];
    coeffs.run(&mut ext, coeffs.initial_states(y0));
    ext.reverse();
    Ok(ext[pad..pad + x.len()].to_vec())
}

/// Filter every channel of `rec`.
pub fn apply_filter(
    rec: &SignalRecord,
    coeffs: &FilterCoefficients,
    zero_phase: bool,
) -> Result<SignalRecord> {
    if rec.n_samples() == 0 {
        return Err(Error::TooShort { needed: 1, got: 0 });
    }
    rec.map_channels(rec.fs(), |c| filter_series(c, coeffs, zero_phase))
}
