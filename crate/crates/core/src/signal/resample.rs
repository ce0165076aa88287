//! Rational-ratio polyphase resampling with a Kaiser-windowed sinc
//! anti-aliasing filter.

use std::f64::consts::PI;

use super::SignalRecord;
use crate::{Error, Result};

const KAISER_BETA: f64 = 8.0;
const HALF_LEN_FACTOR: usize = 10;

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Reduce `to / from` to a ratio of small integers.
fn ratio(from: f64, to: f64) -> Result<(usize, usize)> {
    let mut scale = 1.0;
    while scale <= 1e6 {
        let (a, b) = (from * scale, to * scale);
        if (a - a.round()).abs() < 1e-9 && (b - b.round()).abs() < 1e-9 {
            let (a, b) = (a.round() as u64, b.round() as u64);
            let g = gcd(a, b);
            return Ok(((b / g) as usize, (a / g) as usize));
        }
        scale *= 10.0;
    }
    Err(Error::InvalidArgument(format!(
        "cannot express {to} / {from} as a rational resampling ratio"
    )))
}

/// Modified Bessel function of the first kind, order zero.
fn bessel_i0(x: f64) -> f64 {
    let q = (x / 2.0).powi(2);
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..200 {
        term *= q / (k * k) as f64;
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
    }
    sum
}

fn design_lowpass(up: usize, down: usize) -> (Vec<f64>, usize) {
    let max_rate = up.max(down);
    let half = HALF_LEN_FACTOR * max_rate;
    let cutoff = 1.0 / max_rate as f64;
    let len = 2 * half + 1;
    let norm = bessel_i0(KAISER_BETA);
    let mut h: Vec<f64> = (0..len)
        .map(|k| {
            let t = k as f64 - half as f64;
            let arg = PI * cutoff * t;
            let sinc = if t == 0.0 { 1.0 } else { arg.sin() / arg };
            let r = t / half as f64;
            let w = bessel_i0(KAISER_BETA * (1.0 - r * r).max(0.0).sqrt()) / norm;
            cutoff * sinc * w
        })
        .collect();
    let s: f64 = h.iter().sum();
    let g = up as f64 / s;
    h.iter_mut().for_each(|v| *v *= g);
    (h, half)
}

/// Resample one series from `fs` to `target_fs`. Output length is
/// `round(n · target_fs / fs)`.
pub fn resample_series(x: &[f64], fs: f64, target_fs: f64) -> Result<Vec<f64>> {
    if !(target_fs.is_finite() && target_fs > 0.0) {
        return Err(Error::InvalidArgument(format!("target rate must be positive, got {target_fs}")));
    }
    if !(fs.is_finite() && fs > 0.0) {
        return Err(Error::InvalidArgument(format!("source rate must be positive, got {fs}")));
    }
    if target_fs == fs {
        return Ok(x.to_vec());
    }
    let n = x.len();
    if n < 2 {
        return Err(Error::TooShort { needed: 2, got: n });
    }
    let (up, down) = ratio(fs, target_fs)?;
    let (h, half) = design_lowpass(up, down);
    let n_out = (n as f64 * up as f64 / down as f64).round() as usize;

    // odd reflection keeps the edges from sagging toward zero
    let pad = (half.div_ceil(up) + 1).min(n - 1);
    let ext = super::odd_extend(x, pad);
    let n_ext = ext.len() as isize;

    let mut y = Vec::with_capacity(n_out);
    let (up_i, half_i, pad_i) = (up as isize, half as isize, pad as isize);
    for m in 0..n_out {
        // upsampled-grid position of output sample m, relative to ext[0]
        let centre = (m * down) as isize + pad_i * up_i;
        let j_lo = (centre - half_i).max(0);
        let j_lo = (j_lo + up_i - 1) / up_i;
        let j_hi = ((centre + half_i) / up_i).min(n_ext - 1);
        let mut acc = 0.0;
        for j in j_lo..=j_hi {
            let k = half_i + centre - j * up_i;
            acc += ext[j as usize] * h[k as usize];
        }
        y.push(acc);
    }
    Ok(y)
}

/// Resample every channel of `rec` to `target_fs`.
pub fn resample(rec: &SignalRecord, target_fs: f64) -> Result<SignalRecord> {
    rec.map_channels(target_fs, |c| resample_series(c, rec.fs(), target_fs))
}
