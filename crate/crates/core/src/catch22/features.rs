//! The 22 individual features. Every function takes an already z-scored
//! series and mirrors the reference C implementation step by step, including
//! its quirks, so results agree to floating-point noise.

use std::f64::consts::E;

use rustfft::{num_complex::Complex64, FftPlanner};

use crate::stats::{mean, median, sample_std};

/// `PI` as hard-coded in the reference spectral features.
#[allow(clippy::approx_constant)]
const REF_PI: f64 = 3.14159265359;

pub(super) fn nextpow2(n: usize) -> usize {
    n.next_power_of_two()
}

/// Normalized autocorrelation at every lag of a zero-padded FFT of length
/// `2 · nextpow2(n)`.
pub(super) fn autocorrs(y: &[f64]) -> Vec<f64> {
    let n = y.len();
    let nfft = nextpow2(n) << 1;
    let m = mean(y);
    let mut buf: Vec<Complex64> = y
        .iter()
        .map(|v| Complex64::new(v - m, 0.0))
        .chain(std::iter::repeat(Complex64::new(0.0, 0.0)))
        .take(nfft)
        .collect();
    let mut planner = FftPlanner::<f64>::new();
    planner.plan_fft_forward(nfft).process(&mut buf);
    for c in buf.iter_mut() {
        *c = Complex64::new(c.norm_sqr(), 0.0);
    }
    // a second forward transform of a real, even spectrum gives the same
    // real part as the inverse, up to the 1/N factor removed below
    planner.plan_fft_forward(nfft).process(&mut buf);
    let d = buf[0].re;
    buf.iter().map(|c| c.re / d).collect()
}

pub(super) fn firstzero(y: &[f64], maxtau: usize) -> usize {
    let ac = autocorrs(y);
    let mut i = 0;
    while ac[i] > 0.0 && i < maxtau {
        i += 1;
    }
    i
}

fn histcounts(y: &[f64], n_bins: usize) -> (Vec<usize>, Vec<f64>) {
    let (min, max) = min_max(y);
    let step = (max - min) / n_bins as f64;
    let mut counts = vec![0usize; n_bins];
    for v in y {
        // float-to-int truncation, clamped into range
        let b = ((v - min) / step) as i64;
        counts[b.clamp(0, n_bins as i64 - 1) as usize] += 1;
    }
    let edges = (0..=n_bins).map(|i| i as f64 * step + min).collect();
    (counts, edges)
}

fn min_max(y: &[f64]) -> (f64, f64) {
    y.iter().fold((f64::MAX, -f64::MAX), |(lo, hi), &v| {
        (if v < lo { v } else { lo }, if v > hi { v } else { hi })
    })
}

pub(super) fn histogram_mode(y: &[f64], n_bins: usize) -> f64 {
    let (counts, edges) = histcounts(y, n_bins);
    let mut max_count = 0usize;
    let mut n_max = 1;
    let mut out = 0.0;
    for i in 0..n_bins {
        let centre = (edges[i] + edges[i + 1]) * 0.5;
        if counts[i] > max_count {
            max_count = counts[i];
            n_max = 1;
            out = centre;
        } else if counts[i] == max_count {
            n_max += 1;
            out += centre;
        }
    }
    out / n_max as f64
}

pub(super) fn co_f1ecac(y: &[f64]) -> f64 {
    let n = y.len();
    let ac = autocorrs(y);
    let thresh = 1.0 / E;
    for i in 0..n.saturating_sub(2) {
        if ac[i + 1] < thresh {
            let m = ac[i + 1] - ac[i];
            let dy = thresh - ac[i];
            return i as f64 + dy / m;
        }
    }
    n as f64
}

pub(super) fn co_first_min_ac(y: &[f64]) -> f64 {
    let n = y.len();
    let ac = autocorrs(y);
    for i in 1..n.saturating_sub(1) {
        if ac[i] < ac[i - 1] && ac[i] < ac[i + 1] {
            return i as f64;
        }
    }
    n as f64
}

pub(super) fn co_histogram_ami_even_2_5(y: &[f64]) -> f64 {
    const TAU: usize = 2;
    const NB: usize = 5;
    let n = y.len();
    let (min, max) = min_max(y);
    let step = (max - min + 0.2) / NB as f64;
    let edges: Vec<f64> = (0..=NB).map(|i| min + step * i as f64 - 0.1).collect();
    // index of the first edge exceeding v; 0 if none
    let assign = |v: f64| edges.iter().position(|&e| v < e).unwrap_or(0);

    let mut joint = [[0.0f64; NB]; NB];
    let mut total = 0.0;
    for i in 0..n - TAU {
        let (a, b) = (assign(y[i]), assign(y[i + TAU]));
        if (1..=NB).contains(&a) && (1..=NB).contains(&b) {
            joint[a - 1][b - 1] += 1.0;
            total += 1.0;
        }
    }
    let mut pi = [0.0; NB];
    let mut pj = [0.0; NB];
    for i in 0..NB {
        for j in 0..NB {
            joint[i][j] /= total;
            pi[i] += joint[i][j];
            pj[j] += joint[i][j];
        }
    }
    let mut ami = 0.0;
    for i in 0..NB {
        for j in 0..NB {
            if joint[i][j] > 0.0 {
                ami += joint[i][j] * (joint[i][j] / (pj[j] * pi[i])).ln();
            }
        }
    }
    ami
}

pub(super) fn co_trev_1_num(y: &[f64]) -> f64 {
    let d: Vec<f64> = y.windows(2).map(|w| (w[1] - w[0]).powi(3)).collect();
    mean(&d)
}

pub(super) fn md_hrv_classic_pnn40(y: &[f64]) -> f64 {
    let n = y.len();
    let count = y
        .windows(2)
        .filter(|w| (w[1] - w[0]).abs() * 1000.0 > 40.0)
        .count();
    count as f64 / (n - 1) as f64
}

pub(super) fn sb_binary_stats_mean_longstretch1(y: &[f64]) -> f64 {
    let n = y.len();
    let m = mean(y);
    let mut max_stretch = 0usize;
    let mut last = 0usize;
    for i in 0..n - 1 {
        let bit = y[i] - m > 0.0;
        if !bit || i == n - 2 {
            max_stretch = max_stretch.max(i - last);
            last = i;
        }
    }
    max_stretch as f64
}

pub(super) fn sb_binary_stats_diff_longstretch0(y: &[f64]) -> f64 {
    let n = y.len();
    let mut max_stretch = 0usize;
    let mut last = 0usize;
    for i in 0..n - 1 {
        let bit = y[i + 1] - y[i] >= 0.0;
        if bit || i == n - 2 {
            max_stretch = max_stretch.max(i - last);
            last = i;
        }
    }
    max_stretch as f64
}

/// Quantile with the reference's half-sample convention.
fn ref_quantile(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    let lim = 0.5 / n as f64;
    if q < lim {
        return sorted[0];
    }
    if q > 1.0 - lim {
        return sorted[n - 1];
    }
    let idx = n as f64 * q - 0.5;
    let l = idx.floor();
    let r = idx.ceil();
    let (li, ri) = (l as usize, r as usize);
    // l == r gives 0/0 in the reference too; it only happens when idx is integral
    if li == ri {
        return sorted[li];
    }
    sorted[li] + (idx - l) * (sorted[ri] - sorted[li]) / (r - l)
}

/// Labels 1..=groups by equiprobable quantile bins. 0 marks values that fall
/// in no bin (cannot happen for finite input).
fn coarse_grain(y: &[f64], groups: usize) -> Vec<usize> {
    let mut sorted = y.to_vec();
    sorted.sort_by(f64::total_cmp);
    let step = 1.0 / groups as f64;
    let mut ls = Vec::with_capacity(groups + 1);
    let mut acc = 0.0;
    for _ in 0..=groups {
        ls.push(acc);
        acc += step;
    }
    let mut th: Vec<f64> = ls.iter().map(|&q| ref_quantile(&sorted, q)).collect();
    th[0] -= 1.0;
    let mut labels = vec![0usize; y.len()];
    for i in 0..groups {
        for (l, &v) in labels.iter_mut().zip(y) {
            if v > th[i] && v <= th[i + 1] {
                *l = i + 1;
            }
        }
    }
    labels
}

/// Returns NaN when the series is constant.
pub(super) fn sb_transition_matrix_3ac_sumdiagcov(y: &[f64]) -> f64 {
    let n = y.len();
    if y.iter().all(|&v| v == y[0]) {
        return f64::NAN;
    }
    const G: usize = 3;
    let tau = firstzero(y, n).max(1);
    let n_down = (n - 1) / tau + 1;
    let down: Vec<f64> = (0..n_down).map(|i| y[i * tau]).collect();
    let cg = coarse_grain(&down, G);
    let mut t = [[0.0f64; G]; G];
    for j in 0..n_down - 1 {
        if cg[j] > 0 && cg[j + 1] > 0 {
            t[cg[j] - 1][cg[j + 1] - 1] += 1.0;
        }
    }
    for row in t.iter_mut() {
        for v in row.iter_mut() {
            *v /= (n_down - 1) as f64;
        }
    }
    // sum of per-column variances (n - 1 denominator)
    (0..G)
        .map(|c| {
            let col = [t[0][c], t[1][c], t[2][c]];
            let m = mean(&col);
            col.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (G - 1) as f64
        })
        .sum()
}

/// Least-squares cubic spline with knots at 0, floor(n/2) - 1 and n - 1,
/// evaluated at every sample.
fn spline_trend(y: &[f64]) -> Vec<f64> {
    let n = y.len();
    let scale = (n - 1).max(1) as f64;
    let knot = ((n / 2) as f64 - 1.0).max(0.0) / scale;
    let basis = |i: usize| -> [f64; 5] {
        let s = i as f64 / scale;
        let k = (s - knot).max(0.0);
        [1.0, s, s * s, s * s * s, k * k * k]
    };
    let mut ata = [[0.0f64; 5]; 5];
    let mut atb = [0.0f64; 5];
    for (i, &v) in y.iter().enumerate() {
        let b = basis(i);
        for r in 0..5 {
            atb[r] += b[r] * v;
            for c in 0..5 {
                ata[r][c] += b[r] * b[c];
            }
        }
    }
    let coef = solve5(ata, atb);
    (0..n)
        .map(|i| basis(i).iter().zip(&coef).map(|(b, c)| b * c).sum())
        .collect()
}

/// Gaussian elimination with partial pivoting.
fn solve5(mut a: [[f64; 5]; 5], mut b: [f64; 5]) -> [f64; 5] {
    for col in 0..5 {
        let piv = (col..5)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        if a[col][col] == 0.0 {
            continue;
        }
        for r in col + 1..5 {
            let f = a[r][col] / a[col][col];
            for c in col..5 {
                a[r][c] -= f * a[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = [0.0; 5];
    for r in (0..5).rev() {
        let s: f64 = (r + 1..5).map(|c| a[r][c] * x[c]).sum();
        x[r] = if a[r][r] == 0.0 { 0.0 } else { (b[r] - s) / a[r][r] };
    }
    x
}

pub(super) fn pd_periodicity_wang_th0_01(y: &[f64]) -> f64 {
    let n = y.len();
    let th = 0.01;
    let trend = spline_trend(y);
    let sub: Vec<f64> = y.iter().zip(&trend).map(|(a, b)| a - b).collect();
    let acmax = n.div_ceil(3);
    let acf: Vec<f64> = (1..=acmax)
        .map(|tau| {
            let m = n - tau;
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
            let Some(&trough) = troughs.last() else {
                continue;
            };
            let peak = acf[i];
            if peak - acf[trough] < th || peak < 0.0 {
                continue;
            }
            return i as f64;
        }
    }
    0.0
}

pub(super) fn co_embed2_dist_tau_d_expfit_meandiff(y: &[f64]) -> f64 {
    let n = y.len();
    let mut tau = firstzero(y, n);
    if tau as f64 > n as f64 / 10.0 {
        tau = (n as f64 / 10.0).floor() as usize;
    }
    if n < tau + 2 {
        return f64::NAN;
    }
    let m = n - tau - 1;
    let d: Vec<f64> = (0..m)
        .map(|i| {
            let a = y[i + 1] - y[i];
            let b = y[i + tau] - y[i + tau + 1];
            (a * a + b * b).sqrt()
        })
        .collect();
    if m < 2 {
        return f64::NAN;
    }
    let l = mean(&d);
    let sd = sample_std(&d);
    if sd < 0.001 {
        return 0.0;
    }
    let (min, max) = min_max(&d);
    let n_bins = ((max - min) / (3.5 * sd / (m as f64).powf(1.0 / 3.0))).ceil() as usize;
    if n_bins == 0 {
        return 0.0;
    }
    let (counts, edges) = histcounts(&d, n_bins);
    let diffs: Vec<f64> = (0..n_bins)
        .map(|i| {
            let norm = counts[i] as f64 / m as f64;
            let expf = (-(edges[i] + edges[i + 1]) * 0.5 / l).exp() / l;
            (norm - expf.max(0.0)).abs()
        })
        .collect();
    mean(&diffs)
}

fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let mx = mean(x);
    let my = mean(y);
    let (mut nom, mut dx, mut dy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        nom += (a - mx) * (b - my);
        dx += (a - mx) * (a - mx);
        dy += (b - my) * (b - my);
    }
    nom / (dx * dy).sqrt()
}

fn autocorr_lag(y: &[f64], lag: usize) -> f64 {
    let n = y.len();
    pearson(&y[..n - lag], &y[lag..])
}

pub(super) fn in_auto_mutual_info_stats_40_gaussian_fmmi(y: &[f64]) -> f64 {
    let n = y.len();
    let tau = 40.min(n.div_ceil(2));
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

fn mean_residuals(y: &[f64], l: usize) -> Vec<f64> {
    (0..y.len() - l)
        .map(|i| {
            let est: f64 = y[i..i + l].iter().sum();
            y[i + l] - est / l as f64
        })
        .collect()
}

pub(super) fn fc_local_simple_mean1_tauresrat(y: &[f64]) -> f64 {
    let n = y.len();
    if n <= 1 {
        return f64::NAN;
    }
    let res = mean_residuals(y, 1);
    let r = firstzero(&res, res.len()) as f64;
    let z = firstzero(y, n) as f64;
    r / z
}

pub(super) fn fc_local_simple_mean3_stderr(y: &[f64]) -> f64 {
    if y.len() <= 4 {
        return f64::NAN;
    }
    sample_std(&mean_residuals(y, 3))
}

pub(super) fn dn_outlier_include_001_mdrmd(y: &[f64], sign: f64) -> f64 {
    let n = y.len();
    let inc = 0.01;
    if y.iter().all(|&v| v == y[0]) {
        return 0.0;
    }
    let work: Vec<f64> = y.iter().map(|v| sign * v).collect();
    let tot = work.iter().filter(|&&v| v >= 0.0).count();
    let max = work.iter().cloned().fold(f64::MIN, f64::max);
    if max < inc {
        return 0.0;
    }
    let n_thresh = (max / inc + 1.0) as usize;

    // highest threshold index j with v >= j * inc, or None below zero
    let bucket: Vec<Option<usize>> = work
        .iter()
        .map(|&v| {
            let q = v / inc;
            let mut j: i64 = if q >= (n_thresh - 1) as f64 {
                n_thresh as i64 - 1
            } else if q < 0.0 {
                -1
            } else {
                q as i64
            };
            while j + 1 < n_thresh as i64 && v >= (j + 1) as f64 * inc {
                j += 1;
            }
            while j >= 0 && v < j as f64 * inc {
                j -= 1;
            }
            (j >= 0).then_some(j as usize)
        })
        .collect();
    let mut cnt = vec![0usize; n_thresh];
    for b in bucket.iter().flatten() {
        cnt[*b] += 1;
    }
    let mut c = vec![0usize; n_thresh];
    let mut run = 0;
    for j in (0..n_thresh).rev() {
        run += cnt[j];
        c[j] = run;
    }
    let mut mj = 0;
    for (j, &cj) in c.iter().enumerate() {
        if (cj as f64 - 1.0) * 100.0 / tot as f64 > 2.0 {
            mj = j;
        }
    }
    let fbi = c.iter().position(|&cj| cj == 1).unwrap_or(n_thresh - 1);
    let trim = mj.min(fbi);

    let denom = n as f64 / 2.0;
    let ms: Vec<f64> = (0..=trim)
        .map(|j| {
            // 1-based positions of samples at or above threshold j, ascending
            let idx: Vec<f64> = bucket
                .iter()
                .enumerate()
                .filter(|(_, b)| matches!(b, Some(k) if *k >= j))
                .map(|(i, _)| (i + 1) as f64)
                .collect();
            median(&idx) / denom - 1.0
        })
        .collect();
    median(&ms)
}

fn welch_rect(y: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = y.len();
    let nfft = nextpow2(n);
    let m = mean(y);
    let mut buf: Vec<Complex64> = y
        .iter()
        .map(|v| Complex64::new(v - m, 0.0))
        .chain(std::iter::repeat(Complex64::new(0.0, 0.0)))
        .take(nfft)
        .collect();
    FftPlanner::<f64>::new().plan_fft_forward(nfft).process(&mut buf);
    let n_out = nfft / 2 + 1;
    let df = 1.0 / nfft as f64;
    let w: Vec<f64> = (0..n_out).map(|i| 2.0 * REF_PI * (i as f64 * df)).collect();
    let sw: Vec<f64> = (0..n_out)
        .map(|i| {
            let mut p = buf[i].norm_sqr() / n as f64;
            if i > 0 && i < n_out - 1 {
                p *= 2.0;
            }
            p / (2.0 * REF_PI)
        })
        .collect();
    (w, sw)
}

pub(super) fn sp_summaries_welch_rect_area_5_1(y: &[f64]) -> f64 {
    let (w, sw) = welch_rect(y);
    let dw = w[1] - w[0];
    sw[..sw.len() / 5].iter().sum::<f64>() * dw
}

pub(super) fn sp_summaries_welch_rect_centroid(y: &[f64]) -> f64 {
    let (w, sw) = welch_rect(y);
    let mut cs = Vec::with_capacity(sw.len());
    let mut acc = 0.0;
    for v in &sw {
        acc += v;
        cs.push(acc);
    }
    let half = cs[cs.len() - 1] * 0.5;
    cs.iter().position(|&c| c > half).map(|i| w[i]).unwrap_or(0.0)
}

pub(super) fn sb_motif_three_quantile_hh(y: &[f64]) -> f64 {
    let n = y.len();
    let yt = coarse_grain(y, 3);
    let mut counts = [[0usize; 3]; 3];
    for i in 0..n - 1 {
        if (1..=3).contains(&yt[i]) && (1..=3).contains(&yt[i + 1]) {
            counts[yt[i] - 1][yt[i + 1] - 1] += 1;
        }
    }
    let mut hh = 0.0;
    for row in counts {
        for c in row {
            let p = c as f64 / (n as f64 - 1.0);
            if p > 0.0 {
                hh -= p * p.ln();
            }
        }
    }
    hh
}

/// Log-spaced window sizes from 5 to n/2, deduplicated the way the
/// reference does it.
fn fluct_taus(n: usize) -> Vec<usize> {
    let lo = 5f64.ln();
    let hi = ((n / 2) as f64).ln();
    let steps = 50;
    let step = (hi - lo) / (steps - 1) as f64;
    let mut tau: Vec<i64> = (0..steps).map(|i| (lo + i as f64 * step).exp().round() as i64).collect();
    let mut n_tau = steps;
    for i in 0..steps - 1 {
        while tau[i] == tau[i + 1] && i < n_tau - 1 {
            for j in i + 1..steps - 1 {
                tau[j] = tau[j + 1];
            }
            n_tau -= 1;
        }
    }
    tau[..n_tau].iter().map(|&t| t.max(0) as usize).collect()
}

fn linreg(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let (mut sx, mut sx2, mut sxy, mut sy) = (0.0, 0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sx += a;
        sx2 += a * a;
        sxy += a * b;
        sy += b;
    }
    let denom = n * sx2 - sx * sx;
    if denom == 0.0 {
        return (0.0, 0.0);
    }
    ((n * sxy - sx * sy) / denom, (sy * sx2 - sx * sxy) / denom)
}

/// NaN when fewer than 12 distinct scales are available (the reference
/// returns 0 there).
pub(super) fn sc_fluct_anal_2_50_1_logi_prop_r1(y: &[f64], lag: usize, dfa: bool) -> f64 {
    let n = y.len();
    if n < 10 {
        return f64::NAN;
    }
    let taus = fluct_taus(n);
    let n_tau = taus.len();
    if n_tau < 12 {
        return f64::NAN;
    }
    let size_cs = n / lag;
    let mut ycs = vec![0.0; size_cs];
    ycs[0] = y[0];
    for i in 0..size_cs - 1 {
        ycs[i + 1] = ycs[i] + y[(i + 1) * lag];
    }

    let f: Vec<f64> = taus
        .iter()
        .map(|&t| {
            let n_buf = size_cs / t;
            let (mut sx, mut sx2) = (0.0, 0.0);
            for k in 0..t {
                let xv = (k + 1) as f64;
                sx += xv;
                sx2 += xv * xv;
            }
            let denom = t as f64 * sx2 - sx * sx;
            let mut fi = 0.0;
            for j in 0..n_buf {
                let w = &ycs[j * t..j * t + t];
                let (mut sxy, mut sy) = (0.0, 0.0);
                for (k, v) in w.iter().enumerate() {
                    sxy += (k + 1) as f64 * v;
                    sy += v;
                }
                let (m, b) = if denom == 0.0 {
                    (0.0, 0.0)
                } else {
                    ((t as f64 * sxy - sx * sy) / denom, (sy * sx2 - sx * sxy) / denom)
                };
                if dfa {
                    for (k, v) in w.iter().enumerate() {
                        let r = v - (m * (k + 1) as f64 + b);
                        fi += r * r;
                    }
                } else {
                    let mut mx = f64::MIN;
                    let mut mn = f64::MAX;
                    for (k, v) in w.iter().enumerate() {
                        let r = v - (m * (k + 1) as f64 + b);
                        mx = mx.max(r);
                        mn = mn.min(r);
                    }
                    fi += (mx - mn) * (mx - mn);
                }
            }
            if dfa {
                (fi / (n_buf * t) as f64).sqrt()
            } else {
                (fi / n_buf as f64).sqrt()
            }
        })
        .collect();

    let logtt: Vec<f64> = taus.iter().map(|&t| (t as f64).ln()).collect();
    let logff: Vec<f64> = f.iter().map(|v| v.ln()).collect();
    let ntt = n_tau;
    let min_points = 6;
    let norm = |v: &[f64]| v.iter().map(|a| a * a).sum::<f64>().sqrt();
    let sserr: Vec<f64> = (min_points..ntt - min_points + 1)
        .map(|i| {
            let (m1, b1) = linreg(&logtt[..i], &logff[..i]);
            let (m2, b2) = linreg(&logtt[i - 1..], &logff[i - 1..]);
            let r1: Vec<f64> = (0..i).map(|j| logtt[j] * m1 + b1 - logff[j]).collect();
            let r2: Vec<f64> = (i - 1..ntt).map(|j| logtt[j] * m2 + b2 - logff[j]).collect();
            norm(&r1) + norm(&r2)
        })
        .collect();
    let minimum = sserr.iter().cloned().fold(f64::INFINITY, f64::min);
    let first = sserr.iter().position(|&s| s == minimum).unwrap_or(0);
    let first_min_ind = (first + min_points - 1) as f64;
    (first_min_ind + 1.0) / ntt as f64
}
