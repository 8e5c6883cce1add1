//! Histograms, distribution distances and fringe-phase estimation.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::dist::{Dist, DistKind};
use crate::error::{Error, Result};
use crate::measure::SampleSet;
use crate::wave::{canonical_phase, PhysicalParams};

/// Fits with a normalized RMS residual above this are flagged unreliable.
pub const FIT_RESIDUAL_THRESHOLD: f64 = 0.25;

/// Fits with a visibility below this are flagged unreliable.
pub const FIT_MIN_VISIBILITY: f64 = 0.2;

/// Density histogram over `range` with left-closed bins `[lo, hi)`; the last
/// bin also takes samples equal to `range.1`. Samples outside are dropped,
/// but at least 99% must fall inside.
pub fn histogram(samples: &SampleSet, bins: usize, range: (f64, f64), kind: DistKind) -> Result<Dist> {
    if samples.values.is_empty() {
        return Err(Error::EmptySamples);
    }
    if bins < 8 {
        return Err(Error::param("bins", format!("need at least 8 bins, got {bins}")));
    }
    let (lo, hi) = range;
    if !(hi > lo) {
        return Err(Error::param("range", "upper bound must exceed lower bound"));
    }
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0u64; bins];
    let mut inside = 0usize;
    for &v in &samples.values {
        if v < lo || v > hi {
            continue;
        }
        let i = (((v - lo) / width) as usize).min(bins - 1);
        counts[i] += 1;
        inside += 1;
    }
    let fraction = inside as f64 / samples.values.len() as f64;
    if fraction < 0.99 {
        return Err(Error::RangeCoverage { lo, hi, fraction });
    }
    let axis = (0..bins).map(|i| lo + (i as f64 + 0.5) * width).collect();
    let density = counts.iter().map(|&c| c as f64).collect();
    Dist::new(kind, axis, density)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FringeFit {
    /// Fringe phase in `(-pi, pi]`.
    pub alpha_hat: f64,
    pub visibility: f64,
    /// Fringe period along the axis, `2 pi / k`.
    pub period: f64,
    /// RMS residual normalized by the RMS of the data.
    pub residual: f64,
    pub reliable: bool,
    pub diagnostics: Option<String>,
}

/// Fits `P(v) = 2 P_o(v) cos^2((m v L - alpha hbar) / 2 hbar)` with the
/// period fixed at `h / (m L)`.
pub fn fit_fringe(dist: &Dist, params: &PhysicalParams) -> FringeFit {
    fit_fringe_wavenumber(dist, params.fringe_wavenumber())
}

/// Least-squares fit of `A E(x) [1 + V cos(k x - phi)]` at fixed `k`.
///
/// The envelope `E` is the Gaussian with the distribution's own mean and
/// variance: for well separated branches the fringe term adds nothing to the
/// low moments. The model is linear in `(A, A V cos phi, A V sin phi)`.
pub fn fit_fringe_wavenumber(dist: &Dist, k: f64) -> FringeFit {
    let period = 2.0 * PI / k;
    let unreliable = |why: String| FringeFit {
        alpha_hat: 0.0,
        visibility: 0.0,
        period,
        residual: f64::INFINITY,
        reliable: false,
        diagnostics: Some(why),
    };
    let mu = dist.mean();
    let var = dist.variance();
    if !(var > 0.0) {
        return unreliable("distribution has zero variance".into());
    }
    let basis: Vec<[f64; 3]> = dist
        .axis()
        .iter()
        .map(|&x| {
            let e = (-(x - mu) * (x - mu) / (2.0 * var)).exp();
            let (s, c) = (k * x).sin_cos();
            [e, e * c, e * s]
        })
        .collect();
    let mut ata = [[0.0; 3]; 3];
    let mut atb = [0.0; 3];
    for (b, &d) in basis.iter().zip(dist.density()) {
        for i in 0..3 {
            atb[i] += b[i] * d;
            for j in 0..3 {
                ata[i][j] += b[i] * b[j];
            }
        }
    }
    let Some(sol) = solve3(ata, atb) else {
        return unreliable("normal equations are singular".into());
    };
    let [amp, c, s] = sol;
    if !(amp > 0.0) {
        return unreliable(format!("non-positive envelope amplitude {amp:.3e}"));
    }
    let mut sse = 0.0;
    let mut ss = 0.0;
    for (b, &d) in basis.iter().zip(dist.density()) {
        let m = amp * b[0] + c * b[1] + s * b[2];
        sse += (d - m) * (d - m);
        ss += d * d;
    }
    let residual = (sse / ss).sqrt();
    let visibility = (c.hypot(s) / amp).clamp(0.0, 1.0);
    let alpha_hat = canonical_phase(s.atan2(c));
    let mut notes = Vec::new();
    if visibility < FIT_MIN_VISIBILITY {
        notes.push(format!("visibility {visibility:.3e} below {FIT_MIN_VISIBILITY}"));
    }
    if residual > FIT_RESIDUAL_THRESHOLD {
        notes.push(format!("residual {residual:.3e} above {FIT_RESIDUAL_THRESHOLD}"));
    }
    FringeFit {
        alpha_hat,
        visibility,
        period,
        residual,
        reliable: notes.is_empty(),
        diagnostics: (!notes.is_empty()).then(|| notes.join("; ")),
    }
}

fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    let scale = a.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return None;
    }
    for col in 0..3 {
        let piv = (col..3).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-13 * scale {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..3 {
            let f = a[r][col] / a[col][col];
            for c in col..3 {
                a[r][c] -= f * a[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = [0.0; 3];
    for r in (0..3).rev() {
        let s: f64 = (r + 1..3).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub l1: f64,
    pub ks: f64,
    /// `<x^n>_a - <x^n>_b` for `n = 1..=4`.
    pub moment_diffs: [f64; 4],
}

/// Distances between two distributions of the same kind. When the axes
/// differ, `b` is re-sampled onto the axis of `a`.
pub fn compare_distributions(a: &Dist, b: &Dist) -> Result<Comparison> {
    if a.kind() != b.kind() {
        return Err(Error::Incompatible(format!(
            "cannot compare {:?} with {:?}",
            a.kind(),
            b.kind()
        )));
    }
    let same_axis = a.len() == b.len()
        && a
            .axis()
            .iter()
            .zip(b.axis())
            .all(|(x, y)| (x - y).abs() <= 1e-9 * a.spacing());
    let b_on_a = if same_axis {
        b.clone()
    } else {
        let dens: Vec<f64> = a.axis().iter().map(|&x| b.density_at(x)).collect();
        Dist::new(b.kind(), a.axis().to_vec(), dens)
            .map_err(|_| Error::Incompatible("distributions have disjoint axes".into()))?
    };
    let d = a.spacing();
    let l1 = a
        .density()
        .iter()
        .zip(b_on_a.density())
        .map(|(x, y)| (x - y).abs())
        .sum::<f64>()
        * d;
    let ks = a
        .cdf_edges()
        .iter()
        .zip(b_on_a.cdf_edges())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    let mut moment_diffs = [0.0; 4];
    for (n, m) in moment_diffs.iter_mut().enumerate() {
        *m = a.moment(n as i32 + 1) - b.moment(n as i32 + 1);
    }
    Ok(Comparison { l1, ks, moment_diffs })
}
