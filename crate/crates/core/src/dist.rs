//! Tabulated probability densities on a uniform axis.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistKind {
    Velocity,
    Position,
    Pointer,
}

/// Normalized density sampled at the centers of equal-width cells.
///
/// Cell `i` covers `[axis[i] - d/2, axis[i] + d/2)` where `d` is the axis
/// spacing, and `sum(density) * d == 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dist {
    kind: DistKind,
    axis: Vec<f64>,
    density: Vec<f64>,
}

impl Dist {
    /// Builds and normalizes a distribution. The axis must be uniform and
    /// increasing; the density nonnegative with a positive total.
    pub fn new(kind: DistKind, axis: Vec<f64>, density: Vec<f64>) -> Result<Self> {
        if axis.len() != density.len() {
            return Err(Error::DegenerateDistribution(format!(
                "axis has {} points but density has {}",
                axis.len(),
                density.len()
            )));
        }
        if axis.len() < 2 {
            return Err(Error::DegenerateDistribution("need at least two points".into()));
        }
        let d = axis[1] - axis[0];
        if !(d > 0.0) {
            return Err(Error::DegenerateDistribution("axis must be increasing".into()));
        }
        for w in axis.windows(2) {
            if ((w[1] - w[0]) - d).abs() > 1e-6 * d {
                return Err(Error::DegenerateDistribution("axis must be uniform".into()));
            }
        }
        if density.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::DegenerateDistribution(
                "density must be finite and nonnegative".into(),
            ));
        }
        let total: f64 = density.iter().sum::<f64>() * d;
        if !(total > 0.0) {
            return Err(Error::DegenerateDistribution("density integrates to zero".into()));
        }
        let density = density.into_iter().map(|v| v / total).collect();
        Ok(Dist { kind, axis, density })
    }

    pub fn kind(&self) -> DistKind {
        self.kind
    }

    pub fn axis(&self) -> &[f64] {
        &self.axis
    }

    pub fn density(&self) -> &[f64] {
        &self.density
    }

    pub fn len(&self) -> usize {
        self.axis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.axis.is_empty()
    }

    pub fn spacing(&self) -> f64 {
        self.axis[1] - self.axis[0]
    }

    pub fn total(&self) -> f64 {
        self.density.iter().sum::<f64>() * self.spacing()
    }

    /// Raw moment `<x^n>`.
    pub fn moment(&self, n: i32) -> f64 {
        let d = self.spacing();
        self.axis
            .iter()
            .zip(&self.density)
            .map(|(x, p)| x.powi(n) * p)
            .sum::<f64>()
            * d
    }

    pub fn mean(&self) -> f64 {
        self.moment(1)
    }

    pub fn variance(&self) -> f64 {
        let mu = self.mean();
        let d = self.spacing();
        self.axis
            .iter()
            .zip(&self.density)
            .map(|(x, p)| (x - mu).powi(2) * p)
            .sum::<f64>()
            * d
    }

    pub fn std_dev(&self) -> f64 {
        self.variance().sqrt()
    }

    /// Cumulative probability at the cell edges: `cdf[0] = 0`, `cdf[n] = 1`.
    pub fn cdf_edges(&self) -> Vec<f64> {
        let d = self.spacing();
        let mut out = Vec::with_capacity(self.len() + 1);
        let mut acc = 0.0;
        out.push(0.0);
        for p in &self.density {
            acc += p * d;
            out.push(acc);
        }
        let last = acc;
        for v in out.iter_mut() {
            *v /= last;
        }
        out
    }

    /// CDF at an arbitrary point, piecewise linear inside cells.
    pub fn cdf_at(&self, x: f64) -> f64 {
        let d = self.spacing();
        let lo = self.axis[0] - 0.5 * d;
        let t = (x - lo) / d;
        if t <= 0.0 {
            return 0.0;
        }
        let n = self.len();
        if t >= n as f64 {
            return 1.0;
        }
        let i = t.floor() as usize;
        let edges = self.cdf_edges();
        edges[i] + (t - i as f64) * (edges[i + 1] - edges[i])
    }

    /// Density at `x` by linear interpolation between cell centers; zero outside.
    pub fn density_at(&self, x: f64) -> f64 {
        let d = self.spacing();
        let t = (x - self.axis[0]) / d;
        let n = self.len();
        if t < -0.5 || t > n as f64 - 0.5 {
            return 0.0;
        }
        if t <= 0.0 {
            return self.density[0];
        }
        if t >= (n - 1) as f64 {
            return self.density[n - 1];
        }
        let i = t.floor() as usize;
        let f = t - i as f64;
        self.density[i] * (1.0 - f) + self.density[i + 1] * f
    }

    /// Change of variables `x -> x * factor` (factor > 0), e.g. pointer
    /// reading to velocity via `1/(G*T)`.
    pub fn rescaled(&self, kind: DistKind, factor: f64) -> Result<Dist> {
        if !(factor > 0.0 && factor.is_finite()) {
            return Err(Error::param("factor", "must be positive"));
        }
        Dist::new(
            kind,
            self.axis.iter().map(|x| x * factor).collect(),
            self.density.iter().map(|p| p / factor).collect(),
        )
    }

    /// Smallest and largest axis values where the density exceeds
    /// `rel * max(density)`.
    pub fn support(&self, rel: f64) -> (f64, f64) {
        let peak = self.density.iter().cloned().fold(0.0, f64::max);
        let thr = rel * peak;
        let first = self.density.iter().position(|p| *p > thr).unwrap_or(0);
        let last = self
            .density
            .iter()
            .rposition(|p| *p > thr)
            .unwrap_or(self.len() - 1);
        (self.axis[first], self.axis[last])
    }
}
