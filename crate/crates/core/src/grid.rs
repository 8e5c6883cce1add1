//! Uniform periodic 1D lattice and its conjugate momentum lattice.
//!
//! Positions are `y_j = -X + j*dy` for `j = 0..n`, so `y = 0` sits exactly on
//! index `n/2`. Momenta are `p_k = (k - n/2) * dp` with `dp = 2*pi*hbar/(n*dy)`,
//! which puts zero momentum on index `n/2` as well and spans
//! `[-pi*hbar/dy, pi*hbar/dy)`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    n: usize,
    extent: f64,
    hbar: f64,
}

impl Grid {
    /// Grid with `hbar = 1`.
    pub fn new(n: usize, extent: f64) -> Result<Self> {
        Self::with_hbar(n, extent, 1.0)
    }

    pub fn with_hbar(n: usize, extent: f64, hbar: f64) -> Result<Self> {
        if n < 16 {
            return Err(Error::InvalidGrid(format!("n = {n} is below the minimum of 16")));
        }
        if n % 2 != 0 {
            return Err(Error::InvalidGrid(format!("n = {n} is odd")));
        }
        if !(extent.is_finite() && extent > 0.0) {
            return Err(Error::InvalidGrid(format!("extent {extent} must be positive")));
        }
        if !(hbar.is_finite() && hbar > 0.0) {
            return Err(Error::InvalidGrid(format!("hbar {hbar} must be positive")));
        }
        Ok(Grid { n, extent, hbar })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn extent(&self) -> f64 {
        self.extent
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn dy(&self) -> f64 {
        2.0 * self.extent / self.n as f64
    }

    /// Momentum spacing `2*pi*hbar/(n*dy)`.
    pub fn dk(&self) -> f64 {
        2.0 * PI * self.hbar / (self.n as f64 * self.dy())
    }

    /// Nyquist momentum `pi*hbar/dy`; the lattice spans `[-p_max, p_max)`.
    pub fn p_max(&self) -> f64 {
        PI * self.hbar / self.dy()
    }

    pub fn y(&self, j: usize) -> f64 {
        -self.extent + j as f64 * self.dy()
    }

    pub fn p(&self, k: usize) -> f64 {
        (k as f64 - (self.n / 2) as f64) * self.dk()
    }

    pub fn positions(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.y(j)).collect()
    }

    pub fn momenta(&self) -> Vec<f64> {
        (0..self.n).map(|k| self.p(k)).collect()
    }

    /// Index of the `y = 0` lattice point.
    pub fn origin_index(&self) -> usize {
        self.n / 2
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spacings() {
        let g = Grid::new(1024, 100.0).unwrap();
        assert_eq!(g.dy(), 0.1953125);
        assert!((g.dk() - 2.0 * PI / 200.0).abs() < 1e-15);
        let g = Grid::new(16, 8.0).unwrap();
        assert_eq!(g.dy(), 1.0);
        assert_eq!(g.y(g.origin_index()), 0.0);
        assert_eq!(g.p(g.origin_index()), 0.0);
    }

    #[test]
    fn rejects_bad_sizes() {
        assert!(matches!(Grid::new(1023, 100.0), Err(Error::InvalidGrid(_))));
        assert!(Grid::new(8, 1.0).is_err());
        assert!(Grid::new(64, 0.0).is_err());
        assert!(Grid::new(64, -3.0).is_err());
    }

    #[test]
    fn momentum_lattice_span() {
        let g = Grid::with_hbar(64, 5.0, 2.0).unwrap();
        assert!((g.p(0) + g.p_max()).abs() < 1e-12);
        assert!((g.p(63) - (g.p_max() - g.dk())).abs() < 1e-12);
        assert!((g.dy() * g.n() as f64 - 10.0).abs() < 1e-15);
    }
}
