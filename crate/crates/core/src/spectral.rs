//! Unitary position <-> momentum transform on a [`Grid`].
//!
//! Convention (continuum-normalized):
//!
//! ```text
//! phi(p_k) = dy/sqrt(2*pi*hbar) * sum_j psi(y_j) exp(-i p_k y_j / hbar)
//! psi(y_j) = dp/sqrt(2*pi*hbar) * sum_k phi(p_k) exp(+i p_k y_j / hbar)
//! ```
//!
//! so `sum |psi|^2 dy = sum |phi|^2 dp`. With the centered lattices of
//! [`Grid`] the exponentials factor into an FFT bracketed by `(-1)^j` and
//! `(-1)^(k - n/2)` sign patterns.

use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::grid::Grid;

fn planner() -> &'static Mutex<FftPlanner<f64>> {
    static PLANNER: OnceLock<Mutex<FftPlanner<f64>>> = OnceLock::new();
    PLANNER.get_or_init(|| Mutex::new(FftPlanner::new()))
}

#[derive(Clone)]
pub(crate) struct Spectral {
    n: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    scale_fwd: f64,
    scale_inv: f64,
    half_parity: bool,
}

impl Spectral {
    pub(crate) fn new(grid: &Grid) -> Self {
        let n = grid.n();
        let (fwd, inv) = {
            let mut p = planner().lock().expect("fft planner poisoned");
            (p.plan_fft_forward(n), p.plan_fft_inverse(n))
        };
        let norm = (2.0 * PI * grid.hbar()).sqrt();
        Spectral {
            n,
            fwd,
            inv,
            scale_fwd: grid.dy() / norm,
            scale_inv: grid.dk() / norm,
            half_parity: (n / 2) % 2 == 1,
        }
    }

    pub(crate) fn scratch(&self) -> Vec<Complex64> {
        vec![Complex64::new(0.0, 0.0); self.fwd.get_inplace_scratch_len()]
    }

    #[inline]
    fn sign(odd: bool) -> f64 {
        if odd {
            -1.0
        } else {
            1.0
        }
    }

    /// Position samples to momentum amplitudes, in place.
    pub(crate) fn forward(&self, buf: &mut [Complex64], scratch: &mut [Complex64]) {
        debug_assert_eq!(buf.len(), self.n);
        for (j, v) in buf.iter_mut().enumerate() {
            if j % 2 == 1 {
                *v = -*v;
            }
        }
        self.fwd.process_with_scratch(buf, scratch);
        for (k, v) in buf.iter_mut().enumerate() {
            *v *= Self::sign((k % 2 == 1) != self.half_parity) * self.scale_fwd;
        }
    }

    /// Momentum amplitudes back to position samples, in place.
    pub(crate) fn inverse(&self, buf: &mut [Complex64], scratch: &mut [Complex64]) {
        debug_assert_eq!(buf.len(), self.n);
        for (k, v) in buf.iter_mut().enumerate() {
            if (k % 2 == 1) != self.half_parity {
                *v = -*v;
            }
        }
        self.inv.process_with_scratch(buf, scratch);
        for (j, v) in buf.iter_mut().enumerate() {
            *v *= Self::sign(j % 2 == 1) * self.scale_inv;
        }
    }
}
