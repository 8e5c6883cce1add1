//! Particle and pointer wave functions, the two-branch superposition, and the
//! gauge-invariant observables built from the momentum-space density.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dist::{Dist, DistKind};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::spectral::Spectral;

/// Amplitude threshold, relative to the peak, for a branch cut to count as
/// passing through empty space.
pub const CUT_LEAKAGE_THRESHOLD: f64 = 1e-8;

/// Minimum `separation / sigma` for the two branches to count as separated.
pub const MIN_SEPARATION_RATIO: f64 = 8.0;

/// Maps a phase to the canonical range `(-pi, pi]`.
pub fn canonical_phase(phase: f64) -> f64 {
    let mut a = phase.rem_euclid(2.0 * PI);
    if a > PI {
        a -= 2.0 * PI;
    }
    a
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    pub mass: f64,
    pub hbar: f64,
    /// Distance between the two branch centers.
    pub separation: f64,
    /// Flux phase acquired by the `y > 0` branch.
    pub alpha: f64,
    /// Position standard deviation of one branch.
    pub sigma: f64,
    /// Branch velocity in the relative-velocity variant; zero otherwise.
    pub v0: f64,
}

impl Default for PhysicalParams {
    fn default() -> Self {
        PhysicalParams {
            mass: 1.0,
            hbar: 1.0,
            separation: 20.0,
            alpha: 0.0,
            sigma: 1.0,
            v0: 0.0,
        }
    }
}

impl PhysicalParams {
    pub fn new(separation: f64, alpha: f64, sigma: f64) -> Result<Self> {
        PhysicalParams {
            separation,
            alpha,
            sigma,
            ..Default::default()
        }
        .validated()
    }

    /// Checks positivity and canonicalizes `alpha`.
    pub fn validated(mut self) -> Result<Self> {
        for (name, v) in [
            ("mass", self.mass),
            ("hbar", self.hbar),
            ("separation", self.separation),
            ("sigma", self.sigma),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::param(name, format!("must be positive, got {v}")));
            }
        }
        if !self.alpha.is_finite() || !self.v0.is_finite() {
            return Err(Error::param("alpha", "must be finite"));
        }
        self.alpha = canonical_phase(self.alpha);
        Ok(self)
    }

    pub fn with_alpha(self, alpha: f64) -> Self {
        PhysicalParams {
            alpha: canonical_phase(alpha),
            ..self
        }
    }

    /// Angular frequency of the velocity fringes, `m L / hbar`.
    pub fn fringe_wavenumber(&self) -> f64 {
        self.mass * self.separation / self.hbar
    }

    /// Fringe period in velocity, `h / (m L)`.
    pub fn fringe_period(&self) -> f64 {
        2.0 * PI * self.hbar / (self.mass * self.separation)
    }

    /// Velocity standard deviation of one minimum-uncertainty branch.
    pub fn branch_velocity_spread(&self) -> f64 {
        self.hbar / (2.0 * self.sigma * self.mass)
    }
}

/// Whether `ab_superposition` rejects overlapping branches or only warns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SeparationPolicy {
    #[default]
    Strict,
    Warn,
}

/// Normalized wave function sampled on a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct Wave {
    grid: Grid,
    amp: Vec<Complex64>,
}

/// Momentum-space amplitudes on the conjugate lattice of a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct MomentumAmplitudes {
    grid: Grid,
    amp: Vec<Complex64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FourierCoeff {
    pub l: f64,
    pub value: Complex64,
}

fn norm_sq(amp: &[Complex64], d: f64) -> f64 {
    amp.iter().map(|a| a.norm_sqr()).sum::<f64>() * d
}

impl Wave {
    /// Wraps amplitudes and rescales them to unit norm.
    pub fn from_amplitudes(grid: Grid, amp: Vec<Complex64>) -> Result<Self> {
        if amp.len() != grid.n() {
            return Err(Error::param("amp", "length does not match grid"));
        }
        let n2 = norm_sq(&amp, grid.dy());
        if !(n2.is_finite() && n2 > 0.0) {
            return Err(Error::param("amp", "state has zero or non-finite norm"));
        }
        let s = 1.0 / n2.sqrt();
        Ok(Wave {
            grid,
            amp: amp.into_iter().map(|a| a * s).collect(),
        })
    }

    pub(crate) fn from_raw(grid: Grid, amp: Vec<Complex64>) -> Self {
        Wave { grid, amp }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amp
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amp
    }

    pub fn norm_sqr(&self) -> f64 {
        norm_sq(&self.amp, self.grid.dy())
    }

    /// `<self|other>` with the lattice measure `dy`.
    pub fn inner(&self, other: &Wave) -> Complex64 {
        self.amp
            .iter()
            .zip(&other.amp)
            .map(|(a, b)| a.conj() * b)
            .sum::<Complex64>()
            * self.grid.dy()
    }

    /// L2 distance `sqrt(sum |a - b|^2 dy)`.
    pub fn distance(&self, other: &Wave) -> f64 {
        self.amp
            .iter()
            .zip(&other.amp)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
            * self.grid.dy().sqrt()
    }

    pub fn position_distribution(&self) -> Result<Dist> {
        Dist::new(
            DistKind::Position,
            self.grid.positions(),
            self.amp.iter().map(|a| a.norm_sqr()).collect(),
        )
    }

    /// `<y^n>` under the position density.
    pub fn position_moment(&self, n: i32) -> f64 {
        let g = &self.grid;
        self.amp
            .iter()
            .enumerate()
            .map(|(j, a)| a.norm_sqr() * g.y(j).powi(n))
            .sum::<f64>()
            * g.dy()
    }

    pub fn momentum_amplitudes(&self) -> MomentumAmplitudes {
        let s = Spectral::new(&self.grid);
        let mut buf = self.amp.clone();
        let mut scratch = s.scratch();
        s.forward(&mut buf, &mut scratch);
        MomentumAmplitudes {
            grid: self.grid,
            amp: buf,
        }
    }

    /// Density of `v = p/m`: `|phi(m v)|^2 * m`.
    pub fn velocity_distribution(&self, mass: f64) -> Result<Dist> {
        self.momentum_amplitudes().velocity_distribution(mass)
    }

    /// `f_l = <exp(i p l / hbar)>`.
    pub fn fourier_coefficient(&self, l: f64) -> FourierCoeff {
        self.momentum_amplitudes().fourier_coefficient(l)
    }

    /// `<p^n>` for `0 <= n <= 8`.
    pub fn moment(&self, n: u32) -> Result<f64> {
        self.momentum_amplitudes().moment(n)
    }

    /// Relative amplitude found where the branch phase mask is discontinuous:
    /// around `y = 0` and at the periodic seam.
    pub fn cut_leakage(&self) -> f64 {
        let n = self.grid.n();
        let o = self.grid.origin_index();
        let peak = self.amp.iter().map(|a| a.norm()).fold(0.0, f64::max);
        [o - 1, o, o + 1, 0, 1, n - 2, n - 1]
            .iter()
            .map(|&j| self.amp[j].norm())
            .fold(0.0, f64::max)
            / peak
    }

    fn check_cut(&self) -> Result<()> {
        let leakage = self.cut_leakage();
        if leakage >= CUT_LEAKAGE_THRESHOLD {
            return Err(Error::CutLeakage {
                leakage,
                threshold: CUT_LEAKAGE_THRESHOLD,
            });
        }
        Ok(())
    }

    /// Multiplies the `y > 0` branch by `exp(i alpha)`: the phase picked up
    /// when the line joining the branches crosses the flux line.
    pub fn apply_flux_phase(&self, alpha: f64) -> Result<Wave> {
        self.check_cut()?;
        let phase = Complex64::from_polar(1.0, alpha);
        let g = self.grid;
        let amp = self
            .amp
            .iter()
            .enumerate()
            .map(|(j, a)| if g.y(j) > 0.0 { a * phase } else { *a })
            .collect();
        Ok(Wave::from_raw(g, amp))
    }

    /// Converging impulse: the `y <= 0` branch gains velocity `+dv`, the
    /// `y > 0` branch `-dv`.
    pub fn apply_branch_impulse(&self, dv: f64, mass: f64) -> Result<Wave> {
        self.check_cut()?;
        let g = self.grid;
        let k = mass * dv / g.hbar();
        let amp = self
            .amp
            .iter()
            .enumerate()
            .map(|(j, a)| {
                let y = g.y(j);
                let s = if y > 0.0 { -1.0 } else { 1.0 };
                a * Complex64::from_polar(1.0, s * k * y)
            })
            .collect();
        Ok(Wave::from_raw(g, amp))
    }
}

impl MomentumAmplitudes {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amp
    }

    pub fn norm_sqr(&self) -> f64 {
        norm_sq(&self.amp, self.grid.dk())
    }

    pub fn to_position(&self) -> Wave {
        let s = Spectral::new(&self.grid);
        let mut buf = self.amp.clone();
        let mut scratch = s.scratch();
        s.inverse(&mut buf, &mut scratch);
        Wave::from_raw(self.grid, buf)
    }

    pub fn velocity_distribution(&self, mass: f64) -> Result<Dist> {
        if !(mass > 0.0) {
            return Err(Error::param("mass", "must be positive"));
        }
        Dist::new(
            DistKind::Velocity,
            self.grid.momenta().into_iter().map(|p| p / mass).collect(),
            self.amp.iter().map(|a| a.norm_sqr() * mass).collect(),
        )
    }

    pub fn fourier_coefficient(&self, l: f64) -> FourierCoeff {
        let g = &self.grid;
        let value = self
            .amp
            .iter()
            .enumerate()
            .map(|(k, a)| Complex64::from_polar(a.norm_sqr(), g.p(k) * l / g.hbar()))
            .sum::<Complex64>()
            * g.dk();
        FourierCoeff { l, value }
    }

    pub fn moment(&self, n: u32) -> Result<f64> {
        if n > 8 {
            return Err(Error::param("n", format!("moment order {n} exceeds 8")));
        }
        let g = &self.grid;
        Ok(self
            .amp
            .iter()
            .enumerate()
            .map(|(k, a)| a.norm_sqr() * g.p(k).powi(n as i32))
            .sum::<f64>()
            * g.dk())
    }
}

/// Minimum-uncertainty Gaussian with position spread `sigma` about `center`
/// and mean momentum `k0`, phase referenced to the origin: `exp(i k0 y/hbar)`.
pub fn gaussian_packet(grid: &Grid, center: f64, sigma: f64, k0: f64) -> Result<Wave> {
    if !(sigma > 0.0) || sigma < 4.0 * grid.dy() {
        return Err(Error::param(
            "sigma",
            format!("{sigma} is not resolved by dy = {} (need sigma >= 4 dy)", grid.dy()),
        ));
    }
    if center.abs() + 6.0 * sigma > grid.extent() {
        return Err(Error::param(
            "center",
            format!(
                "packet at {center} with sigma {sigma} reaches the boundary at +-{}",
                grid.extent()
            ),
        ));
    }
    let sigma_p = grid.hbar() / (2.0 * sigma);
    if k0.abs() + 6.0 * sigma_p > grid.p_max() {
        return Err(Error::param(
            "k0",
            format!("momentum {k0} with spread {sigma_p} exceeds the band limit {}", grid.p_max()),
        ));
    }
    let amp = (0..grid.n())
        .map(|j| {
            let y = grid.y(j);
            let u = (y - center) / sigma;
            Complex64::from_polar((-0.25 * u * u).exp(), k0 * y / grid.hbar())
        })
        .collect();
    Wave::from_amplitudes(*grid, amp)
}

/// Two equal-weight Gaussian branches centered at `-L/2` and `+L/2`; with
/// `include_phase` the `y > 0` branch carries `exp(i alpha)`, and with
/// `v0 != 0` the branches carry `exp(+-i m v0 y / hbar)`.
pub fn ab_superposition(grid: &Grid, params: &PhysicalParams, include_phase: bool) -> Result<Wave> {
    ab_superposition_with(grid, params, include_phase, SeparationPolicy::Strict)
}

pub fn ab_superposition_with(
    grid: &Grid,
    params: &PhysicalParams,
    include_phase: bool,
    policy: SeparationPolicy,
) -> Result<Wave> {
    let params = params.validated()?;
    let ratio = params.separation / params.sigma;
    if ratio < MIN_SEPARATION_RATIO {
        match policy {
            SeparationPolicy::Strict => {
                return Err(Error::param(
                    "separation",
                    format!("L/sigma = {ratio:.3} is below {MIN_SEPARATION_RATIO}"),
                ))
            }
            SeparationPolicy::Warn => {
                log::warn!("branches overlap: L/sigma = {ratio:.3} < {MIN_SEPARATION_RATIO}")
            }
        }
    }
    let half = 0.5 * params.separation;
    let boost = params.mass * params.v0;
    let left = gaussian_packet(grid, -half, params.sigma, boost)?;
    let right = gaussian_packet(grid, half, params.sigma, -boost)?;
    let phase = if include_phase {
        Complex64::from_polar(1.0, params.alpha)
    } else {
        Complex64::new(1.0, 0.0)
    };
    let amp = left
        .amp
        .iter()
        .zip(&right.amp)
        .map(|(l, r)| l + phase * r)
        .collect();
    Wave::from_amplitudes(*grid, amp)
}
