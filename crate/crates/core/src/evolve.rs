//! Time evolution of the particle and of the particle + pointer composite.
//!
//! The composite lives in the `(y, q)` representation. The device kinetic
//! term is dropped, so `q` is conserved and every column of fixed `q` evolves
//! independently; column work is spread over the rayon pool. Results do not
//! depend on the schedule.
//!
//! Sign convention: the coupling kick `exp(+i G y q / hbar)` raises the
//! pointer momentum `pi` by `+G y` and the particle momentum by `+G q`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::spectral::Spectral;
use crate::wave::{gaussian_packet, Wave};

/// Relative density below which lattice points are ignored by the aliasing
/// guards (amplitude ratio 1e-8).
pub const SUPPORT_TOLERANCE: f64 = 1e-16;

/// Minimum number of splitting steps per gate segment.
pub const MIN_STEPS_PER_SEGMENT: usize = 32;

/// Default bound on the accumulated splitting phase defect (radians).
pub const DEFAULT_TROTTER_TOLERANCE: f64 = 1e-6;

/// Free evolution `exp(-i p^2 dt / (2 m hbar))`.
pub fn free_step(wave: &Wave, dt: f64, mass: f64) -> Result<Wave> {
    if !(dt > 0.0) {
        return Err(Error::param("dt", format!("must be positive, got {dt}")));
    }
    if !(mass > 0.0) {
        return Err(Error::param("mass", "must be positive"));
    }
    let g = *wave.grid();
    let s = Spectral::new(&g);
    let phase = kinetic_phase(&g, dt, mass);
    let mut buf = wave.amplitudes().to_vec();
    let mut scratch = s.scratch();
    s.forward(&mut buf, &mut scratch);
    for (a, f) in buf.iter_mut().zip(&phase) {
        *a *= f;
    }
    s.inverse(&mut buf, &mut scratch);
    Ok(Wave::from_raw(g, buf))
}

fn kinetic_phase(g: &Grid, dt: f64, mass: f64) -> Vec<Complex64> {
    let c = dt / (2.0 * mass * g.hbar());
    g.momenta()
        .into_iter()
        .map(|p| Complex64::from_polar(1.0, -c * p * p))
        .collect()
}

/// Measuring-device preparation: zero-mean, zero-momentum Gaussian in `q`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointerPrep {
    pub grid_q: Grid,
    pub sigma_q: f64,
}

impl PointerPrep {
    pub fn new(grid_q: Grid, sigma_q: f64) -> Result<Self> {
        if !(sigma_q >= 4.0 * grid_q.dy()) {
            return Err(Error::param(
                "sigma_q",
                format!("{sigma_q} is not resolved by dq = {}", grid_q.dy()),
            ));
        }
        Ok(PointerPrep { grid_q, sigma_q })
    }

    /// Pointer preparation with a prescribed momentum spread `Delta pi(0)`.
    pub fn with_sigma_pi(grid_q: Grid, sigma_pi: f64) -> Result<Self> {
        Self::new(grid_q, grid_q.hbar() / (2.0 * sigma_pi))
    }

    pub fn sigma_pi(&self) -> f64 {
        self.grid_q.hbar() / (2.0 * self.sigma_q)
    }

    pub fn wave(&self) -> Result<Wave> {
        gaussian_packet(&self.grid_q, 0.0, self.sigma_q, 0.0)
    }
}

/// Particle + pointer state on `grid_y x grid_q`, stored column-major:
/// `amp[iq * n_y + iy]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Composite {
    grid_y: Grid,
    grid_q: Grid,
    amp: Vec<Complex64>,
}

impl Composite {
    pub fn product(particle: &Wave, pointer: &Wave) -> Composite {
        let grid_y = *particle.grid();
        let grid_q = *pointer.grid();
        let mut amp = Vec::with_capacity(grid_y.n() * grid_q.n());
        for b in pointer.amplitudes() {
            amp.extend(particle.amplitudes().iter().map(|a| a * b));
        }
        Composite { grid_y, grid_q, amp }
    }

    pub fn grid_y(&self) -> &Grid {
        &self.grid_y
    }

    pub fn grid_q(&self) -> &Grid {
        &self.grid_q
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amp
    }

    pub fn amp(&self, iy: usize, iq: usize) -> Complex64 {
        self.amp[iq * self.grid_y.n() + iy]
    }

    fn cell(&self) -> f64 {
        self.grid_y.dy() * self.grid_q.dy()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amp.iter().map(|a| a.norm_sqr()).sum::<f64>() * self.cell()
    }

    pub fn inner(&self, other: &Composite) -> Complex64 {
        self.amp
            .iter()
            .zip(&other.amp)
            .map(|(a, b)| a.conj() * b)
            .sum::<Complex64>()
            * self.cell()
    }

    /// `1 - |<self|other>|^2`, clamped at zero against rounding.
    pub fn fidelity_defect(&self, other: &Composite) -> f64 {
        (1.0 - self.inner(other).norm_sqr()).max(0.0)
    }

    pub fn distance(&self, other: &Composite) -> f64 {
        (self
            .amp
            .iter()
            .zip(&other.amp)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            * self.cell())
        .sqrt()
    }

    /// Position density of the particle with the pointer traced out.
    pub fn particle_position_density(&self) -> Vec<f64> {
        let ny = self.grid_y.n();
        let mut out = vec![0.0; ny];
        for col in self.amp.chunks(ny) {
            for (o, a) in out.iter_mut().zip(col) {
                *o += a.norm_sqr() * self.grid_q.dy();
            }
        }
        out
    }

    /// Density of the pointer coordinate `q` with the particle traced out.
    pub fn pointer_q_density(&self) -> Vec<f64> {
        let ny = self.grid_y.n();
        self.amp
            .chunks(ny)
            .map(|col| col.iter().map(|a| a.norm_sqr()).sum::<f64>() * self.grid_y.dy())
            .collect()
    }

    pub(crate) fn from_parts(grid_y: Grid, grid_q: Grid, amp: Vec<Complex64>) -> Composite {
        debug_assert_eq!(amp.len(), grid_y.n() * grid_q.n());
        Composite { grid_y, grid_q, amp }
    }

    fn peak_density(&self) -> f64 {
        self.amp
            .par_iter()
            .map(|a| a.norm_sqr())
            .reduce(|| 0.0, f64::max)
    }

    /// Largest `|f(y, q)|` over lattice points carrying non-negligible weight.
    pub(crate) fn support_max<F>(&self, f: F) -> f64
    where
        F: Fn(f64, f64) -> f64 + Sync,
    {
        let thr = SUPPORT_TOLERANCE * self.peak_density();
        let ny = self.grid_y.n();
        let (gy, gq) = (self.grid_y, self.grid_q);
        self.amp
            .par_chunks(ny)
            .enumerate()
            .map(|(iq, col)| {
                let q = gq.y(iq);
                col.iter()
                    .enumerate()
                    .filter(|(_, a)| a.norm_sqr() > thr)
                    .map(|(iy, _)| f(gy.y(iy), q).abs())
                    .fold(0.0, f64::max)
            })
            .reduce(|| 0.0, f64::max)
    }

    /// Multiplies by `exp(i phase(y, q))` after checking that the momentum
    /// shifts it imparts stay below the Nyquist limits of both axes.
    fn apply_mask<P, SPi, SP>(&self, phase: P, pi_shift: SPi, p_shift: Option<SP>) -> Result<Composite>
    where
        P: Fn(f64, f64) -> f64 + Sync,
        SPi: Fn(f64, f64) -> f64 + Sync,
        SP: Fn(f64, f64) -> f64 + Sync,
    {
        let shift = self.support_max(&pi_shift);
        let limit = self.grid_q.p_max();
        if shift >= limit {
            return Err(Error::Aliasing {
                axis: "pointer momentum",
                shift,
                limit,
            });
        }
        if let Some(ps) = p_shift {
            let shift = self.support_max(&ps);
            let limit = self.grid_y.p_max();
            if shift >= limit {
                return Err(Error::Aliasing {
                    axis: "particle momentum",
                    shift,
                    limit,
                });
            }
        }
        let ny = self.grid_y.n();
        let (gy, gq) = (self.grid_y, self.grid_q);
        let mut amp = self.amp.clone();
        amp.par_chunks_mut(ny).enumerate().for_each(|(iq, col)| {
            let q = gq.y(iq);
            for (iy, a) in col.iter_mut().enumerate() {
                *a *= Complex64::from_polar(1.0, phase(gy.y(iy), q));
            }
        });
        Ok(Composite::from_parts(gy, gq, amp))
    }

    /// Runs `f` on every `q` column in the particle momentum representation.
    fn map_columns_in_momentum<F>(&self, f: F) -> Composite
    where
        F: Fn(f64, &mut [Complex64]) + Sync,
    {
        let ny = self.grid_y.n();
        let s = Spectral::new(&self.grid_y);
        let gq = self.grid_q;
        let mut amp = self.amp.clone();
        amp.par_chunks_mut(ny).enumerate().for_each_init(
            || s.scratch(),
            |scratch, (iq, col)| {
                s.forward(col, scratch);
                f(gq.y(iq), col);
                s.inverse(col, scratch);
            },
        );
        Composite::from_parts(self.grid_y, self.grid_q, amp)
    }
}

/// Product initial state `phi(pi) psi(y)` with the prepared pointer.
pub fn make_composite(particle: &Wave, pointer: &PointerPrep) -> Result<Composite> {
    Ok(Composite::product(particle, &pointer.wave()?))
}

/// Impulsive coupling `exp(i G y q / hbar)`: pointer momentum `+G y`.
pub fn coupling_kick(comp: &Composite, coupling: f64) -> Result<Composite> {
    let hbar = comp.grid_y.hbar();
    comp.apply_mask(
        |y, q| coupling * y * q / hbar,
        |y, _| coupling * y,
        Some(|_: f64, q: f64| coupling * q),
    )
}

/// Compensation impulse `exp(i a q^2 / (2 hbar))`: pointer momentum `+a q`.
pub fn compensation_kick(comp: &Composite, a: f64) -> Result<Composite> {
    let hbar = comp.grid_q.hbar();
    comp.apply_mask(
        |_, q| 0.5 * a * q * q / hbar,
        |_, q| a * q,
        None::<fn(f64, f64) -> f64>,
    )
}

/// Second kick and compensation applied at the same instant as a single mask,
/// guarded on the combined pointer shift `G y + a q`.
pub(crate) fn kick_with_compensation(comp: &Composite, coupling: f64, a: f64) -> Result<Composite> {
    let hbar = comp.grid_y.hbar();
    comp.apply_mask(
        |y, q| (coupling * y * q + 0.5 * a * q * q) / hbar,
        |y, q| coupling * y + a * q,
        Some(|_: f64, q: f64| coupling * q),
    )
}

/// Free particle evolution on every `q` column; the pointer is static.
pub fn drift_composite(comp: &Composite, dt: f64, mass: f64) -> Result<Composite> {
    if !(dt > 0.0) {
        return Err(Error::param("dt", format!("must be positive, got {dt}")));
    }
    if !(mass > 0.0) {
        return Err(Error::param("mass", "must be positive"));
    }
    let phase = kinetic_phase(&comp.grid_y, dt, mass);
    Ok(comp.map_columns_in_momentum(|_, col| {
        for (a, f) in col.iter_mut().zip(&phase) {
            *a *= f;
        }
    }))
}

/// Time profile of a coupling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Gate {
    /// `g0` on `[0, t0]`, zero elsewhere; integral `g0 * t0`.
    Rect { g0: f64, t0: f64 },
    /// Rises linearly at rate `g0` over `[0, t0]`, holds `G = g0 t0` until
    /// `t`, and falls back to zero at `t + t0`.
    RampPlateauRamp { g0: f64, t0: f64, t: f64 },
}

impl Gate {
    pub fn validate(&self) -> Result<()> {
        let (g0, t0) = match *self {
            Gate::Rect { g0, t0 } => (g0, t0),
            Gate::RampPlateauRamp { g0, t0, t } => {
                if !(t >= t0) {
                    return Err(Error::param("t", format!("plateau end {t} precedes ramp {t0}")));
                }
                (g0, t0)
            }
        };
        if !(t0 > 0.0 && t0.is_finite()) {
            return Err(Error::param("t0", format!("must be positive, got {t0}")));
        }
        if !g0.is_finite() {
            return Err(Error::param("g0", "must be finite"));
        }
        Ok(())
    }

    pub fn strength(&self, t: f64) -> f64 {
        match *self {
            Gate::Rect { g0, t0 } => {
                if (0.0..=t0).contains(&t) {
                    g0
                } else {
                    0.0
                }
            }
            Gate::RampPlateauRamp { g0, t0, t: plateau } => {
                let big_g = g0 * t0;
                if t < 0.0 || t > plateau + t0 {
                    0.0
                } else if t <= t0 {
                    g0 * t
                } else if t <= plateau {
                    big_g
                } else {
                    big_g - g0 * (t - plateau)
                }
            }
        }
    }

    pub fn duration(&self) -> f64 {
        match *self {
            Gate::Rect { t0, .. } => t0,
            Gate::RampPlateauRamp { t0, t, .. } => t + t0,
        }
    }

    /// `G = g0 * t0`.
    pub fn total(&self) -> f64 {
        match *self {
            Gate::Rect { g0, t0 } | Gate::RampPlateauRamp { g0, t0, .. } => g0 * t0,
        }
    }

    /// `integral of strength^2 dt`.
    pub fn integral_sq(&self) -> f64 {
        match *self {
            Gate::Rect { g0, t0 } => g0 * g0 * t0,
            Gate::RampPlateauRamp { g0, t0, t } => {
                let big_g = g0 * t0;
                big_g * big_g * (t - t0 / 3.0)
            }
        }
    }

    /// Intervals on which the strength is smooth.
    pub fn segments(&self) -> Vec<(f64, f64)> {
        match *self {
            Gate::Rect { t0, .. } => vec![(0.0, t0)],
            Gate::RampPlateauRamp { t0, t, .. } => {
                let mut v = vec![(0.0, t0)];
                if t > t0 {
                    v.push((t0, t));
                }
                v.push((t, t + t0));
                v
            }
        }
    }
}

/// Which coupling Hamiltonian `evolve_coupled` integrates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CouplingForm {
    /// `p^2/2m - s(t) y q`.
    Position,
    /// `(p - s(t) q)^2/2m - s(t)^2 q^2/2m`.
    Velocity,
}

/// Step size and accepted splitting defect for `evolve_coupled`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepControl {
    pub dt: f64,
    pub tolerance: f64,
}

impl StepControl {
    pub fn new(dt: f64) -> Self {
        StepControl {
            dt,
            tolerance: DEFAULT_TROTTER_TOLERANCE,
        }
    }

    pub fn with_tolerance(self, tolerance: f64) -> Self {
        StepControl { tolerance, ..self }
    }
}

struct Step {
    h: f64,
    strength: f64,
}

fn schedule(gate: &Gate, dt: f64) -> Result<Vec<Step>> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::param("dt", format!("must be positive, got {dt}")));
    }
    let mut steps = Vec::new();
    for (a, b) in gate.segments() {
        let len = b - a;
        let n = ((len / dt) - 1e-9).ceil().max(1.0) as usize;
        if n < MIN_STEPS_PER_SEGMENT {
            return Err(Error::UnresolvedGate {
                dt,
                segment: len,
                steps: n,
                min_steps: MIN_STEPS_PER_SEGMENT,
            });
        }
        let h = len / n as f64;
        for i in 0..n {
            let t = a + (i as f64 + 0.5) * h;
            steps.push(Step {
                h,
                strength: gate.strength(t),
            });
        }
    }
    Ok(steps)
}

/// Strang-split integration of the coupled Hamiltonian over the whole gate:
/// kinetic half step, coupling full step at the step midpoint, kinetic half
/// step.
///
/// In the position form the only non-vanishing splitting error is the
/// double commutator `[V,[V,K]] = hbar^2 s^2 q^2 / m`, a phase of
/// `h^3 s^2 q^2 / (12 hbar m)` per step; its sum over the support is the
/// defect estimate checked against `step.tolerance`. The velocity-form terms
/// commute and carry no splitting error.
pub fn evolve_coupled(
    comp: &Composite,
    gate: &Gate,
    step: StepControl,
    form: CouplingForm,
    mass: f64,
) -> Result<Composite> {
    gate.validate()?;
    if !(mass > 0.0) {
        return Err(Error::param("mass", "must be positive"));
    }
    let steps = schedule(gate, step.dt)?;
    let hbar = comp.grid_y.hbar();
    let q_max = comp.support_max(|_, q| q);
    let impulse: f64 = steps.iter().map(|s| s.strength.abs() * s.h).sum();
    match form {
        CouplingForm::Position => {
            let estimate: f64 = steps
                .iter()
                .map(|s| s.h.powi(3) * s.strength * s.strength)
                .sum::<f64>()
                * q_max
                * q_max
                / (12.0 * hbar * mass);
            if estimate > step.tolerance {
                return Err(Error::TrotterDefect {
                    estimate,
                    tolerance: step.tolerance,
                });
            }
            guard(comp, impulse * comp.support_max(|y, _| y), impulse * q_max)?;
            Ok(evolve_position_form(comp, &steps, mass))
        }
        CouplingForm::Velocity => {
            let peak_strength = steps.iter().map(|s| s.strength.abs()).fold(0.0, f64::max);
            guard(comp, 0.0, peak_strength * q_max)?;
            let out = evolve_velocity_form(comp, &steps, mass);
            Ok(out)
        }
    }
}

fn guard(comp: &Composite, pi_shift: f64, p_shift: f64) -> Result<()> {
    if pi_shift >= comp.grid_q.p_max() {
        return Err(Error::Aliasing {
            axis: "pointer momentum",
            shift: pi_shift,
            limit: comp.grid_q.p_max(),
        });
    }
    if p_shift >= comp.grid_y.p_max() {
        return Err(Error::Aliasing {
            axis: "particle momentum",
            shift: p_shift,
            limit: comp.grid_y.p_max(),
        });
    }
    Ok(())
}

fn evolve_position_form(comp: &Composite, steps: &[Step], mass: f64) -> Composite {
    let gy = comp.grid_y;
    let hbar = gy.hbar();
    let ny = gy.n();
    let s = Spectral::new(&gy);
    let ys = gy.positions();
    // one half-step kinetic phase per distinct step length
    let mut halves: Vec<(f64, Vec<Complex64>)> = Vec::new();
    for st in steps {
        if !halves.iter().any(|(h, _)| *h == st.h) {
            halves.push((st.h, kinetic_phase(&gy, 0.5 * st.h, mass)));
        }
    }
    let half_for = |h: f64| &halves.iter().find(|(hh, _)| *hh == h).expect("half step").1;
    let gq = comp.grid_q;
    let mut amp = comp.amp.clone();
    amp.par_chunks_mut(ny).enumerate().for_each_init(
        || s.scratch(),
        |scratch, (iq, col)| {
            let q = gq.y(iq);
            s.forward(col, scratch);
            for st in steps {
                let k = half_for(st.h);
                for (a, f) in col.iter_mut().zip(k) {
                    *a *= f;
                }
                s.inverse(col, scratch);
                let c = st.strength * q * st.h / hbar;
                for (a, y) in col.iter_mut().zip(&ys) {
                    *a *= Complex64::from_polar(1.0, c * y);
                }
                s.forward(col, scratch);
                for (a, f) in col.iter_mut().zip(k) {
                    *a *= f;
                }
            }
            s.inverse(col, scratch);
        },
    );
    Composite::from_parts(gy, gq, amp)
}

fn evolve_velocity_form(comp: &Composite, steps: &[Step], mass: f64) -> Composite {
    // Both split factors are diagonal in (p, q): accumulate their exponents.
    let (mut sum_h, mut sum_hs, mut sum_hs2) = (0.0, 0.0, 0.0);
    for st in steps {
        sum_h += st.h;
        sum_hs += st.h * st.strength;
        sum_hs2 += st.h * st.strength * st.strength;
    }
    let gy = comp.grid_y;
    let c = 1.0 / (2.0 * mass * gy.hbar());
    let ps = gy.momenta();
    comp.map_columns_in_momentum(|q, col| {
        for (a, p) in col.iter_mut().zip(&ps) {
            let kinetic = p * p * sum_h - 2.0 * p * q * sum_hs + q * q * sum_hs2;
            let potential = -q * q * sum_hs2;
            *a *= Complex64::from_polar(1.0, -c * (kinetic + potential));
        }
    })
}
