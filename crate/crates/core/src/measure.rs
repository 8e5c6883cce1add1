//! Measurement protocols, pointer readout and outcome sampling.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dist::{Dist, DistKind};
use crate::error::{Error, Result};
use crate::evolve::{
    coupling_kick, compensation_kick, drift_composite, evolve_coupled, kick_with_compensation, Composite,
    CouplingForm, Gate, PointerPrep, StepControl,
};
use crate::spectral::Spectral;
use crate::wave::Wave;

/// Identifier of the generator behind [`sample_pointer`].
pub const SAMPLER_ALGORITHM: &str = "chacha8-inverse-cdf-linear";

/// Compensation impulse strength.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Compensation {
    /// Tuned value, `integral G(t)^2 dt / m`; `G^2 T / m` for impulsive kicks.
    Auto,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasurementConfig {
    /// Total impulse `G` of each kick.
    pub coupling: f64,
    /// Time `T` between the starts of the two kicks.
    pub drift_time: f64,
    /// Kick duration `T0`; zero means impulsive.
    pub kick_duration: f64,
    pub compensation: Compensation,
    pub pointer: PointerPrep,
    /// Integration step for finite-duration kicks; defaults to `T0 / 64`.
    pub step: Option<f64>,
}

impl MeasurementConfig {
    pub fn impulsive(coupling: f64, drift_time: f64, pointer: PointerPrep) -> Self {
        MeasurementConfig {
            coupling,
            drift_time,
            kick_duration: 0.0,
            compensation: Compensation::Auto,
            pointer,
            step: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.coupling.is_finite() {
            return Err(Error::param("coupling", "must be finite"));
        }
        if !(self.drift_time > 0.0) {
            return Err(Error::param("drift_time", "must be positive"));
        }
        if !(self.kick_duration >= 0.0) {
            return Err(Error::param("kick_duration", "must be nonnegative"));
        }
        if self.kick_duration > 0.0 && self.drift_time < 20.0 * self.kick_duration {
            return Err(Error::param(
                "kick_duration",
                format!(
                    "T = {} must be at least 20 T0 = {}",
                    self.drift_time,
                    20.0 * self.kick_duration
                ),
            ));
        }
        if let Compensation::Fixed(a) = self.compensation {
            if !a.is_finite() {
                return Err(Error::param("compensation", "must be finite"));
            }
        }
        Ok(())
    }

    /// `G T`, the pointer displacement per unit velocity.
    pub fn gain(&self) -> f64 {
        self.coupling * self.drift_time
    }

    /// The ramp gate whose time derivative reproduces the two kicks.
    pub fn ramp_gate(&self) -> Option<Gate> {
        (self.kick_duration > 0.0).then(|| Gate::RampPlateauRamp {
            g0: self.coupling / self.kick_duration,
            t0: self.kick_duration,
            t: self.drift_time,
        })
    }

    /// Tuned compensation `integral G(t)^2 dt / m`.
    pub fn tuned_compensation(&self, mass: f64) -> f64 {
        match self.ramp_gate() {
            None => self.coupling * self.coupling * self.drift_time / mass,
            Some(g) => g.integral_sq() / mass,
        }
    }

    pub fn compensation_strength(&self, mass: f64) -> f64 {
        match self.compensation {
            Compensation::Auto => self.tuned_compensation(mass),
            Compensation::Fixed(a) => a,
        }
    }

    fn step_control(&self) -> StepControl {
        StepControl::new(self.step.unwrap_or(self.kick_duration / 64.0))
    }
}

/// Impulsive position measurement: one coupling kick of strength `G`.
pub fn measure_position_impulsive(comp: &Composite, coupling: f64) -> Result<Composite> {
    coupling_kick(comp, coupling)
}

/// Velocity from two position measurements: kick `-G`, drift, kick `+G`, and
/// the `exp(i a q^2 / 2 hbar)` compensation. With the tuned `a` the pointer
/// moves by `G T v(0)`.
pub fn measure_velocity_two_position(comp: &Composite, cfg: &MeasurementConfig, mass: f64) -> Result<Composite> {
    cfg.validate()?;
    let g = cfg.coupling;
    let a = cfg.compensation_strength(mass);
    if cfg.kick_duration == 0.0 {
        let c = coupling_kick(comp, -g)?;
        let c = drift_composite(&c, cfg.drift_time, mass)?;
        kick_with_compensation(&c, g, a)
    } else {
        let t0 = cfg.kick_duration;
        let g0 = g / t0;
        let step = cfg.step_control();
        let c = evolve_coupled(comp, &Gate::Rect { g0: -g0, t0 }, step, CouplingForm::Position, mass)?;
        let c = drift_composite(&c, cfg.drift_time - t0, mass)?;
        let c = evolve_coupled(&c, &Gate::Rect { g0, t0 }, step, CouplingForm::Position, mass)?;
        compensation_kick(&c, a)
    }
}

/// Continuous velocity coupling `(p - G(t) q)^2/2m - G(t)^2 q^2/2m` over the
/// ramp-plateau-ramp gate. Requires `kick_duration > 0`.
pub fn measure_velocity_continuous(comp: &Composite, cfg: &MeasurementConfig, dt: f64, mass: f64) -> Result<Composite> {
    cfg.validate()?;
    let gate = cfg
        .ramp_gate()
        .ok_or_else(|| Error::param("kick_duration", "continuous coupling needs a ramp of positive duration"))?;
    evolve_coupled(comp, &gate, StepControl::new(dt), CouplingForm::Velocity, mass)
}

/// Pointer-momentum marginal: transform along `q`, trace out `y`.
pub fn pointer_distribution(comp: &Composite) -> Result<Dist> {
    let gy = *comp.grid_y();
    let gq = *comp.grid_q();
    let (ny, nq) = (gy.n(), gq.n());
    let s = Spectral::new(&gq);
    let amp = comp.amplitudes();
    let rows: Vec<Vec<f64>> = (0..ny)
        .into_par_iter()
        .map_init(
            || s.scratch(),
            |scratch, iy| {
                let mut row: Vec<Complex64> = (0..nq).map(|iq| amp[iq * ny + iy]).collect();
                s.forward(&mut row, scratch);
                row.iter().map(|a| a.norm_sqr()).collect()
            },
        )
        .collect();
    let mut density = vec![0.0; nq];
    for row in &rows {
        for (d, r) in density.iter_mut().zip(row) {
            *d += r * gy.dy();
        }
    }
    Dist::new(DistKind::Pointer, gq.momenta(), density)
}

/// Particle velocity marginal with the pointer traced out.
pub fn particle_velocity_marginal(comp: &Composite, mass: f64) -> Result<Dist> {
    if !(mass > 0.0) {
        return Err(Error::param("mass", "must be positive"));
    }
    let gy = *comp.grid_y();
    let gq = *comp.grid_q();
    let ny = gy.n();
    let s = Spectral::new(&gy);
    let cols: Vec<Vec<f64>> = comp
        .amplitudes()
        .par_chunks(ny)
        .map_init(
            || s.scratch(),
            |scratch, col| {
                let mut buf = col.to_vec();
                s.forward(&mut buf, scratch);
                buf.iter().map(|a| a.norm_sqr()).collect()
            },
        )
        .collect();
    let mut density = vec![0.0; ny];
    for col in &cols {
        for (d, c) in density.iter_mut().zip(col) {
            *d += c * gq.dy() * mass;
        }
    }
    Dist::new(
        DistKind::Velocity,
        gy.momenta().into_iter().map(|p| p / mass).collect(),
        density,
    )
}

/// Particle state conditioned on the pointer reading nearest `pointer_value`.
pub fn conditional_particle_state(comp: &Composite, pointer_value: f64) -> Result<Wave> {
    let gy = *comp.grid_y();
    let gq = *comp.grid_q();
    let (ny, nq) = (gy.n(), gq.n());
    let k = ((pointer_value / gq.dk()).round() as i64 + (nq / 2) as i64).clamp(0, nq as i64 - 1) as usize;
    let s = Spectral::new(&gq);
    let amp = comp.amplitudes();
    let picked: Vec<Complex64> = (0..ny)
        .into_par_iter()
        .map_init(
            || s.scratch(),
            |scratch, iy| {
                let mut row: Vec<Complex64> = (0..nq).map(|iq| amp[iq * ny + iy]).collect();
                s.forward(&mut row, scratch);
                row[k]
            },
        )
        .collect();
    Wave::from_amplitudes(gy, picked)
}

/// Reproducible draws from a tabulated distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSet {
    pub values: Vec<f64>,
    pub seed: u64,
    pub n: usize,
}

/// Inverse-CDF sampling: the density is constant inside each cell, so the
/// CDF is linear there. Uses ChaCha8 seeded from `seed`.
pub fn sample_pointer(dist: &Dist, n: usize, seed: u64) -> Result<SampleSet> {
    if n == 0 {
        return Err(Error::param("n", "need at least one sample"));
    }
    let edges = dist.cdf_edges();
    if !edges.iter().all(|v| v.is_finite()) {
        return Err(Error::DegenerateDistribution("density has zero mass".into()));
    }
    let d = dist.spacing();
    let lo = dist.axis()[0] - 0.5 * d;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = (0..n)
        .map(|_| {
            let u: f64 = rng.random();
            // first edge strictly above u
            let i = edges.partition_point(|e| *e <= u).clamp(1, edges.len() - 1) - 1;
            let width = edges[i + 1] - edges[i];
            let f = if width > 0.0 { (u - edges[i]) / width } else { 0.5 };
            lo + (i as f64 + f) * d
        })
        .collect();
    Ok(SampleSet { values, seed, n })
}
