//! Order-of-magnitude feasibility checks in Gaussian CGS units.
//!
//! "Much greater" is tested as ratio >= 10 and "much less" as ratio <= 0.1.
//! Every flag is reported next to its raw ratio so stricter cuts can be
//! applied downstream.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const HBAR_CGS: f64 = 1.054_571_817e-27;
pub const H_CGS: f64 = 6.626_070_15e-27;
pub const C_CGS: f64 = 2.997_924_58e10;
pub const ELECTRON_MASS_CGS: f64 = 9.109_383_701_5e-28;
pub const ELECTRON_CHARGE_CGS: f64 = 4.803_204_71e-10;

pub const MUCH_GREATER: f64 = 10.0;
pub const MUCH_LESS: f64 = 0.1;

/// Physical inputs, all in CGS.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeasibilityInputs {
    /// g
    pub mass: f64,
    /// Signed charge, statcoulomb.
    pub charge: f64,
    /// Packet separation, cm.
    pub separation: f64,
    /// Enclosed flux, G cm^2.
    pub flux: f64,
    /// Initial pointer momentum spread, g cm / s.
    pub delta_pi: f64,
    /// Initial pointer position spread, cm.
    pub delta_q: f64,
    /// Coupling impulse, g / s.
    pub coupling: f64,
    /// Drift time between the two position measurements, s.
    pub drift_time: f64,
    /// Kick duration, s.
    pub kick_duration: f64,
    /// cm / s
    #[serde(default = "default_c")]
    pub c: f64,
}

fn default_c() -> f64 {
    C_CGS
}

impl FeasibilityInputs {
    /// Electron with a 6 um packet separation and a quarter flux quantum,
    /// with a pointer and timing that satisfy every bound.
    pub fn electron_tonomura() -> Self {
        let flux_quantum = H_CGS * C_CGS / ELECTRON_CHARGE_CGS;
        FeasibilityInputs {
            mass: ELECTRON_MASS_CGS,
            charge: -ELECTRON_CHARGE_CGS,
            separation: 6e-4,
            flux: 0.25 * flux_quantum,
            delta_pi: 0.5 * HBAR_CGS,
            delta_q: 1.0,
            coupling: 1e-18,
            drift_time: 1e-11,
            kick_duration: 1e-18,
            c: C_CGS,
        }
    }

    fn validate(&self) -> Result<()> {
        let fields = [
            ("mass", self.mass),
            ("separation", self.separation),
            ("delta_pi", self.delta_pi),
            ("delta_q", self.delta_q),
            ("coupling", self.coupling),
            ("drift_time", self.drift_time),
            ("kick_duration", self.kick_duration),
            ("c", self.c),
        ];
        for (name, v) in fields {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::param(name, format!("must be positive and finite, got {v}")));
            }
        }
        if !(self.charge.is_finite() && self.charge != 0.0) {
            return Err(Error::param("charge", "must be nonzero and finite"));
        }
        if !(self.flux.is_finite() && self.flux >= 0.0) {
            return Err(Error::param("flux", "must be nonnegative and finite"));
        }
        Ok(())
    }
}

/// One inequality: the tested ratio, the bound it is compared against and
/// the outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bound {
    pub name: String,
    pub description: String,
    pub ratio: f64,
    pub threshold: f64,
    /// `true` when the ratio must be at least the threshold.
    pub at_least: bool,
    pub passed: bool,
}

impl Bound {
    fn at_least(name: &str, description: &str, ratio: f64, threshold: f64) -> Self {
        Bound {
            name: name.into(),
            description: description.into(),
            ratio,
            threshold,
            at_least: true,
            passed: ratio >= threshold,
        }
    }

    fn at_most(name: &str, description: &str, ratio: f64, threshold: f64) -> Self {
        Bound {
            name: name.into(),
            description: description.into(),
            ratio,
            threshold,
            at_least: false,
            passed: ratio <= threshold,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub inputs: FeasibilityInputs,
    /// Flux phase `-e Phi / (hbar c)`, reduced to `(-pi, pi]`.
    pub alpha: f64,
    /// Velocity change per modular momentum quantum, `h / (m L)`.
    pub delta_v: f64,
    /// Compton wavelength `hbar / (m c)`.
    pub compton_length: f64,
    /// Shortest meaningful kick, `h / (m c^2)`.
    pub min_kick_duration: f64,
    /// Light-crossing time of the packet separation, `L / c`.
    pub light_crossing_time: f64,
    /// Velocity kick imparted by the pointer spread, `G dq / m`.
    pub intermediate_velocity: f64,
    /// Position resolution `d pi / G`.
    pub position_resolution: f64,
    /// Pointer-space fringe scale `(G T / m) alpha h / L`.
    pub pointer_fringe_scale: f64,
    pub bounds: Vec<Bound>,
    pub all_passed: bool,
}

/// Recomputes every derived quantity from `inputs`; a pure function.
pub fn feasibility_report(inputs: &FeasibilityInputs) -> Result<FeasibilityReport> {
    inputs.validate()?;
    let i = inputs;
    let alpha = crate::wave::canonical_phase(-i.charge * i.flux / (HBAR_CGS * i.c));
    let delta_v = H_CGS / (i.mass * i.separation);
    let compton_length = HBAR_CGS / (i.mass * i.c);
    let min_kick_duration = H_CGS / (i.mass * i.c * i.c);
    let light_crossing_time = i.separation / i.c;
    let intermediate_velocity = i.coupling * i.delta_q / i.mass;
    let position_resolution = i.delta_pi / i.coupling;
    let pointer_fringe_scale = i.coupling * i.drift_time / i.mass * alpha.abs() * H_CGS / i.separation;
    let impulsive_term = i.coupling * i.coupling * i.delta_q / i.mass * i.kick_duration / 6.0;

    let bounds = vec![
        Bound::at_least(
            "position_signal",
            "G (L/2) >> d_pi: displacement dominates pointer noise",
            i.coupling * 0.5 * i.separation / i.delta_pi,
            MUCH_GREATER,
        ),
        Bound::at_most(
            "impulsive_limit",
            "G^2 dq T0 / (6 m) <= d_pi: acceleration during the kick is negligible",
            impulsive_term / i.delta_pi,
            1.0,
        ),
        Bound::at_most(
            "pointer_sharpness",
            "d_pi << (G T / m) alpha h / L: fringes resolvable in the pointer",
            if pointer_fringe_scale > 0.0 {
                i.delta_pi / pointer_fringe_scale
            } else {
                f64::INFINITY
            },
            MUCH_LESS,
        ),
        Bound::at_most(
            "nonrelativistic_kick",
            "G dq / m << c",
            intermediate_velocity / i.c,
            MUCH_LESS,
        ),
        Bound::at_least(
            "compton_resolution",
            "d_pi / G >> hbar / (m c)",
            position_resolution / compton_length,
            MUCH_GREATER,
        ),
        Bound::at_least(
            "kick_duration",
            "T0 >> h / (m c^2)",
            i.kick_duration / min_kick_duration,
            MUCH_GREATER,
        ),
        Bound::at_least(
            "modulo_region",
            "G dq / m >> L / T",
            intermediate_velocity * i.drift_time / i.separation,
            MUCH_GREATER,
        ),
        Bound::at_least(
            "drift_time",
            "T >> L / c",
            i.drift_time / light_crossing_time,
            MUCH_GREATER,
        ),
    ];
    let all_passed = bounds.iter().all(|b| b.passed);
    Ok(FeasibilityReport {
        inputs: inputs.clone(),
        alpha,
        delta_v,
        compton_length,
        min_kick_duration,
        light_crossing_time,
        intermediate_velocity,
        position_resolution,
        pointer_fringe_scale,
        bounds,
        all_passed,
    })
}
