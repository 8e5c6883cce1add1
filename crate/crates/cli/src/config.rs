//! Run configuration: TOML with fixed sections, unknown keys rejected.

use std::fmt;
use std::path::PathBuf;

use abshift::{
    Compensation, FeasibilityInputs, Grid, MeasurementConfig, PhysicalParams, PointerPrep,
};
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::ConfigError;

/// Points on the particle axis for single-particle scenarios.
pub const DEFAULT_N_Y_1D: usize = 2048;
/// Particle and pointer points for scenarios with a measuring device.
pub const DEFAULT_N_Y_COMPOSITE: usize = 1024;
pub const DEFAULT_N_Q: usize = 512;
pub const DEFAULT_N_SAMPLES: usize = 100_000;
/// Pointer momentum spread as a fraction of the fringe spacing `G T h / (m L)`.
pub const DEFAULT_POINTER_FRACTION: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    BeforeAfter,
    MeasuredAb,
    RelativeVelocity,
    FluxInsertRemove,
    Feasibility,
    Sweep,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::BeforeAfter => "before_after",
            Scenario::MeasuredAb => "measured_ab",
            Scenario::RelativeVelocity => "relative_velocity",
            Scenario::FluxInsertRemove => "flux_insert_remove",
            Scenario::Feasibility => "feasibility",
            Scenario::Sweep => "sweep",
        }
    }

    fn uses_pointer(self, cfg: &RunConfig) -> bool {
        match self {
            Scenario::MeasuredAb => true,
            Scenario::RelativeVelocity => cfg.measurement.is_some(),
            _ => false,
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scenario: Option<Scenario>,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub physics: Option<PhysicsSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub measurement: Option<MeasurementSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub flux: Option<FluxSection>,
    #[serde(default)]
    pub sampling: SamplingSection,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub feasibility: Option<FeasibilitySection>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_y: Option<usize>,
    /// Half-width of the particle axis.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y_extent: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_q: Option<usize>,
    /// Half-width of the pointer axis.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q_extent: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicsSection {
    pub separation: f64,
    pub alpha: f64,
    #[serde(default = "one")]
    pub sigma: f64,
    #[serde(default = "one")]
    pub mass: f64,
    #[serde(default = "one")]
    pub hbar: f64,
    #[serde(default)]
    pub v0: f64,
}

fn one() -> f64 {
    1.0
}

impl PhysicsSection {
    pub fn params(&self) -> PhysicalParams {
        PhysicalParams {
            mass: self.mass,
            hbar: self.hbar,
            separation: self.separation,
            alpha: self.alpha,
            sigma: self.sigma,
            v0: self.v0,
        }
    }
}

/// `"auto"` or a fixed strength.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum CompensationSpec {
    #[default]
    Auto,
    Fixed(f64),
}

impl Serialize for CompensationSpec {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            CompensationSpec::Auto => s.serialize_str("auto"),
            CompensationSpec::Fixed(a) => s.serialize_f64(*a),
        }
    }
}

impl<'de> Deserialize<'de> for CompensationSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = CompensationSpec;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("\"auto\" or a number")
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<Self::Value, E> {
                if v == "auto" {
                    Ok(CompensationSpec::Auto)
                } else {
                    Err(E::invalid_value(de::Unexpected::Str(v), &self))
                }
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Self::Value, E> {
                Ok(CompensationSpec::Fixed(v))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Self::Value, E> {
                Ok(CompensationSpec::Fixed(v as f64))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Self::Value, E> {
                Ok(CompensationSpec::Fixed(v as f64))
            }
        }
        d.deserialize_any(V)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasurementSection {
    pub coupling: f64,
    pub drift_time: f64,
    #[serde(default)]
    pub kick_duration: f64,
    #[serde(default)]
    pub compensation: CompensationSpec,
    /// At most one of the three pointer widths may be given.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pointer_sigma_q: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pointer_sigma_pi: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pointer_fraction: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
}

impl MeasurementSection {
    /// Pointer momentum spread implied by whichever width was given.
    pub fn sigma_pi(&self, params: &PhysicalParams) -> f64 {
        if let Some(s) = self.pointer_sigma_pi {
            s
        } else if let Some(s) = self.pointer_sigma_q {
            params.hbar / (2.0 * s)
        } else {
            let f = self.pointer_fraction.unwrap_or(DEFAULT_POINTER_FRACTION);
            f * (self.coupling * self.drift_time).abs() * params.fringe_period()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FluxSection {
    pub recombine_velocity: f64,
    /// Defaults to `L / (2 v)`, the time for the branches to meet.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub overlap_time: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phase_delay: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplingSection {
    #[serde(default = "default_samples")]
    pub n_samples: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_samples() -> usize {
    DEFAULT_N_SAMPLES
}

impl Default for SamplingSection {
    fn default() -> Self {
        SamplingSection {
            n_samples: DEFAULT_N_SAMPLES,
            seed: 0,
        }
    }
}

/// Keys a sweep may vary.
pub const SWEEP_PARAMETERS: &[&str] = &[
    "physics.alpha",
    "physics.separation",
    "physics.sigma",
    "physics.v0",
    "measurement.coupling",
    "measurement.drift_time",
    "measurement.pointer_fraction",
    "flux.recombine_velocity",
    "sampling.seed",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub scenario: Scenario,
    pub parameter: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub start: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stop: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
}

impl SweepSection {
    /// Explicit values, or `points` evenly spaced values from `start` to `stop` inclusive.
    pub fn values(&self) -> Result<Vec<f64>, ConfigError> {
        match (&self.values, self.start, self.stop, self.points) {
            (Some(v), None, None, None) => Ok(v.clone()),
            (None, Some(a), Some(b), Some(n)) if n >= 2 => {
                Ok((0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect())
            }
            (None, Some(a), Some(_), Some(1)) => Ok(vec![a]),
            _ => Err(ConfigError::invalid(
                "sweep",
                "give either `values` or all of `start`, `stop`, `points`",
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default)]
    pub format: Format,
    #[serde(default = "default_directory")]
    pub directory: PathBuf,
}

fn default_directory() -> PathBuf {
    PathBuf::from("abshift-out")
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            format: Format::Csv,
            directory: default_directory(),
        }
    }
}

/// CGS inputs. Any field left out is taken from the preset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeasibilitySection {
    #[serde(default = "default_preset")]
    pub preset: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mass: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub charge: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub separation: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub flux: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta_pi: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta_q: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coupling: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub drift_time: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kick_duration: Option<f64>,
}

fn default_preset() -> String {
    "electron_tonomura".into()
}

impl Default for FeasibilitySection {
    fn default() -> Self {
        FeasibilitySection {
            preset: default_preset(),
            mass: None,
            charge: None,
            separation: None,
            flux: None,
            delta_pi: None,
            delta_q: None,
            coupling: None,
            drift_time: None,
            kick_duration: None,
        }
    }
}

impl FeasibilitySection {
    pub fn inputs(&self) -> Result<FeasibilityInputs, ConfigError> {
        let mut i = match self.preset.as_str() {
            "electron_tonomura" => FeasibilityInputs::electron_tonomura(),
            other => {
                return Err(ConfigError::invalid(
                    "feasibility.preset",
                    format!("unknown preset `{other}` (known: electron_tonomura)"),
                ))
            }
        };
        let overrides = [
            (&mut i.mass, self.mass),
            (&mut i.charge, self.charge),
            (&mut i.separation, self.separation),
            (&mut i.flux, self.flux),
            (&mut i.delta_pi, self.delta_pi),
            (&mut i.delta_q, self.delta_q),
            (&mut i.coupling, self.coupling),
            (&mut i.drift_time, self.drift_time),
            (&mut i.kick_duration, self.kick_duration),
        ];
        for (slot, v) in overrides {
            if let Some(v) = v {
                *slot = v;
            }
        }
        Ok(i)
    }
}

/// Parses and validates a configuration. `scenario` is filled from the file
/// if present; a caller-chosen scenario is applied with [`RunConfig::resolve`].
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))
}

fn positive(path: &str, v: f64) -> Result<(), ConfigError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(ConfigError::invalid(path, format!("must be positive and finite, got {v}")))
    }
}

impl RunConfig {
    /// Sets the scenario (a subcommand overrides nothing silently: a
    /// conflicting value in the file is an error), fills defaults that depend
    /// on it and validates. The result echoes back as a complete config.
    pub fn resolve(mut self, scenario: Option<Scenario>) -> Result<RunConfig, ConfigError> {
        let scenario = match (scenario, self.scenario) {
            (Some(a), Some(b)) if a != b => {
                return Err(ConfigError::invalid(
                    "scenario",
                    format!("file selects `{b}` but the command asks for `{a}`"),
                ))
            }
            (Some(a), _) | (None, Some(a)) => a,
            (None, None) => return Err(ConfigError::invalid("scenario", "no scenario given")),
        };
        self.scenario = Some(scenario);
        match scenario {
            Scenario::Sweep => {
                let sweep = self
                    .sweep
                    .clone()
                    .ok_or_else(|| ConfigError::invalid("sweep", "a sweep needs a [sweep] section"))?;
                if matches!(sweep.scenario, Scenario::Sweep) {
                    return Err(ConfigError::invalid("sweep.scenario", "sweeps cannot nest"));
                }
                if !SWEEP_PARAMETERS.contains(&sweep.parameter.as_str()) {
                    return Err(ConfigError::invalid(
                        "sweep.parameter",
                        format!("`{}` cannot be swept (known: {})", sweep.parameter, SWEEP_PARAMETERS.join(", ")),
                    ));
                }
                let values = sweep.values()?;
                if values.is_empty() {
                    return Err(ConfigError::invalid("sweep.values", "no sweep points"));
                }
                // Every point must resolve on its own.
                for v in values {
                    self.point(v)?;
                }
            }
            Scenario::Feasibility => {
                let f = self.feasibility.get_or_insert_with(FeasibilitySection::default);
                abshift::feasibility_report(&f.inputs()?)
                    .map_err(|e| ConfigError::invalid("feasibility", e.to_string()))?;
            }
            _ => self.resolve_simulation(scenario)?,
        }
        Ok(self)
    }

    /// Configuration for one sweep point, resolved for the swept scenario.
    pub fn point(&self, value: f64) -> Result<RunConfig, ConfigError> {
        let sweep = self
            .sweep
            .as_ref()
            .ok_or_else(|| ConfigError::invalid("sweep", "missing [sweep] section"))?;
        let mut c = self.clone();
        c.sweep = None;
        c.scenario = None;
        let missing = |path: &str| ConfigError::invalid(path, "swept parameter's section is missing");
        match sweep.parameter.as_str() {
            "physics.alpha" => c.physics.as_mut().ok_or_else(|| missing("physics"))?.alpha = value,
            "physics.separation" => c.physics.as_mut().ok_or_else(|| missing("physics"))?.separation = value,
            "physics.sigma" => c.physics.as_mut().ok_or_else(|| missing("physics"))?.sigma = value,
            "physics.v0" => c.physics.as_mut().ok_or_else(|| missing("physics"))?.v0 = value,
            "measurement.coupling" => c.measurement.as_mut().ok_or_else(|| missing("measurement"))?.coupling = value,
            "measurement.drift_time" => {
                c.measurement.as_mut().ok_or_else(|| missing("measurement"))?.drift_time = value
            }
            "measurement.pointer_fraction" => {
                let m = c.measurement.as_mut().ok_or_else(|| missing("measurement"))?;
                m.pointer_fraction = Some(value);
                m.pointer_sigma_pi = None;
                m.pointer_sigma_q = None;
            }
            "flux.recombine_velocity" => {
                c.flux.as_mut().ok_or_else(|| missing("flux"))?.recombine_velocity = value
            }
            "sampling.seed" => {
                if !(value >= 0.0 && value.fract() == 0.0) {
                    return Err(ConfigError::invalid("sweep.values", "seeds must be non-negative integers"));
                }
                c.sampling.seed = value as u64
            }
            other => return Err(ConfigError::invalid("sweep.parameter", format!("`{other}` cannot be swept"))),
        }
        // Grid sizes are re-derived per point unless pinned in the file.
        c.resolve(Some(sweep.scenario))
    }

    fn resolve_simulation(&mut self, scenario: Scenario) -> Result<(), ConfigError> {
        let physics = self
            .physics
            .clone()
            .ok_or_else(|| ConfigError::invalid("physics", format!("`{scenario}` needs a [physics] section")))?;
        positive("physics.separation", physics.separation)?;
        positive("physics.sigma", physics.sigma)?;
        positive("physics.mass", physics.mass)?;
        positive("physics.hbar", physics.hbar)?;
        if !physics.alpha.is_finite() {
            return Err(ConfigError::invalid("physics.alpha", "must be finite"));
        }
        if !physics.v0.is_finite() {
            return Err(ConfigError::invalid("physics.v0", "must be finite"));
        }
        let params = physics
            .params()
            .validated()
            .map_err(|e| ConfigError::invalid("physics", e.to_string()))?;
        let composite = scenario.uses_pointer(self);
        let n_y = *self.grid.n_y.get_or_insert(if composite {
            DEFAULT_N_Y_COMPOSITE
        } else {
            DEFAULT_N_Y_1D
        });
        // With a pointer the branches spread by G sigma_q T / m during the drift.
        let spread = match (&self.measurement, composite) {
            (Some(m), true) => {
                let sigma_q = physics.hbar / (2.0 * m.sigma_pi(&params));
                (m.coupling * sigma_q * m.drift_time / physics.mass).hypot(physics.sigma)
            }
            _ => physics.sigma,
        };
        let y_extent = *self
            .grid
            .y_extent
            .get_or_insert((4.0 * physics.separation).max(0.5 * physics.separation + 8.0 * spread));
        Grid::with_hbar(n_y, y_extent, physics.hbar).map_err(|e| ConfigError::invalid("grid.n_y", e.to_string()))?;

        match scenario {
            Scenario::MeasuredAb | Scenario::RelativeVelocity => {
                if scenario == Scenario::MeasuredAb && self.measurement.is_none() {
                    return Err(ConfigError::invalid("measurement", "`measured_ab` needs a [measurement] section"));
                }
                if scenario == Scenario::RelativeVelocity && physics.v0 == 0.0 {
                    return Err(ConfigError::invalid("physics.v0", "`relative_velocity` needs v0 != 0"));
                }
                if let Some(m) = self.measurement.as_mut() {
                    validate_measurement(m, &params)?;
                    let sigma_q = physics.hbar / (2.0 * m.sigma_pi(&params));
                    let n_q = *self.grid.n_q.get_or_insert(DEFAULT_N_Q);
                    let q_extent = *self.grid.q_extent.get_or_insert(8.0 * sigma_q);
                    let gq = Grid::with_hbar(n_q, q_extent, physics.hbar)
                        .map_err(|e| ConfigError::invalid("grid.n_q", e.to_string()))?;
                    PointerPrep::new(gq, sigma_q).map_err(|e| ConfigError::invalid("grid.q_extent", e.to_string()))?;
                }
            }
            Scenario::FluxInsertRemove => {
                let f = self
                    .flux
                    .as_mut()
                    .ok_or_else(|| ConfigError::invalid("flux", "`flux_insert_remove` needs a [flux] section"))?;
                positive("flux.recombine_velocity", f.recombine_velocity)?;
                let t = *f
                    .overlap_time
                    .get_or_insert(physics.separation / (2.0 * f.recombine_velocity));
                positive("flux.overlap_time", t)?;
                if let Some(d) = f.phase_delay {
                    if !(d > 0.0 && d < t) {
                        return Err(ConfigError::invalid("flux.phase_delay", "must lie strictly inside (0, overlap_time)"));
                    }
                }
            }
            _ => {}
        }
        Ok(())
    }

    /// Particle grid; valid after [`RunConfig::resolve`].
    pub fn grid_y(&self) -> Result<Grid, abshift::Error> {
        let hbar = self.physics.as_ref().map_or(1.0, |p| p.hbar);
        Grid::with_hbar(self.grid.n_y.unwrap_or(DEFAULT_N_Y_1D), self.grid.y_extent.unwrap_or(80.0), hbar)
    }

    /// Measurement settings; valid after [`RunConfig::resolve`].
    pub fn measurement_config(&self) -> Result<Option<MeasurementConfig>, abshift::Error> {
        let (Some(m), Some(physics)) = (&self.measurement, &self.physics) else {
            return Ok(None);
        };
        let params = physics.params();
        let gq = Grid::with_hbar(
            self.grid.n_q.unwrap_or(DEFAULT_N_Q),
            self.grid.q_extent.unwrap_or(1.0),
            physics.hbar,
        )?;
        let pointer = PointerPrep::with_sigma_pi(gq, m.sigma_pi(&params))?;
        Ok(Some(MeasurementConfig {
            coupling: m.coupling,
            drift_time: m.drift_time,
            kick_duration: m.kick_duration,
            compensation: match m.compensation {
                CompensationSpec::Auto => Compensation::Auto,
                CompensationSpec::Fixed(a) => Compensation::Fixed(a),
            },
            pointer,
            step: m.step,
        }))
    }
}

fn validate_measurement(m: &MeasurementSection, params: &PhysicalParams) -> Result<(), ConfigError> {
    if !m.coupling.is_finite() || m.coupling == 0.0 {
        return Err(ConfigError::invalid("measurement.coupling", "must be finite and nonzero"));
    }
    positive("measurement.drift_time", m.drift_time)?;
    if !(m.kick_duration >= 0.0) {
        return Err(ConfigError::invalid("measurement.kick_duration", "must be non-negative"));
    }
    if let CompensationSpec::Fixed(a) = m.compensation {
        if !a.is_finite() {
            return Err(ConfigError::invalid("measurement.compensation", "must be \"auto\" or finite"));
        }
    }
    let given = [m.pointer_sigma_q, m.pointer_sigma_pi, m.pointer_fraction];
    if given.iter().filter(|v| v.is_some()).count() > 1 {
        return Err(ConfigError::invalid(
            "measurement",
            "give at most one of pointer_sigma_q, pointer_sigma_pi, pointer_fraction",
        ));
    }
    for (path, v) in [
        ("measurement.pointer_sigma_q", m.pointer_sigma_q),
        ("measurement.pointer_sigma_pi", m.pointer_sigma_pi),
        ("measurement.pointer_fraction", m.pointer_fraction),
        ("measurement.step", m.step),
    ] {
        if let Some(v) = v {
            positive(path, v)?;
        }
    }
    positive("measurement.pointer_sigma_pi", m.sigma_pi(params))?;
    // Defer the gate-length rules to the library so the two never drift apart.
    let gq = Grid::new(64, 4.0).expect("static grid");
    let probe = MeasurementConfig {
        coupling: m.coupling,
        drift_time: m.drift_time,
        kick_duration: m.kick_duration,
        compensation: Compensation::Auto,
        pointer: PointerPrep::new(gq, 1.0).expect("static pointer"),
        step: m.step,
    };
    probe
        .validate()
        .map_err(|e| ConfigError::invalid("measurement", e.to_string()))
}
