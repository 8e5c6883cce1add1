//! Scenario execution and artifact layout.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use abshift::scenario::{
    scenario_before_after, scenario_flux_insert_remove, scenario_measured_ab, scenario_relative_velocity, Check,
    PhaseTiming, ScenarioResult,
};
use abshift::{feasibility_report, FeasibilityReport};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{RunConfig, Scenario};
use crate::error::{ConfigError, RunError, EXIT_OK, EXIT_STATISTICAL};
use crate::output;

#[derive(Debug, Clone, Serialize)]
pub struct ErrorInfo {
    pub category: &'static str,
    pub message: String,
}

/// Machine-readable record of one run, written as `summary.json`.
#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub scenario: String,
    /// False when the run stopped early; files listed are then partial.
    pub complete: bool,
    pub passed: bool,
    pub exit_code: u8,
    pub seed: u64,
    pub sampler: &'static str,
    pub checks: Vec<Check>,
    pub scalars: BTreeMap<String, f64>,
    pub warnings: Vec<String>,
    pub files: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorInfo>,
}

impl RunSummary {
    fn new(cfg: &RunConfig) -> Self {
        RunSummary {
            scenario: cfg.scenario.map_or("unknown", |s| s.name()).into(),
            complete: false,
            passed: false,
            exit_code: EXIT_OK,
            seed: cfg.sampling.seed,
            sampler: abshift::measure::SAMPLER_ALGORITHM,
            checks: Vec::new(),
            scalars: BTreeMap::new(),
            warnings: Vec::new(),
            files: Vec::new(),
            error: None,
        }
    }

    fn fail(&mut self, e: &RunError) {
        self.complete = false;
        self.passed = false;
        self.exit_code = e.exit_code();
        self.error = Some(ErrorInfo {
            category: e.category(),
            message: e.to_string(),
        });
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub point: String,
    pub value: f64,
    pub complete: bool,
    pub passed: bool,
    pub exit_code: u8,
    pub scalars: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepSummary {
    pub scenario: &'static str,
    pub swept: String,
    pub parameter: String,
    pub complete: bool,
    pub passed: bool,
    pub exit_code: u8,
    pub points: Vec<SweepRow>,
}

/// Runs a resolved configuration into `dir` and returns the process exit code.
pub fn execute(cfg: &RunConfig, dir: &Path) -> Result<u8, RunError> {
    match cfg.scenario {
        Some(Scenario::Sweep) => run_sweep(cfg, dir).map(|s| s.exit_code),
        _ => run_single(cfg, dir).map(|s| s.exit_code),
    }
}

/// Runs one scenario. Model failures are recorded in the summary rather
/// than returned; only failures to write output are errors.
pub fn run_single(cfg: &RunConfig, dir: &Path) -> Result<RunSummary, RunError> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("config.toml"), toml::to_string(cfg)?)?;
    let mut summary = RunSummary::new(cfg);
    summary.files.push("config.toml".into());
    if let Err(e) = fill(cfg, dir, &mut summary) {
        if matches!(e, RunError::Io(_) | RunError::Csv(_) | RunError::Json(_) | RunError::Toml(_)) {
            return Err(e);
        }
        log::error!("{}: {e}", summary.scenario);
        summary.fail(&e);
    }
    output::write_summary(dir, &summary)?;
    Ok(summary)
}

fn fill(cfg: &RunConfig, dir: &Path, summary: &mut RunSummary) -> Result<(), RunError> {
    let format = cfg.output.format;
    let scenario = cfg
        .scenario
        .ok_or_else(|| ConfigError::invalid("scenario", "no scenario given"))?;
    if scenario == Scenario::Feasibility {
        let inputs = cfg.feasibility.clone().unwrap_or_default().inputs()?;
        let report = feasibility_report(&inputs)?;
        summary.files.push(output::write_report(dir, "feasibility", &report)?);
        record_feasibility(summary, &report);
        summary.files.push(output::write_scalars(dir, &summary.scalars, format)?);
    } else {
        let result = simulate(cfg, scenario)?;
        for (name, d) in &result.distributions {
            summary.files.push(output::write_distribution(dir, name, d, format)?);
        }
        if !result.fourier.is_empty() {
            summary.files.push(output::write_fourier(dir, &result.fourier, format)?);
        }
        if let Some(s) = &result.samples {
            summary.files.push(output::write_samples(dir, s, format)?);
        }
        summary.files.push(output::write_scalars(dir, &result.scalars, format)?);
        summary.passed = result.all_passed();
        summary.checks = result.checks;
        summary.scalars = result.scalars;
        summary.warnings = result.warnings;
    }
    summary.complete = true;
    summary.exit_code = if summary.passed { EXIT_OK } else { EXIT_STATISTICAL };
    Ok(())
}

fn simulate(cfg: &RunConfig, scenario: Scenario) -> Result<ScenarioResult, RunError> {
    let physics = cfg
        .physics
        .as_ref()
        .ok_or_else(|| ConfigError::invalid("physics", "missing [physics] section"))?;
    let params = physics.params();
    let grid = cfg.grid_y()?;
    let measurement = cfg.measurement_config()?;
    let (n, seed) = (cfg.sampling.n_samples, cfg.sampling.seed);
    let result = match scenario {
        Scenario::BeforeAfter => scenario_before_after(&params, &grid)?,
        Scenario::MeasuredAb => {
            let m = measurement.ok_or_else(|| ConfigError::invalid("measurement", "missing [measurement] section"))?;
            scenario_measured_ab(&params, &grid, &m, n, seed)?
        }
        Scenario::RelativeVelocity => scenario_relative_velocity(&params, &grid, measurement.as_ref(), n, seed)?,
        Scenario::FluxInsertRemove => {
            let f = cfg
                .flux
                .as_ref()
                .ok_or_else(|| ConfigError::invalid("flux", "missing [flux] section"))?;
            let t = f
                .overlap_time
                .unwrap_or(physics.separation / (2.0 * f.recombine_velocity));
            let timing = f.phase_delay.map(|delay| PhaseTiming { delay });
            scenario_flux_insert_remove(&params, &grid, f.recombine_velocity, t, timing)?
        }
        Scenario::Feasibility | Scenario::Sweep => unreachable!("dispatched by the caller"),
    };
    Ok(result)
}

fn record_feasibility(summary: &mut RunSummary, r: &FeasibilityReport) {
    let s = &mut summary.scalars;
    s.insert("alpha".into(), r.alpha);
    s.insert("delta_v".into(), r.delta_v);
    s.insert("compton_length".into(), r.compton_length);
    s.insert("min_kick_duration".into(), r.min_kick_duration);
    s.insert("light_crossing_time".into(), r.light_crossing_time);
    s.insert("intermediate_velocity".into(), r.intermediate_velocity);
    s.insert("position_resolution".into(), r.position_resolution);
    s.insert("pointer_fringe_scale".into(), r.pointer_fringe_scale);
    for b in &r.bounds {
        s.insert(format!("ratio_{}", b.name), b.ratio);
        summary.checks.push(Check {
            name: b.name.clone(),
            value: b.ratio,
            threshold: b.threshold,
            passed: b.passed,
        });
    }
    summary.passed = r.all_passed;
}

/// Runs every sweep point in parallel, each into `point_NNN/`, then writes
/// `summary.csv` and `summary.json` with one row per point.
pub fn run_sweep(cfg: &RunConfig, dir: &Path) -> Result<SweepSummary, RunError> {
    let sweep = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| ConfigError::invalid("sweep", "missing [sweep] section"))?;
    let values = sweep.values()?;
    fs::create_dir_all(dir)?;
    fs::write(dir.join("config.toml"), toml::to_string(cfg)?)?;
    let width = values.len().saturating_sub(1).to_string().len().max(3);
    let rows: Vec<SweepRow> = values
        .par_iter()
        .enumerate()
        .map(|(i, &v)| -> Result<SweepRow, RunError> {
            let point = format!("point_{i:0width$}");
            let s = run_single(&cfg.point(v)?, &dir.join(&point))?;
            Ok(SweepRow {
                point,
                value: v,
                complete: s.complete,
                passed: s.passed,
                exit_code: s.exit_code,
                scalars: s.scalars,
            })
        })
        .collect::<Result<_, _>>()?;
    output::write_sweep_table(dir, &sweep.parameter, &rows)?;
    let summary = SweepSummary {
        scenario: "sweep",
        swept: sweep.scenario.name().into(),
        parameter: sweep.parameter.clone(),
        complete: rows.iter().all(|r| r.complete),
        passed: rows.iter().all(|r| r.passed),
        exit_code: rows.iter().map(|r| r.exit_code).max().unwrap_or(EXIT_OK),
        points: rows,
    };
    output::write_summary(dir, &summary)?;
    Ok(summary)
}
