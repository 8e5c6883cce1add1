//! End-to-end experiments: the velocity distribution before and after the
//! flux crossing, its measurement through a pointer, the relative-velocity
//! variant, and the flux insert/remove interferometer.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::analysis::{compare_distributions, fit_fringe, fit_fringe_wavenumber, histogram, FringeFit};
use crate::dist::{Dist, DistKind};
use crate::error::{Error, Result};
use crate::evolve::{free_step, make_composite};
use crate::grid::Grid;
use crate::measure::{
    measure_velocity_two_position, particle_velocity_marginal, pointer_distribution, sample_pointer,
    MeasurementConfig, SampleSet,
};
use crate::wave::{ab_superposition, canonical_phase, FourierCoeff, PhysicalParams, Wave};

/// Tolerance on the shift of the Fourier coefficients at `l = +-L`.
pub const FOURIER_SHIFT_TOLERANCE: f64 = 1e-4;
/// Relative tolerance on the alpha-invariance of velocity moments.
pub const MOMENT_TOLERANCE: f64 = 1e-6;
/// L1 tolerance on the particle velocity marginal across a measurement.
pub const INVARIANCE_TOLERANCE: f64 = 1e-9;
/// Pointer spread, in units of `G T h / (m L)`, below which fringes resolve.
pub const RESOLVABILITY_FRACTION: f64 = 0.1;
/// Tolerance on the recovered fringe phase.
pub const PHASE_TOLERANCE: f64 = 0.05;
/// Recombined packets with a fitted visibility below this do not overlap.
pub const MIN_OVERLAP_VISIBILITY: f64 = 0.5;
/// `m v0 sigma / hbar` needed for the two velocity humps to be disjoint.
pub const MIN_HUMP_SEPARATION: f64 = 4.0;
/// L1 tolerance between a computed distribution and its closed form.
pub const CLOSED_FORM_TOLERANCE: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub passed: bool,
}

impl Check {
    /// Passes when `value < threshold`.
    pub fn below(name: &str, value: f64, threshold: f64) -> Self {
        Check {
            name: name.into(),
            value,
            threshold,
            passed: value < threshold,
        }
    }

    /// Passes when `value > threshold`.
    pub fn above(name: &str, value: f64, threshold: f64) -> Self {
        Check {
            name: name.into(),
            value,
            threshold,
            passed: value > threshold,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioResult {
    pub label: String,
    pub distributions: BTreeMap<String, Dist>,
    /// Fourier coefficients grouped by set, e.g. `before`, `after`, `shift`.
    pub fourier: BTreeMap<String, Vec<FourierCoeff>>,
    pub samples: Option<SampleSet>,
    pub scalars: BTreeMap<String, f64>,
    pub checks: Vec<Check>,
    pub warnings: Vec<String>,
}

impl ScenarioResult {
    fn new(label: &str) -> Self {
        ScenarioResult {
            label: label.into(),
            distributions: BTreeMap::new(),
            fourier: BTreeMap::new(),
            samples: None,
            scalars: BTreeMap::new(),
            checks: Vec::new(),
            warnings: Vec::new(),
        }
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn scalar(&self, name: &str) -> Option<f64> {
        self.scalars.get(name).copied()
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    fn set(&mut self, name: impl Into<String>, v: f64) {
        self.scalars.insert(name.into(), v);
    }

    fn warn(&mut self, msg: String) {
        log::warn!("{}: {msg}", self.label);
        self.warnings.push(msg);
    }

    fn record_fit(&mut self, prefix: &str, fit: &FringeFit) {
        self.set(format!("{prefix}alpha_hat"), fit.alpha_hat);
        self.set(format!("{prefix}visibility"), fit.visibility);
        self.set(format!("{prefix}fit_residual"), fit.residual);
        self.set(format!("{prefix}fit_reliable"), if fit.reliable { 1.0 } else { 0.0 });
        if let Some(d) = &fit.diagnostics {
            self.warn(format!("{prefix}fit: {d}"));
        }
    }
}

/// Closed-form velocity density of the two-branch state:
/// `2 P_o(v) cos^2((m v - alpha hbar / L) L / (2 hbar))` with `P_o` the
/// Gaussian density of one branch.
pub fn closed_form_velocity_density(params: &PhysicalParams, v: f64) -> f64 {
    let sv = params.branch_velocity_spread();
    let p0 = (-(v * v) / (2.0 * sv * sv)).exp() / (sv * (2.0 * PI).sqrt());
    let arg = (params.mass * v - params.alpha * params.hbar / params.separation) * params.separation
        / (2.0 * params.hbar);
    2.0 * p0 * arg.cos().powi(2)
}

fn closed_form_dist(params: &PhysicalParams, axis: &[f64]) -> Result<Dist> {
    Dist::new(
        DistKind::Velocity,
        axis.to_vec(),
        axis.iter().map(|&v| closed_form_velocity_density(params, v)).collect(),
    )
}

fn check_units(grid: &Grid, params: &PhysicalParams) -> Result<PhysicalParams> {
    let p = params.validated()?;
    if (grid.hbar() - p.hbar).abs() > 1e-12 * p.hbar {
        return Err(Error::param(
            "hbar",
            format!("grid uses hbar = {} but physics uses {}", grid.hbar(), p.hbar),
        ));
    }
    Ok(p)
}

fn phase_error(estimate: f64, truth: f64) -> f64 {
    canonical_phase(estimate - truth).abs()
}

/// Velocity distribution of the two-branch state with and without the flux
/// phase, the Fourier coefficients at `l = +-L`, their shift, and the first
/// four velocity moments.
pub fn scenario_before_after(params: &PhysicalParams, grid: &Grid) -> Result<ScenarioResult> {
    let params = check_units(grid, params)?;
    let m = params.mass;
    let mut r = ScenarioResult::new("before_after");
    let before = ab_superposition(grid, &params, false)?;
    let after = before.apply_flux_phase(params.alpha)?;

    let p_before = before.velocity_distribution(m)?;
    let p_after = after.velocity_distribution(m)?;
    let cmp = compare_distributions(&p_after, &p_before)?;
    r.set("l1_before_after", cmp.l1);
    r.set("ks_before_after", cmp.ks);

    let l = params.separation;
    let f_before = [before.fourier_coefficient(l), before.fourier_coefficient(-l)];
    let f_after = [after.fourier_coefficient(l), after.fourier_coefficient(-l)];
    let shift: Vec<FourierCoeff> = f_before
        .iter()
        .zip(&f_after)
        .map(|(b, a)| FourierCoeff {
            l: b.l,
            value: a.value - b.value,
        })
        .collect();
    for (sign, (s, want)) in ["plus", "minus"].iter().zip(shift.iter().zip([
        0.5 * (Complex64::from_polar(1.0, params.alpha) - 1.0),
        0.5 * (Complex64::from_polar(1.0, -params.alpha) - 1.0),
    ])) {
        r.set(format!("delta_f_{sign}_re"), s.value.re);
        r.set(format!("delta_f_{sign}_im"), s.value.im);
        r.set(format!("delta_f_{sign}_expected_re"), want.re);
        r.set(format!("delta_f_{sign}_expected_im"), want.im);
        r.checks.push(Check::below(
            &format!("fourier_shift_{sign}"),
            (s.value - want).norm(),
            FOURIER_SHIFT_TOLERANCE,
        ));
    }

    let p2 = before.moment(2)?;
    for n in 1..=4u32 {
        let mb = before.moment(n)? / m.powi(n as i32);
        let ma = after.moment(n)? / m.powi(n as i32);
        let rel = (ma - mb).abs() / (p2 / (m * m)).powf(n as f64 / 2.0);
        r.set(format!("moment{n}_before"), mb);
        r.set(format!("moment{n}_after"), ma);
        r.checks.push(Check::below(&format!("moment{n}_invariance"), rel, MOMENT_TOLERANCE));
    }

    r.set("alpha", params.alpha);
    r.fourier.insert("before".into(), f_before.to_vec());
    r.fourier.insert("after".into(), f_after.to_vec());
    r.fourier.insert("shift".into(), shift);
    r.distributions.insert("P_before".into(), p_before);
    r.distributions.insert("P_after".into(), p_after);
    Ok(r)
}

/// Measures the velocity of `wave` through the pointer and records the
/// pointer distribution, the velocity estimate, the fringe fit and the
/// invariance of the particle's own velocity distribution.
fn measure_into(
    r: &mut ScenarioResult,
    wave: &Wave,
    params: &PhysicalParams,
    cfg: &MeasurementConfig,
    n_samples: usize,
    seed: u64,
) -> Result<()> {
    cfg.validate()?;
    let m = params.mass;
    let gain = cfg.gain();
    if !(gain > 0.0) {
        return Err(Error::param("coupling", "G T must be positive to read out velocity"));
    }
    let fringe_scale = gain * params.fringe_period();
    let resolvability = cfg.pointer.sigma_pi() / fringe_scale;
    r.set("gain", gain);
    r.set("compensation", cfg.compensation_strength(m));
    r.set("pointer_sigma_pi", cfg.pointer.sigma_pi());
    r.set("resolvability_ratio", resolvability);
    let resolvable = resolvability <= RESOLVABILITY_FRACTION * (1.0 + 1e-12);
    if !resolvable {
        r.warn(format!(
            "pointer spread is {resolvability:.3} fringe spacings, above {RESOLVABILITY_FRACTION}: fringes will wash out"
        ));
    }

    let comp = make_composite(wave, &cfg.pointer)?;
    let measured = measure_velocity_two_position(&comp, cfg, m)?;
    let pointer = pointer_distribution(&measured)?;
    let estimate = pointer.rescaled(DistKind::Velocity, 1.0 / gain)?;

    let v_before = wave.velocity_distribution(m)?;
    let v_after = particle_velocity_marginal(&measured, m)?;
    let inv = compare_distributions(&v_after, &v_before)?;
    r.set("velocity_marginal_l1", inv.l1);
    r.checks.push(Check::below("velocity_marginal_invariance", inv.l1, INVARIANCE_TOLERANCE));

    let fit = fit_fringe(&estimate, params);
    r.record_fit("analytic_", &fit);
    let mut best = fit;

    if n_samples > 0 {
        let samples = sample_pointer(&pointer, n_samples, seed)?;
        let width = fringe_scale / 8.0;
        let (lo, hi) = pointer.support(1e-12);
        let lo = lo - 2.0 * width;
        let bins = (((hi + 2.0 * width) - lo) / width).ceil().max(8.0) as usize;
        let hist = histogram(&samples, bins, (lo, lo + bins as f64 * width), DistKind::Pointer)?;
        let sampled = hist.rescaled(DistKind::Velocity, 1.0 / gain)?;
        let fit = fit_fringe(&sampled, params);
        r.record_fit("sampled_", &fit);
        r.distributions.insert("P_sampled".into(), sampled);
        r.samples = Some(samples);
        best = fit;
    }

    r.set("alpha_hat", best.alpha_hat);
    r.set("visibility", best.visibility);
    let err = phase_error(best.alpha_hat, params.alpha);
    r.set("alpha_error", err);
    if resolvable {
        r.checks.push(Check::below("alpha_recovery", err, PHASE_TOLERANCE));
    }
    r.distributions.insert("pointer".into(), pointer);
    r.distributions.insert("P_measured".into(), estimate);
    r.distributions.insert("P_particle".into(), v_before);
    Ok(())
}

/// Two-branch state with the flux phase, measured by two position
/// measurements and a compensating kick. `n_samples = 0` skips sampling.
pub fn scenario_measured_ab(
    params: &PhysicalParams,
    grid_y: &Grid,
    cfg: &MeasurementConfig,
    n_samples: usize,
    seed: u64,
) -> Result<ScenarioResult> {
    let params = check_units(grid_y, params)?;
    let mut r = ScenarioResult::new("measured_ab");
    let wave = ab_superposition(grid_y, &params, false)?.apply_flux_phase(params.alpha)?;
    r.set("alpha", params.alpha);
    measure_into(&mut r, &wave, &params, cfg, n_samples, seed)?;
    Ok(r)
}

/// Branches with relative velocity `2 v0`: the velocity humps are disjoint
/// and carry no fringes until an impulse annuls the relative velocity. A
/// control run without flux is recorded alongside.
pub fn scenario_relative_velocity(
    params: &PhysicalParams,
    grid: &Grid,
    cfg: Option<&MeasurementConfig>,
    n_samples: usize,
    seed: u64,
) -> Result<ScenarioResult> {
    let params = check_units(grid, params)?;
    if params.v0 == 0.0 {
        return Err(Error::param("v0", "the relative-velocity variant needs v0 != 0"));
    }
    let m = params.mass;
    let mut r = ScenarioResult::new("relative_velocity");
    let separation = m * params.v0.abs() * params.sigma / params.hbar;
    r.set("hump_separation", separation);
    if separation < MIN_HUMP_SEPARATION {
        r.warn(format!(
            "m v0 sigma / hbar = {separation:.3} < {MIN_HUMP_SEPARATION}: velocity humps overlap"
        ));
    }
    let k = params.fringe_wavenumber();

    let mut post_with_flux = None;
    for (tag, alpha) in [("", params.alpha), ("control_", 0.0)] {
        let p = params.with_alpha(alpha);
        let moving = ab_superposition(grid, &p, false)?.apply_flux_phase(alpha)?;
        let pre = moving.velocity_distribution(m)?;
        let pre_fit = fit_fringe_wavenumber(&pre, k);
        r.set(format!("{tag}pre_visibility"), pre_fit.visibility);

        let post = moving.apply_branch_impulse(-params.v0, m)?;
        let dist = post.velocity_distribution(m)?;
        let expected = closed_form_dist(&p, dist.axis())?;
        let l1 = compare_distributions(&dist, &expected)?.l1;
        r.set(format!("{tag}post_closed_form_l1"), l1);
        r.checks.push(Check::below(
            &format!("{tag}post_matches_closed_form"),
            l1,
            CLOSED_FORM_TOLERANCE,
        ));
        let post_fit = fit_fringe_wavenumber(&dist, k);
        r.set(format!("{tag}post_alpha_hat"), post_fit.alpha_hat);
        r.set(format!("{tag}post_visibility"), post_fit.visibility);
        r.checks.push(Check::below(
            &format!("{tag}post_phase"),
            phase_error(post_fit.alpha_hat, alpha),
            PHASE_TOLERANCE,
        ));
        r.distributions.insert(format!("{tag}P_pre_impulse"), pre);
        r.distributions.insert(format!("{tag}P_post_impulse"), dist);
        if tag.is_empty() {
            post_with_flux = Some(post);
        }
    }
    r.set("alpha", params.alpha);

    if let (Some(cfg), Some(post)) = (cfg, post_with_flux) {
        measure_into(&mut r, &post, &params, cfg, n_samples, seed)?;
    }
    Ok(r)
}

/// Optional second ordering for the insert/remove experiment: the flux
/// phase is applied after the branches have moved for `delay`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseTiming {
    pub delay: f64,
}

/// Flux inserted while the branches pass it, then removed. The branches
/// are turned towards each other with velocity `recombine_v`, evolve for
/// `t_overlap` and interfere in position space. The fringe phase is fitted
/// against a control without flux.
pub fn scenario_flux_insert_remove(
    params: &PhysicalParams,
    grid: &Grid,
    recombine_v: f64,
    t_overlap: f64,
    timing: Option<PhaseTiming>,
) -> Result<ScenarioResult> {
    let params = check_units(grid, params)?;
    if !(recombine_v > 0.0) {
        return Err(Error::param("recombine_v", "must be positive"));
    }
    if !(t_overlap > 0.0) {
        return Err(Error::param("t_overlap", "must be positive"));
    }
    let m = params.mass;
    let mut r = ScenarioResult::new("flux_insert_remove");
    let travel = recombine_v * t_overlap;
    let half = 0.5 * params.separation;
    r.set("travel", travel);
    if (travel - half).abs() > 0.1 * half {
        r.warn(format!("v t = {travel:.4} differs from L/2 = {half:.4} by more than 10%"));
    }
    let k = 2.0 * m * recombine_v / params.hbar;
    let base = ab_superposition(grid, &params, false)?;

    let run = |alpha: f64| -> Result<Wave> {
        let w = base.apply_flux_phase(alpha)?.apply_branch_impulse(recombine_v, m)?;
        free_step(&w, t_overlap, m)
    };

    let mut shifts = BTreeMap::new();
    for (tag, alpha) in [("", params.alpha), ("control_", 0.0)] {
        let pattern = run(alpha)?.position_distribution()?;
        let fit = fit_fringe_wavenumber(&pattern, k);
        if fit.visibility < MIN_OVERLAP_VISIBILITY {
            return Err(Error::NoOverlap {
                visibility: fit.visibility,
                diagnostics: format!(
                    "{}alpha = {alpha}: v t = {travel}, L/2 = {half}, residual {:.3e}",
                    tag, fit.residual
                ),
            });
        }
        r.set(format!("{tag}phase"), fit.alpha_hat);
        r.set(format!("{tag}visibility"), fit.visibility);
        r.set(format!("{tag}fit_residual"), fit.residual);
        shifts.insert(tag, fit.alpha_hat);
        r.distributions.insert(format!("{tag}pattern"), pattern);
    }
    let control = shifts[""] - shifts["control_"];
    let fitted = canonical_phase(control);
    r.set("alpha", params.alpha);
    r.set("fitted_phase", fitted);
    r.set("fringe_shift", fitted / k);
    r.set("fringe_period", 2.0 * PI / k);
    r.checks.push(Check::below("fitted_phase", phase_error(fitted, params.alpha), PHASE_TOLERANCE));
    r.checks.push(Check::below("control_phase", phase_error(shifts["control_"], 0.0), PHASE_TOLERANCE));

    if let Some(t) = timing {
        if !(t.delay > 0.0 && t.delay < t_overlap) {
            return Err(Error::param("delay", "must lie strictly inside (0, t_overlap)"));
        }
        let w = base.apply_branch_impulse(recombine_v, m)?;
        let w = free_step(&w, t.delay, m)?.apply_flux_phase(params.alpha)?;
        let late = free_step(&w, t_overlap - t.delay, m)?.position_distribution()?;
        let early = &r.distributions["pattern"];
        let l1 = compare_distributions(&late, early)?.l1;
        r.set("phase_timing_l1", l1);
        r.checks.push(Check::below("phase_timing_independence", l1, 1e-8));
        r.distributions.insert("pattern_delayed_phase".into(), late);
    }
    Ok(r)
}
