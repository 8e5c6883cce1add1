mod oracles;

use std::f64::consts::PI;

use abshift::evolve::coupling_kick;
use abshift::measure::SAMPLER_ALGORITHM;
use abshift::{
    histogram,
    ab_superposition, conditional_particle_state, fit_fringe, gaussian_packet, make_composite,
    measure_position_impulsive, measure_velocity_two_position, particle_velocity_marginal, pointer_distribution,
    sample_pointer, Compensation, Composite, Dist, DistKind, Grid, MeasurementConfig, PhysicalParams, PointerPrep,
};
use oracles::*;
use statrs::distribution::{ContinuousCDF, Normal};

fn single_packet_setup(k0: f64) -> (Composite, MeasurementConfig) {
    let gy = Grid::new(256, 20.0).unwrap();
    let gq = Grid::new(256, 8.0).unwrap();
    let prep = PointerPrep::new(gq, 1.0).unwrap();
    let particle = gaussian_packet(&gy, 0.0, 1.0, k0).unwrap();
    (
        make_composite(&particle, &prep).unwrap(),
        MeasurementConfig::impulsive(1.0, 1.0, prep),
    )
}

fn pointer_moments(c: &Composite) -> (f64, f64) {
    let d = pointer_distribution(c).unwrap();
    (d.mean(), d.variance())
}

#[test]
fn position_kick_recenters_pointer() {
    let gy = Grid::new(256, 20.0).unwrap();
    let gq = Grid::new(256, 8.0).unwrap();
    let prep = PointerPrep::new(gq, 1.0).unwrap();
    let particle = gaussian_packet(&gy, 2.5, 0.8, 0.0).unwrap();
    let comp = make_composite(&particle, &prep).unwrap();
    let out = measure_position_impulsive(&comp, 0.6).unwrap();
    let d = pointer_distribution(&out).unwrap();
    // Displaced Gaussian: mean G y0, variance (hbar/2 dq)^2 + G^2 sigma^2.
    let want_var = 0.25 + 0.36 * 0.64;
    assert!((d.mean() - 1.5).abs() < 1e-10);
    assert!((d.variance() - want_var).abs() < 1e-9);
    for (x, p) in d.axis().iter().zip(d.density()) {
        assert!((p - gaussian_density(*x, 1.5, want_var.sqrt())).abs() < 1e-9);
    }
}

#[test]
fn position_kick_on_two_branches_is_bimodal() {
    let gy = Grid::new(1024, 30.0).unwrap();
    let gq = Grid::new(256, 16.0).unwrap();
    let prep = PointerPrep::new(gq, 2.0).unwrap();
    let p = PhysicalParams::new(20.0, 0.0, 1.0).unwrap();
    let particle = ab_superposition(&gy, &p, false).unwrap();
    let out = measure_position_impulsive(&make_composite(&particle, &prep).unwrap(), 0.5).unwrap();
    let d = pointer_distribution(&out).unwrap();
    let sd = (1.0f64 / 16.0 + 0.25).sqrt();
    let want: Vec<f64> = d
        .axis()
        .iter()
        .map(|x| 0.5 * gaussian_density(*x, -5.0, sd) + 0.5 * gaussian_density(*x, 5.0, sd))
        .collect();
    assert!(l1(d.density(), &want, d.spacing()) < 1e-8);
}

#[test]
fn zero_coupling_preserves_product_state() {
    let (comp, _) = single_packet_setup(1.0);
    let out = measure_position_impulsive(&comp, 0.0).unwrap();
    assert!(out.distance(&comp) < 1e-15);
}

#[test]
fn pointer_reads_velocity_linearly() {
    let mut readings = Vec::new();
    for k0 in [-2.0, -1.0, 0.0, 1.0, 2.0] {
        let (comp, cfg) = single_packet_setup(k0);
        let (pi0, _) = pointer_moments(&comp);
        let out = measure_velocity_two_position(&comp, &cfg, 1.0).unwrap();
        let (pi1, _) = pointer_moments(&out);
        let shift = pi1 - pi0;
        assert!((shift - cfg.gain() * k0).abs() < 1e-6, "k0 = {k0}: {shift}");
        readings.push((k0, shift));
    }
    // Least-squares slope through the five readings.
    let n = readings.len() as f64;
    let (sx, sy) = readings.iter().fold((0.0, 0.0), |a, r| (a.0 + r.0, a.1 + r.1));
    let sxx: f64 = readings.iter().map(|r| r.0 * r.0).sum();
    let sxy: f64 = readings.iter().map(|r| r.0 * r.1).sum();
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    assert!((slope - 1.0).abs() < 1e-6);
}

#[test]
fn mistuned_compensation_inflates_pointer_variance() {
    let (comp, cfg) = single_packet_setup(1.0);
    let tuned = measure_velocity_two_position(&comp, &cfg, 1.0).unwrap();
    let cfg0 = MeasurementConfig {
        compensation: Compensation::Fixed(0.0),
        ..cfg
    };
    let mistuned = measure_velocity_two_position(&comp, &cfg0, 1.0).unwrap();
    let (_, v_tuned) = pointer_moments(&tuned);
    let (_, v_mis) = pointer_moments(&mistuned);
    let a = cfg.coupling * cfg.coupling * cfg.drift_time;
    let want = a * a * 1.0;
    assert!(((v_mis - v_tuned) - want).abs() < 0.05 * want);
    // Tuned variance: initial pointer plus G T times the velocity spread.
    assert!((v_tuned - (0.25 + 0.25)).abs() < 1e-8);
}

#[test]
fn only_tuned_compensation_removes_pointer_position() {
    let gy = Grid::new(256, 20.0).unwrap();
    let gq = Grid::new(256, 8.0).unwrap();
    let particle = gaussian_packet(&gy, 0.0, 1.0, 0.5).unwrap();
    let pointer = gaussian_packet(&gq, 1.5, 1.0, 0.0).unwrap();
    let comp = Composite::product(&particle, &pointer);
    let prep = PointerPrep::new(gq, 1.0).unwrap();
    let cfg = MeasurementConfig::impulsive(1.0, 1.0, prep);
    let tuned = cfg.tuned_compensation(1.0);
    assert_eq!(tuned, 1.0);
    let (pi0, _) = pointer_moments(&comp);
    let contamination = |a: f64| {
        let c = MeasurementConfig {
            compensation: Compensation::Fixed(a),
            ..cfg
        };
        let out = measure_velocity_two_position(&comp, &c, 1.0).unwrap();
        (pointer_moments(&out).0 - pi0 - 0.5).abs()
    };
    let at_opt = contamination(tuned);
    assert!(at_opt < 1e-8);
    for da in [-0.2, -0.05, 0.05, 0.2] {
        let off = contamination(tuned + da);
        assert!((off - da.abs() * 1.5).abs() < 1e-8);
        assert!(off > at_opt);
    }
}

#[test]
fn measurement_leaves_velocity_distribution_unchanged() {
    let (comp, cfg) = single_packet_setup(1.0);
    let before = particle_velocity_marginal(&comp, 1.0).unwrap();
    let after = particle_velocity_marginal(&measure_velocity_two_position(&comp, &cfg, 1.0).unwrap(), 1.0).unwrap();
    assert!(l1(before.density(), after.density(), before.spacing()) < 1e-9);

    let gy = Grid::new(512, 30.0).unwrap();
    let gq = Grid::new(128, 8.0).unwrap();
    let prep = PointerPrep::new(gq, 1.0).unwrap();
    let p = PhysicalParams::new(20.0, PI / 2.0, 1.0).unwrap();
    let psi = ab_superposition(&gy, &p, false).unwrap().apply_flux_phase(PI / 2.0).unwrap();
    let comp = make_composite(&psi, &prep).unwrap();
    let cfg = MeasurementConfig::impulsive(1.0, 1.0, prep);
    let before = psi.velocity_distribution(1.0).unwrap();
    let after = particle_velocity_marginal(&measure_velocity_two_position(&comp, &cfg, 1.0).unwrap(), 1.0).unwrap();
    assert!(l1(before.density(), after.density(), before.spacing()) < 1e-9);
}

#[test]
fn first_kick_alone_broadens_velocity() {
    let (comp, cfg) = single_packet_setup(0.0);
    let kicked = coupling_kick(&comp, -cfg.coupling).unwrap();
    let v0 = particle_velocity_marginal(&comp, 1.0).unwrap().variance();
    let v1 = particle_velocity_marginal(&kicked, 1.0).unwrap().variance();
    // Added spread G dq / m with dq = 1.
    assert!(((v1 - v0) - 1.0).abs() < 1e-8);
}

#[test]
fn uncertainty_bookkeeping() {
    let gy = Grid::new(2048, 48.0).unwrap();
    let gq = Grid::new(512, 40.0).unwrap();
    let (g, t, dq, sigma) = (1.0, 1.0, 5.0, 0.5);
    let prep = PointerPrep::new(gq, dq).unwrap();
    let particle = gaussian_packet(&gy, 0.0, sigma, 0.0).unwrap();
    let comp = make_composite(&particle, &prep).unwrap();
    let out = measure_velocity_two_position(&comp, &MeasurementConfig::impulsive(g, t, prep), 1.0).unwrap();

    let (_, var_y) = mean_var(&gy.positions(), &out.particle_position_density());
    let dy = var_y.sqrt();
    assert!((dy - g * dq * t).abs() < 0.1 * g * dq * t, "dy = {dy}");

    let cond = conditional_particle_state(&out, 0.3).unwrap();
    let vd = cond.velocity_distribution(1.0).unwrap();
    let dv = vd.std_dev();
    let want = prep.sigma_pi() / (g * t);
    assert!((dv - want).abs() < 0.1 * want, "dv = {dv}");

    assert!(dy * dv > 0.5);
    let (_, var_cy) = mean_var(&gy.positions(), &cond.position_distribution().unwrap().density().to_vec());
    assert!(var_cy.sqrt() * dv > 0.5);
}

/// Shared setup for the two-branch measurement: sigma = 0.5, L = 10,
/// G T = 1 split as G = 0.25, T = 4.
fn ab_measurement(fraction: f64) -> (Dist, PhysicalParams) {
    let gy = Grid::new(4096, 150.0).unwrap();
    let gq = Grid::new(1024, 100.0).unwrap();
    let p = PhysicalParams::new(10.0, PI / 2.0, 0.5).unwrap();
    let (g, t) = (0.25, 4.0);
    let prep = PointerPrep::with_sigma_pi(gq, fraction * g * t * 2.0 * PI / 10.0).unwrap();
    let psi = ab_superposition(&gy, &p, true).unwrap();
    let comp = make_composite(&psi, &prep).unwrap();
    let out = measure_velocity_two_position(&comp, &MeasurementConfig::impulsive(g, t, prep), 1.0).unwrap();
    let pointer = pointer_distribution(&out).unwrap();
    (pointer.rescaled(DistKind::Velocity, 1.0 / (g * t)).unwrap(), p)
}

#[test]
fn sharp_pointer_resolves_fringes() {
    let (d, p) = ab_measurement(0.05);
    let fit = fit_fringe(&d, &p);
    // Gaussian pointer blur multiplies the visibility by exp(-(k dv)^2 / 2).
    let want = (-(0.1 * PI).powi(2) / 2.0).exp();
    assert!(fit.visibility >= 0.9);
    assert!((fit.visibility - want).abs() < 5e-3, "{} vs {want}", fit.visibility);
    assert!((fit.alpha_hat - PI / 2.0).abs() < 1e-3);

    let (d, p) = ab_measurement(0.1);
    let fit = fit_fringe(&d, &p);
    let want = (-(0.2 * PI).powi(2) / 2.0).exp();
    assert!((fit.visibility - want).abs() < 5e-3, "{} vs {want}", fit.visibility);
}

#[test]
fn broad_pointer_washes_out_fringes() {
    let (d, p) = ab_measurement(1.0);
    let fit = fit_fringe(&d, &p);
    assert!(fit.visibility < 0.05);
    assert!(!fit.reliable);
}

#[test]
fn measured_distribution_matches_convolution() {
    let (d, p) = ab_measurement(0.1);
    // P_o(v) (1 + cos(k v - alpha)) convolved with N(0, s^2): envelope
    // N(0, S^2), fringe wavenumber k sv^2 / S^2, damping exp(-(k s sv / S)^2 / 2).
    let (s, sv, k) = (0.1 * 2.0 * PI / 10.0, 1.0, 10.0);
    let big_s = (sv * sv + s * s).sqrt();
    let damp = (-(k * s * sv / big_s).powi(2) / 2.0).exp();
    let kk = k * sv * sv / (big_s * big_s);
    let want: Vec<f64> = d
        .axis()
        .iter()
        .map(|&v| gaussian_density(v, 0.0, big_s) * (1.0 + damp * (kk * v - p.alpha).cos()))
        .collect();
    let got = d.density();
    assert!(l1(got, &want, d.spacing()) < 1e-6, "{}", l1(got, &want, d.spacing()));
}

#[test]
fn sampling_is_reproducible_and_unbiased() {
    let axis: Vec<f64> = (0..2000).map(|i| -10.0 + (i as f64 + 0.5) * 0.01).collect();
    let dens = axis.iter().map(|x| gaussian_density(*x, 0.0, 1.0)).collect();
    let d = Dist::new(DistKind::Pointer, axis, dens).unwrap();
    let n = 100_000;
    let a = sample_pointer(&d, n, 42).unwrap();
    let b = sample_pointer(&d, n, 42).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.n, n);
    let mean = a.values.iter().sum::<f64>() / n as f64;
    assert!(mean.abs() < 4.0 / (n as f64).sqrt());
    let c = sample_pointer(&d, n, 43).unwrap();
    assert_ne!(a.values, c.values);
    assert_eq!(SAMPLER_ALGORITHM, "chacha8-inverse-cdf-linear");

    let normal = Normal::new(0.0, 1.0).unwrap();
    let mut v = a.values.clone();
    v.sort_by(f64::total_cmp);
    let ks = v
        .iter()
        .enumerate()
        .map(|(i, x)| {
            let f = normal.cdf(*x);
            (f - i as f64 / n as f64).abs().max((f - (i + 1) as f64 / n as f64).abs())
        })
        .fold(0.0, f64::max);
    assert!(ks < 0.01, "ks = {ks}");
}

#[test]
fn sampling_ab_pointer_distribution() {
    let (d, _) = ab_measurement(0.1);
    let n = 10_000;
    let s = sample_pointer(&d, n, 7).unwrap();
    let mut v = s.values.clone();
    v.sort_by(f64::total_cmp);
    let ks = v
        .iter()
        .enumerate()
        .map(|(i, x)| {
            let f = d.cdf_at(*x);
            (f - i as f64 / n as f64).abs().max((f - (i + 1) as f64 / n as f64).abs())
        })
        .fold(0.0, f64::max);
    assert!(ks < 0.02, "ks = {ks}");
}

#[test]
fn sampling_rejects_empty_request() {
    let d = Dist::new(DistKind::Pointer, vec![0.0, 1.0], vec![1.0, 1.0]).unwrap();
    assert!(sample_pointer(&d, 0, 1).is_err());
}

#[test]
fn sampled_phase_error_follows_monte_carlo_rate() {
    let (d, p) = ab_measurement(0.1);
    let width = p.fringe_period() / 8.0;
    let (lo, hi) = d.support(1e-12);
    let lo = lo - 2.0 * width;
    let bins = ((hi + 2.0 * width - lo) / width).ceil() as usize;
    let rms = |n: usize| -> f64 {
        let seeds = 32u64;
        let sq: f64 = (0..seeds)
            .map(|seed| {
                let s = sample_pointer(&d, n, 1000 + seed).unwrap();
                let h = histogram(&s, bins, (lo, lo + bins as f64 * width), DistKind::Velocity).unwrap();
                (fit_fringe(&h, &p).alpha_hat - p.alpha).powi(2)
            })
            .sum();
        (sq / seeds as f64).sqrt()
    };
    let errs: Vec<f64> = [4_000, 16_000, 64_000].into_iter().map(rms).collect();
    for w in errs.windows(2) {
        let ratio = w[0] / w[1];
        assert!(ratio > 1.4 && ratio < 2.9, "errors {errs:?}");
    }
}
