mod oracles;

use abshift::evolve::{compensation_kick, drift_composite};
use abshift::{
    coupling_kick, evolve_coupled, free_step, gaussian_packet, make_composite, measure_velocity_continuous,
    measure_velocity_two_position, pointer_distribution, Composite, CouplingForm, Error, Gate, Grid,
    MeasurementConfig, PointerPrep, StepControl, Wave,
};
use nalgebra::DMatrix;
use oracles::*;

fn composite_from(gy: Grid, gq: Grid, psi: impl Fn(f64) -> C, chi: impl Fn(f64) -> C) -> Composite {
    let p = Wave::from_amplitudes(gy, gy.positions().into_iter().map(&psi).collect()).unwrap();
    let q = Wave::from_amplitudes(gq, gq.positions().into_iter().map(&chi).collect()).unwrap();
    Composite::product(&p, &q)
}

fn state_error(a: &Composite, b: &[C]) -> f64 {
    l2_distance(a.amplitudes(), b, a.grid_y().dy() * a.grid_q().dy())
}

#[test]
fn free_step_matches_spreading_gaussian() {
    let g = Grid::with_hbar(512, 60.0, 0.7).unwrap();
    let (m, t) = (1.3, 2.5);
    let w = gaussian_packet(&g, -4.0, 1.1, 1.4).unwrap();
    let out = free_step(&w, t, m).unwrap();
    for (j, a) in out.amplitudes().iter().enumerate() {
        let want = free_gaussian_amp(g.y(j), t, -4.0, 1.1, 1.4, m, 0.7);
        assert!((a - want).norm() < 1e-10, "j = {j}");
    }
}

#[test]
fn free_steps_compose() {
    let g = Grid::new(256, 30.0).unwrap();
    let w = gaussian_packet(&g, 1.0, 1.0, -1.0).unwrap();
    let once = free_step(&w, 1.0, 1.0).unwrap();
    let twice = free_step(&free_step(&w, 0.4, 1.0).unwrap(), 0.6, 1.0).unwrap();
    assert!(once.distance(&twice) < 1e-13);
}

#[test]
fn drift_matches_dense_kinetic_propagator() {
    let gy = Grid::new(64, 8.0).unwrap();
    let gq = Grid::new(64, 10.0).unwrap();
    let comp = composite_from(gy, gq, |y| gaussian_amp(y, 0.3, 0.6, 1.0, 1.0), |q| gaussian_amp(q, 0.0, 0.8, 0.0, 1.0));
    let k = momentum_function(&gy, |p| p * p / 2.0);
    let u = propagator(&k, 0.7, 1.0);
    let want = apply_blocks(comp.amplitudes(), 64, |_| u.clone());
    let got = drift_composite(&comp, 0.7, 1.0).unwrap();
    assert!(state_error(&got, &want) < 1e-12);
}

#[test]
fn kick_shifts_pointer_by_coupling_times_position() {
    let gy = Grid::new(128, 16.0).unwrap();
    let gq = Grid::new(128, 16.0).unwrap();
    let comp = composite_from(gy, gq, |y| gaussian_amp(y, 1.5, 0.8, 0.0, 1.0), |q| gaussian_amp(q, 0.0, 1.0, 0.0, 1.0));
    let before = pointer_distribution(&comp).unwrap().mean();
    let after = pointer_distribution(&coupling_kick(&comp, 0.8).unwrap()).unwrap().mean();
    assert!((after - before - 0.8 * 1.5).abs() < 1e-10);
}

#[test]
fn compensation_shifts_pointer_by_strength_times_q() {
    let gy = Grid::new(64, 8.0).unwrap();
    let gq = Grid::new(128, 16.0).unwrap();
    let comp = composite_from(gy, gq, |y| gaussian_amp(y, 0.0, 0.6, 0.0, 1.0), |q| gaussian_amp(q, 2.0, 0.8, 0.0, 1.0));
    let after = pointer_distribution(&compensation_kick(&comp, 0.5).unwrap()).unwrap();
    assert!((after.mean() - 1.0).abs() < 1e-10);
}

/// Rect gate in the position form against `exp(-i (K - g0 y q) T0)` per column.
#[test]
fn position_form_matches_dense_exponential() {
    let gy = Grid::new(64, 8.0).unwrap();
    let gq = Grid::new(64, 10.0).unwrap();
    let comp = composite_from(gy, gq, |y| gaussian_amp(y, 0.2, 0.6, 0.5, 1.0), |q| gaussian_amp(q, 0.0, 0.8, 0.0, 1.0));
    let (g0, t0) = (5.0, 0.2);
    let k = momentum_function(&gy, |p| p * p / 2.0);
    let y = position_matrix(&gy);
    let want = apply_blocks(comp.amplitudes(), 64, |iq| {
        let h = &k - &y * c(g0 * gq.y(iq), 0.0);
        propagator(&h, t0, 1.0)
    });
    let got = evolve_coupled(
        &comp,
        &Gate::Rect { g0, t0 },
        StepControl::new(t0 / 1000.0),
        CouplingForm::Position,
        1.0,
    )
    .unwrap();
    let err = state_error(&got, &want);
    assert!(err < 1e-6, "state error {err}");
}

/// Ramp gate in the velocity form against a time-ordered product of dense
/// exponentials of `(P - G(t) q)^2/2m - G(t)^2 q^2/2m`.
#[test]
fn velocity_form_matches_dense_time_ordered_product() {
    let gy = Grid::new(64, 8.0).unwrap();
    let gq = Grid::new(64, 10.0).unwrap();
    let comp = composite_from(gy, gq, |y| gaussian_amp(y, -0.3, 0.6, 0.0, 1.0), |q| gaussian_amp(q, 0.0, 0.8, 0.0, 1.0));
    let gate = Gate::RampPlateauRamp { g0: 10.0, t0: 0.1, t: 0.5 };
    let m = 1.0;
    let p = momentum_function(&gy, |p| p);
    let id = DMatrix::<C>::identity(64, 64);
    // Midpoint steps: four per ramp, one across the plateau.
    let mut steps = Vec::new();
    for (a, b) in gate.segments() {
        let n = if gate.strength(0.5 * (a + b)) == gate.total() { 1 } else { 4 };
        let h = (b - a) / n as f64;
        steps.extend((0..n).map(|i| (a + (i as f64 + 0.5) * h, h)));
    }
    let want = apply_blocks(comp.amplitudes(), 64, |iq| {
        let q = gq.y(iq);
        let mut u = id.clone();
        for &(t, h) in &steps {
            let gt = gate.strength(t);
            let shifted = &p - &id * c(gt * q, 0.0);
            let ham = (&shifted * &shifted) * c(0.5 / m, 0.0) - &id * c(gt * gt * q * q / (2.0 * m), 0.0);
            u = propagator(&ham, h, 1.0) * u;
        }
        u
    });
    let got = evolve_coupled(&comp, &gate, StepControl::new(0.1 / 32.0), CouplingForm::Velocity, m).unwrap();
    let err = state_error(&got, &want);
    assert!(err < 1e-6, "state error {err}");
}

/// The per-column decomposition against the full 256-dimensional Hamiltonian
/// `K x 1 - g0 Y x Q`.
#[test]
fn block_decomposition_matches_full_dense_hamiltonian() {
    let gy = Grid::new(16, 8.0).unwrap();
    let gq = Grid::new(16, 8.0).unwrap();
    let psi: Vec<C> = gy.positions().iter().map(|&y| gaussian_amp(y, 0.5, 2.0, 0.3, 1.0)).collect();
    let chi: Vec<C> = gq.positions().iter().map(|&q| gaussian_amp(q, -0.5, 2.0, 0.0, 1.0)).collect();
    let comp = Composite::product(
        &Wave::from_amplitudes(gy, psi).unwrap(),
        &Wave::from_amplitudes(gq, chi).unwrap(),
    );
    let (g0, t0) = (0.5, 0.4);
    let k = momentum_function(&gy, |p| p * p / 2.0);
    let y = position_matrix(&gy);
    let q = position_matrix(&gq);
    let iq = DMatrix::<C>::identity(16, 16);
    let h = iq.kronecker(&k) - q.kronecker(&y) * c(g0, 0.0);
    let u = propagator(&h, t0, 1.0);
    let v = nalgebra::DVector::from_column_slice(comp.amplitudes());
    let want: Vec<C> = (u * v).iter().copied().collect();
    let got = evolve_coupled(
        &comp,
        &Gate::Rect { g0, t0 },
        StepControl::new(t0 / 800.0),
        CouplingForm::Position,
        1.0,
    )
    .unwrap();
    assert!(state_error(&got, &want) < 1e-6);
}

/// `<d pi> = G [y0 + p0 T0 / 2m + G q0 T0 / 6m]` for a rect gate, with the
/// last term scaling as `T0^3` at fixed `g0`.
#[test]
fn finite_duration_pointer_formula() {
    let gy = Grid::new(128, 12.0).unwrap();
    let gq = Grid::new(128, 4.0).unwrap();
    let (y0, p0, q0, m, g0) = (1.0, 0.5, 2.0, 1.0, 5.0);
    let particle = gaussian_packet(&gy, y0, 1.0, p0).unwrap();
    let pointer = gaussian_packet(&gq, q0, 0.25, 0.0).unwrap();
    let comp = Composite::product(&particle, &pointer);
    let pi0 = pointer_distribution(&comp).unwrap().mean();
    let mut residuals = Vec::new();
    for t0 in [0.1, 0.2, 0.4] {
        let big_g = g0 * t0;
        let out = evolve_coupled(
            &comp,
            &Gate::Rect { g0, t0 },
            StepControl::new(t0 / 2048.0),
            CouplingForm::Position,
            m,
        )
        .unwrap();
        let shift = pointer_distribution(&out).unwrap().mean() - pi0;
        let want = big_g * (y0 + p0 * t0 / (2.0 * m) + big_g * q0 * t0 / (6.0 * m));
        assert!(((shift - want) / want).abs() < 1e-3, "T0 = {t0}: {shift} vs {want}");
        let r = shift - big_g * (y0 + p0 * t0 / (2.0 * m));
        let want_r = g0 * g0 * q0 * t0.powi(3) / (6.0 * m);
        assert!(((r - want_r) / want_r).abs() < 1e-3, "residual {r} vs {want_r}");
        residuals.push((t0, r));
    }
    let slope = (residuals[2].1 / residuals[0].1).ln() / (residuals[2].0 / residuals[0].0).ln();
    assert!((slope - 3.0).abs() < 0.01, "slope {slope}");
}

#[test]
fn continuous_protocol_equals_two_position_protocol() {
    let gy = Grid::new(256, 24.0).unwrap();
    let gq = Grid::new(128, 12.0).unwrap();
    let particle = gaussian_packet(&gy, 0.0, 1.0, 1.0).unwrap();
    let prep = PointerPrep::new(gq, 1.0).unwrap();
    let comp = make_composite(&particle, &prep).unwrap();
    let cfg = MeasurementConfig {
        kick_duration: 0.05,
        step: Some(0.05 / 1024.0),
        ..MeasurementConfig::impulsive(1.0, 1.0, prep)
    };
    let two = measure_velocity_two_position(&comp, &cfg, 1.0).unwrap();
    let cont = measure_velocity_continuous(&comp, &cfg, 0.05 / 64.0, 1.0).unwrap();
    let defect = two.fidelity_defect(&cont);
    assert!(defect < 1e-8, "fidelity defect {defect}");
    let shift = pointer_distribution(&cont).unwrap().mean();
    assert!((shift - 1.0).abs() < 1e-6);
}

#[test]
fn zero_gate_is_identity() {
    let gy = Grid::new(64, 8.0).unwrap();
    let gq = Grid::new(64, 10.0).unwrap();
    let comp = composite_from(gy, gq, |y| gaussian_amp(y, 0.0, 0.6, 0.0, 1.0), |q| gaussian_amp(q, 0.0, 0.8, 0.0, 1.0));
    let gate = Gate::RampPlateauRamp { g0: 0.0, t0: 0.1, t: 0.5 };
    let out = evolve_coupled(&comp, &gate, StepControl::new(0.001), CouplingForm::Velocity, 1.0).unwrap();
    // Only free evolution remains.
    let free = drift_composite(&comp, 0.6, 1.0).unwrap();
    assert!(out.distance(&free) < 1e-12);
}

#[test]
fn coarse_step_is_rejected() {
    let gy = Grid::new(64, 8.0).unwrap();
    let gq = Grid::new(64, 10.0).unwrap();
    let comp = composite_from(gy, gq, |y| gaussian_amp(y, 0.0, 0.6, 0.0, 1.0), |q| gaussian_amp(q, 0.0, 0.8, 0.0, 1.0));
    let r = evolve_coupled(&comp, &Gate::Rect { g0: 1.0, t0: 0.1 }, StepControl::new(0.01), CouplingForm::Position, 1.0);
    assert!(matches!(r, Err(Error::UnresolvedGate { .. })));
}
