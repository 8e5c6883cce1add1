//! Numerical model of measuring the velocity distribution of a charged
//! particle whose two wave packets straddle a flux line.
//!
//! A one-dimensional particle on a periodic grid is coupled to a
//! one-dimensional pointer. Two impulsive position measurements separated by
//! a drift, followed by a compensating pointer kick, displace the pointer by
//! `G T v`, so the pointer distribution reproduces the particle's velocity
//! distribution, including its flux-dependent fringe shift.

pub mod analysis;
pub mod dist;
pub mod error;
pub mod evolve;
pub mod feasibility;
pub mod grid;
pub mod measure;
pub mod scenario;
mod spectral;
pub mod wave;

pub use analysis::{compare_distributions, fit_fringe, fit_fringe_wavenumber, histogram, Comparison, FringeFit};
pub use dist::{Dist, DistKind};
pub use error::{Error, ErrorCategory, Result};
pub use evolve::{
    coupling_kick, compensation_kick, drift_composite, evolve_coupled, free_step, make_composite, Composite,
    CouplingForm, Gate, PointerPrep, StepControl,
};
pub use feasibility::{feasibility_report, FeasibilityInputs, FeasibilityReport};
pub use grid::Grid;
pub use measure::{
    conditional_particle_state, measure_position_impulsive, measure_velocity_continuous,
    measure_velocity_two_position, particle_velocity_marginal, pointer_distribution, sample_pointer, Compensation,
    MeasurementConfig, SampleSet,
};
pub use wave::{ab_superposition, ab_superposition_with, gaussian_packet, PhysicalParams, SeparationPolicy, Wave};
