//! Exact and mean-field dynamics of a bosonic mode driven and damped by
//! two-photon processes.
//!
//! Rates are plain numbers; every routine works in whatever unit the caller
//! picks, and the front ends use `gamma = 1`.

pub mod analysis;
pub mod banded;
pub mod error;
pub mod fock;
pub mod io;
pub mod master;
pub mod meanfield;
pub mod ode;
pub mod params;
pub mod state;
pub mod stationary;

pub use analysis::{Backend, PowerLawFit, SusceptibilityMap, SweepGrid, SweepOptions};
pub use error::{Error, ErrorKind, Result};
pub use fock::{
    a_squared, annihilation, build_heff, lindblad_rhs, number_op, parity_projector,
    LindbladGenerator, Parity, ParityBlock, TruncatedOperator,
};
pub use master::{
    auto_cutoff, evolve, steady_state_auto, steady_state_direct, steady_state_evolve, EvolveConfig,
    MethodChoice, SteadyConfig, SteadyMethod, SteadyOptions, SteadyReport, Trajectory,
};
pub use meanfield::{
    evolve_green, evolve_psi, mf_rhs, n_from_psi, steady_psi, GreenPair, MeanFieldConfig,
    MeanFieldTrajectory,
};
pub use params::{derive_effective, EffectiveParams, GaugeRotation, PhysicalParams};
pub use state::{check_truncation, observables, DensityMatrix, Observables, TruncationReport};
pub use stationary::{
    biquadratic_coeffs, critical_boundary, curvature_delta0, psi_exact_delta0, psi_qf,
    psi_semiclassical, CriticalBoundary, LandauCoefficients, StationarySolution,
};
