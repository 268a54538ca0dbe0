//! Random-rotation experiments for the kinematic, Crofton, projection and
//! Steiner identities.

pub mod combine;
pub mod decompose;
pub mod formula;
pub mod report;
pub mod runners;
pub mod trials;

pub use formula::{dim_formula, Formula};
pub use report::{Report, RunInfo, Side, Z_MAX};
pub use runners::{
    anchor, counterexample_probe, crofton_probability, probe_formula, run_boundary, run_ell_kinematic, run_formula,
    run_general, run_general_theta, run_kinematic_theta, run_kinematic_u, run_kinematic_v, run_polar_theta,
    run_polar_v, run_projection_formula, run_steiner, Measure, Options, ProjectionSet,
};
pub use trials::{run_trials, Experiment, Trial, TrialSet};
