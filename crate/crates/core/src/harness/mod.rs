//! Instance sources and experiment drivers.
//!
//! Instances come from JSON files, pairs of grayscale images, or a seeded
//! synthetic generator. [`run_experiment`] sweeps solvers over δ values and
//! produces CSV rows; [`run_check`] is the randomized property check behind
//! the `check` command.

mod check;
mod experiment;
mod image;
mod synthetic;

pub use check::{check_instance, run_check, verify_run, CheckConfig, CheckFailure, CheckReport};
pub use experiment::{
    run_experiment, write_csv, ExperimentRow, ExperimentSpec, InstanceSource, SolverKind,
    CSV_HEADER, ORACLE_MAX_N, THREADS_ENV,
};
pub use image::{image_pair_to_instance, synthetic_image, GrayImage};
pub use synthetic::{synthetic_instance, CostProfile, MassProfile, COST_UNITS, MASS_UNITS};
