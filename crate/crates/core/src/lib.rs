//! # ot-gt
//!
//! Additive-error optimal transport for arbitrary non-negative cost matrices.
//!
//! Given demands `d_a`, supplies `s_b` (with `Σs ≤ Σd`) and costs `c(a,b)`,
//! [`solve`] returns a maximum transport plan whose cost is at most `U·δ`
//! above the optimum, where `U = Σs`. The work happens in three stages:
//!
//! 1. [`scaling`] turns masses into integers with `α = 2nC/(εUδ)`.
//! 2. [`solver`] runs at most `⌊2C/δ′⌋ + 1` primal-dual phases on the
//!    integer instance, `δ′ = (1 − ε)δ`, each a Hungarian search followed by
//!    a partial DFS.
//! 3. [`scaling::recover_plan`] maps the integer plan back to the real
//!    instance and repairs rounding excess.
//!
//! [`oracle`] holds exact solvers used as ground truth, [`sinkhorn`] an
//! entropic baseline, and [`harness`] the experiment and property-check
//! drivers.
//!
//! ```
//! use ot_gt::{solve, SolveConfig, TransportInstance};
//!
//! let inst = TransportInstance::from_rows(
//!     vec![0.5, 0.5],
//!     vec![0.5, 0.5],
//!     vec![vec![0.0, 1.0], vec![1.0, 0.0]],
//! )?;
//! let sol = solve(&inst, &SolveConfig::new(0.1)?)?;
//! assert!(sol.cost <= 0.0 + 0.1);
//! # Ok::<(), ot_gt::Error>(())
//! ```

// Negated float comparisons deliberately treat NaN as a failure, and dense
// matrix loops read better with explicit indices.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod config;
pub mod error;
pub mod harness;
pub mod instance;
pub mod matrix;
pub mod oracle;
mod pipeline;
pub mod scaling;
pub mod sinkhorn;
pub mod solver;
pub mod stats;

pub use config::SolveConfig;
pub use error::{Error, Result};
pub use instance::{
    classify_plan, plan_cost, validate_instance, PlanClass, Provenance, TransportInstance,
    TransportPlan,
};
pub use matrix::Matrix;
pub use pipeline::{solve, ScalingSummary, Solution};
pub use stats::RunStats;
