//! Single-scale primal-dual solver for integer demands and supplies.
//!
//! The solver keeps an integer flow `σ′` and integer duals `y(·)` that are
//! *1-feasible* against the scaled costs `c̄(a,b) = ⌊2c(a,b)/δ′⌋`:
//!
//! * `y(a) + y(b) ≤ c̄(a,b) + 1` whenever `σ′(a,b) < min(d̄_a, s̄_b)`,
//! * `y(a) + y(b) ≥ c̄(a,b)` whenever `σ′(a,b) > 0`,
//!
//! together with `y(a) ≤ 0` on demand nodes and `y(a) = 0` on free demand
//! nodes. Each phase runs one Hungarian search (a dense Dijkstra over edge
//! slacks followed by a dual adjustment) and one partial DFS over the
//! zero-slack edges, augmenting along every path it finds. The run ends once
//! all supply is routed, after at most `⌊2C/δ′⌋ + 1` phases.

mod dfs;
mod driver;
pub mod invariants;
mod search;
mod state;

pub use dfs::{augment, partial_dfs_phase};
pub use driver::{solve_scaled, ScaledSolution};
pub use search::{hungarian_search, slack_distances, Distances};
pub use state::{AugmentingPath, Direction, SolverState};

use crate::error::{Error, Result};
use crate::scaling::INTEGER_GUARD;

/// `c̄ = ⌊2c/δ′⌋`.
pub fn scaled_cost(cost: f64, delta_prime: f64) -> Result<i64> {
    if !(cost >= 0.0) {
        return Err(Error::InvalidParameter(format!("cost must be non-negative, got {cost}")));
    }
    if !(delta_prime > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "delta' must be positive, got {delta_prime}"
        )));
    }
    let scaled = (2.0 * cost / delta_prime).floor();
    if !(scaled <= INTEGER_GUARD as f64) {
        return Err(Error::OverflowRisk(format!(
            "scaled cost of {cost} at delta' {delta_prime} exceeds 2^62"
        )));
    }
    Ok(scaled as i64)
}
