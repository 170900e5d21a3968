use std::time::Instant;

use crate::config::SolveConfig;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scaling::{IntegerPlan, ScaledInstance, INTEGER_GUARD};
use crate::stats::RunStats;

use super::dfs::run_partial_dfs;
use super::invariants;
use super::search::hungarian_search;
use super::state::SolverState;

/// Result of [`solve_scaled`]: a 1-optimal integer plan satisfying condition (C).
#[derive(Debug, Clone)]
pub struct ScaledSolution {
    pub plan: IntegerPlan,
    pub demand_duals: Vec<i64>,
    pub supply_duals: Vec<i64>,
    pub scaled_costs: Matrix<i64>,
    pub stats: RunStats,
}

impl ScaledSolution {
    /// `w̄(σ′)` against the scaled costs.
    pub fn scaled_objective(&self) -> i128 {
        self.plan.int_cost(&self.scaled_costs)
    }
}

/// Runs phases of Hungarian search and partial DFS until every unit of
/// integer supply is routed.
///
/// With `cfg.debug_assertions` set, every phase is followed by full scans of
/// the invariants in [`invariants`], and every phase start checks that the
/// previous phase left no admissible augmenting path.
pub fn solve_scaled(
    scaled: &ScaledInstance,
    costs: &Matrix<f64>,
    cfg: &SolveConfig,
) -> Result<ScaledSolution> {
    let started = Instant::now();
    let mut state = SolverState::new(scaled, costs)?.with_fault(cfg.fault);
    let phase_bound = state.max_scaled_cost() as u64 + 1;
    let total = state.unrouted_supply();
    if (total as i128) * (phase_bound as i128) > INTEGER_GUARD as i128 {
        return Err(Error::OverflowRisk(format!(
            "total integer supply {total} times phase bound {phase_bound} exceeds 2^62"
        )));
    }

    let mut stats = RunStats {
        phase_bound,
        path_bound: total as u64 * phase_bound,
        total_supply: total as u64,
        ..RunStats::default()
    };
    let debug = cfg.debug_assertions;
    let mut before_duals = Vec::new();

    while state.unrouted_supply() > 0 {
        if stats.phases >= phase_bound {
            return Err(Error::PhaseBoundExceeded { bound: phase_bound });
        }
        stats.phases += 1;

        if debug {
            if let Some(p) = invariants::find_admissible_path(&state) {
                return Err(Error::InvariantViolation(format!(
                    "phase {} starts with an admissible augmenting path from supply {}",
                    stats.phases,
                    p.source()
                )));
            }
            before_duals.clear();
            before_duals.extend(state.free_supplies().map(|b| (b, state.supply_duals()[b])));
        }

        let t = Instant::now();
        let dist = hungarian_search(&mut state)?;
        stats.timing.search += t.elapsed();

        if debug {
            let ell_t = dist.sink.unwrap_or(0);
            if ell_t < 1 {
                return Err(Error::InvariantViolation(format!(
                    "phase {} has sink distance {ell_t} < 1",
                    stats.phases
                )));
            }
            for &(b, y) in &before_duals {
                if state.supply_duals()[b] < y + 1 {
                    return Err(Error::InvariantViolation(format!(
                        "free supply node {b} gained less than one unit of dual in phase {}",
                        stats.phases
                    )));
                }
            }
            invariants::check_one_feasibility(&state)?;
            if invariants::find_admissible_path(&state).is_none() {
                return Err(Error::InvariantViolation(format!(
                    "Hungarian search in phase {} left no admissible augmenting path",
                    stats.phases
                )));
            }
        }

        let augment_before = state.counters.augment_time;
        let t = Instant::now();
        let outcome = run_partial_dfs(&mut state, false);
        let elapsed = t.elapsed();
        let augment = state.counters.augment_time - augment_before;
        stats.timing.dfs += elapsed.saturating_sub(augment);
        stats.timing.augment += augment;

        if outcome.paths == 0 {
            return Err(Error::NoPathInPhase(stats.phases));
        }
        stats.paths += outcome.paths;
        stats.sum_path_edges += outcome.sum_edges;
        stats.sum_half_ceil += outcome.sum_forward;

        if debug {
            invariants::check_phase_end(&state)?;
        }
    }

    let plan = state.integer_plan();
    let routed: i64 = plan.flow.as_slice().iter().sum();
    if routed != scaled.total_supply {
        return Err(Error::InvariantViolation(format!(
            "routed {routed} units, expected {}",
            scaled.total_supply
        )));
    }
    if stats.sum_half_ceil > stats.path_bound {
        return Err(Error::InvariantViolation(format!(
            "forward-edge total {} exceeds bound {}",
            stats.sum_half_ceil, stats.path_bound
        )));
    }
    if debug {
        invariants::check_flow(&state)?;
        invariants::check_one_feasibility(&state)?;
        invariants::check_condition_c(&state)?;
    }

    stats.dijkstra_edge_visits = state.counters.dijkstra_edge_visits;
    stats.dfs_edge_visits = state.counters.dfs_edge_visits;
    stats.augment_edge_updates = state.counters.augment_edge_updates;
    stats.timing.total = started.elapsed();

    Ok(ScaledSolution {
        plan,
        demand_duals: state.duals_a,
        supply_duals: state.duals_b,
        scaled_costs: state.costs,
        stats,
    })
}
