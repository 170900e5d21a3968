use std::time::Instant;

use serde::Serialize;

use crate::config::SolveConfig;
use crate::error::Result;
use crate::instance::{plan_cost, TransportInstance, TransportPlan};
use crate::scaling::{greedy_saturated_plan, recover_plan, scale_instance};
use crate::solver::solve_scaled;
use crate::stats::RunStats;

/// A δ-close maximum plan for a real-valued instance.
#[derive(Debug, Clone)]
pub struct Solution {
    pub plan: TransportPlan,
    pub cost: f64,
    pub stats: RunStats,
    pub scaling: Option<ScalingSummary>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScalingSummary {
    pub alpha: f64,
    pub delta_prime: f64,
    pub total_int_supply: i64,
    pub pushed_back: f64,
    pub leftover: f64,
}

/// Computes a maximum plan whose cost is within `U·δ` of optimal.
///
/// Instances with zero total supply or an all-zero cost matrix skip scaling
/// and get a greedily saturated plan, which is optimal for them.
pub fn solve(inst: &TransportInstance, cfg: &SolveConfig) -> Result<Solution> {
    cfg.validate()?;
    let started = Instant::now();
    if inst.total_supply() <= 0.0 || inst.max_cost() <= 0.0 {
        let plan = greedy_saturated_plan(inst);
        let cost = plan_cost(inst, &plan)?;
        let mut stats = RunStats {
            phase_bound: 1,
            ..RunStats::default()
        };
        stats.timing.total = started.elapsed();
        return Ok(Solution {
            plan,
            cost,
            stats,
            scaling: None,
        });
    }

    let scaled = scale_instance(inst, cfg)?;
    let scale_time = started.elapsed();
    let sol = solve_scaled(&scaled, inst.costs(), cfg)?;

    let t = Instant::now();
    let recovery = recover_plan(inst, &scaled, &sol.plan)?;
    let recover_time = t.elapsed();

    let cost = plan_cost(inst, &recovery.plan)?;
    let mut stats = sol.stats;
    stats.timing.scale = scale_time;
    stats.timing.recover = recover_time;
    stats.timing.total = started.elapsed();
    Ok(Solution {
        plan: recovery.plan,
        cost,
        stats,
        scaling: Some(ScalingSummary {
            alpha: scaled.alpha,
            delta_prime: scaled.delta_prime,
            total_int_supply: scaled.total_supply,
            pushed_back: recovery.pushed_back,
            leftover: recovery.leftover,
        }),
    })
}
