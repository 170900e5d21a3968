use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{Fault, SolveConfig};
use crate::instance::{classify_plan, PlanClass, TransportInstance};
use crate::oracle::exact_transport;
use crate::pipeline::{solve, Solution};

use super::experiment::worker_pool;
use super::synthetic::{synthetic_instance, CostProfile, MassProfile};

#[derive(Debug, Clone)]
pub struct CheckConfig {
    /// Largest number of nodes on either side.
    pub size_cap: usize,
    /// Number of random instances.
    pub seeds: u64,
    /// Instance `k` is generated from `seed + k`.
    pub seed: u64,
    pub deltas: Vec<f64>,
    pub epsilon: f64,
    #[doc(hidden)]
    pub fault: Option<Fault>,
}

impl Default for CheckConfig {
    fn default() -> Self {
        Self {
            size_cap: 12,
            seeds: 200,
            seed: 0,
            deltas: vec![0.5, 0.1, 0.05],
            epsilon: crate::config::DEFAULT_EPSILON,
            fault: None,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub instances: u64,
    pub runs: u64,
    /// Largest `(cost − optimum) / (Uδ)` seen; at most 1 when all runs pass.
    pub worst_gap_ratio: f64,
}

/// The first instance that broke a property, with enough to reproduce it.
#[derive(Debug, Clone, Serialize)]
pub struct CheckFailure {
    pub seed: u64,
    pub delta: f64,
    pub epsilon: f64,
    pub message: String,
    pub instance: crate::instance::InstanceFile,
}

impl fmt::Display for CheckFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "instance seed {} at delta {}: {}",
            self.seed, self.delta, self.message
        )
    }
}

/// Random instance used by the property check for a given seed.
pub fn check_instance(seed: u64, size_cap: usize) -> TransportInstance {
    let cap = size_cap.max(2);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let n_a = rng.gen_range(2..=cap);
    let n_b = rng.gen_range(2..=cap);
    // Mostly plain random instances, with the degenerate profiles mixed in.
    let mass = if rng.gen_bool(0.7) {
        MassProfile::Random
    } else {
        *MassProfile::ALL.choose(&mut rng).unwrap()
    };
    let cost = if rng.gen_bool(0.7) {
        CostProfile::Random
    } else {
        *CostProfile::ALL.choose(&mut rng).unwrap()
    };
    synthetic_instance(n_a, n_b, rng.gen(), mass, cost)
}

/// Solves with debug assertions on and checks the outcome against `optimum`.
///
/// Checks that the plan is maximum, that its cost is within `Uδ` of the
/// optimum, and that the phase and path-length counters respect their bounds.
pub fn verify_run(
    inst: &TransportInstance,
    cfg: &SolveConfig,
    optimum: f64,
) -> std::result::Result<Solution, String> {
    let cfg = cfg.clone().with_debug_assertions(true);
    let sol = solve(inst, &cfg).map_err(|e| e.to_string())?;
    let class = classify_plan(inst, &sol.plan, inst.feasibility_tolerance());
    if class != PlanClass::Maximum {
        return Err(format!("returned plan is {class:?}, not maximum"));
    }
    let allowed = optimum + inst.total_supply() * cfg.delta + 1e-9;
    if sol.cost > allowed {
        return Err(format!(
            "cost {} exceeds optimum {optimum} + U·delta ({allowed})",
            sol.cost
        ));
    }
    let st = &sol.stats;
    if inst.max_cost() > 0.0 && inst.total_supply() > 0.0 {
        let expected = (2.0 * inst.max_cost() / cfg.delta_prime()).floor() as u64 + 1;
        if st.phase_bound != expected {
            return Err(format!("phase bound {} != {expected}", st.phase_bound));
        }
    }
    if st.phases > st.phase_bound {
        return Err(format!("{} phases exceed bound {}", st.phases, st.phase_bound));
    }
    if st.sum_half_ceil > st.path_bound {
        return Err(format!(
            "forward-edge total {} exceeds bound {}",
            st.sum_half_ceil, st.path_bound
        ));
    }
    Ok(sol)
}

/// Runs [`verify_run`] over `cfg.seeds` random instances and every δ.
///
/// On failure the lowest failing seed is reported.
pub fn run_check(cfg: &CheckConfig) -> std::result::Result<CheckReport, Box<CheckFailure>> {
    let pool = worker_pool().map_err(|e| {
        Box::new(CheckFailure {
            seed: cfg.seed,
            delta: 0.0,
            epsilon: cfg.epsilon,
            message: e.to_string(),
            instance: check_instance(cfg.seed, cfg.size_cap).to_file(),
        })
    })?;
    let results: Vec<_> = pool.install(|| {
        (0..cfg.seeds)
            .into_par_iter()
            .map(|k| check_one(cfg, cfg.seed.wrapping_add(k)))
            .collect()
    });
    let mut report = CheckReport {
        instances: 0,
        runs: 0,
        worst_gap_ratio: 0.0,
    };
    for r in results {
        let (runs, ratio) = r?;
        report.instances += 1;
        report.runs += runs;
        report.worst_gap_ratio = report.worst_gap_ratio.max(ratio);
    }
    Ok(report)
}

fn check_one(cfg: &CheckConfig, seed: u64) -> std::result::Result<(u64, f64), Box<CheckFailure>> {
    let inst = check_instance(seed, cfg.size_cap);
    let fail = |delta: f64, message: String| {
        Box::new(CheckFailure {
            seed,
            delta,
            epsilon: cfg.epsilon,
            message,
            instance: inst.to_file(),
        })
    };
    let (_, optimum) = exact_transport(&inst).map_err(|e| fail(0.0, format!("oracle: {e}")))?;
    let mut worst: f64 = 0.0;
    for &delta in &cfg.deltas {
        let mut sc = SolveConfig::new(delta)
            .and_then(|c| c.with_epsilon(cfg.epsilon))
            .map_err(|e| fail(delta, e.to_string()))?
            .with_seed(seed);
        sc.fault = cfg.fault;
        let sol = verify_run(&inst, &sc, optimum).map_err(|m| fail(delta, m))?;
        let budget = inst.total_supply() * delta;
        if budget > 0.0 {
            worst = worst.max((sol.cost - optimum) / budget);
        }
    }
    Ok((cfg.deltas.len() as u64, worst))
}
