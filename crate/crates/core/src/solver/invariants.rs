//! Full-scan checks of the solver invariants.
//!
//! These are written independently of the search and DFS code so they can
//! serve as oracles for it. Each costs O(|A|·|B|).

use std::collections::VecDeque;

use crate::error::{Error, Result};

use super::state::{AugmentingPath, Direction, SolverState};

fn violation(msg: String) -> Error {
    Error::InvariantViolation(msg)
}

/// Flow within edge capacities, marginals consistent with the residual arrays.
pub fn check_flow(state: &SolverState) -> Result<()> {
    let (na, nb) = (state.num_demand(), state.num_supply());
    let mut rows = vec![0i64; na];
    let mut cols = vec![0i64; nb];
    for a in 0..na {
        for b in 0..nb {
            let f = state.flow[(a, b)];
            if f < 0 || f > state.capacity(a, b) {
                return Err(violation(format!(
                    "flow {f} on ({a},{b}) outside [0, {}]",
                    state.capacity(a, b)
                )));
            }
            rows[a] += f;
            cols[b] += f;
        }
    }
    for a in 0..na {
        if rows[a] > state.demands[a] || state.demands[a] - rows[a] != state.resid_demand[a] {
            return Err(violation(format!("demand node {a} marginal bookkeeping is off")));
        }
    }
    for b in 0..nb {
        if cols[b] > state.supplies[b] || state.supplies[b] - cols[b] != state.resid_supply[b] {
            return Err(violation(format!("supply node {b} marginal bookkeeping is off")));
        }
    }
    if state.resid_supply.iter().sum::<i64>() != state.free_supply {
        return Err(violation("unrouted supply total is off".into()));
    }
    Ok(())
}

/// `y(a) + y(b) ≤ c̄ + 1` on unsaturated edges and `y(a) + y(b) ≥ c̄` on
/// edges carrying flow.
pub fn check_one_feasibility(state: &SolverState) -> Result<()> {
    for a in 0..state.num_demand() {
        for b in 0..state.num_supply() {
            let f = state.flow[(a, b)];
            let y = state.duals_a[a] + state.duals_b[b];
            let c = state.costs[(a, b)];
            if f < state.capacity(a, b) && y > c + 1 {
                return Err(violation(format!(
                    "unsaturated edge ({a},{b}): y(a)+y(b) = {y} > c̄+1 = {}",
                    c + 1
                )));
            }
            if f > 0 && y < c {
                return Err(violation(format!(
                    "carrying edge ({a},{b}): y(a)+y(b) = {y} < c̄ = {c}"
                )));
            }
        }
    }
    Ok(())
}

/// Demand duals are non-positive, and zero on free demand nodes.
pub fn check_condition_c(state: &SolverState) -> Result<()> {
    for a in 0..state.num_demand() {
        let y = state.duals_a[a];
        if y > 0 {
            return Err(violation(format!("demand node {a} has positive dual {y}")));
        }
        if state.resid_demand[a] > 0 && y != 0 {
            return Err(violation(format!("free demand node {a} has dual {y} != 0")));
        }
    }
    Ok(())
}

/// Free supply duals never exceed `⌊2C/δ′⌋ + 1`.
pub fn check_free_supply_duals(state: &SolverState) -> Result<()> {
    let bound = state.max_scaled_cost + 1;
    for b in state.free_supplies() {
        if state.duals_b[b] > bound {
            return Err(violation(format!(
                "free supply node {b} has dual {} > {bound}",
                state.duals_b[b]
            )));
        }
    }
    Ok(())
}

/// Breadth-first search over every zero-slack residual edge, from all free
/// supply nodes, for a free demand node.
pub fn find_admissible_path(state: &SolverState) -> Option<AugmentingPath> {
    let (na, nb) = (state.num_demand(), state.num_supply());
    // Parent of a demand node is the supply node it was reached from, and
    // vice versa. Roots have no parent.
    let mut parent_a: Vec<Option<usize>> = vec![None; na];
    let mut parent_b: Vec<Option<usize>> = vec![None; nb];
    let mut seen_a = vec![false; na];
    let mut seen_b = vec![false; nb];
    let mut queue = VecDeque::new();
    for b in 0..nb {
        if state.resid_supply[b] > 0 {
            seen_b[b] = true;
            queue.push_back(b);
        }
    }
    while let Some(b) = queue.pop_front() {
        for a in 0..na {
            if seen_a[a] {
                continue;
            }
            let forward_ok = state.flow[(a, b)] < state.capacity(a, b)
                && state.costs[(a, b)] + 1 - state.duals_a[a] - state.duals_b[b] == 0;
            if !forward_ok {
                continue;
            }
            seen_a[a] = true;
            parent_a[a] = Some(b);
            if state.resid_demand[a] > 0 {
                return Some(trace(a, &parent_a, &parent_b));
            }
            for b2 in 0..nb {
                if seen_b[b2] {
                    continue;
                }
                let backward_ok = state.flow[(a, b2)] > 0
                    && state.duals_a[a] + state.duals_b[b2] - state.costs[(a, b2)] == 0;
                if backward_ok {
                    seen_b[b2] = true;
                    parent_b[b2] = Some(a);
                    queue.push_back(b2);
                }
            }
        }
    }
    None
}

fn trace(sink: usize, parent_a: &[Option<usize>], parent_b: &[Option<usize>]) -> AugmentingPath {
    let mut supplies = Vec::new();
    let mut demands = Vec::new();
    let mut a = sink;
    loop {
        demands.push(a);
        let b = parent_a[a].expect("reached demand node has a parent");
        supplies.push(b);
        match parent_b[b] {
            Some(prev) => a = prev,
            None => break,
        }
    }
    supplies.reverse();
    demands.reverse();
    AugmentingPath {
        supplies,
        demands,
        bottleneck: 0,
    }
}

/// Verifies every edge of `path` is a zero-slack residual edge.
pub fn check_path_admissible(state: &SolverState, path: &AugmentingPath) -> Result<()> {
    for (a, b, dir) in path.edges() {
        if !state.has_edge(a, b, dir) || state.raw_slack(a, b, dir) != 0 {
            return Err(violation(format!(
                "{} edge ({a},{b}) of path is not admissible",
                match dir {
                    Direction::Forward => "forward",
                    Direction::Backward => "backward",
                }
            )));
        }
    }
    Ok(())
}

/// Post-phase suite: flow validity, 1-feasibility, condition (C), the free
/// supply dual bound, and the absence of admissible augmenting paths.
pub fn check_phase_end(state: &SolverState) -> Result<()> {
    check_flow(state)?;
    check_one_feasibility(state)?;
    check_condition_c(state)?;
    check_free_supply_duals(state)?;
    if let Some(p) = find_admissible_path(state) {
        return Err(violation(format!(
            "admissible augmenting path survives the phase: supplies {:?}, demands {:?}",
            p.supplies, p.demands
        )));
    }
    Ok(())
}
