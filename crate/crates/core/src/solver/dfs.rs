use std::time::Instant;

use crate::error::{Error, Result};

use super::state::{AugmentingPath, Direction, SolverState};

/// Per-phase view of the admissible graph.
///
/// Edge deletion is tracked with one scan pointer per vertex: every edge a
/// vertex's pointer has moved past is gone for the rest of the phase. An
/// edge that leads onto an augmenting path keeps the pointer parked on it,
/// and is re-tested against the current flow when next scanned. Vertices the
/// DFS backtracks from are deleted outright.
struct PhaseGraph {
    alive_a: Vec<bool>,
    alive_b: Vec<bool>,
    on_path_a: Vec<bool>,
    on_path_b: Vec<bool>,
    /// Next demand node to scan from each supply node.
    next_a: Vec<usize>,
    /// Next supply node to scan from each demand node.
    next_b: Vec<usize>,
}

impl PhaseGraph {
    fn new(na: usize, nb: usize) -> Self {
        PhaseGraph {
            alive_a: vec![true; na],
            alive_b: vec![true; nb],
            on_path_a: vec![false; na],
            on_path_b: vec![false; nb],
            next_a: vec![0; nb],
            next_b: vec![0; na],
        }
    }
}

#[derive(Debug, Default)]
pub(crate) struct PhaseOutcome {
    pub paths: u64,
    pub sum_edges: u64,
    pub sum_forward: u64,
    pub recorded: Vec<AugmentingPath>,
}

enum Search {
    Found,
    Exhausted,
}

/// DFS from supply node `root` over surviving admissible edges. On success
/// `path` holds the alternating path to a free demand node.
fn dfs_from(
    state: &SolverState,
    g: &mut PhaseGraph,
    root: usize,
    path: &mut AugmentingPath,
    visits: &mut u64,
) -> Search {
    let (na, nb) = (state.num_demand(), state.num_supply());
    path.supplies.clear();
    path.demands.clear();
    path.supplies.push(root);
    g.on_path_b[root] = true;

    loop {
        if path.supplies.len() > path.demands.len() {
            let b = *path.supplies.last().unwrap();
            let mut next = None;
            while g.next_a[b] < na {
                let a = g.next_a[b];
                *visits += 1;
                if g.alive_a[a] && !g.on_path_a[a] && state.is_admissible(a, b, Direction::Forward) {
                    next = Some(a);
                    break;
                }
                g.next_a[b] += 1;
            }
            match next {
                Some(a) => {
                    path.demands.push(a);
                    g.on_path_a[a] = true;
                    if state.is_free_demand(a) {
                        return Search::Found;
                    }
                }
                None => {
                    g.alive_b[b] = false;
                    g.on_path_b[b] = false;
                    path.supplies.pop();
                    match path.demands.last() {
                        Some(&a) => g.next_b[a] += 1,
                        None => return Search::Exhausted,
                    }
                }
            }
        } else {
            let a = *path.demands.last().unwrap();
            let mut next = None;
            while g.next_b[a] < nb {
                let b = g.next_b[a];
                *visits += 1;
                if g.alive_b[b] && !g.on_path_b[b] && state.is_admissible(a, b, Direction::Backward) {
                    next = Some(b);
                    break;
                }
                g.next_b[a] += 1;
            }
            match next {
                Some(b) => {
                    path.supplies.push(b);
                    g.on_path_b[b] = true;
                }
                None => {
                    g.alive_a[a] = false;
                    g.on_path_a[a] = false;
                    path.demands.pop();
                    let b = *path.supplies.last().unwrap();
                    g.next_a[b] += 1;
                }
            }
        }
    }
}

/// Pushes the bottleneck amount along an admissible path found by the DFS.
fn apply_path(state: &mut SolverState, path: &mut AugmentingPath) -> i64 {
    let b0 = path.source();
    let ak = path.sink();
    let mut r = state.resid_supply[b0].min(state.resid_demand[ak]);
    for (a, b, dir) in path.edges() {
        r = r.min(state.residual_capacity(a, b, dir));
    }
    debug_assert!(r > 0);
    for (a, b, dir) in path.edges() {
        match dir {
            Direction::Forward => state.flow[(a, b)] += r,
            Direction::Backward => state.flow[(a, b)] -= r,
        }
    }
    state.resid_supply[b0] -= r;
    state.resid_demand[ak] -= r;
    state.free_supply -= r;
    state.counters.augment_edge_updates += path.len() as u64;
    path.bottleneck = r;
    r
}

/// Augments along `path` by its bottleneck capacity `r_P`: the smallest of
/// the remaining supply at its source, the remaining demand at its sink, and
/// every edge's residual capacity. Returns `r_P`.
///
/// Every edge must be an admissible residual edge and the endpoints free.
pub fn augment(state: &mut SolverState, path: &mut AugmentingPath) -> Result<i64> {
    let (na, nb) = (state.num_demand(), state.num_supply());
    if path.demands.is_empty() || path.supplies.len() != path.demands.len() {
        return Err(Error::CapacityViolation(
            "augmenting path must alternate and end on a forward edge".into(),
        ));
    }
    let mut seen_a = vec![false; na];
    let mut seen_b = vec![false; nb];
    for &a in &path.demands {
        if a >= na || std::mem::replace(&mut seen_a[a], true) {
            return Err(Error::CapacityViolation(format!("demand node {a} invalid or repeated")));
        }
    }
    for &b in &path.supplies {
        if b >= nb || std::mem::replace(&mut seen_b[b], true) {
            return Err(Error::CapacityViolation(format!("supply node {b} invalid or repeated")));
        }
    }
    if !state.is_free_supply(path.source()) {
        return Err(Error::CapacityViolation(format!(
            "path source {} is not a free supply node",
            path.source()
        )));
    }
    if !state.is_free_demand(path.sink()) {
        return Err(Error::CapacityViolation(format!(
            "path sink {} is not a free demand node",
            path.sink()
        )));
    }
    for (a, b, dir) in path.edges() {
        let slack = state.slack(a, b, dir)?;
        if slack != 0 {
            return Err(Error::CapacityViolation(format!(
                "{} edge ({a},{b}) has slack {slack}, not admissible",
                dir.name()
            )));
        }
    }
    Ok(apply_path(state, path))
}

pub(crate) fn run_partial_dfs(state: &mut SolverState, record: bool) -> PhaseOutcome {
    let (na, nb) = (state.num_demand(), state.num_supply());
    let mut g = PhaseGraph::new(na, nb);
    let mut out = PhaseOutcome::default();
    let mut path = AugmentingPath::default();
    let mut visits = 0u64;

    // A supply node that stops being free never becomes free again, so one
    // pass over the sources in index order drains X.
    for root in 0..nb {
        while g.alive_b[root] && state.is_free_supply(root) {
            match dfs_from(state, &mut g, root, &mut path, &mut visits) {
                Search::Found => {
                    for &a in &path.demands {
                        g.on_path_a[a] = false;
                    }
                    for &b in &path.supplies {
                        g.on_path_b[b] = false;
                    }
                    let started = Instant::now();
                    apply_path(state, &mut path);
                    state.counters.augment_time += started.elapsed();
                    out.paths += 1;
                    out.sum_edges += path.len() as u64;
                    out.sum_forward += path.forward_edges() as u64;
                    if record {
                        out.recorded.push(path.clone());
                    }
                }
                Search::Exhausted => {}
            }
        }
    }
    state.counters.dfs_edge_visits += visits;
    out
}

/// Second step of a phase: DFS from every free supply node through the
/// admissible graph, augmenting along each path found, until no free supply
/// node survives. Returns the applied paths in discovery order.
pub fn partial_dfs_phase(state: &mut SolverState) -> Result<Vec<AugmentingPath>> {
    let out = run_partial_dfs(state, true);
    if out.paths == 0 {
        return Err(Error::NoPathInPhase(0));
    }
    Ok(out.recorded)
}
