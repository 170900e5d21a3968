use crate::config::Fault;
use crate::error::{Error, Result};

use super::state::{Direction, SolverState};

const INF: i64 = i64::MAX;

/// Slack-weighted shortest distances from the virtual source.
///
/// `None` marks a vertex whose distance was not settled: unreachable, or (for
/// the early-stopping search) known to be at least `sink`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Distances {
    pub demand: Vec<Option<i64>>,
    pub supply: Vec<Option<i64>>,
    /// `ℓ_t`, the distance to the nearest free demand node.
    pub sink: Option<i64>,
}

#[derive(Clone, Copy)]
enum Vertex {
    Demand(usize),
    Supply(usize),
}

/// Dense O(n²) Dijkstra over the augmented residual network. Free supply
/// nodes start at distance 0; free demand nodes reach the sink at no cost.
/// Ties go to the lowest index, demand nodes before supply nodes.
fn dijkstra(state: &mut SolverState, stop_at_sink: bool) -> Result<Distances> {
    let (na, nb) = (state.num_demand(), state.num_supply());
    let mut dist_a = vec![INF; na];
    let mut dist_b = vec![INF; nb];
    let mut done_a = vec![false; na];
    let mut done_b = vec![false; nb];
    for b in state.free_supplies().collect::<Vec<_>>() {
        dist_b[b] = 0;
    }
    let mut sink = INF;
    let mut visits = 0u64;

    loop {
        let mut best: Option<(i64, Vertex)> = None;
        for a in 0..na {
            if !done_a[a] && dist_a[a] < best.map_or(INF, |(d, _)| d) {
                best = Some((dist_a[a], Vertex::Demand(a)));
            }
        }
        for b in 0..nb {
            if !done_b[b] && dist_b[b] < best.map_or(INF, |(d, _)| d) {
                best = Some((dist_b[b], Vertex::Supply(b)));
            }
        }
        let Some((d, v)) = best else { break };
        if stop_at_sink && d >= sink {
            break;
        }

        match v {
            Vertex::Demand(a) => {
                if state.is_free_demand(a) {
                    sink = sink.min(d);
                    if stop_at_sink {
                        break;
                    }
                }
                done_a[a] = true;
                let ya = state.duals_a[a];
                let flow = state.flow.row(a);
                let costs = state.costs.row(a);
                for b in 0..nb {
                    if done_b[b] || flow[b] == 0 {
                        continue;
                    }
                    visits += 1;
                    let w = ya + state.duals_b[b] - costs[b];
                    if w < 0 {
                        return Err(negative_slack(a, b, Direction::Backward, w));
                    }
                    if d + w < dist_b[b] {
                        dist_b[b] = d + w;
                    }
                }
            }
            Vertex::Supply(b) => {
                done_b[b] = true;
                let yb = state.duals_b[b];
                let sb = state.supplies[b];
                for a in 0..na {
                    if done_a[a] {
                        continue;
                    }
                    let cap = state.demands[a].min(sb);
                    if state.flow[(a, b)] >= cap {
                        continue;
                    }
                    visits += 1;
                    let w = state.costs[(a, b)] + 1 - state.duals_a[a] - yb;
                    if w < 0 {
                        return Err(negative_slack(a, b, Direction::Forward, w));
                    }
                    if d + w < dist_a[a] {
                        dist_a[a] = d + w;
                    }
                }
            }
        }
    }
    state.counters.dijkstra_edge_visits += visits;

    let settled = |dist: &[i64], done: &[bool]| -> Vec<Option<i64>> {
        dist.iter()
            .zip(done)
            .map(|(&d, &ok)| ok.then_some(d))
            .collect()
    };
    Ok(Distances {
        demand: settled(&dist_a, &done_a),
        supply: settled(&dist_b, &done_b),
        sink: (sink < INF).then_some(sink),
    })
}

fn negative_slack(a: usize, b: usize, dir: Direction, w: i64) -> Error {
    Error::InvariantViolation(format!(
        "1-feasibility broken: {} edge ({a},{b}) has slack {w}",
        dir.name()
    ))
}

/// Full shortest slack distances from the virtual source, without touching
/// the duals. `sink` is the minimum over free demand nodes.
pub fn slack_distances(state: &mut SolverState) -> Result<Distances> {
    dijkstra(state, false)
}

/// One Hungarian search: shortest slack distances `ℓ`, then for every vertex
/// with `ℓ_v < ℓ_t` lower `y(a)` by `ℓ_t − ℓ_v` (demand side) or raise `y(b)`
/// by `ℓ_t − ℓ_v` (supply side). Vertices at or beyond `ℓ_t` keep their duals.
///
/// Afterwards the admissible graph holds at least one augmenting path.
pub fn hungarian_search(state: &mut SolverState) -> Result<Distances> {
    if state.unrouted_supply() == 0 {
        return Err(Error::InvalidParameter(
            "Hungarian search needs a free supply node".into(),
        ));
    }
    let dist = dijkstra(state, true)?;
    let ell_t = dist.sink.ok_or(Error::SinkUnreachable)?;
    let bump = match state.fault {
        Some(Fault::DualUpdateOffByOne) => 1,
        None => 0,
    };
    for (a, d) in dist.demand.iter().enumerate() {
        if let Some(d) = *d {
            if d < ell_t {
                state.duals_a[a] -= ell_t - d;
            }
        }
    }
    for (b, d) in dist.supply.iter().enumerate() {
        if let Some(d) = *d {
            if d < ell_t {
                state.duals_b[b] += ell_t - d + bump;
            }
        }
    }
    Ok(dist)
}
