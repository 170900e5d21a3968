use std::time::Duration;

use crate::config::Fault;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scaling::{IntegerPlan, ScaledInstance};

use super::scaled_cost;

/// Orientation of a residual edge between demand `a` and supply `b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// `b → a`, exists while `σ′(a,b) < min(d̄_a, s̄_b)`.
    Forward,
    /// `a → b`, exists while `σ′(a,b) > 0`.
    Backward,
}

impl Direction {
    pub fn name(self) -> &'static str {
        match self {
            Direction::Forward => "forward",
            Direction::Backward => "backward",
        }
    }
}

/// An alternating path `b₀ → a₀ → b₁ → a₁ → … → a_k`.
///
/// Forward edges are `(demands[i], supplies[i])`; backward edges are
/// `(demands[i], supplies[i + 1])`. Both vectors have the same length, so the
/// path starts and ends with a forward edge.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AugmentingPath {
    pub supplies: Vec<usize>,
    pub demands: Vec<usize>,
    /// Flow pushed along the path; zero until the path is applied.
    pub bottleneck: i64,
}

impl AugmentingPath {
    /// Number of edges `|P|`.
    pub fn len(&self) -> usize {
        (2 * self.demands.len()).saturating_sub(1)
    }

    pub fn is_empty(&self) -> bool {
        self.demands.is_empty()
    }

    /// `⌈|P|/2⌉`, the number of forward edges.
    pub fn forward_edges(&self) -> usize {
        self.demands.len()
    }

    pub fn source(&self) -> usize {
        self.supplies[0]
    }

    pub fn sink(&self) -> usize {
        self.demands[self.demands.len() - 1]
    }

    /// Edges in path order as `(a, b, direction)`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, Direction)> + '_ {
        (0..self.demands.len()).flat_map(move |i| {
            let fwd = std::iter::once((self.demands[i], self.supplies[i], Direction::Forward));
            let bwd = self
                .supplies
                .get(i + 1)
                .map(|&b| (self.demands[i], b, Direction::Backward));
            fwd.chain(bwd)
        })
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct Counters {
    pub dijkstra_edge_visits: u64,
    pub dfs_edge_visits: u64,
    pub augment_edge_updates: u64,
    pub augment_time: Duration,
}

/// Flow, duals and residual bookkeeping of one solver run.
#[derive(Debug, Clone)]
pub struct SolverState {
    pub(crate) flow: Matrix<i64>,
    pub(crate) costs: Matrix<i64>,
    pub(crate) duals_a: Vec<i64>,
    pub(crate) duals_b: Vec<i64>,
    pub(crate) demands: Vec<i64>,
    pub(crate) supplies: Vec<i64>,
    pub(crate) resid_demand: Vec<i64>,
    pub(crate) resid_supply: Vec<i64>,
    pub(crate) free_supply: i64,
    pub(crate) max_scaled_cost: i64,
    pub(crate) counters: Counters,
    pub(crate) fault: Option<Fault>,
}

impl SolverState {
    /// Zero flow and zero duals over the scaled costs of `costs`.
    pub fn new(scaled: &ScaledInstance, costs: &Matrix<f64>) -> Result<Self> {
        let (na, nb) = (scaled.int_demands.len(), scaled.int_supplies.len());
        if costs.rows() != na || costs.cols() != nb {
            return Err(Error::DimensionMismatch(format!(
                "cost matrix is {}x{}, expected {na}x{nb}",
                costs.rows(),
                costs.cols()
            )));
        }
        let mut scaled_costs = Vec::with_capacity(na * nb);
        for &c in costs.as_slice() {
            scaled_costs.push(scaled_cost(c, scaled.delta_prime)?);
        }
        let scaled_costs = Matrix::from_vec(na, nb, scaled_costs)?;
        Self::from_parts(
            scaled_costs,
            scaled.int_demands.clone(),
            scaled.int_supplies.clone(),
            Matrix::filled(na, nb, 0),
            vec![0; na],
            vec![0; nb],
        )
    }

    /// Builds a state from explicit parts. The flow must respect edge
    /// capacities and node marginals; duals are taken as given.
    pub fn from_parts(
        scaled_costs: Matrix<i64>,
        demands: Vec<i64>,
        supplies: Vec<i64>,
        flow: Matrix<i64>,
        duals_a: Vec<i64>,
        duals_b: Vec<i64>,
    ) -> Result<Self> {
        let (na, nb) = (demands.len(), supplies.len());
        let dims_ok = scaled_costs.rows() == na
            && scaled_costs.cols() == nb
            && flow.rows() == na
            && flow.cols() == nb
            && duals_a.len() == na
            && duals_b.len() == nb;
        if !dims_ok {
            return Err(Error::DimensionMismatch("solver state parts disagree in shape".into()));
        }
        if scaled_costs.as_slice().iter().any(|&c| c < 0) {
            return Err(Error::InvalidParameter("scaled costs must be non-negative".into()));
        }
        if demands.iter().chain(&supplies).any(|&m| m < 0) {
            return Err(Error::InvalidParameter("integer masses must be non-negative".into()));
        }
        for (a, b, &f) in flow.iter() {
            if f < 0 || f > demands[a].min(supplies[b]) {
                return Err(Error::CapacityViolation(format!(
                    "flow {f} on ({a},{b}) outside [0, {}]",
                    demands[a].min(supplies[b])
                )));
            }
        }
        let resid_demand: Vec<i64> = demands
            .iter()
            .zip(flow.row_sums())
            .map(|(d, r)| d - r)
            .collect();
        let resid_supply: Vec<i64> = supplies
            .iter()
            .zip(flow.col_sums())
            .map(|(s, c)| s - c)
            .collect();
        if resid_demand.iter().chain(&resid_supply).any(|&r| r < 0) {
            return Err(Error::CapacityViolation("flow exceeds a node marginal".into()));
        }
        let max_scaled_cost = scaled_costs.as_slice().iter().copied().max().unwrap_or(0);
        Ok(SolverState {
            free_supply: resid_supply.iter().sum(),
            flow,
            costs: scaled_costs,
            duals_a,
            duals_b,
            demands,
            supplies,
            resid_demand,
            resid_supply,
            max_scaled_cost,
            counters: Counters::default(),
            fault: None,
        })
    }

    pub(crate) fn with_fault(mut self, fault: Option<Fault>) -> Self {
        self.fault = fault;
        self
    }

    #[inline]
    pub fn num_demand(&self) -> usize {
        self.demands.len()
    }

    #[inline]
    pub fn num_supply(&self) -> usize {
        self.supplies.len()
    }

    pub fn flow(&self) -> &Matrix<i64> {
        &self.flow
    }

    pub fn scaled_costs(&self) -> &Matrix<i64> {
        &self.costs
    }

    pub fn demand_duals(&self) -> &[i64] {
        &self.duals_a
    }

    pub fn supply_duals(&self) -> &[i64] {
        &self.duals_b
    }

    pub fn residual_demand(&self) -> &[i64] {
        &self.resid_demand
    }

    pub fn residual_supply(&self) -> &[i64] {
        &self.resid_supply
    }

    /// Supply not yet routed, `Σ_b (s̄_b − Σ_a σ′(a,b))`.
    pub fn unrouted_supply(&self) -> i64 {
        self.free_supply
    }

    /// `⌊2C/δ′⌋`, the largest scaled cost.
    pub fn max_scaled_cost(&self) -> i64 {
        self.max_scaled_cost
    }

    #[inline]
    pub fn is_free_demand(&self, a: usize) -> bool {
        self.resid_demand[a] > 0
    }

    #[inline]
    pub fn is_free_supply(&self, b: usize) -> bool {
        self.resid_supply[b] > 0
    }

    pub fn free_demands(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.num_demand()).filter(|&a| self.is_free_demand(a))
    }

    pub fn free_supplies(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.num_supply()).filter(|&b| self.is_free_supply(b))
    }

    /// `min(d̄_a, s̄_b)`.
    #[inline]
    pub fn capacity(&self, a: usize, b: usize) -> i64 {
        self.demands[a].min(self.supplies[b])
    }

    #[inline]
    pub fn has_edge(&self, a: usize, b: usize, dir: Direction) -> bool {
        self.residual_capacity(a, b, dir) > 0
    }

    #[inline]
    pub fn residual_capacity(&self, a: usize, b: usize, dir: Direction) -> i64 {
        match dir {
            Direction::Forward => self.capacity(a, b) - self.flow[(a, b)],
            Direction::Backward => self.flow[(a, b)],
        }
    }

    /// Slack of a residual edge with no existence check.
    #[inline]
    pub(crate) fn raw_slack(&self, a: usize, b: usize, dir: Direction) -> i64 {
        let c = self.costs[(a, b)];
        let y = self.duals_a[a] + self.duals_b[b];
        match dir {
            Direction::Forward => c + 1 - y,
            Direction::Backward => y - c,
        }
    }

    /// `c̄ + 1 − y(a) − y(b)` on forward edges, `y(a) + y(b) − c̄` on backward edges.
    pub fn slack(&self, a: usize, b: usize, dir: Direction) -> Result<i64> {
        if a >= self.num_demand() || b >= self.num_supply() || !self.has_edge(a, b, dir) {
            return Err(Error::NoSuchResidualEdge {
                a,
                b,
                direction: dir.name(),
            });
        }
        Ok(self.raw_slack(a, b, dir))
    }

    #[inline]
    pub(crate) fn is_admissible(&self, a: usize, b: usize, dir: Direction) -> bool {
        self.has_edge(a, b, dir) && self.raw_slack(a, b, dir) == 0
    }

    pub fn integer_plan(&self) -> IntegerPlan {
        IntegerPlan {
            flow: self.flow.clone(),
        }
    }

    /// `w̄(σ′) = Σ σ′(a,b)·c̄(a,b)`.
    pub fn scaled_objective(&self) -> i128 {
        self.integer_plan().int_cost(&self.costs)
    }
}
