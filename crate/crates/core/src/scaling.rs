//! Integerization of masses and recovery of a real-valued plan.
//!
//! Masses are multiplied by `α = 2nC/(εUδ)`; demands are rounded up and
//! supplies rounded down, so the integer instance still has no more supply
//! than demand. A maximum integer plan `σ′` maps back to `σ′/α`, which may
//! overfill some demand nodes by less than `1/α` each and underuse some supply
//! nodes by less than `1/α` each. [`recover_plan`] repairs both.

use crate::config::SolveConfig;
use crate::error::{Error, Result};
use crate::instance::{TransportInstance, TransportPlan, Provenance};
use crate::matrix::Matrix;

/// Upper limit for any integer quantity the solver multiplies or sums.
pub const INTEGER_GUARD: i64 = 1 << 62;

#[derive(Debug, Clone, PartialEq)]
pub struct ScaledInstance {
    pub alpha: f64,
    /// `δ′ = (1 − ε)δ`.
    pub delta_prime: f64,
    /// `⌈d_a·α⌉`.
    pub int_demands: Vec<i64>,
    /// `⌊s_b·α⌋`.
    pub int_supplies: Vec<i64>,
    /// `𝒰 = Σ_b ⌊s_b·α⌋`.
    pub total_supply: i64,
}

impl ScaledInstance {
    /// An integer instance given directly, with `α = 1`.
    pub fn integral(int_demands: Vec<i64>, int_supplies: Vec<i64>, delta_prime: f64) -> Result<Self> {
        if !(delta_prime > 0.0 && delta_prime.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "delta' must be positive, got {delta_prime}"
            )));
        }
        for (what, values) in [("int_demands", &int_demands), ("int_supplies", &int_supplies)] {
            if let Some((index, &v)) = values.iter().enumerate().find(|(_, v)| **v < 0) {
                return Err(Error::NegativeValue {
                    what,
                    index,
                    value: v as f64,
                });
            }
        }
        let total_demand = checked_total(&int_demands)?;
        let total_supply = checked_total(&int_supplies)?;
        if total_supply > total_demand {
            return Err(Error::SupplyExceedsDemand {
                supply: total_supply as f64,
                demand: total_demand as f64,
            });
        }
        Ok(ScaledInstance {
            alpha: 1.0,
            delta_prime,
            int_demands,
            int_supplies,
            total_supply,
        })
    }

    pub fn total_demand(&self) -> i64 {
        self.int_demands.iter().sum()
    }
}

fn checked_total(values: &[i64]) -> Result<i64> {
    let total: i128 = values.iter().map(|&v| v as i128).sum();
    if total > INTEGER_GUARD as i128 {
        return Err(Error::OverflowRisk(format!(
            "integer mass total {total} exceeds 2^62"
        )));
    }
    Ok(total as i64)
}

/// Maximum integer plan for a [`ScaledInstance`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntegerPlan {
    pub flow: Matrix<i64>,
}

impl IntegerPlan {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntegerPlan {
            flow: Matrix::filled(rows, cols, 0),
        }
    }

    /// Checks `σ′ ≥ 0`, demand rows within `d̄`, and supply columns saturated.
    pub fn check_maximum(&self, scaled: &ScaledInstance) -> Result<()> {
        let (na, nb) = (scaled.int_demands.len(), scaled.int_supplies.len());
        if self.flow.rows() != na || self.flow.cols() != nb {
            return Err(Error::DimensionMismatch(format!(
                "integer plan is {}x{}, expected {na}x{nb}",
                self.flow.rows(),
                self.flow.cols()
            )));
        }
        if let Some((a, b, v)) = self.flow.iter().find(|(_, _, v)| **v < 0) {
            return Err(Error::NotMaximum(format!("flow ({a},{b}) = {v} is negative")));
        }
        for (a, (r, d)) in self.flow.row_sums().iter().zip(&scaled.int_demands).enumerate() {
            if r > d {
                return Err(Error::NotMaximum(format!(
                    "demand row {a} receives {r} > {d}"
                )));
            }
        }
        for (b, (c, s)) in self.flow.col_sums().iter().zip(&scaled.int_supplies).enumerate() {
            if c != s {
                return Err(Error::NotMaximum(format!(
                    "supply column {b} ships {c}, expected {s}"
                )));
            }
        }
        Ok(())
    }

    /// Cost against an arbitrary real cost matrix.
    pub fn cost(&self, costs: &Matrix<f64>) -> f64 {
        self.flow
            .as_slice()
            .iter()
            .zip(costs.as_slice())
            .map(|(&f, &c)| f as f64 * c)
            .sum()
    }

    /// Cost against an integer cost matrix, exact.
    pub fn int_cost(&self, costs: &Matrix<i64>) -> i128 {
        self.flow
            .as_slice()
            .iter()
            .zip(costs.as_slice())
            .map(|(&f, &c)| f as i128 * c as i128)
            .sum()
    }
}

/// `α = 2nC/(εUδ)`.
pub fn scaling_factor(inst: &TransportInstance, cfg: &SolveConfig) -> f64 {
    2.0 * inst.n() as f64 * inst.max_cost()
        / (cfg.epsilon * inst.total_supply() * cfg.delta)
}

pub fn scale_instance(inst: &TransportInstance, cfg: &SolveConfig) -> Result<ScaledInstance> {
    cfg.validate()?;
    if inst.total_supply() <= 0.0 {
        return Err(Error::ZeroTotalSupply);
    }
    if inst.max_cost() <= 0.0 {
        return Err(Error::ZeroMaxCost);
    }
    let scaled = scale_with_alpha(inst, scaling_factor(inst, cfg), cfg.delta_prime())?;

    let phase_bound = crate::solver::scaled_cost(inst.max_cost(), scaled.delta_prime)? + 1;
    if (scaled.total_supply as i128) * (phase_bound as i128) > INTEGER_GUARD as i128 {
        return Err(Error::OverflowRisk(format!(
            "total integer supply {} times phase bound {phase_bound} exceeds 2^62; delta too small",
            scaled.total_supply
        )));
    }
    Ok(scaled)
}

/// Integerizes masses with an explicit factor `α`.
pub fn scale_with_alpha(
    inst: &TransportInstance,
    alpha: f64,
    delta_prime: f64,
) -> Result<ScaledInstance> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "scaling factor must be positive and finite, got {alpha}"
        )));
    }
    let to_int = |what: &'static str, index: usize, x: f64| -> Result<i64> {
        if x > INTEGER_GUARD as f64 {
            return Err(Error::OverflowRisk(format!(
                "{what}[{index}] scales to {x:e}, beyond 2^62"
            )));
        }
        Ok(x as i64)
    };
    let int_demands = inst
        .demands()
        .iter()
        .enumerate()
        .map(|(i, &d)| to_int("demands", i, (d * alpha).ceil()))
        .collect::<Result<Vec<_>>>()?;
    let int_supplies = inst
        .supplies()
        .iter()
        .enumerate()
        .map(|(i, &s)| to_int("supplies", i, (s * alpha).floor()))
        .collect::<Result<Vec<_>>>()?;

    let mut scaled = ScaledInstance::integral(int_demands, int_supplies, delta_prime)?;
    scaled.alpha = alpha;
    Ok(scaled)
}

/// A recovered real plan together with the repair volumes.
#[derive(Debug, Clone)]
pub struct Recovery {
    pub plan: TransportPlan,
    /// Mass removed from overfilled demand nodes, `Σ κ_a`.
    pub pushed_back: f64,
    /// Unshipped supply after pushback, before the leftover fill.
    pub leftover: f64,
}

/// Converts a maximum integer plan into a maximum plan for the real instance.
///
/// Overfilled demand nodes shed flow from their most expensive edges first;
/// the unshipped supply is then matched, supply node by supply node in index
/// order, to the cheapest demand nodes with spare capacity.
pub fn recover_plan(
    inst: &TransportInstance,
    scaled: &ScaledInstance,
    int_plan: &IntegerPlan,
) -> Result<Recovery> {
    int_plan.check_maximum(scaled)?;
    if scaled.int_demands.len() != inst.num_demand() || scaled.int_supplies.len() != inst.num_supply() {
        return Err(Error::DimensionMismatch(
            "scaled instance does not match the real instance".into(),
        ));
    }
    let (na, nb) = (inst.num_demand(), inst.num_supply());
    let costs = inst.costs();
    let mut flow = int_plan.flow.map(|&f| f as f64 / scaled.alpha);

    let mut pushed_back = 0.0;
    let mut order: Vec<usize> = (0..nb).collect();
    for a in 0..na {
        let d = inst.demands()[a];
        let row = flow.row_mut(a);
        let incoming: f64 = row.iter().sum();
        let mut excess = incoming - d;
        if excess <= 0.0 {
            continue;
        }
        pushed_back += excess;
        let cost_row = costs.row(a);
        order.sort_by(|&x, &y| cost_row[y].total_cmp(&cost_row[x]).then(x.cmp(&y)));
        for &b in &order {
            if excess <= 0.0 {
                break;
            }
            let cut = excess.min(row[b]);
            row[b] -= cut;
            excess -= cut;
        }
        if excess > 0.0 {
            return Err(Error::InternalAccounting(format!(
                "demand node {a} still exceeds its demand by {excess} after pushback"
            )));
        }
    }

    let shipped = flow.col_sums();
    let received = flow.row_sums();
    let mut spare: Vec<f64> = inst
        .demands()
        .iter()
        .zip(&received)
        .map(|(d, r)| (d - r).max(0.0))
        .collect();
    let mut leftover_total = 0.0;
    let mut order: Vec<usize> = (0..na).collect();
    for b in 0..nb {
        let mut leftover = (inst.supplies()[b] - shipped[b]).max(0.0);
        if leftover <= 0.0 {
            continue;
        }
        leftover_total += leftover;
        order.sort_by(|&x, &y| costs[(x, b)].total_cmp(&costs[(y, b)]).then(x.cmp(&y)));
        for &a in &order {
            if leftover <= 0.0 {
                break;
            }
            let moved = leftover.min(spare[a]);
            if moved > 0.0 {
                flow[(a, b)] += moved;
                spare[a] -= moved;
                leftover -= moved;
            }
        }
    }

    Ok(Recovery {
        plan: TransportPlan::new(flow, Provenance::Maximum),
        pushed_back,
        leftover: leftover_total,
    })
}

/// Maximum plan built by filling demand nodes in index order.
///
/// Used when scaling is unnecessary: zero total supply, or all costs zero
/// (every maximum plan is then optimal).
pub fn greedy_saturated_plan(inst: &TransportInstance) -> TransportPlan {
    let (na, nb) = (inst.num_demand(), inst.num_supply());
    let mut flow = Matrix::filled(na, nb, 0.0);
    let mut spare = inst.demands().to_vec();
    let mut a = 0;
    for b in 0..nb {
        let mut left = inst.supplies()[b];
        while left > 0.0 && a < na {
            let moved = left.min(spare[a]);
            flow[(a, b)] += moved;
            spare[a] -= moved;
            left -= moved;
            if spare[a] <= 0.0 {
                a += 1;
            }
        }
        // Supply beyond total demand only exists within the validation tolerance.
        if left > 0.0 && na > 0 {
            flow[(na - 1, b)] += left;
        }
    }
    TransportPlan::new(flow, Provenance::Maximum)
}
