//! Transport instances and plans.
//!
//! A [`TransportInstance`] holds demands `d_a` for the nodes of `A`, supplies
//! `s_b` for the nodes of `B`, and a dense `|A| x |B|` cost matrix. Total supply
//! never exceeds total demand, so a *maximum* plan ships every unit of supply
//! while leaving some demand possibly unmet.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Relative slack allowed when comparing total supply against total demand.
pub const BALANCE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct TransportInstance {
    demands: Vec<f64>,
    supplies: Vec<f64>,
    costs: Matrix<f64>,
    max_cost: f64,
}

impl TransportInstance {
    pub fn new(demands: Vec<f64>, supplies: Vec<f64>, costs: Matrix<f64>) -> Result<Self> {
        let max_cost = costs.max_entry();
        let inst = TransportInstance {
            demands,
            supplies,
            costs,
            max_cost,
        };
        validate_instance(&inst)?;
        Ok(inst)
    }

    pub fn from_rows(demands: Vec<f64>, supplies: Vec<f64>, costs: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(demands, supplies, Matrix::from_rows(costs)?)
    }

    pub fn demands(&self) -> &[f64] {
        &self.demands
    }

    pub fn supplies(&self) -> &[f64] {
        &self.supplies
    }

    pub fn costs(&self) -> &Matrix<f64> {
        &self.costs
    }

    #[inline]
    pub fn num_demand(&self) -> usize {
        self.demands.len()
    }

    #[inline]
    pub fn num_supply(&self) -> usize {
        self.supplies.len()
    }

    /// `n = |A| + |B|`.
    pub fn n(&self) -> usize {
        self.demands.len() + self.supplies.len()
    }

    /// Largest cost entry `C`.
    pub fn max_cost(&self) -> f64 {
        self.max_cost
    }

    /// Total supply `U`.
    pub fn total_supply(&self) -> f64 {
        self.supplies.iter().sum()
    }

    pub fn total_demand(&self) -> f64 {
        self.demands.iter().sum()
    }

    /// Default marginal tolerance for classifying plans of this instance.
    pub fn feasibility_tolerance(&self) -> f64 {
        1e-9 * self.total_demand().max(1.0)
    }

    pub fn to_file(&self) -> InstanceFile {
        InstanceFile {
            demands: self.demands.clone(),
            supplies: self.supplies.clone(),
            costs: self.costs.to_rows(),
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: InstanceFile = serde_json::from_str(text)?;
        file.try_into()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_file()).expect("instance serialization is infallible")
    }
}

/// Checks every instance invariant and returns the instance unchanged.
pub fn validate_instance(inst: &TransportInstance) -> Result<&TransportInstance> {
    let (na, nb) = (inst.demands.len(), inst.supplies.len());
    if na == 0 || nb == 0 {
        return Err(Error::DimensionMismatch(format!(
            "need at least one demand and one supply node, got {na} and {nb}"
        )));
    }
    if inst.costs.rows() != na || inst.costs.cols() != nb {
        return Err(Error::DimensionMismatch(format!(
            "cost matrix is {}x{}, expected {na}x{nb}",
            inst.costs.rows(),
            inst.costs.cols()
        )));
    }
    check_values("demands", &inst.demands)?;
    check_values("supplies", &inst.supplies)?;
    check_values("costs", inst.costs.as_slice())?;

    let demand = inst.total_demand();
    let supply = inst.total_supply();
    if supply > demand + BALANCE_TOLERANCE * demand {
        return Err(Error::SupplyExceedsDemand { supply, demand });
    }
    Ok(inst)
}

fn check_values(what: &'static str, values: &[f64]) -> Result<()> {
    for (index, &value) in values.iter().enumerate() {
        if !value.is_finite() {
            return Err(Error::NonFinite { what, index, value });
        }
        if value < 0.0 {
            return Err(Error::NegativeValue { what, index, value });
        }
    }
    Ok(())
}

/// On-disk instance layout.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub demands: Vec<f64>,
    pub supplies: Vec<f64>,
    pub costs: Vec<Vec<f64>>,
}

impl TryFrom<InstanceFile> for TransportInstance {
    type Error = Error;

    fn try_from(file: InstanceFile) -> Result<Self> {
        let costs = Matrix::from_rows(file.costs)
            .map_err(|e| Error::DimensionMismatch(format!("costs: {e}")))?;
        TransportInstance::new(file.demands, file.supplies, costs)
    }
}

/// Where a plan came from, as far as its producer can vouch for it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Raw,
    Feasible,
    Maximum,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransportPlan {
    pub flow: Matrix<f64>,
    pub provenance: Provenance,
}

impl TransportPlan {
    pub fn new(flow: Matrix<f64>, provenance: Provenance) -> Self {
        TransportPlan { flow, provenance }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        TransportPlan::new(Matrix::filled(rows, cols, 0.0), Provenance::Raw)
    }

    pub fn to_file(&self, cost: f64) -> PlanFile {
        PlanFile {
            flow: self.flow.to_rows(),
            cost,
        }
    }
}

/// On-disk plan layout.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlanFile {
    pub flow: Vec<Vec<f64>>,
    pub cost: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PlanClass {
    Infeasible,
    Feasible,
    Maximum,
}

fn check_dims(inst: &TransportInstance, flow: &Matrix<f64>) -> Result<()> {
    if flow.rows() != inst.num_demand() || flow.cols() != inst.num_supply() {
        return Err(Error::DimensionMismatch(format!(
            "plan is {}x{}, instance is {}x{}",
            flow.rows(),
            flow.cols(),
            inst.num_demand(),
            inst.num_supply()
        )));
    }
    Ok(())
}

/// `w(σ) = Σ σ(a,b)·c(a,b)`.
pub fn plan_cost(inst: &TransportInstance, plan: &TransportPlan) -> Result<f64> {
    check_dims(inst, &plan.flow)?;
    Ok(plan
        .flow
        .as_slice()
        .iter()
        .zip(inst.costs.as_slice())
        .map(|(f, c)| f * c)
        .sum())
}

/// Classifies a plan against the marginal constraints, within `tol`.
///
/// A plan with mismatched dimensions is classified infeasible.
pub fn classify_plan(inst: &TransportInstance, plan: &TransportPlan, tol: f64) -> PlanClass {
    if check_dims(inst, &plan.flow).is_err() {
        return PlanClass::Infeasible;
    }
    if plan.flow.as_slice().iter().any(|&v| !(v >= -tol)) {
        return PlanClass::Infeasible;
    }
    let rows = plan.flow.row_sums();
    let cols = plan.flow.col_sums();
    let rows_ok = rows.iter().zip(&inst.demands).all(|(r, d)| *r <= d + tol);
    let cols_ok = cols.iter().zip(&inst.supplies).all(|(c, s)| *c <= s + tol);
    if !(rows_ok && cols_ok) {
        return PlanClass::Infeasible;
    }
    if cols.iter().zip(&inst.supplies).all(|(c, s)| (c - s).abs() <= tol) {
        PlanClass::Maximum
    } else {
        PlanClass::Feasible
    }
}
