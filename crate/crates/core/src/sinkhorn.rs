//! Entropic matrix-scaling baseline.
//!
//! [`sinkhorn_scale`] alternates row and column scaling of `exp(−c/η)` in the
//! log domain, and [`round_to_feasible`] projects the result onto the set of
//! maximum plans so its cost can be compared with the primal-dual solver.
//!
//! One iteration is one row update followed by one column update. The
//! defaults in [`SinkhornParams::defaults_for`] are our own choice and can be
//! overridden.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::instance::{Provenance, TransportInstance, TransportPlan};
use crate::matrix::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SinkhornParams {
    pub eta: f64,
    pub max_iters: u64,
    /// Target ℓ₁ deviation of the row marginals after a column update.
    pub marginal_tol: f64,
}

impl SinkhornParams {
    pub const DEFAULT_MAX_ITERS: u64 = 10_000;

    pub fn new(eta: f64, max_iters: u64, marginal_tol: f64) -> Result<Self> {
        let p = Self {
            eta,
            max_iters,
            marginal_tol,
        };
        p.validate()?;
        Ok(p)
    }

    /// `η = δ / (4 ln(max(|A|,|B|) + 1))` and tolerance `δ / (8C)`.
    pub fn defaults_for(inst: &TransportInstance, delta: f64) -> Self {
        let n = inst.num_demand().max(inst.num_supply()) as f64;
        let c = if inst.max_cost() > 0.0 { inst.max_cost() } else { 1.0 };
        Self {
            eta: delta / (4.0 * (n + 1.0).ln()),
            max_iters: Self::DEFAULT_MAX_ITERS,
            marginal_tol: delta / (8.0 * c),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return Err(Error::InvalidParameter(format!("eta must be positive, got {}", self.eta)));
        }
        if !(self.marginal_tol > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "marginal_tol must be positive, got {}",
                self.marginal_tol
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SinkhornOutput {
    /// Scaled plan before rounding. Column marginals are exact, rows are not.
    pub plan: TransportPlan,
    pub iters: u64,
    pub converged: bool,
    pub marginal_error: f64,
}

fn log_sum_exp(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let m = values.clone().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + values.map(|v| (v - m).exp()).sum::<f64>().ln()
}

/// Sinkhorn iterations on a balanced instance.
///
/// Stops once the row marginals are within `marginal_tol` (ℓ₁) of the
/// demands or after `max_iters` iterations; in the latter case the last
/// iterate is returned with `converged == false`.
pub fn sinkhorn_scale(inst: &TransportInstance, params: &SinkhornParams) -> Result<SinkhornOutput> {
    params.validate()?;
    let (demand, supply) = (inst.total_demand(), inst.total_supply());
    if (demand - supply).abs() > 1e-9 * demand.max(supply).max(1.0) {
        return Err(Error::NonBalanced { demand, supply });
    }
    let (na, nb) = (inst.num_demand(), inst.num_supply());
    let eta = params.eta;
    let costs = inst.costs();
    let log_d: Vec<f64> = inst.demands().iter().map(|d| d.ln()).collect();
    let log_s: Vec<f64> = inst.supplies().iter().map(|s| s.ln()).collect();

    // plan(a,b) = exp((f(a) + g(b) − c(a,b)) / η)
    let mut f = vec![0.0; na];
    let mut g = vec![0.0; nb];
    let mut iters = 0;
    let mut err = f64::INFINITY;

    while iters < params.max_iters {
        iters += 1;
        for a in 0..na {
            let row = costs.row(a);
            let lse = log_sum_exp((0..nb).map(|b| (g[b] - row[b]) / eta));
            f[a] = if log_d[a] == f64::NEG_INFINITY || lse == f64::NEG_INFINITY {
                f64::NEG_INFINITY
            } else {
                eta * (log_d[a] - lse)
            };
        }
        for b in 0..nb {
            let lse = log_sum_exp((0..na).map(|a| (f[a] - costs[(a, b)]) / eta));
            g[b] = if log_s[b] == f64::NEG_INFINITY || lse == f64::NEG_INFINITY {
                f64::NEG_INFINITY
            } else {
                eta * (log_s[b] - lse)
            };
        }
        err = row_error(&f, &g, costs, eta, inst.demands());
        if err <= params.marginal_tol {
            break;
        }
    }

    let flow = Matrix::from_fn(na, nb, |a, b| entry(f[a], g[b], costs[(a, b)], eta));
    Ok(SinkhornOutput {
        plan: TransportPlan::new(flow, Provenance::Raw),
        iters,
        converged: err <= params.marginal_tol,
        marginal_error: err,
    })
}

fn entry(f: f64, g: f64, c: f64, eta: f64) -> f64 {
    if f == f64::NEG_INFINITY || g == f64::NEG_INFINITY {
        0.0
    } else {
        ((f + g - c) / eta).exp()
    }
}

fn row_error(f: &[f64], g: &[f64], costs: &Matrix<f64>, eta: f64, d: &[f64]) -> f64 {
    (0..f.len())
        .map(|a| {
            let r: f64 = (0..g.len()).map(|b| entry(f[a], g[b], costs[(a, b)], eta)).sum();
            (r - d[a]).abs()
        })
        .sum()
}

/// Projects a non-negative plan onto the maximum plans for `(d, s)`.
///
/// Rows are scaled down to at most `d`, then columns to at most `s`, and the
/// remaining deficits are filled with the rank-one matrix `er·ecᵀ/‖er‖₁`.
/// With `Σs ≤ Σd` this gives column sums exactly `s` and row sums at most `d`.
pub fn round_to_feasible(plan: &TransportPlan, d: &[f64], s: &[f64]) -> Result<TransportPlan> {
    let mut flow = plan.flow.clone();
    let (na, nb) = (flow.rows(), flow.cols());
    if d.len() != na || s.len() != nb {
        return Err(Error::DimensionMismatch(format!(
            "plan is {na}x{nb}, marginals are {}x{}",
            d.len(),
            s.len()
        )));
    }
    if let Some((i, _, &v)) = flow.iter().find(|(_, _, &v)| !(v >= 0.0)) {
        return Err(Error::NegativeValue {
            what: "plan",
            index: i,
            value: v,
        });
    }
    if d.iter().sum::<f64>() <= 0.0 {
        return Err(Error::ZeroMass);
    }

    let rows = flow.row_sums();
    for a in 0..na {
        if rows[a] > d[a] {
            let x = d[a] / rows[a];
            flow.row_mut(a).iter_mut().for_each(|v| *v *= x);
        }
    }
    let cols = flow.col_sums();
    for b in 0..nb {
        if cols[b] > s[b] {
            let y = s[b] / cols[b];
            for a in 0..na {
                flow[(a, b)] *= y;
            }
        }
    }

    let er: Vec<f64> = flow.row_sums().iter().zip(d).map(|(r, d)| (d - r).max(0.0)).collect();
    let ec: Vec<f64> = flow.col_sums().iter().zip(s).map(|(c, s)| (s - c).max(0.0)).collect();
    let norm: f64 = er.iter().sum();
    if norm > 0.0 {
        for a in 0..na {
            if er[a] == 0.0 {
                continue;
            }
            for b in 0..nb {
                flow[(a, b)] += er[a] * ec[b] / norm;
            }
        }
    }
    Ok(TransportPlan::new(flow, Provenance::Maximum))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{classify_plan, PlanClass};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_balanced(rng: &mut ChaCha8Rng, na: usize, nb: usize) -> TransportInstance {
        let mut d: Vec<f64> = (0..na).map(|_| rng.gen_range(1..16) as f64).collect();
        let mut s: Vec<f64> = (0..nb).map(|_| rng.gen_range(1..16) as f64).collect();
        let (td, ts) = (d.iter().sum::<f64>(), s.iter().sum::<f64>());
        d.iter_mut().for_each(|x| *x /= td);
        s.iter_mut().for_each(|x| *x /= ts);
        let costs = Matrix::from_fn(na, nb, |_, _| rng.gen_range(0..=256) as f64 / 256.0);
        TransportInstance::new(d, s, costs).unwrap()
    }

    #[test]
    fn constant_cost_is_outer_product_after_one_pass() {
        let inst = TransportInstance::from_rows(
            vec![0.5, 0.5],
            vec![0.5, 0.5],
            vec![vec![0.7, 0.7], vec![0.7, 0.7]],
        )
        .unwrap();
        let out = sinkhorn_scale(&inst, &SinkhornParams::new(0.05, 100, 1e-12).unwrap()).unwrap();
        assert_eq!(out.iters, 1);
        assert!(out.converged);
        for (_, _, &v) in out.plan.flow.iter() {
            assert!((v - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn single_cell() {
        let inst = TransportInstance::from_rows(vec![1.0], vec![1.0], vec![vec![0.3]]).unwrap();
        let out = sinkhorn_scale(&inst, &SinkhornParams::new(0.01, 10, 1e-12).unwrap()).unwrap();
        assert_eq!(out.iters, 1);
        assert!((out.plan.flow[(0, 0)] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn random_8x8_meets_tolerance() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let inst = random_balanced(&mut rng, 8, 8);
        let out = sinkhorn_scale(&inst, &SinkhornParams::new(0.1, 100_000, 1e-6).unwrap()).unwrap();
        assert!(out.converged);
        let rows = out.plan.flow.row_sums();
        let cols = out.plan.flow.col_sums();
        let dev: f64 = rows.iter().zip(inst.demands()).map(|(r, d)| (r - d).abs()).sum::<f64>()
            + cols.iter().zip(inst.supplies()).map(|(c, s)| (c - s).abs()).sum::<f64>();
        assert!(dev <= 1e-6, "deviation {dev}");
    }

    #[test]
    fn zero_mass_nodes_are_tolerated() {
        let inst = TransportInstance::from_rows(
            vec![1.0, 0.0],
            vec![0.0, 1.0],
            vec![vec![0.0, 1.0], vec![1.0, 0.0]],
        )
        .unwrap();
        let out = sinkhorn_scale(&inst, &SinkhornParams::new(0.01, 10, 1e-9).unwrap()).unwrap();
        assert!(out.converged);
        assert!((out.plan.flow[(0, 1)] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unbalanced_is_rejected() {
        let inst = TransportInstance::from_rows(vec![1.0], vec![0.5], vec![vec![0.0]]).unwrap();
        let err = sinkhorn_scale(&inst, &SinkhornParams::new(0.1, 10, 1e-6).unwrap()).unwrap_err();
        assert!(matches!(err, Error::NonBalanced { .. }));
    }

    #[test]
    fn iterations_do_not_grow_with_eta() {
        let etas = [0.02, 0.05, 0.2];
        let mut counts = vec![Vec::new(); etas.len()];
        for seed in 0..15 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let inst = random_balanced(&mut rng, 10, 10);
            for (i, &eta) in etas.iter().enumerate() {
                let p = SinkhornParams::new(eta, 200_000, 1e-6).unwrap();
                counts[i].push(sinkhorn_scale(&inst, &p).unwrap().iters);
            }
        }
        let medians: Vec<u64> = counts
            .into_iter()
            .map(|mut c| {
                c.sort_unstable();
                c[c.len() / 2]
            })
            .collect();
        assert!(medians.windows(2).all(|w| w[0] >= w[1]), "{medians:?}");
    }

    #[test]
    fn rounding_keeps_feasible_plan() {
        let flow = Matrix::from_rows(vec![vec![0.25, 0.25], vec![0.0, 0.5]]).unwrap();
        let plan = TransportPlan::new(flow.clone(), Provenance::Raw);
        let out = round_to_feasible(&plan, &[0.5, 0.5], &[0.25, 0.75]).unwrap();
        for (i, j, &v) in out.flow.iter() {
            assert!((v - flow[(i, j)]).abs() <= 1e-15);
        }
    }

    #[test]
    fn rounding_halves_overfull_row() {
        let flow = Matrix::from_rows(vec![vec![0.5, 0.5], vec![0.25, 0.25]]).unwrap();
        let plan = TransportPlan::new(flow, Provenance::Raw);
        let (d, s) = ([0.5, 0.5], [0.5, 0.5]);
        let out = round_to_feasible(&plan, &d, &s).unwrap();
        assert_eq!(out.flow.row(0), &[0.25, 0.25]);
        for (r, d) in out.flow.row_sums().iter().zip(&d) {
            assert!((r - d).abs() <= 1e-12);
        }
        for (c, s) in out.flow.col_sums().iter().zip(&s) {
            assert!((c - s).abs() <= 1e-12);
        }
    }

    #[test]
    fn rounding_zero_plan_gives_outer_product() {
        let plan = TransportPlan::zeros(2, 3);
        let (d, s) = ([0.25, 0.75], [0.5, 0.25, 0.25]);
        let out = round_to_feasible(&plan, &d, &s).unwrap();
        for (i, j, &v) in out.flow.iter() {
            assert!((v - d[i] * s[j]).abs() <= 1e-15);
        }
        assert!(matches!(round_to_feasible(&plan, &[0.0, 0.0], &[0.0; 3]), Err(Error::ZeroMass)));
    }

    #[test]
    fn rounded_sinkhorn_output_is_maximum() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let na = rng.gen_range(2..12);
            let nb = rng.gen_range(2..12);
            let inst = random_balanced(&mut rng, na, nb);
            let params = SinkhornParams::defaults_for(&inst, 0.1);
            let out = sinkhorn_scale(&inst, &params).unwrap();
            let plan = round_to_feasible(&out.plan, inst.demands(), inst.supplies()).unwrap();
            assert_eq!(classify_plan(&inst, &plan, 1e-12), PlanClass::Maximum);
            for (c, s) in plan.flow.col_sums().iter().zip(inst.supplies()) {
                assert!((c - s).abs() <= 1e-9);
            }
        }
    }
}
