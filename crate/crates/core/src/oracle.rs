//! Exact solvers used as ground truth by tests and acceptance runs.
//!
//! [`exact_transport_integer`] and [`exact_transport`] run successive
//! shortest paths with vertex potentials on the dense bipartite residual
//! graph; [`brute_force_enumerate`] checks those on tiny instances by listing
//! every maximum integer plan.

use std::ops::{Add, Sub};

use crate::error::{Error, Result};
use crate::instance::{Provenance, TransportInstance, TransportPlan};
use crate::matrix::Matrix;
use crate::scaling::IntegerPlan;

/// Largest `|A|·|B|` the exact solvers accept.
pub const MAX_CELLS: usize = 250_000;
/// Largest total integer supply [`exact_transport_integer`] accepts.
pub const MAX_INT_SUPPLY: i64 = 10_000_000;
/// Largest number of partial plans [`brute_force_enumerate`] will visit.
pub const MAX_ENUMERATED: u64 = 1_000_000;

trait Amount: Copy + PartialOrd + Add<Output = Self> + Sub<Output = Self> {
    const ZERO: Self;
    fn as_f64(self) -> f64;
    fn least(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }
}

impl Amount for i64 {
    const ZERO: Self = 0;
    fn as_f64(self) -> f64 {
        self as f64
    }
}

impl Amount for f64 {
    const ZERO: Self = 0.0;
    fn as_f64(self) -> f64 {
        self
    }
}

/// Min-cost maximum flow by successive shortest paths.
///
/// Forward edges `b → a` are uncapacitated with cost `c(a,b)`, backward edges
/// `a → b` carry the current flow at cost `−c(a,b)`. Potentials start at
/// zero and are shifted by distances truncated at the sink distance after
/// every search, which keeps all reduced costs non-negative.
fn successive_shortest_paths<T: Amount>(
    demands: &[T],
    supplies: &[T],
    costs: &Matrix<f64>,
) -> Result<Matrix<T>> {
    let (na, nb) = (demands.len(), supplies.len());
    if costs.rows() != na || costs.cols() != nb {
        return Err(Error::DimensionMismatch(format!(
            "cost matrix is {}x{}, expected {na}x{nb}",
            costs.rows(),
            costs.cols()
        )));
    }
    if na * nb > MAX_CELLS {
        return Err(Error::TooLarge(format!("{na}x{nb} cost matrix")));
    }

    let mut flow = Matrix::filled(na, nb, T::ZERO);
    let mut resid_d = demands.to_vec();
    let mut resid_s = supplies.to_vec();
    let mut pot_a = vec![0.0f64; na];
    let mut pot_b = vec![0.0f64; nb];
    let mut pot_t = 0.0f64;

    let mut dist_a = vec![f64::INFINITY; na];
    let mut dist_b = vec![f64::INFINITY; nb];
    let mut done_a = vec![false; na];
    let mut done_b = vec![false; nb];
    let mut pred_a = vec![usize::MAX; na];
    let mut pred_b = vec![usize::MAX; nb];

    loop {
        if !resid_s.iter().any(|&s| s > T::ZERO) {
            break;
        }
        dist_a.fill(f64::INFINITY);
        dist_b.fill(f64::INFINITY);
        done_a.fill(false);
        done_b.fill(false);
        pred_a.fill(usize::MAX);
        pred_b.fill(usize::MAX);
        for b in 0..nb {
            if resid_s[b] > T::ZERO {
                dist_b[b] = (-pot_b[b]).max(0.0);
            }
        }
        let mut dist_t = f64::INFINITY;
        let mut last = usize::MAX;

        loop {
            let mut best = f64::INFINITY;
            let mut pick = None;
            for a in 0..na {
                if !done_a[a] && dist_a[a] < best {
                    best = dist_a[a];
                    pick = Some((true, a));
                }
            }
            for b in 0..nb {
                if !done_b[b] && dist_b[b] < best {
                    best = dist_b[b];
                    pick = Some((false, b));
                }
            }
            let Some((is_demand, v)) = pick else { break };
            if best >= dist_t {
                break;
            }
            if is_demand {
                let a = v;
                done_a[a] = true;
                if resid_d[a] > T::ZERO {
                    let d = best + (pot_a[a] - pot_t).max(0.0);
                    if d < dist_t {
                        dist_t = d;
                        last = a;
                    }
                }
                for b in 0..nb {
                    if done_b[b] || !(flow[(a, b)] > T::ZERO) {
                        continue;
                    }
                    let d = best + (pot_a[a] - costs[(a, b)] - pot_b[b]).max(0.0);
                    if d < dist_b[b] {
                        dist_b[b] = d;
                        pred_b[b] = a;
                    }
                }
            } else {
                let b = v;
                done_b[b] = true;
                for a in 0..na {
                    if done_a[a] {
                        continue;
                    }
                    let d = best + (costs[(a, b)] + pot_b[b] - pot_a[a]).max(0.0);
                    if d < dist_a[a] {
                        dist_a[a] = d;
                        pred_a[a] = b;
                    }
                }
            }
        }

        if !dist_t.is_finite() {
            let left: f64 = resid_s.iter().map(|s| s.as_f64()).sum();
            let scale: f64 = supplies.iter().map(|s| s.as_f64()).sum::<f64>().max(1.0);
            if left <= 1e-12 * scale {
                break;
            }
            return Err(Error::InternalAccounting(format!(
                "no augmenting path with {left} supply unrouted"
            )));
        }

        for a in 0..na {
            pot_a[a] += dist_a[a].min(dist_t);
        }
        for b in 0..nb {
            pot_b[b] += dist_b[b].min(dist_t);
        }
        pot_t += dist_t;

        // Walk back from the sink, collecting the bottleneck.
        let sink = last;
        let mut r = resid_d[sink];
        let mut a = sink;
        let source;
        loop {
            let b = pred_a[a];
            match pred_b[b] {
                usize::MAX => {
                    source = b;
                    break;
                }
                prev => {
                    r = r.least(flow[(prev, b)]);
                    a = prev;
                }
            }
        }
        r = r.least(resid_s[source]);

        let mut a = sink;
        loop {
            let b = pred_a[a];
            flow[(a, b)] = flow[(a, b)] + r;
            match pred_b[b] {
                usize::MAX => break,
                prev => {
                    flow[(prev, b)] = flow[(prev, b)] - r;
                    a = prev;
                }
            }
        }
        resid_d[sink] = resid_d[sink] - r;
        resid_s[source] = resid_s[source] - r;
    }
    Ok(flow)
}

/// Minimum-cost maximum integer plan and its cost.
pub fn exact_transport_integer(
    demands: &[i64],
    supplies: &[i64],
    costs: &Matrix<f64>,
) -> Result<(IntegerPlan, f64)> {
    check_integer_masses(demands, supplies)?;
    let total: i64 = supplies.iter().sum();
    if total > MAX_INT_SUPPLY {
        return Err(Error::TooLarge(format!("total integer supply {total}")));
    }
    let flow = successive_shortest_paths(demands, supplies, costs)?;
    let plan = IntegerPlan { flow };
    let cost = plan.cost(costs);
    Ok((plan, cost))
}

/// Minimum-cost maximum plan for a real-valued instance and its cost.
pub fn exact_transport(inst: &TransportInstance) -> Result<(TransportPlan, f64)> {
    let flow = successive_shortest_paths(inst.demands(), inst.supplies(), inst.costs())?;
    let plan = TransportPlan::new(flow, Provenance::Maximum);
    let cost = crate::instance::plan_cost(inst, &plan)?;
    Ok((plan, cost))
}

fn check_integer_masses(demands: &[i64], supplies: &[i64]) -> Result<()> {
    if let Some(i) = demands.iter().position(|&d| d < 0) {
        return Err(Error::NegativeValue {
            what: "int_demands",
            index: i,
            value: demands[i] as f64,
        });
    }
    if let Some(i) = supplies.iter().position(|&s| s < 0) {
        return Err(Error::NegativeValue {
            what: "int_supplies",
            index: i,
            value: supplies[i] as f64,
        });
    }
    let (d, s): (i64, i64) = (demands.iter().sum(), supplies.iter().sum());
    if s > d {
        return Err(Error::SupplyExceedsDemand {
            supply: s as f64,
            demand: d as f64,
        });
    }
    Ok(())
}

/// Cheapest maximum integer plan by exhaustive enumeration.
pub fn brute_force_enumerate(demands: &[i64], supplies: &[i64], costs: &Matrix<f64>) -> Result<f64> {
    check_integer_masses(demands, supplies)?;
    let (na, nb) = (demands.len(), supplies.len());
    if costs.rows() != na || costs.cols() != nb {
        return Err(Error::DimensionMismatch("cost matrix shape".into()));
    }

    struct Search<'a> {
        supplies: &'a [i64],
        costs: &'a Matrix<f64>,
        spare: Vec<i64>,
        visited: u64,
        best: f64,
    }

    impl Search<'_> {
        // Distributes what is left of supply `b` over demand nodes `a..`.
        fn go(&mut self, b: usize, a: usize, left: i64, cost: f64) -> Result<()> {
            let (na, nb) = (self.spare.len(), self.supplies.len());
            self.visited += 1;
            if self.visited > MAX_ENUMERATED {
                return Err(Error::TooLarge(format!(
                    "more than {MAX_ENUMERATED} partial plans"
                )));
            }
            if b == nb {
                self.best = self.best.min(cost);
                return Ok(());
            }
            if a == na {
                if left == 0 {
                    let next = self.supplies.get(b + 1).copied().unwrap_or(0);
                    self.go(b + 1, 0, next, cost)?;
                }
                return Ok(());
            }
            let top = left.min(self.spare[a]);
            for k in 0..=top {
                self.spare[a] -= k;
                let c = cost + k as f64 * self.costs[(a, b)];
                let r = self.go(b, a + 1, left - k, c);
                self.spare[a] += k;
                r?;
            }
            Ok(())
        }
    }

    let mut search = Search {
        supplies,
        costs,
        spare: demands.to_vec(),
        visited: 0,
        best: f64::INFINITY,
    };
    let first = supplies.first().copied().unwrap_or(0);
    search.go(0, 0, first, 0.0)?;
    Ok(search.best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn m(rows: Vec<Vec<f64>>) -> Matrix<f64> {
        Matrix::from_rows(rows).unwrap()
    }

    #[test]
    fn single_cell() {
        let (p, c) = exact_transport_integer(&[1], &[1], &m(vec![vec![7.0]])).unwrap();
        assert_eq!(c, 7.0);
        assert_eq!(p.flow[(0, 0)], 1);
        assert_eq!(brute_force_enumerate(&[1], &[1], &m(vec![vec![7.0]])).unwrap(), 7.0);
    }

    #[test]
    fn zero_cost_matching_is_diagonal() {
        let costs = m(vec![vec![0.0, 1.0], vec![1.0, 0.0]]);
        let (p, c) = exact_transport_integer(&[1, 1], &[1, 1], &costs).unwrap();
        assert_eq!(c, 0.0);
        assert_eq!(p.flow, Matrix::from_rows(vec![vec![1, 0], vec![0, 1]]).unwrap());
    }

    #[test]
    fn forced_saturation() {
        // One demand node of size 2, two unit supplies at costs 1 and 2.
        let costs = m(vec![vec![1.0, 2.0]]);
        assert_eq!(brute_force_enumerate(&[2], &[1, 1], &costs).unwrap(), 3.0);
        assert_eq!(exact_transport_integer(&[2], &[1, 1], &costs).unwrap().1, 3.0);
    }

    #[test]
    fn enumeration_guard() {
        let costs = Matrix::filled(6, 6, 1.0);
        let err = brute_force_enumerate(&[30; 6], &[30; 6], &costs).unwrap_err();
        assert!(matches!(err, Error::TooLarge(_)));
    }

    #[test]
    fn ssp_matches_enumeration_on_random_micro_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..500 {
            let na = rng.gen_range(1..4);
            let nb = rng.gen_range(1..4);
            let s: Vec<i64> = (0..nb).map(|_| rng.gen_range(0..3)).collect();
            let mut d: Vec<i64> = (0..na).map(|_| rng.gen_range(0..4)).collect();
            let short = s.iter().sum::<i64>() - d.iter().sum::<i64>();
            if short > 0 {
                d[0] += short;
            }
            let costs = Matrix::from_fn(na, nb, |_, _| rng.gen_range(0..16) as f64 / 4.0);
            let exact = exact_transport_integer(&d, &s, &costs).unwrap();
            exact.0.flow.col_sums().iter().zip(&s).for_each(|(c, s)| assert_eq!(c, s));
            let brute = brute_force_enumerate(&d, &s, &costs).unwrap();
            assert_eq!(exact.1, brute, "d={d:?} s={s:?} c={costs:?}");
        }
    }

    #[test]
    fn real_mass_solver_agrees_with_integer_solver_on_dyadic_masses() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..100 {
            let na = rng.gen_range(1..6);
            let nb = rng.gen_range(1..6);
            let s: Vec<i64> = (0..nb).map(|_| rng.gen_range(0..9)).collect();
            let mut d: Vec<i64> = (0..na).map(|_| rng.gen_range(0..9)).collect();
            let short = s.iter().sum::<i64>() - d.iter().sum::<i64>();
            if short > 0 {
                d[0] += short;
            }
            let costs = Matrix::from_fn(na, nb, |_, _| rng.gen_range(0..64) as f64 / 64.0);
            let (_, int_cost) = exact_transport_integer(&d, &s, &costs).unwrap();
            let inst = TransportInstance::new(
                d.iter().map(|&x| x as f64 / 8.0).collect(),
                s.iter().map(|&x| x as f64 / 8.0).collect(),
                costs,
            )
            .unwrap();
            let (_, real_cost) = exact_transport(&inst).unwrap();
            assert_eq!(real_cost * 8.0, int_cost);
        }
    }

    #[test]
    fn rejects_supply_surplus() {
        let costs = m(vec![vec![0.0]]);
        assert!(matches!(
            exact_transport_integer(&[1], &[2], &costs),
            Err(Error::SupplyExceedsDemand { .. })
        ));
    }
}
