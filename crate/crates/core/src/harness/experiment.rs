use std::fmt;
use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::config::{SolveConfig, DEFAULT_EPSILON};
use crate::error::{Error, Result};
use crate::instance::{plan_cost, TransportInstance};
use crate::oracle::exact_transport;
use crate::pipeline::solve;
use crate::sinkhorn::{round_to_feasible, sinkhorn_scale, SinkhornParams};
use crate::stats::millis;

use super::image::{image_pair_to_instance, GrayImage};
use super::synthetic::{synthetic_instance, CostProfile, MassProfile};

/// Environment variable capping the worker pool size.
pub const THREADS_ENV: &str = "OT_GT_THREADS";
/// Largest `|A| + |B|` for which the oracle column is filled.
pub const ORACLE_MAX_N: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    Gt,
    Sinkhorn,
}

impl SolverKind {
    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Gt => "gt",
            SolverKind::Sinkhorn => "sinkhorn",
        }
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SolverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "gt" => Ok(SolverKind::Gt),
            "sinkhorn" => Ok(SolverKind::Sinkhorn),
            other => Err(Error::InvalidParameter(format!("unknown solver {other:?}"))),
        }
    }
}

#[derive(Debug, Clone)]
pub enum InstanceSource {
    File(PathBuf),
    ImagePair {
        first: PathBuf,
        second: PathBuf,
        prune_zero: bool,
    },
    Synthetic {
        n_a: usize,
        n_b: usize,
        count: usize,
        mass: MassProfile,
        cost: CostProfile,
    },
    /// Instances already in memory, with their ids.
    Given(Vec<(String, TransportInstance)>),
}

impl InstanceSource {
    /// Loads or generates the instances; synthetic ones use `seed + k`.
    pub fn materialize(&self, seed: u64) -> Result<Vec<(String, TransportInstance)>> {
        Ok(match self {
            InstanceSource::File(path) => {
                vec![(path.display().to_string(), TransportInstance::load(path)?)]
            }
            InstanceSource::ImagePair {
                first,
                second,
                prune_zero,
            } => {
                let inst = image_pair_to_instance(
                    &GrayImage::load(first)?,
                    &GrayImage::load(second)?,
                    *prune_zero,
                )?;
                vec![(format!("{}~{}", first.display(), second.display()), inst)]
            }
            InstanceSource::Synthetic {
                n_a,
                n_b,
                count,
                mass,
                cost,
            } => {
                if *n_a == 0 || *n_b == 0 {
                    return Err(Error::InvalidParameter("synthetic sides must be non-empty".into()));
                }
                (0..*count as u64)
                    .map(|k| {
                        let s = seed.wrapping_add(k);
                        (
                            format!("synthetic-{n_a}x{n_b}-{mass}-{cost}-{s}"),
                            synthetic_instance(*n_a, *n_b, s, *mass, *cost),
                        )
                    })
                    .collect()
            }
            InstanceSource::Given(list) => list.clone(),
        })
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub source: InstanceSource,
    pub deltas: Vec<f64>,
    pub epsilon: f64,
    pub solvers: Vec<SolverKind>,
    pub repetitions: usize,
    pub seed: u64,
    pub output: Option<PathBuf>,
    /// Overrides [`SinkhornParams::defaults_for`] when set.
    pub sinkhorn: Option<SinkhornParams>,
    pub debug_assertions: bool,
}

impl ExperimentSpec {
    pub fn new(source: InstanceSource, deltas: Vec<f64>, solvers: Vec<SolverKind>) -> Self {
        Self {
            source,
            deltas,
            epsilon: DEFAULT_EPSILON,
            solvers,
            repetitions: 1,
            seed: 0,
            output: None,
            sinkhorn: None,
            debug_assertions: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.deltas.is_empty() {
            return Err(Error::InvalidParameter("delta list is empty".into()));
        }
        if self.solvers.is_empty() {
            return Err(Error::InvalidParameter("solver list is empty".into()));
        }
        if self.repetitions == 0 {
            return Err(Error::InvalidParameter("repetitions must be at least 1".into()));
        }
        for &d in &self.deltas {
            SolveConfig::new(d)?.with_epsilon(self.epsilon)?;
        }
        if let Some(p) = &self.sinkhorn {
            p.validate()?;
        }
        Ok(())
    }
}

/// One CSV row. Fields left `None` are written as empty cells.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentRow {
    pub instance_id: String,
    pub n_a: usize,
    pub n_b: usize,
    pub delta: f64,
    pub epsilon: f64,
    pub solver: SolverKind,
    pub cost: Option<f64>,
    pub oracle_cost: Option<f64>,
    pub delta_bound_ok: Option<bool>,
    /// Phases for `gt`, iterations for `sinkhorn`.
    pub phases: Option<u64>,
    pub phase_bound: Option<u64>,
    pub sum_path_edges: Option<u64>,
    pub sum_half_ceil: Option<u64>,
    pub path_bound: Option<u64>,
    pub t_search_ms: Option<f64>,
    pub t_dfs_ms: Option<f64>,
    pub t_augment_ms: Option<f64>,
    pub t_total_ms: Option<f64>,
    /// Largest marginal deviation of the rounded Sinkhorn plan.
    #[serde(skip)]
    pub marginal_error: Option<f64>,
    #[serde(skip)]
    pub error: Option<String>,
    /// Set when `error` is a broken solver invariant rather than bad input.
    #[serde(skip)]
    pub internal_error: bool,
}

impl ExperimentRow {
    fn blank(id: &str, inst: &TransportInstance, delta: f64, epsilon: f64, solver: SolverKind) -> Self {
        Self {
            instance_id: id.to_string(),
            n_a: inst.num_demand(),
            n_b: inst.num_supply(),
            delta,
            epsilon,
            solver,
            cost: None,
            oracle_cost: None,
            delta_bound_ok: None,
            phases: None,
            phase_bound: None,
            sum_path_edges: None,
            sum_half_ceil: None,
            path_bound: None,
            t_search_ms: None,
            t_dfs_ms: None,
            t_augment_ms: None,
            t_total_ms: None,
            marginal_error: None,
            error: None,
            internal_error: false,
        }
    }

    /// `t_augment_ms / t_total_ms`, when both are present.
    pub fn augment_share(&self) -> Option<f64> {
        match (self.t_augment_ms, self.t_total_ms) {
            (Some(a), Some(t)) if t > 0.0 => Some(a / t),
            _ => None,
        }
    }
}

pub const CSV_HEADER: [&str; 18] = [
    "instance_id",
    "n_a",
    "n_b",
    "delta",
    "epsilon",
    "solver",
    "cost",
    "oracle_cost",
    "delta_bound_ok",
    "phases",
    "phase_bound",
    "sum_path_edges",
    "sum_half_ceil",
    "path_bound",
    "t_search_ms",
    "t_dfs_ms",
    "t_augment_ms",
    "t_total_ms",
];

pub(crate) fn worker_pool() -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| Error::InvalidParameter(format!("{THREADS_ENV}={v:?} is not a positive integer")))?;
        builder = builder.num_threads(n);
    }
    builder
        .build()
        .map_err(|e| Error::InvalidParameter(format!("cannot start worker pool: {e}")))
}

/// Runs every (instance, δ, solver, repetition) combination.
///
/// Rows come back in that nested order regardless of scheduling. A failing
/// row keeps its error in [`ExperimentRow::error`] and the sweep continues.
/// When `spec.output` is set, the CSV is written there as well.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Vec<ExperimentRow>> {
    spec.validate()?;
    let instances = spec.source.materialize(spec.seed)?;
    let pool = worker_pool()?;

    let oracles: Vec<Option<f64>> = pool.install(|| {
        instances
            .par_iter()
            .map(|(_, inst)| {
                (inst.n() <= ORACLE_MAX_N)
                    .then(|| exact_transport(inst).ok().map(|(_, c)| c))
                    .flatten()
            })
            .collect()
    });

    let mut jobs = Vec::new();
    for (i, (id, _)) in instances.iter().enumerate() {
        for &delta in &spec.deltas {
            for &solver in &spec.solvers {
                for rep in 0..spec.repetitions {
                    let id = if spec.repetitions > 1 {
                        format!("{id}#{rep}")
                    } else {
                        id.clone()
                    };
                    jobs.push((i, id, delta, solver));
                }
            }
        }
    }

    let rows: Vec<ExperimentRow> = pool.install(|| {
        jobs.par_iter()
            .map(|(i, id, delta, solver)| {
                let inst = &instances[*i].1;
                let mut row = ExperimentRow::blank(id, inst, *delta, spec.epsilon, *solver);
                if let Err(e) = fill_row(&mut row, inst, spec, oracles[*i]) {
                    row.internal_error = e.is_internal();
                    row.error = Some(e.to_string());
                }
                row
            })
            .collect()
    });

    if let Some(path) = &spec.output {
        write_csv(&rows, std::fs::File::create(path)?)?;
    }
    Ok(rows)
}

fn fill_row(
    row: &mut ExperimentRow,
    inst: &TransportInstance,
    spec: &ExperimentSpec,
    oracle: Option<f64>,
) -> Result<()> {
    let delta = row.delta;
    let cost = match row.solver {
        SolverKind::Gt => {
            let cfg = SolveConfig::new(delta)?
                .with_epsilon(spec.epsilon)?
                .with_seed(spec.seed)
                .with_debug_assertions(spec.debug_assertions);
            let sol = solve(inst, &cfg)?;
            let st = &sol.stats;
            row.phases = Some(st.phases);
            row.phase_bound = Some(st.phase_bound);
            row.sum_path_edges = Some(st.sum_path_edges);
            row.sum_half_ceil = Some(st.sum_half_ceil);
            row.path_bound = Some(st.path_bound);
            row.t_search_ms = Some(millis(st.timing.search));
            row.t_dfs_ms = Some(millis(st.timing.dfs));
            row.t_augment_ms = Some(millis(st.timing.augment));
            row.t_total_ms = Some(millis(st.timing.total));
            sol.cost
        }
        SolverKind::Sinkhorn => {
            let started = Instant::now();
            let params = spec
                .sinkhorn
                .unwrap_or_else(|| SinkhornParams::defaults_for(inst, delta));
            let out = sinkhorn_scale(inst, &params)?;
            let plan = round_to_feasible(&out.plan, inst.demands(), inst.supplies())?;
            row.t_total_ms = Some(millis(started.elapsed()));
            row.phases = Some(out.iters);
            let rows = plan.flow.row_sums();
            let cols = plan.flow.col_sums();
            let dev = rows
                .iter()
                .zip(inst.demands())
                .chain(cols.iter().zip(inst.supplies()))
                .map(|(x, t)| (x - t).abs())
                .fold(0.0, f64::max);
            row.marginal_error = Some(dev);
            plan_cost(inst, &plan)?
        }
    };
    row.cost = Some(cost);
    row.oracle_cost = oracle;
    row.delta_bound_ok = oracle.map(|o| cost <= o + inst.total_supply() * delta + 1e-9);
    Ok(())
}

/// Writes the header and one line per row.
pub fn write_csv<W: Write>(rows: &[ExperimentRow], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(CSV_HEADER)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}
