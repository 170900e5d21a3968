//! `ot-gt` command-line front end.
//!
//! Exit codes: 0 success, 1 invalid input, 2 internal invariant violation,
//! 3 property check failure. Data goes to stdout or the requested files,
//! diagnostics to stderr.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use ot_gt::config::Fault;
use ot_gt::harness::{
    run_check, run_experiment, synthetic_image, synthetic_instance, write_csv, CheckConfig,
    CostProfile, ExperimentSpec, InstanceSource, MassProfile, SolverKind,
};
use ot_gt::sinkhorn::SinkhornParams;
use ot_gt::{solve, Error, SolveConfig, TransportInstance};

const EXIT_INVALID: u8 = 1;
const EXIT_INTERNAL: u8 = 2;
const EXIT_CHECK_FAILED: u8 = 3;

#[derive(Parser)]
#[command(name = "ot-gt", version, about = "Additive-error optimal transport solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one instance file.
    Solve(SolveArgs),
    /// Sweep solvers over δ values and write CSV rows.
    Compare(CompareArgs),
    /// Randomized property check against the exact solver.
    Check(CheckArgs),
    /// Write a synthetic instance as JSON.
    Generate(GenerateArgs),
    /// Write a synthetic grayscale image as binary PGM.
    Image(ImageArgs),
}

#[derive(Args)]
struct SolveArgs {
    instance: PathBuf,
    #[arg(long)]
    delta: f64,
    #[arg(long, default_value_t = ot_gt::config::DEFAULT_EPSILON)]
    epsilon: f64,
    /// Plan output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Run statistics output file.
    #[arg(long)]
    stats: Option<PathBuf>,
    /// Include stage timings in the statistics file.
    #[arg(long)]
    timing: bool,
    /// Check all solver invariants after every phase.
    #[arg(long)]
    debug_assert: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct CompareArgs {
    /// Instance file. Mutually exclusive with --images and --synthetic.
    instance: Option<PathBuf>,
    #[arg(long, num_args = 2, value_names = ["FIRST", "SECOND"])]
    images: Option<Vec<PathBuf>>,
    /// Drop zero-intensity pixels when building image instances.
    #[arg(long)]
    prune_zero: bool,
    /// Generate instances of size NAxNB instead of reading one.
    #[arg(long, value_name = "NAxNB")]
    synthetic: Option<String>,
    #[arg(long, default_value_t = 1)]
    count: usize,
    #[arg(long, default_value = "random")]
    mass: String,
    #[arg(long, default_value = "random")]
    cost: String,
    #[arg(long, value_delimiter = ',', default_value = "0.2,0.1,0.05,0.025")]
    delta_list: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "gt,sinkhorn")]
    solvers: Vec<String>,
    #[arg(long, default_value_t = ot_gt::config::DEFAULT_EPSILON)]
    epsilon: f64,
    #[arg(long, default_value_t = 1)]
    repetitions: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// CSV output file; stdout when omitted.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Sinkhorn regularization; default depends on δ and instance size.
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    max_iters: Option<u64>,
    #[arg(long)]
    marginal_tol: Option<f64>,
    #[arg(long)]
    debug_assert: bool,
}

#[derive(Args)]
struct CheckArgs {
    /// Largest number of nodes on either side.
    #[arg(long, default_value_t = 12)]
    size_cap: usize,
    /// Number of random instances.
    #[arg(long, default_value_t = 200)]
    seeds: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_delimiter = ',', default_value = "0.5,0.1,0.05")]
    delta_list: Vec<f64>,
    #[arg(long, hide = true)]
    inject_fault: bool,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    n_a: usize,
    #[arg(long)]
    n_b: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "random")]
    mass: String,
    #[arg(long, default_value = "random")]
    cost: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ImageArgs {
    #[arg(long, default_value_t = 28)]
    width: usize,
    #[arg(long, default_value_t = 28)]
    height: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

enum Failure {
    Invalid(String),
    Internal(String),
    Check(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_internal() {
            Failure::Internal(format!("{e}\n{e:?}"))
        } else {
            Failure::Invalid(e.to_string())
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Invalid(e.to_string())
    }
}

type CmdResult = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::Compare(a) => cmd_compare(a),
        Command::Check(a) => cmd_check(a),
        Command::Generate(a) => cmd_generate(a),
        Command::Image(a) => cmd_image(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Invalid(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_INVALID)
        }
        Err(Failure::Internal(msg)) => {
            eprintln!("internal error: {msg}");
            ExitCode::from(EXIT_INTERNAL)
        }
        Err(Failure::Check(msg)) => {
            eprintln!("check failed: {msg}");
            ExitCode::from(EXIT_CHECK_FAILED)
        }
    }
}

fn write_output(path: Option<&Path>, text: &str) -> CmdResult {
    match path {
        Some(p) => fs::write(p, text)?,
        None => println!("{}", text.trim_end()),
    }
    Ok(())
}

fn to_json(v: &impl serde::Serialize) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("output types serialize");
    s.push('\n');
    s
}

fn cmd_solve(a: SolveArgs) -> CmdResult {
    let inst = TransportInstance::load(&a.instance)
        .map_err(|e| Failure::Invalid(format!("{}: {e}", a.instance.display())))?;
    let cfg = SolveConfig::new(a.delta)?
        .with_epsilon(a.epsilon)?
        .with_seed(a.seed)
        .with_debug_assertions(a.debug_assert);

    let sol = match solve(&inst, &cfg) {
        Ok(s) => s,
        Err(e) if e.is_internal() => {
            return Err(Failure::Internal(format!(
                "{e}\nerror: {e:?}\ninstance: {}\nconfig: {}",
                a.instance.display(),
                serde_json::to_string(&cfg).unwrap_or_default()
            )))
        }
        Err(e) => return Err(e.into()),
    };

    write_output(a.out.as_deref(), &to_json(&sol.plan.to_file(sol.cost)))?;

    if let Some(path) = &a.stats {
        let mut stats = serde_json::to_value(&sol.stats).expect("stats serialize");
        let timing = stats.as_object_mut().and_then(|m| m.remove("timing"));
        let mut doc = json!({
            "cost": sol.cost,
            "delta": cfg.delta,
            "epsilon": cfg.epsilon,
            "seed": cfg.seed,
            "stats": stats,
            "scaling": sol.scaling,
        });
        if a.timing {
            doc["timing"] = timing.unwrap_or(Value::Null);
        }
        fs::write(path, to_json(&doc))?;
    }
    eprintln!(
        "cost {} after {} phases (bound {}), seed {}",
        sol.cost, sol.stats.phases, sol.stats.phase_bound, cfg.seed
    );
    Ok(())
}

fn parse_size(s: &str) -> Result<(usize, usize), Failure> {
    let bad = || Failure::Invalid(format!("--synthetic expects NAxNB, got {s:?}"));
    let (x, y) = s.split_once('x').ok_or_else(bad)?;
    Ok((x.parse().map_err(|_| bad())?, y.parse().map_err(|_| bad())?))
}

fn cmd_compare(a: CompareArgs) -> CmdResult {
    let sources = [a.instance.is_some(), a.images.is_some(), a.synthetic.is_some()];
    if sources.iter().filter(|&&s| s).count() != 1 {
        return Err(Failure::Invalid(
            "give exactly one of an instance file, --images or --synthetic".into(),
        ));
    }
    let source = if let Some(path) = a.instance {
        InstanceSource::File(path)
    } else if let Some(imgs) = a.images {
        InstanceSource::ImagePair {
            first: imgs[0].clone(),
            second: imgs[1].clone(),
            prune_zero: a.prune_zero,
        }
    } else {
        let (n_a, n_b) = parse_size(a.synthetic.as_deref().unwrap_or_default())?;
        InstanceSource::Synthetic {
            n_a,
            n_b,
            count: a.count,
            mass: a.mass.parse::<MassProfile>()?,
            cost: a.cost.parse::<CostProfile>()?,
        }
    };
    let solvers = a
        .solvers
        .iter()
        .map(|s| s.parse::<SolverKind>())
        .collect::<Result<Vec<_>, _>>()?;

    let mut spec = ExperimentSpec::new(source, a.delta_list, solvers);
    spec.epsilon = a.epsilon;
    spec.repetitions = a.repetitions;
    spec.seed = a.seed;
    spec.debug_assertions = a.debug_assert;
    if a.eta.is_some() || a.max_iters.is_some() || a.marginal_tol.is_some() {
        let delta = spec.deltas.iter().copied().fold(f64::INFINITY, f64::min);
        spec.sinkhorn = Some(SinkhornParams::new(
            a.eta.unwrap_or(delta / 4.0),
            a.max_iters.unwrap_or(SinkhornParams::DEFAULT_MAX_ITERS),
            a.marginal_tol.unwrap_or(delta / 8.0),
        )?);
    }

    let rows = run_experiment(&spec)?;
    let mut buf = Vec::new();
    write_csv(&rows, &mut buf)?;
    write_output(a.csv.as_deref(), &String::from_utf8_lossy(&buf))?;

    eprintln!("{} rows, seed {}", rows.len(), spec.seed);
    let mut failure = None;
    for row in rows.iter().filter(|r| r.error.is_some()) {
        let msg = format!(
            "{} delta={} solver={}: {}",
            row.instance_id,
            row.delta,
            row.solver,
            row.error.as_deref().unwrap_or_default()
        );
        eprintln!("row failed: {msg}");
        if row.internal_error {
            failure = Some(Failure::Internal(msg));
        } else if failure.is_none() {
            failure = Some(Failure::Invalid(msg));
        }
    }
    failure.map_or(Ok(()), Err)
}

fn cmd_check(a: CheckArgs) -> CmdResult {
    let cfg = CheckConfig {
        size_cap: a.size_cap,
        seeds: a.seeds,
        seed: a.seed,
        deltas: a.delta_list,
        fault: a.inject_fault.then_some(Fault::DualUpdateOffByOne),
        ..CheckConfig::default()
    };
    if cfg.size_cap < 2 {
        return Err(Failure::Invalid("--size-cap must be at least 2".into()));
    }
    for &d in &cfg.deltas {
        SolveConfig::new(d)?;
    }
    eprintln!("checking {} instances from seed {}", cfg.seeds, cfg.seed);
    match run_check(&cfg) {
        Ok(report) => {
            println!("{}", to_json(&report).trim_end());
            Ok(())
        }
        Err(failure) => {
            println!("{}", to_json(&failure).trim_end());
            Err(Failure::Check(failure.to_string()))
        }
    }
}

fn cmd_generate(a: GenerateArgs) -> CmdResult {
    if a.n_a == 0 || a.n_b == 0 {
        return Err(Failure::Invalid("--n-a and --n-b must be positive".into()));
    }
    let inst = synthetic_instance(a.n_a, a.n_b, a.seed, a.mass.parse()?, a.cost.parse()?);
    write_output(a.out.as_deref(), &to_json(&inst.to_file()))?;
    eprintln!("seed {}", a.seed);
    Ok(())
}

fn cmd_image(a: ImageArgs) -> CmdResult {
    if a.width == 0 || a.height == 0 {
        return Err(Failure::Invalid("image dimensions must be positive".into()));
    }
    fs::write(&a.out, synthetic_image(a.width, a.height, a.seed).to_pgm())?;
    eprintln!("seed {}", a.seed);
    Ok(())
}
