//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use ot_gt::harness::{
    image_pair_to_instance, run_experiment, synthetic_image, synthetic_instance, verify_run,
    CostProfile, ExperimentSpec, InstanceSource, MassProfile, SolverKind,
};
use ot_gt::oracle::{brute_force_enumerate, exact_transport, exact_transport_integer};
use ot_gt::scaling::scale_instance;
use ot_gt::{solve, Matrix, RunStats, SolveConfig, TransportInstance};

type Outcome = Result<String, String>;

const DELTAS: [f64; 4] = [0.5, 0.1, 0.05, 0.01];
const RANDOM_INSTANCES: u64 = 500;
const ADVERSARIAL_INSTANCES: u64 = 100;

struct RunRecord {
    delta: f64,
    max_cost: f64,
    stats: RunStats,
}

/// Shared by criteria 1 to 4: every run is made with debug assertions on.
struct SweepResults {
    records: Vec<RunRecord>,
    failures: Vec<String>,
    elapsed: Duration,
    adversarial_records: Vec<RunRecord>,
    adversarial_failures: Vec<String>,
}

fn random_instance(k: u64) -> TransportInstance {
    let n_a = 2 + (k * 7 % 29) as usize;
    let n_b = 2 + (k * 13 % 29) as usize;
    synthetic_instance(n_a, n_b, 10_000 + k, MassProfile::Random, CostProfile::Random)
}

fn adversarial_instance(k: u64) -> TransportInstance {
    let masses = [MassProfile::Concentrated, MassProfile::Surplus, MassProfile::Uniform, MassProfile::Random];
    let costs = [CostProfile::Duplicate, CostProfile::Zero, CostProfile::Constant];
    let n_a = 2 + (k * 5 % 29) as usize;
    let n_b = 2 + (k * 11 % 29) as usize;
    let mass = masses[(k % 4) as usize];
    // Every seventh instance pairs a degenerate mass profile with random costs.
    let cost = if k % 7 == 6 { CostProfile::Random } else { costs[(k % 3) as usize] };
    synthetic_instance(n_a, n_b, 20_000 + k, mass, cost)
}

fn sweep(instances: impl Iterator<Item = TransportInstance>, deltas: &[f64]) -> (Vec<RunRecord>, Vec<String>) {
    let mut records = Vec::new();
    let mut failures = Vec::new();
    for (k, inst) in instances.enumerate() {
        let optimum = match exact_transport(&inst) {
            Ok((_, c)) => c,
            Err(e) => {
                failures.push(format!("instance {k}: oracle failed: {e}"));
                continue;
            }
        };
        for &delta in deltas {
            let cfg = SolveConfig::new(delta).unwrap();
            match verify_run(&inst, &cfg, optimum) {
                Ok(sol) => records.push(RunRecord {
                    delta,
                    max_cost: inst.max_cost(),
                    stats: sol.stats,
                }),
                Err(m) => failures.push(format!("instance {k} delta {delta}: {m}")),
            }
        }
    }
    (records, failures)
}

fn run_sweeps() -> SweepResults {
    let started = Instant::now();
    let (records, failures) = sweep((0..RANDOM_INSTANCES).map(random_instance), &DELTAS);
    let elapsed = started.elapsed();
    let (adversarial_records, adversarial_failures) = sweep(
        (0..ADVERSARIAL_INSTANCES).map(adversarial_instance),
        &[0.5, 0.1, 0.05],
    );
    SweepResults {
        records,
        failures,
        elapsed,
        adversarial_records,
        adversarial_failures,
    }
}

fn criterion_1(s: &SweepResults) -> Outcome {
    let expected = RANDOM_INSTANCES as usize * DELTAS.len();
    if !s.failures.is_empty() {
        return Err(format!("{} failing runs, first: {}", s.failures.len(), s.failures[0]));
    }
    if s.records.len() != expected {
        return Err(format!("{} runs, expected {expected}", s.records.len()));
    }
    if s.elapsed > Duration::from_secs(120) {
        return Err(format!("took {:.1}s", s.elapsed.as_secs_f64()));
    }
    Ok(format!(
        "{} instances x {} deltas within optimum + delta, {:.1}s",
        RANDOM_INSTANCES,
        DELTAS.len(),
        s.elapsed.as_secs_f64()
    ))
}

fn phase_bound(max_cost: f64, delta: f64) -> u64 {
    (2.0 * max_cost / (0.5 * delta)).floor() as u64 + 1
}

fn criterion_2(s: &SweepResults) -> Outcome {
    for r in &s.records {
        let bound = phase_bound(r.max_cost, r.delta);
        if r.stats.phase_bound != bound || r.stats.phases > bound {
            return Err(format!(
                "phases {} with bound {} (expected bound {bound})",
                r.stats.phases, r.stats.phase_bound
            ));
        }
    }
    // A unit maximum cost at delta 0.1 must give a bound column of exactly 41.
    let inst = TransportInstance::from_rows(
        vec![0.5, 0.5],
        vec![0.5, 0.5],
        vec![vec![0.0, 1.0], vec![0.25, 0.5]],
    )
    .unwrap();
    let spec = ExperimentSpec::new(
        InstanceSource::Given(vec![("unit".into(), inst)]),
        vec![0.1],
        vec![SolverKind::Gt],
    );
    let rows = run_experiment(&spec).map_err(|e| e.to_string())?;
    if rows[0].phase_bound != Some(41) {
        return Err(format!("bound column {:?} at delta 0.1, expected 41", rows[0].phase_bound));
    }
    let worst = s
        .records
        .iter()
        .map(|r| r.stats.phases as f64 / r.stats.phase_bound as f64)
        .fold(0.0, f64::max);
    Ok(format!(
        "{} runs within bound, largest phases/bound {worst:.3}, bound column 41 at delta 0.1",
        s.records.len()
    ))
}

struct ImageRun {
    stats: RunStats,
    elapsed: Duration,
}

fn image_runs() -> Result<Vec<ImageRun>, String> {
    let mut out = Vec::new();
    for seed in 0..3u64 {
        let a = synthetic_image(14, 14, 2 * seed + 1);
        let b = synthetic_image(14, 14, 2 * seed + 2);
        let inst = image_pair_to_instance(&a, &b, false).map_err(|e| e.to_string())?;
        let cfg = SolveConfig::new(0.001).unwrap();
        let started = Instant::now();
        let sol = solve(&inst, &cfg).map_err(|e| e.to_string())?;
        out.push(ImageRun {
            stats: sol.stats,
            elapsed: started.elapsed(),
        });
    }
    Ok(out)
}

fn criterion_3(s: &SweepResults, images: &[ImageRun]) -> Outcome {
    for r in s.records.iter().chain(&s.adversarial_records).map(|r| &r.stats).chain(images.iter().map(|i| &i.stats)) {
        if r.sum_half_ceil > r.path_bound {
            return Err(format!("sum_half_ceil {} > bound {}", r.sum_half_ceil, r.path_bound));
        }
    }
    let report: Vec<String> = images
        .iter()
        .map(|i| {
            format!(
                "{} edges vs bound {} ({:.2e})",
                i.stats.sum_path_edges,
                i.stats.path_bound,
                i.stats.sum_path_edges as f64 / i.stats.path_bound as f64
            )
        })
        .collect();
    Ok(format!("all runs within bound; 14x14 at delta 0.001: {}", report.join("; ")))
}

fn criterion_4(s: &SweepResults) -> Outcome {
    if let Some(f) = s.failures.first() {
        return Err(format!("random sweep: {f}"));
    }
    if let Some(f) = s.adversarial_failures.first() {
        return Err(format!("adversarial: {f}"));
    }
    Ok(format!(
        "post-phase scans passed on {} random and {} adversarial runs",
        s.records.len(),
        s.adversarial_records.len()
    ))
}

fn vectors(len: usize, max: i64) -> Vec<Vec<i64>> {
    let mut out = vec![vec![]];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|v| {
                (0..=max).map(move |x| {
                    let mut w = v.clone();
                    w.push(x);
                    w
                })
            })
            .collect();
    }
    out
}

fn exhaustive(na: usize, nb: usize) -> Result<u64, String> {
    let demand_vecs = vectors(na, 3);
    let supply_vecs = vectors(nb, 3);
    let cost_vecs = vectors(na * nb, 3);
    let results: Vec<Result<u64, String>> = std::thread::scope(|scope| {
        let handles: Vec<_> = demand_vecs
            .iter()
            .map(|d| {
                let (supply_vecs, cost_vecs) = (&supply_vecs, &cost_vecs);
                scope.spawn(move || {
                    let mut count = 0;
                    let total_d: i64 = d.iter().sum();
                    for s in supply_vecs {
                        let total_s: i64 = s.iter().sum();
                        if total_s > 4 || total_s > total_d {
                            continue;
                        }
                        for c in cost_vecs {
                            let costs = Matrix::from_vec(na, nb, c.iter().map(|&x| x as f64).collect()).unwrap();
                            let exact = exact_transport_integer(d, s, &costs).map_err(|e| e.to_string())?.1;
                            let brute = brute_force_enumerate(d, s, &costs).map_err(|e| e.to_string())?;
                            if exact != brute {
                                return Err(format!("d={d:?} s={s:?} c={c:?}: {exact} != {brute}"));
                            }
                            count += 1;
                        }
                    }
                    Ok(count)
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    results.into_iter().sum()
}

fn criterion_5() -> Outcome {
    let small = exhaustive(2, 2)? + exhaustive(2, 3)?;

    let mut micro = 0;
    for k in 0..500u64 {
        let na = 1 + (k % 3) as usize;
        let nb = 1 + (k / 3 % 3) as usize;
        let inst = synthetic_instance(na, nb, 30_000 + k, MassProfile::Random, CostProfile::Random);
        let d: Vec<i64> = inst.demands().iter().map(|x| (x * 4.0).round() as i64).collect();
        let mut s: Vec<i64> = inst.supplies().iter().map(|x| (x * 4.0).floor() as i64).collect();
        while s.iter().sum::<i64>() > d.iter().sum::<i64>() {
            *s.iter_mut().find(|x| **x > 0).unwrap() -= 1;
        }
        let exact = exact_transport_integer(&d, &s, inst.costs()).map_err(|e| e.to_string())?.1;
        let brute = brute_force_enumerate(&d, &s, inst.costs()).map_err(|e| e.to_string())?;
        if (exact - brute).abs() > 1e-12 {
            return Err(format!("micro instance {k}: {exact} != {brute}"));
        }
        micro += 1;
    }

    let mut scaled_checks = 0;
    for k in 0..200u64 {
        let n_a = 2 + (k % 9) as usize;
        let n_b = 2 + (k / 9 % 9) as usize;
        let inst = synthetic_instance(n_a, n_b, 40_000 + k, MassProfile::Random, CostProfile::Random);
        let cfg = SolveConfig::new([0.5, 0.2, 0.1][(k % 3) as usize]).unwrap();
        let scaled = scale_instance(&inst, &cfg).map_err(|e| e.to_string())?;
        let (_, scaled_opt) = exact_transport_integer(&scaled.int_demands, &scaled.int_supplies, inst.costs())
            .map_err(|e| e.to_string())?;
        let (_, real_opt) = exact_transport(&inst).map_err(|e| e.to_string())?;
        let rhs = scaled.alpha * real_opt;
        if scaled_opt > rhs + 1e-9 * rhs.max(1.0) {
            return Err(format!("instance {k}: scaled optimum {scaled_opt} > alpha*optimum {rhs}"));
        }
        scaled_checks += 1;
    }
    Ok(format!(
        "{small} exhaustive and {micro} random micro-instances agree; scaled optimum <= alpha*optimum on {scaled_checks} instances"
    ))
}

fn criterion_6(images: &[ImageRun]) -> Outcome {
    for i in images {
        if i.elapsed > Duration::from_secs(60) {
            return Err(format!("took {:.1}s", i.elapsed.as_secs_f64()));
        }
        if i.stats.phases > 4001 || i.stats.phase_bound != 4001 {
            return Err(format!("phases {} with bound {}", i.stats.phases, i.stats.phase_bound));
        }
    }
    let desc: Vec<String> = images
        .iter()
        .map(|i| format!("{} phases in {:.2}s", i.stats.phases, i.elapsed.as_secs_f64()))
        .collect();
    Ok(format!("14x14 image pairs at delta 0.001: {}", desc.join(", ")))
}

fn criterion_7(images: &[ImageRun]) -> Outcome {
    let mut shares = Vec::new();
    for i in images {
        let share = i
            .stats
            .timing
            .augment_share()
            .ok_or("augmentation share not populated")?;
        if share > 0.25 {
            return Err(format!("augmentation share {:.1}%", 100.0 * share));
        }
        shares.push(format!("{:.2}%", 100.0 * share));
    }
    Ok(format!("augmentation share {}", shares.join(", ")))
}

fn criterion_8() -> Outcome {
    let mut given = Vec::new();
    for k in 0..10u64 {
        let inst = synthetic_instance(3 + k as usize, 4 + k as usize, 50_000 + k, MassProfile::Random, CostProfile::Random);
        given.push((format!("random-{k}"), inst));
    }
    let a = synthetic_image(8, 8, 7);
    let b = synthetic_image(8, 8, 8);
    given.push(("image".into(), image_pair_to_instance(&a, &b, false).map_err(|e| e.to_string())?));
    let spec = ExperimentSpec::new(
        InstanceSource::Given(given),
        vec![0.2, 0.05],
        vec![SolverKind::Gt, SolverKind::Sinkhorn],
    );
    let rows = run_experiment(&spec).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for row in rows.iter().filter(|r| r.solver == SolverKind::Sinkhorn) {
        if let Some(e) = &row.error {
            return Err(format!("{}: {e}", row.instance_id));
        }
        let dev = row.marginal_error.ok_or("marginal error missing")?;
        if dev > 1e-9 {
            return Err(format!("{}: marginal deviation {dev:e}", row.instance_id));
        }
        worst = worst.max(dev);
    }

    let mut constant = Vec::new();
    for k in 0..5u64 {
        let inst = synthetic_instance(2 + k as usize, 3 + k as usize, 60_000 + k, MassProfile::Uniform, CostProfile::Constant);
        constant.push((format!("constant-{k}"), inst));
    }
    let spec = ExperimentSpec::new(
        InstanceSource::Given(constant),
        vec![0.1],
        vec![SolverKind::Gt, SolverKind::Sinkhorn],
    );
    let rows = run_experiment(&spec).map_err(|e| e.to_string())?;
    for pair in rows.chunks(2) {
        let (gt, sk) = (pair[0].cost, pair[1].cost);
        match (gt, sk) {
            (Some(g), Some(s)) if (g - s).abs() <= 1e-9 => {}
            _ => return Err(format!("{}: gt {gt:?} vs sinkhorn {sk:?}", pair[0].instance_id)),
        }
    }
    Ok(format!(
        "rounded marginals within {worst:.1e}; constant-cost costs match on {} instances",
        rows.len() / 2
    ))
}

fn criterion_9() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let inst = synthetic_instance(10, 10, 77, MassProfile::Random, CostProfile::Random);
    let path = dir.path().join("inst.json");
    std::fs::write(&path, inst.to_json()).map_err(|e| e.to_string())?;
    let bin = env!("CARGO_BIN_EXE_ot-gt");
    let run = |tag: &str, debug: bool| -> Result<(Vec<u8>, Vec<u8>), String> {
        let plan = dir.path().join(format!("plan-{tag}.json"));
        let stats = dir.path().join(format!("stats-{tag}.json"));
        let mut cmd = Command::new(bin);
        cmd.arg("solve").arg(&path).args(["--delta", "0.05", "--seed", "3", "--out"]).arg(&plan).arg("--stats").arg(&stats);
        if debug {
            cmd.arg("--debug-assert");
        }
        let status = cmd.output().map_err(|e| e.to_string())?.status;
        if !status.success() {
            return Err(format!("solve exited with {status}"));
        }
        Ok((
            std::fs::read(&plan).map_err(|e| e.to_string())?,
            std::fs::read(&stats).map_err(|e| e.to_string())?,
        ))
    };
    let first = run("a", false)?;
    let second = run("b", false)?;
    let debug = run("c", true)?;
    if first != second {
        return Err("repeated runs differ".into());
    }
    if first.0 != debug.0 {
        return Err("debug-assert run produced a different plan".into());
    }
    Ok(format!(
        "plan ({} bytes) and stats ({} bytes) identical across runs",
        first.0.len(),
        first.1.len()
    ))
}

fn main() -> ExitCode {
    let sweeps = run_sweeps();
    let images = image_runs();
    let image_outcome = |f: &dyn Fn(&[ImageRun]) -> Outcome| match &images {
        Ok(runs) => f(runs),
        Err(e) => Err(format!("image runs failed: {e}")),
    };

    let results: Vec<(u32, &str, Outcome)> = vec![
        (1, "delta-closeness", criterion_1(&sweeps)),
        (2, "phase bound", criterion_2(&sweeps)),
        (3, "path-length bound", image_outcome(&|r| criterion_3(&sweeps, r))),
        (4, "invariant suite", criterion_4(&sweeps)),
        (5, "oracle self-consistency", criterion_5()),
        (6, "small-delta viability", image_outcome(&criterion_6)),
        (7, "augmentation share", image_outcome(&criterion_7)),
        (8, "sinkhorn baseline sanity", criterion_8()),
        (9, "determinism", criterion_9()),
    ];

    let mut failed = 0;
    for (n, name, outcome) in &results {
        match outcome {
            Ok(detail) => println!("criterion {n} ({name}): PASS: {detail}"),
            Err(reason) => {
                failed += 1;
                println!("criterion {n} ({name}): FAIL: {reason}");
            }
        }
    }
    if failed == 0 {
        println!("acceptance: all {} criteria passed", results.len());
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} of {} criteria failed", results.len());
        ExitCode::FAILURE
    }
}
