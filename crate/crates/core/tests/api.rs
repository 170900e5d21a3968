use ot_gt::harness::{image_pair_to_instance, GrayImage};
use ot_gt::oracle::exact_transport;
use ot_gt::scaling::scale_instance;
use ot_gt::sinkhorn::{round_to_feasible, sinkhorn_scale, SinkhornParams};
use ot_gt::{solve, Error, SolveConfig, TransportInstance};

#[test]
fn identity_matching_costs_nothing() {
    let inst = TransportInstance::from_rows(
        vec![0.5, 0.5],
        vec![0.5, 0.5],
        vec![vec![0.0, 1.0], vec![1.0, 0.0]],
    )
    .unwrap();
    let sol = solve(&inst, &SolveConfig::new(0.1).unwrap()).unwrap();
    assert!(sol.cost <= 0.1);
    let scaling = sol.scaling.unwrap();
    assert_eq!(scaling.alpha, 2.0 * 4.0 * 1.0 / (0.5 * 1.0 * 0.1));
}

#[test]
fn zero_cost_and_zero_supply_shortcuts() {
    let zero_cost = TransportInstance::from_rows(vec![1.0], vec![1.0], vec![vec![0.0]]).unwrap();
    let sol = solve(&zero_cost, &SolveConfig::new(0.5).unwrap()).unwrap();
    assert_eq!(sol.cost, 0.0);
    assert!(sol.scaling.is_none());

    let no_supply = TransportInstance::from_rows(vec![1.0], vec![0.0], vec![vec![3.0]]).unwrap();
    let sol = solve(&no_supply, &SolveConfig::new(0.5).unwrap()).unwrap();
    assert_eq!(sol.cost, 0.0);
    assert_eq!(sol.stats.phases, 0);
}

#[test]
fn json_round_trip_and_errors() {
    let inst = TransportInstance::from_rows(vec![1.0, 0.5], vec![1.0], vec![vec![0.25], vec![0.5]]).unwrap();
    let back = TransportInstance::from_json(&inst.to_json()).unwrap();
    assert_eq!(back.to_json(), inst.to_json());

    let err = TransportInstance::from_json(r#"{"demands":[1],"supplies":[1]}"#).unwrap_err();
    assert!(err.to_string().contains("costs"), "{err}");
    let err = TransportInstance::from_json(r#"{"demands":[1],"supplies":[2],"costs":[[0]]}"#).unwrap_err();
    assert!(matches!(err, Error::SupplyExceedsDemand { .. }));
}

#[test]
fn image_instance_solves_close_to_optimum() {
    let a = GrayImage::parse_text("0 3 1\n2 0 0\n0 0 4").unwrap();
    let b = GrayImage::parse_text("1 1 1\n0 5 0\n1 0 1").unwrap();
    let inst = image_pair_to_instance(&a, &b, false).unwrap();
    let (_, opt) = exact_transport(&inst).unwrap();
    for delta in [0.2, 0.05, 0.01] {
        let cfg = SolveConfig::new(delta).unwrap().with_debug_assertions(true);
        let sol = solve(&inst, &cfg).unwrap();
        assert!(sol.cost <= opt + delta + 1e-9);
    }
}

#[test]
fn sinkhorn_and_solver_agree_within_envelope() {
    let a = GrayImage::parse_text("1 2 0 1\n0 1 3 0").unwrap();
    let b = GrayImage::parse_text("0 0 2 2\n1 1 0 1").unwrap();
    let inst = image_pair_to_instance(&a, &b, false).unwrap();
    let delta = 0.05;
    let out = sinkhorn_scale(&inst, &SinkhornParams::defaults_for(&inst, delta)).unwrap();
    let rounded = round_to_feasible(&out.plan, inst.demands(), inst.supplies()).unwrap();
    let sk_cost = ot_gt::plan_cost(&inst, &rounded).unwrap();
    let gt = solve(&inst, &SolveConfig::new(delta).unwrap()).unwrap();
    assert!(gt.cost <= sk_cost + 2.0 * delta);
}

#[test]
fn overflow_guard_reports_input_error() {
    let inst = TransportInstance::from_rows(vec![1.0], vec![1.0], vec![vec![1.0]]).unwrap();
    let cfg = SolveConfig::new(1e-12).unwrap();
    let err = scale_instance(&inst, &cfg).unwrap_err();
    assert!(matches!(err, Error::OverflowRisk(_)));
    assert!(!err.is_internal());
}
