use flownet::dissipation::DissipationModel;
use flownet::dynamics::Injections;
use flownet::monotonicity::compare_trajectories;
use flownet::network::{Actuator, ActuatorRatio, Edge, InjectionSpec, Network, Node, Side};
use flownet::profile::TimeProfile;
use flownet::refine::refine_network;
use flownet::robust::{
    evaluate_robust, simulate_schedule, solve_robust, EnvelopeInitial, MonotoneSign, ObjectiveSpec,
    OptimizerSettings, RobustOcp, RunningCost,
};
use flownet::sampling::{random_interior_profile, SeededRng};
use rand::SeedableRng;

/// Pipe `s -> d` with a compressor at `s`; the withdrawal at `d` is uncertain
/// within `band`, and the time-varying nominal dips mid-horizon.
fn problem(band: f64, rho_min_d: f64, objective: ObjectiveSpec) -> RobustOcp {
    let nominal = TimeProfile::new(vec![(0.0, -0.4), (0.5, -0.6), (1.0, -0.5)]).unwrap();
    let spec = InjectionSpec::with_band(
        nominal.clone(),
        nominal.add(&TimeProfile::constant(-band)),
        nominal.add(&TimeProfile::constant(band)),
    );
    let net = Network::new(
        vec![
            Node { id: "s".into(), injection: Some(InjectionSpec::constant(0.5)) },
            Node { id: "m".into(), injection: None },
            Node { id: "d".into(), injection: Some(spec) },
        ],
        vec![
            Edge { id: "p".into(), from: 0, to: 1, length: 0.6, model: DissipationModel::linear(1.0) },
            Edge { id: "r".into(), from: 1, to: 2, length: 0.5, model: DissipationModel::gas(1.0, 1e-2) },
        ],
        vec![
            Actuator { edge: 0, side: Side::Plus, ratio: ActuatorRatio::Profile(TimeProfile::constant(1.0)) },
            Actuator { edge: 1, side: Side::Plus, ratio: ActuatorRatio::Profile(TimeProfile::constant(1.0)) },
        ],
        1.0,
        None,
    )
    .unwrap();
    let rnet = refine_network(&net, 0.2).unwrap();
    let n = rnet.node_count();
    let mut rho_min = vec![0.2; n];
    rho_min[rnet.node_by_label("d").unwrap()] = rho_min_d;
    RobustOcp {
        initial: EnvelopeInitial::common(vec![1.0; n]),
        rnet,
        horizon: 1.0,
        intervals: 3,
        rho_min,
        rho_max: vec![4.0; n],
        alpha_lo: 0.5,
        alpha_hi: 2.5,
        objective,
        step: 0.002,
        default_initial: true,
    }
}

fn power() -> ObjectiveSpec {
    ObjectiveSpec::Nominal { cost: RunningCost::ActuationPower { weight: 1.0 } }
}

fn interior(ocp: &RobustOcp, rng: &mut SeededRng) -> Injections {
    let spec = ocp.rnet.base().nodes[2].injection.as_ref().unwrap();
    let q = random_interior_profile(rng, spec.lower_or_nominal(), spec.upper_or_nominal(), ocp.horizon, 6);
    Injections::from_base(&ocp.rnet, vec![Some(TimeProfile::constant(0.5)), None, Some(q)])
}

#[test]
fn solved_schedule_brackets_interior_trajectories() {
    let ocp = problem(0.1, 0.6, power());
    let res = solve_robust(&ocp, &OptimizerSettings::default(), None).unwrap();
    assert!(res.feasible, "{:?}", res.evaluation.margins);
    let labels = ocp.rnet.labels();
    let mut rng = SeededRng::seed_from_u64(5);
    for _ in 0..20 {
        let inj = interior(&ocp, &mut rng);
        let (mid, _) = simulate_schedule(&ocp, &res.schedule, &inj, &ocp.initial.nominal).unwrap();
        assert!(compare_trajectories(&labels, &res.evaluation.low, &mid, 1e-9).holds);
        assert!(compare_trajectories(&labels, &mid, &res.evaluation.high, 1e-9).holds);
    }
}

#[test]
fn min_max_objective_dominates_interior_costs() {
    let obj = ObjectiveSpec::MinMax {
        sign: MonotoneSign::Increasing,
        cost: RunningCost::DensityLevel { weight: 1.0 },
    };
    let ocp = problem(0.1, 0.2, obj);
    let schedule = flownet::robust::ControlSchedule {
        values: vec![vec![1.2, 0.9, 1.4], vec![1.0, 1.3, 0.8]],
    };
    let ev = evaluate_robust(&ocp, &schedule).unwrap();
    assert_eq!(ev.objective, ev.costs[2]);
    let mut rng = SeededRng::seed_from_u64(6);
    for _ in 0..20 {
        let inj = interior(&ocp, &mut rng);
        let (_, j) = simulate_schedule(&ocp, &schedule, &inj, &ocp.initial.nominal).unwrap();
        assert!(j <= ev.objective + 1e-12, "{j} > {}", ev.objective);
        assert!(j >= ev.costs[0] - 1e-12);
    }
}

#[test]
fn tightening_the_band_never_raises_the_optimum() {
    let settings = OptimizerSettings::default();
    let mut last = f64::INFINITY;
    for band in [0.12, 0.08, 0.04, 0.0] {
        let ocp = problem(band, 0.6, power());
        let res = solve_robust(&ocp, &settings, None).unwrap();
        assert!(res.feasible, "band {band}");
        let j = res.evaluation.objective;
        assert!(j <= last + 1e-6, "band {band}: {j} > {last}");
        last = j;
    }
}

#[test]
fn solve_is_bitwise_deterministic() {
    let ocp = problem(0.1, 0.6, power());
    let a = solve_robust(&ocp, &OptimizerSettings::default(), None).unwrap();
    let b = solve_robust(&ocp, &OptimizerSettings::default(), None).unwrap();
    let bits = |s: &flownet::robust::ControlSchedule| -> Vec<u64> { s.values.iter().flatten().map(|v| v.to_bits()).collect() };
    assert_eq!(bits(&a.schedule), bits(&b.schedule));
    assert_eq!(a.evaluation.objective.to_bits(), b.evaluation.objective.to_bits());
}

#[test]
fn unreachable_bound_is_reported_infeasible() {
    let ocp = problem(0.1, 1.5, power());
    let settings = OptimizerSettings { max_iters: 40, max_rounds: 3, ..OptimizerSettings::default() };
    let res = solve_robust(&ocp, &settings, None).unwrap();
    assert!(!res.feasible);
    assert!(res.evaluation.margins.lower < 0.0);
    assert_eq!(res.evaluation.margins.lower_at.envelope, "low");
}
