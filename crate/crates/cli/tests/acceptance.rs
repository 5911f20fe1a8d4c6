//! Acceptance gate: one line per criterion on stderr, then a single assert.
//!
//! Lines are written straight to the stderr handle so they show up even when
//! the harness captures test output.

use std::fs;
use std::io::Write;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use flownet::dissipation::DissipationModel;
use flownet::dynamics::{nodal_rhs, Controls, Injections};
use flownet::monotonicity::{
    check_feedback_policy, check_monotone_conditions, jacobians, verify_order_propagation, verify_sandwich,
    FeedbackPolicy, OrderScenario, SamplePoint, DEFAULT_TOLERANCE,
};
use flownet::network::{Actuator, ActuatorRatio, Edge, InjectionSpec, Network, Node, Side};
use flownet::profile::TimeProfile;
use flownet::refine::{refine_network, RefinedNetwork};
use flownet::robust::{
    evaluate_robust, simulate_schedule, solve_robust, EnvelopeInitial, ObjectiveSpec, OptimizerSettings, RobustOcp,
    RunningCost,
};
use flownet::sampling::{
    random_injections, random_interior_profile, random_network, random_profile, random_samples, random_state,
    ModelFamily, RandomNetworkSpec, SamplingBox, SeededRng,
};
use flownet::simulator::{default_step, simulate, suggest_step};
use rand::{Rng, SeedableRng};

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn report(id: &str, name: &str, started: Instant, budget: Duration, outcome: Outcome) -> bool {
    let took = started.elapsed();
    let (ok, detail) = match outcome {
        Ok(d) if took <= budget => (true, d),
        Ok(d) => (false, format!("{d}; over the {budget:?} budget")),
        Err(d) => (false, d),
    };
    let line = format!(
        "[{}] {id} {name}: {detail} ({:.2}s)\n",
        if ok { "PASS" } else { "FAIL" },
        took.as_secs_f64()
    );
    std::io::stderr().write_all(line.as_bytes()).unwrap();
    ok
}

fn rel_diff_inf(a: &[f64], b: &[f64]) -> f64 {
    let scale = a.iter().chain(b).fold(0.0f64, |m, x| m.max(x.abs())).max(1e-300);
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs())) / scale
}

// ---------------------------------------------------------------- 1 & 2

fn family_spec(family: ModelFamily) -> RandomNetworkSpec {
    RandomNetworkSpec {
        family,
        max_nodes: 10,
        delta: 1e-4,
        actuator_probability: 0.4,
        ..RandomNetworkSpec::default()
    }
}

/// Central finite-difference Jacobian of `nodal_rhs` in the densities, and
/// in constant injections.
fn fd_jacobians(rnet: &RefinedNetwork, p: &SamplePoint) -> (Vec<Vec<f64>>, Vec<f64>) {
    let n = rnet.node_count();
    let q0 = Injections::zero(rnet);
    let f = |rho: &[f64], q: &Injections| nodal_rhs(rnet, rho, p.time, &p.controls, q).unwrap();
    let mut state = vec![vec![0.0; n]; n];
    let mut x = p.rho.clone();
    for m in 0..n {
        let h = 1e-6 * p.rho[m].abs().max(1.0);
        x[m] = p.rho[m] + h;
        let up = f(&x, &q0);
        x[m] = p.rho[m] - h;
        let dn = f(&x, &q0);
        x[m] = p.rho[m];
        for j in 0..n {
            state[j][m] = (up[j] - dn[j]) / (2.0 * h);
        }
    }
    // the rate is affine in q: a unit injection at j shifts only row j
    let base = f(&p.rho, &q0);
    let inj = (0..n)
        .map(|j| {
            let mut per = vec![None; n];
            per[j] = Some(TimeProfile::constant(1.0));
            f(&p.rho, &Injections::new(per))[j] - base[j]
        })
        .collect();
    (state, inj)
}

struct Sampled {
    rnet: RefinedNetwork,
    points: Vec<SamplePoint>,
}

fn jacobian_sampling(family: ModelFamily, seed: u64, networks: usize, per_network: usize) -> Vec<Sampled> {
    let mut rng = SeededRng::seed_from_u64(seed);
    let spec = family_spec(family);
    (0..networks)
        .map(|_| {
            let net = random_network(&mut rng, &spec);
            let eps = rng.gen_range(0.4..1.0);
            let rnet = refine_network(&net, eps).unwrap();
            let bx = SamplingBox::for_network(&net);
            let points = random_samples(&mut rng, &rnet, &Controls::from_network(&net), &bx, per_network);
            Sampled { rnet, points }
        })
        .collect()
}

fn criterion_1() -> Outcome {
    let mut worst = 0.0f64;
    let mut count = 0;
    for (family, seed) in [(ModelFamily::Linear, 11), (ModelFamily::GasWeymouth, 12)] {
        for s in jacobian_sampling(family, seed, 20, 3) {
            for p in &s.points {
                let rep = jacobians(&s.rnet, &p.rho, p.time, &p.controls).map_err(|e| e.to_string())?;
                let (fd, fd_inj) = fd_jacobians(&s.rnet, p);
                let n = s.rnet.node_count();
                let analytic: Vec<f64> = (0..n).flat_map(|j| (0..n).map(move |m| (j, m))).map(|(j, m)| rep.state_jacobian[(j, m)]).collect();
                let numeric: Vec<f64> = fd.iter().flatten().copied().collect();
                let inj: Vec<f64> = (0..n).map(|j| rep.injection_jacobian[(j, j)]).collect();
                worst = worst.max(rel_diff_inf(&analytic, &numeric)).max(rel_diff_inf(&inj, &fd_inj));
                count += 1;
            }
        }
    }
    check(
        worst < 1e-5 && count >= 100,
        format!("{count} samples (60 per model), max relative error {worst:.2e} < 1e-5"),
    )
}

fn criterion_2() -> Outcome {
    let mut total = 0;
    let mut min_off = f64::INFINITY;
    let mut min_inj = f64::INFINITY;
    for (family, seed) in [(ModelFamily::Linear, 11), (ModelFamily::GasWeymouth, 12)] {
        for s in jacobian_sampling(family, seed, 20, 3) {
            let sum = check_monotone_conditions(&s.rnet, &s.points, DEFAULT_TOLERANCE);
            if !sum.passed() {
                return Err(format!("{family:?} sample failed: {sum:?}"));
            }
            total += sum.samples;
            min_off = min_off.min(sum.min_offdiagonal);
            min_inj = min_inj.min(sum.min_injection_entry);
        }
    }
    // planted failure
    let net = Network::new(
        vec![Node { id: "a".into(), injection: None }, Node { id: "b".into(), injection: None }],
        vec![Edge { id: "bad".into(), from: 0, to: 1, length: 1.0, model: DissipationModel::linear(-1.0) }],
        vec![],
        1.0,
        None,
    )
    .unwrap();
    let rnet = refine_network(&net, 0.3).unwrap();
    let pts = random_samples(
        &mut SeededRng::seed_from_u64(2),
        &rnet,
        &Controls::constant(&[]),
        &SamplingBox::for_network(&net),
        5,
    );
    let planted = check_monotone_conditions(&rnet, &pts, DEFAULT_TOLERANCE);
    let located = planted.worst_offdiagonal.as_ref().map(|w| (w.row.clone(), w.col.clone(), w.value));
    check(
        !planted.passed() && !planted.metzler_ok && located.as_ref().is_some_and(|l| l.2 < 0.0),
        format!(
            "{total} samples: min adjacent off-diagonal {min_off:.3e}, min injection entry {min_inj:.3e}, \
             non-adjacent entries exactly 0; planted negative beta fails at {located:?}"
        ),
    )
}

// ---------------------------------------------------------------- 3

fn criterion_3() -> Outcome {
    let mut rng = SeededRng::seed_from_u64(33);
    let spec = RandomNetworkSpec {
        max_nodes: 20,
        delta: 1e-2,
        ..RandomNetworkSpec::default()
    };
    let mut trials = 0;
    let mut worst = f64::INFINITY;
    let mut sandwiches = 0;
    for trial in 0..100 {
        let net = random_network(&mut rng, &spec);
        let rnet = refine_network(&net, 0.5).unwrap();
        let n = rnet.node_count();
        let controls = Controls::from_network(&net);
        let low = random_state(&mut rng, n, (0.8, 1.5));
        let high: Vec<f64> = low.iter().map(|x| x + rng.gen_range(0.0..0.2)).collect();
        let base = net.nodes.len();
        let q_lo: Vec<Option<TimeProfile>> =
            (0..base).map(|_| Some(random_profile(&mut rng, (-0.5, 0.5), net.horizon, 3))).collect();
        let q_hi: Vec<Option<TimeProfile>> = q_lo
            .iter()
            .map(|p| Some(p.as_ref().unwrap().add(&random_profile(&mut rng, (0.0, 0.3), net.horizon, 3))))
            .collect();
        let (inj_lo, inj_hi) = (Injections::from_base(&rnet, q_lo.clone()), Injections::from_base(&rnet, q_hi.clone()));
        // at most 100 steps: the horizon follows the step
        let h = default_step(&rnet, &high, &controls, 100.0).map_err(|e| e.to_string())?;
        let span = (0.0, 100.0 * h);
        let res = verify_order_propagation(
            &rnet,
            OrderScenario { rho0: &low, injections: &inj_lo },
            OrderScenario { rho0: &high, injections: &inj_hi },
            &controls,
            span,
            h,
            1e-9,
        )
        .map_err(|e| format!("trial {trial}: {e}"))?;
        if !res.holds {
            return Err(format!("trial {trial}: {:?}", res.first_violation));
        }
        worst = worst.min(res.margin);
        trials += 1;

        if trial < 10 {
            for _ in 0..20 {
                let mid_base: Vec<Option<TimeProfile>> = q_lo
                    .iter()
                    .zip(&q_hi)
                    .map(|(a, b)| Some(random_interior_profile(&mut rng, a.as_ref().unwrap(), b.as_ref().unwrap(), net.horizon, 4)))
                    .collect();
                let inj_mid = Injections::from_base(&rnet, mid_base);
                let s: f64 = rng.gen_range(0.0..1.0);
                let mid: Vec<f64> = low.iter().zip(&high).map(|(a, b)| a + s * (b - a)).collect();
                let sw = verify_sandwich(
                    &rnet,
                    OrderScenario { rho0: &low, injections: &inj_lo },
                    OrderScenario { rho0: &mid, injections: &inj_mid },
                    OrderScenario { rho0: &high, injections: &inj_hi },
                    &controls,
                    span,
                    h,
                    1e-9,
                )
                .map_err(|e| format!("sandwich in trial {trial}: {e}"))?;
                if !sw.holds {
                    return Err(format!("sandwich in trial {trial}: {sw:?}"));
                }
                sandwiches += 1;
            }
        }
    }
    check(
        trials == 100 && sandwiches == 200,
        format!("{trials} trials with 0 violations (min margin {worst:.3e}), {sandwiches} sandwich runs on 10 trials hold"),
    )
}

// ---------------------------------------------------------------- 4

fn criterion_4() -> Outcome {
    let mut rng = SeededRng::seed_from_u64(44);
    let spec = RandomNetworkSpec {
        max_nodes: 8,
        actuator_probability: 0.5,
        ..RandomNetworkSpec::default()
    };
    let mut runs = 0;
    let mut min_margin = f64::INFINITY;
    while runs < 20 {
        let mut net = random_network(&mut rng, &spec);
        if net.actuators.is_empty() {
            continue;
        }
        for act in &mut net.actuators {
            let policy = FeedbackPolicy::PowerLaw {
                c: rng.gen_range(0.5..2.0),
                a: rng.gen_range(-0.95..2.0),
            };
            let chk = check_feedback_policy(&policy, (0.05, 10.0), 401);
            if !chk.ok {
                return Err(format!("{policy:?} fails the positivity check: {chk:?}"));
            }
            min_margin = min_margin.min(chk.min_margin);
            act.ratio = ActuatorRatio::Feedback(policy);
        }
        net.validate().map_err(|e| e.to_string())?;
        let rnet = refine_network(&net, 0.5).unwrap();
        let rho0 = random_state(&mut rng, rnet.node_count(), (0.8, 1.5));
        let controls = Controls::from_network(&net);
        let q = random_injections(&mut rng, &rnet, (-0.3, 0.3), 2);
        let h = default_step(&rnet, &rho0, &controls, 100.0).map_err(|e| e.to_string())?;
        simulate(&rnet, &rho0, (0.0, 100.0 * h), &controls, &q, h).map_err(|e| format!("run {runs}: {e}"))?;
        runs += 1;
    }
    let inverse = check_feedback_policy(&FeedbackPolicy::PowerLaw { c: 1.0, a: -1.0 }, (0.05, 10.0), 401);
    check(
        !inverse.ok && inverse.min_margin <= 0.0,
        format!(
            "20 closed-loop runs with a in (-1, 2) completed without r_j <= 0 (min margin {min_margin:.3e}); \
             a = -1 fails with margin {}",
            inverse.min_margin
        ),
    )
}

// ---------------------------------------------------------------- 5

fn linear_network(lengths: &[f64], injections: Vec<Option<InjectionSpec>>, beta: f64) -> Network {
    let n = lengths.len() + 1;
    let mut nodes: Vec<Node> = (0..n).map(|i| Node { id: format!("n{i}"), injection: None }).collect();
    for (node, q) in nodes.iter_mut().zip(injections) {
        node.injection = q;
    }
    let edges = lengths
        .iter()
        .enumerate()
        .map(|(k, &l)| Edge { id: format!("e{k}"), from: k, to: k + 1, length: l, model: DissipationModel::linear(beta) })
        .collect();
    Network::new(nodes, edges, vec![], 1.0, None).unwrap()
}

fn criterion_5() -> Outcome {
    // (a) steady state of a single segment
    let (q, beta, l) = (0.4, 1.3, 1.0);
    let net = linear_network(&[l], vec![Some(InjectionSpec::constant(q)), Some(InjectionSpec::constant(-q))], beta);
    let rnet = refine_network(&net, 2.0).unwrap();
    let c = Controls::constant(&[]);
    let inj = Injections::nominal(&rnet);
    let traj = simulate(&rnet, &[1.0, 1.0], (0.0, 20.0), &c, &inj, 0.01).map_err(|e| e.to_string())?;
    let rho = traj.final_state();
    let balance = (beta * (rho[0] - rho[1]) / l - q).abs();
    let rate = nodal_rhs(&rnet, rho, 20.0, &c, &inj).map_err(|e| e.to_string())?;
    let residual = rate.iter().fold(0.0f64, |m, r| m.max(r.abs()));

    // (b) step halving on a refined three-node network
    let net3 = linear_network(
        &[1.0, 0.7],
        vec![Some(InjectionSpec::constant(0.3)), None, Some(InjectionSpec::constant(-0.2))],
        1.0,
    );
    let r3 = refine_network(&net3, 0.3).unwrap();
    let inj3 = Injections::nominal(&r3);
    let rho0: Vec<f64> = (0..r3.node_count()).map(|j| 1.0 + 0.3 * ((j as f64) * 1.7).sin()).collect();
    let h0 = 0.5 * suggest_step(&r3, &rho0, 0.0, &c, &inj3).map_err(|e| e.to_string())?;
    let t_end = 20.0 * h0;
    let run = |h: f64| simulate(&r3, &rho0, (0.0, t_end), &c, &inj3, h).map(|t| t.final_state().to_vec());
    let reference = run(h0 / 64.0).map_err(|e| e.to_string())?;
    let err = |h: f64| -> Result<f64, String> {
        let x = run(h).map_err(|e| e.to_string())?;
        Ok(x.iter().zip(&reference).fold(0.0f64, |m, (a, b)| m.max((a - b).abs())))
    };
    let ratio = err(h0)? / err(h0 / 2.0)?;

    // (c) epsilon halving against an eps/8 reference at the base nodes
    let eps = 0.3;
    let solve = |e: f64| -> Result<Vec<f64>, String> {
        let r = refine_network(&net3, e).unwrap();
        let rho0 = vec![1.0; r.node_count()];
        let inj = Injections::nominal(&r);
        let h = 0.5 * suggest_step(&r, &rho0, 0.0, &c, &inj).map_err(|e| e.to_string())?;
        let h = h.min(0.01);
        let t = simulate(&r, &rho0, (0.0, 0.5), &c, &inj, h).map_err(|e| e.to_string())?;
        Ok(t.final_state()[..r.base_node_count()].to_vec())
    };
    let fine = solve(eps / 8.0)?;
    let diffs: Vec<f64> = [eps, eps / 2.0, eps / 4.0]
        .iter()
        .map(|&e| solve(e).map(|x| x.iter().zip(&fine).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))))
        .collect::<Result<_, _>>()?;
    let decreasing = diffs.windows(2).all(|w| w[1] < w[0]);

    check(
        balance < 1e-8 && residual < 1e-8 && (8.0..=32.0).contains(&ratio) && decreasing,
        format!(
            "steady balance residual {balance:.1e}, rate residual {residual:.1e}; step-halving ratio {ratio:.2}; \
             eps-halving differences {:.3e} > {:.3e} > {:.3e}",
            diffs[0], diffs[1], diffs[2]
        ),
    )
}

// ---------------------------------------------------------------- 6

fn discrete_mass(rnet: &RefinedNetwork, rho: &[f64], alpha: &[f64]) -> f64 {
    rnet.edges()
        .iter()
        .map(|e| {
            let rt = e.tail_actuator.map_or(1.0, |a| alpha[a]);
            let rh = e.head_actuator.map_or(1.0, |a| alpha[a]);
            0.5 * e.length * (rt * rho[e.from] + rh * rho[e.to])
        })
        .sum()
}

fn criterion_6() -> Outcome {
    let mut net = linear_network(
        &[1.0, 0.6, 1.4],
        vec![
            Some(InjectionSpec::constant(0.0)),
            None,
            Some(InjectionSpec::constant(0.0)),
            Some(InjectionSpec::constant(0.0)),
        ],
        0.9,
    );
    net.nodes[0].injection = Some(InjectionSpec::constant(0.5));
    net.nodes[2].injection = Some(InjectionSpec {
        nominal: TimeProfile::ramp(0.0, -0.1, 1.0, -0.4).unwrap(),
        lower: None,
        upper: None,
    });
    net.nodes[3].injection = Some(InjectionSpec::constant(-0.2));
    let alpha = [1.3, 0.8];
    net.actuators = vec![
        Actuator { edge: 0, side: Side::Plus, ratio: ActuatorRatio::Profile(TimeProfile::constant(alpha[0])) },
        Actuator { edge: 2, side: Side::Minus, ratio: ActuatorRatio::Profile(TimeProfile::constant(alpha[1])) },
    ];
    net.validate().map_err(|e| e.to_string())?;
    let rnet = refine_network(&net, 0.2).unwrap();
    let c = Controls::from_network(&net);
    let inj = Injections::nominal(&rnet);
    let rho0 = rnet.initial_state(1.0);
    let h = 0.01;
    let t_end = 100.0 * h;
    let traj = simulate(&rnet, &rho0, (0.0, t_end), &c, &inj, h).map_err(|e| e.to_string())?;
    let m0 = discrete_mass(&rnet, &rho0, &alpha);
    // integral of the injections: 0.5 - 0.2 constant, ramp -0.1 -> -0.4
    let supplied = (0.5 - 0.2) * t_end + (-0.1 * t_end - 0.15 * t_end * t_end);
    let mut worst = 0.0f64;
    for s in &traj.samples {
        let t = s.time;
        let expect = m0 + (0.5 - 0.2) * t + (-0.1 * t - 0.15 * t * t);
        worst = worst.max((discrete_mass(&rnet, &s.rho, &alpha) - expect).abs() / m0);
    }
    let drift = worst / t_end;
    check(
        drift < 1e-6 && traj.meta.steps == 100,
        format!("100 steps, relative drift {drift:.2e} per unit time against {supplied:.3} supplied"),
    )
}

// ---------------------------------------------------------------- 7

fn compression_problem(rho_min_d: f64, band: f64) -> RobustOcp {
    let inj = |v: f64| {
        InjectionSpec::with_band(
            TimeProfile::constant(v),
            TimeProfile::constant(v - band),
            TimeProfile::constant(v + band),
        )
    };
    let net = Network::new(
        vec![
            Node { id: "s".into(), injection: Some(InjectionSpec::constant(0.5)) },
            Node { id: "d".into(), injection: Some(inj(-0.5)) },
        ],
        vec![Edge { id: "p".into(), from: 0, to: 1, length: 1.0, model: DissipationModel::linear(1.0) }],
        vec![Actuator { edge: 0, side: Side::Plus, ratio: ActuatorRatio::Profile(TimeProfile::constant(1.0)) }],
        1.0,
        None,
    )
    .unwrap();
    let rnet = refine_network(&net, 0.25).unwrap();
    let n = rnet.node_count();
    let mut rho_min = vec![0.1; n];
    rho_min[rnet.node_by_label("d").unwrap()] = rho_min_d;
    RobustOcp {
        initial: EnvelopeInitial::common(vec![1.0; n]),
        rnet,
        horizon: 1.0,
        intervals: 1,
        rho_min,
        rho_max: vec![5.0; n],
        alpha_lo: 0.5,
        alpha_hi: 3.0,
        objective: ObjectiveSpec::Nominal { cost: RunningCost::ActuationPower { weight: 1.0 } },
        step: 0.005,
        default_initial: true,
    }
}

fn criterion_7() -> Outcome {
    // (a) nothing binds: the identity ratio is optimal
    let mut trivial = compression_problem(0.1, 0.1);
    trivial.intervals = 4;
    let start = trivial.constant_schedule(1.4);
    let a = solve_robust(&trivial, &OptimizerSettings::default(), Some(&start)).map_err(|e| e.to_string())?;
    let dev = a.schedule.values.iter().flatten().fold(0.0f64, |m, v| m.max((v - 1.0).abs()));
    let ok_a = a.feasible && a.evaluation.objective < 1e-6 && dev < 1e-3;

    // (b) bisection oracle on a single constant ratio
    let ocp = compression_problem(0.66, 0.1);
    let feasible = |alpha: f64| evaluate_robust(&ocp, &ocp.constant_schedule(alpha)).map(|e| e.feasible());
    if feasible(1.0).map_err(|e| e.to_string())? {
        return Err("compression scenario is feasible without compression".into());
    }
    let (mut lo, mut hi) = (1.0, ocp.alpha_hi);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if feasible(mid).map_err(|e| e.to_string())? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let oracle = hi;
    let b = solve_robust(&ocp, &OptimizerSettings::default(), None).map_err(|e| e.to_string())?;
    let solved = b.schedule.values[0][0];
    let rel = (solved - oracle).abs() / oracle;
    let m = &b.evaluation.margins;
    let ok_b = b.feasible && rel < 0.02 && m.lower >= 0.0 && m.upper >= 0.0;

    // (c) interior injection profiles stay in the box under the solved schedule
    let mut rng = SeededRng::seed_from_u64(77);
    let base = ocp.rnet.base();
    let spec = base.nodes[1].injection.as_ref().unwrap();
    let mut violations = 0;
    for _ in 0..50 {
        let q_d = random_interior_profile(&mut rng, spec.lower_or_nominal(), spec.upper_or_nominal(), ocp.horizon, 5);
        let inj = Injections::from_base(&ocp.rnet, vec![Some(TimeProfile::constant(0.5)), Some(q_d)]);
        let (traj, _) = simulate_schedule(&ocp, &b.schedule, &inj, &ocp.initial.nominal).map_err(|e| e.to_string())?;
        for s in &traj.samples {
            for (j, &r) in s.rho.iter().enumerate() {
                if r < ocp.rho_min[j] || r > ocp.rho_max[j] {
                    violations += 1;
                }
            }
        }
    }
    let ok_c = violations == 0;
    check(
        ok_a && ok_b && ok_c,
        format!(
            "(a) J = {:.1e}, max |alpha - 1| = {dev:.1e}; (b) solved {solved:.5} vs bisection {oracle:.5} ({:.3}%), \
             margins ({:.2e}, {:.2e}); (c) 50 interior profiles, {violations} violations",
            a.evaluation.objective,
            100.0 * rel,
            m.lower,
            m.upper
        ),
    )
}

// ---------------------------------------------------------------- 8

const GAS: &str = r#"{
  "nodes": [
    {"id": "supply", "injection": {"nominal": [[0, 0.3], [1, 0.4]]}},
    {"id": "hub"},
    {"id": "city", "injection": {"nominal": [[0, -0.3], [1, -0.35]], "lower": [[0, -0.4], [1, -0.5]], "upper": [[0, -0.2], [1, -0.3]]}}
  ],
  "edges": [
    {"id": "a", "from": "supply", "to": "hub", "length": 1.2, "model": {"type": "gas_weymouth", "params": {"kappa": 1.0, "delta": 0.01}}},
    {"id": "b", "from": "hub", "to": "city", "length": 0.8, "model": {"type": "linear", "params": {"beta": 1.5}}}
  ],
  "actuators": [
    {"edge": "a", "side": "+", "profile": [[0, 1.0], [1, 1.3]]},
    {"edge": "b", "side": "-", "profile": {"feedback": {"type": "power_law", "params": {"c": 1.0, "a": -0.5}}}}
  ],
  "horizon": 1.0
}"#;

const PIPE: &str = r#"{
  "nodes": [
    {"id": "s", "injection": {"nominal": [[0, 0.5]]}},
    {"id": "d", "injection": {"nominal": [[0, -0.5]], "lower": [[0, -0.6]], "upper": [[0, -0.4]]}}
  ],
  "edges": [{"id": "p", "from": "s", "to": "d", "length": 1.0, "model": {"type": "linear", "params": {"beta": 1.0}}}],
  "actuators": [{"edge": "p", "side": "+", "profile": [[0, 1.0]]}],
  "horizon": 1.0
}"#;

const OCP: &str = r#"{
  "network": "pipe.json",
  "horizon": 1.0,
  "intervals": 2,
  "bounds": {"rho_min": {"default": 0.1, "nodes": {"d": 0.66}}, "rho_max": 5.0, "alpha_lo": 0.5, "alpha_hi": 3.0},
  "objective": {"type": "nominal", "params": {"cost": {"type": "actuation_power", "params": {"weight": 1.0}}}},
  "optimizer": {"max_iters": 100, "tol": 1e-8, "penalty": 1000.0, "fd_step": 1e-6},
  "discretization": {"epsilon": 0.25, "step": 0.01}
}"#;

fn run_cli(dir: &Path, args: &[&str]) -> Result<(), String> {
    let o = Command::new(env!("CARGO_BIN_EXE_flownet"))
        .current_dir(dir)
        .args(args)
        .arg("--quiet")
        .output()
        .map_err(|e| e.to_string())?;
    if o.status.success() {
        Ok(())
    } else {
        Err(format!("{args:?} exited {:?}: {}", o.status.code(), String::from_utf8_lossy(&o.stderr)))
    }
}

fn criterion_8() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let d = dir.path();
    fs::write(d.join("gas.json"), GAS).unwrap();
    fs::write(d.join("pipe.json"), PIPE).unwrap();
    fs::write(d.join("ocp.json"), OCP).unwrap();
    let mut compared = Vec::new();
    for run in ["r1", "r2"] {
        run_cli(d, &["verify", "gas.json", "--epsilon", "0.3", "--samples", "40", "--trials", "3", "--seed", "99", "--out", &format!("{run}/verify")])?;
        run_cli(d, &["optimize", "ocp.json", "--seed", "99", "--out", &format!("{run}/optimize")])?;
    }
    for file in [
        "verify/report.json",
        "verify/manifest.json",
        "optimize/solution.json",
        "optimize/envelope_low.csv",
        "optimize/envelope_nominal.csv",
        "optimize/envelope_high.csv",
        "optimize/manifest.json",
    ] {
        let a = fs::read(d.join("r1").join(file)).map_err(|e| e.to_string())?;
        let b = fs::read(d.join("r2").join(file)).map_err(|e| e.to_string())?;
        if a != b {
            return Err(format!("{file} differs between runs"));
        }
        compared.push(file);
    }
    check(true, format!("{} output files byte-identical across two runs", compared.len()))
}

#[test]
fn acceptance() {
    let criteria: [(&str, &str, u64, fn() -> Outcome); 8] = [
        ("1", "Jacobian oracle", 10, criterion_1),
        ("2", "Kamke conditions", 10, criterion_2),
        ("3", "order propagation", 60, criterion_3),
        ("4", "feedback corollary", 30, criterion_4),
        ("5", "discretization fidelity", 60, criterion_5),
        ("6", "mass accounting", 10, criterion_6),
        ("7", "robust OCP", 120, criterion_7),
        ("8", "determinism", 60, criterion_8),
    ];
    let mut failed = Vec::new();
    for (id, name, budget, f) in criteria {
        let started = Instant::now();
        if !report(id, name, started, Duration::from_secs(budget), f()) {
            failed.push(id);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
