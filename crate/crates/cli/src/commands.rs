use std::path::{Path, PathBuf};

use flownet::dynamics::{Controls, Envelope, Injections};
use flownet::io::{load_network, IoError, OcpFile, RefinedNetworkFile, DEFAULT_INITIAL_DENSITY};
use flownet::monotonicity::{
    check_feedback_policy, check_monotone_conditions, verify_order_propagation, FeedbackCheck, MonotoneSummary,
    OrderScenario, OrderTestResult, DEFAULT_TOLERANCE,
};
use flownet::network::{ActuatorRatio, Network, Side};
use flownet::refine::{refine_network, RefinedNetwork};
use flownet::robust::{envelope_csvs, solve_robust, Margins, OcpError, Termination};
use flownet::sampling::{add_injections, random_injections, random_samples, random_state, SamplingBox, SeededRng};
use flownet::simulator::{default_step, simulate, SimError};
use rand::SeedableRng;
use serde::Serialize;
use serde_json::json;

use crate::output::OutDir;
use crate::{Cli, Command, OptimizeArgs, RefineArgs, Scenario, SimulateArgs, VerifyArgs};

pub const EXIT_INVALID_FILE: i32 = 2;
pub const EXIT_CONSTRAINT: i32 = 3;
pub const EXIT_SIM_ABORT: i32 = 4;
pub const EXIT_VERIFY_FAIL: i32 = 5;
pub const EXIT_INFEASIBLE: i32 = 6;

/// Tolerance on componentwise order in the propagation trials.
const ORDER_TOLERANCE: f64 = 1e-9;
/// Density grid size for feedback positivity checks.
const FEEDBACK_GRID: usize = 401;

#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }

    pub fn io(path: &Path, e: std::io::Error) -> Self {
        // an unwritable output is as fatal as an unreadable input
        Self::new(EXIT_INVALID_FILE, format!("cannot write '{}': {e}", path.display()))
    }
}

impl From<IoError> for Failure {
    fn from(e: IoError) -> Self {
        let code = if e.is_invalid_file() {
            EXIT_INVALID_FILE
        } else {
            EXIT_CONSTRAINT
        };
        Self::new(code, e.to_string())
    }
}

impl From<OcpError> for Failure {
    fn from(e: OcpError) -> Self {
        let code = match e {
            OcpError::Invalid(_) => EXIT_CONSTRAINT,
            OcpError::Simulation { .. } => EXIT_SIM_ABORT,
        };
        Self::new(code, e.to_string())
    }
}

pub fn run(cli: &Cli) -> Result<String, Failure> {
    match &cli.command {
        Command::Refine(a) => refine(cli, a),
        Command::Simulate(a) => simulate_cmd(cli, a),
        Command::Verify(a) => verify(cli, a),
        Command::Optimize(a) => optimize(cli, a),
    }
}

fn load_refined(path: &Path, epsilon: f64) -> Result<RefinedNetwork, Failure> {
    let net = load_network(path)?;
    refine_network(&net, epsilon).map_err(|e| Failure::from(IoError::from(e)))
}

fn actuator_name(net: &Network, i: usize) -> String {
    let a = &net.actuators[i];
    let side = match a.side {
        Side::Plus => "+",
        Side::Minus => "-",
    };
    format!("{}:{side}", net.edges[a.edge].id)
}

fn refine(cli: &Cli, a: &RefineArgs) -> Result<String, Failure> {
    let rnet = load_refined(&a.network, a.epsilon)?;
    let mut out = OutDir::create(&cli.out)?;
    out.write_json("refined.json", &RefinedNetworkFile::new(&rnet))?;
    out.finish("refine", vec![a.network.clone()], cli.seed, json!({ "epsilon": a.epsilon }))?;
    Ok(format!(
        "refined {} edges into {} segments ({} nodes)",
        rnet.base().edges.len(),
        rnet.edge_count(),
        rnet.node_count()
    ))
}

#[derive(Debug, Serialize)]
struct AbortReport {
    time: f64,
    node: Option<String>,
    reason: String,
}

impl From<&SimError> for AbortReport {
    fn from(e: &SimError) -> Self {
        Self {
            time: e.time,
            node: e.node.clone(),
            reason: e.kind.to_string(),
        }
    }
}

#[derive(Debug, Serialize)]
struct SimulationReport {
    status: &'static str,
    scenario: Scenario,
    method: &'static str,
    epsilon: f64,
    step: f64,
    steps: usize,
    t_end: f64,
    nodes: Vec<String>,
    /// Largest relative density jump across a segment over the run.
    max_neighbor_contrast: Option<f64>,
    /// Nodes without an injection profile, run with `q = 0`.
    zero_injection_nodes: Vec<String>,
    default_initial_density: f64,
    abort: Option<AbortReport>,
}

fn simulate_cmd(cli: &Cli, a: &SimulateArgs) -> Result<String, Failure> {
    let rnet = load_refined(&a.network, a.epsilon)?;
    let t_end = a.t_end.unwrap_or(rnet.base().horizon);
    if !(t_end.is_finite() && t_end > 0.0) {
        return Err(Failure::new(EXIT_CONSTRAINT, format!("t-end must be positive, got {t_end}")));
    }
    if let Some(h) = a.step {
        if !(h.is_finite() && h > 0.0) {
            return Err(Failure::new(EXIT_CONSTRAINT, format!("step must be positive, got {h}")));
        }
    }
    let rho0 = rnet.initial_state(DEFAULT_INITIAL_DENSITY);
    let controls = Controls::from_network(rnet.base());
    let which = match a.scenario {
        Scenario::Nominal => Envelope::Nominal,
        Scenario::Lower => Envelope::Lower,
        Scenario::Upper => Envelope::Upper,
    };
    let injections = Injections::envelope(&rnet, which);
    let step = match a.step {
        Some(h) => Ok(h),
        None => default_step(&rnet, &rho0, &controls, t_end).map_err(|e| SimError {
            time: 0.0,
            node: None,
            kind: e.into(),
        }),
    };
    let result = step.and_then(|h| simulate(&rnet, &rho0, (0.0, t_end), &controls, &injections, h).map(|t| (h, t)));

    let labels = rnet.labels();
    let mut report = SimulationReport {
        status: "ok",
        scenario: a.scenario,
        method: "rk4",
        epsilon: a.epsilon,
        step: a.step.unwrap_or(f64::NAN),
        steps: 0,
        t_end,
        nodes: labels.clone(),
        max_neighbor_contrast: None,
        zero_injection_nodes: rnet.base().nodes_without_injection(),
        default_initial_density: DEFAULT_INITIAL_DENSITY,
        abort: None,
    };
    let mut out = OutDir::create(&cli.out)?;
    let outcome = match &result {
        Ok((h, traj)) => {
            report.step = *h;
            report.steps = traj.meta.steps;
            report.max_neighbor_contrast = Some(traj.meta.max_neighbor_contrast);
            out.write("trajectory.csv", &traj.to_csv(&labels))?;
            Ok(format!(
                "simulated {} nodes to t = {t_end} in {} steps",
                rnet.node_count(),
                traj.meta.steps
            ))
        }
        Err(e) => {
            report.status = "aborted";
            report.abort = Some(e.into());
            Err(Failure::new(EXIT_SIM_ABORT, e.to_string()))
        }
    };
    if report.step.is_nan() {
        report.step = 0.0;
    }
    out.write_json("report.json", &report)?;
    out.finish(
        "simulate",
        vec![a.network.clone()],
        cli.seed,
        json!({
            "epsilon": a.epsilon,
            "t_end": t_end,
            "step": report.step,
            "scenario": a.scenario,
        }),
    )?;
    outcome
}

#[derive(Debug, Serialize)]
struct FeedbackReport {
    actuator: String,
    #[serde(flatten)]
    check: FeedbackCheck,
}

#[derive(Debug, Serialize)]
struct TrialReport {
    trial: usize,
    step: f64,
    holds: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    result: Option<OrderTestResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

#[derive(Debug, Serialize)]
struct VerifyReport {
    passed: bool,
    seed: u64,
    epsilon: f64,
    nodes: usize,
    sampling: SamplingBox,
    jacobian: MonotoneSummary,
    feedback: Vec<FeedbackReport>,
    order_tolerance: f64,
    order_trials: Vec<TrialReport>,
}

fn verify(cli: &Cli, a: &VerifyArgs) -> Result<String, Failure> {
    let rnet = load_refined(&a.network, a.epsilon)?;
    let net = rnet.base();
    let mut rng = SeededRng::seed_from_u64(cli.seed);
    let bx = SamplingBox::for_network(net);
    let controls = Controls::from_network(net);

    let samples = random_samples(&mut rng, &rnet, &controls, &bx, a.samples);
    let jacobian = check_monotone_conditions(&rnet, &samples, DEFAULT_TOLERANCE);

    let feedback: Vec<FeedbackReport> = net
        .actuators
        .iter()
        .enumerate()
        .filter_map(|(i, act)| match &act.ratio {
            ActuatorRatio::Feedback(p) => Some(FeedbackReport {
                actuator: actuator_name(net, i),
                check: check_feedback_policy(p, bx.density, FEEDBACK_GRID),
            }),
            ActuatorRatio::Profile(_) => None,
        })
        .collect();

    let n = rnet.node_count();
    let q_low = Injections::nominal(&rnet);
    let order_trials: Vec<TrialReport> = (0..a.trials)
        .map(|trial| {
            let low = random_state(&mut rng, n, bx.density);
            let offset = random_state(&mut rng, n, (0.0, 0.2));
            let high: Vec<f64> = low.iter().zip(&offset).map(|(x, d)| x + d).collect();
            let q_high = add_injections(&q_low, &random_injections(&mut rng, &rnet, (0.0, 0.5), 3));
            let step = match default_step(&rnet, &high, &controls, net.horizon) {
                Ok(h) => h,
                Err(e) => {
                    return TrialReport {
                        trial,
                        step: 0.0,
                        holds: false,
                        result: None,
                        error: Some(e.to_string()),
                    }
                }
            };
            let res = verify_order_propagation(
                &rnet,
                OrderScenario { rho0: &low, injections: &q_low },
                OrderScenario { rho0: &high, injections: &q_high },
                &controls,
                (0.0, net.horizon),
                step,
                ORDER_TOLERANCE,
            );
            match res {
                Ok(r) => TrialReport {
                    trial,
                    step,
                    holds: r.holds,
                    result: Some(r),
                    error: None,
                },
                Err(e) => TrialReport {
                    trial,
                    step,
                    holds: false,
                    result: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();

    let passed =
        jacobian.passed() && feedback.iter().all(|f| f.check.ok) && order_trials.iter().all(|t| t.holds);
    let report = VerifyReport {
        passed,
        seed: cli.seed,
        epsilon: a.epsilon,
        nodes: n,
        sampling: bx,
        jacobian,
        feedback,
        order_tolerance: ORDER_TOLERANCE,
        order_trials,
    };
    let mut out = OutDir::create(&cli.out)?;
    out.write_json("report.json", &report)?;
    out.finish(
        "verify",
        vec![a.network.clone()],
        cli.seed,
        json!({ "epsilon": a.epsilon, "samples": a.samples, "trials": a.trials }),
    )?;
    if passed {
        Ok(format!(
            "monotone: {} samples, {} feedback policies, {} order trials passed",
            a.samples,
            report.feedback.len(),
            a.trials
        ))
    } else {
        let mut why = Vec::new();
        if !report.jacobian.passed() {
            match &report.jacobian.worst_offdiagonal {
                Some(w) if !report.jacobian.metzler_ok => why.push(format!(
                    "Metzler condition fails: d({})/d({}) = {:e} at t = {}",
                    w.row, w.col, w.value, w.time
                )),
                _ => why.push("Jacobian sign check fails".to_string()),
            }
        }
        if report.feedback.iter().any(|f| !f.check.ok) {
            why.push("a feedback policy fails the positivity check".into());
        }
        let bad = report.order_trials.iter().filter(|t| !t.holds).count();
        if bad > 0 {
            why.push(format!("{bad} order trial(s) failed"));
        }
        Err(Failure::new(EXIT_VERIFY_FAIL, why.join("; ")))
    }
}

#[derive(Debug, Serialize)]
struct ActuatorSchedule {
    actuator: String,
    node: String,
    values: Vec<f64>,
}

#[derive(Debug, Serialize)]
struct Solution {
    feasible: bool,
    objective: f64,
    costs: serde_json::Value,
    margins: Margins,
    violations: Vec<String>,
    interval_starts: Vec<f64>,
    schedule: Vec<ActuatorSchedule>,
    iterations: usize,
    rounds: usize,
    final_penalty: f64,
    termination: Termination,
    step: f64,
    epsilon: f64,
    notes: Vec<String>,
}

fn optimize(cli: &Cli, a: &OptimizeArgs) -> Result<String, Failure> {
    let file = OcpFile::read(&a.problem)?;
    let base_dir = a.problem.parent().map(Path::to_path_buf).unwrap_or_default();
    let loaded = file.load(&base_dir)?;
    let ocp = &loaded.ocp;
    let res = solve_robust(ocp, &loaded.settings, None)?;
    let net = ocp.rnet.base();
    let ev = &res.evaluation;

    let mut violations = Vec::new();
    let m = &ev.margins;
    if m.lower < 0.0 {
        violations.push(format!(
            "rho_min exceeded by {:e} at node '{}', t = {} ({} envelope)",
            -m.lower, m.lower_at.node, m.lower_at.time, m.lower_at.envelope
        ));
    }
    if m.upper < 0.0 {
        violations.push(format!(
            "rho_max exceeded by {:e} at node '{}', t = {} ({} envelope)",
            -m.upper, m.upper_at.node, m.upper_at.time, m.upper_at.envelope
        ));
    }
    let mut notes = vec!["uncertainty regions are single intervals [lower, upper] per node".to_string()];
    if ocp.default_initial {
        notes.push("low, nominal and high trajectories start from the same initial state".into());
    }
    let solution = Solution {
        feasible: res.feasible,
        objective: ev.objective,
        costs: json!({ "low": ev.costs[0], "nominal": ev.costs[1], "high": ev.costs[2] }),
        margins: ev.margins.clone(),
        violations,
        interval_starts: (0..ocp.intervals).map(|k| ocp.interval_bounds(k).0).collect(),
        schedule: res
            .schedule
            .values
            .iter()
            .enumerate()
            .map(|(i, v)| ActuatorSchedule {
                actuator: actuator_name(net, i),
                node: net.nodes[net.actuators[i].node(net)].id.clone(),
                values: v.clone(),
            })
            .collect(),
        iterations: res.iterations,
        rounds: res.rounds,
        final_penalty: res.final_penalty,
        termination: res.termination,
        step: ocp.step,
        epsilon: ocp.rnet.epsilon(),
        notes,
    };
    let mut out = OutDir::create(&cli.out)?;
    out.write_json("solution.json", &solution)?;
    for (name, csv) in envelope_csvs(&ocp.rnet, ev) {
        out.write(&format!("envelope_{name}.csv"), &csv)?;
    }
    let inputs: Vec<PathBuf> = vec![a.problem.clone(), loaded.network_path.clone()];
    out.finish(
        "optimize",
        inputs,
        cli.seed,
        json!({ "problem": file, "step": ocp.step }),
    )?;
    if res.feasible {
        Ok(format!(
            "feasible schedule, J = {}, margins ({}, {})",
            ev.objective, m.lower, m.upper
        ))
    } else {
        Err(Failure::new(
            EXIT_INFEASIBLE,
            format!("no feasible schedule found: {}", solution.violations.join("; ")),
        ))
    }
}
