//! Browser demo bindings. Every export takes plain numbers or a JSON string
//! and returns JSON, so the page needs no generated glue types.

use flownet::dissipation::DissipationModel;
use flownet::dynamics::{Controls, Injections};
use flownet::io::{NetworkFile, DEFAULT_INITIAL_DENSITY};
use flownet::monotonicity::{check_feedback_policy, FeedbackPolicy};
use flownet::network::{Actuator, ActuatorRatio, Edge, InjectionSpec, Network, Node, Side};
use flownet::profile::TimeProfile;
use flownet::refine::refine_network;
use flownet::robust::{solve_robust, EnvelopeInitial, ObjectiveSpec, OptimizerSettings, RobustOcp, RunningCost};
use flownet::simulator::{default_step, simulate, Trajectory};
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Samples kept per series; longer runs are thinned evenly.
const MAX_POINTS: usize = 400;

fn thin(len: usize) -> Vec<usize> {
    if len <= MAX_POINTS {
        return (0..len).collect();
    }
    let mut idx: Vec<usize> = (0..MAX_POINTS).map(|k| k * (len - 1) / (MAX_POINTS - 1)).collect();
    idx.dedup();
    idx
}

#[derive(Serialize)]
struct Series {
    times: Vec<f64>,
    labels: Vec<String>,
    /// `values[node][sample]`.
    values: Vec<Vec<f64>>,
}

fn series(traj: &Trajectory, nodes: &[usize], labels: Vec<String>) -> Series {
    let idx = thin(traj.samples.len());
    Series {
        times: idx.iter().map(|&i| traj.samples[i].time).collect(),
        labels,
        values: nodes
            .iter()
            .map(|&j| idx.iter().map(|&i| traj.samples[i].rho[j]).collect())
            .collect(),
    }
}

#[derive(Serialize)]
struct SimulationOut {
    series: Series,
    step: f64,
    steps: usize,
    refined_nodes: usize,
    max_neighbor_contrast: f64,
}

/// Simulates a network description and returns the base-node densities.
pub fn simulate_json(network: &str, epsilon: f64, t_end: f64) -> Result<String, String> {
    let file: NetworkFile = serde_json::from_str(network).map_err(|e| e.to_string())?;
    let net = file.into_network().map_err(|e| e.to_string())?;
    let rnet = refine_network(&net, epsilon).map_err(|e| e.to_string())?;
    if !(t_end.is_finite() && t_end > 0.0) {
        return Err(format!("end time must be positive, got {t_end}"));
    }
    let rho0 = rnet.initial_state(DEFAULT_INITIAL_DENSITY);
    let controls = Controls::from_network(&net);
    let h = default_step(&rnet, &rho0, &controls, t_end).map_err(|e| e.to_string())?;
    let traj = simulate(&rnet, &rho0, (0.0, t_end), &controls, &Injections::nominal(&rnet), h)
        .map_err(|e| e.to_string())?;
    let base: Vec<usize> = (0..rnet.base_node_count()).collect();
    let out = SimulationOut {
        series: series(&traj, &base, net.node_ids()),
        step: h,
        steps: traj.meta.steps,
        refined_nodes: rnet.node_count(),
        max_neighbor_contrast: traj.meta.max_neighbor_contrast,
    };
    Ok(serde_json::to_string(&out).expect("serializable"))
}

#[derive(Serialize)]
struct FeedbackOut {
    density: Vec<f64>,
    ratio: Vec<f64>,
    margin: Vec<f64>,
    ok: bool,
    min_margin: f64,
}

/// Ratio `c v^a` and positivity margin `v k' + k` over `[lo, hi]`.
pub fn feedback_json(c: f64, a: f64, lo: f64, hi: f64, points: usize) -> Result<String, String> {
    let policy = FeedbackPolicy::PowerLaw { c, a };
    policy.validate().map_err(|e| e.to_string())?;
    if !(lo > 0.0 && hi > lo) {
        return Err("need 0 < lo < hi".into());
    }
    let n = points.clamp(2, 2000);
    let density: Vec<f64> = (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect();
    let check = check_feedback_policy(&policy, (lo, hi), n);
    let out = FeedbackOut {
        ratio: density.iter().map(|&v| policy.eval(v).k).collect(),
        margin: density.iter().map(|&v| policy.margin(v)).collect(),
        density,
        ok: check.ok,
        min_margin: check.min_margin,
    };
    Ok(serde_json::to_string(&out).expect("serializable"))
}

#[derive(Serialize)]
struct RobustOut {
    feasible: bool,
    objective: f64,
    schedule: Vec<f64>,
    interval_starts: Vec<f64>,
    rho_min: f64,
    lower_margin: f64,
    low: Series,
    nominal: Series,
    high: Series,
}

/// Single pipe with an inlet compressor and an uncertain outlet withdrawal
/// `-0.5 +- band`: finds the least compression keeping the outlet above
/// `rho_min` for every withdrawal in the band.
pub fn robust_pipe_json(band: f64, rho_min: f64, intervals: usize) -> Result<String, String> {
    if !(band >= 0.0 && band < 0.5) {
        return Err("band must lie in [0, 0.5)".into());
    }
    let outlet = InjectionSpec::with_band(
        TimeProfile::constant(-0.5),
        TimeProfile::constant(-0.5 - band),
        TimeProfile::constant(-0.5 + band),
    );
    let net = Network::new(
        vec![
            Node { id: "inlet".into(), injection: Some(InjectionSpec::constant(0.5)) },
            Node { id: "outlet".into(), injection: Some(outlet) },
        ],
        vec![Edge { id: "pipe".into(), from: 0, to: 1, length: 1.0, model: DissipationModel::linear(1.0) }],
        vec![Actuator { edge: 0, side: Side::Plus, ratio: ActuatorRatio::Profile(TimeProfile::constant(1.0)) }],
        1.0,
        None,
    )
    .map_err(|e| e.to_string())?;
    let rnet = refine_network(&net, 0.25).map_err(|e| e.to_string())?;
    let n = rnet.node_count();
    let outlet_ix = 1;
    let mut lows = vec![0.05; n];
    lows[outlet_ix] = rho_min;
    let ocp = RobustOcp {
        initial: EnvelopeInitial::common(vec![1.0; n]),
        rnet,
        horizon: 1.0,
        intervals: intervals.clamp(1, 8),
        rho_min: lows,
        rho_max: vec![5.0; n],
        alpha_lo: 0.5,
        alpha_hi: 3.0,
        objective: ObjectiveSpec::Nominal { cost: RunningCost::ActuationPower { weight: 1.0 } },
        step: 0.01,
        default_initial: true,
    };
    let res = solve_robust(&ocp, &OptimizerSettings::default(), None).map_err(|e| e.to_string())?;
    let ev = &res.evaluation;
    let label = || vec!["outlet".to_string()];
    let out = RobustOut {
        feasible: res.feasible,
        objective: ev.objective,
        schedule: res.schedule.values[0].clone(),
        interval_starts: (0..ocp.intervals).map(|k| ocp.interval_bounds(k).0).collect(),
        rho_min,
        lower_margin: ev.margins.lower,
        low: series(&ev.low, &[outlet_ix], label()),
        nominal: series(&ev.nominal, &[outlet_ix], label()),
        high: series(&ev.high, &[outlet_ix], label()),
    };
    Ok(serde_json::to_string(&out).expect("serializable"))
}

#[wasm_bindgen]
pub fn simulate_network(network: &str, epsilon: f64, t_end: f64) -> Result<String, JsError> {
    simulate_json(network, epsilon, t_end).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn feedback_curve(c: f64, a: f64, lo: f64, hi: f64, points: usize) -> Result<String, JsError> {
    feedback_json(c, a, lo, hi, points).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn robust_pipe(band: f64, rho_min: f64, intervals: usize) -> Result<String, JsError> {
    robust_pipe_json(band, rho_min, intervals).map_err(|e| JsError::new(&e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thinning_keeps_endpoints() {
        let idx = thin(1001);
        assert_eq!(idx.first(), Some(&0));
        assert_eq!(idx.last(), Some(&1000));
        assert!(idx.len() <= MAX_POINTS);
    }
}
