//! Robust optimal compression control under injection uncertainty.
//!
//! Because nodal densities are monotone in the injections, a schedule that
//! keeps the two envelope trajectories (driven by the lower and upper
//! injection bounds) inside the density box keeps every injection profile
//! between them inside it too. The continuum of uncertain constraints thus
//! reduces to three simulations per schedule: lower, nominal and upper.
//!
//! Controls are piecewise constant on `N` uniform intervals per actuator.
//! Within an interval the ratio's time derivative is zero; jumps at interval
//! boundaries are not fed back into the dynamics.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::{Controls, Envelope, Injections};
use crate::network::ActuatorRatio;
use crate::refine::RefinedNetwork;
use crate::simulator::{simulate, SimError, Trajectory};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OcpError {
    #[error("invalid problem: {0}")]
    Invalid(String),
    #[error("{scenario} trajectory: {source}")]
    Simulation {
        scenario: &'static str,
        source: SimError,
    },
}

/// Per-node values given as one scalar or as a map over refined node labels
/// with a default for the rest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NodeValues {
    Scalar(f64),
    PerNode {
        default: f64,
        #[serde(default)]
        nodes: BTreeMap<String, f64>,
    },
}

impl NodeValues {
    pub fn resolve(&self, rnet: &RefinedNetwork) -> Result<Vec<f64>, OcpError> {
        match self {
            NodeValues::Scalar(v) => Ok(vec![*v; rnet.node_count()]),
            NodeValues::PerNode { default, nodes } => {
                let mut out = vec![*default; rnet.node_count()];
                for (label, &v) in nodes {
                    let j = rnet
                        .node_by_label(label)
                        .ok_or_else(|| OcpError::Invalid(format!("unknown node '{label}'")))?;
                    out[j] = v;
                }
                Ok(out)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MonotoneSign {
    Increasing,
    Decreasing,
}

/// How a running cost depends on the density.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DensityDependence {
    Independent,
    Monotone(MonotoneSign),
    NotMonotone,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "params", rename_all = "snake_case")]
pub enum RunningCost {
    /// `weight * sum_c (alpha_c - 1)^2`.
    ActuationPower { weight: f64 },
    /// `weight * |rho - reference|^2`.
    DensityTracking { weight: f64, reference: NodeValues },
    /// `weight * sum_j rho_j`; increasing in `rho` for positive weight.
    DensityLevel { weight: f64 },
    WeightedSum {
        actuation_weight: f64,
        tracking_weight: f64,
        reference: NodeValues,
    },
}

impl RunningCost {
    pub fn density_dependence(&self) -> DensityDependence {
        match *self {
            RunningCost::ActuationPower { .. } => DensityDependence::Independent,
            RunningCost::DensityTracking { weight, .. }
            | RunningCost::WeightedSum {
                tracking_weight: weight,
                ..
            } => {
                if weight == 0.0 {
                    DensityDependence::Independent
                } else {
                    DensityDependence::NotMonotone
                }
            }
            RunningCost::DensityLevel { weight } => {
                if weight > 0.0 {
                    DensityDependence::Monotone(MonotoneSign::Increasing)
                } else if weight < 0.0 {
                    DensityDependence::Monotone(MonotoneSign::Decreasing)
                } else {
                    DensityDependence::Independent
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "params", rename_all = "snake_case")]
pub enum ObjectiveSpec {
    /// Cost of the nominal trajectory.
    Nominal { cost: RunningCost },
    /// Worst-case cost over the injection band, attained on the upper
    /// (increasing cost) or lower (decreasing cost) envelope.
    MinMax { sign: MonotoneSign, cost: RunningCost },
}

impl ObjectiveSpec {
    pub fn cost(&self) -> &RunningCost {
        match self {
            ObjectiveSpec::Nominal { cost } | ObjectiveSpec::MinMax { cost, .. } => cost,
        }
    }

    /// Trajectory the objective is evaluated on.
    pub fn envelope(&self) -> Envelope {
        match self {
            ObjectiveSpec::Nominal { .. } => Envelope::Nominal,
            ObjectiveSpec::MinMax {
                sign: MonotoneSign::Increasing,
                ..
            } => Envelope::Upper,
            ObjectiveSpec::MinMax {
                sign: MonotoneSign::Decreasing,
                ..
            } => Envelope::Lower,
        }
    }

    pub fn validate(&self) -> Result<(), OcpError> {
        if let ObjectiveSpec::MinMax { sign, cost } = self {
            match cost.density_dependence() {
                DensityDependence::NotMonotone => {
                    return Err(OcpError::Invalid(
                        "min-max objective needs a cost monotone in density".into(),
                    ))
                }
                DensityDependence::Monotone(s) if s != *sign => {
                    return Err(OcpError::Invalid(format!(
                        "declared monotone sign {sign:?} does not match the cost"
                    )))
                }
                _ => {}
            }
        }
        Ok(())
    }
}

/// Initial densities of the three trajectories.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeInitial {
    pub low: Vec<f64>,
    pub nominal: Vec<f64>,
    pub high: Vec<f64>,
}

impl EnvelopeInitial {
    pub fn common(rho0: Vec<f64>) -> Self {
        Self {
            low: rho0.clone(),
            nominal: rho0.clone(),
            high: rho0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RobustOcp {
    pub rnet: RefinedNetwork,
    pub horizon: f64,
    pub intervals: usize,
    pub rho_min: Vec<f64>,
    pub rho_max: Vec<f64>,
    pub alpha_lo: f64,
    pub alpha_hi: f64,
    pub objective: ObjectiveSpec,
    /// Integrator step.
    pub step: f64,
    pub initial: EnvelopeInitial,
    /// Whether the common-initial-state default was used.
    pub default_initial: bool,
}

impl RobustOcp {
    pub fn validate(&self) -> Result<(), OcpError> {
        let n = self.rnet.node_count();
        let bad = |m: String| Err(OcpError::Invalid(m));
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return bad(format!("horizon must be positive, got {}", self.horizon));
        }
        if self.intervals == 0 {
            return bad("intervals must be at least 1".into());
        }
        if !(self.step.is_finite() && self.step > 0.0) {
            return bad(format!("step must be positive, got {}", self.step));
        }
        if self.rho_min.len() != n || self.rho_max.len() != n {
            return bad("density bounds must cover every node".into());
        }
        for j in 0..n {
            if !(self.rho_min[j] < self.rho_max[j]) {
                return bad(format!(
                    "rho_min must be below rho_max at node '{}'",
                    self.rnet.nodes()[j].label
                ));
            }
        }
        if !(self.alpha_lo > 0.0) {
            return bad(format!("alpha_lo must be positive, got {}", self.alpha_lo));
        }
        if !(self.alpha_hi >= self.alpha_lo) || !self.alpha_hi.is_finite() {
            return bad("alpha_hi must be finite and at least alpha_lo".into());
        }
        if self
            .rnet
            .base()
            .actuators
            .iter()
            .any(|a| matches!(a.ratio, ActuatorRatio::Feedback(_)))
        {
            return bad("feedback actuators cannot be scheduled".into());
        }
        self.objective.validate()?;
        let init = &self.initial;
        for v in [&init.low, &init.nominal, &init.high] {
            if v.len() != n || v.iter().any(|x| !(*x > 0.0)) {
                return bad("initial densities must be positive and cover every node".into());
            }
        }
        if (0..n).any(|j| init.low[j] > init.nominal[j] || init.nominal[j] > init.high[j]) {
            return bad("initial densities must satisfy low <= nominal <= high".into());
        }
        Ok(())
    }

    pub fn actuator_count(&self) -> usize {
        self.rnet.base().actuators.len()
    }

    pub fn interval_bounds(&self, k: usize) -> (f64, f64) {
        let dt = self.horizon / self.intervals as f64;
        let end = if k + 1 == self.intervals {
            self.horizon
        } else {
            (k + 1) as f64 * dt
        };
        (k as f64 * dt, end)
    }

    pub fn constant_schedule(&self, value: f64) -> ControlSchedule {
        ControlSchedule {
            values: vec![vec![value; self.intervals]; self.actuator_count()],
        }
    }
}

/// Piecewise-constant ratios, `values[actuator][interval]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlSchedule {
    pub values: Vec<Vec<f64>>,
}

impl ControlSchedule {
    fn flatten(&self) -> Vec<f64> {
        self.values.iter().flatten().copied().collect()
    }

    fn from_flat(x: &[f64], actuators: usize, intervals: usize) -> Self {
        Self {
            values: (0..actuators)
                .map(|a| x[a * intervals..(a + 1) * intervals].to_vec())
                .collect(),
        }
    }

    fn interval(&self, k: usize) -> Vec<f64> {
        self.values.iter().map(|v| v[k]).collect()
    }
}

fn running_cost(cost: &RunningCost, rho: &[f64], alpha: &[f64], reference: Option<&[f64]>) -> f64 {
    let power = || alpha.iter().map(|a| (a - 1.0) * (a - 1.0)).sum::<f64>();
    let tracking = || {
        let r = reference.expect("tracking reference is resolved");
        rho.iter().zip(r).map(|(x, y)| (x - y) * (x - y)).sum::<f64>()
    };
    match cost {
        RunningCost::ActuationPower { weight } => weight * power(),
        RunningCost::DensityTracking { weight, .. } => weight * tracking(),
        RunningCost::DensityLevel { weight } => weight * rho.iter().sum::<f64>(),
        RunningCost::WeightedSum {
            actuation_weight,
            tracking_weight,
            ..
        } => actuation_weight * power() + tracking_weight * tracking(),
    }
}

fn reference_of(cost: &RunningCost, rnet: &RefinedNetwork) -> Result<Option<Vec<f64>>, OcpError> {
    match cost {
        RunningCost::DensityTracking { reference, .. } | RunningCost::WeightedSum { reference, .. } => {
            reference.resolve(rnet).map(Some)
        }
        _ => Ok(None),
    }
}

/// Simulates one injection scenario under `schedule`, interval by interval.
/// Returns the joined trajectory and the integrated running cost.
pub fn simulate_schedule(
    ocp: &RobustOcp,
    schedule: &ControlSchedule,
    injections: &Injections,
    rho0: &[f64],
) -> Result<(Trajectory, f64), SimError> {
    let cost = ocp.objective.cost();
    let reference = reference_of(cost, &ocp.rnet).map_err(|e| SimError {
        time: 0.0,
        node: None,
        kind: crate::simulator::SimErrorKind::Input(e.to_string()),
    })?;
    let mut joined: Option<Trajectory> = None;
    let mut total = 0.0;
    for k in 0..ocp.intervals {
        let span = ocp.interval_bounds(k);
        let alpha = schedule.interval(k);
        let controls = Controls::constant(&alpha);
        let start = joined.as_ref().map_or(rho0, |t| t.final_state());
        let piece = simulate(&ocp.rnet, start, span, &controls, injections, ocp.step)?;
        for w in piece.samples.windows(2) {
            let dt = w[1].time - w[0].time;
            let a = running_cost(cost, &w[0].rho, &alpha, reference.as_deref());
            let b = running_cost(cost, &w[1].rho, &alpha, reference.as_deref());
            total += 0.5 * dt * (a + b);
        }
        match joined.as_mut() {
            None => joined = Some(piece),
            Some(t) => t.extend(piece),
        }
    }
    Ok((joined.expect("at least one interval"), total))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundLocation {
    pub envelope: &'static str,
    pub time: f64,
    pub node: String,
}

/// Minimum slack of the density box over both envelope trajectories.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Margins {
    /// `min (rho - rho_min)`.
    pub lower: f64,
    pub lower_at: BoundLocation,
    /// `min (rho_max - rho)`.
    pub upper: f64,
    pub upper_at: BoundLocation,
}

impl Margins {
    pub fn feasible(&self) -> bool {
        self.lower >= 0.0 && self.upper >= 0.0
    }
}

#[derive(Debug, Clone)]
pub struct RobustEvaluation {
    /// Objective on the trajectory selected by the objective spec.
    pub objective: f64,
    /// Running cost integrated on each trajectory: low, nominal, high.
    pub costs: [f64; 3],
    pub margins: Margins,
    /// Sum of squared box violations (after `backoff`) over envelope samples.
    pub violation: f64,
    pub low: Trajectory,
    pub nominal: Trajectory,
    pub high: Trajectory,
}

impl RobustEvaluation {
    pub fn feasible(&self) -> bool {
        self.margins.feasible()
    }
}

fn margins_and_violation(ocp: &RobustOcp, envelopes: [(&'static str, &Trajectory); 2], backoff: f64) -> (Margins, f64) {
    let labels = ocp.rnet.nodes();
    let mut lower = (f64::INFINITY, "low", 0.0, 0);
    let mut upper = (f64::INFINITY, "high", 0.0, 0);
    let mut violation = 0.0;
    for (name, tr) in envelopes {
        for s in &tr.samples {
            for (j, &r) in s.rho.iter().enumerate() {
                let lo = r - ocp.rho_min[j];
                let hi = ocp.rho_max[j] - r;
                if lo < lower.0 {
                    lower = (lo, name, s.time, j);
                }
                if hi < upper.0 {
                    upper = (hi, name, s.time, j);
                }
                let a = (backoff - lo).max(0.0);
                let b = (backoff - hi).max(0.0);
                violation += a * a + b * b;
            }
        }
    }
    let at = |(_, env, time, j): (f64, &'static str, f64, usize)| BoundLocation {
        envelope: env,
        time,
        node: labels[j].label.clone(),
    };
    (
        Margins {
            lower: lower.0,
            lower_at: at(lower),
            upper: upper.0,
            upper_at: at(upper),
        },
        violation,
    )
}

fn check_schedule(ocp: &RobustOcp, schedule: &ControlSchedule) -> Result<(), OcpError> {
    if schedule.values.len() != ocp.actuator_count()
        || schedule.values.iter().any(|v| v.len() != ocp.intervals)
    {
        return Err(OcpError::Invalid(format!(
            "schedule must have {} actuators x {} intervals",
            ocp.actuator_count(),
            ocp.intervals
        )));
    }
    let out = schedule
        .values
        .iter()
        .flatten()
        .any(|&a| !(a >= ocp.alpha_lo && a <= ocp.alpha_hi));
    if out {
        return Err(OcpError::Invalid("schedule outside [alpha_lo, alpha_hi]".into()));
    }
    Ok(())
}

/// Simulates the lower, nominal and upper scenarios under `schedule` and
/// evaluates the objective and the density-box margins.
pub fn evaluate_robust(ocp: &RobustOcp, schedule: &ControlSchedule) -> Result<RobustEvaluation, OcpError> {
    evaluate_with_backoff(ocp, schedule, 0.0)
}

fn evaluate_with_backoff(
    ocp: &RobustOcp,
    schedule: &ControlSchedule,
    backoff: f64,
) -> Result<RobustEvaluation, OcpError> {
    check_schedule(ocp, schedule)?;
    let run = |which: Envelope, rho0: &[f64], scenario: &'static str| {
        let inj = Injections::envelope(&ocp.rnet, which);
        simulate_schedule(ocp, schedule, &inj, rho0).map_err(|source| OcpError::Simulation { scenario, source })
    };
    let (low, c_low) = run(Envelope::Lower, &ocp.initial.low, "low")?;
    let (nominal, c_nom) = run(Envelope::Nominal, &ocp.initial.nominal, "nominal")?;
    let (high, c_high) = run(Envelope::Upper, &ocp.initial.high, "high")?;
    let objective = match ocp.objective.envelope() {
        Envelope::Lower => c_low,
        Envelope::Nominal => c_nom,
        Envelope::Upper => c_high,
    };
    let (margins, violation) = margins_and_violation(ocp, [("low", &low), ("high", &high)], backoff);
    Ok(RobustEvaluation {
        objective,
        costs: [c_low, c_nom, c_high],
        margins,
        violation,
        low,
        nominal,
        high,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerSettings {
    pub max_iters: usize,
    /// Stop when the projected gradient's max-norm falls below this.
    pub tol: f64,
    /// Initial weight of the squared-violation penalty.
    pub penalty: f64,
    /// Forward-difference step for gradients.
    pub fd_step: f64,
    /// Penalty multiplier between rounds while the result is infeasible.
    pub penalty_growth: f64,
    pub max_rounds: usize,
    /// Constraints are penalised against a box shrunk by this much, so the
    /// penalised optimum lands inside the true box.
    pub backoff: f64,
}

impl Default for OptimizerSettings {
    fn default() -> Self {
        Self {
            max_iters: 200,
            tol: 1e-8,
            penalty: 1e3,
            fd_step: 1e-6,
            penalty_growth: 10.0,
            max_rounds: 6,
            backoff: 1e-4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Converged,
    StepCollapse,
    IterationCap,
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub schedule: ControlSchedule,
    pub evaluation: RobustEvaluation,
    pub feasible: bool,
    pub iterations: usize,
    pub rounds: usize,
    pub final_penalty: f64,
    pub termination: Termination,
}

struct Penalised<'a> {
    ocp: &'a RobustOcp,
    settings: &'a OptimizerSettings,
    penalty: f64,
}

impl Penalised<'_> {
    fn value(&self, x: &[f64]) -> Result<(f64, RobustEvaluation), OcpError> {
        let sched = ControlSchedule::from_flat(x, self.ocp.actuator_count(), self.ocp.intervals);
        let ev = evaluate_with_backoff(self.ocp, &sched, self.settings.backoff)?;
        Ok((ev.objective + self.penalty * ev.violation, ev))
    }

    /// Like `value`, but a trial schedule whose simulation aborts is simply
    /// unusable rather than an error.
    fn try_value(&self, x: &[f64]) -> Result<Option<(f64, RobustEvaluation)>, OcpError> {
        match self.value(x) {
            Ok(v) => Ok(Some(v)),
            Err(OcpError::Simulation { .. }) => Ok(None),
            Err(e) => Err(e),
        }
    }

    fn gradient(&self, x: &[f64], fx: f64) -> Result<Vec<f64>, OcpError> {
        let h = self.settings.fd_step;
        let mut g = vec![0.0; x.len()];
        let mut probe = x.to_vec();
        for i in 0..x.len() {
            // step inward when the forward probe would leave the box, and
            // the other way when the first probe's simulation aborts
            let first = if x[i] + h <= self.ocp.alpha_hi { h } else { -h };
            let mut slope = None;
            for step in [first, -first] {
                if x[i] + step < self.ocp.alpha_lo || x[i] + step > self.ocp.alpha_hi {
                    continue;
                }
                probe[i] = x[i] + step;
                if let Some((f, _)) = self.try_value(&probe)? {
                    slope = Some((f - fx) / step);
                    break;
                }
            }
            probe[i] = x[i];
            g[i] = match slope {
                Some(s) => s,
                None => {
                    // both neighbours abort: surface the forward failure
                    probe[i] = x[i] + first;
                    return Err(self.value(&probe).expect_err("the probe aborted above"));
                }
            };
        }
        Ok(g)
    }
}

const NONMONOTONE_WINDOW: usize = 8;

fn project(x: &[f64], lo: f64, hi: f64) -> Vec<f64> {
    x.iter().map(|v| v.clamp(lo, hi)).collect()
}

/// Projected-gradient search on the schedule with a quadratic penalty on
/// envelope box violations. The penalty grows between rounds until the
/// iterate is feasible. Returns the best feasible schedule seen, or the
/// last iterate with `feasible = false` when none was found.
pub fn solve_robust(
    ocp: &RobustOcp,
    settings: &OptimizerSettings,
    start: Option<&ControlSchedule>,
) -> Result<SolveResult, OcpError> {
    ocp.validate()?;
    let start = start.cloned().unwrap_or_else(|| ocp.constant_schedule(1.0));
    check_schedule_shape(ocp, &start)?;
    let (lo, hi) = (ocp.alpha_lo, ocp.alpha_hi);
    let mut x = project(&start.flatten(), lo, hi);
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut record = |x: &[f64], ev: &RobustEvaluation| {
        if ev.feasible() && best.as_ref().is_none_or(|(j, _)| ev.objective < *j) {
            best = Some((ev.objective, x.to_vec()));
        }
    };

    let mut penalty = settings.penalty;
    let mut iterations = 0;
    let mut rounds = 0;
    let mut termination = Termination::IterationCap;
    for _ in 0..settings.max_rounds.max(1) {
        rounds += 1;
        let pen = Penalised { ocp, settings, penalty };
        let (mut fx, mut ev) = pen.value(&x)?;
        record(&x, &ev);
        let mut step = 1.0;
        let mut prev: Option<(Vec<f64>, Vec<f64>)> = None;
        // nonmonotone Armijo reference: worst of the last few accepted values
        let mut recent = std::collections::VecDeque::from([fx]);
        termination = Termination::IterationCap;
        for _ in 0..settings.max_iters {
            iterations += 1;
            let g = pen.gradient(&x, fx)?;
            let pg = x
                .iter()
                .zip(project(&x.iter().zip(&g).map(|(a, b)| a - b).collect::<Vec<_>>(), lo, hi))
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            if pg < settings.tol {
                termination = Termination::Converged;
                break;
            }
            // Barzilai-Borwein length from the last accepted move; the
            // penalised problem is badly scaled, plain steepest descent crawls
            if let Some((xp, gp)) = &prev {
                let (mut ss, mut sy) = (0.0, 0.0);
                for i in 0..x.len() {
                    let (si, yi) = (x[i] - xp[i], g[i] - gp[i]);
                    ss += si * si;
                    sy += si * yi;
                }
                if sy > 0.0 {
                    step = (ss / sy).clamp(1e-12, 1e12);
                }
            }
            let mut accepted = false;
            while step > 1e-16 {
                let trial = project(&x.iter().zip(&g).map(|(a, b)| a - step * b).collect::<Vec<_>>(), lo, hi);
                let decrease: f64 = x.iter().zip(&trial).zip(&g).map(|((a, b), gi)| gi * (a - b)).sum();
                let Some((ft, et)) = pen.try_value(&trial)? else {
                    step *= 0.5;
                    continue;
                };
                let reference = recent.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                if decrease > 0.0 && ft <= reference - 1e-4 * decrease {
                    prev = Some((std::mem::replace(&mut x, trial), g));
                    fx = ft;
                    if recent.len() == NONMONOTONE_WINDOW {
                        recent.pop_front();
                    }
                    recent.push_back(fx);
                    ev = et;
                    record(&x, &ev);
                    accepted = true;
                    break;
                }
                step *= 0.5;
            }
            if !accepted {
                termination = Termination::StepCollapse;
                break;
            }
        }
        if ev.feasible() {
            break;
        }
        penalty *= settings.penalty_growth;
    }

    let (feasible, xs) = match best {
        Some((_, xb)) => (true, xb),
        None => (false, x),
    };
    let schedule = ControlSchedule::from_flat(&xs, ocp.actuator_count(), ocp.intervals);
    let evaluation = evaluate_robust(ocp, &schedule)?;
    Ok(SolveResult {
        schedule,
        evaluation,
        feasible,
        iterations,
        rounds,
        final_penalty: penalty,
        termination,
    })
}

fn check_schedule_shape(ocp: &RobustOcp, s: &ControlSchedule) -> Result<(), OcpError> {
    if s.values.len() != ocp.actuator_count() || s.values.iter().any(|v| v.len() != ocp.intervals) {
        return Err(OcpError::Invalid("starting schedule has the wrong shape".into()));
    }
    Ok(())
}

/// Trajectory CSVs for the three scenarios.
pub fn envelope_csvs(rnet: &RefinedNetwork, ev: &RobustEvaluation) -> [(&'static str, String); 3] {
    let labels = rnet.labels();
    [
        ("low", ev.low.to_csv(&labels)),
        ("nominal", ev.nominal.to_csv(&labels)),
        ("high", ev.high.to_csv(&labels)),
    ]
}
