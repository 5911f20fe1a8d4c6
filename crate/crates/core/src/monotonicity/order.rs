//! Empirical order propagation: ordered initial states and ordered
//! injections must give componentwise ordered trajectories.

use serde::Serialize;
use thiserror::Error;

use crate::dynamics::{Controls, Injections};
use crate::refine::RefinedNetwork;
use crate::simulator::{simulate, SimError, Trajectory};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OrderError {
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("{scenario} scenario: {source}")]
    Simulation {
        scenario: &'static str,
        source: SimError,
    },
}

/// Initial state and injections of one scenario.
#[derive(Debug, Clone, Copy)]
pub struct OrderScenario<'a> {
    pub rho0: &'a [f64],
    pub injections: &'a Injections,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub time: f64,
    pub node: String,
    pub low: f64,
    pub high: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderTestResult {
    pub holds: bool,
    pub first_violation: Option<Violation>,
    /// Minimum over samples and nodes of `high - low`.
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SandwichResult {
    pub holds: bool,
    /// Lower envelope against the interior trajectory.
    pub lower: OrderTestResult,
    /// Interior trajectory against the upper envelope.
    pub upper: OrderTestResult,
}

/// Compares two trajectories sampled at the same times.
pub fn compare_trajectories(
    labels: &[String],
    low: &Trajectory,
    high: &Trajectory,
    tol: f64,
) -> OrderTestResult {
    let mut margin = f64::INFINITY;
    let mut first_violation = None;
    for (a, b) in low.samples.iter().zip(&high.samples) {
        for (j, (&lo, &hi)) in a.rho.iter().zip(&b.rho).enumerate() {
            margin = margin.min(hi - lo);
            if first_violation.is_none() && lo > hi + tol {
                first_violation = Some(Violation {
                    time: a.time,
                    node: labels[j].clone(),
                    low: lo,
                    high: hi,
                });
            }
        }
    }
    OrderTestResult {
        holds: margin >= -tol,
        first_violation,
        margin,
    }
}

fn check_ordered(
    rnet: &RefinedNetwork,
    low: &OrderScenario,
    high: &OrderScenario,
    t_span: (f64, f64),
    step: f64,
) -> Result<(), OrderError> {
    for (j, (a, b)) in low.rho0.iter().zip(high.rho0).enumerate() {
        if a > b {
            return Err(OrderError::Precondition(format!(
                "initial density at '{}' is {a} in the low scenario and {b} in the high one",
                rnet.nodes()[j].label
            )));
        }
    }
    // every time the integrator can evaluate the injections at
    let steps = (((t_span.1 - t_span.0) / step) - 1e-9).ceil().max(0.0) as usize;
    let h = (t_span.1 - t_span.0) / (steps.max(1) as f64);
    for s in 0..=2 * steps {
        let t = t_span.0 + 0.5 * h * s as f64;
        for j in 0..rnet.node_count() {
            let (a, b) = (low.injections.value(j, t), high.injections.value(j, t));
            if a > b {
                return Err(OrderError::Precondition(format!(
                    "injection at '{}' is {a} > {b} at t = {t}",
                    rnet.nodes()[j].label
                )));
            }
        }
    }
    Ok(())
}

fn run(
    rnet: &RefinedNetwork,
    sc: &OrderScenario,
    controls: &Controls,
    t_span: (f64, f64),
    step: f64,
    scenario: &'static str,
) -> Result<Trajectory, OrderError> {
    simulate(rnet, sc.rho0, t_span, controls, sc.injections, step)
        .map_err(|source| OrderError::Simulation { scenario, source })
}

/// Simulates both scenarios under identical controls and integrator settings
/// and checks `low <= high + tol` at every sample.
pub fn verify_order_propagation(
    rnet: &RefinedNetwork,
    low: OrderScenario,
    high: OrderScenario,
    controls: &Controls,
    t_span: (f64, f64),
    step: f64,
    tol: f64,
) -> Result<OrderTestResult, OrderError> {
    check_ordered(rnet, &low, &high, t_span, step)?;
    let a = run(rnet, &low, controls, t_span, step, "low")?;
    let b = run(rnet, &high, controls, t_span, step, "high")?;
    Ok(compare_trajectories(&rnet.labels(), &a, &b, tol))
}

/// Checks that the trajectory of `mid` stays between those of `low` and
/// `high`.
#[allow(clippy::too_many_arguments)]
pub fn verify_sandwich(
    rnet: &RefinedNetwork,
    low: OrderScenario,
    mid: OrderScenario,
    high: OrderScenario,
    controls: &Controls,
    t_span: (f64, f64),
    step: f64,
    tol: f64,
) -> Result<SandwichResult, OrderError> {
    check_ordered(rnet, &low, &mid, t_span, step)?;
    check_ordered(rnet, &mid, &high, t_span, step)?;
    let a = run(rnet, &low, controls, t_span, step, "low")?;
    let m = run(rnet, &mid, controls, t_span, step, "interior")?;
    let b = run(rnet, &high, controls, t_span, step, "high")?;
    let labels = rnet.labels();
    let lower = compare_trajectories(&labels, &a, &m, tol);
    let upper = compare_trajectories(&labels, &m, &b, tol);
    Ok(SandwichResult {
        holds: lower.holds && upper.holds,
        lower,
        upper,
    })
}
