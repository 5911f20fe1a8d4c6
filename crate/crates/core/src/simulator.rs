//! Fixed-step time integration of the nodal dynamics.

use serde::Serialize;
use thiserror::Error;

use crate::dynamics::{self, Controls, Injections, RhsError};
use crate::refine::RefinedNetwork;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodalState {
    pub time: f64,
    pub rho: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectoryMeta {
    pub method: &'static str,
    pub step: f64,
    pub steps: usize,
    pub epsilon: f64,
    /// Largest relative end-to-end density jump over any segment and sample.
    pub max_neighbor_contrast: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<NodalState>,
    /// Relative end-to-end density jump per sample.
    pub neighbor_contrast: Vec<f64>,
    pub meta: TrajectoryMeta,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimErrorKind {
    #[error("density {value} is not positive")]
    NonPositiveDensity { value: f64 },
    #[error("state is not finite")]
    NonFinite,
    #[error(transparent)]
    Rhs(#[from] RhsError),
    #[error("invalid input: {0}")]
    Input(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
#[error("simulation aborted at t = {time}{}: {kind}", node.as_ref().map(|n| format!(" (node '{n}')")).unwrap_or_default())]
pub struct SimError {
    pub time: f64,
    pub node: Option<String>,
    pub kind: SimErrorKind,
}

impl SimError {
    fn rhs(time: f64, e: RhsError) -> Self {
        let node = match &e {
            RhsError::Model { node, .. }
            | RhsError::Degenerate { node, .. }
            | RhsError::NonFinite { node } => Some(node.clone()),
            _ => None,
        };
        SimError {
            time,
            node,
            kind: SimErrorKind::Rhs(e),
        }
    }
}

/// Integrates from `t_span.0` to `t_span.1` with classical RK4.
///
/// The span is divided into `ceil(span / step)` equal steps, so the step used
/// may be slightly smaller than requested; `meta.step` records it. Aborts
/// as soon as any density is non-positive or non-finite.
pub fn simulate(
    rnet: &RefinedNetwork,
    rho0: &[f64],
    t_span: (f64, f64),
    controls: &Controls,
    injections: &Injections,
    step: f64,
) -> Result<Trajectory, SimError> {
    let (t0, t1) = t_span;
    let input_err = |msg: String| SimError {
        time: t0,
        node: None,
        kind: SimErrorKind::Input(msg),
    };
    if !(step.is_finite() && step > 0.0) {
        return Err(input_err(format!("step must be positive, got {step}")));
    }
    if !(t1 >= t0) || !t0.is_finite() || !t1.is_finite() {
        return Err(input_err(format!("invalid time span [{t0}, {t1}]")));
    }
    if rho0.len() != rnet.node_count() {
        return Err(input_err(format!(
            "initial state has {} entries, network has {} nodes",
            rho0.len(),
            rnet.node_count()
        )));
    }
    check_state(rnet, t0, rho0)?;

    let steps = (((t1 - t0) / step) - 1e-9).ceil().max(0.0) as usize;
    let h = if steps == 0 { 0.0 } else { (t1 - t0) / steps as f64 };
    let contrast = |t: f64, rho: &[f64]| {
        dynamics::neighbor_contrast(rnet, rho, t, controls).map_err(|e| SimError::rhs(t, e))
    };

    let mut samples = Vec::with_capacity(steps + 1);
    let mut contrasts = Vec::with_capacity(steps + 1);
    contrasts.push(contrast(t0, rho0)?);
    samples.push(NodalState {
        time: t0,
        rho: rho0.to_vec(),
    });

    let n = rho0.len();
    let mut y = rho0.to_vec();
    let mut tmp = vec![0.0; n];
    let rate = |t: f64, y: &[f64]| {
        dynamics::nodal_rhs(rnet, y, t, controls, injections).map_err(|e| SimError::rhs(t, e))
    };
    for s in 0..steps {
        let t = t0 + s as f64 * h;
        let k1 = rate(t, &y)?;
        axpy(&mut tmp, &y, 0.5 * h, &k1);
        let k2 = rate(t + 0.5 * h, &tmp)?;
        axpy(&mut tmp, &y, 0.5 * h, &k2);
        let k3 = rate(t + 0.5 * h, &tmp)?;
        axpy(&mut tmp, &y, h, &k3);
        let k4 = rate(t + h, &tmp)?;
        for i in 0..n {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        let t_next = if s + 1 == steps { t1 } else { t0 + (s + 1) as f64 * h };
        check_state(rnet, t_next, &y)?;
        contrasts.push(contrast(t_next, &y)?);
        samples.push(NodalState {
            time: t_next,
            rho: y.clone(),
        });
    }

    let max_neighbor_contrast = contrasts.iter().copied().fold(0.0, f64::max);
    Ok(Trajectory {
        samples,
        neighbor_contrast: contrasts,
        meta: TrajectoryMeta {
            method: "rk4",
            step: h,
            steps,
            epsilon: rnet.epsilon(),
            max_neighbor_contrast,
        },
    })
}

fn axpy(out: &mut [f64], y: &[f64], a: f64, k: &[f64]) {
    for ((o, yi), ki) in out.iter_mut().zip(y).zip(k) {
        *o = yi + a * ki;
    }
}

fn check_state(rnet: &RefinedNetwork, t: f64, y: &[f64]) -> Result<(), SimError> {
    for (j, &v) in y.iter().enumerate() {
        let kind = if !v.is_finite() {
            SimErrorKind::NonFinite
        } else if v <= 0.0 {
            SimErrorKind::NonPositiveDensity { value: v }
        } else {
            continue;
        };
        return Err(SimError {
            time: t,
            node: Some(rnet.nodes()[j].label.clone()),
            kind,
        });
    }
    Ok(())
}

/// Largest step for which explicit RK4 stays stable on the linearisation at
/// `(rho, t)`, from a Gershgorin bound on the Jacobian spectrum.
pub fn suggest_step(
    rnet: &RefinedNetwork,
    rho: &[f64],
    t: f64,
    controls: &Controls,
    injections: &Injections,
) -> Result<f64, RhsError> {
    let (jac, _) = dynamics::analytic_jacobians(rnet, rho, t, controls, injections)?;
    let radius = jac
        .row_iter()
        .map(|row| row.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    // RK4's real stability interval is about [-2.785, 0]
    Ok(if radius > 0.0 { 2.785 / radius } else { f64::INFINITY })
}

/// Fixed step for a run starting from `rho0`: half the RK4 stability
/// estimate at a uniform state at the peak of `rho0` (the worst case for the
/// regularised gas slope), capped at `horizon / 100`.
pub fn default_step(
    rnet: &RefinedNetwork,
    rho0: &[f64],
    controls: &Controls,
    horizon: f64,
) -> Result<f64, RhsError> {
    let cap = horizon / 100.0;
    let peak = rho0.iter().copied().fold(0.0, f64::max);
    let h = suggest_step(rnet, &vec![peak; rho0.len()], 0.0, controls, &Injections::zero(rnet))?;
    Ok((0.5 * h).min(cap))
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.time).collect()
    }

    pub fn initial_state(&self) -> &[f64] {
        &self.samples[0].rho
    }

    pub fn final_state(&self) -> &[f64] {
        &self.samples[self.samples.len() - 1].rho
    }

    pub fn node_series(&self, node: usize) -> Vec<f64> {
        self.samples.iter().map(|s| s.rho[node]).collect()
    }

    /// Continues this trajectory with `next`, which must start where this
    /// one ends. The shared sample is kept once.
    pub fn extend(&mut self, next: Trajectory) {
        let mut samples = next.samples.into_iter();
        let mut contrasts = next.neighbor_contrast.into_iter();
        samples.next();
        contrasts.next();
        self.samples.extend(samples);
        self.neighbor_contrast.extend(contrasts);
        self.meta.steps += next.meta.steps;
        self.meta.max_neighbor_contrast = self.meta.max_neighbor_contrast.max(next.meta.max_neighbor_contrast);
    }

    /// CSV with header `t,<labels>`, one row per sample, shortest
    /// round-trip float formatting.
    pub fn to_csv(&self, labels: &[String]) -> String {
        let mut out = String::from("t");
        for l in labels {
            out.push(',');
            out.push_str(l);
        }
        out.push('\n');
        for s in &self.samples {
            out.push_str(&s.time.to_string());
            for v in &s.rho {
                out.push(',');
                out.push_str(&v.to_string());
            }
            out.push('\n');
        }
        out
    }
}
