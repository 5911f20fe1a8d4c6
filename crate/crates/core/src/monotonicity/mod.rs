//! Monotonicity of the nodal dynamics with respect to injections.
//!
//! The dynamics are monotone in `q` when the state Jacobian is Metzler and
//! the injection Jacobian is non-negative. This module assembles both
//! analytically, checks them over sampled operating points, validates local
//! feedback policies and tests order propagation by direct simulation.

mod feedback;
mod order;

pub use feedback::{check_feedback_policy, FeedbackCheck, FeedbackPolicy, PolicyError, PolicyEval};
pub use order::{
    compare_trajectories, verify_order_propagation, verify_sandwich, OrderError, OrderScenario,
    OrderTestResult, SandwichResult, Violation,
};

use nalgebra::DMatrix;
use serde::Serialize;

use crate::dynamics::{self, Controls, Injections, RhsError};
use crate::refine::RefinedNetwork;

/// Default tolerance on sign checks, absorbing round-off only.
pub const DEFAULT_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct JacobianReport {
    pub time: f64,
    pub state_jacobian: DMatrix<f64>,
    /// Diagonal matrix `d rho_dot / d q`.
    pub injection_jacobian: DMatrix<f64>,
    pub metzler_ok: bool,
    /// Smallest off-diagonal entry over adjacent node pairs.
    pub min_offdiagonal: f64,
    pub nonneg_ok: bool,
    pub min_injection_entry: f64,
    /// Every non-adjacent off-diagonal entry is exactly zero.
    pub sparsity_ok: bool,
}

pub fn jacobians(
    rnet: &RefinedNetwork,
    rho: &[f64],
    t: f64,
    controls: &Controls,
) -> Result<JacobianReport, RhsError> {
    jacobians_with_tolerance(rnet, rho, t, controls, DEFAULT_TOLERANCE)
}

pub fn jacobians_with_tolerance(
    rnet: &RefinedNetwork,
    rho: &[f64],
    t: f64,
    controls: &Controls,
    tol: f64,
) -> Result<JacobianReport, RhsError> {
    // open-loop state Jacobians do not depend on q; with feedback drives the
    // network's nominal injections are used
    let inj = Injections::nominal(rnet);
    let (state, inj_diag) = dynamics::analytic_jacobians(rnet, rho, t, controls, &inj)?;
    let n = rnet.node_count();
    let mut metzler_ok = true;
    let mut sparsity_ok = true;
    let mut min_offdiagonal = f64::INFINITY;
    for j in 0..n {
        for m in 0..n {
            if j == m {
                continue;
            }
            let x = state[(j, m)];
            if x < -tol {
                metzler_ok = false;
            }
            if rnet.adjacent(j, m) {
                min_offdiagonal = min_offdiagonal.min(x);
            } else if x != 0.0 {
                sparsity_ok = false;
            }
        }
    }
    let min_injection_entry = inj_diag.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(JacobianReport {
        time: t,
        state_jacobian: state,
        injection_jacobian: DMatrix::from_diagonal(&nalgebra::DVector::from_vec(inj_diag)),
        metzler_ok,
        min_offdiagonal,
        nonneg_ok: min_injection_entry >= -tol,
        min_injection_entry,
        sparsity_ok,
    })
}

/// One operating point for the Jacobian sign checks.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplePoint {
    pub time: f64,
    pub rho: Vec<f64>,
    pub controls: Controls,
}

/// Where a Jacobian entry was found.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntryLocation {
    pub sample: usize,
    pub time: f64,
    pub row: String,
    pub col: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonotoneSummary {
    pub samples: usize,
    pub tolerance: f64,
    pub metzler_ok: bool,
    pub nonneg_ok: bool,
    pub sparsity_ok: bool,
    /// Smallest state-Jacobian entry over adjacent pairs and all samples.
    pub min_offdiagonal: f64,
    /// The most negative off-diagonal entry seen.
    pub worst_offdiagonal: Option<EntryLocation>,
    pub min_injection_entry: f64,
    pub worst_injection: Option<EntryLocation>,
    /// Samples whose evaluation failed (e.g. outside a model's domain).
    pub evaluation_errors: Vec<String>,
}

impl MonotoneSummary {
    pub fn passed(&self) -> bool {
        self.metzler_ok && self.nonneg_ok && self.sparsity_ok && self.evaluation_errors.is_empty()
    }
}

/// Evaluates the Jacobians at every sample and reports the worst entries.
/// Failures are reported in the summary, never returned as errors.
pub fn check_monotone_conditions(
    rnet: &RefinedNetwork,
    samples: &[SamplePoint],
    tol: f64,
) -> MonotoneSummary {
    let labels = rnet.labels();
    let mut s = MonotoneSummary {
        samples: samples.len(),
        tolerance: tol,
        metzler_ok: true,
        nonneg_ok: true,
        sparsity_ok: true,
        min_offdiagonal: f64::INFINITY,
        worst_offdiagonal: None,
        min_injection_entry: f64::INFINITY,
        worst_injection: None,
        evaluation_errors: Vec::new(),
    };
    let n = rnet.node_count();
    for (i, p) in samples.iter().enumerate() {
        let rep = match jacobians_with_tolerance(rnet, &p.rho, p.time, &p.controls, tol) {
            Ok(r) => r,
            Err(e) => {
                s.evaluation_errors.push(format!("sample {i}: {e}"));
                continue;
            }
        };
        s.metzler_ok &= rep.metzler_ok;
        s.nonneg_ok &= rep.nonneg_ok;
        s.sparsity_ok &= rep.sparsity_ok;
        s.min_offdiagonal = s.min_offdiagonal.min(rep.min_offdiagonal);
        for j in 0..n {
            for m in 0..n {
                if j == m {
                    continue;
                }
                let x = rep.state_jacobian[(j, m)];
                if s.worst_offdiagonal.as_ref().is_none_or(|w| x < w.value) {
                    s.worst_offdiagonal = Some(EntryLocation {
                        sample: i,
                        time: p.time,
                        row: labels[j].clone(),
                        col: labels[m].clone(),
                        value: x,
                    });
                }
            }
            let q = rep.injection_jacobian[(j, j)];
            if s.worst_injection.as_ref().is_none_or(|w| q < w.value) {
                s.worst_injection = Some(EntryLocation {
                    sample: i,
                    time: p.time,
                    row: labels[j].clone(),
                    col: labels[j].clone(),
                    value: q,
                });
            }
            s.min_injection_entry = s.min_injection_entry.min(q);
        }
    }
    s
}
