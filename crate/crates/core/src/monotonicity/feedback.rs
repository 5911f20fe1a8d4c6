//! Local feedback policies `ratio = k(rho)` for compression actuators.
//!
//! A policy preserves monotonicity of the nodal dynamics when
//! `v k'(v) + k(v) > 0` on the density range of interest.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PolicyError {
    #[error("tabulated policy needs at least one point")]
    EmptyTable,
    #[error("tabulated policy densities must be strictly increasing (index {0})")]
    TableOrder(usize),
    #[error("policy parameters must be finite")]
    NonFinite,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "params", rename_all = "snake_case")]
pub enum FeedbackPolicy {
    Constant { c: f64 },
    /// `k(v) = c v^a`.
    PowerLaw { c: f64, a: f64 },
    /// Cubic Hermite interpolation through `[density, value, slope]` rows,
    /// held constant beyond the first and last rows.
    Tabulated { points: Vec<[f64; 3]> },
}

/// `k`, `k'` and `k''` at one density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolicyEval {
    pub k: f64,
    pub dk: f64,
    pub d2k: f64,
}

impl FeedbackPolicy {
    pub fn validate(&self) -> Result<(), PolicyError> {
        match self {
            FeedbackPolicy::Constant { c } => finite(&[*c]),
            FeedbackPolicy::PowerLaw { c, a } => finite(&[*c, *a]),
            FeedbackPolicy::Tabulated { points } => {
                if points.is_empty() {
                    return Err(PolicyError::EmptyTable);
                }
                for (i, p) in points.iter().enumerate() {
                    finite(p)?;
                    if i > 0 && p[0] <= points[i - 1][0] {
                        return Err(PolicyError::TableOrder(i));
                    }
                }
                Ok(())
            }
        }
    }

    pub fn eval(&self, v: f64) -> PolicyEval {
        match self {
            FeedbackPolicy::Constant { c } => PolicyEval { k: *c, dk: 0.0, d2k: 0.0 },
            FeedbackPolicy::PowerLaw { c, a } => {
                let k = c * v.powf(*a);
                PolicyEval {
                    k,
                    dk: c * a * v.powf(a - 1.0),
                    d2k: c * a * (a - 1.0) * v.powf(a - 2.0),
                }
            }
            FeedbackPolicy::Tabulated { points } => hermite(points, v),
        }
    }

    /// `v k'(v) + k(v)`, the local positivity margin.
    pub fn margin(&self, v: f64) -> f64 {
        match self {
            // closed form, exact zero at a = -1
            FeedbackPolicy::PowerLaw { c, a } => c * (a + 1.0) * v.powf(*a),
            _ => {
                let e = self.eval(v);
                v * e.dk + e.k
            }
        }
    }
}

fn finite(xs: &[f64]) -> Result<(), PolicyError> {
    if xs.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(PolicyError::NonFinite)
    }
}

fn hermite(points: &[[f64; 3]], v: f64) -> PolicyEval {
    let first = points[0];
    let last = points[points.len() - 1];
    if points.len() == 1 || v <= first[0] {
        return PolicyEval { k: first[1], dk: 0.0, d2k: 0.0 };
    }
    if v >= last[0] {
        return PolicyEval { k: last[1], dk: 0.0, d2k: 0.0 };
    }
    let i = points.partition_point(|p| p[0] <= v);
    let [x0, y0, m0] = points[i - 1];
    let [x1, y1, m1] = points[i];
    let h = x1 - x0;
    let s = (v - x0) / h;
    let (s2, s3) = (s * s, s * s * s);
    let k = (2.0 * s3 - 3.0 * s2 + 1.0) * y0
        + (s3 - 2.0 * s2 + s) * h * m0
        + (-2.0 * s3 + 3.0 * s2) * y1
        + (s3 - s2) * h * m1;
    let dk = ((6.0 * s2 - 6.0 * s) * y0
        + (3.0 * s2 - 4.0 * s + 1.0) * h * m0
        + (-6.0 * s2 + 6.0 * s) * y1
        + (3.0 * s2 - 2.0 * s) * h * m1)
        / h;
    let d2k = ((12.0 * s - 6.0) * y0
        + (6.0 * s - 4.0) * h * m0
        + (-12.0 * s + 6.0) * y1
        + (6.0 * s - 2.0) * h * m1)
        / (h * h);
    PolicyEval { k, dk, d2k }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeedbackCheck {
    pub ok: bool,
    /// Smallest `v k'(v) + k(v)` on the grid.
    pub min_margin: f64,
    pub at_density: f64,
    /// Smallest `k(v)` on the grid.
    pub min_value: f64,
}

/// Evaluates the positivity margin on `grid_points` evenly spaced densities
/// spanning `domain`. Passes iff both the margin and the ratio itself stay
/// strictly positive.
pub fn check_feedback_policy(
    policy: &FeedbackPolicy,
    domain: (f64, f64),
    grid_points: usize,
) -> FeedbackCheck {
    let n = grid_points.max(2);
    let (lo, hi) = domain;
    let mut min_margin = f64::INFINITY;
    let mut at_density = lo;
    let mut min_value = f64::INFINITY;
    for i in 0..n {
        let v = lo + (hi - lo) * i as f64 / (n - 1) as f64;
        let m = policy.margin(v);
        if !(m >= min_margin) {
            min_margin = m;
            at_density = v;
        }
        min_value = min_value.min(policy.eval(v).k);
    }
    FeedbackCheck {
        ok: min_margin > 0.0 && min_value > 0.0,
        min_margin,
        at_density,
        min_value,
    }
}
