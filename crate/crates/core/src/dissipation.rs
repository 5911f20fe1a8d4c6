//! Edge dissipation laws `f(t, u, v)` relating mass flux to density `u` and
//! density gradient `v`. The flux along an edge is `-f`.
//!
//! Flux is in kg/m²/s, density in kg/m³ and gradient in kg/m⁴. Hence `beta`
//! of the linear law is in m²/s and `kappa` of the gas law in m⁵/s².

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DEFAULT_WEYMOUTH_DELTA: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("non-finite dissipation input (u = {u}, v = {v})")]
    NonFinite { u: f64, v: f64 },
    #[error("gas dissipation requires positive density, got {u}")]
    NonPositiveDensity { u: f64 },
    #[error("invalid dissipation parameter: {0}")]
    Parameter(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "params", rename_all = "snake_case")]
pub enum DissipationModel {
    /// `f = beta * v`.
    Linear { beta: f64 },
    /// `f = sign(v) sqrt(kappa u |v|)`, linearised to `v sqrt(kappa u / delta)`
    /// for `|v| < delta` so that `df/dv` stays finite at zero gradient.
    GasWeymouth {
        kappa: f64,
        #[serde(default = "default_delta")]
        delta: f64,
    },
}

fn default_delta() -> f64 {
    DEFAULT_WEYMOUTH_DELTA
}

/// Flux-law value with its partial derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DissipationEval {
    pub f: f64,
    pub df_du: f64,
    pub df_dv: f64,
}

impl DissipationModel {
    pub fn linear(beta: f64) -> Self {
        DissipationModel::Linear { beta }
    }

    pub fn gas(kappa: f64, delta: f64) -> Self {
        DissipationModel::GasWeymouth { kappa, delta }
    }

    /// Checks that parameters are finite and, for the gas law, positive.
    ///
    /// The sign of `beta` is not checked here: a law decreasing in `v` is a
    /// valid input to the monotonicity checks, which report it.
    pub fn validate(&self) -> Result<(), ModelError> {
        match *self {
            DissipationModel::Linear { beta } => {
                if !beta.is_finite() || beta == 0.0 {
                    return Err(ModelError::Parameter("beta must be finite and nonzero"));
                }
            }
            DissipationModel::GasWeymouth { kappa, delta } => {
                if !(kappa.is_finite() && kappa > 0.0) {
                    return Err(ModelError::Parameter("kappa must be positive"));
                }
                if !(delta.is_finite() && delta > 0.0) {
                    return Err(ModelError::Parameter("delta must be positive"));
                }
            }
        }
        Ok(())
    }

    pub fn eval(&self, _t: f64, u: f64, v: f64) -> Result<DissipationEval, ModelError> {
        if !u.is_finite() || !v.is_finite() {
            return Err(ModelError::NonFinite { u, v });
        }
        match *self {
            DissipationModel::Linear { beta } => Ok(DissipationEval {
                f: beta * v,
                df_du: 0.0,
                df_dv: beta,
            }),
            DissipationModel::GasWeymouth { kappa, delta } => {
                if u <= 0.0 {
                    return Err(ModelError::NonPositiveDensity { u });
                }
                let (f, df_dv) = if v.abs() >= delta {
                    let root = (kappa * u * v.abs()).sqrt();
                    (v.signum() * root, (kappa * u).sqrt() / (2.0 * v.abs().sqrt()))
                } else {
                    let slope = (kappa * u / delta).sqrt();
                    (v * slope, slope)
                };
                Ok(DissipationEval {
                    f,
                    df_du: f / (2.0 * u),
                    df_dv,
                })
            }
        }
    }

    /// Samples `df/dv` over `densities x gradients` and returns the smallest
    /// value seen, or the first evaluation error.
    pub fn min_slope(&self, densities: &[f64], gradients: &[f64]) -> Result<f64, ModelError> {
        let mut min = f64::INFINITY;
        for &u in densities {
            for &v in gradients {
                min = min.min(self.eval(0.0, u, v)?.df_dv);
            }
        }
        Ok(min)
    }

    pub fn is_increasing_on(&self, densities: &[f64], gradients: &[f64]) -> bool {
        matches!(self.min_slope(densities, gradients), Ok(m) if m > 0.0)
    }

    pub fn name(&self) -> &'static str {
        match self {
            DissipationModel::Linear { .. } => "linear",
            DissipationModel::GasWeymouth { .. } => "gas_weymouth",
        }
    }
}
