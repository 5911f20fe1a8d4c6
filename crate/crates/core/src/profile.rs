//! Piecewise-linear scalar functions of time.
//!
//! Used for nodal injections and open-loop compression ratios. Values are
//! interpolated linearly between breakpoints and held constant outside them.
//! The derivative is the slope of the active segment, right-continuous at
//! breakpoints, and zero in the extrapolated regions.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProfileError {
    #[error("profile has no breakpoints")]
    Empty,
    #[error("breakpoint {index} is not finite")]
    NonFinite { index: usize },
    #[error("breakpoint times must be strictly increasing (index {index})")]
    NotIncreasing { index: usize },
}

/// A continuous piecewise-linear profile `t -> value`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<[f64; 2]>", into = "Vec<[f64; 2]>")]
pub struct TimeProfile {
    points: Vec<(f64, f64)>,
}

impl TimeProfile {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self, ProfileError> {
        if points.is_empty() {
            return Err(ProfileError::Empty);
        }
        for (index, &(t, v)) in points.iter().enumerate() {
            if !t.is_finite() || !v.is_finite() {
                return Err(ProfileError::NonFinite { index });
            }
            if index > 0 && t <= points[index - 1].0 {
                return Err(ProfileError::NotIncreasing { index });
            }
        }
        Ok(Self { points })
    }

    pub fn constant(value: f64) -> Self {
        Self {
            points: vec![(0.0, value)],
        }
    }

    /// Straight line from `(t0, v0)` to `(t1, v1)`, held outside.
    pub fn ramp(t0: f64, v0: f64, t1: f64, v1: f64) -> Result<Self, ProfileError> {
        Self::new(vec![(t0, v0), (t1, v1)])
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    /// Value and time derivative at `t`.
    pub fn eval(&self, t: f64) -> (f64, f64) {
        let pts = &self.points;
        let first = pts[0];
        let last = pts[pts.len() - 1];
        if t < first.0 {
            return (first.1, 0.0);
        }
        if t >= last.0 {
            return (last.1, 0.0);
        }
        // first index with time > t; the active segment is [k-1, k]
        let k = pts.partition_point(|&(tk, _)| tk <= t);
        let (t0, v0) = pts[k - 1];
        let (t1, v1) = pts[k];
        let slope = (v1 - v0) / (t1 - t0);
        (v0 + slope * (t - t0), slope)
    }

    pub fn value(&self, t: f64) -> f64 {
        self.eval(t).0
    }

    /// Minimum over `[t0, t1]`. Exact, since extrema of a piecewise-linear
    /// function sit at breakpoints or at the interval ends.
    pub fn min_on(&self, t0: f64, t1: f64) -> f64 {
        self.extremum_on(t0, t1, f64::min)
    }

    pub fn max_on(&self, t0: f64, t1: f64) -> f64 {
        self.extremum_on(t0, t1, f64::max)
    }

    fn extremum_on(&self, t0: f64, t1: f64, pick: fn(f64, f64) -> f64) -> f64 {
        let mut best = pick(self.value(t0), self.value(t1));
        for &(t, v) in &self.points {
            if t > t0 && t < t1 {
                best = pick(best, v);
            }
        }
        best
    }

    /// Pointwise sum of two profiles, exact on the union of breakpoints.
    pub fn add(&self, other: &TimeProfile) -> TimeProfile {
        let mut times: Vec<f64> = self
            .points
            .iter()
            .chain(other.points.iter())
            .map(|&(t, _)| t)
            .collect();
        times.sort_by(f64::total_cmp);
        times.dedup();
        TimeProfile {
            points: times
                .into_iter()
                .map(|t| (t, self.value(t) + other.value(t)))
                .collect(),
        }
    }
}

impl TryFrom<Vec<[f64; 2]>> for TimeProfile {
    type Error = ProfileError;

    fn try_from(raw: Vec<[f64; 2]>) -> Result<Self, Self::Error> {
        TimeProfile::new(raw.into_iter().map(|[t, v]| (t, v)).collect())
    }
}

impl From<TimeProfile> for Vec<[f64; 2]> {
    fn from(p: TimeProfile) -> Self {
        p.points.into_iter().map(|(t, v)| [t, v]).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolates_inside() {
        let p = TimeProfile::ramp(0.0, 1.0, 10.0, 2.0).unwrap();
        let (v, d) = p.eval(5.0);
        assert!((v - 1.5).abs() < 1e-15);
        assert!((d - 0.1).abs() < 1e-15);
    }

    #[test]
    fn holds_outside() {
        let p = TimeProfile::ramp(0.0, 1.0, 10.0, 2.0).unwrap();
        assert_eq!(p.eval(20.0), (2.0, 0.0));
        assert_eq!(p.eval(-3.0), (1.0, 0.0));
    }

    #[test]
    fn constant_profile() {
        let p = TimeProfile::new(vec![(0.0, 3.0)]).unwrap();
        for t in [-1.0, 0.0, 7.5, 1e6] {
            assert_eq!(p.eval(t), (3.0, 0.0));
        }
    }

    #[test]
    fn derivative_is_right_continuous() {
        let p = TimeProfile::new(vec![(0.0, 0.0), (1.0, 1.0), (2.0, 0.0)]).unwrap();
        assert_eq!(p.eval(1.0), (1.0, -1.0));
        assert_eq!(p.eval(0.0), (0.0, 1.0));
        assert_eq!(p.eval(2.0), (0.0, 0.0));
    }

    #[test]
    fn rejects_bad_breakpoints() {
        assert_eq!(TimeProfile::new(vec![]), Err(ProfileError::Empty));
        assert_eq!(
            TimeProfile::new(vec![(0.0, 1.0), (0.0, 2.0)]),
            Err(ProfileError::NotIncreasing { index: 1 })
        );
        assert_eq!(
            TimeProfile::new(vec![(0.0, f64::NAN)]),
            Err(ProfileError::NonFinite { index: 0 })
        );
    }

    #[test]
    fn extrema_and_sum() {
        let p = TimeProfile::new(vec![(0.0, 1.0), (1.0, -2.0), (3.0, 4.0)]).unwrap();
        assert_eq!(p.min_on(0.0, 3.0), -2.0);
        assert_eq!(p.max_on(0.0, 2.0), 1.0);
        let q = TimeProfile::ramp(0.5, 0.0, 2.5, 2.0).unwrap();
        let s = p.add(&q);
        for t in [0.0, 0.25, 0.5, 1.0, 1.7, 2.5, 3.0, 4.0] {
            assert!((s.value(t) - p.value(t) - q.value(t)).abs() < 1e-12);
        }
    }

    #[test]
    fn serde_as_pairs() {
        let p: TimeProfile = serde_json::from_str("[[0, 1], [10, 2]]").unwrap();
        assert_eq!(p.points(), &[(0.0, 1.0), (10.0, 2.0)]);
        assert_eq!(serde_json::to_string(&p).unwrap(), "[[0.0,1.0],[10.0,2.0]]");
        assert!(serde_json::from_str::<TimeProfile>("[[1, 1], [0, 2]]").is_err());
    }
}
