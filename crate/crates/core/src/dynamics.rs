//! Nodal density dynamics on a refined network.
//!
//! For node `j` with incident segments of lengths `l`, the lumped mass is
//! `m_j = sum_end (l / 2) a_end rho_j`, where `a_end` is the compression ratio
//! at that segment end (1 when unactuated). Mass balance gives
//!
//! ```text
//! d m_j / dt = sum_out f(a_t rho_j, g) - sum_in f(a_h rho_j, g) + q_j
//! g = (a_h rho_head - a_t rho_tail) / l
//! ```
//!
//! which is solved for `d rho_j / dt`. With uniform segments of length `eps`
//! the weight `sum (l / 2) a_end` is `eps alpha_j / 2` with `alpha_j` the
//! aggregated actuation, so the classical form is recovered. Feedback ratios
//! `a = k(rho_j)` move into the denominator as `sum (l / 2)(k + k' rho_j)`.

use nalgebra::DMatrix;
use thiserror::Error;

use crate::dissipation::{DissipationEval, ModelError};
use crate::monotonicity::FeedbackPolicy;
use crate::network::{ActuatorRatio, Network};
use crate::profile::TimeProfile;
use crate::refine::{End, RefinedNetwork};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RhsError {
    #[error("state has {got} entries, network has {expected} nodes")]
    Dimension { expected: usize, got: usize },
    #[error("{got} actuator drives supplied, network has {expected} actuators")]
    ControlCount { expected: usize, got: usize },
    #[error("actuator {actuator} ratio is {value}, must be positive")]
    NonPositiveRatio { actuator: usize, value: f64 },
    #[error("node '{node}': {source}")]
    Model { node: String, source: ModelError },
    #[error("node '{node}': effective ratio sum r_j = {value} is not positive")]
    Degenerate { node: String, value: f64 },
    #[error("node '{node}': non-finite rate")]
    NonFinite { node: String },
}

/// How one actuator's ratio is set.
#[derive(Debug, Clone, PartialEq)]
pub enum Drive {
    Profile(TimeProfile),
    /// Ratio follows the density at the actuator's own node.
    Feedback(FeedbackPolicy),
}

/// Ratio drives for every actuator of the base network, in actuator order.
#[derive(Debug, Clone, PartialEq)]
pub struct Controls {
    drives: Vec<Drive>,
}

impl Controls {
    pub fn new(drives: Vec<Drive>) -> Self {
        Self { drives }
    }

    pub fn from_network(net: &Network) -> Self {
        Self::new(
            net.actuators
                .iter()
                .map(|a| match &a.ratio {
                    ActuatorRatio::Profile(p) => Drive::Profile(p.clone()),
                    ActuatorRatio::Feedback(k) => Drive::Feedback(k.clone()),
                })
                .collect(),
        )
    }

    pub fn open_loop(profiles: Vec<TimeProfile>) -> Self {
        Self::new(profiles.into_iter().map(Drive::Profile).collect())
    }

    pub fn constant(values: &[f64]) -> Self {
        Self::open_loop(values.iter().map(|&v| TimeProfile::constant(v)).collect())
    }

    pub fn feedback(policies: Vec<FeedbackPolicy>) -> Self {
        Self::new(policies.into_iter().map(Drive::Feedback).collect())
    }

    pub fn drives(&self) -> &[Drive] {
        &self.drives
    }

    pub fn len(&self) -> usize {
        self.drives.len()
    }

    pub fn is_empty(&self) -> bool {
        self.drives.is_empty()
    }

    pub fn is_open_loop(&self) -> bool {
        self.drives.iter().all(|d| matches!(d, Drive::Profile(_)))
    }
}

/// Injection profile per refined node (`None` is `q = 0`).
#[derive(Debug, Clone, PartialEq)]
pub struct Injections {
    per_node: Vec<Option<TimeProfile>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Envelope {
    Lower,
    Nominal,
    Upper,
}

impl Injections {
    pub fn new(per_node: Vec<Option<TimeProfile>>) -> Self {
        Self { per_node }
    }

    pub fn zero(rnet: &RefinedNetwork) -> Self {
        Self::new(vec![None; rnet.node_count()])
    }

    /// The nominal, lower or upper profile of every node; a missing bound
    /// falls back to the nominal profile.
    pub fn envelope(rnet: &RefinedNetwork, which: Envelope) -> Self {
        Self::new(
            (0..rnet.node_count())
                .map(|j| {
                    rnet.injection(j).map(|inj| match which {
                        Envelope::Lower => inj.lower_or_nominal().clone(),
                        Envelope::Nominal => inj.nominal.clone(),
                        Envelope::Upper => inj.upper_or_nominal().clone(),
                    })
                })
                .collect(),
        )
    }

    pub fn nominal(rnet: &RefinedNetwork) -> Self {
        Self::envelope(rnet, Envelope::Nominal)
    }

    /// Profiles given per base node; interior nodes get none.
    pub fn from_base(rnet: &RefinedNetwork, base: Vec<Option<TimeProfile>>) -> Self {
        let mut per_node = vec![None; rnet.node_count()];
        for (j, p) in base.into_iter().enumerate().take(rnet.base_node_count()) {
            per_node[j] = p;
        }
        Self::new(per_node)
    }

    pub fn profiles(&self) -> &[Option<TimeProfile>] {
        &self.per_node
    }

    pub fn value(&self, node: usize, t: f64) -> f64 {
        self.per_node
            .get(node)
            .and_then(|p| p.as_ref())
            .map_or(0.0, |p| p.value(t))
    }
}

/// Ratio at one segment end with its derivatives in time and in the density
/// of the node it sits at.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct EndRatio {
    pub value: f64,
    pub dt: f64,
    pub drho: f64,
    pub d2rho: f64,
}

impl EndRatio {
    const IDENTITY: EndRatio = EndRatio {
        value: 1.0,
        dt: 0.0,
        drho: 0.0,
        d2rho: 0.0,
    };

    /// `d(a rho)/d rho`.
    fn effective(&self, rho: f64) -> f64 {
        self.value + self.drho * rho
    }
}

fn end_ratio(
    controls: &Controls,
    actuator: Option<usize>,
    t: f64,
    rho: f64,
) -> Result<EndRatio, RhsError> {
    let Some(a) = actuator else {
        return Ok(EndRatio::IDENTITY);
    };
    let r = match &controls.drives[a] {
        Drive::Profile(p) => {
            let (value, dt) = p.eval(t);
            EndRatio {
                value,
                dt,
                drho: 0.0,
                d2rho: 0.0,
            }
        }
        Drive::Feedback(k) => {
            let e = k.eval(rho);
            EndRatio {
                value: e.k,
                dt: 0.0,
                drho: e.dk,
                d2rho: e.d2k,
            }
        }
    };
    if !(r.value > 0.0) {
        return Err(RhsError::NonPositiveRatio {
            actuator: a,
            value: r.value,
        });
    }
    Ok(r)
}

#[derive(Debug, Clone)]
pub(crate) struct SegmentEval {
    pub tail: EndRatio,
    pub head: EndRatio,
    /// Law evaluated with the tail-end density, used at the tail node.
    pub at_tail: DissipationEval,
    /// Law evaluated with the head-end density, used at the head node.
    pub at_head: DissipationEval,
}

/// Everything the rate and its Jacobian need at one `(rho, t)`.
#[derive(Debug, Clone)]
pub(crate) struct Evaluation {
    pub segments: Vec<SegmentEval>,
    /// Numerator of the rate: net inflow plus injection minus `dm/dt|_rho`.
    pub numer: Vec<f64>,
    /// Effective lumped weight `sum (l/2)(a + a' rho)`.
    pub denom: Vec<f64>,
    /// `d denom / d rho_j`.
    pub denom_slope: Vec<f64>,
    /// `sum (l/2) da/dt` over open-loop ends.
    pub weight_rate: Vec<f64>,
}

impl Evaluation {
    pub fn rates(&self) -> Vec<f64> {
        self.numer.iter().zip(&self.denom).map(|(n, d)| n / d).collect()
    }
}

fn check_dims(
    rnet: &RefinedNetwork,
    rho: &[f64],
    controls: &Controls,
) -> Result<(), RhsError> {
    if rho.len() != rnet.node_count() {
        return Err(RhsError::Dimension {
            expected: rnet.node_count(),
            got: rho.len(),
        });
    }
    if controls.len() != rnet.base().actuators.len() {
        return Err(RhsError::ControlCount {
            expected: rnet.base().actuators.len(),
            got: controls.len(),
        });
    }
    Ok(())
}

pub(crate) fn evaluate(
    rnet: &RefinedNetwork,
    rho: &[f64],
    t: f64,
    controls: &Controls,
    injections: &Injections,
) -> Result<Evaluation, RhsError> {
    check_dims(rnet, rho, controls)?;
    let n = rnet.node_count();
    let base = rnet.base();
    let label = |j: usize| rnet.nodes()[j].label.clone();

    let mut segments = Vec::with_capacity(rnet.edge_count());
    for e in rnet.edges() {
        let (ri, rj) = (rho[e.from], rho[e.to]);
        let tail = end_ratio(controls, e.tail_actuator, t, ri)?;
        let head = end_ratio(controls, e.head_actuator, t, rj)?;
        let model = &base.edges[e.parent].model;
        let grad = (head.value * rj - tail.value * ri) / e.length;
        let at_tail = model
            .eval(t, tail.value * ri, grad)
            .map_err(|source| RhsError::Model { node: label(e.from), source })?;
        let at_head = model
            .eval(t, head.value * rj, grad)
            .map_err(|source| RhsError::Model { node: label(e.to), source })?;
        segments.push(SegmentEval {
            tail,
            head,
            at_tail,
            at_head,
        });
    }

    let mut numer = vec![0.0; n];
    let mut denom = vec![0.0; n];
    let mut denom_slope = vec![0.0; n];
    let mut weight_rate = vec![0.0; n];
    for j in 0..n {
        let mut weight = 0.0;
        let mut w_rho = 0.0;
        let mut w_rho2 = 0.0;
        let mut w_t = 0.0;
        let mut flow = 0.0;
        for &(k, end) in rnet.incident(j) {
            let half = 0.5 * rnet.edges()[k].length;
            let s = &segments[k];
            let r = match end {
                End::Tail => {
                    flow += s.at_tail.f;
                    &s.tail
                }
                End::Head => {
                    flow -= s.at_head.f;
                    &s.head
                }
            };
            weight += half * r.value;
            w_rho += half * r.drho;
            w_rho2 += half * r.d2rho;
            w_t += half * r.dt;
        }
        let d = weight + w_rho * rho[j];
        if !(d > 0.0) {
            return Err(RhsError::Degenerate { node: label(j), value: d });
        }
        numer[j] = flow + injections.value(j, t) - w_t * rho[j];
        denom[j] = d;
        denom_slope[j] = 2.0 * w_rho + w_rho2 * rho[j];
        weight_rate[j] = w_t;
    }
    Ok(Evaluation {
        segments,
        numer,
        denom,
        denom_slope,
        weight_rate,
    })
}

/// Time derivative of the nodal densities.
pub fn nodal_rhs(
    rnet: &RefinedNetwork,
    rho: &[f64],
    t: f64,
    controls: &Controls,
    injections: &Injections,
) -> Result<Vec<f64>, RhsError> {
    let rates = evaluate(rnet, rho, t, controls, injections)?.rates();
    if let Some(j) = rates.iter().position(|r| !r.is_finite()) {
        return Err(RhsError::NonFinite {
            node: rnet.nodes()[j].label.clone(),
        });
    }
    Ok(rates)
}

/// Closed-loop rate with every actuator following its local feedback
/// policy, listed in actuator order.
pub fn nodal_rhs_feedback(
    rnet: &RefinedNetwork,
    rho: &[f64],
    t: f64,
    policies: &[FeedbackPolicy],
    injections: &Injections,
) -> Result<Vec<f64>, RhsError> {
    nodal_rhs(rnet, rho, t, &Controls::feedback(policies.to_vec()), injections)
}

/// Aggregated actuation `alpha_j = sum_in a_head + sum_out a_tail` at `node`
/// and its time derivative. Feedback ends are evaluated at `rho_node` and
/// contribute no explicit time derivative.
pub fn aggregate_actuation(
    rnet: &RefinedNetwork,
    controls: &Controls,
    node: usize,
    t: f64,
    rho_node: f64,
) -> Result<(f64, f64), RhsError> {
    let mut alpha = 0.0;
    let mut alpha_dot = 0.0;
    for &(k, end) in rnet.incident(node) {
        let e = &rnet.edges()[k];
        let act = match end {
            End::Tail => e.tail_actuator,
            End::Head => e.head_actuator,
        };
        let r = end_ratio(controls, act, t, rho_node)?;
        alpha += r.value;
        alpha_dot += r.dt;
    }
    Ok((alpha, alpha_dot))
}

/// Midpoint flux of every segment, computed from each end's density.
/// The two agree up to the small end-to-end density contrast.
#[derive(Debug, Clone, PartialEq)]
pub struct MidpointFluxes {
    pub at_tail: Vec<f64>,
    pub at_head: Vec<f64>,
}

pub fn midpoint_fluxes(
    rnet: &RefinedNetwork,
    rho: &[f64],
    t: f64,
    controls: &Controls,
) -> Result<MidpointFluxes, RhsError> {
    let ev = evaluate(rnet, rho, t, controls, &Injections::zero(rnet))?;
    Ok(MidpointFluxes {
        at_tail: ev.segments.iter().map(|s| -s.at_tail.f).collect(),
        at_head: ev.segments.iter().map(|s| -s.at_head.f).collect(),
    })
}

/// Largest relative density jump `2|a_h rho_to - a_t rho_from| / (a_h rho_to + a_t rho_from)`
/// across any segment.
pub fn neighbor_contrast(
    rnet: &RefinedNetwork,
    rho: &[f64],
    t: f64,
    controls: &Controls,
) -> Result<f64, RhsError> {
    check_dims(rnet, rho, controls)?;
    let mut worst: f64 = 0.0;
    for e in rnet.edges() {
        let lo = end_ratio(controls, e.tail_actuator, t, rho[e.from])?.value * rho[e.from];
        let hi = end_ratio(controls, e.head_actuator, t, rho[e.to])?.value * rho[e.to];
        worst = worst.max(2.0 * (hi - lo).abs() / (hi + lo));
    }
    Ok(worst)
}

/// Analytic state Jacobian `d rho_dot / d rho` and the diagonal of
/// `d rho_dot / d q`.
pub(crate) fn analytic_jacobians(
    rnet: &RefinedNetwork,
    rho: &[f64],
    t: f64,
    controls: &Controls,
    injections: &Injections,
) -> Result<(DMatrix<f64>, Vec<f64>), RhsError> {
    let ev = evaluate(rnet, rho, t, controls, injections)?;
    let n = rnet.node_count();
    let mut dn = DMatrix::<f64>::zeros(n, n);
    for (e, s) in rnet.edges().iter().zip(&ev.segments) {
        let (i, j, l) = (e.from, e.to, e.length);
        let rt = s.tail.effective(rho[i]);
        let rh = s.head.effective(rho[j]);
        // tail node gains +f(a_t rho_i, g)
        dn[(i, i)] += s.at_tail.df_du * rt - s.at_tail.df_dv * rt / l;
        dn[(i, j)] += s.at_tail.df_dv * rh / l;
        // head node loses f(a_h rho_j, g)
        dn[(j, j)] -= s.at_head.df_du * rh + s.at_head.df_dv * rh / l;
        dn[(j, i)] += s.at_head.df_dv * rt / l;
    }
    let mut jac = dn;
    for j in 0..n {
        jac[(j, j)] -= ev.weight_rate[j];
        let d = ev.denom[j];
        for m in 0..n {
            jac[(j, m)] /= d;
        }
        jac[(j, j)] -= ev.numer[j] * ev.denom_slope[j] / (d * d);
    }
    let inj = ev.denom.iter().map(|d| 1.0 / d).collect();
    Ok((jac, inj))
}
