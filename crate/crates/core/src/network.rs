//! Actuated flow network: nodes with injections, directed pipe edges with a
//! dissipation law, and compression actuators at edge endpoints.

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dissipation::{DissipationModel, ModelError};
use crate::monotonicity::FeedbackPolicy;
use crate::profile::TimeProfile;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NetworkError {
    #[error("network has no edges")]
    NoEdges,
    #[error("network is not connected (node '{0}' unreachable)")]
    Disconnected(String),
    #[error("duplicate node id '{0}'")]
    DuplicateNode(String),
    #[error("duplicate edge id '{0}'")]
    DuplicateEdge(String),
    #[error("edge '{edge}' references unknown node '{node}'")]
    UnknownNode { edge: String, node: String },
    #[error("edge '{0}' is a self-loop")]
    SelfLoop(String),
    #[error("edge '{edge}' length must be positive and finite, got {length}")]
    NonPositiveLength { edge: String, length: f64 },
    #[error("edge '{edge}' model: {source}")]
    Model { edge: String, source: ModelError },
    #[error("actuator references unknown edge '{0}'")]
    UnknownEdge(String),
    #[error("more than one actuator on edge '{edge}' side {side}")]
    DuplicateActuator { edge: String, side: Side },
    #[error("actuator on edge '{edge}' side {side} has non-positive ratio {min} on [0, T]")]
    NonPositiveRatio { edge: String, side: Side, min: f64 },
    #[error("actuator on edge '{edge}' side {side}: invalid feedback policy ({reason})")]
    Policy { edge: String, side: Side, reason: String },
    #[error("node '{node}' injection envelope violates lower <= nominal <= upper at t = {time}")]
    Envelope { node: String, time: f64 },
    #[error("horizon must be positive and finite, got {0}")]
    Horizon(f64),
    #[error("initial density for node '{node}' must be positive, got {value}")]
    InitialDensity { node: String, value: f64 },
    #[error("initial density given for unknown node '{0}'")]
    InitialUnknownNode(String),
}

/// Endpoint of an edge carrying an actuator. `Plus` sits at the tail node
/// and scales the density entering the edge, `Minus` sits at the head node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Side {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl std::fmt::Display for Side {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Side::Plus => "+",
            Side::Minus => "-",
        })
    }
}

/// Nodal injection with an optional uncertainty envelope.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InjectionSpec {
    pub nominal: TimeProfile,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lower: Option<TimeProfile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub upper: Option<TimeProfile>,
}

impl InjectionSpec {
    pub fn constant(q: f64) -> Self {
        Self {
            nominal: TimeProfile::constant(q),
            lower: None,
            upper: None,
        }
    }

    pub fn with_band(nominal: TimeProfile, lower: TimeProfile, upper: TimeProfile) -> Self {
        Self {
            nominal,
            lower: Some(lower),
            upper: Some(upper),
        }
    }

    pub fn lower_or_nominal(&self) -> &TimeProfile {
        self.lower.as_ref().unwrap_or(&self.nominal)
    }

    pub fn upper_or_nominal(&self) -> &TimeProfile {
        self.upper.as_ref().unwrap_or(&self.nominal)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub id: String,
    /// `None` means no injection was given; treated as `q = 0`.
    pub injection: Option<InjectionSpec>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub id: String,
    pub from: usize,
    pub to: usize,
    pub length: f64,
    pub model: DissipationModel,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ActuatorRatio {
    Profile(TimeProfile),
    Feedback(FeedbackPolicy),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Actuator {
    pub edge: usize,
    pub side: Side,
    pub ratio: ActuatorRatio,
}

impl Actuator {
    /// Base node the actuator sits at.
    pub fn node(&self, net: &Network) -> usize {
        let e = &net.edges[self.edge];
        match self.side {
            Side::Plus => e.from,
            Side::Minus => e.to,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InitialDensity {
    Uniform(f64),
    PerNode(BTreeMap<String, f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    pub nodes: Vec<Node>,
    pub edges: Vec<Edge>,
    pub actuators: Vec<Actuator>,
    pub horizon: f64,
    pub initial: Option<InitialDensity>,
}

impl Network {
    pub fn new(
        nodes: Vec<Node>,
        edges: Vec<Edge>,
        actuators: Vec<Actuator>,
        horizon: f64,
        initial: Option<InitialDensity>,
    ) -> Result<Self, NetworkError> {
        let net = Network {
            nodes,
            edges,
            actuators,
            horizon,
            initial,
        };
        net.validate()?;
        Ok(net)
    }

    pub fn validate(&self) -> Result<(), NetworkError> {
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return Err(NetworkError::Horizon(self.horizon));
        }
        let mut seen = HashSet::new();
        for n in &self.nodes {
            if !seen.insert(n.id.as_str()) {
                return Err(NetworkError::DuplicateNode(n.id.clone()));
            }
        }
        if self.edges.is_empty() {
            return Err(NetworkError::NoEdges);
        }
        let mut seen = HashSet::new();
        for e in &self.edges {
            if !seen.insert(e.id.as_str()) {
                return Err(NetworkError::DuplicateEdge(e.id.clone()));
            }
            for end in [e.from, e.to] {
                if end >= self.nodes.len() {
                    return Err(NetworkError::UnknownNode {
                        edge: e.id.clone(),
                        node: format!("#{end}"),
                    });
                }
            }
            if e.from == e.to {
                return Err(NetworkError::SelfLoop(e.id.clone()));
            }
            if !(e.length.is_finite() && e.length > 0.0) {
                return Err(NetworkError::NonPositiveLength {
                    edge: e.id.clone(),
                    length: e.length,
                });
            }
            e.model.validate().map_err(|source| NetworkError::Model {
                edge: e.id.clone(),
                source,
            })?;
        }
        self.check_connected()?;

        let mut placed = HashSet::new();
        for a in &self.actuators {
            let edge = self
                .edges
                .get(a.edge)
                .ok_or_else(|| NetworkError::UnknownEdge(format!("#{}", a.edge)))?;
            if !placed.insert((a.edge, a.side)) {
                return Err(NetworkError::DuplicateActuator {
                    edge: edge.id.clone(),
                    side: a.side,
                });
            }
            match &a.ratio {
                ActuatorRatio::Profile(p) => {
                    let min = p.min_on(0.0, self.horizon);
                    if !(min > 0.0) {
                        return Err(NetworkError::NonPositiveRatio {
                            edge: edge.id.clone(),
                            side: a.side,
                            min,
                        });
                    }
                }
                ActuatorRatio::Feedback(policy) => {
                    policy.validate().map_err(|e| NetworkError::Policy {
                        edge: edge.id.clone(),
                        side: a.side,
                        reason: e.to_string(),
                    })?;
                }
            }
        }

        for n in &self.nodes {
            if let Some(inj) = &n.injection {
                check_envelope(&n.id, inj, self.horizon)?;
            }
        }

        match &self.initial {
            Some(InitialDensity::Uniform(v)) if !(v.is_finite() && *v > 0.0) => {
                return Err(NetworkError::InitialDensity {
                    node: "*".into(),
                    value: *v,
                });
            }
            Some(InitialDensity::PerNode(map)) => {
                for (id, &v) in map {
                    if self.node_index(id).is_none() {
                        return Err(NetworkError::InitialUnknownNode(id.clone()));
                    }
                    if !(v.is_finite() && v > 0.0) {
                        return Err(NetworkError::InitialDensity {
                            node: id.clone(),
                            value: v,
                        });
                    }
                }
            }
            _ => {}
        }
        Ok(())
    }

    fn check_connected(&self) -> Result<(), NetworkError> {
        let n = self.nodes.len();
        let mut adj = vec![Vec::new(); n];
        for e in &self.edges {
            adj[e.from].push(e.to);
            adj[e.to].push(e.from);
        }
        let mut visited = vec![false; n];
        let mut stack = vec![0];
        visited[0] = true;
        while let Some(i) = stack.pop() {
            for &j in &adj[i] {
                if !visited[j] {
                    visited[j] = true;
                    stack.push(j);
                }
            }
        }
        match visited.iter().position(|v| !v) {
            Some(i) => Err(NetworkError::Disconnected(self.nodes[i].id.clone())),
            None => Ok(()),
        }
    }

    pub fn node_index(&self, id: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n.id == id)
    }

    pub fn edge_index(&self, id: &str) -> Option<usize> {
        self.edges.iter().position(|e| e.id == id)
    }

    pub fn node_ids(&self) -> Vec<String> {
        self.nodes.iter().map(|n| n.id.clone()).collect()
    }

    pub fn total_length(&self) -> f64 {
        self.edges.iter().map(|e| e.length).sum()
    }

    pub fn has_feedback(&self) -> bool {
        self.actuators
            .iter()
            .any(|a| matches!(a.ratio, ActuatorRatio::Feedback(_)))
    }

    /// Ids of nodes with no injection given.
    pub fn nodes_without_injection(&self) -> Vec<String> {
        self.nodes
            .iter()
            .filter(|n| n.injection.is_none())
            .map(|n| n.id.clone())
            .collect()
    }

    /// Initial density at every base node; unspecified entries default to
    /// `default`.
    pub fn initial_base_densities(&self, default: f64) -> Vec<f64> {
        match &self.initial {
            None => vec![default; self.nodes.len()],
            Some(InitialDensity::Uniform(v)) => vec![*v; self.nodes.len()],
            Some(InitialDensity::PerNode(map)) => {
                let by_id: HashMap<&str, f64> = map.iter().map(|(k, v)| (k.as_str(), *v)).collect();
                self.nodes
                    .iter()
                    .map(|n| by_id.get(n.id.as_str()).copied().unwrap_or(default))
                    .collect()
            }
        }
    }
}

fn check_envelope(node: &str, inj: &InjectionSpec, horizon: f64) -> Result<(), NetworkError> {
    // differences of piecewise-linear profiles are piecewise linear, so the
    // union of breakpoints plus the horizon ends is an exhaustive check
    let mut times: Vec<f64> = vec![0.0, horizon];
    for p in [Some(&inj.nominal), inj.lower.as_ref(), inj.upper.as_ref()]
        .into_iter()
        .flatten()
    {
        times.extend(p.points().iter().map(|&(t, _)| t).filter(|&t| t > 0.0 && t < horizon));
    }
    for t in times {
        let q = inj.nominal.value(t);
        let below = inj.lower.as_ref().is_some_and(|l| l.value(t) > q);
        let above = inj.upper.as_ref().is_some_and(|u| u.value(t) < q);
        if below || above {
            return Err(NetworkError::Envelope {
                node: node.to_string(),
                time: t,
            });
        }
    }
    Ok(())
}
