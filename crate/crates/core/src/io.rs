//! JSON file schemas: network descriptions, robust control problems and the
//! refined topology written by `refine`.
//!
//! Files refer to nodes and edges by string id; the in-memory model uses
//! dense indices. Conversion in both directions is lossless.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dissipation::DissipationModel;
use crate::dynamics::Controls;
use crate::monotonicity::FeedbackPolicy;
use crate::network::{
    Actuator, ActuatorRatio, Edge, InitialDensity, InjectionSpec, Network, NetworkError, Node, Side,
};
use crate::profile::TimeProfile;
use crate::refine::{refine_network, NodeOrigin, RefineError, RefinedNetwork};
use crate::robust::{EnvelopeInitial, NodeValues, ObjectiveSpec, OcpError, OptimizerSettings, RobustOcp};
use crate::simulator;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("cannot read '{path}': {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("invalid file '{path}': {source}")]
    Parse {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Refine(#[from] RefineError),
    #[error(transparent)]
    Ocp(#[from] OcpError),
}

impl IoError {
    /// The file could not be read or parsed, as opposed to parsing into a
    /// model that violates a constraint.
    pub fn is_invalid_file(&self) -> bool {
        matches!(self, IoError::Read { .. } | IoError::Parse { .. })
    }
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, IoError> {
    let text = fs::read_to_string(path).map_err(|source| IoError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| IoError::Parse {
        path: path.to_path_buf(),
        source,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeFile {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub injection: Option<InjectionSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeFile {
    pub id: String,
    pub from: String,
    pub to: String,
    pub length: f64,
    pub model: DissipationModel,
}

/// An actuator's `profile` is either breakpoints or `{feedback: policy}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RatioFile {
    Profile(TimeProfile),
    Feedback { feedback: FeedbackPolicy },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActuatorFile {
    pub edge: String,
    pub side: Side,
    pub profile: RatioFile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkFile {
    pub nodes: Vec<NodeFile>,
    pub edges: Vec<EdgeFile>,
    #[serde(default)]
    pub actuators: Vec<ActuatorFile>,
    pub horizon: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_density: Option<InitialDensity>,
}

impl NetworkFile {
    pub fn read(path: &Path) -> Result<Self, IoError> {
        read_json(path)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("network files serialize")
    }

    pub fn from_network(net: &Network) -> Self {
        let id = |i: usize| net.nodes[i].id.clone();
        NetworkFile {
            nodes: net
                .nodes
                .iter()
                .map(|n| NodeFile {
                    id: n.id.clone(),
                    injection: n.injection.clone(),
                })
                .collect(),
            edges: net
                .edges
                .iter()
                .map(|e| EdgeFile {
                    id: e.id.clone(),
                    from: id(e.from),
                    to: id(e.to),
                    length: e.length,
                    model: e.model,
                })
                .collect(),
            actuators: net
                .actuators
                .iter()
                .map(|a| ActuatorFile {
                    edge: net.edges[a.edge].id.clone(),
                    side: a.side,
                    profile: match &a.ratio {
                        ActuatorRatio::Profile(p) => RatioFile::Profile(p.clone()),
                        ActuatorRatio::Feedback(p) => RatioFile::Feedback { feedback: p.clone() },
                    },
                })
                .collect(),
            horizon: net.horizon,
            initial_density: net.initial.clone(),
        }
    }

    /// Resolves ids and validates the network.
    pub fn into_network(self) -> Result<Network, NetworkError> {
        let node_ix: BTreeMap<&str, usize> =
            self.nodes.iter().enumerate().map(|(i, n)| (n.id.as_str(), i)).collect();
        let edges = self
            .edges
            .iter()
            .map(|e| {
                let look = |id: &str| {
                    node_ix.get(id).copied().ok_or_else(|| NetworkError::UnknownNode {
                        edge: e.id.clone(),
                        node: id.to_string(),
                    })
                };
                Ok(Edge {
                    id: e.id.clone(),
                    from: look(&e.from)?,
                    to: look(&e.to)?,
                    length: e.length,
                    model: e.model,
                })
            })
            .collect::<Result<Vec<_>, NetworkError>>()?;
        let edge_ix: BTreeMap<&str, usize> =
            self.edges.iter().enumerate().map(|(i, e)| (e.id.as_str(), i)).collect();
        let actuators = self
            .actuators
            .into_iter()
            .map(|a| {
                let edge = *edge_ix
                    .get(a.edge.as_str())
                    .ok_or_else(|| NetworkError::UnknownEdge(a.edge.clone()))?;
                Ok(Actuator {
                    edge,
                    side: a.side,
                    ratio: match a.profile {
                        RatioFile::Profile(p) => ActuatorRatio::Profile(p),
                        RatioFile::Feedback { feedback } => ActuatorRatio::Feedback(feedback),
                    },
                })
            })
            .collect::<Result<Vec<_>, NetworkError>>()?;
        let nodes = self
            .nodes
            .into_iter()
            .map(|n| Node {
                id: n.id,
                injection: n.injection,
            })
            .collect();
        Network::new(nodes, edges, actuators, self.horizon, self.initial_density)
    }
}

pub fn load_network(path: &Path) -> Result<Network, IoError> {
    Ok(NetworkFile::read(path)?.into_network()?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsFile {
    pub rho_min: NodeValues,
    pub rho_max: NodeValues,
    pub alpha_lo: f64,
    pub alpha_hi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiscretizationFile {
    pub epsilon: f64,
    /// Integrator step; defaults to half the RK4 stability estimate at the
    /// initial state, capped at a hundredth of the horizon.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
}

/// Initial densities of the three envelope trajectories, over refined node
/// labels. Absent: every scenario starts from the network's initial state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialFile {
    pub low: NodeValues,
    pub nominal: NodeValues,
    pub high: NodeValues,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OcpFile {
    /// Network file, relative to the OCP file's directory.
    pub network: PathBuf,
    pub horizon: f64,
    pub intervals: usize,
    pub bounds: BoundsFile,
    pub objective: ObjectiveSpec,
    #[serde(default)]
    pub optimizer: OptimizerSettings,
    pub discretization: DiscretizationFile,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<InitialFile>,
}

/// A loaded problem together with the settings it was built from.
#[derive(Debug, Clone)]
pub struct LoadedOcp {
    pub ocp: RobustOcp,
    pub settings: OptimizerSettings,
    pub network_path: PathBuf,
}

/// Default density for nodes without an initial value.
pub const DEFAULT_INITIAL_DENSITY: f64 = 1.0;

impl OcpFile {
    pub fn read(path: &Path) -> Result<Self, IoError> {
        read_json(path)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("problem files serialize")
    }

    /// Builds the problem; `base_dir` resolves a relative network path.
    pub fn load(&self, base_dir: &Path) -> Result<LoadedOcp, IoError> {
        let network_path = base_dir.join(&self.network);
        let net = load_network(&network_path)?;
        let ocp = self.build(&net)?;
        Ok(LoadedOcp {
            ocp,
            settings: self.optimizer.clone(),
            network_path,
        })
    }

    pub fn build(&self, net: &Network) -> Result<RobustOcp, IoError> {
        let rnet = refine_network(net, self.discretization.epsilon)?;
        let rho_min = self.bounds.rho_min.resolve(&rnet)?;
        let rho_max = self.bounds.rho_max.resolve(&rnet)?;
        let (initial, default_initial) = match &self.initial {
            Some(f) => (
                EnvelopeInitial {
                    low: f.low.resolve(&rnet)?,
                    nominal: f.nominal.resolve(&rnet)?,
                    high: f.high.resolve(&rnet)?,
                },
                false,
            ),
            None => (
                EnvelopeInitial::common(rnet.initial_state(DEFAULT_INITIAL_DENSITY)),
                true,
            ),
        };
        let step = match self.discretization.step {
            Some(h) => h,
            None => default_step(&rnet, &initial.nominal, self.horizon, self.bounds.alpha_hi)?,
        };
        let ocp = RobustOcp {
            rnet,
            horizon: self.horizon,
            intervals: self.intervals,
            rho_min,
            rho_max,
            alpha_lo: self.bounds.alpha_lo,
            alpha_hi: self.bounds.alpha_hi,
            objective: self.objective.clone(),
            step,
            initial,
            default_initial,
        };
        ocp.validate()?;
        Ok(ocp)
    }
}

fn default_step(rnet: &RefinedNetwork, rho0: &[f64], horizon: f64, alpha: f64) -> Result<f64, OcpError> {
    if rho0.iter().any(|v| !(*v > 0.0)) || !(alpha > 0.0) || !(horizon > 0.0) {
        // validation reports the actual problem
        return Ok(horizon.abs() / 100.0);
    }
    let controls = Controls::constant(&vec![alpha; rnet.base().actuators.len()]);
    simulator::default_step(rnet, rho0, &controls, horizon)
        .map_err(|e| OcpError::Invalid(format!("cannot estimate a step: {e}")))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RefinedNodeOut {
    pub index: usize,
    pub label: String,
    pub origin: NodeOrigin,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RefinedEdgeOut {
    pub index: usize,
    pub from: String,
    pub to: String,
    pub length: f64,
    pub parent: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tail_actuator: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub head_actuator: Option<usize>,
}

/// Refined topology as written by `refine`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RefinedNetworkFile {
    pub epsilon: f64,
    pub base_nodes: Vec<String>,
    pub base_edges: Vec<String>,
    pub segments: BTreeMap<String, usize>,
    pub nodes: Vec<RefinedNodeOut>,
    pub edges: Vec<RefinedEdgeOut>,
    /// Parent base edge of every refined edge, by id.
    pub parent_map: Vec<String>,
    pub total_length: f64,
    pub bounds_hold: bool,
    pub lower_bound_strict: bool,
}

impl RefinedNetworkFile {
    pub fn new(rnet: &RefinedNetwork) -> Self {
        let base = rnet.base();
        let labels = rnet.labels();
        let edge_id = |i: usize| base.edges[i].id.clone();
        RefinedNetworkFile {
            epsilon: rnet.epsilon(),
            base_nodes: base.node_ids(),
            base_edges: base.edges.iter().map(|e| e.id.clone()).collect(),
            segments: base
                .edges
                .iter()
                .zip(rnet.segments())
                .map(|(e, &n)| (e.id.clone(), n))
                .collect(),
            nodes: rnet
                .nodes()
                .iter()
                .enumerate()
                .map(|(index, n)| RefinedNodeOut {
                    index,
                    label: n.label.clone(),
                    origin: n.origin.clone(),
                })
                .collect(),
            edges: rnet
                .edges()
                .iter()
                .enumerate()
                .map(|(index, e)| RefinedEdgeOut {
                    index,
                    from: labels[e.from].clone(),
                    to: labels[e.to].clone(),
                    length: e.length,
                    parent: edge_id(e.parent),
                    tail_actuator: e.tail_actuator,
                    head_actuator: e.head_actuator,
                })
                .collect(),
            parent_map: rnet.parent_map().into_iter().map(edge_id).collect(),
            total_length: rnet.total_length(),
            bounds_hold: rnet.bounds_hold(),
            lower_bound_strict: rnet.lower_bound_strict(),
        }
    }
}
