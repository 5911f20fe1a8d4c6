//! Spatial refinement of a network into short segments.
//!
//! Every base edge of length `L` is split into `n = floor(L / eps) + 1` equal
//! segments. Then `L / n < eps` because `n > L / eps`, and
//! `L / n >= eps L / (eps + L)` because `n <= L / eps + 1 = (L + eps) / eps`,
//! so no epsilon is too large. The lower bound is strict unless `L / eps` is
//! an integer; in that case no split into segments shorter than `eps` can
//! satisfy it strictly, and it holds with equality.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::network::{InjectionSpec, Network, Side};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RefineError {
    #[error("epsilon must be positive")]
    NonPositiveEpsilon,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NodeOrigin {
    Base { node: usize },
    /// `index` runs from 1 to `segments - 1` along the parent edge.
    Interior { edge: usize, index: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefinedNode {
    pub label: String,
    pub origin: NodeOrigin,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefinedEdge {
    pub from: usize,
    pub to: usize,
    pub length: f64,
    pub parent: usize,
    /// Base actuator acting at the tail of this segment, if any.
    pub tail_actuator: Option<usize>,
    /// Base actuator acting at the head of this segment, if any.
    pub head_actuator: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum End {
    Tail,
    Head,
}

#[derive(Debug, Clone)]
pub struct RefinedNetwork {
    base: Network,
    epsilon: f64,
    nodes: Vec<RefinedNode>,
    edges: Vec<RefinedEdge>,
    segments: Vec<usize>,
    incidence: Vec<Vec<(usize, End)>>,
}

pub fn segment_count(length: f64, epsilon: f64) -> usize {
    let mut n = (length / epsilon).floor() as usize + 1;
    // the division may round up across an integer
    while length / n as f64 >= epsilon {
        n += 1;
    }
    n
}

pub fn refine_network(net: &Network, epsilon: f64) -> Result<RefinedNetwork, RefineError> {
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(RefineError::NonPositiveEpsilon);
    }
    let mut nodes: Vec<RefinedNode> = net
        .nodes
        .iter()
        .enumerate()
        .map(|(i, n)| RefinedNode {
            label: n.id.clone(),
            origin: NodeOrigin::Base { node: i },
        })
        .collect();
    let mut edges = Vec::new();
    let mut segments = Vec::with_capacity(net.edges.len());

    for (ei, e) in net.edges.iter().enumerate() {
        let n = segment_count(e.length, epsilon);
        segments.push(n);
        let seg = e.length / n as f64;
        let tail_act = net
            .actuators
            .iter()
            .position(|a| a.edge == ei && a.side == Side::Plus);
        let head_act = net
            .actuators
            .iter()
            .position(|a| a.edge == ei && a.side == Side::Minus);
        let mut prev = e.from;
        for k in 1..=n {
            let next = if k == n {
                e.to
            } else {
                nodes.push(RefinedNode {
                    label: format!("{}#{}", e.id, k),
                    origin: NodeOrigin::Interior { edge: ei, index: k },
                });
                nodes.len() - 1
            };
            edges.push(RefinedEdge {
                from: prev,
                to: next,
                length: seg,
                parent: ei,
                tail_actuator: if k == 1 { tail_act } else { None },
                head_actuator: if k == n { head_act } else { None },
            });
            prev = next;
        }
    }

    let mut incidence = vec![Vec::new(); nodes.len()];
    for (k, e) in edges.iter().enumerate() {
        incidence[e.from].push((k, End::Tail));
        incidence[e.to].push((k, End::Head));
    }

    Ok(RefinedNetwork {
        base: net.clone(),
        epsilon,
        nodes,
        edges,
        segments,
        incidence,
    })
}

impl RefinedNetwork {
    pub fn base(&self) -> &Network {
        &self.base
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn nodes(&self) -> &[RefinedNode] {
        &self.nodes
    }

    pub fn edges(&self) -> &[RefinedEdge] {
        &self.edges
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn base_node_count(&self) -> usize {
        self.base.nodes.len()
    }

    /// Number of segments each base edge was split into.
    pub fn segments(&self) -> &[usize] {
        &self.segments
    }

    /// Refined edge -> base edge.
    pub fn parent_map(&self) -> Vec<usize> {
        self.edges.iter().map(|e| e.parent).collect()
    }

    /// Segments touching `node`, with which end touches it.
    pub fn incident(&self, node: usize) -> &[(usize, End)] {
        &self.incidence[node]
    }

    pub fn labels(&self) -> Vec<String> {
        self.nodes.iter().map(|n| n.label.clone()).collect()
    }

    pub fn node_by_label(&self, label: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n.label == label)
    }

    /// Injection attached to a refined node. Interior nodes carry none.
    pub fn injection(&self, node: usize) -> Option<&InjectionSpec> {
        match self.nodes[node].origin {
            NodeOrigin::Base { node } => self.base.nodes[node].injection.as_ref(),
            NodeOrigin::Interior { .. } => None,
        }
    }

    pub fn total_length(&self) -> f64 {
        self.edges.iter().map(|e| e.length).sum()
    }

    /// Half-length sum of the segments incident to each node.
    pub fn half_lengths(&self) -> Vec<f64> {
        (0..self.node_count())
            .map(|j| self.incidence[j].iter().map(|&(k, _)| 0.5 * self.edges[k].length).sum())
            .collect()
    }

    /// Nodes joined by at least one segment.
    pub fn adjacent(&self, a: usize, b: usize) -> bool {
        self.incidence[a].iter().any(|&(k, end)| {
            let e = &self.edges[k];
            match end {
                End::Tail => e.to == b,
                End::Head => e.from == b,
            }
        })
    }

    /// Initial densities on the refined nodes: base nodes take the network's
    /// initial values (or `default`), interior nodes interpolate linearly
    /// between the two ends of their parent edge.
    pub fn initial_state(&self, default: f64) -> Vec<f64> {
        let base = self.base.initial_base_densities(default);
        self.nodes
            .iter()
            .map(|n| match n.origin {
                NodeOrigin::Base { node } => base[node],
                NodeOrigin::Interior { edge, index } => {
                    let e = &self.base.edges[edge];
                    let s = index as f64 / self.segments[edge] as f64;
                    base[e.from] * (1.0 - s) + base[e.to] * s
                }
            })
            .collect()
    }

    /// Whether every segment satisfies `eps L / (eps + L) <= l < eps`
    /// against its parent length `L` (lower bound up to round-off).
    pub fn bounds_hold(&self) -> bool {
        let eps = self.epsilon;
        self.edges.iter().all(|e| {
            let parent = self.base.edges[e.parent].length;
            let lower = eps * parent / (eps + parent);
            e.length >= lower * (1.0 - 1e-12) && e.length < eps
        })
    }

    /// Whether the lower bound is strict for every segment.
    pub fn lower_bound_strict(&self) -> bool {
        let eps = self.epsilon;
        self.edges.iter().all(|e| {
            let parent = self.base.edges[e.parent].length;
            e.length > eps * parent / (eps + parent)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dissipation::DissipationModel;
    use crate::network::{Actuator, ActuatorRatio, Edge, Node};
    use crate::profile::TimeProfile;
    use proptest::prelude::*;

    fn pipe(length: f64) -> Network {
        Network::new(
            vec![
                Node { id: "a".into(), injection: None },
                Node { id: "b".into(), injection: None },
            ],
            vec![Edge {
                id: "p".into(),
                from: 0,
                to: 1,
                length,
                model: DissipationModel::linear(1.0),
            }],
            vec![Actuator {
                edge: 0,
                side: Side::Plus,
                ratio: ActuatorRatio::Profile(TimeProfile::constant(1.5)),
            }],
            1.0,
            None,
        )
        .unwrap()
    }

    #[test]
    fn four_segments() {
        let r = refine_network(&pipe(1.0), 0.3).unwrap();
        assert_eq!(r.edge_count(), 4);
        for e in r.edges() {
            assert!((e.length - 0.25).abs() < 1e-15);
        }
        // 0.3 * 1 / 1.3 = 0.2308
        assert!(r.bounds_hold());
        assert_eq!(r.node_count(), 5);
        assert_eq!(r.nodes()[2].label, "p#1");
    }

    #[test]
    fn no_subdivision_for_large_epsilon() {
        let r = refine_network(&pipe(1.0), 2.0).unwrap();
        assert_eq!(r.edge_count(), 1);
        assert_eq!(r.edges()[0].length, 1.0);
        assert!(r.bounds_hold());
    }

    #[test]
    fn integer_ratio_forces_extra_segment() {
        let r = refine_network(&pipe(1.0), 0.5).unwrap();
        assert_eq!(r.edge_count(), 3);
        assert!((r.edges()[0].length - 1.0 / 3.0).abs() < 1e-15);
        // 0.5 * 1 / 1.5 = 1/3: the lower bound is met with equality
        assert!(r.bounds_hold());
        assert!(!r.lower_bound_strict());
        assert!(refine_network(&pipe(1.0), 0.3).unwrap().lower_bound_strict());
    }

    #[test]
    fn rejects_nonpositive_epsilon() {
        assert_eq!(refine_network(&pipe(1.0), 0.0).unwrap_err(), RefineError::NonPositiveEpsilon);
        assert_eq!(refine_network(&pipe(1.0), -1.0).unwrap_err(), RefineError::NonPositiveEpsilon);
    }

    #[test]
    fn actuator_stays_on_end_segment() {
        let r = refine_network(&pipe(1.0), 0.3).unwrap();
        assert_eq!(r.edges()[0].tail_actuator, Some(0));
        assert!(r.edges()[1..].iter().all(|e| e.tail_actuator.is_none() && e.head_actuator.is_none()));
        assert_eq!(r.edges()[0].from, 0);
        assert_eq!(r.edges()[3].to, 1);
    }

    #[test]
    fn interior_initial_state_interpolates() {
        let mut net = pipe(1.0);
        let mut m = std::collections::BTreeMap::new();
        m.insert("a".to_string(), 1.0);
        m.insert("b".to_string(), 2.0);
        net.initial = Some(crate::network::InitialDensity::PerNode(m));
        let r = refine_network(&net, 0.3).unwrap();
        assert_eq!(r.initial_state(1.0), vec![1.0, 2.0, 1.25, 1.5, 1.75]);
    }

    fn random_lengths() -> impl Strategy<Value = (Vec<f64>, f64)> {
        (prop::collection::vec(1e-3f64..1e3, 1..6), 1e-3f64..1e2)
    }

    fn chain(lengths: &[f64]) -> Network {
        let nodes = (0..=lengths.len())
            .map(|i| Node { id: format!("n{i}"), injection: None })
            .collect();
        let edges = lengths
            .iter()
            .enumerate()
            .map(|(i, &l)| Edge {
                id: format!("e{i}"),
                from: i,
                to: i + 1,
                length: l,
                model: DissipationModel::linear(1.0),
            })
            .collect();
        Network::new(nodes, edges, vec![], 1.0, None).unwrap()
    }

    proptest! {
        #[test]
        fn refinement_invariants((lengths, eps) in random_lengths()) {
            let net = chain(&lengths);
            let r = refine_network(&net, eps).unwrap();
            prop_assert!(r.bounds_hold());
            let rel = (r.total_length() - net.total_length()).abs() / net.total_length();
            prop_assert!(rel < 1e-12);
            let parents = r.parent_map();
            for e in 0..net.edges.len() {
                prop_assert!(parents.contains(&e));
                let sum: f64 = r.edges().iter().filter(|s| s.parent == e).map(|s| s.length).sum();
                prop_assert!((sum - lengths[e]).abs() <= 1e-12 * lengths[e]);
            }
            prop_assert!(parents.iter().all(|&p| p < net.edges.len()));
            for i in 0..net.nodes.len() {
                prop_assert_eq!(&r.nodes()[i].label, &net.nodes[i].id);
            }
        }

        #[test]
        fn refining_segments_again_is_identity((lengths, eps) in random_lengths()) {
            let r = refine_network(&chain(&lengths), eps).unwrap();
            for e in r.edges() {
                prop_assert_eq!(segment_count(e.length, eps), 1);
            }
        }
    }
}
