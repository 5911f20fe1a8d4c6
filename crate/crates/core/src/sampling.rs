//! Seeded random networks, states and profiles for Monte-Carlo checks.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dissipation::DissipationModel;
use crate::dynamics::{Controls, Drive, Injections};
use crate::monotonicity::SamplePoint;
use crate::network::{Actuator, ActuatorRatio, Edge, InjectionSpec, Network, Node, Side};
use crate::profile::TimeProfile;
use crate::refine::RefinedNetwork;

pub use rand_chacha::ChaCha8Rng as SeededRng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelFamily {
    Linear,
    GasWeymouth,
    Mixed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomNetworkSpec {
    pub min_nodes: usize,
    pub max_nodes: usize,
    pub length: (f64, f64),
    pub family: ModelFamily,
    pub beta: (f64, f64),
    pub kappa: (f64, f64),
    pub delta: f64,
    /// Probability that an edge end gets an actuator.
    pub actuator_probability: f64,
    pub ratio: (f64, f64),
    /// Extra edges beyond a spanning tree, as a fraction of the node count.
    pub extra_edges: f64,
    pub horizon: f64,
}

impl Default for RandomNetworkSpec {
    fn default() -> Self {
        Self {
            min_nodes: 2,
            max_nodes: 10,
            length: (0.5, 2.0),
            family: ModelFamily::Mixed,
            beta: (0.5, 2.0),
            kappa: (0.5, 2.0),
            delta: 1e-2,
            actuator_probability: 0.3,
            ratio: (0.8, 1.5),
            extra_edges: 0.3,
            horizon: 1.0,
        }
    }
}

fn uniform(rng: &mut impl Rng, (lo, hi): (f64, f64)) -> f64 {
    if hi > lo {
        rng.gen_range(lo..hi)
    } else {
        lo
    }
}

/// Random positive ramp over `[0, horizon]` with values in `range`.
pub fn random_ratio_profile(rng: &mut impl Rng, range: (f64, f64), horizon: f64) -> TimeProfile {
    let a = uniform(rng, range);
    let b = uniform(rng, range);
    TimeProfile::ramp(0.0, a, horizon, b).expect("horizon is positive")
}

/// Random piecewise-linear profile with `pieces` segments over
/// `[0, horizon]` and values in `range`.
pub fn random_profile(rng: &mut impl Rng, range: (f64, f64), horizon: f64, pieces: usize) -> TimeProfile {
    let n = pieces.max(1);
    TimeProfile::new(
        (0..=n)
            .map(|k| (horizon * k as f64 / n as f64, uniform(rng, range)))
            .collect(),
    )
    .expect("breakpoints are increasing")
}

/// Random profile between `lower` and `upper` at every time: a convex
/// combination with a random piecewise-linear weight in `[0, 1]`.
pub fn random_interior_profile(
    rng: &mut impl Rng,
    lower: &TimeProfile,
    upper: &TimeProfile,
    horizon: f64,
    pieces: usize,
) -> TimeProfile {
    let weight = random_profile(rng, (0.0, 1.0), horizon, pieces);
    let mut times: Vec<f64> = lower
        .points()
        .iter()
        .chain(upper.points())
        .chain(weight.points())
        .map(|&(t, _)| t)
        .collect();
    times.sort_by(f64::total_cmp);
    times.dedup();
    // the weighted combination is quadratic between breakpoints; sample it at
    // a few interior points. Interpolating in-band samples stays in band since
    // both bounds are linear there.
    let mut dense = Vec::new();
    for w in times.windows(2) {
        for k in 0..4 {
            dense.push(w[0] + (w[1] - w[0]) * k as f64 / 4.0);
        }
    }
    dense.push(*times.last().expect("profiles are non-empty"));
    TimeProfile::new(
        dense
            .into_iter()
            .map(|t| {
                let (lo, hi) = (lower.value(t), upper.value(t));
                let s = weight.value(t);
                (t, lo + s * (hi - lo))
            })
            .collect(),
    )
    .expect("times are increasing")
}

pub fn random_network(rng: &mut impl Rng, spec: &RandomNetworkSpec) -> Network {
    let n = rng.gen_range(spec.min_nodes.max(2)..=spec.max_nodes.max(spec.min_nodes.max(2)));
    let nodes: Vec<Node> = (0..n)
        .map(|i| Node {
            id: format!("n{i}"),
            injection: None,
        })
        .collect();
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for i in 1..n {
        let j = rng.gen_range(0..i);
        pairs.push(if rng.gen_bool(0.5) { (i, j) } else { (j, i) });
    }
    let extra = (spec.extra_edges * n as f64).round() as usize;
    for _ in 0..extra {
        let a = rng.gen_range(0..n);
        let b = rng.gen_range(0..n);
        if a != b {
            pairs.push((a, b));
        }
    }
    let edges: Vec<Edge> = pairs
        .into_iter()
        .enumerate()
        .map(|(k, (from, to))| {
            let linear = match spec.family {
                ModelFamily::Linear => true,
                ModelFamily::GasWeymouth => false,
                ModelFamily::Mixed => rng.gen_bool(0.5),
            };
            let model = if linear {
                DissipationModel::linear(uniform(rng, spec.beta))
            } else {
                DissipationModel::gas(uniform(rng, spec.kappa), spec.delta)
            };
            Edge {
                id: format!("e{k}"),
                from,
                to,
                length: uniform(rng, spec.length),
                model,
            }
        })
        .collect();
    let mut actuators = Vec::new();
    for k in 0..edges.len() {
        for side in [Side::Plus, Side::Minus] {
            if rng.gen_bool(spec.actuator_probability) {
                actuators.push(Actuator {
                    edge: k,
                    side,
                    ratio: ActuatorRatio::Profile(random_ratio_profile(rng, spec.ratio, spec.horizon)),
                });
            }
        }
    }
    Network::new(nodes, edges, actuators, spec.horizon, None).expect("generated network is valid")
}

/// Random positive state with entries in `range`.
pub fn random_state(rng: &mut impl Rng, n: usize, range: (f64, f64)) -> Vec<f64> {
    (0..n).map(|_| uniform(rng, range)).collect()
}

/// Injections with a random piecewise-linear profile at every base node.
pub fn random_injections(
    rng: &mut impl Rng,
    rnet: &RefinedNetwork,
    range: (f64, f64),
    pieces: usize,
) -> Injections {
    let horizon = rnet.base().horizon;
    Injections::from_base(
        rnet,
        (0..rnet.base_node_count())
            .map(|_| Some(random_profile(rng, range, horizon, pieces)))
            .collect(),
    )
}

/// Pointwise sum of two injection sets.
pub fn add_injections(a: &Injections, b: &Injections) -> Injections {
    Injections::new(
        a.profiles()
            .iter()
            .zip(b.profiles())
            .map(|(x, y)| match (x, y) {
                (Some(x), Some(y)) => Some(x.add(y)),
                (Some(x), None) | (None, Some(x)) => Some(x.clone()),
                (None, None) => None,
            })
            .collect(),
    )
}

/// Box over which Jacobian sign checks sample operating points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingBox {
    pub density: (f64, f64),
    pub time: (f64, f64),
    /// Range for open-loop ratio values; feedback drives are kept as given.
    pub ratio: (f64, f64),
    /// Range for open-loop ratio time derivatives.
    pub ratio_rate: (f64, f64),
}

impl SamplingBox {
    pub fn for_network(net: &Network) -> Self {
        Self {
            density: (0.5, 2.0),
            time: (0.0, net.horizon),
            ratio: (0.5, 2.0),
            ratio_rate: (-0.5, 0.5),
        }
    }
}

/// Random operating points: densities, times and open-loop ratios (with a
/// random local slope) drawn uniformly from `bx`.
pub fn random_samples(
    rng: &mut impl Rng,
    rnet: &RefinedNetwork,
    template: &Controls,
    bx: &SamplingBox,
    count: usize,
) -> Vec<SamplePoint> {
    (0..count)
        .map(|_| {
            let time = uniform(rng, bx.time);
            let rho = random_state(rng, rnet.node_count(), bx.density);
            let drives = template
                .drives()
                .iter()
                .map(|d| match d {
                    Drive::Feedback(p) => Drive::Feedback(p.clone()),
                    Drive::Profile(_) => {
                        let v = uniform(rng, bx.ratio);
                        let s = uniform(rng, bx.ratio_rate);
                        Drive::Profile(
                            TimeProfile::ramp(time - 1.0, v - s, time + 1.0, v + s).expect("increasing"),
                        )
                    }
                })
                .collect();
            SamplePoint {
                time,
                rho,
                controls: Controls::new(drives),
            }
        })
        .collect()
}

/// Attaches a constant injection envelope to every base node.
pub fn with_constant_injections(mut net: Network, nominal: &[f64]) -> Network {
    for (node, &q) in net.nodes.iter_mut().zip(nominal) {
        node.injection = Some(InjectionSpec::constant(q));
    }
    net
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn generation_is_seeded() {
        let spec = RandomNetworkSpec::default();
        let a = random_network(&mut SeededRng::seed_from_u64(7), &spec);
        let b = random_network(&mut SeededRng::seed_from_u64(7), &spec);
        assert_eq!(a, b);
        assert!(a.nodes.len() >= 2 && a.nodes.len() <= 10);
    }

    #[test]
    fn interior_profile_stays_in_band() {
        let mut rng = SeededRng::seed_from_u64(3);
        let lo = TimeProfile::new(vec![(0.0, -1.0), (0.4, -0.5), (1.0, -0.8)]).unwrap();
        let hi = TimeProfile::new(vec![(0.0, 0.0), (0.7, 0.5), (1.0, 0.1)]).unwrap();
        for _ in 0..50 {
            let p = random_interior_profile(&mut rng, &lo, &hi, 1.0, 5);
            for k in 0..=1000 {
                let t = k as f64 / 1000.0;
                let v = p.value(t);
                assert!(v >= lo.value(t) - 1e-12 && v <= hi.value(t) + 1e-12, "t = {t}");
            }
        }
    }
}
