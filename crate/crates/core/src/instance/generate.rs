//! Seeded construction of time-dependent instances from classic CARP data.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{ArcSpec, Instance, InstanceHeader, InstanceType, ServiceSpec};
use crate::error::InstanceError;
use crate::scalar::Scalar;

/// Undirected edge of a classic CARP instance (0-based, depot = 0).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClassicEdge {
    pub u: usize,
    pub v: usize,
    pub cost: f64,
    /// Zero for non-required edges.
    pub demand: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClassicInstance {
    pub name: String,
    pub n_vertices: usize,
    pub capacity: f64,
    pub edges: Vec<ClassicEdge>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WindowKind {
    /// Window covers the whole horizon: every task always costs `min_sc`.
    FlatEverywhere,
    /// Windows drawn uniformly near the start of the horizon.
    Random,
}

/// How optimal service windows are drawn.
///
/// All fractions are relative to the planning horizon. For three-segment
/// functions the window center is uniform on `[0, center_span]` and the
/// width uniform on `[width_min, width_max]`; for two-segment functions the
/// window is `[0, et]` with `et` drawn like a three-segment width.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IntervalPolicy {
    pub kind: WindowKind,
    pub horizon_factor: f64,
    pub center_span: f64,
    pub width_min: f64,
    pub width_max: f64,
}

impl Default for IntervalPolicy {
    fn default() -> Self {
        IntervalPolicy {
            kind: WindowKind::Random,
            horizon_factor: 2.0,
            center_span: 0.1,
            width_min: 0.01,
            width_max: 0.05,
        }
    }
}

impl IntervalPolicy {
    pub fn flat() -> Self {
        IntervalPolicy { kind: WindowKind::FlatEverywhere, ..Default::default() }
    }
}

fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

/// Builds a directed time-dependent instance from an undirected classic one.
///
/// Every edge `{u, v}` becomes arc `u -> v` (required when the edge has
/// demand) plus its travel-only inverse `v -> u`. Length, travel time, travel
/// cost and service time all equal the classic edge cost, and `min_sc` equals
/// the classic serving cost, so flat windows reproduce classic CARP exactly.
pub fn generate_td_parameters<S: Scalar>(
    base: &ClassicInstance,
    itype: InstanceType,
    slope_abs: f64,
    policy: &IntervalPolicy,
    seed: u64,
) -> Result<Instance<S>, InstanceError> {
    if slope_abs < 0.0 || slope_abs.is_nan() {
        return Err(InstanceError::NegativeSlope);
    }
    if !(policy.center_span > 0.0
        && policy.center_span <= 1.0
        && policy.width_min >= 0.0
        && policy.width_min <= policy.width_max
        && policy.width_max <= 1.0)
    {
        return Err(InstanceError::Generator("interval policy fractions out of range".into()));
    }
    let total_time: f64 = base
        .edges
        .iter()
        .map(|e| if e.demand > 0.0 { 3.0 * e.cost } else { 2.0 * e.cost })
        .sum();
    let horizon = policy.horizon_factor * total_time;
    if !(horizon > 0.0) || !horizon.is_finite() {
        return Err(InstanceError::Generator("horizon too small to contain any interval".into()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut specs = Vec::with_capacity(2 * base.edges.len());
    for e in &base.edges {
        let service = (e.demand > 0.0).then(|| {
            let (bt, et) = match (policy.kind, itype) {
                (WindowKind::FlatEverywhere, _) => (0.0, horizon),
                (WindowKind::Random, InstanceType::TwoLp) => {
                    let frac = rng.random_range(policy.width_min..=policy.width_max);
                    (0.0, round2(frac * horizon))
                }
                (WindowKind::Random, InstanceType::ThreeLp) => {
                    let center = rng.random_range(0.0..=policy.center_span) * horizon;
                    let width = rng.random_range(policy.width_min..=policy.width_max) * horizon;
                    let bt = round2((center - width / 2.0).max(0.0));
                    let et = round2((center + width / 2.0).min(horizon));
                    (bt, et)
                }
            };
            ServiceSpec {
                demand: S::c(e.demand),
                service_time: S::c(e.cost),
                min_sc: S::c(e.cost),
                bt: S::c(bt),
                et: S::c(et),
            }
        });
        let c = S::c(e.cost);
        specs.push(ArcSpec { tail: e.u, head: e.v, length: c, travel_time: c, travel_cost: c, service });
        specs.push(ArcSpec { tail: e.v, head: e.u, length: c, travel_time: c, travel_cost: c, service: None });
    }

    let name = match (policy.kind, itype) {
        (WindowKind::FlatEverywhere, InstanceType::TwoLp) => format!("2lp-{}-flat", base.name),
        (WindowKind::FlatEverywhere, InstanceType::ThreeLp) => format!("3lp-{}-flat", base.name),
        (WindowKind::Random, InstanceType::TwoLp) => format!("2lp-{}-s{seed}", base.name),
        (WindowKind::Random, InstanceType::ThreeLp) => format!("3lp-{}-s{seed}", base.name),
    };
    Instance::new(
        InstanceHeader {
            name,
            n_vertices: base.n_vertices,
            capacity: S::c(base.capacity),
            horizon: S::c(horizon),
            instance_type: itype,
            slope_abs: S::c(slope_abs),
        },
        specs,
    )
}

/// Random connected undirected base instance, for scaling experiments.
///
/// A random spanning tree guarantees connectivity; the remaining edges join
/// random distinct vertex pairs. The first `n_required` edges (after a
/// shuffle) carry integer demand in `[1, max_demand]`.
#[allow(clippy::too_many_arguments)]
pub fn random_base(
    name: &str,
    n_vertices: usize,
    n_edges: usize,
    n_required: usize,
    max_cost: u32,
    max_demand: u32,
    capacity: f64,
    seed: u64,
) -> Result<ClassicInstance, InstanceError> {
    if n_vertices < 2 || n_edges < n_vertices - 1 || n_required > n_edges || max_cost == 0 {
        return Err(InstanceError::Generator("inconsistent random base dimensions".into()));
    }
    let max_pairs = n_vertices * (n_vertices - 1) / 2;
    if n_edges > max_pairs {
        return Err(InstanceError::Generator("too many edges for a simple graph".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (1..n_vertices).collect();
    order.shuffle(&mut rng);
    let mut pairs = std::collections::BTreeSet::new();
    let mut connected = vec![0usize];
    for v in order {
        let u = connected[rng.random_range(0..connected.len())];
        pairs.insert((u.min(v), u.max(v)));
        connected.push(v);
    }
    while pairs.len() < n_edges {
        let u = rng.random_range(0..n_vertices);
        let v = rng.random_range(0..n_vertices);
        if u != v {
            pairs.insert((u.min(v), u.max(v)));
        }
    }
    let mut pairs: Vec<_> = pairs.into_iter().collect();
    pairs.shuffle(&mut rng);
    let edges = pairs
        .into_iter()
        .enumerate()
        .map(|(i, (u, v))| ClassicEdge {
            u,
            v,
            cost: f64::from(rng.random_range(1..=max_cost)),
            demand: if i < n_required { f64::from(rng.random_range(1..=max_demand.max(1))) } else { 0.0 },
        })
        .collect();
    Ok(ClassicInstance { name: name.to_string(), n_vertices, capacity, edges })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> ClassicInstance {
        ClassicInstance {
            name: "toy".into(),
            n_vertices: 3,
            capacity: 5.0,
            edges: vec![
                ClassicEdge { u: 0, v: 1, cost: 4.0, demand: 1.0 },
                ClassicEdge { u: 1, v: 2, cost: 6.0, demand: 2.0 },
                ClassicEdge { u: 0, v: 2, cost: 1.0, demand: 0.0 },
            ],
        }
    }

    #[test]
    fn flat_policy_spans_whole_horizon() {
        let inst: Instance<f64> =
            generate_td_parameters(&toy(), InstanceType::TwoLp, 1.0, &IntervalPolicy::flat(), 1).unwrap();
        assert_eq!(inst.n_tasks(), 2);
        // horizon = 2 * (dt of both directions + st of required arcs)
        assert_eq!(inst.horizon, 2.0 * (2.0 * 11.0 + 10.0));
        for t in 0..inst.n_tasks() {
            let f = inst.cost_fn(t);
            assert_eq!((f.bt, f.et), (0.0, inst.horizon));
            assert_eq!(f.eval(inst.horizon), f.min_sc);
            assert!(inst.is_reversible(t));
        }
    }

    #[test]
    fn generation_is_deterministic_in_seed() {
        let p = IntervalPolicy::default();
        let a: Instance<f64> = generate_td_parameters(&toy(), InstanceType::ThreeLp, 2.0, &p, 9).unwrap();
        let b: Instance<f64> = generate_td_parameters(&toy(), InstanceType::ThreeLp, 2.0, &p, 9).unwrap();
        assert_eq!(a, b);
        for t in 0..a.n_tasks() {
            let f = a.cost_fn(t);
            assert!(f.bt >= 0.0 && f.bt <= f.et && f.et <= a.horizon);
        }
    }

    #[test]
    fn negative_slope_and_empty_horizon_rejected() {
        let p = IntervalPolicy::default();
        assert_eq!(
            generate_td_parameters::<f64>(&toy(), InstanceType::ThreeLp, -1.0, &p, 0),
            Err(InstanceError::NegativeSlope)
        );
        let zero = IntervalPolicy { horizon_factor: 0.0, ..p };
        assert!(matches!(
            generate_td_parameters::<f64>(&toy(), InstanceType::ThreeLp, 1.0, &zero, 0),
            Err(InstanceError::Generator(_))
        ));
    }

    #[test]
    fn random_base_is_connected_and_sized() {
        let b = random_base("r", 30, 45, 40, 20, 5, 30.0, 3).unwrap();
        assert_eq!(b.edges.len(), 45);
        assert_eq!(b.edges.iter().filter(|e| e.demand > 0.0).count(), 40);
        let inst: Instance<f64> =
            generate_td_parameters(&b, InstanceType::ThreeLp, 1.0, &IntervalPolicy::default(), 3).unwrap();
        assert_eq!(inst.n_tasks(), 40);
    }
}
