//! Problem data: arcs, tasks, time-dependent service cost functions.

mod format;
mod generate;
mod paths;

use std::collections::VecDeque;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::InstanceError;
use crate::scalar::Scalar;

pub use format::{parse_classic_dat, parse_instance, parse_instance_str, write_instance};
pub use generate::{
    generate_td_parameters, random_base, ClassicInstance, ClassicEdge, IntervalPolicy, WindowKind,
};
pub use paths::{all_pairs_shortest_paths, ShortestPathMatrix};

pub type VertexId = usize;
pub type ArcId = usize;
/// Index into [`Instance::tasks`].
pub type TaskId = usize;

/// The depot is always vertex 0.
pub const DEPOT: VertexId = 0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum InstanceType {
    /// Two-segment functions: flat, then increasing.
    #[serde(rename = "2LP")]
    TwoLp,
    /// Three-segment functions: decreasing, flat, increasing.
    #[serde(rename = "3LP")]
    ThreeLp,
}

impl fmt::Display for InstanceType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InstanceType::TwoLp => write!(f, "2LP"),
            InstanceType::ThreeLp => write!(f, "3LP"),
        }
    }
}

impl std::str::FromStr for InstanceType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "2LP" => Ok(InstanceType::TwoLp),
            "3LP" => Ok(InstanceType::ThreeLp),
            other => Err(format!("unknown instance type `{other}`")),
        }
    }
}

/// How long a vehicle spends servicing a task.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ServiceDuration {
    /// Duration is the static service time `st(e)`.
    #[default]
    Static,
    /// Duration equals the service cost at the service beginning time.
    CostCoupled,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SegmentKind {
    TwoSegment,
    ThreeSegment,
}

/// Piecewise-linear service cost as a function of the service beginning time.
///
/// The cost equals `min_sc` on the optimal window `[bt, et]` and grows with
/// slope `slope_abs` on either side of it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ServiceCostFunction<S> {
    pub kind: SegmentKind,
    pub bt: S,
    pub et: S,
    pub min_sc: S,
    pub slope_abs: S,
}

impl<S: Scalar> ServiceCostFunction<S> {
    /// Distance from `t` to the optimal window; zero inside it.
    pub fn time_gap(&self, t: S) -> S {
        if t < self.bt {
            self.bt - t
        } else if t > self.et {
            t - self.et
        } else {
            S::zero()
        }
    }

    pub fn eval(&self, t: S) -> S {
        self.min_sc + self.time_gap(t) * self.slope_abs
    }
}

/// Service attributes carried only by required arcs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Service<S> {
    pub demand: S,
    pub service_time: S,
    pub cost_fn: ServiceCostFunction<S>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Arc<S> {
    pub id: ArcId,
    pub tail: VertexId,
    pub head: VertexId,
    pub length: S,
    pub travel_time: S,
    pub travel_cost: S,
    pub service: Option<Service<S>>,
    pub inverse: Option<ArcId>,
}

impl<S> Arc<S> {
    pub fn is_required(&self) -> bool {
        self.service.is_some()
    }
}

/// Arc as written in an instance file, before ids and inverses are assigned.
#[derive(Clone, Debug, PartialEq)]
pub struct ArcSpec<S> {
    pub tail: VertexId,
    pub head: VertexId,
    pub length: S,
    pub travel_time: S,
    pub travel_cost: S,
    pub service: Option<ServiceSpec<S>>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ServiceSpec<S> {
    pub demand: S,
    pub service_time: S,
    pub min_sc: S,
    pub bt: S,
    pub et: S,
}

/// A validated problem instance. Immutable once built.
#[derive(Clone, Debug, PartialEq)]
pub struct Instance<S> {
    pub name: String,
    pub n_vertices: usize,
    pub arcs: Vec<Arc<S>>,
    /// Required arc id of every task.
    pub tasks: Vec<ArcId>,
    pub capacity: S,
    pub horizon: S,
    pub instance_type: InstanceType,
    pub slope_abs: S,
    pub fleet_bound: Option<usize>,
    pub service_duration: ServiceDuration,
}

/// Header values shared by the file format and the generator.
#[derive(Clone, Debug, PartialEq)]
pub struct InstanceHeader<S> {
    pub name: String,
    pub n_vertices: usize,
    pub capacity: S,
    pub horizon: S,
    pub instance_type: InstanceType,
    pub slope_abs: S,
}

impl<S: Scalar> Instance<S> {
    /// Assigns arc ids and inverses, then checks every invariant.
    ///
    /// Inverse arcs are paired greedily in file order: each arc is matched
    /// with the first later unmatched arc running in the opposite direction.
    pub fn new(header: InstanceHeader<S>, specs: Vec<ArcSpec<S>>) -> Result<Self, InstanceError> {
        let InstanceHeader { name, n_vertices, capacity, horizon, instance_type, slope_abs } =
            header;
        if n_vertices == 0 {
            return Err(InstanceError::Empty);
        }
        if capacity <= S::zero() {
            return Err(InstanceError::NonPositiveCapacity);
        }
        if horizon <= S::zero() {
            return Err(InstanceError::NonPositiveHorizon);
        }
        if slope_abs < S::zero() {
            return Err(InstanceError::NegativeSlope);
        }
        let kind = match instance_type {
            InstanceType::TwoLp => SegmentKind::TwoSegment,
            InstanceType::ThreeLp => SegmentKind::ThreeSegment,
        };

        let mut arcs = Vec::with_capacity(specs.len());
        let mut tasks = Vec::new();
        for (id, spec) in specs.into_iter().enumerate() {
            for v in [spec.tail, spec.head] {
                if v >= n_vertices {
                    return Err(InstanceError::VertexOutOfRange { arc: id, vertex: v, n_vertices });
                }
            }
            if spec.tail == spec.head {
                return Err(InstanceError::SelfLoop { arc: id, vertex: spec.tail });
            }
            let service = match spec.service {
                None => None,
                Some(s) => {
                    if s.demand <= S::zero() {
                        return Err(InstanceError::NonPositiveDemand { arc: id });
                    }
                    if s.bt < S::zero() || s.bt > s.et || s.et > horizon {
                        return Err(InstanceError::BadWindow {
                            arc: id,
                            bt: s.bt.as_f64(),
                            et: s.et.as_f64(),
                            horizon: horizon.as_f64(),
                        });
                    }
                    if kind == SegmentKind::TwoSegment && s.bt != S::zero() {
                        return Err(InstanceError::TwoSegmentWindow { arc: id });
                    }
                    tasks.push(id);
                    Some(Service {
                        demand: s.demand,
                        service_time: s.service_time,
                        cost_fn: ServiceCostFunction {
                            kind,
                            bt: s.bt,
                            et: s.et,
                            min_sc: s.min_sc,
                            slope_abs,
                        },
                    })
                }
            };
            arcs.push(Arc {
                id,
                tail: spec.tail,
                head: spec.head,
                length: spec.length,
                travel_time: spec.travel_time,
                travel_cost: spec.travel_cost,
                service,
                inverse: None,
            });
        }

        for i in 0..arcs.len() {
            if arcs[i].inverse.is_some() {
                continue;
            }
            let (t, h) = (arcs[i].tail, arcs[i].head);
            if let Some(j) = (i + 1..arcs.len())
                .find(|&j| arcs[j].inverse.is_none() && arcs[j].tail == h && arcs[j].head == t)
            {
                arcs[i].inverse = Some(j);
                arcs[j].inverse = Some(i);
            }
        }

        let inst = Instance {
            name,
            n_vertices,
            arcs,
            tasks,
            capacity,
            horizon,
            instance_type,
            slope_abs,
            fleet_bound: None,
            service_duration: ServiceDuration::Static,
        };
        inst.check_reachability()?;
        Ok(inst)
    }

    pub fn header(&self) -> InstanceHeader<S> {
        InstanceHeader {
            name: self.name.clone(),
            n_vertices: self.n_vertices,
            capacity: self.capacity,
            horizon: self.horizon,
            instance_type: self.instance_type,
            slope_abs: self.slope_abs,
        }
    }

    pub fn n_tasks(&self) -> usize {
        self.tasks.len()
    }

    pub fn task_arc(&self, task: TaskId) -> &Arc<S> {
        &self.arcs[self.tasks[task]]
    }

    fn service(&self, task: TaskId) -> &Service<S> {
        self.task_arc(task).service.as_ref().expect("task arcs are required")
    }

    pub fn demand(&self, task: TaskId) -> S {
        self.service(task).demand
    }

    pub fn cost_fn(&self, task: TaskId) -> &ServiceCostFunction<S> {
        &self.service(task).cost_fn
    }

    /// A task can be served against its direction when the opposite arc
    /// exists and is not itself a separate task.
    pub fn is_reversible(&self, task: TaskId) -> bool {
        self.task_arc(task).inverse.is_some_and(|inv| !self.arcs[inv].is_required())
    }

    /// `(start, end)` vertices of the service traversal.
    pub fn endpoints(&self, task: TaskId, reversed: bool) -> (VertexId, VertexId) {
        let arc = self.task_arc(task);
        if reversed {
            (arc.head, arc.tail)
        } else {
            (arc.tail, arc.head)
        }
    }

    /// Service duration when service begins at `begin`.
    pub fn service_duration(&self, task: TaskId, begin: S) -> S {
        let service = self.service(task);
        match self.service_duration {
            ServiceDuration::Static => service.service_time,
            ServiceDuration::CostCoupled => service.cost_fn.eval(begin),
        }
    }

    pub fn total_demand(&self) -> S {
        (0..self.n_tasks()).map(|t| self.demand(t)).sum()
    }

    fn check_reachability(&self) -> Result<(), InstanceError> {
        let mut fwd = vec![Vec::new(); self.n_vertices];
        let mut bwd = vec![Vec::new(); self.n_vertices];
        for a in &self.arcs {
            fwd[a.tail].push(a.head);
            bwd[a.head].push(a.tail);
        }
        let from_depot = bfs(&fwd, DEPOT);
        let to_depot = bfs(&bwd, DEPOT);
        for t in 0..self.n_tasks() {
            let arc = self.task_arc(t);
            for v in [arc.tail, arc.head] {
                if !from_depot[v] {
                    return Err(InstanceError::Unreachable { from: DEPOT, to: v });
                }
                if !to_depot[v] {
                    return Err(InstanceError::Unreachable { from: v, to: DEPOT });
                }
            }
        }
        Ok(())
    }
}

fn bfs(adj: &[Vec<VertexId>], start: VertexId) -> Vec<bool> {
    let mut seen = vec![false; adj.len()];
    seen[start] = true;
    let mut queue = VecDeque::from([start]);
    while let Some(v) = queue.pop_front() {
        for &w in &adj[v] {
            if !seen[w] {
                seen[w] = true;
                queue.push_back(w);
            }
        }
    }
    seen
}

#[cfg(test)]
mod tests {
    use super::*;

    fn window(bt: f64, et: f64) -> ServiceCostFunction<f64> {
        ServiceCostFunction {
            kind: SegmentKind::ThreeSegment,
            bt,
            et,
            min_sc: 1.0,
            slope_abs: 1.0,
        }
    }

    #[test]
    fn time_gap_matches_worked_swap_example() {
        let late = window(501.0, 503.0);
        let early = window(1.0, 3.0);
        assert_eq!(late.time_gap(502.0), 0.0);
        assert_eq!(late.time_gap(2.0), 499.0);
        assert_eq!(early.time_gap(2.0), 0.0);
        assert_eq!(early.time_gap(502.0), 499.0);
        assert_eq!(late.eval(502.0), 1.0);
        assert_eq!(early.eval(502.0), 500.0);
        assert_eq!(late.eval(2.0), 500.0);
    }

    #[test]
    fn window_boundaries_are_closed() {
        let f = window(10.0, 20.0);
        assert_eq!(f.time_gap(10.0), 0.0);
        assert_eq!(f.time_gap(20.0), 0.0);
        assert_eq!(f.eval(10.0), f.min_sc);
    }

    fn header(t: InstanceType) -> InstanceHeader<f64> {
        InstanceHeader {
            name: "t".into(),
            n_vertices: 3,
            capacity: 5.0,
            horizon: 100.0,
            instance_type: t,
            slope_abs: 1.0,
        }
    }

    fn arc(tail: usize, head: usize, service: Option<ServiceSpec<f64>>) -> ArcSpec<f64> {
        ArcSpec { tail, head, length: 1.0, travel_time: 1.0, travel_cost: 1.0, service }
    }

    fn svc(bt: f64, et: f64) -> Option<ServiceSpec<f64>> {
        Some(ServiceSpec { demand: 1.0, service_time: 1.0, min_sc: 1.0, bt, et })
    }

    #[test]
    fn inverse_pairing_is_symmetric() {
        let inst = Instance::new(
            header(InstanceType::ThreeLp),
            vec![arc(0, 1, svc(0.0, 5.0)), arc(1, 0, None), arc(1, 2, svc(0.0, 5.0)), arc(2, 1, None), arc(2, 0, None)],
        )
        .unwrap();
        for a in &inst.arcs {
            if let Some(inv) = a.inverse {
                assert_eq!(inst.arcs[inv].inverse, Some(a.id));
            }
        }
        assert!(inst.is_reversible(0));
        assert_eq!(inst.endpoints(0, true), (1, 0));
        assert_eq!(inst.arcs[4].inverse, None);
    }

    #[test]
    fn two_segment_requires_window_from_zero() {
        let err = Instance::new(header(InstanceType::TwoLp), vec![arc(0, 1, svc(2.0, 5.0)), arc(1, 0, None)]);
        assert_eq!(err, Err(InstanceError::TwoSegmentWindow { arc: 0 }));
    }

    #[test]
    fn rejects_self_loop_and_unreachable_task() {
        let err = Instance::new(header(InstanceType::ThreeLp), vec![arc(1, 1, None)]);
        assert!(matches!(err, Err(InstanceError::SelfLoop { .. })));
        let err = Instance::new(header(InstanceType::ThreeLp), vec![arc(0, 1, svc(0.0, 5.0))]);
        assert!(matches!(err, Err(InstanceError::Unreachable { from: 1, to: 0 })));
    }

    #[test]
    fn required_pair_in_both_directions_is_not_reversible() {
        let inst = Instance::new(
            header(InstanceType::ThreeLp),
            vec![arc(0, 1, svc(0.0, 5.0)), arc(1, 0, svc(0.0, 5.0))],
        )
        .unwrap();
        assert_eq!(inst.n_tasks(), 2);
        assert!(!inst.is_reversible(0));
        assert!(!inst.is_reversible(1));
    }
}
