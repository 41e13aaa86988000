use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::{Instance, VertexId, DEPOT};
use crate::error::InstanceError;
use crate::scalar::Scalar;

/// All-pairs shortest travel costs and times, with a predecessor table for
/// the cost paths.
#[derive(Clone, Debug, PartialEq)]
pub struct ShortestPathMatrix<S> {
    n: usize,
    cost: Vec<S>,
    time: Vec<S>,
    pred: Vec<Option<VertexId>>,
}

impl<S: Scalar> ShortestPathMatrix<S> {
    /// Builds a matrix from dense row-major tables (used by the oracle).
    pub fn from_tables(n: usize, cost: Vec<S>, time: Vec<S>, pred: Vec<Option<VertexId>>) -> Self {
        assert_eq!(cost.len(), n * n);
        assert_eq!(time.len(), n * n);
        assert_eq!(pred.len(), n * n);
        ShortestPathMatrix { n, cost, time, pred }
    }

    pub fn n_vertices(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn cost(&self, from: VertexId, to: VertexId) -> S {
        self.cost[from * self.n + to]
    }

    #[inline]
    pub fn time(&self, from: VertexId, to: VertexId) -> S {
        self.time[from * self.n + to]
    }

    /// Vertex sequence of one cheapest path, or `None` if unreachable.
    pub fn path(&self, from: VertexId, to: VertexId) -> Option<Vec<VertexId>> {
        if !self.cost(from, to).is_finite() {
            return None;
        }
        let mut out = vec![to];
        let mut v = to;
        while v != from {
            v = self.pred[from * self.n + v]?;
            out.push(v);
        }
        out.reverse();
        Some(out)
    }
}

#[derive(PartialEq)]
struct Entry<S>(S, VertexId);

impl<S: PartialEq> Eq for Entry<S> {}

impl<S: PartialOrd> PartialOrd for Entry<S> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<S: PartialOrd> Ord for Entry<S> {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on distance
        other.0.partial_cmp(&self.0).unwrap_or(Ordering::Equal).then_with(|| other.1.cmp(&self.1))
    }
}

fn dijkstra<S: Scalar>(
    adj: &[Vec<(VertexId, S)>],
    source: VertexId,
    dist: &mut [S],
    pred: &mut [Option<VertexId>],
) {
    dist.fill(S::infinity());
    pred.fill(None);
    dist[source] = S::zero();
    let mut heap = BinaryHeap::from([Entry(S::zero(), source)]);
    while let Some(Entry(d, v)) = heap.pop() {
        if d > dist[v] {
            continue;
        }
        for &(w, c) in &adj[v] {
            let nd = d + c;
            if nd < dist[w] {
                dist[w] = nd;
                pred[w] = Some(v);
                heap.push(Entry(nd, w));
            }
        }
    }
}

/// One Dijkstra run per source vertex, on travel cost and on travel time.
///
/// Fails when a vertex touched by a task (or the depot) cannot reach another.
pub fn all_pairs_shortest_paths<S: Scalar>(
    inst: &Instance<S>,
) -> Result<ShortestPathMatrix<S>, InstanceError> {
    let n = inst.n_vertices;
    let mut by_cost = vec![Vec::new(); n];
    let mut by_time = vec![Vec::new(); n];
    for a in &inst.arcs {
        by_cost[a.tail].push((a.head, a.travel_cost));
        by_time[a.tail].push((a.head, a.travel_time));
    }
    let mut cost = vec![S::zero(); n * n];
    let mut time = vec![S::zero(); n * n];
    let mut pred = vec![None; n * n];
    let mut scratch = vec![None; n];
    for s in 0..n {
        let row = s * n..(s + 1) * n;
        dijkstra(&by_cost, s, &mut cost[row.clone()], &mut pred[row.clone()]);
        dijkstra(&by_time, s, &mut time[row], &mut scratch);
    }

    let mut key = vec![DEPOT];
    for t in 0..inst.n_tasks() {
        let a = inst.task_arc(t);
        key.extend([a.tail, a.head]);
    }
    key.sort_unstable();
    key.dedup();
    for &u in &key {
        for &v in &key {
            if !cost[u * n + v].is_finite() {
                return Err(InstanceError::Unreachable { from: u, to: v });
            }
        }
    }
    Ok(ShortestPathMatrix { n, cost, time, pred })
}
