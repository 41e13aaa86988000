//! Large-step operator: merge a few routes, re-scan, and split optimally.

use rand::seq::index::sample;
use rand::Rng;

use crate::evaluation::{step, Cursor, PlanCache, Route, Solution, Visit};
use crate::instance::{Instance, ShortestPathMatrix, TaskId, DEPOT};
use crate::scalar::Scalar;

/// Tie-breaking rule of path scanning among equally near candidates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScanRule {
    /// Maximize the cost of returning to the depot from the task's end.
    FarthestFromDepot,
    NearestToDepot,
    /// Maximize demand over serving cost.
    MaxYield,
    MinYield,
    /// Far from the depot while the vehicle is less than half full, near
    /// afterwards.
    HalfFull,
}

impl ScanRule {
    pub const ALL: [ScanRule; 5] =
        [Self::FarthestFromDepot, Self::NearestToDepot, Self::MaxYield, Self::MinYield, Self::HalfFull];
}

/// Orders `tasks` by path scanning under travel cost; routes are closed
/// when no remaining task fits the capacity. Returns the giant tour.
pub fn path_scan<S: Scalar>(
    inst: &Instance<S>,
    sp: &ShortestPathMatrix<S>,
    tasks: &[TaskId],
    rule: ScanRule,
) -> Vec<Visit> {
    let mut left: Vec<TaskId> = tasks.to_vec();
    let mut tour = Vec::with_capacity(tasks.len());
    let (mut at, mut load) = (DEPOT, S::zero());
    while !left.is_empty() {
        // (index in left, visit, distance, score); higher score wins ties
        let mut best: Option<(usize, Visit, S, S)> = None;
        for (k, &t) in left.iter().enumerate() {
            if load + inst.demand(t) > inst.capacity {
                continue;
            }
            for reversed in [false, true] {
                if reversed && !inst.is_reversible(t) {
                    continue;
                }
                let (tail, head) = inst.endpoints(t, reversed);
                let dist = sp.cost(at, tail);
                let back = sp.cost(head, DEPOT);
                let yield_ = inst.demand(t) / inst.cost_fn(t).min_sc.max(S::epsilon());
                let score = match rule {
                    ScanRule::FarthestFromDepot => back,
                    ScanRule::NearestToDepot => -back,
                    ScanRule::MaxYield => yield_,
                    ScanRule::MinYield => -yield_,
                    ScanRule::HalfFull if load < inst.capacity / S::c(2.0) => back,
                    ScanRule::HalfFull => -back,
                };
                let better = match best {
                    None => true,
                    Some((_, _, d, s)) => dist < d || (dist == d && score > s),
                };
                if better {
                    best = Some((k, Visit { task: t, reversed }, dist, score));
                }
            }
        }
        match best {
            Some((k, v, _, _)) => {
                left.swap_remove(k);
                load = load + inst.demand(v.task);
                at = inst.endpoints(v.task, v.reversed).1;
                tour.push(v);
            }
            None if load == S::zero() => {
                // a task that fits no empty vehicle; serve it alone anyway
                let t = left.remove(0);
                tour.push(Visit::new(t));
            }
            None => {
                at = DEPOT;
                load = S::zero();
            }
        }
    }
    tour
}

/// Optimal partition of a giant tour into consecutive routes departing at
/// time 0, respecting capacity and horizon. `None` if some task cannot be
/// served even alone.
pub fn split_giant_tour<S: Scalar>(
    inst: &Instance<S>,
    sp: &ShortestPathMatrix<S>,
    tour: &[Visit],
) -> Option<Vec<Vec<Visit>>> {
    let n = tour.len();
    let mut best = vec![S::infinity(); n + 1];
    let mut from = vec![usize::MAX; n + 1];
    best[0] = S::zero();
    for i in 0..n {
        if !best[i].is_finite() {
            continue;
        }
        let mut at = Cursor { vertex: DEPOT, time: S::zero() };
        let (mut cost, mut load) = (S::zero(), S::zero());
        for j in i..n {
            load = load + inst.demand(tour[j].task);
            if load > inst.capacity {
                break;
            }
            let s = step(inst, sp, at, tour[j]);
            cost = cost + s.service_cost + s.deadhead_cost;
            at = s.next;
            let back = at.time + sp.time(at.vertex, DEPOT);
            if back > inst.horizon {
                // clocks only grow along the tour
                break;
            }
            let total = best[i] + cost + sp.cost(at.vertex, DEPOT);
            if total < best[j + 1] {
                best[j + 1] = total;
                from[j + 1] = i;
            }
        }
    }
    if !best[n].is_finite() {
        return None;
    }
    let mut routes = Vec::new();
    let mut j = n;
    while j > 0 {
        let i = from[j];
        routes.push(tour[i..j].to_vec());
        j = i;
    }
    routes.reverse();
    Some(routes)
}

fn rank<S: Scalar>(inst: &Instance<S>, sp: &ShortestPathMatrix<S>, sol: &Solution<S>) -> (S, S) {
    let c = PlanCache::build(inst, sp, sol);
    (c.violation(inst), c.tc())
}

fn better<S: Scalar>(a: (S, S), b: (S, S)) -> bool {
    a.0 < b.0 || (a.0 == b.0 && a.1 < b.1)
}

/// Merges `p` random routes, rebuilds them with each scanning rule plus an
/// optimal split, and returns the best of the rebuilt plans and the input,
/// ranked by violation then total cost.
pub fn merge_split<S: Scalar, R: Rng + ?Sized>(
    inst: &Instance<S>,
    sp: &ShortestPathMatrix<S>,
    sol: &Solution<S>,
    p: usize,
    rng: &mut R,
) -> Solution<S> {
    if p == 0 || p > sol.routes.len() {
        return sol.clone();
    }
    let mut picked = sample(rng, sol.routes.len(), p).into_vec();
    picked.sort_unstable();
    let pool: Vec<TaskId> =
        picked.iter().flat_map(|&r| sol.routes[r].visits.iter().map(|v| v.task)).collect();
    let kept: Vec<Route<S>> = sol
        .routes
        .iter()
        .enumerate()
        .filter(|(r, _)| picked.binary_search(r).is_err())
        .map(|(_, r)| r.clone())
        .collect();

    let mut best = (sol.clone(), rank(inst, sp, sol));
    for rule in ScanRule::ALL {
        let tour = path_scan(inst, sp, &pool, rule);
        let Some(routes) = split_giant_tour(inst, sp, &tour) else { continue };
        let mut cand = Solution::new(kept.clone());
        cand.routes.extend(routes.into_iter().map(Route::new));
        let r = rank(inst, sp, &cand);
        if better(r, best.1) {
            best = (cand, r);
        }
    }
    best.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluation::{check_coverage, evaluate_solution};
    use crate::instance::InstanceType;
    use crate::testutil::random_instance;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn split_of_scan_covers_every_task() {
        let (inst, sp) = random_instance(2, 9, InstanceType::TwoLp, 1.0);
        let all: Vec<_> = (0..inst.n_tasks()).collect();
        for rule in ScanRule::ALL {
            let tour = path_scan(&inst, &sp, &all, rule);
            assert_eq!(tour.len(), all.len());
            let routes = split_giant_tour(&inst, &sp, &tour).unwrap();
            let sol = Solution::from_sequences(routes);
            check_coverage(&inst, &sol).unwrap();
            assert!(evaluate_solution(&inst, &sp, &sol).unwrap().is_feasible());
        }
    }

    #[test]
    fn merging_everything_never_worsens() {
        let (inst, sp) = random_instance(5, 8, InstanceType::ThreeLp, 1.0);
        let sol = Solution::from_sequences((0..inst.n_tasks()).map(|t| vec![Visit::new(t)]).collect());
        let before = evaluate_solution(&inst, &sp, &sol).unwrap().tc;
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let out = merge_split(&inst, &sp, &sol, sol.routes.len(), &mut rng);
        check_coverage(&inst, &out).unwrap();
        assert!(evaluate_solution(&inst, &sp, &out).unwrap().tc <= before);
        assert_eq!(merge_split(&inst, &sp, &sol, 99, &mut rng), sol);
    }

    #[test]
    fn split_single_route_when_everything_fits() {
        let inst = crate::testutil::chain_instance(4, false);
        let sp = crate::instance::all_pairs_shortest_paths(&inst).unwrap();
        let tour: Vec<_> = (0..4).map(Visit::new).collect();
        assert_eq!(split_giant_tour(&inst, &sp, &tour).unwrap(), vec![tour]);
    }
}
