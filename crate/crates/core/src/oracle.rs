//! Brute-force reference computations for tiny instances.
//!
//! Nothing here shares code with the search beyond the route simulator,
//! so the results can serve as ground truth in tests.

use serde::{Deserialize, Serialize};

use crate::error::OracleError;
use crate::evaluation::{evaluate_route, evaluate_solution, Route, Solution, Visit};
use crate::instance::{Instance, ServiceDuration, ShortestPathMatrix, VertexId, DEPOT};
use crate::localsearch::{apply_move, enumerate_moves, Move, MoveKind};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct OracleBudget {
    pub max_tasks: usize,
    pub grid_steps: usize,
    /// Keep every departure at 0 instead of scanning the grid; the optimum is
    /// then exact for that restriction.
    pub zero_departures: bool,
}

impl Default for OracleBudget {
    fn default() -> Self {
        OracleBudget { max_tasks: 7, grid_steps: 100_000, zero_departures: false }
    }
}

impl OracleBudget {
    fn route_departure<S: Scalar>(&self, inst: &Instance<S>, sp: &ShortestPathMatrix<S>, visits: &[Visit]) -> Option<(S, S)> {
        if self.zero_departures {
            let ev = evaluate_route(inst, sp, &Route { visits: visits.to_vec(), departure: S::zero() }).expect("valid route");
            (ev.return_time <= inst.horizon).then_some((S::zero(), ev.total_cost))
        } else {
            best_grid_departure(inst, sp, visits, self.grid_steps)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExactSolution {
    pub tc: f64,
    /// One line per route in the solution dump format.
    pub plan: Vec<String>,
    #[serde(rename = "Dt")]
    pub departures: Vec<f64>,
    /// Upper bound on `tc` minus the continuous-time optimum.
    pub grid_error_bound: f64,
}

/// Cheapest grid departure for a fixed sequence, or `None` if no grid
/// point keeps the route inside the horizon.
///
/// With static service durations every begin time is the departure plus a
/// constant, so the cost is piecewise linear in the departure with kinks at
/// `bt - offset` and `et - offset`. Its grid minimum is attained next to a
/// kink or at an end of the grid, and only those points are evaluated.
/// Cost-coupled durations fall back to scanning the full grid.
pub fn best_grid_departure<S: Scalar>(
    inst: &Instance<S>,
    sp: &ShortestPathMatrix<S>,
    visits: &[Visit],
    grid_steps: usize,
) -> Option<(S, S)> {
    let h = inst.horizon / S::from_count(grid_steps);
    let at = |t: S| evaluate_route(inst, sp, &Route { visits: visits.to_vec(), departure: t }).expect("valid route");
    let zero = at(S::zero());
    let slack = inst.horizon - zero.return_time;
    if slack < S::zero() {
        return None;
    }
    let kmax = (slack / h).floor().to_usize().unwrap_or(0).min(grid_steps);
    let mut ks = vec![0, kmax];
    match inst.service_duration {
        ServiceDuration::Static => {
            for (i, v) in visits.iter().enumerate() {
                let f = inst.cost_fn(v.task);
                for kink in [f.bt - zero.begin_times[i], f.et - zero.begin_times[i]] {
                    let x = (kink / h).as_f64();
                    if x >= 0.0 {
                        ks.push((x.floor() as usize).min(kmax));
                        ks.push((x.ceil() as usize).min(kmax));
                    }
                }
            }
        }
        ServiceDuration::CostCoupled => ks.extend(1..kmax),
    }
    ks.sort_unstable();
    ks.dedup();
    let mut best: Option<(S, S)> = None;
    for k in ks {
        let t = h * S::from_count(k);
        let ev = at(t);
        if ev.return_time > inst.horizon {
            continue;
        }
        if best.is_none_or(|b| ev.total_cost < b.1) {
            best = Some((t, ev.total_cost));
        }
    }
    best
}

fn permutations(items: &mut Vec<usize>, k: usize, out: &mut dyn FnMut(&[usize])) {
    if k == items.len() {
        out(items);
        return;
    }
    for i in k..items.len() {
        items.swap(k, i);
        permutations(items, k + 1, out);
        items.swap(k, i);
    }
}

/// Optimal plan and departures by enumerating every task subset as a route,
/// every order and orientation within it, and every partition into routes.
pub fn exact_solve<S: Scalar>(
    inst: &Instance<S>,
    sp: &ShortestPathMatrix<S>,
    budget: &OracleBudget,
) -> Result<ExactSolution, OracleError> {
    let n = inst.n_tasks();
    if n > budget.max_tasks {
        return Err(OracleError::BudgetExceeded { tasks: n, max: budget.max_tasks });
    }
    let full = (1usize << n) - 1;
    // best single route per subset: (cost, visits, departure)
    let mut route: Vec<Option<(S, Vec<Visit>, S)>> = vec![None; full + 1];
    for mask in 1..=full {
        let mut tasks: Vec<usize> = (0..n).filter(|&t| mask >> t & 1 == 1).collect();
        let load: S = tasks.iter().map(|&t| inst.demand(t)).sum();
        if load > inst.capacity {
            continue;
        }
        let flexible: Vec<usize> = tasks.iter().copied().filter(|&t| inst.is_reversible(t)).collect();
        let mut best: Option<(S, Vec<Visit>, S)> = None;
        permutations(&mut tasks, 0, &mut |perm| {
            for flips in 0..1usize << flexible.len() {
                let visits: Vec<Visit> = perm
                    .iter()
                    .map(|&t| {
                        let bit = flexible.iter().position(|&f| f == t);
                        Visit { task: t, reversed: bit.is_some_and(|b| flips >> b & 1 == 1) }
                    })
                    .collect();
                if let Some((t, c)) = budget.route_departure(inst, sp, &visits) {
                    if best.as_ref().is_none_or(|b| c < b.0) {
                        best = Some((c, visits, t));
                    }
                }
            }
        });
        route[mask] = best;
    }

    let mut cost = vec![S::infinity(); full + 1];
    let mut choice = vec![0usize; full + 1];
    cost[0] = S::zero();
    for mask in 1..=full {
        let low = mask & mask.wrapping_neg();
        let rest = mask ^ low;
        let mut sub = rest;
        loop {
            let part = sub | low;
            if let Some((c, _, _)) = &route[part] {
                let total = *c + cost[mask ^ part];
                if total < cost[mask] {
                    cost[mask] = total;
                    choice[mask] = part;
                }
            }
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & rest;
        }
    }
    if !cost[full].is_finite() {
        return Err(OracleError::NoFeasiblePlan);
    }
    let mut routes = Vec::new();
    let mut mask = full;
    while mask != 0 {
        let part = choice[mask];
        let (_, visits, t) = route[part].clone().expect("chosen subsets are routable");
        routes.push(Route { visits, departure: t });
        mask ^= part;
    }
    let sol = Solution::new(routes);
    let h = if budget.zero_departures { 0.0 } else { inst.horizon.as_f64() / budget.grid_steps as f64 };
    Ok(ExactSolution {
        tc: cost[full].as_f64(),
        plan: sol.to_string().lines().map(str::to_string).collect(),
        departures: sol.routes.iter().map(|r| r.departure.as_f64()).collect(),
        grid_error_bound: n as f64 * inst.slope_abs.as_f64() * h,
    })
}

/// One fully re-evaluated neighbour.
#[derive(Clone, Debug, PartialEq)]
pub struct Classified<S> {
    pub mv: Move,
    pub delta: S,
    pub delta_violation: S,
    pub successful: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NeighborhoodScan<S> {
    /// Most improving successful neighbour, first enumerated on ties.
    pub best: Option<(Move, Solution<S>)>,
    pub moves: Vec<Classified<S>>,
}

/// Applies every move of `kind` and re-evaluates the whole solution.
pub fn exhaustive_neighborhood<S: Scalar>(
    inst: &Instance<S>,
    sp: &ShortestPathMatrix<S>,
    sol: &Solution<S>,
    kind: MoveKind,
) -> NeighborhoodScan<S> {
    let before = evaluate_solution(inst, sp, sol).expect("valid solution");
    let mut best: Option<(Move, Solution<S>, S)> = None;
    let mut moves = Vec::new();
    for mv in enumerate_moves(kind, inst, sol) {
        let next = apply_move(inst, sol, &mv).expect("enumerated moves apply");
        let after = evaluate_solution(inst, sp, &next).expect("moves keep coverage");
        let delta = after.tc - before.tc;
        let delta_violation = after.violation - before.violation;
        let successful = delta_violation <= S::zero() && delta < -S::improvement_eps();
        if successful && best.as_ref().is_none_or(|b| delta < b.2) {
            best = Some((mv, next, delta));
        }
        moves.push(Classified { mv, delta, delta_violation, successful });
    }
    NeighborhoodScan { best: best.map(|(m, s, _)| (m, s)), moves }
}

/// Dense all-pairs shortest paths by Floyd–Warshall.
pub fn floyd_warshall<S: Scalar>(inst: &Instance<S>) -> ShortestPathMatrix<S> {
    let n = inst.n_vertices;
    let mut cost = vec![S::infinity(); n * n];
    let mut time = vec![S::infinity(); n * n];
    let mut pred: Vec<Option<VertexId>> = vec![None; n * n];
    for v in 0..n {
        cost[v * n + v] = S::zero();
        time[v * n + v] = S::zero();
    }
    for a in &inst.arcs {
        let ij = a.tail * n + a.head;
        if a.travel_cost < cost[ij] {
            cost[ij] = a.travel_cost;
            pred[ij] = Some(a.tail);
        }
        time[ij] = time[ij].min(a.travel_time);
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = cost[i * n + k] + cost[k * n + j];
                if via < cost[i * n + j] {
                    cost[i * n + j] = via;
                    pred[i * n + j] = pred[k * n + j];
                }
                let via = time[i * n + k] + time[k * n + j];
                if via < time[i * n + j] {
                    time[i * n + j] = via;
                }
            }
        }
    }
    ShortestPathMatrix::from_tables(n, cost, time, pred)
}

/// Classic arc-routing cost: deadheading plus each task's minimum service
/// cost, ignoring time.
pub fn classic_cost<S: Scalar>(inst: &Instance<S>, sp: &ShortestPathMatrix<S>, sol: &Solution<S>) -> S {
    let mut total = S::zero();
    for r in &sol.routes {
        let mut at = DEPOT;
        for v in &r.visits {
            let (tail, head) = inst.endpoints(v.task, v.reversed);
            total = total + sp.cost(at, tail) + inst.cost_fn(v.task).min_sc;
            at = head;
        }
        total = total + sp.cost(at, DEPOT);
    }
    total
}

/// Minimum of `f` over `steps + 1` evenly spaced points of `[lo, hi]`;
/// the first minimizer wins ties.
pub fn grid_scan<S: Scalar>(mut f: impl FnMut(S) -> S, lo: S, hi: S, steps: usize) -> (S, S) {
    let h = (hi - lo) / S::from_count(steps.max(1));
    let mut best = (lo, f(lo));
    for k in 1..=steps {
        let t = lo + h * S::from_count(k);
        let v = f(t);
        if v < best.1 {
            best = (t, v);
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{all_pairs_shortest_paths, InstanceType};
    use crate::testutil::{chain_instance, random_instance};

    #[test]
    fn floyd_warshall_matches_dijkstra() {
        for seed in 0..5 {
            let (inst, sp) = random_instance(seed, 20, InstanceType::ThreeLp, 1.0);
            let fw = floyd_warshall(&inst);
            for u in 0..inst.n_vertices {
                for v in 0..inst.n_vertices {
                    assert_eq!(fw.cost(u, v), sp.cost(u, v));
                    assert_eq!(fw.time(u, v), sp.time(u, v));
                }
            }
        }
    }

    #[test]
    fn single_flat_task_costs_its_traversal() {
        let inst = chain_instance(1, false);
        let sp = all_pairs_shortest_paths(&inst).unwrap();
        let ex = exact_solve(&inst, &sp, &OracleBudget::default()).unwrap();
        // depot is the tail; service 1; return 1
        assert_eq!(ex.tc, 2.0);
        assert_eq!(ex.plan.len(), 1);
    }

    #[test]
    fn heavy_tasks_force_separate_routes() {
        let mut inst = chain_instance(2, true);
        inst.capacity = 1.5;
        let sp = all_pairs_shortest_paths(&inst).unwrap();
        let ex = exact_solve(&inst, &sp, &OracleBudget::default()).unwrap();
        assert_eq!(ex.plan.len(), 2);
    }

    #[test]
    fn budget_is_enforced() {
        let inst = chain_instance(8, false);
        let sp = all_pairs_shortest_paths(&inst).unwrap();
        assert_eq!(
            exact_solve(&inst, &sp, &OracleBudget::default()),
            Err(OracleError::BudgetExceeded { tasks: 8, max: 7 })
        );
    }

    #[test]
    fn kink_points_agree_with_full_grid() {
        let (inst, sp) = random_instance(9, 4, InstanceType::ThreeLp, 1.5);
        let visits: Vec<Visit> = (0..4).map(Visit::new).collect();
        let steps = 20_000;
        let (t, c) = best_grid_departure(&inst, &sp, &visits, steps).unwrap();
        let route = |t| evaluate_route(&inst, &sp, &Route { visits: visits.clone(), departure: t }).unwrap();
        let slack = inst.horizon - route(0.0).return_time;
        let h = inst.horizon / steps as f64;
        let kmax = (slack / h).floor() as usize;
        let full = grid_scan(|t| route(t).total_cost, 0.0, h * kmax as f64, kmax);
        assert!((c - full.1).abs() < 1e-9, "{t} {c} vs {full:?}");
    }
}
