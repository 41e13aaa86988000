//! Sequence-based crossover with greedy repair.

use rand::Rng;

use crate::evaluation::{insertion_delta, PlanCache, Route, Solution, Visit};
use crate::instance::{Instance, ShortestPathMatrix};
use crate::scalar::Scalar;

/// Child of `s1` whose route `r1` becomes `s1[r1][..c1] ++ s2[r2][c2..]`.
///
/// Tasks repeated inside the new route keep their first occurrence; tasks
/// of the new route are removed from the other routes of `s1`; tasks lost
/// from the old suffix are reinserted one by one at the cheapest position
/// that leaves the receiving route without violation, or alone in a new
/// route. Empty routes are dropped.
#[allow(clippy::too_many_arguments)]
pub fn sbx_with_cuts<S: Scalar>(
    inst: &Instance<S>,
    sp: &ShortestPathMatrix<S>,
    s1: &Solution<S>,
    s2: &Solution<S>,
    r1: usize,
    c1: usize,
    r2: usize,
    c2: usize,
) -> Solution<S> {
    let n = inst.n_tasks();
    let head = &s1.routes[r1].visits[..c1];
    let tail = &s2.routes[r2].visits[c2..];
    let mut in_new = vec![false; n];
    let mut merged = Vec::with_capacity(head.len() + tail.len());
    for &v in head.iter().chain(tail) {
        if !in_new[v.task] {
            in_new[v.task] = true;
            merged.push(v);
        }
    }

    let mut child = s1.clone();
    for (r, route) in child.routes.iter_mut().enumerate() {
        if r == r1 {
            route.visits = merged.clone();
        } else {
            route.visits.retain(|v| !in_new[v.task]);
        }
    }
    let mut present = vec![false; n];
    for v in child.routes.iter().flat_map(|r| &r.visits) {
        present[v.task] = true;
    }
    let missing: Vec<Visit> =
        s1.routes[r1].visits[c1..].iter().copied().filter(|v| !present[v.task]).collect();
    child.drop_empty_routes();

    for v in missing {
        insert_cheapest(inst, sp, &mut child, v);
    }
    child
}

/// Random-route, random-cut variant of [`sbx_with_cuts`].
pub fn sbx_crossover<S: Scalar, R: Rng + ?Sized>(
    s1: &Solution<S>,
    s2: &Solution<S>,
    inst: &Instance<S>,
    sp: &ShortestPathMatrix<S>,
    rng: &mut R,
) -> Solution<S> {
    if s1.routes.is_empty() || s2.routes.is_empty() {
        return s1.clone();
    }
    let r1 = rng.random_range(0..s1.routes.len());
    let r2 = rng.random_range(0..s2.routes.len());
    let c1 = rng.random_range(0..=s1.routes[r1].visits.len());
    let c2 = rng.random_range(0..=s2.routes[r2].visits.len());
    sbx_with_cuts(inst, sp, s1, s2, r1, c1, r2, c2)
}

fn insert_cheapest<S: Scalar>(inst: &Instance<S>, sp: &ShortestPathMatrix<S>, sol: &mut Solution<S>, v: Visit) {
    let cache = PlanCache::build(inst, sp, sol);
    let orientations: &[bool] = if inst.is_reversible(v.task) { &[false, true] } else { &[false] };
    let mut best: Option<(S, Option<usize>, usize, Visit)> = None;
    for (r, route) in sol.routes.iter().enumerate() {
        for pos in 0..=route.visits.len() {
            for &rev in orientations {
                let cand = Visit { task: v.task, reversed: rev };
                let (delta, violation) = insertion_delta(inst, sp, sol, &cache, Some(r), pos, cand);
                if violation <= S::zero() && best.is_none_or(|b| delta < b.0) {
                    best = Some((delta, Some(r), pos, cand));
                }
            }
        }
    }
    for &rev in orientations {
        let cand = Visit { task: v.task, reversed: rev };
        let (delta, _) = insertion_delta(inst, sp, sol, &cache, None, 0, cand);
        if best.is_none_or(|b| delta < b.0) {
            best = Some((delta, None, 0, cand));
        }
    }
    match best.expect("a new route is always available") {
        (_, Some(r), pos, cand) => sol.routes[r].visits.insert(pos, cand),
        (_, None, _, cand) => sol.routes.push(Route::new(vec![cand])),
    }
}
