//! Move classification: time-gap pruning and exact cost delta.

use crate::error::EvalError;
use crate::evaluation::{delta_with_cache, Cursor, MoveDelta, PlanCache, Solution, Visit};
use crate::instance::{Instance, ShortestPathMatrix, DEPOT};
use crate::localsearch::{Move, MoveKind, Target};
use crate::scalar::Scalar;

/// Begin time of `v` when reached from `at`, and the vehicle state after it.
fn tentative<S: Scalar>(
    inst: &Instance<S>,
    sp: &ShortestPathMatrix<S>,
    at: Cursor<S>,
    v: Visit,
) -> (S, Cursor<S>) {
    let (tail, head) = inst.endpoints(v.task, v.reversed);
    let begin = at.time + sp.time(at.vertex, tail);
    let end = begin + inst.service_duration(v.task, begin);
    (begin, Cursor { vertex: head, time: end })
}

/// Time gaps of the move's relevant tasks, before and after, summed.
///
/// New begin times are estimated in O(1) from the cached state of the new
/// predecessor. The estimate is exact for cross-route moves; when the
/// predecessor lies downstream of a removal in the same route its cached
/// clock is stale, which is acceptable for a pruning heuristic.
pub fn tentative_gaps<S: Scalar>(
    inst: &Instance<S>,
    sp: &ShortestPathMatrix<S>,
    sol: &Solution<S>,
    cache: &PlanCache<S>,
    mv: &Move,
) -> (S, S) {
    let gap_at = |r: usize, i: usize| inst.cost_fn(sol.routes[r].visits[i].task).time_gap(cache.begin(r, i));
    let gap_of = |v: Visit, t: S| inst.cost_fn(v.task).time_gap(t);
    let depot = Cursor { vertex: DEPOT, time: S::zero() };
    let (r, i) = mv.src;
    let [a, b] = mv.relevant(sol);
    let a = a.expect("first relevant task");
    match mv.kind {
        MoveKind::SingleInsertion | MoveKind::DoubleInsertion => {
            let width = if mv.kind == MoveKind::DoubleInsertion { 2 } else { 1 };
            let before = (0..width).map(|k| gap_at(r, i + k)).fold(S::zero(), |x, y| x + y);
            let pred = match mv.dst {
                Target::NewRoute => depot,
                Target::Route(r2, j) if r2 == r => cache.cursor_before(r, if j > i { j + width } else { j }),
                Target::Route(r2, j) => cache.cursor_before(r2, j),
            };
            let (t_a, after_a) = tentative(inst, sp, pred, a);
            let mut after = gap_of(a, t_a);
            if let Some(b) = b {
                let (t_b, _) = tentative(inst, sp, after_a, b);
                after = after + gap_of(b, t_b);
            }
            (before, after)
        }
        MoveKind::Swap => {
            let Target::Route(r2, j) = mv.dst else { unreachable!("swap targets a route") };
            let b = b.expect("second relevant task");
            let before = gap_at(r, i) + gap_at(r2, j);
            let after = if r2 != r {
                let (t_a, _) = tentative(inst, sp, cache.cursor_before(r2, j), a);
                let (t_b, _) = tentative(inst, sp, cache.cursor_before(r, i), b);
                gap_of(a, t_a) + gap_of(b, t_b)
            } else {
                // the task moving to the earlier slot sees an exact predecessor
                let (lo, hi, first, second) = if i < j { (i, j, b, a) } else { (j, i, a, b) };
                let (t1, after1) = tentative(inst, sp, cache.cursor_before(r, lo), first);
                let pred2 = if hi == lo + 1 { after1 } else { cache.cursor_before(r, hi) };
                let (t2, _) = tentative(inst, sp, pred2, second);
                gap_of(first, t1) + gap_of(second, t2)
            };
            (before, after)
        }
    }
}

/// Whether the relevant tasks' time gaps grow beyond `lambda` times their
/// current total. `lambda = +inf` disables pruning.
pub fn criterion1_failed<S: Scalar>(
    inst: &Instance<S>,
    sp: &ShortestPathMatrix<S>,
    sol: &Solution<S>,
    cache: &PlanCache<S>,
    mv: &Move,
    lambda: S,
) -> bool {
    if lambda == S::infinity() {
        return false;
    }
    let (before, after) = tentative_gaps(inst, sp, sol, cache, mv);
    after - lambda * before > S::zero()
}

/// Exact delta of a move and whether it is an improving, non-violating one.
pub fn criterion2_successful<S: Scalar>(
    inst: &Instance<S>,
    sp: &ShortestPathMatrix<S>,
    sol: &Solution<S>,
    cache: &PlanCache<S>,
    mv: &Move,
) -> Result<(bool, MoveDelta<S>), EvalError> {
    let d = delta_with_cache(inst, sp, sol, cache, mv)?;
    Ok((d.improving(), d))
}
