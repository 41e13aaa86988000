//! Best-improvement operators over one neighbourhood, and their combination.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::evaluation::{evaluate_route, PlanCache, Route, Solution};
use crate::instance::{Instance, ShortestPathMatrix};
use crate::localsearch::{apply_with_cache, criterion1_failed, enumerate_moves, Move, MoveKind};
use crate::scalar::Scalar;

/// Work done by one operator, accumulated over calls.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SearchCounters {
    pub calls: u64,
    pub moves_enumerated: u64,
    pub pruned_by_criterion1: u64,
    pub criterion2_evaluations: u64,
    pub full_route_evaluations: u64,
    /// Services simulated while evaluating moves.
    pub tasks_simulated: u64,
    pub improvements: u64,
    #[serde(with = "duration_secs")]
    pub elapsed: Duration,
}

impl SearchCounters {
    /// Moves whose cost change was actually computed.
    pub fn evaluations(&self) -> u64 {
        self.criterion2_evaluations + self.full_route_evaluations
    }

    pub fn add(&mut self, other: &SearchCounters) {
        self.calls += other.calls;
        self.moves_enumerated += other.moves_enumerated;
        self.pruned_by_criterion1 += other.pruned_by_criterion1;
        self.criterion2_evaluations += other.criterion2_evaluations;
        self.full_route_evaluations += other.full_route_evaluations;
        self.tasks_simulated += other.tasks_simulated;
        self.improvements += other.improvements;
        self.elapsed += other.elapsed;
    }
}

mod duration_secs {
    use std::time::Duration;

    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<Se: Serializer>(d: &Duration, s: Se) -> Result<Se::Ok, Se::Error> {
        s.serialize_f64(d.as_secs_f64())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        Ok(Duration::from_secs_f64(f64::deserialize(d)?))
    }
}

/// Counters for the three small-step operators.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct OperatorStats {
    pub single_insertion: SearchCounters,
    pub double_insertion: SearchCounters,
    pub swap: SearchCounters,
}

impl OperatorStats {
    pub fn get(&self, kind: MoveKind) -> &SearchCounters {
        match kind {
            MoveKind::SingleInsertion => &self.single_insertion,
            MoveKind::DoubleInsertion => &self.double_insertion,
            MoveKind::Swap => &self.swap,
        }
    }

    pub fn get_mut(&mut self, kind: MoveKind) -> &mut SearchCounters {
        match kind {
            MoveKind::SingleInsertion => &mut self.single_insertion,
            MoveKind::DoubleInsertion => &mut self.double_insertion,
            MoveKind::Swap => &mut self.swap,
        }
    }

    pub fn add(&mut self, other: &OperatorStats) {
        for k in MoveKind::ALL {
            self.get_mut(k).add(other.get(k));
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum OperatorMode<S> {
    /// Time-gap pruning, then incremental delta evaluation.
    KnowledgeGuided { lambda: S },
    /// Full re-evaluation of the involved routes for every move.
    Traditional,
}

/// Best improving neighbour under pruning and exact deltas.
///
/// Moves failing the time-gap test are discarded unevaluated. Among the
/// rest, the one with the most negative delta wins; the first enumerated
/// wins ties. Returns `sol` unchanged when no move improves it.
pub fn kg_operator<S: Scalar>(
    inst: &Instance<S>,
    sp: &ShortestPathMatrix<S>,
    sol: &Solution<S>,
    kind: MoveKind,
    lambda: S,
    counters: &mut SearchCounters,
) -> Solution<S> {
    let started = Instant::now();
    let cache = PlanCache::build(inst, sp, sol);
    let mut best: Option<(Move, S)> = None;
    for mv in enumerate_moves(kind, inst, sol) {
        counters.moves_enumerated += 1;
        if criterion1_failed(inst, sp, sol, &cache, &mv, lambda) {
            counters.pruned_by_criterion1 += 1;
            continue;
        }
        counters.criterion2_evaluations += 1;
        let d = crate::evaluation::delta_with_cache(inst, sp, sol, &cache, &mv)
            .expect("enumerated moves are valid");
        counters.tasks_simulated += d.touched as u64;
        if d.improving() && best.is_none_or(|(_, b)| d.delta() < b) {
            best = Some((mv, d.delta()));
        }
    }
    finish(inst, sol, &cache, best, counters, started)
}

/// Best improving neighbour by full re-evaluation of the involved routes.
pub fn traditional_operator<S: Scalar>(
    inst: &Instance<S>,
    sp: &ShortestPathMatrix<S>,
    sol: &Solution<S>,
    kind: MoveKind,
    counters: &mut SearchCounters,
) -> Solution<S> {
    let started = Instant::now();
    let cache = PlanCache::build(inst, sp, sol);
    let old_violation: Vec<S> = cache.routes.iter().map(|r| r.violation(inst)).collect();
    let mut best: Option<(Move, S)> = None;
    for mv in enumerate_moves(kind, inst, sol) {
        counters.moves_enumerated += 1;
        counters.full_route_evaluations += 1;
        let edits = mv.edits(inst, sol, &cache).expect("enumerated moves are valid");
        let (mut delta, mut dv) = (S::zero(), S::zero());
        for e in edits.iter() {
            let route = Route {
                visits: e.visits(sol),
                departure: e.route.map_or(S::zero(), |r| sol.routes[r].departure),
            };
            counters.tasks_simulated += route.visits.len() as u64;
            let ev = evaluate_route(inst, sp, &route).expect("enumerated moves are valid");
            delta = delta + ev.total_cost;
            dv = dv + ev.violation(inst);
            if let Some(r) = e.route {
                delta = delta - cache.route_cost(r);
                dv = dv - old_violation[r];
            }
        }
        let improving = dv <= S::zero() && delta < -S::improvement_eps();
        if improving && best.is_none_or(|(_, b)| delta < b) {
            best = Some((mv, delta));
        }
    }
    finish(inst, sol, &cache, best, counters, started)
}

fn finish<S: Scalar>(
    inst: &Instance<S>,
    sol: &Solution<S>,
    cache: &PlanCache<S>,
    best: Option<(Move, S)>,
    counters: &mut SearchCounters,
    started: Instant,
) -> Solution<S> {
    let out = match best {
        Some((mv, _)) => {
            counters.improvements += 1;
            apply_with_cache(inst, sol, cache, &mv).expect("enumerated moves are valid")
        }
        None => sol.clone(),
    };
    counters.calls += 1;
    counters.elapsed += started.elapsed();
    out
}

/// Dispatches to the knowledge-guided or traditional operator.
pub fn operator<S: Scalar>(
    inst: &Instance<S>,
    sp: &ShortestPathMatrix<S>,
    sol: &Solution<S>,
    kind: MoveKind,
    mode: OperatorMode<S>,
    counters: &mut SearchCounters,
) -> Solution<S> {
    match mode {
        OperatorMode::KnowledgeGuided { lambda } => kg_operator(inst, sp, sol, kind, lambda, counters),
        OperatorMode::Traditional => traditional_operator(inst, sp, sol, kind, counters),
    }
}

/// Runs the three operators on the same input and keeps the cheapest
/// result; ties go to single insertion, then double insertion, then swap.
pub fn kgslss<S: Scalar>(
    inst: &Instance<S>,
    sp: &ShortestPathMatrix<S>,
    sol: &Solution<S>,
    mode: OperatorMode<S>,
    stats: &mut OperatorStats,
) -> Solution<S> {
    let mut best: Option<(Solution<S>, S)> = None;
    for kind in MoveKind::ALL {
        let out = operator(inst, sp, sol, kind, mode, stats.get_mut(kind));
        let tc = PlanCache::build(inst, sp, &out).tc();
        if best.as_ref().is_none_or(|(_, b)| tc < *b) {
            best = Some((out, tc));
        }
    }
    best.map(|(s, _)| s).expect("three candidates")
}

/// Repeats [`kgslss`] until no operator improves, or `max_rounds` is hit.
pub fn kgslss_until_optimum<S: Scalar>(
    inst: &Instance<S>,
    sp: &ShortestPathMatrix<S>,
    sol: &Solution<S>,
    mode: OperatorMode<S>,
    max_rounds: usize,
    stats: &mut OperatorStats,
) -> Solution<S> {
    let mut cur = sol.clone();
    for _ in 0..max_rounds {
        let next = kgslss(inst, sp, &cur, mode, stats);
        if next.same_plan(&cur) {
            break;
        }
        cur = next;
    }
    cur
}
