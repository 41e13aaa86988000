//! Route and solution evaluation under time-dependent service costs.
//!
//! A vehicle leaves the depot at its departure time and never waits: each
//! service begins as soon as the vehicle reaches the start of the task along
//! a shortest deadheading path. Route cost is the sum of service costs at the
//! service beginning times plus the travel cost of the deadheading links.

use std::fmt;
use std::str::FromStr;

use crate::error::EvalError;
use crate::instance::{Instance, ShortestPathMatrix, TaskId, VertexId, DEPOT};
use crate::localsearch::Move;
use crate::scalar::Scalar;

/// One served task together with its direction of service.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Visit {
    pub task: TaskId,
    pub reversed: bool,
}

impl Visit {
    pub fn new(task: TaskId) -> Self {
        Visit { task, reversed: false }
    }

    pub fn flipped(self, flip: bool) -> Self {
        Visit { task: self.task, reversed: self.reversed ^ flip }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Route<S> {
    pub visits: Vec<Visit>,
    pub departure: S,
}

impl<S: Scalar> Route<S> {
    pub fn new(visits: Vec<Visit>) -> Self {
        Route { visits, departure: S::zero() }
    }
}

/// Routing plan plus departure times.
#[derive(Clone, Debug, PartialEq)]
pub struct Solution<S> {
    pub routes: Vec<Route<S>>,
}

impl<S: Scalar> Solution<S> {
    pub fn new(routes: Vec<Route<S>>) -> Self {
        Solution { routes }
    }

    pub fn from_sequences(seqs: Vec<Vec<Visit>>) -> Self {
        Solution { routes: seqs.into_iter().map(Route::new).collect() }
    }

    pub fn n_visits(&self) -> usize {
        self.routes.iter().map(|r| r.visits.len()).sum()
    }

    /// Equality of task sequences including orientation; departures ignored.
    pub fn same_plan(&self, other: &Solution<S>) -> bool {
        self.routes.len() == other.routes.len()
            && self.routes.iter().zip(&other.routes).all(|(a, b)| a.visits == b.visits)
    }

    pub fn drop_empty_routes(&mut self) {
        self.routes.retain(|r| !r.visits.is_empty());
    }

    pub fn with_departures(mut self, times: &[S]) -> Self {
        for (r, &t) in self.routes.iter_mut().zip(times) {
            r.departure = t;
        }
        self
    }

    /// Parses the dump format written by [`fmt::Display`].
    pub fn parse_dump(text: &str) -> Result<Self, String>
    where
        S: FromStr,
    {
        let mut routes = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (t, rest) = line.split_once(':').ok_or(format!("line {}: missing `:`", i + 1))?;
            let departure: S =
                t.trim().parse().map_err(|_| format!("line {}: bad departure time", i + 1))?;
            let mut visits = Vec::new();
            for tok in rest.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                let (num, reversed) = match tok.as_bytes()[tok.len() - 1] {
                    b'+' => (&tok[..tok.len() - 1], false),
                    b'-' => (&tok[..tok.len() - 1], true),
                    _ => return Err(format!("line {}: `{tok}` lacks orientation", i + 1)),
                };
                let task = num.parse().map_err(|_| format!("line {}: bad task `{tok}`", i + 1))?;
                visits.push(Visit { task, reversed });
            }
            routes.push(Route { visits, departure });
        }
        Ok(Solution { routes })
    }
}

/// One route per line: `t_k : task±, task±, ...` (`-` marks reversed service).
impl<S: Scalar> fmt::Display for Solution<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.routes {
            write!(f, "{} :", r.departure)?;
            for (i, v) in r.visits.iter().enumerate() {
                let sep = if i == 0 { " " } else { ", " };
                write!(f, "{sep}{}{}", v.task, if v.reversed { '-' } else { '+' })?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RouteEvaluation<S> {
    pub total_cost: S,
    pub service_cost: S,
    pub travel_cost: S,
    pub load: S,
    pub begin_times: Vec<S>,
    pub gaps: Vec<S>,
    /// Arrival time back at the depot.
    pub return_time: S,
    pub feasible_capacity: bool,
    pub feasible_horizon: bool,
}

impl<S: Scalar> RouteEvaluation<S> {
    /// Capacity excess plus horizon overrun; zero iff the route is feasible.
    pub fn violation(&self, inst: &Instance<S>) -> S {
        violation_of(inst, self.load, self.return_time)
    }
}

fn violation_of<S: Scalar>(inst: &Instance<S>, load: S, return_time: S) -> S {
    (load - inst.capacity).max(S::zero()) + (return_time - inst.horizon).max(S::zero())
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolutionEvaluation<S> {
    pub tc: S,
    pub violation: S,
    pub per_route: Vec<RouteEvaluation<S>>,
}

impl<S: Scalar> SolutionEvaluation<S> {
    pub fn is_feasible(&self) -> bool {
        self.violation == S::zero()
    }
}

/// Vehicle position and clock after finishing a service.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct Cursor<S> {
    pub vertex: VertexId,
    pub time: S,
}

pub(crate) struct Step<S> {
    pub begin: S,
    pub service_cost: S,
    pub deadhead_cost: S,
    pub next: Cursor<S>,
}

#[inline]
pub(crate) fn step<S: Scalar>(
    inst: &Instance<S>,
    sp: &ShortestPathMatrix<S>,
    at: Cursor<S>,
    v: Visit,
) -> Step<S> {
    let (tail, head) = inst.endpoints(v.task, v.reversed);
    let begin = at.time + sp.time(at.vertex, tail);
    let service_cost = inst.cost_fn(v.task).eval(begin);
    let end = begin + inst.service_duration(v.task, begin);
    Step { begin, service_cost, deadhead_cost: sp.cost(at.vertex, tail), next: Cursor { vertex: head, time: end } }
}

fn check_visit<S: Scalar>(inst: &Instance<S>, v: Visit) -> Result<(), EvalError> {
    if v.task >= inst.n_tasks() {
        return Err(EvalError::UnknownTask(v.task));
    }
    if v.reversed && !inst.is_reversible(v.task) {
        return Err(EvalError::NotReversible(v.task));
    }
    Ok(())
}

/// Forward simulation of one route from its departure time.
pub fn evaluate_route<S: Scalar>(
    inst: &Instance<S>,
    sp: &ShortestPathMatrix<S>,
    route: &Route<S>,
) -> Result<RouteEvaluation<S>, EvalError> {
    let n = route.visits.len();
    let mut begin_times = Vec::with_capacity(n);
    let mut gaps = Vec::with_capacity(n);
    let mut service_cost = S::zero();
    let mut travel_cost = S::zero();
    let mut load = S::zero();
    let mut at = Cursor { vertex: DEPOT, time: route.departure };
    for &v in &route.visits {
        check_visit(inst, v)?;
        let s = step(inst, sp, at, v);
        begin_times.push(s.begin);
        gaps.push(inst.cost_fn(v.task).time_gap(s.begin));
        service_cost = service_cost + s.service_cost;
        travel_cost = travel_cost + s.deadhead_cost;
        load = load + inst.demand(v.task);
        at = s.next;
    }
    let return_time = if n == 0 {
        route.departure
    } else {
        travel_cost = travel_cost + sp.cost(at.vertex, DEPOT);
        at.time + sp.time(at.vertex, DEPOT)
    };
    Ok(RouteEvaluation {
        total_cost: service_cost + travel_cost,
        service_cost,
        travel_cost,
        load,
        begin_times,
        gaps,
        return_time,
        feasible_capacity: load <= inst.capacity,
        feasible_horizon: route.departure >= S::zero() && return_time <= inst.horizon,
    })
}

/// Every task served exactly once, by a valid visit.
pub fn check_coverage<S: Scalar>(inst: &Instance<S>, sol: &Solution<S>) -> Result<(), EvalError> {
    let mut seen = vec![false; inst.n_tasks()];
    for r in &sol.routes {
        for &v in &r.visits {
            check_visit(inst, v)?;
            if std::mem::replace(&mut seen[v.task], true) {
                return Err(EvalError::DuplicateTask(v.task));
            }
        }
    }
    match seen.iter().position(|s| !s) {
        Some(t) => Err(EvalError::MissingTask(t)),
        None => Ok(()),
    }
}

pub fn evaluate_solution<S: Scalar>(
    inst: &Instance<S>,
    sp: &ShortestPathMatrix<S>,
    sol: &Solution<S>,
) -> Result<SolutionEvaluation<S>, EvalError> {
    check_coverage(inst, sol)?;
    let per_route =
        sol.routes.iter().map(|r| evaluate_route(inst, sp, r)).collect::<Result<Vec<_>, _>>()?;
    let tc = per_route.iter().map(|e| e.total_cost).sum();
    let violation = per_route.iter().map(|e| e.violation(inst)).sum();
    Ok(SolutionEvaluation { tc, violation, per_route })
}

#[derive(Clone, Debug, PartialEq)]
pub enum Diagnostic {
    InvalidVisit(EvalError),
    DuplicateTask(TaskId),
    MissingTask(TaskId),
    CapacityExceeded { route: usize, load: f64, capacity: f64 },
    HorizonExceeded { route: usize, time: f64, horizon: f64 },
    NegativeDeparture { route: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Feasibility {
    pub feasible: bool,
    pub diagnostics: Vec<Diagnostic>,
}

/// Coverage, capacity (load ≤ Q) and horizon checks with diagnostics.
pub fn is_feasible<S: Scalar>(
    inst: &Instance<S>,
    sp: &ShortestPathMatrix<S>,
    sol: &Solution<S>,
) -> Feasibility {
    let mut diagnostics = Vec::new();
    let mut count = vec![0usize; inst.n_tasks()];
    for (k, r) in sol.routes.iter().enumerate() {
        let mut valid = true;
        for &v in &r.visits {
            if let Err(e) = check_visit(inst, v) {
                diagnostics.push(Diagnostic::InvalidVisit(e));
                valid = false;
            } else {
                count[v.task] += 1;
            }
        }
        if !valid {
            continue;
        }
        let ev = evaluate_route(inst, sp, r).expect("visits validated");
        if !ev.feasible_capacity {
            diagnostics.push(Diagnostic::CapacityExceeded {
                route: k,
                load: ev.load.as_f64(),
                capacity: inst.capacity.as_f64(),
            });
        }
        if r.departure < S::zero() {
            diagnostics.push(Diagnostic::NegativeDeparture { route: k });
        } else if !ev.feasible_horizon {
            diagnostics.push(Diagnostic::HorizonExceeded {
                route: k,
                time: ev.return_time.as_f64(),
                horizon: inst.horizon.as_f64(),
            });
        }
    }
    for (t, &c) in count.iter().enumerate() {
        match c {
            0 => diagnostics.push(Diagnostic::MissingTask(t)),
            1 => {}
            _ => diagnostics.push(Diagnostic::DuplicateTask(t)),
        }
    }
    Feasibility { feasible: diagnostics.is_empty(), diagnostics }
}

/// Per-route forward-simulation results kept for incremental evaluation.
#[derive(Clone, Debug)]
pub(crate) struct RouteCache<S> {
    pub begin: Vec<S>,
    /// Cursor after serving position `i`.
    pub after: Vec<Cursor<S>>,
    /// Service cost of positions `i..`; one extra trailing zero.
    pub suffix_sc: Vec<S>,
    /// Deadhead cost into positions `i..` plus the return to the depot.
    pub suffix_dc: Vec<S>,
    pub start: Cursor<S>,
    pub load: S,
    pub return_time: S,
    pub cost: S,
}

impl<S: Scalar> RouteCache<S> {
    pub fn cursor_before(&self, pos: usize) -> Cursor<S> {
        if pos == 0 {
            self.start
        } else {
            self.after[pos - 1]
        }
    }

    pub fn violation(&self, inst: &Instance<S>) -> S {
        violation_of(inst, self.load, self.return_time)
    }
}

/// Cached evaluation of a whole solution, the input to delta evaluation.
#[derive(Clone, Debug)]
pub struct PlanCache<S> {
    pub(crate) routes: Vec<RouteCache<S>>,
}

impl<S: Scalar> PlanCache<S> {
    pub fn build(inst: &Instance<S>, sp: &ShortestPathMatrix<S>, sol: &Solution<S>) -> Self {
        let routes = sol.routes.iter().map(|r| build_route_cache(inst, sp, r)).collect();
        PlanCache { routes }
    }

    /// Cache holding only route loads; enough to apply moves.
    pub(crate) fn build_loads(inst: &Instance<S>, sol: &Solution<S>) -> Self {
        let routes = sol
            .routes
            .iter()
            .map(|r| RouteCache {
                begin: Vec::new(),
                after: Vec::new(),
                suffix_sc: Vec::new(),
                suffix_dc: Vec::new(),
                start: Cursor { vertex: DEPOT, time: r.departure },
                load: r.visits.iter().map(|v| inst.demand(v.task)).sum(),
                return_time: r.departure,
                cost: S::zero(),
            })
            .collect();
        PlanCache { routes }
    }

    pub fn tc(&self) -> S {
        self.routes.iter().map(|r| r.cost).sum()
    }

    pub fn violation(&self, inst: &Instance<S>) -> S {
        self.routes.iter().map(|r| r.violation(inst)).sum()
    }

    pub fn route_cost(&self, route: usize) -> S {
        self.routes[route].cost
    }

    pub fn load(&self, route: usize) -> S {
        self.routes[route].load
    }

    /// Current service beginning time of a visit.
    pub fn begin(&self, route: usize, pos: usize) -> S {
        self.routes[route].begin[pos]
    }

    /// Vertex and clock right before the vehicle heads to position `pos`.
    pub(crate) fn cursor_before(&self, route: usize, pos: usize) -> Cursor<S> {
        self.routes[route].cursor_before(pos)
    }
}

fn build_route_cache<S: Scalar>(
    inst: &Instance<S>,
    sp: &ShortestPathMatrix<S>,
    route: &Route<S>,
) -> RouteCache<S> {
    let n = route.visits.len();
    let start = Cursor { vertex: DEPOT, time: route.departure };
    let mut begin = Vec::with_capacity(n);
    let mut after = Vec::with_capacity(n);
    let mut sc = Vec::with_capacity(n);
    let mut dc = Vec::with_capacity(n);
    let mut load = S::zero();
    let mut at = start;
    for &v in &route.visits {
        let s = step(inst, sp, at, v);
        begin.push(s.begin);
        after.push(s.next);
        sc.push(s.service_cost);
        dc.push(s.deadhead_cost);
        load = load + inst.demand(v.task);
        at = s.next;
    }
    let (ret_cost, return_time) = if n == 0 {
        (S::zero(), route.departure)
    } else {
        (sp.cost(at.vertex, DEPOT), at.time + sp.time(at.vertex, DEPOT))
    };
    let mut suffix_sc = vec![S::zero(); n + 1];
    let mut suffix_dc = vec![S::zero(); n + 1];
    suffix_dc[n] = ret_cost;
    for i in (0..n).rev() {
        suffix_sc[i] = suffix_sc[i + 1] + sc[i];
        suffix_dc[i] = suffix_dc[i + 1] + dc[i];
    }
    RouteCache {
        cost: suffix_sc[0] + suffix_dc[0],
        begin,
        after,
        suffix_sc,
        suffix_dc,
        start,
        load,
        return_time,
    }
}

/// Building block of a virtual route sequence.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) enum Segment {
    /// Positions `start..end` of an existing route.
    Old { route: usize, start: usize, end: usize },
    Item(Visit),
}

/// A route as it would look after a move, described without copying.
#[derive(Clone, Debug)]
pub(crate) struct RouteEdit<S> {
    /// Existing route being rewritten; `None` for a brand-new route.
    pub route: Option<usize>,
    /// First position whose visit differs from the current route.
    pub first_changed: usize,
    pub segments: [Segment; 5],
    pub n_segments: usize,
    pub load: S,
}

impl<S: Scalar> RouteEdit<S> {
    pub fn new(route: Option<usize>, first_changed: usize, segs: &[Segment], load: S) -> Self {
        let mut segments = [Segment::Item(Visit::new(0)); 5];
        let mut n_segments = 0;
        for &s in segs {
            let empty = matches!(s, Segment::Old { start, end, .. } if start >= end);
            if !empty {
                segments[n_segments] = s;
                n_segments += 1;
            }
        }
        RouteEdit { route, first_changed, segments, n_segments, load }
    }

    pub fn len(&self) -> usize {
        self.segments[..self.n_segments]
            .iter()
            .map(|s| match *s {
                Segment::Old { start, end, .. } => end - start,
                Segment::Item(_) => 1,
            })
            .sum()
    }

    /// Materializes the edited visit sequence.
    pub fn visits(&self, sol: &Solution<S>) -> Vec<Visit> {
        let mut out = Vec::with_capacity(self.len());
        for s in &self.segments[..self.n_segments] {
            match *s {
                Segment::Old { route, start, end } => {
                    out.extend_from_slice(&sol.routes[route].visits[start..end])
                }
                Segment::Item(v) => out.push(v),
            }
        }
        out
    }
}

/// Result of incrementally evaluating a move.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MoveDelta<S> {
    pub delta_sc: S,
    pub delta_dc: S,
    /// Violation of the involved routes after the move minus before.
    pub delta_violation: S,
    /// Services re-simulated to compute the delta.
    pub touched: usize,
}

impl<S: Scalar> MoveDelta<S> {
    pub fn delta(&self) -> S {
        self.delta_sc + self.delta_dc
    }

    /// The move does not increase the violation of the routes it touches.
    pub fn acceptable(&self) -> bool {
        self.delta_violation <= S::zero()
    }

    /// Acceptable and strictly decreasing total cost beyond rounding noise.
    pub fn improving(&self) -> bool {
        self.acceptable() && self.delta() < -S::improvement_eps()
    }
}

struct EditDelta<S> {
    sc: S,
    dc: S,
    violation: S,
    touched: usize,
}

/// Re-simulates one edited route from its first changed position.
///
/// The unchanged prefix and the old suffix totals come from the cache.
/// Simulation stops early once the vehicle reaches the untouched tail of
/// the old route in exactly the same state, since the rest is then equal.
fn edit_delta<S: Scalar>(
    inst: &Instance<S>,
    sp: &ShortestPathMatrix<S>,
    sol: &Solution<S>,
    cache: &PlanCache<S>,
    edit: &RouteEdit<S>,
) -> EditDelta<S> {
    let p = edit.first_changed;
    let (start, old_sc, old_dc, old_violation) = match edit.route {
        Some(r) => {
            let rc = &cache.routes[r];
            (rc.cursor_before(p), rc.suffix_sc[p], rc.suffix_dc[p], rc.violation(inst))
        }
        None => (Cursor { vertex: DEPOT, time: S::zero() }, S::zero(), S::zero(), S::zero()),
    };

    let (mut new_sc, mut new_dc) = (S::zero(), S::zero());
    let mut touched = 0usize;
    let mut at = start;
    let mut pos = 0usize;
    let mut tail: Option<(usize, usize)> = None;
    let last = edit.n_segments.saturating_sub(1);
    'outer: for (k, seg) in edit.segments[..edit.n_segments].iter().enumerate() {
        match *seg {
            Segment::Item(v) => {
                if pos >= p {
                    let s = step(inst, sp, at, v);
                    new_sc = new_sc + s.service_cost;
                    new_dc = new_dc + s.deadhead_cost;
                    at = s.next;
                    touched += 1;
                }
                pos += 1;
            }
            Segment::Old { route, start: a, end: b } => {
                let visits = &sol.routes[route].visits;
                let same_tail = k == last && Some(route) == edit.route && b == visits.len();
                for o in a..b {
                    if pos >= p {
                        if same_tail && o > 0 && cache.routes[route].after[o - 1] == at {
                            tail = Some((route, o));
                            break 'outer;
                        }
                        let s = step(inst, sp, at, visits[o]);
                        new_sc = new_sc + s.service_cost;
                        new_dc = new_dc + s.deadhead_cost;
                        at = s.next;
                        touched += 1;
                    }
                    pos += 1;
                }
            }
        }
    }

    let new_return = match tail {
        Some((route, o)) => {
            let rc = &cache.routes[route];
            new_sc = new_sc + rc.suffix_sc[o];
            new_dc = new_dc + rc.suffix_dc[o];
            rc.return_time
        }
        None if edit.len() > 0 => {
            new_dc = new_dc + sp.cost(at.vertex, DEPOT);
            at.time + sp.time(at.vertex, DEPOT)
        }
        None => start.time,
    };
    EditDelta {
        sc: new_sc - old_sc,
        dc: new_dc - old_dc,
        violation: violation_of(inst, edit.load, new_return) - old_violation,
        touched,
    }
}

pub(crate) fn delta_with_cache<S: Scalar>(
    inst: &Instance<S>,
    sp: &ShortestPathMatrix<S>,
    sol: &Solution<S>,
    cache: &PlanCache<S>,
    mv: &Move,
) -> Result<MoveDelta<S>, EvalError> {
    let edits = mv.edits(inst, sol, cache)?;
    let mut out = MoveDelta {
        delta_sc: S::zero(),
        delta_dc: S::zero(),
        delta_violation: S::zero(),
        touched: 0,
    };
    for e in edits.iter() {
        let d = edit_delta(inst, sp, sol, cache, e);
        out.delta_sc = out.delta_sc + d.sc;
        out.delta_dc = out.delta_dc + d.dc;
        out.delta_violation = out.delta_violation + d.violation;
        out.touched += d.touched;
    }
    Ok(out)
}

/// Delta of inserting `v` at position `pos` of route `route`, or into a new
/// route when `route` is `None`, plus the violation of that route afterwards.
pub(crate) fn insertion_delta<S: Scalar>(
    inst: &Instance<S>,
    sp: &ShortestPathMatrix<S>,
    sol: &Solution<S>,
    cache: &PlanCache<S>,
    route: Option<usize>,
    pos: usize,
    v: Visit,
) -> (S, S) {
    let d = inst.demand(v.task);
    let edit = match route {
        Some(r) => {
            let n = sol.routes[r].visits.len();
            let segs = [
                Segment::Old { route: r, start: 0, end: pos },
                Segment::Item(v),
                Segment::Old { route: r, start: pos, end: n },
            ];
            RouteEdit::new(Some(r), pos, &segs, cache.load(r) + d)
        }
        None => RouteEdit::new(None, 0, &[Segment::Item(v)], d),
    };
    let e = edit_delta(inst, sp, sol, cache, &edit);
    let before = route.map_or(S::zero(), |r| cache.routes[r].violation(inst));
    (e.sc + e.dc, before + e.violation)
}

/// Change in service cost and deadheading cost caused by a move.
///
/// Only the involved routes are re-simulated, from their first modified
/// position onwards; `delta_sc + delta_dc` equals the exact change in total
/// cost.
pub fn delta_evaluate<S: Scalar>(
    inst: &Instance<S>,
    sp: &ShortestPathMatrix<S>,
    sol: &Solution<S>,
    mv: &Move,
) -> Result<(S, S), EvalError> {
    let cache = PlanCache::build(inst, sp, sol);
    let d = delta_with_cache(inst, sp, sol, &cache, mv)?;
    Ok((d.delta_sc, d.delta_dc))
}
