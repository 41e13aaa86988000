//! Single insertion, double insertion and swap moves.

use serde::{Deserialize, Serialize};

use crate::error::EvalError;
use crate::evaluation::{PlanCache, RouteEdit, Segment, Solution, Visit};
use crate::instance::Instance;
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MoveKind {
    SingleInsertion,
    DoubleInsertion,
    Swap,
}

impl MoveKind {
    pub const ALL: [MoveKind; 3] = [MoveKind::SingleInsertion, MoveKind::DoubleInsertion, MoveKind::Swap];

    pub fn short(self) -> &'static str {
        match self {
            MoveKind::SingleInsertion => "SI",
            MoveKind::DoubleInsertion => "DI",
            MoveKind::Swap => "SW",
        }
    }
}

/// Destination of a move.
///
/// For insertions `Route(r, j)` is the insertion index in route `r` after
/// the moved tasks have been removed from it. For swaps it is the position
/// of the second exchanged task.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Target {
    Route(usize, usize),
    NewRoute,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Move {
    pub kind: MoveKind,
    /// `(route, position)` of the (first) moved task.
    pub src: (usize, usize),
    pub dst: Target,
    /// Orientation flips applied to the moved tasks. For swaps, `flip[0]`
    /// applies to the task leaving `src` and `flip[1]` to the one leaving
    /// `dst`.
    pub flip: [bool; 2],
}

impl Move {
    pub fn single(src: (usize, usize), dst: Target, flip: bool) -> Self {
        Move { kind: MoveKind::SingleInsertion, src, dst, flip: [flip, false] }
    }

    pub fn double(src: (usize, usize), dst: Target, flip: [bool; 2]) -> Self {
        Move { kind: MoveKind::DoubleInsertion, src, dst, flip }
    }

    pub fn swap(a: (usize, usize), b: (usize, usize), flip: [bool; 2]) -> Self {
        Move { kind: MoveKind::Swap, src: a, dst: Target::Route(b.0, b.1), flip }
    }

    /// Tasks whose time gaps Criterion 1 compares, in their new order.
    pub(crate) fn relevant<S: Scalar>(&self, sol: &Solution<S>) -> [Option<Visit>; 2] {
        let (r, i) = self.src;
        let at = |r: usize, i: usize| sol.routes[r].visits[i];
        match self.kind {
            MoveKind::SingleInsertion => [Some(at(r, i).flipped(self.flip[0])), None],
            MoveKind::DoubleInsertion => {
                [Some(at(r, i).flipped(self.flip[0])), Some(at(r, i + 1).flipped(self.flip[1]))]
            }
            MoveKind::Swap => {
                let Target::Route(r2, j) = self.dst else { unreachable!("swap targets a route") };
                [Some(at(r, i).flipped(self.flip[0])), Some(at(r2, j).flipped(self.flip[1]))]
            }
        }
    }

    /// Route edits describing the solution after this move.
    pub(crate) fn edits<S: Scalar>(
        &self,
        inst: &Instance<S>,
        sol: &Solution<S>,
        cache: &PlanCache<S>,
    ) -> Result<Edits<S>, EvalError> {
        let (r, i) = self.src;
        let len = |r: usize| sol.routes.get(r).map(|x| x.visits.len());
        let oob = || EvalError::OutOfRange(format!("{self:?}"));
        let n = len(r).ok_or_else(oob)?;
        let width = if self.kind == MoveKind::DoubleInsertion { 2 } else { 1 };
        if i + width > n {
            return Err(oob());
        }
        let visit = |r: usize, i: usize, flip: bool| -> Result<Visit, EvalError> {
            let v = sol.routes[r].visits[i].flipped(flip);
            if v.reversed && !inst.is_reversible(v.task) {
                return Err(EvalError::NotReversible(v.task));
            }
            Ok(v)
        };
        let old = |route: usize, start: usize, end: usize| Segment::Old { route, start, end };

        match self.kind {
            MoveKind::SingleInsertion | MoveKind::DoubleInsertion => {
                let items: Vec<Visit> = (0..width)
                    .map(|k| visit(r, i + k, self.flip[k]))
                    .collect::<Result<_, _>>()?;
                let moved_load: S = items.iter().map(|v| inst.demand(v.task)).sum();
                let item = |k: usize| Segment::Item(items[k.min(width - 1)]);
                let ins: Vec<Segment> = (0..width).map(item).collect();
                let src_removed = [old(r, 0, i), old(r, i + width, n)];
                match self.dst {
                    Target::NewRoute => {
                        let a = RouteEdit::new(Some(r), i, &src_removed, cache.load(r) - moved_load);
                        let b = RouteEdit::new(None, 0, &ins, moved_load);
                        Ok(Edits::two(a, b))
                    }
                    Target::Route(r2, j) if r2 == r => {
                        if j > n - width {
                            return Err(oob());
                        }
                        let mut segs = Vec::with_capacity(5);
                        let first = if j <= i {
                            segs.push(old(r, 0, j));
                            segs.extend_from_slice(&ins);
                            segs.push(old(r, j, i));
                            segs.push(old(r, i + width, n));
                            j
                        } else {
                            segs.push(old(r, 0, i));
                            segs.push(old(r, i + width, j + width));
                            segs.extend_from_slice(&ins);
                            segs.push(old(r, j + width, n));
                            i
                        };
                        Ok(Edits::one(RouteEdit::new(Some(r), first, &segs, cache.load(r))))
                    }
                    Target::Route(r2, j) => {
                        let m = len(r2).ok_or_else(oob)?;
                        if j > m {
                            return Err(oob());
                        }
                        let a = RouteEdit::new(Some(r), i, &src_removed, cache.load(r) - moved_load);
                        let mut segs = vec![old(r2, 0, j)];
                        segs.extend_from_slice(&ins);
                        segs.push(old(r2, j, m));
                        let b = RouteEdit::new(Some(r2), j, &segs, cache.load(r2) + moved_load);
                        Ok(Edits::two(a, b))
                    }
                }
            }
            MoveKind::Swap => {
                let Target::Route(r2, j) = self.dst else {
                    return Err(oob());
                };
                let m = len(r2).ok_or_else(oob)?;
                if j >= m || (r2 == r && j == i) {
                    return Err(oob());
                }
                let a = visit(r, i, self.flip[0])?;
                let b = visit(r2, j, self.flip[1])?;
                if r2 == r {
                    let (lo, hi, at_lo, at_hi) = if i < j { (i, j, b, a) } else { (j, i, a, b) };
                    let segs = [
                        old(r, 0, lo),
                        Segment::Item(at_lo),
                        old(r, lo + 1, hi),
                        Segment::Item(at_hi),
                        old(r, hi + 1, n),
                    ];
                    Ok(Edits::one(RouteEdit::new(Some(r), lo, &segs, cache.load(r))))
                } else {
                    let (da, db) = (inst.demand(a.task), inst.demand(b.task));
                    let ea = RouteEdit::new(
                        Some(r),
                        i,
                        &[old(r, 0, i), Segment::Item(b), old(r, i + 1, n)],
                        cache.load(r) - da + db,
                    );
                    let eb = RouteEdit::new(
                        Some(r2),
                        j,
                        &[old(r2, 0, j), Segment::Item(a), old(r2, j + 1, m)],
                        cache.load(r2) - db + da,
                    );
                    Ok(Edits::two(ea, eb))
                }
            }
        }
    }
}

/// The one or two route edits of a move.
#[derive(Clone, Debug)]
pub(crate) struct Edits<S> {
    first: RouteEdit<S>,
    second: Option<RouteEdit<S>>,
}

impl<S> Edits<S> {
    fn one(first: RouteEdit<S>) -> Self {
        Edits { first, second: None }
    }

    fn two(first: RouteEdit<S>, second: RouteEdit<S>) -> Self {
        Edits { first, second: Some(second) }
    }

    pub fn iter(&self) -> impl Iterator<Item = &RouteEdit<S>> {
        std::iter::once(&self.first).chain(self.second.as_ref())
    }
}

fn flips_single<S: Scalar>(inst: &Instance<S>, v: Visit) -> &'static [bool] {
    if inst.is_reversible(v.task) {
        &[false, true]
    } else {
        &[false]
    }
}

/// Every move of one kind, in a deterministic order.
///
/// Insertions try both orientations of each relocated task (when its
/// inverse arc exists) at every position of every route, and into a new
/// empty route. Swaps keep orientations, plus one variant with both tasks
/// flipped. Moves that would reproduce the current plan are skipped.
pub fn enumerate_moves<S: Scalar>(kind: MoveKind, inst: &Instance<S>, sol: &Solution<S>) -> Vec<Move> {
    let mut out = Vec::new();
    let routes = &sol.routes;
    match kind {
        MoveKind::SingleInsertion => {
            for (r, route) in routes.iter().enumerate() {
                for (i, &v) in route.visits.iter().enumerate() {
                    let flips = flips_single(inst, v);
                    for (r2, dst) in routes.iter().enumerate() {
                        let m = dst.visits.len() - usize::from(r2 == r);
                        for j in 0..=m {
                            for &f in flips {
                                if r2 == r && j == i && !f {
                                    continue;
                                }
                                out.push(Move::single((r, i), Target::Route(r2, j), f));
                            }
                        }
                    }
                    for &f in flips {
                        if route.visits.len() == 1 && !f {
                            continue;
                        }
                        out.push(Move::single((r, i), Target::NewRoute, f));
                    }
                }
            }
        }
        MoveKind::DoubleInsertion => {
            for (r, route) in routes.iter().enumerate() {
                for i in 0..route.visits.len().saturating_sub(1) {
                    let f0 = flips_single(inst, route.visits[i]);
                    let f1 = flips_single(inst, route.visits[i + 1]);
                    let combos: Vec<[bool; 2]> =
                        f0.iter().flat_map(|&a| f1.iter().map(move |&b| [a, b])).collect();
                    for (r2, dst) in routes.iter().enumerate() {
                        let m = dst.visits.len() - if r2 == r { 2 } else { 0 };
                        for j in 0..=m {
                            for &fl in &combos {
                                if r2 == r && j == i && fl == [false, false] {
                                    continue;
                                }
                                out.push(Move::double((r, i), Target::Route(r2, j), fl));
                            }
                        }
                    }
                    for &fl in &combos {
                        if route.visits.len() == 2 && fl == [false, false] {
                            continue;
                        }
                        out.push(Move::double((r, i), Target::NewRoute, fl));
                    }
                }
            }
        }
        MoveKind::Swap => {
            let positions: Vec<(usize, usize)> = routes
                .iter()
                .enumerate()
                .flat_map(|(r, route)| (0..route.visits.len()).map(move |i| (r, i)))
                .collect();
            for (x, &a) in positions.iter().enumerate() {
                for &b in &positions[x + 1..] {
                    out.push(Move::swap(a, b, [false, false]));
                    let fa = inst.is_reversible(routes[a.0].visits[a.1].task);
                    let fb = inst.is_reversible(routes[b.0].visits[b.1].task);
                    if fa || fb {
                        out.push(Move::swap(a, b, [fa, fb]));
                    }
                }
            }
        }
    }
    out
}

/// Applies a move, returning a new solution with empty routes removed.
///
/// A task moved into a new route departs at time 0.
pub fn apply_move<S: Scalar>(
    inst: &Instance<S>,
    sol: &Solution<S>,
    mv: &Move,
) -> Result<Solution<S>, EvalError> {
    let cache = PlanCache::build_loads(inst, sol);
    apply_with_cache(inst, sol, &cache, mv)
}

pub(crate) fn apply_with_cache<S: Scalar>(
    inst: &Instance<S>,
    sol: &Solution<S>,
    cache: &PlanCache<S>,
    mv: &Move,
) -> Result<Solution<S>, EvalError> {
    let edits = mv.edits(inst, sol, cache)?;
    let mut out = sol.clone();
    for e in edits.iter() {
        let visits = e.visits(sol);
        match e.route {
            Some(r) => out.routes[r].visits = visits,
            None => out.routes.push(crate::evaluation::Route::new(visits)),
        }
    }
    out.drop_empty_routes();
    Ok(out)
}
