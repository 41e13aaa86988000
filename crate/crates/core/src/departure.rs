//! Stage two: per-route departure times for a fixed routing plan.
//!
//! A route's cost depends only on its own departure time, so each route is
//! optimized separately. Two-segment instances depart at 0. Three-segment
//! instances use golden-section search when the slope is at most 1 and
//! negatively correlated search otherwise.

use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::DepartureError;
use crate::evaluation::{evaluate_route, Route, Solution, Visit};
use crate::instance::{Instance, InstanceType, ShortestPathMatrix};
use crate::scalar::Scalar;

/// Cost of one fixed task sequence as a function of its departure time.
#[derive(Clone, Copy)]
pub struct RouteCostFn<'a, S> {
    inst: &'a Instance<S>,
    sp: &'a ShortestPathMatrix<S>,
    visits: &'a [Visit],
}

impl<S: Scalar> RouteCostFn<'_, S> {
    fn route(&self, t: S) -> Route<S> {
        Route { visits: self.visits.to_vec(), departure: t }
    }

    pub fn cost(&self, t: S) -> S {
        evaluate_route(self.inst, self.sp, &self.route(t)).expect("valid route").total_cost
    }

    pub fn return_time(&self, t: S) -> S {
        evaluate_route(self.inst, self.sp, &self.route(t)).expect("valid route").return_time
    }

    /// Departure times keeping the whole route inside the horizon, assuming
    /// the route duration at time 0; `None` when even departing at 0 is too
    /// late.
    pub fn domain(&self) -> Option<(S, S)> {
        let hi = self.inst.horizon - self.return_time(S::zero());
        (hi >= S::zero()).then_some((S::zero(), hi))
    }
}

pub fn route_cost_of_t<'a, S: Scalar>(
    inst: &'a Instance<S>,
    sp: &'a ShortestPathMatrix<S>,
    route: &'a Route<S>,
) -> RouteCostFn<'a, S> {
    RouteCostFn { inst, sp, visits: &route.visits }
}

/// Golden-section search for a minimizer of a unimodal `f` on `[lo, hi]`.
///
/// When both probes tie the bracket shrinks to the span between them, so a
/// constant function yields the midpoint.
pub fn gss<S: Scalar>(mut f: impl FnMut(S) -> S, lo: S, hi: S, tol: S) -> Result<S, DepartureError> {
    if !(tol > S::zero()) {
        return Err(DepartureError::NonPositiveTolerance);
    }
    if hi < lo {
        return Err(DepartureError::EmptyInterval { lo: lo.as_f64(), hi: hi.as_f64() });
    }
    let inv_phi = (S::c(5.0).sqrt() - S::one()) / S::c(2.0);
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else if fc > fd {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        } else {
            a = c;
            b = d;
            c = b - inv_phi * (b - a);
            d = a + inv_phi * (b - a);
            fc = f(c);
            fd = f(d);
        }
    }
    Ok((a + b) / S::c(2.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NcsParams {
    pub pop_n: usize,
    /// Initial step size as a fraction of the interval width.
    pub sigma0_frac: f64,
    /// Generations between step-size adaptations.
    pub epoch: usize,
    /// Function evaluations, initial population included.
    pub budget: usize,
    /// Initial spread of the acceptance threshold, decaying linearly to 0.
    pub diversity_tradeoff: f64,
}

impl Default for NcsParams {
    fn default() -> Self {
        NcsParams { pop_n: 10, sigma0_frac: 0.1, epoch: 10, budget: 2000, diversity_tradeoff: 0.1 }
    }
}

fn bhattacharyya(m1: f64, s1: f64, m2: f64, s2: f64) -> f64 {
    let v = s1 * s1 + s2 * s2;
    (m1 - m2).powi(2) / (4.0 * v) + 0.5 * (v / (2.0 * s1 * s2)).ln()
}

/// Negatively correlated search on `[lo, hi]`; returns the best point seen.
///
/// Each process is a Gaussian around its current point. A better offspring
/// replaces its parent; a worse one still does when its normalized cost
/// over its normalized distance to the other processes falls below a
/// randomized threshold around 1. Step sizes follow the 1/5 success rule
/// once per epoch. Process 0 starts at `lo`, so the result is never worse
/// than `f(lo)`.
pub fn ncs<S: Scalar, R: Rng + ?Sized>(
    mut f: impl FnMut(S) -> S,
    lo: S,
    hi: S,
    params: &NcsParams,
    rng: &mut R,
) -> Result<S, DepartureError> {
    let n = params.pop_n;
    if n < 2 || params.budget < n || params.epoch == 0 {
        return Err(DepartureError::BadNcsParams);
    }
    if hi < lo {
        return Err(DepartureError::EmptyInterval { lo: lo.as_f64(), hi: hi.as_f64() });
    }
    let (lo64, hi64) = (lo.as_f64(), hi.as_f64());
    let width = hi64 - lo64;
    if width == 0.0 {
        return Ok(lo);
    }
    let mut eval = |x: f64| f(S::c(x)).as_f64();
    let mut x: Vec<f64> = (0..n).map(|i| if i == 0 { lo64 } else { rng.random_range(lo64..=hi64) }).collect();
    let mut fx: Vec<f64> = x.iter().map(|&v| eval(v)).collect();
    let mut sigma = vec![params.sigma0_frac * width; n];
    let mut successes = vec![0usize; n];
    let (mut best_x, mut best_f) = (x[0], fx[0]);
    for i in 1..n {
        if fx[i] < best_f {
            (best_x, best_f) = (x[i], fx[i]);
        }
    }
    let total_gens = (params.budget - n) / n;
    let mut used = n;
    let mut gen = 0usize;
    while used + n <= params.budget {
        let sd = (params.diversity_tradeoff * (1.0 - gen as f64 / total_gens.max(1) as f64)).max(0.0);
        let threshold = if sd > 0.0 { Normal::new(1.0, sd).expect("finite sd").sample(rng) } else { 1.0 };
        let children: Vec<f64> = (0..n)
            .map(|i| {
                let z: f64 = StandardNormal.sample(rng);
                (x[i] + sigma[i] * z).clamp(lo64, hi64)
            })
            .collect();
        let fchild: Vec<f64> = children.iter().map(|&c| eval(c)).collect();
        used += n;
        for (&c, &fc) in children.iter().zip(&fchild) {
            if fc < best_f {
                (best_x, best_f) = (c, fc);
            }
        }
        for i in 0..n {
            let replace = if fchild[i] < fx[i] {
                true
            } else {
                let corr = |m: f64| {
                    (0..n)
                        .filter(|&j| j != i)
                        .map(|j| bhattacharyya(m, sigma[i], x[j], sigma[j]))
                        .fold(f64::INFINITY, f64::min)
                };
                let (c_old, c_new) = (corr(x[i]), corr(children[i]));
                let (f_old, f_new) = (fx[i] - best_f, fchild[i] - best_f);
                let f_norm = if f_old + f_new > 0.0 { f_new / (f_old + f_new) } else { 0.5 };
                let c_norm = if c_old + c_new > 0.0 { c_new / (c_old + c_new) } else { 0.5 };
                c_norm > 0.0 && f_norm / c_norm < threshold
            };
            if replace {
                if fchild[i] < fx[i] {
                    successes[i] += 1;
                }
                x[i] = children[i];
                fx[i] = fchild[i];
            }
        }
        gen += 1;
        if gen % params.epoch == 0 {
            for i in 0..n {
                let rate = successes[i] as f64 / params.epoch as f64;
                if rate > 0.2 {
                    sigma[i] /= 0.9;
                } else if rate < 0.2 {
                    sigma[i] *= 0.9;
                }
                sigma[i] = sigma[i].clamp(width * 1e-9, width);
                successes[i] = 0;
            }
        }
    }
    Ok(S::c(best_x))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DepartureMethod {
    Zero,
    Gss,
    Ncs,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Stage2Params {
    /// GSS tolerance as a fraction of the horizon.
    pub gss_tol_frac: f64,
    pub ncs: NcsParams,
}

impl Default for Stage2Params {
    fn default() -> Self {
        Stage2Params { gss_tol_frac: 1e-6, ncs: NcsParams::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DepartureResult<S> {
    pub times: Vec<S>,
    pub per_route_cost: Vec<S>,
    pub total: S,
    pub method: DepartureMethod,
    /// Routes that overrun the horizon even when departing at 0.
    pub infeasible_routes: Vec<usize>,
}

impl<S: Scalar> DepartureResult<S> {
    pub fn apply(&self, sol: &Solution<S>) -> Solution<S> {
        sol.clone().with_departures(&self.times)
    }
}

/// Picks departure times for every route of a fixed plan.
///
/// Never worse than departing at 0: the search result is replaced by 0
/// whenever 0 is cheaper.
pub fn stage2<S: Scalar, R: Rng + ?Sized>(
    inst: &Instance<S>,
    sp: &ShortestPathMatrix<S>,
    sol: &Solution<S>,
    params: &Stage2Params,
    rng: &mut R,
) -> DepartureResult<S> {
    let method = match inst.instance_type {
        InstanceType::TwoLp => DepartureMethod::Zero,
        InstanceType::ThreeLp if inst.slope_abs <= S::one() => DepartureMethod::Gss,
        InstanceType::ThreeLp => DepartureMethod::Ncs,
    };
    let tol = inst.horizon * S::c(params.gss_tol_frac);
    let mut times = Vec::with_capacity(sol.routes.len());
    let mut per_route_cost = Vec::with_capacity(sol.routes.len());
    let mut infeasible_routes = Vec::new();
    for (r, route) in sol.routes.iter().enumerate() {
        let g = route_cost_of_t(inst, sp, route);
        let at_zero = g.cost(S::zero());
        let t = match (method, g.domain()) {
            (_, None) => {
                infeasible_routes.push(r);
                S::zero()
            }
            (DepartureMethod::Zero, _) => S::zero(),
            (DepartureMethod::Gss, Some((lo, hi))) => gss(|t| g.cost(t), lo, hi, tol).unwrap_or(lo),
            (DepartureMethod::Ncs, Some((lo, hi))) => ncs(|t| g.cost(t), lo, hi, &params.ncs, rng).unwrap_or(lo),
        };
        let cost = g.cost(t);
        if cost < at_zero {
            times.push(t);
            per_route_cost.push(cost);
        } else {
            times.push(S::zero());
            per_route_cost.push(at_zero);
        }
    }
    let total = per_route_cost.iter().copied().sum();
    DepartureResult { times, per_route_cost, total, method, infeasible_routes }
}
