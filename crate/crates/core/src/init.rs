//! Constructive initialization of the population.
//!
//! Routes are grown one task at a time from the depot. The next task is the
//! candidate minimizing deadhead cost plus its time gap at the tentative
//! begin time scaled by the slope; the knowledge-free baseline drops the
//! time-gap term. Equal scores are broken uniformly at random.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::InitError;
use crate::evaluation::{step, Cursor, Route, Solution, Visit};
use crate::instance::{Instance, ShortestPathMatrix, TaskId, DEPOT};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitMode {
    #[default]
    Kgis,
    Baseline,
}

impl std::str::FromStr for InitMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "kgis" => Ok(InitMode::Kgis),
            "baseline" => Ok(InitMode::Baseline),
            _ => Err(format!("unknown init mode `{s}`")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InitConfig {
    pub psize: usize,
    pub max_retries: usize,
    pub mode: InitMode,
}

impl Default for InitConfig {
    fn default() -> Self {
        InitConfig { psize: 10, max_retries: 50, mode: InitMode::Kgis }
    }
}

/// Individuals plus the number admitted despite duplicating another.
#[derive(Clone, Debug, PartialEq)]
pub struct Population<S> {
    pub individuals: Vec<Solution<S>>,
    pub duplicate_warnings: usize,
}

/// One candidate extension of the open route.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Candidate<S> {
    pub visit: Visit,
    pub begin: S,
    pub score: S,
}

/// Feasible extensions of a route currently at `at` with `load`, each
/// task in its better orientation.
///
/// A candidate must fit the capacity and allow the vehicle to return to
/// the depot within the horizon.
pub(crate) fn candidates<S: Scalar>(
    inst: &Instance<S>,
    sp: &ShortestPathMatrix<S>,
    served: &[bool],
    at: Cursor<S>,
    load: S,
    weight: S,
) -> Vec<Candidate<S>> {
    let mut out = Vec::new();
    for t in 0..inst.n_tasks() {
        if served[t] || load + inst.demand(t) > inst.capacity {
            continue;
        }
        let mut best: Option<Candidate<S>> = None;
        for reversed in [false, true] {
            if reversed && !inst.is_reversible(t) {
                continue;
            }
            let visit = Visit { task: t, reversed };
            let s = step(inst, sp, at, visit);
            let back = s.next.time + sp.time(s.next.vertex, DEPOT);
            if s.begin > inst.horizon || back > inst.horizon {
                continue;
            }
            let score = s.deadhead_cost + weight * inst.cost_fn(t).time_gap(s.begin);
            if best.is_none_or(|b| score < b.score) {
                best = Some(Candidate { visit, begin: s.begin, score });
            }
        }
        out.extend(best);
    }
    out
}

fn construct<S: Scalar, R: Rng + ?Sized>(
    inst: &Instance<S>,
    sp: &ShortestPathMatrix<S>,
    weight: S,
    rng: &mut R,
) -> Result<Solution<S>, InitError> {
    let n = inst.n_tasks();
    let mut served = vec![false; n];
    let mut routes = Vec::new();
    let mut left = n;
    while left > 0 {
        let mut at = Cursor { vertex: DEPOT, time: S::zero() };
        let mut load = S::zero();
        let mut visits = Vec::new();
        loop {
            let cands = candidates(inst, sp, &served, at, load, weight);
            let Some(min) = cands.iter().map(|c| c.score).reduce(S::min) else { break };
            let ties: Vec<&Candidate<S>> = cands.iter().filter(|c| c.score == min).collect();
            let pick = *ties[rng.random_range(0..ties.len())];
            let s = step(inst, sp, at, pick.visit);
            served[pick.visit.task] = true;
            left -= 1;
            load = load + inst.demand(pick.visit.task);
            at = s.next;
            visits.push(pick.visit);
        }
        if visits.is_empty() {
            let t: TaskId = (0..n).find(|&t| !served[t]).expect("tasks left");
            return Err(InitError::InfeasibleTask(t));
        }
        routes.push(Route::new(visits));
    }
    Ok(Solution::new(routes))
}

/// Knowledge-guided greedy construction with departures at 0.
pub fn kgis_individual<S: Scalar, R: Rng + ?Sized>(
    inst: &Instance<S>,
    sp: &ShortestPathMatrix<S>,
    slope_abs: S,
    rng: &mut R,
) -> Result<Solution<S>, InitError> {
    construct(inst, sp, slope_abs, rng)
}

/// Nearest-neighbour construction ignoring time gaps.
pub fn baseline_individual<S: Scalar, R: Rng + ?Sized>(
    inst: &Instance<S>,
    sp: &ShortestPathMatrix<S>,
    rng: &mut R,
) -> Result<Solution<S>, InitError> {
    construct(inst, sp, S::zero(), rng)
}

/// `psize` individuals, distinct by task sequence when possible.
///
/// After `max_retries` consecutive duplicates the next duplicate is
/// admitted and counted in `duplicate_warnings`.
pub fn kgis_population<S: Scalar, R: Rng + ?Sized>(
    inst: &Instance<S>,
    sp: &ShortestPathMatrix<S>,
    cfg: &InitConfig,
    rng: &mut R,
) -> Result<Population<S>, InitError> {
    let mut individuals: Vec<Solution<S>> = Vec::with_capacity(cfg.psize);
    let mut duplicate_warnings = 0;
    let mut retries = 0;
    while individuals.len() < cfg.psize.max(1) {
        let s = match cfg.mode {
            InitMode::Kgis => kgis_individual(inst, sp, inst.slope_abs, rng)?,
            InitMode::Baseline => baseline_individual(inst, sp, rng)?,
        };
        if individuals.iter().any(|x| x.same_plan(&s)) {
            if retries < cfg.max_retries {
                retries += 1;
                continue;
            }
            duplicate_warnings += 1;
            log::warn!("admitting duplicate initial individual after {retries} retries");
        }
        retries = 0;
        individuals.push(s);
    }
    Ok(Population { individuals, duplicate_warnings })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluation::{evaluate_solution, is_feasible};
    use crate::instance::InstanceType;
    use crate::testutil::{chain_instance, random_instance};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn single_task_gives_single_route() {
        let inst = chain_instance(1, false);
        let sp = crate::instance::all_pairs_shortest_paths(&inst).unwrap();
        let s = kgis_individual(&inst, &sp, 1.0, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        assert_eq!(s.routes.len(), 1);
        assert_eq!(s.routes[0].visits, vec![Visit::new(0)]);
    }

    #[test]
    fn zero_slope_equals_baseline() {
        let (inst, sp) = random_instance(3, 10, InstanceType::ThreeLp, 1.0);
        for seed in 0..10 {
            let a = kgis_individual(&inst, &sp, 0.0, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
            let b = baseline_individual(&inst, &sp, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn individuals_are_feasible_and_deterministic() {
        for seed in 0..10 {
            let (inst, sp) = random_instance(seed, 12, InstanceType::ThreeLp, 2.0);
            let a = kgis_individual(&inst, &sp, 2.0, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
            let b = kgis_individual(&inst, &sp, 2.0, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
            assert_eq!(a, b);
            assert!(is_feasible(&inst, &sp, &a).feasible);
            assert!(evaluate_solution(&inst, &sp, &a).unwrap().is_feasible());
        }
    }

    #[test]
    fn one_task_population_counts_duplicates() {
        let inst = chain_instance(1, false);
        let sp = crate::instance::all_pairs_shortest_paths(&inst).unwrap();
        let cfg = InitConfig { psize: 10, max_retries: 3, mode: InitMode::Kgis };
        let pop = kgis_population(&inst, &sp, &cfg, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        assert_eq!(pop.individuals.len(), 10);
        assert_eq!(pop.duplicate_warnings, 9);
    }

    #[test]
    fn oversized_demand_is_reported() {
        let mut inst = chain_instance(2, false);
        inst.capacity = 0.5;
        let sp = crate::instance::all_pairs_shortest_paths(&inst).unwrap();
        assert_eq!(
            baseline_individual(&inst, &sp, &mut ChaCha8Rng::seed_from_u64(0)),
            Err(InitError::InfeasibleTask(0))
        );
    }
}
