//! The generational loop.

use std::time::{Duration, Instant};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::InitError;
use crate::evaluation::{PlanCache, Solution};
use crate::init::{kgis_population, InitConfig, InitMode};
use crate::instance::{Instance, ShortestPathMatrix};
use crate::localsearch::{kgslss, kgslss_until_optimum, merge_split, OperatorMode, OperatorStats};
use crate::memetic::{sbx_crossover, stochastic_rank};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OperatorChoice {
    #[default]
    Kg,
    Traditional,
}

impl std::str::FromStr for OperatorChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "kg" => Ok(OperatorChoice::Kg),
            "traditional" => Ok(OperatorChoice::Traditional),
            _ => Err(format!("unknown operator family `{s}`")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MemeticParams<S> {
    pub psize: usize,
    pub osnum: usize,
    pub pls: f64,
    pub lambda: S,
    pub pf: f64,
    /// Routes merged by each Merge-Split call.
    pub merge_routes: usize,
    pub init: InitMode,
    pub operators: OperatorChoice,
    /// Repeat the small-step search until no operator improves, instead of
    /// a single sweep per call.
    pub ls_until_optimum: bool,
    pub ls_max_rounds: usize,
    pub init_retries: usize,
}

impl<S: Scalar> Default for MemeticParams<S> {
    fn default() -> Self {
        MemeticParams {
            psize: 10,
            osnum: 60,
            pls: 0.1,
            lambda: S::one(),
            pf: 0.45,
            merge_routes: 2,
            init: InitMode::Kgis,
            operators: OperatorChoice::Kg,
            ls_until_optimum: false,
            ls_max_rounds: 1000,
            init_retries: 50,
        }
    }
}

impl<S: Scalar> MemeticParams<S> {
    pub fn operator_mode(&self) -> OperatorMode<S> {
        match self.operators {
            OperatorChoice::Kg => OperatorMode::KnowledgeGuided { lambda: self.lambda },
            OperatorChoice::Traditional => OperatorMode::Traditional,
        }
    }
}

/// When to stop; whichever limit is reached first.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StopRule {
    pub max_generations: usize,
    pub wallclock: Option<Duration>,
    /// Stop once a feasible plan costs at most this much.
    pub target_cost: Option<f64>,
}

impl StopRule {
    pub fn generations(n: usize) -> Self {
        StopRule { max_generations: n, wallclock: None, target_cost: None }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Individual<S> {
    pub solution: Solution<S>,
    pub tc: S,
    pub violation: S,
}

impl<S: Scalar> Individual<S> {
    pub fn evaluate(inst: &Instance<S>, sp: &ShortestPathMatrix<S>, solution: Solution<S>) -> Self {
        let cache = PlanCache::build(inst, sp, &solution);
        Individual { tc: cache.tc(), violation: cache.violation(inst), solution }
    }

    pub fn is_feasible(&self) -> bool {
        self.violation == S::zero()
    }

    /// Lower cost first, then fewer routes.
    fn beats(&self, other: &Individual<S>) -> bool {
        self.tc < other.tc
            || (self.tc == other.tc && self.solution.routes.len() < other.solution.routes.len())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub generation: usize,
    /// Best feasible cost found so far; NaN while none exists.
    pub best_tc: f64,
    pub mean_tc: f64,
    pub feasible_count: usize,
    pub elapsed_s: f64,
    pub si_evaluations: u64,
    pub di_evaluations: u64,
    pub sw_evaluations: u64,
    pub si_time_s: f64,
    pub di_time_s: f64,
    pub sw_time_s: f64,
}

#[derive(Clone, Debug)]
pub struct RunResult<S> {
    /// Best feasible plan seen during the run, departures at 0.
    pub best: Individual<S>,
    pub trace: Vec<TraceRow>,
    pub stats: OperatorStats,
    pub generations: usize,
    /// Best feasible cost in the initial population.
    pub init_best: f64,
    /// Elapsed time when the target was first met.
    pub target_reached: Option<Duration>,
    pub duplicate_warnings: usize,
    pub elapsed: Duration,
}

fn contains<S: Scalar>(pop: &[Individual<S>], s: &Solution<S>) -> bool {
    pop.iter().any(|x| x.solution.same_plan(s))
}

fn row<S: Scalar>(
    generation: usize,
    pop: &[Individual<S>],
    best: Option<&Individual<S>>,
    stats: &OperatorStats,
    started: Instant,
) -> TraceRow {
    let mean = pop.iter().map(|x| x.tc.as_f64()).sum::<f64>() / pop.len().max(1) as f64;
    TraceRow {
        generation,
        best_tc: best.map_or(f64::NAN, |b| b.tc.as_f64()),
        mean_tc: mean,
        feasible_count: pop.iter().filter(|x| x.is_feasible()).count(),
        elapsed_s: started.elapsed().as_secs_f64(),
        si_evaluations: stats.single_insertion.evaluations(),
        di_evaluations: stats.double_insertion.evaluations(),
        sw_evaluations: stats.swap.evaluations(),
        si_time_s: stats.single_insertion.elapsed.as_secs_f64(),
        di_time_s: stats.double_insertion.elapsed.as_secs_f64(),
        sw_time_s: stats.swap.elapsed.as_secs_f64(),
    }
}

fn update_best<S: Scalar>(best: &mut Option<Individual<S>>, pop: &[Individual<S>]) {
    for x in pop.iter().filter(|x| x.is_feasible()) {
        if best.as_ref().is_none_or(|b| x.beats(b)) {
            *best = Some(x.clone());
        }
    }
}

/// Evolves routing plans and returns the best feasible one found.
///
/// The population starts from the constructive heuristic. Each generation
/// breeds `osnum` children by crossover of two random parents; with
/// probability `pls` a child is refined by small-step search, Merge-Split,
/// and small-step search again. Children already present are discarded,
/// and stochastic ranking truncates the pool back to `psize`. The best
/// feasible plan ever seen is archived, so the trace is monotone.
pub fn kgma_run<S: Scalar, R: Rng + ?Sized>(
    inst: &Instance<S>,
    sp: &ShortestPathMatrix<S>,
    params: &MemeticParams<S>,
    stop: &StopRule,
    rng: &mut R,
) -> Result<RunResult<S>, InitError> {
    let started = Instant::now();
    let cfg = InitConfig { psize: params.psize, max_retries: params.init_retries, mode: params.init };
    let init = kgis_population(inst, sp, &cfg, rng)?;
    let mut pop: Vec<Individual<S>> =
        init.individuals.into_iter().map(|s| Individual::evaluate(inst, sp, s)).collect();
    let mut stats = OperatorStats::default();
    let mut best = None;
    update_best(&mut best, &pop);
    let init_best = best.as_ref().map_or(f64::NAN, |b: &Individual<S>| b.tc.as_f64());
    let mut trace = vec![row(0, &pop, best.as_ref(), &stats, started)];

    let reached = |best: &Option<Individual<S>>| match (stop.target_cost, best) {
        (Some(t), Some(b)) => b.tc.as_f64() <= t,
        _ => false,
    };
    let mut target_reached = reached(&best).then(|| started.elapsed());
    let mode = params.operator_mode();
    let local = |s: &Solution<S>, stats: &mut OperatorStats| {
        if params.ls_until_optimum {
            kgslss_until_optimum(inst, sp, s, mode, params.ls_max_rounds, stats)
        } else {
            kgslss(inst, sp, s, mode, stats)
        }
    };

    let mut generation = 0;
    while target_reached.is_none()
        && generation < stop.max_generations
        && stop.wallclock.is_none_or(|w| started.elapsed() < w)
    {
        generation += 1;
        for _ in 0..params.osnum {
            let a = rng.random_range(0..pop.len());
            let b = if pop.len() > 1 {
                let b = rng.random_range(0..pop.len() - 1);
                b + usize::from(b >= a)
            } else {
                a
            };
            let mut child = sbx_crossover(&pop[a].solution, &pop[b].solution, inst, sp, rng);
            if rng.random::<f64>() < params.pls {
                child = local(&child, &mut stats);
                child = merge_split(inst, sp, &child, params.merge_routes, rng);
                child = local(&child, &mut stats);
            }
            if !contains(&pop, &child) {
                pop.push(Individual::evaluate(inst, sp, child));
            }
        }
        let keys: Vec<(S, S)> = pop.iter().map(|x| (x.tc, x.violation)).collect();
        let order = stochastic_rank(&keys, params.pf, rng);
        let mut ranked: Vec<Option<Individual<S>>> = pop.into_iter().map(Some).collect();
        pop = order.into_iter().take(params.psize).filter_map(|i| ranked[i].take()).collect();
        update_best(&mut best, &ranked.into_iter().flatten().chain(pop.iter().cloned()).collect::<Vec<_>>());
        trace.push(row(generation, &pop, best.as_ref(), &stats, started));
        if reached(&best) {
            target_reached = Some(started.elapsed());
        }
    }

    let best = best.ok_or(InitError::NoFeasiblePlan)?;
    Ok(RunResult {
        best,
        trace,
        stats,
        generations: generation,
        init_best,
        target_reached,
        duplicate_warnings: init.duplicate_warnings,
        elapsed: started.elapsed(),
    })
}
