//! Experiment drivers: repeated runs, ablations, and time to target.

use std::collections::BTreeMap;
use std::time::Duration;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::departure::stage2;
use crate::harness::config::ExperimentConfig;
use crate::harness::metrics::{mean_std, no_best, pdr, rank_sum_test, Outcome, Wdl};
use crate::init::{kgis_population, InitConfig, InitMode};
use crate::instance::{all_pairs_shortest_paths, Instance, ShortestPathMatrix};
use crate::localsearch::MoveKind;
use crate::memetic::{kgma_run, MemeticParams, OperatorChoice, RunResult, StopRule};

/// One repetition on one instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRow {
    pub instance: String,
    pub rep: usize,
    pub seed: u64,
    pub init_best: f64,
    pub stage1_tc: f64,
    /// Cost after departure-time optimization.
    pub tc: f64,
    pub generations: usize,
    /// Search time, excluding parsing and shortest paths.
    pub time_s: f64,
    pub routes: usize,
    pub plan: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceRow {
    pub instance: String,
    pub runs: usize,
    pub ave: f64,
    pub std: f64,
    pub best: f64,
    pub time_s: f64,
    pub reference: Option<f64>,
    pub pdr: Option<f64>,
    pub error: Option<String>,
}

impl InstanceRow {
    /// Aggregates stored runs of one instance.
    pub fn from_runs(instance: &str, runs: &[RunRow], reference: Option<f64>) -> Self {
        let costs: Vec<f64> = runs.iter().map(|r| r.tc).collect();
        let (ave, std) = mean_std(&costs);
        let best = costs.iter().copied().fold(f64::INFINITY, f64::min);
        let time_s = runs.iter().map(|r| r.time_s).sum::<f64>() / runs.len() as f64;
        InstanceRow {
            instance: instance.to_string(),
            runs: runs.len(),
            ave,
            std,
            best,
            time_s,
            reference,
            pdr: reference.and_then(|r| pdr(ave, r).ok()),
            error: None,
        }
    }

    fn failed(instance: String, error: String) -> Self {
        InstanceRow {
            instance,
            runs: 0,
            ave: f64::NAN,
            std: f64::NAN,
            best: f64::NAN,
            time_s: 0.0,
            reference: None,
            pdr: None,
            error: Some(error),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub rows: Vec<InstanceRow>,
    /// Mean degradation rate over rows with a reference.
    pub ave_pdr: Option<f64>,
    pub runs: Vec<RunRow>,
}

impl ExperimentReport {
    pub fn costs(&self, instance: &str) -> Vec<f64> {
        self.runs.iter().filter(|r| r.instance == instance).map(|r| r.tc).collect()
    }
}

pub(crate) struct Loaded {
    pub label: String,
    pub inst: Instance<f64>,
    pub sp: ShortestPathMatrix<f64>,
    pub target: Option<f64>,
}

pub(crate) fn load_all(cfg: &ExperimentConfig) -> Vec<Result<Loaded, (String, String)>> {
    cfg.instances
        .iter()
        .map(|spec| {
            let label = spec.label();
            let inst = spec.load(&cfg.base_dir).map_err(|e| (label.clone(), e))?;
            let sp = all_pairs_shortest_paths(&inst).map_err(|e| (label.clone(), e.to_string()))?;
            Ok(Loaded { label: inst.name.clone(), inst, sp, target: spec.target })
        })
        .collect()
}

pub(crate) fn pool(cfg: &ExperimentConfig) -> rayon::ThreadPool {
    rayon::ThreadPoolBuilder::new().num_threads(cfg.threads).build().expect("thread pool")
}

fn stop_rule(cfg: &ExperimentConfig) -> StopRule {
    StopRule {
        max_generations: cfg.generations,
        wallclock: cfg.wallclock_s.map(Duration::from_secs_f64),
        target_cost: None,
    }
}

/// Both stages on one instance with one seed.
pub fn solve_once(
    inst: &Instance<f64>,
    sp: &ShortestPathMatrix<f64>,
    cfg: &ExperimentConfig,
    params: &MemeticParams<f64>,
    stop: &StopRule,
    seed: u64,
) -> Result<(RunResult<f64>, crate::departure::DepartureResult<f64>), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let run = kgma_run(inst, sp, params, stop, &mut rng).map_err(|e| e.to_string())?;
    let dep = stage2(inst, sp, &run.best.solution, &cfg.stage2, &mut rng);
    Ok((run, dep))
}

/// Repeats the full algorithm with seeds `seed + rep` on every instance.
///
/// Runs are spread over a worker pool; aggregation happens after all runs
/// finish. An instance that fails to load or solve yields an error row.
pub fn run_experiment(cfg: &ExperimentConfig) -> ExperimentReport {
    let refs = cfg.reference_costs().unwrap_or_default();
    let loaded = load_all(cfg);
    let stop = stop_rule(cfg);
    let jobs: Vec<(usize, usize)> = loaded
        .iter()
        .enumerate()
        .filter(|(_, l)| l.is_ok())
        .flat_map(|(i, _)| (0..cfg.repetitions).map(move |r| (i, r)))
        .collect();
    let results: Vec<(usize, Result<RunRow, String>)> = pool(cfg).install(|| {
        jobs.par_iter()
            .map(|&(i, rep)| {
                let l = loaded[i].as_ref().expect("filtered");
                let seed = cfg.seed + rep as u64;
                let row = solve_once(&l.inst, &l.sp, cfg, &cfg.memetic, &stop, seed).map(|(run, dep)| {
                    let sol = dep.apply(&run.best.solution);
                    RunRow {
                        instance: l.label.clone(),
                        rep,
                        seed,
                        init_best: run.init_best,
                        stage1_tc: run.best.tc,
                        tc: dep.total,
                        generations: run.generations,
                        time_s: run.elapsed.as_secs_f64(),
                        routes: sol.routes.len(),
                        plan: sol.to_string().trim_end().replace('\n', " | "),
                    }
                });
                (i, row)
            })
            .collect()
    });

    let mut rows = Vec::new();
    let mut runs = Vec::new();
    for (i, l) in loaded.iter().enumerate() {
        match l {
            Err((label, e)) => rows.push(InstanceRow::failed(label.clone(), e.clone())),
            Ok(l) => {
                let mine: Vec<&(usize, Result<RunRow, String>)> = results.iter().filter(|(j, _)| *j == i).collect();
                if let Some((_, Err(e))) = mine.iter().find(|(_, r)| r.is_err()) {
                    rows.push(InstanceRow::failed(l.label.clone(), e.clone()));
                    continue;
                }
                let ok: Vec<RunRow> = mine.iter().filter_map(|(_, r)| r.as_ref().ok().cloned()).collect();
                rows.push(InstanceRow::from_runs(&l.label, &ok, refs.get(&l.label).copied()));
                runs.extend(ok);
            }
        }
    }
    let pdrs: Vec<f64> = rows.iter().filter_map(|r| r.pdr).collect();
    let ave_pdr = (!pdrs.is_empty()).then(|| pdrs.iter().sum::<f64>() / pdrs.len() as f64);
    ExperimentReport { rows, ave_pdr, runs }
}

/// Per-instance rank-sum verdict of one report against another.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub instance: String,
    pub ave: f64,
    pub other_ave: f64,
    pub best: f64,
    pub other_best: f64,
    pub p: Option<f64>,
    /// Verdict for the first report; `None` with fewer than two runs each.
    pub outcome: Option<Outcome>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub rows: Vec<ComparisonRow>,
    pub wdl: Wdl,
    /// Instances where each report attains the lower `Best`, ties counting for both.
    pub no_best: [usize; 2],
}

/// Compares two reports on the instances they share, from their raw runs.
pub fn compare_reports(a: &ExperimentReport, b: &ExperimentReport, alpha: f64) -> Comparison {
    let mut rows = Vec::new();
    for ra in a.rows.iter().filter(|r| r.error.is_none()) {
        let Some(rb) = b.rows.iter().find(|r| r.instance == ra.instance && r.error.is_none()) else { continue };
        let test = rank_sum_test(&a.costs(&ra.instance), &b.costs(&rb.instance), alpha).ok();
        rows.push(ComparisonRow {
            instance: ra.instance.clone(),
            ave: ra.ave,
            other_ave: rb.ave,
            best: ra.best,
            other_best: rb.best,
            p: test.map(|t| t.p),
            outcome: test.map(|t| t.outcome),
        });
    }
    let wdl = Wdl::tally(rows.iter().filter_map(|r| r.outcome));
    let bests = [rows.iter().map(|r| r.best).collect(), rows.iter().map(|r| r.other_best).collect()];
    let nb = no_best(&bests);
    Comparison { rows, wdl, no_best: [nb[0], nb[1]] }
}

/// Initial-population quality with and without time-gap knowledge.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InitAblationRow {
    pub instance: String,
    pub reps: usize,
    pub kgis_mean_best: f64,
    pub baseline_mean_best: f64,
    pub kgis_mean: f64,
    pub baseline_mean: f64,
    pub kgis_wins: usize,
}

/// Paired-seed comparison of the two initializers on every instance.
pub fn ablation_init(cfg: &ExperimentConfig) -> Vec<InitAblationRow> {
    let mut out = Vec::new();
    for l in load_all(cfg).into_iter().flatten() {
        let pairs: Vec<((f64, f64), (f64, f64))> = pool(cfg).install(|| {
            (0..cfg.repetitions)
                .into_par_iter()
                .map(|rep| {
                    let seed = cfg.seed + rep as u64;
                    let stats = |mode| {
                        let c = InitConfig { psize: cfg.memetic.psize, max_retries: cfg.memetic.init_retries, mode };
                        let pop = kgis_population(&l.inst, &l.sp, &c, &mut ChaCha8Rng::seed_from_u64(seed))
                            .expect("instance admits a plan");
                        let costs: Vec<f64> = pop
                            .individuals
                            .into_iter()
                            .map(|s| crate::memetic::Individual::evaluate(&l.inst, &l.sp, s).tc)
                            .collect();
                        let best = costs.iter().copied().fold(f64::INFINITY, f64::min);
                        (best, costs.iter().sum::<f64>() / costs.len() as f64)
                    };
                    (stats(InitMode::Kgis), stats(InitMode::Baseline))
                })
                .collect()
        });
        let n = pairs.len() as f64;
        let avg = |f: &dyn Fn(&((f64, f64), (f64, f64))) -> f64| pairs.iter().map(f).sum::<f64>() / n;
        out.push(InitAblationRow {
            instance: l.label.clone(),
            reps: pairs.len(),
            kgis_mean_best: avg(&|p| p.0 .0),
            baseline_mean_best: avg(&|p| p.1 .0),
            kgis_mean: avg(&|p| p.0 .1),
            baseline_mean: avg(&|p| p.1 .1),
            kgis_wins: pairs.iter().filter(|p| p.0 .0 < p.1 .0).count(),
        });
    }
    out
}

/// Operator cost of the knowledge-guided versus traditional operators.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimingRow {
    pub instance: String,
    pub operator: String,
    pub kg_time_s: f64,
    pub traditional_time_s: f64,
    /// Traditional time over knowledge-guided time.
    pub ratio: f64,
    pub kg_evaluations: u64,
    pub traditional_evaluations: u64,
    pub evaluation_ratio: f64,
    pub kg_pruned: u64,
    pub kg_calls: u64,
    pub traditional_calls: u64,
}

/// Runs the memetic search with each operator family and reports the time
/// and evaluations spent per operator, summed over repetitions.
pub fn ablation_timing(cfg: &ExperimentConfig) -> Vec<TimingRow> {
    let stop = stop_rule(cfg);
    let mut out = Vec::new();
    for l in load_all(cfg).into_iter().flatten() {
        let total = |ops: OperatorChoice| {
            let params = MemeticParams { operators: ops, ..cfg.memetic.clone() };
            let stats: Vec<_> = pool(cfg).install(|| {
                (0..cfg.repetitions)
                    .into_par_iter()
                    .map(|rep| {
                        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed + rep as u64);
                        kgma_run(&l.inst, &l.sp, &params, &stop, &mut rng).map(|r| r.stats).unwrap_or_default()
                    })
                    .collect()
            });
            let mut sum = crate::localsearch::OperatorStats::default();
            for s in &stats {
                sum.add(s);
            }
            sum
        };
        let (kg, tr) = (total(OperatorChoice::Kg), total(OperatorChoice::Traditional));
        for kind in MoveKind::ALL {
            let (a, b) = (kg.get(kind), tr.get(kind));
            let (ta, tb) = (a.elapsed.as_secs_f64(), b.elapsed.as_secs_f64());
            out.push(TimingRow {
                instance: l.label.clone(),
                operator: kind.short().to_string(),
                kg_time_s: ta,
                traditional_time_s: tb,
                ratio: if ta > 0.0 { tb / ta } else { f64::NAN },
                kg_evaluations: a.evaluations(),
                traditional_evaluations: b.evaluations(),
                evaluation_ratio: if a.evaluations() > 0 {
                    b.evaluations() as f64 / a.evaluations() as f64
                } else {
                    f64::NAN
                },
                kg_pruned: a.pruned_by_criterion1,
                kg_calls: a.calls,
                traditional_calls: b.calls,
            });
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TargetRow {
    pub instance: String,
    pub rep: usize,
    pub target: f64,
    pub reached: bool,
    /// Seconds until the target was met; `None` means did not finish.
    pub time_s: Option<f64>,
    pub generations: usize,
}

impl TargetRow {
    pub fn time_label(&self) -> String {
        self.time_s.map_or_else(|| "DNF".to_string(), |t| format!("{t:.3}"))
    }
}

/// Runs until each instance's target cost or the generation cap.
///
/// Instances without a target are skipped; `targets` overrides the values
/// from the configuration.
pub fn runtime_to_target(cfg: &ExperimentConfig, targets: &BTreeMap<String, f64>) -> Vec<TargetRow> {
    let mut out = Vec::new();
    for l in load_all(cfg).into_iter().flatten() {
        let Some(target) = targets.get(&l.label).copied().or(l.target) else { continue };
        let stop = StopRule { max_generations: cfg.target_generation_cap, wallclock: None, target_cost: Some(target) };
        let rows: Vec<TargetRow> = pool(cfg).install(|| {
            (0..cfg.repetitions)
                .into_par_iter()
                .map(|rep| {
                    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed + rep as u64);
                    let run = kgma_run(&l.inst, &l.sp, &cfg.memetic, &stop, &mut rng);
                    let (reached, generations) = match &run {
                        Ok(r) => (r.target_reached, r.generations),
                        Err(_) => (None, 0),
                    };
                    TargetRow {
                        instance: l.label.clone(),
                        rep,
                        target,
                        reached: reached.is_some(),
                        time_s: reached.map(|d| d.as_secs_f64()),
                        generations,
                    }
                })
                .collect()
        });
        out.extend(rows);
    }
    out
}
