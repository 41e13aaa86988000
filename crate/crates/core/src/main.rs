use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::info;

use carptdsc::harness::{
    ablation_init, ablation_timing, compare_reports, format_summary, parse_references, run_experiment, runtime_to_target,
    solve_once, write_report, write_rows, write_trace, ExperimentConfig, ExperimentReport, InstanceSpec, OutputFormat,
};
use carptdsc::init::InitMode;
use carptdsc::instance::{
    all_pairs_shortest_paths, generate_td_parameters, parse_classic_dat, parse_instance, random_base,
    write_instance, InstanceType, IntervalPolicy,
};
use carptdsc::memetic::{OperatorChoice, StopRule};
use carptdsc::oracle::{exact_solve, OracleBudget};

#[derive(Parser)]
#[command(name = "kgma", version, about = "Arc routing with time-dependent service costs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct Common {
    /// Experiment configuration file (key = value).
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    generations: Option<usize>,
    /// Criterion-1 threshold; `inf` disables pruning.
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long, value_parser = ["kgis", "baseline"])]
    init: Option<String>,
    #[arg(long, value_parser = ["kg", "traditional"])]
    operators: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_parser = ["csv", "json"])]
    format: Option<String>,
    /// Worker threads (0 = all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Extended-format instance files, appended to those in the config.
    instances: Vec<PathBuf>,
}

#[derive(Args)]
struct TdArgs {
    /// 2LP or 3LP.
    #[arg(long = "type", default_value = "3LP")]
    itype: InstanceType,
    /// Absolute slope of the non-flat segments.
    #[arg(long, default_value_t = 1.0)]
    slope: f64,
    /// Windows covering the whole horizon (costs reduce to classic CARP).
    #[arg(long)]
    flat: bool,
    #[arg(long, default_value_t = 0)]
    gen_seed: u64,
    /// Output file; stdout when absent.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve instances once and print the plan.
    Solve {
        #[command(flatten)]
        common: Common,
        /// Write the final plan in dump format.
        #[arg(long)]
        dump_solution: Option<PathBuf>,
    },
    /// Repeated runs with summary statistics.
    Bench {
        #[command(flatten)]
        common: Common,
        /// Earlier JSON report to compare against (w-d-l and No.best).
        #[arg(long)]
        compare: Option<PathBuf>,
    },
    /// Initial population quality, KGIS against the baseline.
    AblateInit {
        #[command(flatten)]
        common: Common,
    },
    /// Operator timing and evaluation counts, kg against traditional.
    AblateOperators {
        #[command(flatten)]
        common: Common,
    },
    /// Time until each run reaches a target cost.
    TimeToTarget {
        #[command(flatten)]
        common: Common,
        /// File of `name cost` target lines.
        #[arg(long)]
        targets: Option<PathBuf>,
    },
    /// Random base graph turned into an extended-format instance.
    Gen {
        #[arg(long)]
        name: Option<String>,
        #[arg(long, default_value_t = 20)]
        vertices: usize,
        #[arg(long, default_value_t = 40)]
        edges: usize,
        #[arg(long, default_value_t = 30)]
        required: usize,
        #[arg(long, default_value_t = 20)]
        max_cost: u32,
        #[arg(long, default_value_t = 5)]
        max_demand: u32,
        #[arg(long, default_value_t = 30.0)]
        capacity: f64,
        #[arg(long, default_value_t = 0)]
        base_seed: u64,
        #[command(flatten)]
        td: TdArgs,
    },
    /// Classic DAT file turned into an extended-format instance.
    Convert {
        input: PathBuf,
        #[command(flatten)]
        td: TdArgs,
    },
    /// Exhaustive optimum of a tiny instance, as JSON.
    Oracle {
        instance: PathBuf,
        #[arg(long, default_value_t = 7)]
        max_tasks: usize,
        #[arg(long, default_value_t = 100_000)]
        grid_steps: usize,
        /// Fix every departure at 0.
        #[arg(long)]
        zero_departures: bool,
    },
}

fn build_config(c: &Common) -> Result<ExperimentConfig, String> {
    let mut cfg = match &c.config {
        Some(p) => ExperimentConfig::from_file(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(v) = c.seed {
        cfg.seed = v;
    }
    if let Some(v) = c.reps {
        if v == 0 {
            return Err("--reps must be at least 1".into());
        }
        cfg.repetitions = v;
    }
    if let Some(v) = c.generations {
        cfg.generations = v;
    }
    if let Some(v) = c.lambda {
        cfg.memetic.lambda = v;
    }
    if let Some(v) = &c.init {
        cfg.memetic.init = v.parse::<InitMode>()?;
    }
    if let Some(v) = &c.operators {
        cfg.memetic.operators = v.parse::<OperatorChoice>()?;
    }
    if let Some(v) = &c.out {
        cfg.out = v.clone();
    }
    if let Some(v) = &c.format {
        cfg.format = v.parse::<OutputFormat>()?;
    }
    if let Some(v) = c.threads {
        cfg.threads = v;
    }
    let cwd = std::env::current_dir().map_err(|e| e.to_string())?;
    for p in &c.instances {
        cfg.instances.push(InstanceSpec { path: Some(cwd.join(p)), ..Default::default() });
    }
    if cfg.instances.is_empty() {
        return Err("no instances given".into());
    }
    Ok(cfg)
}

fn emit<T: serde::Serialize>(cfg: &ExperimentConfig, stem: &str, rows: &[T]) -> Result<(), String> {
    let path = write_rows(&cfg.out, stem, rows, cfg.format).map_err(|e| e.to_string())?;
    println!("wrote {}", path.display());
    Ok(())
}

fn write_or_print(output: Option<&Path>, text: &str) -> Result<(), String> {
    match output {
        Some(p) => fs::write(p, text).map_err(|e| format!("{}: {e}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn policy(td: &TdArgs) -> IntervalPolicy {
    if td.flat {
        IntervalPolicy::flat()
    } else {
        IntervalPolicy::default()
    }
}

fn solve(common: &Common, dump: Option<&Path>) -> Result<(), String> {
    let cfg = build_config(common)?;
    fs::create_dir_all(&cfg.out).map_err(|e| e.to_string())?;
    let stop = StopRule {
        max_generations: cfg.generations,
        wallclock: cfg.wallclock_s.map(std::time::Duration::from_secs_f64),
        target_cost: None,
    };
    let mut dumps = String::new();
    for spec in &cfg.instances {
        let inst = spec.load(&cfg.base_dir)?;
        let sp = all_pairs_shortest_paths(&inst).map_err(|e| e.to_string())?;
        info!("{}: {} tasks", inst.name, inst.n_tasks());
        let (run, dep) = solve_once(&inst, &sp, &cfg, &cfg.memetic, &stop, cfg.seed)?;
        let plan = dep.apply(&run.best.solution);
        println!(
            "{}: stage-one tc {:.4}, final tc {:.4}, violation {}, {} routes, {:.3}s",
            inst.name,
            run.best.tc,
            dep.total,
            run.best.violation,
            plan.routes.len(),
            run.elapsed.as_secs_f64()
        );
        print!("{plan}");
        let trace = cfg.out.join(format!("{}-trace.csv", inst.name));
        write_trace(&trace, &run.trace).map_err(|e| e.to_string())?;
        dumps.push_str(&format!("# {}\n{plan}", inst.name));
    }
    if let Some(p) = dump {
        fs::write(p, dumps).map_err(|e| format!("{}: {e}", p.display()))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), String> {
    match cli.command {
        Command::Solve { common, dump_solution } => solve(&common, dump_solution.as_deref()),
        Command::Bench { common, compare } => {
            let cfg = build_config(&common)?;
            let report = run_experiment(&cfg);
            print!("{}", format_summary(&report.rows, report.ave_pdr));
            for p in write_report(&cfg.out, &report, cfg.format).map_err(|e| e.to_string())? {
                println!("wrote {}", p.display());
            }
            if let Some(p) = compare {
                let text = fs::read_to_string(&p).map_err(|e| format!("{}: {e}", p.display()))?;
                let other: ExperimentReport = serde_json::from_str(&text).map_err(|e| format!("{}: {e}", p.display()))?;
                let cmp = compare_reports(&report, &other, 0.05);
                for r in &cmp.rows {
                    println!("{:<24} {:>10.2} {:>10.2} {:?}", r.instance, r.ave, r.other_ave, r.outcome);
                }
                println!("w-d-l {}  No.best {} vs {}", cmp.wdl, cmp.no_best[0], cmp.no_best[1]);
                emit(&cfg, "comparison", &cmp.rows)?;
            }
            Ok(())
        }
        Command::AblateInit { common } => {
            let cfg = build_config(&common)?;
            let rows = ablation_init(&cfg);
            for r in &rows {
                println!("{r:?}");
            }
            emit(&cfg, "ablate-init", &rows)
        }
        Command::AblateOperators { common } => {
            let cfg = build_config(&common)?;
            let rows = ablation_timing(&cfg);
            println!("{:<24} {:<8} {:>10} {:>10} {:>8} {:>12}", "instance", "op", "kg_s", "trad_s", "ratio", "eval_ratio");
            for r in &rows {
                println!(
                    "{:<24} {:<8} {:>10.4} {:>10.4} {:>8.2} {:>12.2}",
                    r.instance, r.operator, r.kg_time_s, r.traditional_time_s, r.ratio, r.evaluation_ratio
                );
            }
            emit(&cfg, "ablate-operators", &rows)
        }
        Command::TimeToTarget { common, targets } => {
            let cfg = build_config(&common)?;
            let map = match targets {
                Some(p) => {
                    let text = fs::read_to_string(&p).map_err(|e| format!("{}: {e}", p.display()))?;
                    parse_references(&text)?
                }
                None => BTreeMap::new(),
            };
            let rows = runtime_to_target(&cfg, &map);
            for r in &rows {
                println!("{} rep {} target {} -> {}", r.instance, r.rep, r.target, r.time_label());
            }
            emit(&cfg, "time-to-target", &rows)
        }
        Command::Gen { name, vertices, edges, required, max_cost, max_demand, capacity, base_seed, td } => {
            let name = name.unwrap_or_else(|| format!("rnd{base_seed}"));
            let base = random_base(&name, vertices, edges, required, max_cost, max_demand, capacity, base_seed)
                .map_err(|e| e.to_string())?;
            let inst = generate_td_parameters::<f64>(&base, td.itype, td.slope, &policy(&td), td.gen_seed)
                .map_err(|e| e.to_string())?;
            write_or_print(td.output.as_deref(), &write_instance(&inst))
        }
        Command::Convert { input, td } => {
            let text = fs::read_to_string(&input).map_err(|e| format!("{}: {e}", input.display()))?;
            let base = parse_classic_dat(&text).map_err(|e| e.to_string())?;
            let inst = generate_td_parameters::<f64>(&base, td.itype, td.slope, &policy(&td), td.gen_seed)
                .map_err(|e| e.to_string())?;
            write_or_print(td.output.as_deref(), &write_instance(&inst))
        }
        Command::Oracle { instance, max_tasks, grid_steps, zero_departures } => {
            let inst = parse_instance::<f64>(&instance).map_err(|e| e.to_string())?;
            let sp = all_pairs_shortest_paths(&inst).map_err(|e| e.to_string())?;
            let exact = exact_solve(&inst, &sp, &OracleBudget { max_tasks, grid_steps, zero_departures }).map_err(|e| e.to_string())?;
            let json = serde_json::to_string_pretty(&exact).map_err(|e| e.to_string())?;
            println!("{json}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
