//! Experiment configuration, drivers, statistics, and reports.

pub mod config;
pub mod experiment;
pub mod metrics;
pub mod report;

pub use config::{parse_references, ExperimentConfig, InstanceSpec, OutputFormat, RandomBaseSpec};
pub use experiment::{
    ablation_init, ablation_timing, compare_reports, run_experiment, runtime_to_target, solve_once, Comparison, ComparisonRow, ExperimentReport,
    InitAblationRow, InstanceRow, RunRow, TargetRow, TimingRow,
};
pub use metrics::{mean_std, no_best, pdr, rank_sum_test, Outcome, RankSum, Wdl};
pub use report::{format_summary, write_csv, write_json, write_report, write_rows, write_trace};
