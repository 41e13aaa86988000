//! Stage one: memetic search over routing plans.

mod crossover;
mod engine;
mod ranking;

pub use crossover::{sbx_crossover, sbx_with_cuts};
pub use engine::{kgma_run, Individual, MemeticParams, OperatorChoice, RunResult, StopRule, TraceRow};
pub use ranking::stochastic_rank;
