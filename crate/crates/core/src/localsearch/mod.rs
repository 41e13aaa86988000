//! Neighbourhood moves, move classification, and the local search operators.

mod criteria;
mod merge_split;
mod moves;
mod operators;

pub use criteria::{criterion1_failed, criterion2_successful, tentative_gaps};
pub use merge_split::{merge_split, path_scan, split_giant_tour, ScanRule};
pub(crate) use moves::apply_with_cache;
pub use moves::{apply_move, enumerate_moves, Move, MoveKind, Target};
pub use operators::{
    kg_operator, kgslss, kgslss_until_optimum, operator, traditional_operator, OperatorMode, OperatorStats,
    SearchCounters,
};
