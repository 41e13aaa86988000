#![allow(dead_code)]

use std::path::PathBuf;

use carptdsc::instance::{
    all_pairs_shortest_paths, generate_td_parameters, random_base, Instance, InstanceType, IntervalPolicy,
    ShortestPathMatrix,
};

pub fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data")
}

/// Seeded random instance with about `n_tasks` tasks and windows spread
/// over the first 30% of the horizon.
pub fn random_instance(
    seed: u64,
    n_tasks: usize,
    itype: InstanceType,
    slope: f64,
) -> (Instance<f64>, ShortestPathMatrix<f64>) {
    let n_vertices = (n_tasks * 2 / 3).max((2.0 * n_tasks as f64).sqrt() as usize + 2);
    let n_edges = (n_tasks.max(n_vertices - 1) + 2).min(n_vertices * (n_vertices - 1) / 2);
    let base = random_base("rnd", n_vertices, n_edges, n_tasks, 9, 3, 10.0, seed).unwrap();
    let policy = IntervalPolicy { center_span: 0.3, ..Default::default() };
    let inst = generate_td_parameters(&base, itype, slope, &policy, seed).unwrap();
    let sp = all_pairs_shortest_paths(&inst).unwrap();
    (inst, sp)
}
