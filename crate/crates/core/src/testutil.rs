use crate::instance::{
    all_pairs_shortest_paths, generate_td_parameters, random_base, ArcSpec, Instance, InstanceHeader,
    InstanceType, IntervalPolicy, ServiceSpec, ShortestPathMatrix,
};

/// Tasks `i -> i + 1` along a path from the depot, unit costs, flat windows.
pub fn chain_instance(n: usize, reversible: bool) -> Instance<f64> {
    let mut specs = Vec::new();
    for i in 0..n {
        let service = ServiceSpec { demand: 1.0, service_time: 1.0, min_sc: 1.0, bt: 0.0, et: 1000.0 };
        specs.push(ArcSpec {
            tail: i,
            head: i + 1,
            length: 1.0,
            travel_time: 1.0,
            travel_cost: 1.0,
            service: Some(service),
        });
        if reversible {
            specs.push(ArcSpec { tail: i + 1, head: i, length: 1.0, travel_time: 1.0, travel_cost: 1.0, service: None });
        }
    }
    if !reversible {
        specs.push(ArcSpec { tail: n, head: 0, length: 1.0, travel_time: 1.0, travel_cost: 1.0, service: None });
    }
    Instance::new(
        InstanceHeader {
            name: "chain".into(),
            n_vertices: n + 1,
            capacity: n as f64,
            horizon: 1000.0,
            instance_type: InstanceType::ThreeLp,
            slope_abs: 1.0,
        },
        specs,
    )
    .unwrap()
}

/// Small generated instance with random windows.
pub fn random_instance(
    seed: u64,
    n_tasks: usize,
    itype: InstanceType,
    slope: f64,
) -> (Instance<f64>, ShortestPathMatrix<f64>) {
    let n_vertices = (n_tasks * 2 / 3).max((2.0 * n_tasks as f64).sqrt() as usize + 2);
    let n_edges = n_tasks.max(n_vertices - 1) + 2;
    let base = random_base("rnd", n_vertices, n_edges.min(n_vertices * (n_vertices - 1) / 2), n_tasks, 9, 3, 10.0, seed)
        .unwrap();
    let policy = IntervalPolicy { center_span: 0.3, ..Default::default() };
    let inst = generate_td_parameters(&base, itype, slope, &policy, seed).unwrap();
    let sp = all_pairs_shortest_paths(&inst).unwrap();
    (inst, sp)
}
