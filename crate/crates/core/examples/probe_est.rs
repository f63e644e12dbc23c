// temporary probe: estimator variants at the peak transition
use std::sync::Arc;
use bfspart_core::bfs::{bfs_trace, message_class_counts};
use bfspart_core::frontier::{build_frontier_profile, expected_cut};
use bfspart_core::generate::generate_powerlaw;
use bfspart_core::multilevel::partition_kway;
use bfspart_core::partition::WeightedGraph;
use bfspart_core::stats::degree_stats;
use bfspart_core::strategies::{edge_weight_table, empirical_weight_table};
use rand::{Rng, SeedableRng};

fn main() {
    let g = Arc::new(generate_powerlaw(50_000, -2.0, 300, 1).unwrap());
    let unit = WeightedGraph::unit(Arc::clone(&g));
    let part = partition_kway(&unit, 100, 0.05, 7).unwrap();
    let stats = degree_stats(&g, 300).unwrap();
    let comps = g.components();
    let members = comps.members(comps.largest().0);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
    let mut emp_errs = vec![];
    let mut model_errs = vec![];
    for _ in 0..50 {
        let root = members[rng.gen_range(0..members.len())];
        let trace = bfs_trace(&g, &part, root).unwrap();
        let tau = trace.peak_iteration;
        let actual = trace.messages_cross.get(tau).copied().unwrap_or(0) as f64;
        if actual == 0.0 { continue; }
        let counts = message_class_counts(&g, &part, root, tau, 300).unwrap();
        if counts.total() > 0.0 {
            let table = empirical_weight_table(&g, &counts, tau);
            let e = expected_cut(&g, &part, &table).unwrap();
            emp_errs.push((e - actual) / actual);
        }
        let profile = build_frontier_profile(&stats, &trace.frontier_sizes).unwrap();
        if tau + 1 < profile.iteration_count() {
            let table = edge_weight_table(&profile, &stats, tau).unwrap();
            let e = expected_cut(&g, &part, &table).unwrap();
            model_errs.push((e - actual) / actual);
        }
    }
    for (name, errs) in [("empirical@tau*", emp_errs), ("model-lift@tau*", model_errs)] {
        let mut e = errs.clone();
        e.sort_by(f64::total_cmp);
        let mean: f64 = e.iter().sum::<f64>() / e.len() as f64;
        println!("{name}: n={} mean {:.4} median {:.4} range [{:.4}, {:.4}]", e.len(), mean, e[e.len()/2], e[0], e[e.len()-1]);
    }
}
