mod common;

use common::synthetic_workload;
use stc_core::bench::timed_converge;
use stc_core::synth::GenConfig;
use stc_core::{Feature, NodeKind, ServiceDescription};

#[test]
fn probe_fractions() {
    for (depth, second, label) in [
        (6, 0.3, "default"),
        (10, 0.3, "deep10"),
        (14, 0.2, "deep14"),
        (10, 0.6, "deep10-multi"),
        (4, 0.1, "shallow"),
    ] {
        let cfg = GenConfig {
            service_count: 850,
            rng_seed: 42,
            max_depth: depth,
            second_parent_chance: second,
            ..GenConfig::default()
        };
        let (space, registry) = synthetic_workload(&cfg);
        let services: Vec<&ServiceDescription> = registry.iter().collect();
        let t = std::time::Instant::now();
        let (cs, _, stats, _) = timed_converge(&services, Feature::Output, &space).unwrap();
        let wall = t.elapsed();
        let abstracts = cs.nodes().filter(|n| n.kind == NodeKind::Abstract).count();
        let max_fanout = cs.nodes().map(|n| n.children.len()).max().unwrap_or(0);
        let mean_fanout: f64 = cs.nodes().map(|n| n.children.len()).sum::<usize>() as f64 / cs.len() as f64;
        println!(
            "{label:14} depth={depth:2} p2={second:.1}: frac={:.4} cmp={} nodes={} roots={} abstracts={abstracts} max_fanout={max_fanout} mean_fanout={mean_fanout:.1} wall={wall:.1?}",
            stats.mean_cmp_fraction,
            stats.total_comparisons,
            cs.len(),
            cs.roots().len(),
        );
    }
}
