//! Runtime and comparison-count benchmark harness.
//!
//! Sweeps sample sizes over one seeded synthetic batch (each size is a
//! prefix of the same stream), runs every registered clustering algorithm,
//! and records wall time, per-insert latency percentiles, and pairwise
//! comparison counts. Runs are single-threaded for timing fidelity.

use std::io::Write;
use std::path::Path;
use std::time::Instant;

use crate::cluster::{ClusterSpace, PlacementReport};
use crate::ontology::DomainSpace;
use crate::registry::{ClusterParams, NearestNeighborBaseline, OnlineClusterer};
use crate::service::{Feature, ServiceDescription, ServiceRegistry};
use crate::synth::{gen_domain_space, gen_services, GenConfig};
use crate::{Error, Result};

/// One row of a benchmark sweep.
#[derive(Debug, Clone)]
pub struct BenchRecord {
    pub size: usize,
    pub stc_wall_ms: f64,
    pub stc_mean_insert_us: f64,
    pub stc_p50_insert_us: f64,
    pub stc_p95_insert_us: f64,
    pub stc_comparisons: u64,
    /// Mean of per-insert comparisons over the space size at insert time,
    /// averaged across the I and O spaces.
    pub stc_mean_cmp_fraction: f64,
    pub baseline_wall_ms: f64,
    pub baseline_comparisons: u64,
    pub baseline_clusters: usize,
}

/// Per-insert workload summary for one feature space.
#[derive(Debug, Clone)]
pub struct InsertStats {
    pub total_comparisons: u64,
    pub mean_insert_us: f64,
    pub p50_insert_us: f64,
    pub p95_insert_us: f64,
    /// Mean over inserts of comparisons / nodes-before-insert.
    pub mean_cmp_fraction: f64,
}

/// Builds one feature space insert-by-insert, timing each insertion.
pub fn timed_converge(
    services: &[&ServiceDescription],
    feature: Feature,
    space: &DomainSpace,
) -> Result<(ClusterSpace, Vec<PlacementReport>, InsertStats, f64)> {
    let mut cs = ClusterSpace::new(feature, space.stamp());
    let mut reports = Vec::with_capacity(services.len());
    let mut insert_us = Vec::with_capacity(services.len());
    let wall_start = Instant::now();
    for svc in services {
        let t = Instant::now();
        reports.push(cs.insert(&svc.id, svc.gcode(feature))?);
        insert_us.push(t.elapsed().as_secs_f64() * 1e6);
    }
    let wall_ms = wall_start.elapsed().as_secs_f64() * 1e3;
    let stats = insert_stats(&reports, &insert_us);
    Ok((cs, reports, stats, wall_ms))
}

pub fn insert_stats(reports: &[PlacementReport], insert_us: &[f64]) -> InsertStats {
    let total_comparisons = reports.iter().map(|r| r.comparisons).sum();
    let fractions: Vec<f64> = reports
        .iter()
        .map(|r| r.comparisons as f64 / r.space_size_before.max(1) as f64)
        .collect();
    let mean_cmp_fraction = mean(&fractions);
    let mut sorted = insert_us.to_vec();
    sorted.sort_by(f64::total_cmp);
    InsertStats {
        total_comparisons,
        mean_insert_us: mean(insert_us),
        p50_insert_us: percentile(&sorted, 0.50),
        p95_insert_us: percentile(&sorted, 0.95),
        mean_cmp_fraction,
    }
}

fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        0.0
    } else {
        xs.iter().sum::<f64>() / xs.len() as f64
    }
}

fn percentile(sorted: &[f64], p: f64) -> f64 {
    if sorted.is_empty() {
        return 0.0;
    }
    let idx = ((sorted.len() as f64 - 1.0) * p).round() as usize;
    sorted[idx]
}

/// Runs the sweep: for each size, both the taxonomical engine (I and O
/// spaces) and the threshold baseline over the same prefix.
pub fn bench(sizes: &[usize], cfg: &GenConfig, threshold: f64) -> Result<Vec<BenchRecord>> {
    if sizes.is_empty() {
        return Err(Error::InvalidConfig("empty size sweep".into()));
    }
    if sizes.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidConfig("sweep sizes must be non-decreasing".into()));
    }
    let max = *sizes.last().unwrap();
    let mut gen_cfg = cfg.clone();
    gen_cfg.service_count = max;
    let docs = gen_domain_space(&gen_cfg)?;
    let space = DomainSpace::from_documents(&docs)?;
    let service_docs = gen_services(&gen_cfg, &space)?;
    let mut registry = ServiceRegistry::new();
    registry.admit_batch(&service_docs, &space)?;
    // registry iteration is id-ordered which matches generation order here
    let all: Vec<&ServiceDescription> = registry.iter().collect();

    let baseline = NearestNeighborBaseline;
    let mut records = Vec::with_capacity(sizes.len());
    for &size in sizes {
        let prefix = &all[..size.min(all.len())];
        let (_, _, i_stats, i_wall) = timed_converge(prefix, Feature::Input, &space)?;
        let (_, _, o_stats, o_wall) = timed_converge(prefix, Feature::Output, &space)?;
        let params = ClusterParams {
            feature: Feature::Output,
            threshold,
        };
        let flat = baseline.cluster(prefix, &space, &params)?;
        records.push(BenchRecord {
            size: prefix.len(),
            stc_wall_ms: i_wall + o_wall,
            stc_mean_insert_us: (i_stats.mean_insert_us + o_stats.mean_insert_us) / 2.0,
            stc_p50_insert_us: (i_stats.p50_insert_us + o_stats.p50_insert_us) / 2.0,
            stc_p95_insert_us: (i_stats.p95_insert_us + o_stats.p95_insert_us) / 2.0,
            stc_comparisons: i_stats.total_comparisons + o_stats.total_comparisons,
            stc_mean_cmp_fraction: (i_stats.mean_cmp_fraction + o_stats.mean_cmp_fraction) / 2.0,
            baseline_wall_ms: flat.wall.as_secs_f64() * 1e3,
            baseline_comparisons: flat.comparisons,
            baseline_clusters: flat.clusters.len(),
        });
    }
    Ok(records)
}

pub fn write_bench_csv(records: &[BenchRecord], path: &Path) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    writeln!(
        f,
        "size,stc_wall_ms,stc_mean_insert_us,stc_p50_insert_us,stc_p95_insert_us,stc_comparisons,stc_mean_cmp_fraction,baseline_wall_ms,baseline_comparisons,baseline_clusters"
    )?;
    for r in records {
        writeln!(
            f,
            "{},{},{},{},{},{},{},{},{},{}",
            r.size,
            r.stc_wall_ms,
            r.stc_mean_insert_us,
            r.stc_p50_insert_us,
            r.stc_p95_insert_us,
            r.stc_comparisons,
            r.stc_mean_cmp_fraction,
            r.baseline_wall_ms,
            r.baseline_comparisons,
            r.baseline_clusters
        )?;
    }
    Ok(())
}

/// Parses a `start:end:step` sweep expression, or a comma list of sizes.
pub fn parse_sizes(expr: &str) -> Result<Vec<usize>> {
    let bad = || Error::InvalidConfig(format!("bad size sweep `{expr}`"));
    if expr.contains(':') {
        let parts: Vec<&str> = expr.split(':').collect();
        if parts.len() != 3 {
            return Err(bad());
        }
        let start: usize = parts[0].parse().map_err(|_| bad())?;
        let end: usize = parts[1].parse().map_err(|_| bad())?;
        let step: usize = parts[2].parse().map_err(|_| bad())?;
        if step == 0 || start == 0 || end < start {
            return Err(bad());
        }
        Ok((start..=end).step_by(step).collect())
    } else {
        expr.split(',')
            .map(|s| s.trim().parse().map_err(|_| bad()))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_parsing() {
        assert_eq!(parse_sizes("50:250:100").unwrap(), vec![50, 150, 250]);
        assert_eq!(parse_sizes("10,20").unwrap(), vec![10, 20]);
        assert!(parse_sizes("0:10:5").is_err());
        assert!(parse_sizes("x").is_err());
    }

    #[test]
    fn small_sweep_produces_one_row_per_size() {
        let cfg = GenConfig {
            ontology_count: 2,
            avg_concepts: 25,
            avg_params: 3,
            rng_seed: 11,
            ..GenConfig::default()
        };
        let records = bench(&[10, 20], &cfg, 0.3).unwrap();
        assert_eq!(records.len(), 2);
        assert_eq!(records[0].size, 10);
        assert_eq!(records[1].size, 20);
        assert!(records[1].stc_comparisons >= records[0].stc_comparisons);
        // baseline compares against every prior sample: n(n-1)/2
        assert_eq!(records[0].baseline_comparisons, 45);
        assert_eq!(records[1].baseline_comparisons, 190);
    }
}
