//! Accuracy metrics: domain precision/recall, query precision/recall at a
//! cut-off, 11-point interpolated precision curves, F-measure, and
//! size-weighted cluster entropy.

use std::collections::{BTreeMap, BTreeSet};

use crate::cluster::ClusterSpace;
use crate::service::ServiceId;
use crate::{Error, Result};

/// The 11 standard recall levels 0.0, 0.1, …, 1.0.
pub const RECALL_LEVELS: usize = 11;

/// Fraction of a cluster's services that belong to the domain. Undefined
/// (absent) for an empty cluster, never zero-by-convention.
pub fn domain_precision(cluster: &BTreeSet<ServiceId>, domain: &BTreeSet<ServiceId>) -> Option<f64> {
    if cluster.is_empty() {
        return None;
    }
    let hits = cluster.intersection(domain).count();
    Some(hits as f64 / cluster.len() as f64)
}

/// Fraction of the domain's services captured by the cluster.
pub fn domain_recall(cluster: &BTreeSet<ServiceId>, domain: &BTreeSet<ServiceId>) -> Option<f64> {
    if domain.is_empty() {
        return None;
    }
    let hits = cluster.intersection(domain).count();
    Some(hits as f64 / domain.len() as f64)
}

/// Mean of a cluster's domain precision over every domain.
pub fn averaged_domain_precision(
    cluster: &BTreeSet<ServiceId>,
    domains: &BTreeMap<String, BTreeSet<ServiceId>>,
) -> Option<f64> {
    if domains.is_empty() {
        return None;
    }
    let sum: f64 = domains
        .values()
        .filter_map(|d| domain_precision(cluster, d))
        .sum();
    Some(sum / domains.len() as f64)
}

/// Mean of a cluster's domain recall over every domain.
pub fn averaged_domain_recall(
    cluster: &BTreeSet<ServiceId>,
    domains: &BTreeMap<String, BTreeSet<ServiceId>>,
) -> Option<f64> {
    if domains.is_empty() {
        return None;
    }
    let sum: f64 = domains
        .values()
        .filter_map(|d| domain_recall(cluster, d))
        .sum();
    Some(sum / domains.len() as f64)
}

/// Precision at cut-off `r`: relevant hits within the first `r` retrieved.
pub fn precision_at(retrieved: &[ServiceId], relevant: &BTreeSet<ServiceId>, r: usize) -> Result<f64> {
    if r < 1 || r > retrieved.len() {
        return Err(Error::RankOutOfRange(r, retrieved.len()));
    }
    let hits = retrieved[..r].iter().filter(|s| relevant.contains(*s)).count();
    Ok(hits as f64 / r as f64)
}

/// Recall at cut-off `r`: relevant hits within the first `r` retrieved over
/// the total relevant count.
pub fn recall_at(retrieved: &[ServiceId], relevant: &BTreeSet<ServiceId>, r: usize) -> Result<f64> {
    if r < 1 || r > retrieved.len() {
        return Err(Error::RankOutOfRange(r, retrieved.len()));
    }
    if relevant.is_empty() {
        return Ok(0.0);
    }
    let hits = retrieved[..r].iter().filter(|s| relevant.contains(*s)).count();
    Ok(hits as f64 / relevant.len() as f64)
}

/// 11-point interpolated precision curve: the value at recall level t is
/// the highest precision at any cut-off whose recall reaches t.
pub fn interpolated_curve(retrieved: &[ServiceId], relevant: &BTreeSet<ServiceId>) -> [f64; RECALL_LEVELS] {
    let mut curve = [0.0; RECALL_LEVELS];
    if relevant.is_empty() {
        return curve;
    }
    let mut hits = 0usize;
    let mut points: Vec<(f64, f64)> = Vec::with_capacity(retrieved.len());
    for (i, s) in retrieved.iter().enumerate() {
        if relevant.contains(s) {
            hits += 1;
        }
        let precision = hits as f64 / (i + 1) as f64;
        let recall = hits as f64 / relevant.len() as f64;
        points.push((recall, precision));
    }
    for (level, slot) in curve.iter_mut().enumerate() {
        let t = level as f64 / 10.0;
        *slot = points
            .iter()
            .filter(|(recall, _)| *recall + 1e-12 >= t)
            .map(|&(_, p)| p)
            .fold(0.0, f64::max);
    }
    curve
}

/// Per-level mean of per-query interpolated curves.
pub fn mean_interpolated(curves: &[[f64; RECALL_LEVELS]]) -> [f64; RECALL_LEVELS] {
    let mut mean = [0.0; RECALL_LEVELS];
    if curves.is_empty() {
        return mean;
    }
    for curve in curves {
        for (slot, v) in mean.iter_mut().zip(curve.iter()) {
            *slot += v;
        }
    }
    for slot in &mut mean {
        *slot /= curves.len() as f64;
    }
    mean
}

/// Harmonic mean of precision and recall; 0 when both are 0 (degenerate).
pub fn f_measure(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

/// Size-weighted Shannon entropy (base 2) of label proportions over the
/// given clusters. Every member must carry a label.
pub fn cluster_entropy(
    clusters: &[BTreeSet<ServiceId>],
    labels: &BTreeMap<ServiceId, String>,
) -> Result<f64> {
    let mut weighted = 0.0;
    let mut total = 0usize;
    for cluster in clusters {
        if cluster.is_empty() {
            continue;
        }
        let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
        for sid in cluster {
            let label = labels
                .get(sid)
                .ok_or_else(|| Error::UnlabeledService(sid.0.clone()))?;
            *counts.entry(label.as_str()).or_insert(0) += 1;
        }
        let n = cluster.len() as f64;
        let h: f64 = counts
            .values()
            .map(|&c| {
                let p = c as f64 / n;
                -p * p.log2()
            })
            .sum();
        weighted += h * cluster.len() as f64;
        total += cluster.len();
    }
    if total == 0 {
        return Ok(0.0);
    }
    Ok(weighted / total as f64)
}

/// Entropy of a cluster space: one cluster per taxonomy.
pub fn space_entropy(space: &ClusterSpace, labels: &BTreeMap<ServiceId, String>) -> Result<f64> {
    let clusters: Vec<BTreeSet<ServiceId>> =
        space.taxonomies().into_iter().map(|(_, s)| s).collect();
    cluster_entropy(&clusters, labels)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(names: &[&str]) -> Vec<ServiceId> {
        names.iter().map(|n| ServiceId(n.to_string())).collect()
    }

    fn idset(names: &[&str]) -> BTreeSet<ServiceId> {
        names.iter().map(|n| ServiceId(n.to_string())).collect()
    }

    #[test]
    fn hand_case_precision_recall() {
        let retrieved = ids(&["a", "x", "b"]);
        let relevant = idset(&["a", "b", "c"]);
        assert_eq!(precision_at(&retrieved, &relevant, 1).unwrap(), 1.0);
        assert_eq!(precision_at(&retrieved, &relevant, 2).unwrap(), 0.5);
        assert!((precision_at(&retrieved, &relevant, 3).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert!((recall_at(&retrieved, &relevant, 3).unwrap() - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn hand_case_interpolated_curve() {
        let retrieved = ids(&["a", "x", "b"]);
        let relevant = idset(&["a", "b", "c"]);
        let curve = interpolated_curve(&retrieved, &relevant);
        for (level, &v) in curve.iter().enumerate() {
            let t = level as f64 / 10.0;
            let expected = if t <= 1.0 / 3.0 {
                1.0
            } else if t <= 2.0 / 3.0 {
                2.0 / 3.0
            } else {
                0.0
            };
            assert!((v - expected).abs() < 1e-12, "level {level}: {v} vs {expected}");
        }
    }

    #[test]
    fn all_irrelevant_gives_zero_precision() {
        let retrieved = ids(&["x", "y"]);
        let relevant = idset(&["a"]);
        for r in 1..=2 {
            assert_eq!(precision_at(&retrieved, &relevant, r).unwrap(), 0.0);
        }
    }

    #[test]
    fn perfect_ranking_flat_curve() {
        let retrieved = ids(&["a", "b", "c"]);
        let relevant = idset(&["a", "b", "c"]);
        let curve = interpolated_curve(&retrieved, &relevant);
        assert!(curve.iter().all(|&v| (v - 1.0).abs() < 1e-15));
    }

    #[test]
    fn curve_is_non_increasing() {
        let retrieved = ids(&["x", "a", "y", "b", "c", "z"]);
        let relevant = idset(&["a", "b", "c"]);
        let curve = interpolated_curve(&retrieved, &relevant);
        for w in curve.windows(2) {
            assert!(w[0] >= w[1] - 1e-15);
        }
    }

    #[test]
    fn rank_out_of_range_rejected() {
        let retrieved = ids(&["a"]);
        let relevant = idset(&["a"]);
        assert!(matches!(
            precision_at(&retrieved, &relevant, 0),
            Err(Error::RankOutOfRange(0, 1))
        ));
        assert!(matches!(
            precision_at(&retrieved, &relevant, 2),
            Err(Error::RankOutOfRange(2, 1))
        ));
    }

    #[test]
    fn domain_metrics_arithmetic() {
        // cluster with 5 of D (|D| = 20) out of 8 total
        let cluster: BTreeSet<ServiceId> = (0..8).map(|i| ServiceId(format!("c{i}"))).collect();
        let mut domain: BTreeSet<ServiceId> = (0..5).map(|i| ServiceId(format!("c{i}"))).collect();
        for i in 0..15 {
            domain.insert(ServiceId(format!("d{i}")));
        }
        assert_eq!(domain_precision(&cluster, &domain).unwrap(), 0.625);
        assert_eq!(domain_recall(&cluster, &domain).unwrap(), 0.25);
    }

    #[test]
    fn pure_cluster_has_unit_precision() {
        let cluster = idset(&["a", "b", "c"]);
        let domain = idset(&["a", "b", "c", "d"]);
        assert_eq!(domain_precision(&cluster, &domain).unwrap(), 1.0);
        assert_eq!(domain_recall(&cluster, &domain).unwrap(), 0.75);
        assert_eq!(domain_precision(&BTreeSet::new(), &domain), None);
    }

    #[test]
    fn f_measure_cases() {
        assert_eq!(f_measure(1.0, 1.0), 1.0);
        assert_eq!(f_measure(1.0, 0.0), 0.0);
        assert_eq!(f_measure(0.0, 0.0), 0.0);
        assert!((f_measure(0.8, 0.74) - 0.7688311688311689).abs() < 1e-12);
    }

    #[test]
    fn entropy_cases() {
        let labels: BTreeMap<ServiceId, String> = [
            ("a", "D1"),
            ("b", "D1"),
            ("c", "D2"),
            ("d", "D2"),
        ]
        .iter()
        .map(|(s, l)| (ServiceId(s.to_string()), l.to_string()))
        .collect();
        // single-label cluster
        assert_eq!(cluster_entropy(&[idset(&["a", "b"])], &labels).unwrap(), 0.0);
        // 50/50 cluster: one bit
        assert!((cluster_entropy(&[idset(&["a", "c"])], &labels).unwrap() - 1.0).abs() < 1e-15);
        // unlabeled member rejected
        assert!(matches!(
            cluster_entropy(&[idset(&["zz"])], &labels),
            Err(Error::UnlabeledService(_))
        ));
    }

    #[test]
    fn mean_curve_is_per_level_average() {
        let a = [1.0; RECALL_LEVELS];
        let mut b = [0.0; RECALL_LEVELS];
        b[0] = 0.5;
        let mean = mean_interpolated(&[a, b]);
        assert!((mean[0] - 0.75).abs() < 1e-15);
        assert!((mean[1] - 0.5).abs() < 1e-15);
    }
}
