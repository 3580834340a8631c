//! Evaluation reports: per-cluster domain accuracy, per-query retrieval
//! accuracy, curves, and CSV emission.
//!
//! All CSV output is UTF-8 with LF line endings, a header row, and `.` as
//! the decimal separator, so reports diff bit-exactly across runs.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::path::Path;

use crate::cluster::ClusterSpace;
use crate::discovery::{discover, DiscoveryOptions, Query};
use crate::metrics::{
    averaged_domain_precision, averaged_domain_recall, cluster_entropy, domain_precision,
    domain_recall, f_measure, interpolated_curve, mean_interpolated, precision_at, recall_at,
    RECALL_LEVELS,
};
use crate::ontology::DomainSpace;
use crate::service::{Feature, ServiceId, ServiceRegistry};
use crate::Result;

/// Domain accuracy of one cluster (taxonomy) against one labeled domain.
#[derive(Debug, Clone)]
pub struct DomainAccuracyRow {
    pub feature: Feature,
    pub cluster_root: String,
    pub cluster_size: usize,
    pub domain: String,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
}

/// Averaged accuracy of one cluster over all domains.
#[derive(Debug, Clone)]
pub struct ClusterSummaryRow {
    pub feature: Feature,
    pub cluster_root: String,
    pub cluster_size: usize,
    pub avg_precision: Option<f64>,
    pub avg_recall: Option<f64>,
}

/// Per-rank precision/recall point of one query's ranked retrieval.
#[derive(Debug, Clone)]
pub struct RankRow {
    pub query: String,
    pub rank: usize,
    pub service: ServiceId,
    pub relevant: bool,
    pub precision: f64,
    pub recall: f64,
}

/// Per-query summary.
#[derive(Debug, Clone)]
pub struct QueryRow {
    pub query: String,
    pub retrieved: usize,
    pub pruned: usize,
    pub relevant: usize,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f_measure: Option<f64>,
    /// Queries with an empty relevant set are excluded from means.
    pub excluded: bool,
}

/// Full evaluation outcome.
#[derive(Debug, Clone)]
pub struct EvalReport {
    pub domain_rows: Vec<DomainAccuracyRow>,
    pub cluster_rows: Vec<ClusterSummaryRow>,
    pub query_rows: Vec<QueryRow>,
    pub rank_rows: Vec<RankRow>,
    pub curves: Vec<(String, [f64; RECALL_LEVELS])>,
    pub mean_curve: [f64; RECALL_LEVELS],
    /// Mean of the mean curve over the 11 levels.
    pub mean_interpolated_precision: f64,
    pub mean_f_measure: f64,
    pub entropy: Option<f64>,
    pub comparisons_i: u64,
    pub comparisons_o: u64,
    pub excluded_queries: Vec<String>,
}

/// Everything the evaluation pipeline consumes.
pub struct EvalInputs<'a> {
    pub space: &'a DomainSpace,
    pub registry: &'a ServiceRegistry,
    pub i_space: &'a ClusterSpace,
    pub o_space: &'a ClusterSpace,
    pub queries: &'a [Query],
    pub relevance: &'a BTreeMap<String, BTreeSet<ServiceId>>,
    pub options: DiscoveryOptions,
}

/// Runs discovery for every query and assembles the metric suite.
pub fn evaluate(inputs: &EvalInputs<'_>) -> Result<EvalReport> {
    let domains = domain_sets(inputs.registry);
    let mut domain_rows = Vec::new();
    let mut cluster_rows = Vec::new();
    for space in [inputs.o_space, inputs.i_space] {
        for (root, members) in space.taxonomies() {
            let root_label = format!("{}:{root}", space.feature().label());
            for (domain, domain_set) in &domains {
                domain_rows.push(DomainAccuracyRow {
                    feature: space.feature(),
                    cluster_root: root_label.clone(),
                    cluster_size: members.len(),
                    domain: domain.clone(),
                    precision: domain_precision(&members, domain_set),
                    recall: domain_recall(&members, domain_set),
                });
            }
            cluster_rows.push(ClusterSummaryRow {
                feature: space.feature(),
                cluster_root: root_label,
                cluster_size: members.len(),
                avg_precision: averaged_domain_precision(&members, &domains),
                avg_recall: averaged_domain_recall(&members, &domains),
            });
        }
    }

    let mut query_rows = Vec::new();
    let mut rank_rows = Vec::new();
    let mut curves = Vec::new();
    let mut f_values = Vec::new();
    let mut excluded_queries = Vec::new();
    let empty = BTreeSet::new();
    for query in inputs.queries {
        let result = discover(query, inputs.o_space, inputs.registry, inputs.space, inputs.options)?;
        let retrieved = result.retrieved_ids();
        let relevant = inputs.relevance.get(&query.id).unwrap_or(&empty);
        let excluded = relevant.is_empty();
        if excluded {
            excluded_queries.push(query.id.clone());
        } else {
            curves.push((query.id.clone(), interpolated_curve(&retrieved, relevant)));
        }
        for r in 1..=retrieved.len() {
            rank_rows.push(RankRow {
                query: query.id.clone(),
                rank: r,
                service: retrieved[r - 1].clone(),
                relevant: relevant.contains(&retrieved[r - 1]),
                precision: precision_at(&retrieved, relevant, r)?,
                recall: recall_at(&retrieved, relevant, r)?,
            });
        }
        let (precision, recall) = if retrieved.is_empty() {
            (None, if excluded { None } else { Some(0.0) })
        } else {
            (
                Some(precision_at(&retrieved, relevant, retrieved.len())?),
                if excluded {
                    None
                } else {
                    Some(recall_at(&retrieved, relevant, retrieved.len())?)
                },
            )
        };
        let f = match (precision, recall) {
            (Some(p), Some(r)) => Some(f_measure(p, r)),
            _ => None,
        };
        if let Some(f) = f {
            if !excluded {
                f_values.push(f);
            }
        }
        query_rows.push(QueryRow {
            query: query.id.clone(),
            retrieved: retrieved.len(),
            pruned: result.pruned.len(),
            relevant: relevant.len(),
            precision,
            recall,
            f_measure: f,
            excluded,
        });
    }

    let per_query: Vec<[f64; RECALL_LEVELS]> = curves.iter().map(|(_, c)| *c).collect();
    let mean_curve = mean_interpolated(&per_query);
    let mean_interpolated_precision = mean_curve.iter().sum::<f64>() / RECALL_LEVELS as f64;
    let mean_f_measure = if f_values.is_empty() {
        0.0
    } else {
        f_values.iter().sum::<f64>() / f_values.len() as f64
    };
    let entropy = if inputs.registry.iter().all(|s| s.domain_label.is_some()) && !inputs.registry.is_empty() {
        let labels: BTreeMap<ServiceId, String> = inputs
            .registry
            .iter()
            .map(|s| (s.id.clone(), s.domain_label.clone().unwrap()))
            .collect();
        let clusters: Vec<BTreeSet<ServiceId>> = inputs
            .o_space
            .taxonomies()
            .into_iter()
            .map(|(_, m)| m)
            .collect();
        Some(cluster_entropy(&clusters, &labels)?)
    } else {
        None
    };

    Ok(EvalReport {
        domain_rows,
        cluster_rows,
        query_rows,
        rank_rows,
        curves,
        mean_curve,
        mean_interpolated_precision,
        mean_f_measure,
        entropy,
        comparisons_i: inputs.i_space.comparisons(),
        comparisons_o: inputs.o_space.comparisons(),
        excluded_queries,
    })
}

fn domain_sets(registry: &ServiceRegistry) -> BTreeMap<String, BTreeSet<ServiceId>> {
    let mut out: BTreeMap<String, BTreeSet<ServiceId>> = BTreeMap::new();
    for svc in registry.iter() {
        if let Some(label) = &svc.domain_label {
            out.entry(label.clone()).or_default().insert(svc.id.clone());
        }
    }
    out
}

/// Quotes a CSV field when it contains a delimiter, quote, or newline.
pub fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl EvalReport {
    /// Main report: one row per query plus trailing aggregate rows.
    pub fn write_summary_csv(&self, path: &Path) -> Result<()> {
        let mut f = std::fs::File::create(path)?;
        writeln!(f, "query,retrieved,pruned,relevant,precision,recall,f_measure,excluded")?;
        for row in &self.query_rows {
            writeln!(
                f,
                "{},{},{},{},{},{},{},{}",
                csv_field(&row.query),
                row.retrieved,
                row.pruned,
                row.relevant,
                opt(row.precision),
                opt(row.recall),
                opt(row.f_measure),
                row.excluded
            )?;
        }
        writeln!(f, "__mean_interpolated_precision__,,,,{},,,", self.mean_interpolated_precision)?;
        writeln!(f, "__mean_f_measure__,,,,,,{},", self.mean_f_measure)?;
        if let Some(e) = self.entropy {
            writeln!(f, "__entropy__,,,,{e},,,")?;
        }
        writeln!(f, "__comparisons__,{},{},,,,,", self.comparisons_i, self.comparisons_o)?;
        Ok(())
    }

    /// Figure-ready CSVs next to `stem`: the mean interpolated curve,
    /// per-cluster domain accuracy, and per-rank precision/recall points.
    pub fn write_plotdata(&self, stem: &Path) -> Result<Vec<std::path::PathBuf>> {
        let mut written = Vec::new();
        let with_suffix = |suffix: &str| {
            let mut name = stem.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "report".into());
            name.push_str(suffix);
            stem.with_file_name(name)
        };

        let p = with_suffix("_interpolated.csv");
        let mut f = std::fs::File::create(&p)?;
        writeln!(f, "recall_level,mean_interpolated_precision")?;
        for (i, v) in self.mean_curve.iter().enumerate() {
            writeln!(f, "{},{v}", i as f64 / 10.0)?;
        }
        written.push(p);

        let p = with_suffix("_curves.csv");
        let mut f = std::fs::File::create(&p)?;
        writeln!(f, "query,recall_level,interpolated_precision")?;
        for (q, curve) in &self.curves {
            for (i, v) in curve.iter().enumerate() {
                writeln!(f, "{},{},{v}", csv_field(q), i as f64 / 10.0)?;
            }
        }
        written.push(p);

        let p = with_suffix("_domain_accuracy.csv");
        let mut f = std::fs::File::create(&p)?;
        writeln!(f, "feature,cluster_root,cluster_size,avg_precision,avg_recall")?;
        for row in &self.cluster_rows {
            writeln!(
                f,
                "{},{},{},{},{}",
                row.feature.label(),
                csv_field(&row.cluster_root),
                row.cluster_size,
                opt(row.avg_precision),
                opt(row.avg_recall)
            )?;
        }
        written.push(p);

        let p = with_suffix("_domain_detail.csv");
        let mut f = std::fs::File::create(&p)?;
        writeln!(f, "feature,cluster_root,cluster_size,domain,precision,recall")?;
        for row in &self.domain_rows {
            writeln!(
                f,
                "{},{},{},{},{},{}",
                row.feature.label(),
                csv_field(&row.cluster_root),
                row.cluster_size,
                csv_field(&row.domain),
                opt(row.precision),
                opt(row.recall)
            )?;
        }
        written.push(p);

        let p = with_suffix("_ranks.csv");
        let mut f = std::fs::File::create(&p)?;
        writeln!(f, "query,rank,service,relevant,precision,recall")?;
        for row in &self.rank_rows {
            writeln!(
                f,
                "{},{},{},{},{},{}",
                csv_field(&row.query),
                row.rank,
                csv_field(&row.service.0),
                row.relevant,
                row.precision,
                row.recall
            )?;
        }
        written.push(p);
        Ok(written)
    }
}

/// Parses a relevance-judgment document: an object mapping query ids to
/// arrays of relevant service ids.
pub fn relevance_from_json(text: &str) -> Result<BTreeMap<String, BTreeSet<ServiceId>>> {
    let raw: BTreeMap<String, Vec<String>> = serde_json::from_str(text)?;
    Ok(raw
        .into_iter()
        .map(|(q, ids)| (q, ids.into_iter().map(ServiceId).collect()))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_escaping() {
        assert_eq!(csv_field("plain"), "plain");
        assert_eq!(csv_field("a,b"), "\"a,b\"");
        assert_eq!(csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
    }

    #[test]
    fn relevance_parsing() {
        let rel = relevance_from_json(r#"{"q1": ["a", "b"], "q2": []}"#).unwrap();
        assert_eq!(rel["q1"].len(), 2);
        assert!(rel["q2"].is_empty());
    }
}
