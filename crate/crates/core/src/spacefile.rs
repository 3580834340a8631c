//! On-disk snapshot format for cluster spaces, plus DOT export.
//!
//! A space file holds the domain-space stamp and one record per contained
//! feature space; each node line carries its services, hex g-code, and
//! edge lists. Reloading validates the full structural invariant set.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::bitcode::BitCode;
use crate::cluster::{ClusterSpace, NodeId, NodeKind, TaxonomyNode};
use crate::ontology::SpaceStamp;
use crate::service::{Feature, ServiceId};
use crate::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpaceFile {
    pub stamp: SpaceStamp,
    pub spaces: Vec<SpaceRecord>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpaceRecord {
    pub feature: Feature,
    pub comparisons: u64,
    pub nodes: Vec<NodeRecord>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NodeRecord {
    pub id: u64,
    pub kind: String,
    pub services: Vec<String>,
    pub gcode_hex: String,
    pub parents: Vec<u64>,
    pub children: Vec<u64>,
}

impl SpaceFile {
    pub fn from_spaces(stamp: SpaceStamp, spaces: &[&ClusterSpace]) -> SpaceFile {
        SpaceFile {
            stamp,
            spaces: spaces.iter().map(|s| space_record(s)).collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("space file serialization")
    }

    pub fn from_json(text: &str) -> Result<SpaceFile> {
        Ok(serde_json::from_str(text)?)
    }

    /// Rebuilds every contained space, re-checking structural invariants.
    pub fn load_spaces(&self) -> Result<Vec<ClusterSpace>> {
        let width = self.stamp.total_width();
        self.spaces
            .iter()
            .map(|rec| {
                let nodes: Result<Vec<TaxonomyNode>> = rec
                    .nodes
                    .iter()
                    .map(|n| {
                        let kind = match n.kind.as_str() {
                            "concrete" => NodeKind::Concrete,
                            "abstract" => NodeKind::Abstract,
                            other => {
                                return Err(Error::Malformed(format!("unknown node kind `{other}`")))
                            }
                        };
                        Ok(TaxonomyNode {
                            id: NodeId(n.id),
                            kind,
                            services: n.services.iter().cloned().map(ServiceId).collect(),
                            gcode: BitCode::from_hex(&n.gcode_hex, width)?,
                            parents: n.parents.iter().copied().map(NodeId).collect(),
                            children: n.children.iter().copied().map(NodeId).collect(),
                        })
                    })
                    .collect();
                ClusterSpace::from_parts(rec.feature, self.stamp.clone(), nodes?, rec.comparisons)
            })
            .collect()
    }

    pub fn space_for(&self, feature: Feature) -> Option<&SpaceRecord> {
        self.spaces.iter().find(|s| s.feature == feature)
    }
}

fn space_record(space: &ClusterSpace) -> SpaceRecord {
    SpaceRecord {
        feature: space.feature(),
        comparisons: space.comparisons(),
        nodes: space
            .nodes()
            .map(|n| NodeRecord {
                id: n.id.0,
                kind: n.kind.label().to_string(),
                services: n.services.iter().map(|s| s.0.clone()).collect(),
                gcode_hex: n.gcode.to_hex(),
                parents: n.parents.iter().map(|p| p.0).collect(),
                children: n.children.iter().map(|c| c.0).collect(),
            })
            .collect(),
    }
}

/// Renders every contained space as one DOT digraph; abstract nodes are
/// drawn dashed, concrete node labels list their services.
pub fn to_dot(file: &SpaceFile) -> String {
    let mut out = String::from("digraph cluster_spaces {\n  rankdir=TB;\n  node [shape=box];\n");
    for rec in &file.spaces {
        let f = rec.feature.label();
        out.push_str(&format!("  subgraph cluster_{f} {{\n    label=\"{f}-cluster space\";\n"));
        for n in &rec.nodes {
            let label = if n.services.is_empty() {
                format!("{} ({})", n.gcode_hex, n.kind)
            } else {
                format!("{}\\n{}", n.gcode_hex, n.services.join(", "))
            };
            let style = if n.kind == "abstract" { ", style=dashed" } else { "" };
            out.push_str(&format!("    {f}_{} [label=\"{label}\"{style}];\n", n.id));
        }
        for n in &rec.nodes {
            for c in &n.children {
                out.push_str(&format!("    {f}_{} -> {f}_{c};\n", n.id));
            }
        }
        out.push_str("  }\n");
    }
    out.push_str("}\n");
    out
}

/// Flat clustering export used by non-taxonomical algorithms.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FlatClusterFile {
    pub algorithm: String,
    pub threshold: Option<f64>,
    pub clusters: Vec<Vec<String>>,
}

impl FlatClusterFile {
    pub fn new(algorithm: &str, threshold: Option<f64>, clusters: &[BTreeSet<ServiceId>]) -> Self {
        FlatClusterFile {
            algorithm: algorithm.to_string(),
            threshold,
            clusters: clusters
                .iter()
                .map(|c| c.iter().map(|s| s.0.clone()).collect())
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("cluster file serialization")
    }
}
