//! Shared helpers for the integration suites: independent oracles that
//! deliberately avoid the engine's own code paths.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use stc_core::bitcode::BitCode;
use stc_core::cluster::{ClusterSpace, NodeId};
use stc_core::matchmaker::{relate, MatchStrength};
use stc_core::ontology::OntologyDocument;
use stc_core::service::{ServiceDescription, ServiceRegistry};
use stc_core::synth::{gen_domain_space, gen_services, GenConfig};
use stc_core::DomainSpace;

/// Reflexive-transitive ancestor closure computed straight from the raw
/// document, never touching the bit encoder. Index 0 is `⊤`, index n+1 is
/// `⊥`, declared concepts are 1..=n in document order.
pub struct ReachOracle {
    pub names: Vec<String>,
    index: BTreeMap<String, usize>,
    /// ancestors[i] includes i itself.
    ancestors: Vec<BTreeSet<usize>>,
}

impl ReachOracle {
    pub fn from_document(doc: &OntologyDocument) -> ReachOracle {
        let n = doc.concepts.len();
        let top = 0usize;
        let bottom = n + 1;
        let mut names = vec!["⊤".to_string()];
        names.extend(doc.concepts.iter().map(|c| c.name.clone()));
        names.push("⊥".to_string());
        let index: BTreeMap<String, usize> =
            names.iter().enumerate().map(|(i, n)| (n.clone(), i)).collect();

        let mut parents: Vec<Vec<usize>> = vec![Vec::new(); n + 2];
        for (i, decl) in doc.concepts.iter().enumerate() {
            let me = i + 1;
            if decl.parents.is_empty() {
                parents[me].push(top);
            } else {
                for p in &decl.parents {
                    parents[me].push(index[p]);
                }
            }
        }
        // ⊥ descends from every declared leaf (or ⊤ when none declared)
        let mut has_child = vec![false; n + 2];
        for ps in parents.iter() {
            for &p in ps {
                has_child[p] = true;
            }
        }
        let leaves: Vec<usize> = (0..=n).filter(|&i| !has_child[i] || (i == top && n == 0)).collect();
        for leaf in leaves {
            parents[bottom].push(leaf);
        }

        // memoized DFS up the parent edges
        let mut ancestors: Vec<Option<BTreeSet<usize>>> = vec![None; n + 2];
        fn walk(i: usize, parents: &[Vec<usize>], memo: &mut Vec<Option<BTreeSet<usize>>>) -> BTreeSet<usize> {
            if let Some(a) = &memo[i] {
                return a.clone();
            }
            let mut out = BTreeSet::from([i]);
            for &p in &parents[i] {
                out.extend(walk(p, parents, memo));
            }
            memo[i] = Some(out.clone());
            out
        }
        let closed: Vec<BTreeSet<usize>> = (0..n + 2).map(|i| walk(i, &parents, &mut ancestors)).collect();
        ReachOracle {
            names,
            index,
            ancestors: closed,
        }
    }

    /// True when `cy` subsumes `cx` under the raw-document semantics.
    pub fn subsumed_by(&self, cx: &str, cy: &str) -> bool {
        let (x, y) = (self.index[cx], self.index[cy]);
        let bottom = self.names.len() - 1;
        if x == bottom {
            return true;
        }
        if y == bottom {
            return x == bottom;
        }
        self.ancestors[x].contains(&y)
    }
}

/// Brute-force Def-6 set: minimal strict dominators over every node.
pub fn brute_msp(space: &ClusterSpace, code: &BitCode) -> BTreeSet<NodeId> {
    let dominators: Vec<NodeId> = space
        .nodes()
        .filter(|n| relate(code, &n.gcode).strength == MatchStrength::PlugIn)
        .map(|n| n.id)
        .collect();
    dominators
        .iter()
        .copied()
        .filter(|&p| {
            !dominators.iter().any(|&q| {
                q != p
                    && relate(&space.node(q).unwrap().gcode, &space.node(p).unwrap().gcode).strength
                        == MatchStrength::PlugIn
            })
        })
        .collect()
}

/// Brute-force Def-7 set: maximal strictly dominated nodes over every node.
pub fn brute_lsc(space: &ClusterSpace, code: &BitCode) -> BTreeSet<NodeId> {
    let dominated: Vec<NodeId> = space
        .nodes()
        .filter(|n| relate(code, &n.gcode).strength == MatchStrength::Subsume)
        .map(|n| n.id)
        .collect();
    dominated
        .iter()
        .copied()
        .filter(|&m| {
            !dominated.iter().any(|&q| {
                q != m
                    && relate(&space.node(m).unwrap().gcode, &space.node(q).unwrap().gcode).strength
                        == MatchStrength::PlugIn
            })
        })
        .collect()
}

/// Generates a seeded synthetic domain space plus admitted services.
pub fn synthetic_workload(cfg: &GenConfig) -> (DomainSpace, ServiceRegistry) {
    let docs = gen_domain_space(cfg).expect("domain generation");
    let space = DomainSpace::from_documents(&docs).expect("domain space loads");
    let service_docs = gen_services(cfg, &space).expect("service generation");
    let mut registry = ServiceRegistry::new();
    registry.admit_batch(&service_docs, &space).expect("services admit");
    (space, registry)
}

pub fn services_vec(registry: &ServiceRegistry) -> Vec<&ServiceDescription> {
    registry.iter().collect()
}

/// Path of a repository fixture file.
pub fn fixture(rel: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(rel)
}
