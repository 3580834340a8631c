//! Distance-threshold nearest-neighbor baseline.
//!
//! A non-stratified online clusterer for contrast: each arriving service is
//! compared against every service seen so far under an integrated distance
//! (equal-weight average over the I and O features of a greedy bipartite
//! pairing of normalized taxonomic concept distances). The service joins
//! its nearest neighbor's cluster unless the distance exceeds the
//! threshold, in which case it starts a new cluster. This exhibits both
//! classic failure modes the taxonomical engine avoids: the partition
//! depends on arrival order, and the cluster count hinges on the threshold.

use std::collections::{BTreeSet, HashMap, VecDeque};

use crate::ontology::{ConceptId, DomainSpace, GlobalConcept};
use crate::service::{ServiceDescription, ServiceId};

/// Flat partition produced by one baseline run.
#[derive(Debug, Clone)]
pub struct BaselineOutcome {
    pub clusters: Vec<BTreeSet<ServiceId>>,
    /// Pairwise service comparisons spent.
    pub comparisons: u64,
}

impl BaselineOutcome {
    /// Canonical partition rendering for order-sensitivity checks.
    pub fn canonical(&self) -> Vec<Vec<String>> {
        let mut out: Vec<Vec<String>> = self
            .clusters
            .iter()
            .map(|c| c.iter().map(|s| s.0.clone()).collect())
            .collect();
        out.sort();
        out
    }
}

/// Caches single-source BFS distances over each ontology's undirected
/// lattice graph, plus the normalization height.
pub struct TaxonomicDistance<'a> {
    space: &'a DomainSpace,
    bfs: HashMap<GlobalConcept, HashMap<ConceptId, usize>>,
    height: usize,
}

impl<'a> TaxonomicDistance<'a> {
    pub fn new(space: &'a DomainSpace) -> Self {
        let height = space
            .ontologies()
            .iter()
            .map(ontology_height)
            .max()
            .unwrap_or(1);
        TaxonomicDistance {
            space,
            bfs: HashMap::new(),
            height,
        }
    }

    /// Normalized distance in [0, 1]: shortest undirected path over the
    /// concept lattice scaled by twice the tallest ontology; concepts of
    /// different ontologies are maximally distant.
    pub fn concept_distance(&mut self, a: GlobalConcept, b: GlobalConcept) -> f64 {
        if a == b {
            return 0.0;
        }
        if a.ontology != b.ontology {
            return 1.0;
        }
        let space = self.space;
        let dists = self.bfs.entry(a).or_insert_with(|| bfs_from(space, a));
        match dists.get(&b.concept) {
            Some(&d) => (d as f64 / (2.0 * self.height as f64)).min(1.0),
            None => 1.0,
        }
    }

    /// Greedy minimal bipartite pairing over two concept sets; unmatched
    /// members of the longer side count as maximally distant.
    pub fn set_distance(&mut self, left: &[GlobalConcept], right: &[GlobalConcept]) -> f64 {
        if left.is_empty() && right.is_empty() {
            return 0.0;
        }
        if left.is_empty() || right.is_empty() {
            return 1.0;
        }
        let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(left.len() * right.len());
        for (i, &l) in left.iter().enumerate() {
            for (j, &r) in right.iter().enumerate() {
                pairs.push((self.concept_distance(l, r), i, j));
            }
        }
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| (a.1, a.2).cmp(&(b.1, b.2))));
        let mut used_l = vec![false; left.len()];
        let mut used_r = vec![false; right.len()];
        let mut total = 0.0;
        let mut matched = 0usize;
        for (d, i, j) in pairs {
            if !used_l[i] && !used_r[j] {
                used_l[i] = true;
                used_r[j] = true;
                total += d;
                matched += 1;
            }
        }
        let longer = left.len().max(right.len());
        (total + (longer - matched) as f64) / longer as f64
    }

    /// Integrated service distance: equal-weight average of the I and O
    /// feature set distances.
    pub fn service_distance(&mut self, a: &ServiceDescription, b: &ServiceDescription) -> f64 {
        let di = self.set_distance(&a.i_array, &b.i_array);
        let do_ = self.set_distance(&a.o_array, &b.o_array);
        (di + do_) / 2.0
    }
}

fn ontology_height(onto: &crate::ontology::BaseOntology) -> usize {
    // longest parent-chain from ⊤, by DP over the DAG
    let mut depth = vec![0usize; onto.concept_count()];
    let mut remaining: Vec<usize> = (0..onto.concept_count()).map(|i| onto.parents(ConceptId(i as u32)).len()).collect();
    remaining[onto.top().0 as usize] = 0;
    let mut queue: VecDeque<ConceptId> = VecDeque::new();
    queue.push_back(onto.top());
    let mut best = 0;
    while let Some(c) = queue.pop_front() {
        best = best.max(depth[c.0 as usize]);
        for &child in onto.children(c) {
            depth[child.0 as usize] = depth[child.0 as usize].max(depth[c.0 as usize] + 1);
            remaining[child.0 as usize] -= 1;
            if remaining[child.0 as usize] == 0 {
                queue.push_back(child);
            }
        }
    }
    best.max(1)
}

fn bfs_from(space: &DomainSpace, from: GlobalConcept) -> HashMap<ConceptId, usize> {
    let onto = space.ontology(from.ontology);
    let mut dist = HashMap::new();
    dist.insert(from.concept, 0usize);
    let mut queue = VecDeque::new();
    queue.push_back(from.concept);
    while let Some(c) = queue.pop_front() {
        let d = dist[&c];
        for &next in onto.parents(c).iter().chain(onto.children(c)) {
            if !dist.contains_key(&next) {
                dist.insert(next, d + 1);
                queue.push_back(next);
            }
        }
    }
    dist
}

/// Online nearest-neighbor clustering with a distance threshold. Services
/// are observed in slice order; cluster membership of the nearest neighbor
/// decides the assignment.
pub fn baseline_cluster(
    order: &[&ServiceDescription],
    space: &DomainSpace,
    threshold: f64,
) -> BaselineOutcome {
    let mut metric = TaxonomicDistance::new(space);
    let mut clusters: Vec<BTreeSet<ServiceId>> = Vec::new();
    let mut assignment: Vec<usize> = Vec::new();
    let mut comparisons = 0u64;
    for (i, svc) in order.iter().enumerate() {
        let mut nearest: Option<(f64, usize)> = None;
        for j in 0..i {
            comparisons += 1;
            let d = metric.service_distance(svc, order[j]);
            let better = match nearest {
                None => true,
                Some((best, _)) => d < best,
            };
            if better {
                nearest = Some((d, j));
            }
        }
        match nearest {
            Some((d, j)) if d <= threshold => {
                let cluster = assignment[j];
                clusters[cluster].insert(svc.id.clone());
                assignment.push(cluster);
            }
            _ => {
                clusters.push(BTreeSet::from([svc.id.clone()]));
                assignment.push(clusters.len() - 1);
            }
        }
    }
    BaselineOutcome { clusters, comparisons }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ontology::{ConceptDecl, OntologyDocument};
    use crate::service::{admit_service, ServiceDocument};

    fn space() -> DomainSpace {
        let docs = vec![
            OntologyDocument {
                name: "vehicle".into(),
                concepts: vec![
                    ConceptDecl { name: "vehicle".into(), parents: vec![] },
                    ConceptDecl { name: "car".into(), parents: vec!["vehicle".into()] },
                    ConceptDecl { name: "SUV".into(), parents: vec!["car".into()] },
                    ConceptDecl { name: "bus".into(), parents: vec!["vehicle".into()] },
                ],
            },
            OntologyDocument {
                name: "location".into(),
                concepts: vec![
                    ConceptDecl { name: "location".into(), parents: vec![] },
                    ConceptDecl { name: "city".into(), parents: vec!["location".into()] },
                ],
            },
        ];
        DomainSpace::from_documents(&docs).unwrap()
    }

    fn svc(space: &DomainSpace, id: &str, inputs: &[&str], outputs: &[&str]) -> ServiceDescription {
        admit_service(
            &ServiceDocument {
                id: id.into(),
                name: id.into(),
                inputs: inputs.iter().map(|s| s.to_string()).collect(),
                outputs: outputs.iter().map(|s| s.to_string()).collect(),
                domain: None,
                preconditions: None,
                results: None,
            },
            space,
        )
        .unwrap()
        .0
    }

    #[test]
    fn distance_is_symmetric_zero_on_self() {
        let space = space();
        let a = svc(&space, "a", &["city"], &["car"]);
        let b = svc(&space, "b", &["location"], &["SUV"]);
        let mut metric = TaxonomicDistance::new(&space);
        assert_eq!(metric.service_distance(&a, &a), 0.0);
        let ab = metric.service_distance(&a, &b);
        let ba = metric.service_distance(&b, &a);
        assert!((ab - ba).abs() < 1e-12);
        assert!(ab > 0.0 && ab <= 1.0);
    }

    #[test]
    fn zero_threshold_gives_singletons_loose_threshold_one_cluster() {
        let space = space();
        let services = vec![
            svc(&space, "a", &["city"], &["car"]),
            svc(&space, "b", &["location"], &["SUV"]),
            svc(&space, "c", &["city"], &["bus"]),
        ];
        let refs: Vec<&ServiceDescription> = services.iter().collect();
        let tight = baseline_cluster(&refs, &space, 0.0);
        assert_eq!(tight.clusters.len(), 3);
        let loose = baseline_cluster(&refs, &space, 1.0);
        assert_eq!(loose.clusters.len(), 1);
        // comparisons: 0 + 1 + 2
        assert_eq!(loose.comparisons, 3);
    }

    #[test]
    fn cluster_count_non_increasing_in_threshold() {
        let space = space();
        let services = vec![
            svc(&space, "a", &["city"], &["car"]),
            svc(&space, "b", &["location"], &["SUV"]),
            svc(&space, "c", &["city"], &["bus"]),
            svc(&space, "d", &["location"], &["vehicle"]),
        ];
        let refs: Vec<&ServiceDescription> = services.iter().collect();
        let mut last = usize::MAX;
        for t in 0..=20 {
            let outcome = baseline_cluster(&refs, &space, t as f64 / 20.0);
            assert!(outcome.clusters.len() <= last);
            last = outcome.clusters.len();
        }
    }
}
