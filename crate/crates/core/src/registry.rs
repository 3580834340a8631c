//! Runtime-selectable clustering algorithms.
//!
//! Each online clusterer sits behind a common trait and registers under a
//! stable name; the CLI and the benchmark harness look algorithms up at
//! runtime instead of hard-wiring one. The taxonomical engine and the
//! distance-threshold baseline both produce a flat clustering view so the
//! two can be compared on the same batches.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use crate::baseline::baseline_cluster;
use crate::cluster::converge;
use crate::ontology::DomainSpace;
use crate::service::{Feature, ServiceDescription, ServiceId};
use crate::Result;

/// Parameters shared by every algorithm. The threshold only matters to
/// distance-based members; the feature only to stratified ones.
#[derive(Debug, Clone, Copy)]
pub struct ClusterParams {
    pub feature: Feature,
    pub threshold: f64,
}

impl Default for ClusterParams {
    fn default() -> Self {
        ClusterParams {
            feature: Feature::Output,
            threshold: 0.3,
        }
    }
}

/// Flat clustering produced by one run. Clusters may overlap for
/// algorithms that do not force disjoint partitions.
#[derive(Debug, Clone)]
pub struct FlatClustering {
    pub algorithm: &'static str,
    pub clusters: Vec<BTreeSet<ServiceId>>,
    pub comparisons: u64,
    pub wall: Duration,
}

/// An online clustering strategy selectable by name.
pub trait OnlineClusterer: Send + Sync {
    fn name(&self) -> &'static str;
    fn describe(&self) -> &'static str;
    fn cluster(
        &self,
        order: &[&ServiceDescription],
        space: &DomainSpace,
        params: &ClusterParams,
    ) -> Result<FlatClustering>;
}

/// Threshold-free taxonomical clustering; clusters are the taxonomies of
/// the requested feature's space and may overlap.
pub struct StcClusterer;

impl OnlineClusterer for StcClusterer {
    fn name(&self) -> &'static str {
        "stc"
    }

    fn describe(&self) -> &'static str {
        "taxonomical clustering over one feature's subsumption order; no distance threshold"
    }

    fn cluster(
        &self,
        order: &[&ServiceDescription],
        space: &DomainSpace,
        params: &ClusterParams,
    ) -> Result<FlatClustering> {
        let start = Instant::now();
        let (cs, _) = converge(order.iter().copied(), params.feature, space.stamp())?;
        let wall = start.elapsed();
        Ok(FlatClustering {
            algorithm: self.name(),
            clusters: cs.taxonomies().into_iter().map(|(_, m)| m).collect(),
            comparisons: cs.comparisons(),
            wall,
        })
    }
}

/// Integrated-distance nearest-neighbor baseline with a threshold.
pub struct NearestNeighborBaseline;

impl OnlineClusterer for NearestNeighborBaseline {
    fn name(&self) -> &'static str {
        "nn-baseline"
    }

    fn describe(&self) -> &'static str {
        "non-stratified nearest-neighbor clustering over an integrated I/O distance with a threshold"
    }

    fn cluster(
        &self,
        order: &[&ServiceDescription],
        space: &DomainSpace,
        params: &ClusterParams,
    ) -> Result<FlatClustering> {
        let start = Instant::now();
        let outcome = baseline_cluster(order, space, params.threshold);
        let wall = start.elapsed();
        Ok(FlatClustering {
            algorithm: self.name(),
            clusters: outcome.clusters,
            comparisons: outcome.comparisons,
            wall,
        })
    }
}

/// Every registered algorithm, in registry order.
pub fn all() -> Vec<Box<dyn OnlineClusterer>> {
    vec![Box::new(StcClusterer), Box::new(NearestNeighborBaseline)]
}

/// Looks an algorithm up by its registered name.
pub fn lookup(name: &str) -> Option<Box<dyn OnlineClusterer>> {
    all().into_iter().find(|c| c.name() == name)
}

pub fn names() -> Vec<&'static str> {
    all().iter().map(|c| c.name()).collect()
}
