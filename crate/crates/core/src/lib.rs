//! Threshold-free, online service-category learning.
//!
//! The engine bit-encodes domain ontologies so that concept subsumption
//! reduces to a word-parallel OR comparison, classifies pairwise service
//! matches into a five-valued match space, and incrementally organizes
//! service descriptions into overlapping taxonomical cluster spaces (one
//! per feature, Input and Output). On top of that sit a two-phase
//! discovery pipeline, an IR-style evaluation suite, and a benchmark
//! harness with a distance-threshold baseline for contrast.
//!
//! Modules map onto the pipeline stages:
//!
//! * [`bitcode`] / [`ontology`] — concept lattices and their bit codes
//! * [`service`] — feature-stratified service descriptions and g-codes
//! * [`matchmaker`] — the 5-ary match classifier over g-codes
//! * [`cluster`] — online taxonomical cluster spaces (insert/remove)
//! * [`discovery`] / [`metrics`] / [`report`] — query pipeline and accuracy suite
//! * [`synth`] / [`baseline`] / [`bench`] / [`registry`] — synthetic data,
//!   the nearest-neighbor baseline, and the comparison harness
//! * [`spacefile`] — on-disk snapshot format and DOT export
//!
//! Encoded ontologies and validated services are immutable values; cluster
//! spaces follow a single-writer model where readers may traverse any
//! snapshot taken between writes.

pub mod baseline;
pub mod bench;
pub mod bitcode;
pub mod cluster;
pub mod discovery;
pub mod error;
pub mod matchmaker;
pub mod metrics;
pub mod ontology;
pub mod registry;
pub mod report;
pub mod service;
pub mod spacefile;
pub mod synth;

pub use bitcode::BitCode;
pub use cluster::{ClusterSpace, NodeId, NodeKind, PlacementOutcome, PlacementReport, TaxonomyNode};
pub use discovery::{DiscoveryOptions, Query, RetrievalResult, RetrievedService};
pub use error::Error;
pub use matchmaker::{g_subsumption, MatchResult, MatchStrength};
pub use ontology::{BaseOntology, ConceptId, DomainSpace, GlobalConcept, OntologyDocument, SpaceStamp};
pub use service::{Feature, GCode, ServiceDescription, ServiceDocument, ServiceId, ServiceRegistry};

/// Crate-wide result alias.
pub type Result<T, E = Error> = std::result::Result<T, E>;
