//! Error types shared across the engine.

use thiserror::Error;

/// All failure modes surfaced by the library.
///
/// Validation-style variants (bad documents, contract violations) are
/// distinguished from internal errors so the CLI can map them onto its
/// exit-code contract.
#[derive(Debug, Error)]
pub enum Error {
    #[error("concept cycle detected: {0}")]
    ConceptCycle(String),

    #[error("duplicate concept name `{0}`")]
    DuplicateConcept(String),

    #[error("concept name `{0}` is reserved")]
    ReservedConcept(String),

    #[error("unknown parent concept(s): {0}")]
    DanglingParent(String),

    #[error("unknown concept `{0}`")]
    UnknownConcept(String),

    #[error("ontology `{0}`: {1}")]
    OntologyDocument(String, String),

    #[error("service `{0}`: unresolvable concept name(s): {1}")]
    UnresolvableConcepts(String, String),

    #[error("service `{0}`: empty {1} parameter set")]
    EmptyFeature(String, &'static str),

    #[error("service `{0}`: output `{1}` is semantically equivalent to input `{2}`")]
    InputOutputOverlap(String, String, String),

    #[error("duplicate service id `{0}`")]
    DuplicateService(String),

    #[error("unknown service id `{0}`")]
    UnknownService(String),

    #[error("feature mismatch: {0} vs {1}")]
    FeatureMismatch(&'static str, &'static str),

    #[error("stale code: computed under a superseded ontology generation; re-fetch codes")]
    StaleCode,

    #[error("empty concept set has no g-code")]
    EmptyGCode,

    #[error("query `{0}`: desired outputs must be non-empty")]
    EmptyDesiredOutputs(String),

    #[error("rank {0} out of range 1..={1}")]
    RankOutOfRange(usize, usize),

    #[error("service `{0}` has no domain label")]
    UnlabeledService(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("malformed document: {0}")]
    Malformed(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by invalid user input rather than engine bugs.
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::Io(_))
    }
}
