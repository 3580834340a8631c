//! Feature-stratified service descriptions and their g-codes.
//!
//! A service description is split into two concept sets — the types of its
//! input parameters (I-array) and of its output parameters (O-array) — and
//! each set is collapsed into a single g-code by OR-folding the members'
//! composite codes. All downstream matchmaking and clustering happens on
//! these per-feature g-codes; the two features are never mixed into one
//! score.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::bitcode::BitCode;
use crate::ontology::{DomainSpace, GlobalConcept, SpaceStamp};
use crate::{Error, Result};

/// The two functional features carried through the pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Feature {
    #[serde(rename = "I")]
    Input,
    #[serde(rename = "O")]
    Output,
}

impl Feature {
    pub fn label(self) -> &'static str {
        match self {
            Feature::Input => "I",
            Feature::Output => "O",
        }
    }

    pub fn parse(s: &str) -> Result<Feature> {
        match s {
            "I" | "i" | "input" => Ok(Feature::Input),
            "O" | "o" | "output" => Ok(Feature::Output),
            other => Err(Error::InvalidConfig(format!("unknown feature `{other}`"))),
        }
    }
}

impl fmt::Display for Feature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Stable identifier of a service description.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ServiceId(pub String);

impl fmt::Display for ServiceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for ServiceId {
    fn from(s: &str) -> Self {
        ServiceId(s.to_string())
    }
}

/// OR-fold of the composite codes of one feature's concept set, stamped
/// with the domain-space snapshot it was computed under.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GCode {
    pub feature: Feature,
    pub code: BitCode,
    pub stamp: SpaceStamp,
}

/// Flattened import format for one service description. Pre-condition and
/// result sub-descriptions may appear in input files but take no part in
/// matchmaking.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ServiceDocument {
    pub id: String,
    #[serde(default)]
    pub name: String,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preconditions: Option<serde_json::Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub results: Option<serde_json::Value>,
}

impl ServiceDocument {
    pub fn batch_from_json(text: &str) -> Result<Vec<ServiceDocument>> {
        Ok(serde_json::from_str(text)?)
    }
}

/// A validated, immutable service description with computed g-codes.
#[derive(Debug, Clone)]
pub struct ServiceDescription {
    pub id: ServiceId,
    pub name: String,
    pub i_array: Vec<GlobalConcept>,
    pub o_array: Vec<GlobalConcept>,
    pub domain_label: Option<String>,
    pub i_code: GCode,
    pub o_code: GCode,
}

impl ServiceDescription {
    pub fn gcode(&self, feature: Feature) -> &GCode {
        match feature {
            Feature::Input => &self.i_code,
            Feature::Output => &self.o_code,
        }
    }

    pub fn g_array(&self, feature: Feature) -> &[GlobalConcept] {
        match feature {
            Feature::Input => &self.i_array,
            Feature::Output => &self.o_array,
        }
    }

    /// Round-trips the description back to the import format.
    pub fn to_document(&self, space: &DomainSpace) -> ServiceDocument {
        ServiceDocument {
            id: self.id.0.clone(),
            name: self.name.clone(),
            inputs: self.i_array.iter().map(|&c| space.concept_name(c).to_string()).collect(),
            outputs: self.o_array.iter().map(|&c| space.concept_name(c).to_string()).collect(),
            domain: self.domain_label.clone(),
            preconditions: None,
            results: None,
        }
    }
}

/// Splits a raw description into its I/O concept sets. Pre-condition or
/// result material is ignored and reported back as a warning. Duplicate
/// concept mentions collapse: g-arrays are sets and the OR-fold makes
/// repeats irrelevant.
pub fn feature_stratify(
    doc: &ServiceDocument,
    space: &DomainSpace,
) -> Result<(Vec<GlobalConcept>, Vec<GlobalConcept>, Vec<String>)> {
    let mut warnings = Vec::new();
    if doc.preconditions.is_some() {
        warnings.push(format!("service `{}`: pre-condition sub-description ignored", doc.id));
    }
    if doc.results.is_some() {
        warnings.push(format!("service `{}`: result sub-description ignored", doc.id));
    }
    let mut missing = Vec::new();
    let mut resolve_set = |names: &[String]| -> Vec<GlobalConcept> {
        let mut out: Vec<GlobalConcept> = names
            .iter()
            .filter_map(|n| match space.resolve(n) {
                Some(gc) => Some(gc),
                None => {
                    missing.push(n.clone());
                    None
                }
            })
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    };
    let i_array = resolve_set(&doc.inputs);
    let o_array = resolve_set(&doc.outputs);
    if !missing.is_empty() {
        missing.sort();
        missing.dedup();
        return Err(Error::UnresolvableConcepts(doc.id.clone(), missing.join(", ")));
    }
    Ok((i_array, o_array, warnings))
}

/// OR-folds the composite codes of a g-array.
pub fn compute_gcode(g_array: &[GlobalConcept], feature: Feature, space: &DomainSpace) -> Result<GCode> {
    if g_array.is_empty() {
        return Err(Error::EmptyGCode);
    }
    let mut code = BitCode::zeros(space.total_width());
    for &gc in g_array {
        code.or_assign(&space.composite_code(gc));
    }
    Ok(GCode {
        feature,
        code,
        stamp: space.stamp(),
    })
}

/// Checks the input/output distinctness invariant: no output concept may be
/// semantically equivalent to an input concept, where equivalence means
/// code equality (identical concepts included).
pub fn validate_service(
    id: &ServiceId,
    i_array: &[GlobalConcept],
    o_array: &[GlobalConcept],
    space: &DomainSpace,
) -> Result<()> {
    if i_array.is_empty() {
        return Err(Error::EmptyFeature(id.0.clone(), "input"));
    }
    if o_array.is_empty() {
        return Err(Error::EmptyFeature(id.0.clone(), "output"));
    }
    for &o in o_array {
        let oc = space.composite_code(o);
        for &i in i_array {
            if oc == space.composite_code(i) {
                return Err(Error::InputOutputOverlap(
                    id.0.clone(),
                    space.concept_name(o).to_string(),
                    space.concept_name(i).to_string(),
                ));
            }
        }
    }
    Ok(())
}

/// Stratifies, validates, and codes one raw description.
pub fn admit_service(
    doc: &ServiceDocument,
    space: &DomainSpace,
) -> Result<(ServiceDescription, Vec<String>)> {
    let (i_array, o_array, warnings) = feature_stratify(doc, space)?;
    let id = ServiceId(doc.id.clone());
    validate_service(&id, &i_array, &o_array, space)?;
    let i_code = compute_gcode(&i_array, Feature::Input, space)?;
    let o_code = compute_gcode(&o_array, Feature::Output, space)?;
    Ok((
        ServiceDescription {
            id,
            name: doc.name.clone(),
            i_array,
            o_array,
            domain_label: doc.domain.clone(),
            i_code,
            o_code,
        },
        warnings,
    ))
}

/// An ordered registry of admitted services, keyed by id.
#[derive(Debug, Clone, Default)]
pub struct ServiceRegistry {
    services: BTreeMap<ServiceId, ServiceDescription>,
}

impl ServiceRegistry {
    pub fn new() -> Self {
        ServiceRegistry::default()
    }

    pub fn admit(&mut self, doc: &ServiceDocument, space: &DomainSpace) -> Result<Vec<String>> {
        let (svc, warnings) = admit_service(doc, space)?;
        if self.services.contains_key(&svc.id) {
            return Err(Error::DuplicateService(svc.id.0.clone()));
        }
        self.services.insert(svc.id.clone(), svc);
        Ok(warnings)
    }

    pub fn admit_batch(&mut self, docs: &[ServiceDocument], space: &DomainSpace) -> Result<Vec<String>> {
        let mut warnings = Vec::new();
        for doc in docs {
            warnings.extend(self.admit(doc, space)?);
        }
        Ok(warnings)
    }

    pub fn get(&self, id: &ServiceId) -> Option<&ServiceDescription> {
        self.services.get(id)
    }

    pub fn iter(&self) -> impl Iterator<Item = &ServiceDescription> {
        self.services.values()
    }

    pub fn ids(&self) -> impl Iterator<Item = &ServiceId> {
        self.services.keys()
    }

    pub fn len(&self) -> usize {
        self.services.len()
    }

    pub fn is_empty(&self) -> bool {
        self.services.is_empty()
    }
}
