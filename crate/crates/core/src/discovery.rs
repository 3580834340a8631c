//! Two-phase query discovery.
//!
//! Phase 1 ranks every service whose output g-code relates to the query's
//! desired-output code, strongest match first. Phase 2 prunes candidates
//! that cannot actually be invoked: a service is invocable when each of its
//! input concepts is subsumed by (or equal to) some concept in the
//! available pool, which starts as the query's provided inputs and grows
//! with the outputs of every service already known to be invocable —
//! candidate or not, so indirect composition chains count. The fixpoint is
//! order-independent and closes in at most one pass per service.

use std::collections::BTreeSet;

use crate::bitcode::BitCode;
use crate::cluster::ClusterSpace;
use crate::matchmaker::{relate, MatchStrength};
use crate::ontology::{DomainSpace, GlobalConcept};
use crate::service::{compute_gcode, Feature, GCode, ServiceId, ServiceRegistry};
use crate::{Error, Result};

/// A discovery request: desired outputs plus the inputs the caller can
/// supply, with per-feature codes computed against the current space.
#[derive(Debug, Clone)]
pub struct Query {
    pub id: String,
    pub provided_inputs: Vec<GlobalConcept>,
    pub desired_outputs: Vec<GlobalConcept>,
    pub i_code: Option<GCode>,
    pub o_code: GCode,
}

/// Flattened query document.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct QueryDocument {
    pub id: String,
    #[serde(default)]
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
}

impl QueryDocument {
    pub fn batch_from_json(text: &str) -> Result<Vec<QueryDocument>> {
        Ok(serde_json::from_str(text)?)
    }
}

impl Query {
    pub fn from_document(doc: &QueryDocument, space: &DomainSpace) -> Result<Query> {
        if doc.outputs.is_empty() {
            return Err(Error::EmptyDesiredOutputs(doc.id.clone()));
        }
        let resolve = |names: &[String]| -> Result<Vec<GlobalConcept>> {
            let mut missing = Vec::new();
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
            if !missing.is_empty() {
                return Err(Error::UnresolvableConcepts(doc.id.clone(), missing.join(", ")));
            }
            out.sort_unstable();
            out.dedup();
            Ok(out)
        };
        let provided_inputs = resolve(&doc.inputs)?;
        let desired_outputs = resolve(&doc.outputs)?;
        if desired_outputs.is_empty() {
            return Err(Error::EmptyDesiredOutputs(doc.id.clone()));
        }
        let o_code = compute_gcode(&desired_outputs, Feature::Output, space)?;
        let i_code = if provided_inputs.is_empty() {
            None
        } else {
            Some(compute_gcode(&provided_inputs, Feature::Input, space)?)
        };
        Ok(Query {
            id: doc.id.clone(),
            provided_inputs,
            desired_outputs,
            i_code,
            o_code,
        })
    }
}

/// One retrieved service with its output-phase strength and final rank.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RetrievedService {
    pub id: ServiceId,
    pub strength: MatchStrength,
    pub invocable: bool,
    pub rank: usize,
}

/// Ranked discovery outcome. `rows` holds the Phase-2 survivors in their
/// Phase-1 relative order; pruned candidates are listed separately.
#[derive(Debug, Clone)]
pub struct RetrievalResult {
    pub query_id: String,
    pub rows: Vec<RetrievedService>,
    pub phase1: Vec<(ServiceId, MatchStrength)>,
    pub pruned: Vec<ServiceId>,
}

impl RetrievalResult {
    pub fn retrieved_ids(&self) -> Vec<ServiceId> {
        self.rows.iter().map(|r| r.id.clone()).collect()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct DiscoveryOptions {
    /// Whether sibling-strength candidates enter the ranked output.
    pub include_siblings: bool,
}

impl Default for DiscoveryOptions {
    fn default() -> Self {
        DiscoveryOptions { include_siblings: true }
    }
}

/// Runs both phases of discovery for one query over the output cluster
/// space and the service registry.
pub fn discover(
    query: &Query,
    o_space: &ClusterSpace,
    registry: &ServiceRegistry,
    space: &DomainSpace,
    opts: DiscoveryOptions,
) -> Result<RetrievalResult> {
    if query.desired_outputs.is_empty() {
        return Err(Error::EmptyDesiredOutputs(query.id.clone()));
    }
    space.check_stamp(&query.o_code.stamp)?;
    space.check_stamp(o_space.stamp())?;

    // Phase 1: one comparison per g-code equivalence class, strongest first
    let mut phase1: Vec<(ServiceId, MatchStrength)> = Vec::new();
    for node in o_space.nodes() {
        if node.services.is_empty() {
            continue;
        }
        let strength = relate(&query.o_code.code, &node.gcode).strength;
        let keep = match strength {
            MatchStrength::NoMatch => false,
            MatchStrength::Sibling => opts.include_siblings,
            _ => true,
        };
        if keep {
            for sid in &node.services {
                phase1.push((sid.clone(), strength));
            }
        }
    }
    phase1.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));

    // Phase 2: invocability fixpoint over the whole registry
    let invocable = invocable_services(&query.provided_inputs, registry, space);

    let mut rows = Vec::new();
    let mut pruned = Vec::new();
    for (sid, strength) in &phase1 {
        if invocable.contains(sid) {
            rows.push(RetrievedService {
                id: sid.clone(),
                strength: *strength,
                invocable: true,
                rank: rows.len() + 1,
            });
        } else {
            pruned.push(sid.clone());
        }
    }
    Ok(RetrievalResult {
        query_id: query.id.clone(),
        rows,
        phase1,
        pruned,
    })
}

/// Closure of invocable services: each input concept must be subsumed by
/// or equal to some pooled concept; outputs of invocable services join the
/// pool. Terminates in at most `registry.len()` passes.
pub fn invocable_services(
    provided: &[GlobalConcept],
    registry: &ServiceRegistry,
    space: &DomainSpace,
) -> BTreeSet<ServiceId> {
    let mut pool: Vec<BitCode> = Vec::new();
    let add_to_pool = |pool: &mut Vec<BitCode>, code: BitCode| {
        if !pool.contains(&code) {
            pool.push(code);
        }
    };
    for &gc in provided {
        add_to_pool(&mut pool, space.composite_code(gc));
    }
    let mut invocable: BTreeSet<ServiceId> = BTreeSet::new();
    loop {
        let mut changed = false;
        for svc in registry.iter() {
            if invocable.contains(&svc.id) {
                continue;
            }
            let satisfied = svc.i_array.iter().all(|&input| {
                let needed = space.composite_code(input);
                pool.iter().any(|have| needed.absorbs(have))
            });
            if satisfied {
                invocable.insert(svc.id.clone());
                for &out in &svc.o_array {
                    add_to_pool(&mut pool, space.composite_code(out));
                }
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    invocable
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cluster::converge;
    use crate::ontology::{ConceptDecl, OntologyDocument};
    use crate::service::ServiceDocument;

    fn chain_space() -> DomainSpace {
        let doc = OntologyDocument {
            name: "pipeline".into(),
            concepts: [
                ("Seed", vec![]),
                ("Data", vec![]),
                ("Report", vec!["Data"]),
                ("Answer", vec![]),
                ("Unobtainium", vec![]),
            ]
            .into_iter()
            .map(|(n, ps): (&str, Vec<&str>)| ConceptDecl {
                name: n.into(),
                parents: ps.into_iter().map(String::from).collect(),
            })
            .collect(),
        };
        DomainSpace::from_documents(&[doc]).unwrap()
    }

    fn registry_of(space: &DomainSpace, specs: &[(&str, &[&str], &[&str])]) -> ServiceRegistry {
        let mut reg = ServiceRegistry::new();
        for (id, inputs, outputs) in specs {
            let doc = ServiceDocument {
                id: id.to_string(),
                name: id.to_string(),
                inputs: inputs.iter().map(|s| s.to_string()).collect(),
                outputs: outputs.iter().map(|s| s.to_string()).collect(),
                domain: None,
                preconditions: None,
                results: None,
            };
            reg.admit(&doc, space).unwrap();
        }
        reg
    }

    fn query(space: &DomainSpace, inputs: &[&str], outputs: &[&str]) -> Query {
        Query::from_document(
            &QueryDocument {
                id: "q".into(),
                inputs: inputs.iter().map(|s| s.to_string()).collect(),
                outputs: outputs.iter().map(|s| s.to_string()).collect(),
            },
            space,
        )
        .unwrap()
    }

    #[test]
    fn exact_match_with_direct_inputs_ranks_first() {
        let space = chain_space();
        let reg = registry_of(&space, &[("svc", &["Seed"], &["Answer"])]);
        let (o_space, _) = converge(reg.iter(), Feature::Output, space.stamp()).unwrap();
        let q = query(&space, &["Seed"], &["Answer"]);
        let result = discover(&q, &o_space, &reg, &space, DiscoveryOptions::default()).unwrap();
        assert_eq!(result.rows.len(), 1);
        assert_eq!(result.rows[0].id, ServiceId("svc".into()));
        assert_eq!(result.rows[0].strength, MatchStrength::Exact);
        assert_eq!(result.rows[0].rank, 1);
    }

    #[test]
    fn unsatisfiable_candidate_pruned() {
        let space = chain_space();
        let reg = registry_of(&space, &[("needs_nothing_can_give", &["Unobtainium"], &["Answer"])]);
        let (o_space, _) = converge(reg.iter(), Feature::Output, space.stamp()).unwrap();
        let q = query(&space, &["Seed"], &["Answer"]);
        let result = discover(&q, &o_space, &reg, &space, DiscoveryOptions::default()).unwrap();
        assert!(result.rows.is_empty());
        assert_eq!(result.pruned, vec![ServiceId("needs_nothing_can_give".into())]);
        assert_eq!(result.phase1.len(), 1);
    }

    #[test]
    fn indirect_composition_chain_retained() {
        let space = chain_space();
        // source feeds mid, mid feeds end; only end is a candidate
        let reg = registry_of(
            &space,
            &[
                ("source", &["Seed"], &["Data"]),
                ("mid", &["Data"], &["Report"]),
                ("end", &["Report"], &["Answer"]),
                ("bad", &["Unobtainium"], &["Answer"]),
            ],
        );
        let (o_space, _) = converge(reg.iter(), Feature::Output, space.stamp()).unwrap();
        let q = query(&space, &["Seed"], &["Answer"]);
        let result = discover(&q, &o_space, &reg, &space, DiscoveryOptions::default()).unwrap();
        let ids = result.retrieved_ids();
        assert_eq!(ids, vec![ServiceId("end".into())]);
        assert_eq!(result.pruned, vec![ServiceId("bad".into())]);
    }

    #[test]
    fn general_pool_concept_satisfies_specific_input() {
        let space = chain_space();
        // provider outputs Data (general); consumer needs Report (specific):
        // Report ⊑ Data, so the pooled Data concept covers the Report input
        let reg = registry_of(
            &space,
            &[
                ("provider", &["Seed"], &["Data"]),
                ("consumer", &["Report"], &["Answer"]),
            ],
        );
        let invocable = invocable_services(
            &[space.resolve("Seed").unwrap()],
            &reg,
            &space,
        );
        assert!(invocable.contains(&ServiceId("provider".into())));
        assert!(invocable.contains(&ServiceId("consumer".into())));
    }

    #[test]
    fn phase2_subset_of_phase1_and_order_preserved() {
        let space = chain_space();
        let reg = registry_of(
            &space,
            &[
                ("a_exact", &["Seed"], &["Answer"]),
                ("b_exact", &["Seed"], &["Answer"]),
                ("c_bad", &["Unobtainium"], &["Answer"]),
            ],
        );
        let (o_space, _) = converge(reg.iter(), Feature::Output, space.stamp()).unwrap();
        let q = query(&space, &["Seed"], &["Answer"]);
        let result = discover(&q, &o_space, &reg, &space, DiscoveryOptions::default()).unwrap();
        let phase1_ids: Vec<&ServiceId> = result.phase1.iter().map(|(s, _)| s).collect();
        let row_ids: Vec<&ServiceId> = result.rows.iter().map(|r| &r.id).collect();
        // survivors appear in phase-1 order with ranks 1..n
        let mut cursor = 0;
        for id in &row_ids {
            let pos = phase1_ids[cursor..].iter().position(|p| p == id).unwrap();
            cursor += pos + 1;
        }
        for (i, row) in result.rows.iter().enumerate() {
            assert_eq!(row.rank, i + 1);
        }
        // tie within a strength class broken by ascending id
        assert_eq!(row_ids, vec![&ServiceId("a_exact".into()), &ServiceId("b_exact".into())]);
    }

    #[test]
    fn empty_outputs_rejected() {
        let space = chain_space();
        let doc = QueryDocument { id: "q".into(), inputs: vec![], outputs: vec![] };
        assert!(matches!(
            Query::from_document(&doc, &space),
            Err(Error::EmptyDesiredOutputs(_))
        ));
    }
}
