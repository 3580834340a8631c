//! Seeded synthetic workload generation.
//!
//! Produces random concept DAGs and service batches shaped like the target
//! workload: a handful of domain ontologies of a few hundred concepts each,
//! services drawing around five parameters per feature from anywhere in the
//! domain space, inputs always distinct from outputs. A fixed seed yields
//! byte-identical artifacts.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::ontology::{ConceptDecl, DomainSpace, OntologyDocument};
use crate::service::ServiceDocument;
use crate::{Error, Result};

/// Generator knobs. The flat key/value config file uses the field names.
#[derive(Debug, Clone, PartialEq)]
pub struct GenConfig {
    pub ontology_count: usize,
    pub avg_concepts: usize,
    pub avg_params: usize,
    pub service_count: usize,
    pub rng_seed: u64,
    /// Deepest concept level; level-1 concepts hang off `⊤`.
    pub max_depth: usize,
    /// Probability that a concept takes a second parent (diamonds).
    pub second_parent_chance: f64,
    /// Ontologies each service draws its parameters from. Real registries
    /// are domain-focused; 0 disables the focus and samples uniformly.
    pub focus_ontologies: usize,
    /// Concept popularity skew: parameter types are drawn with weight
    /// proportional to rank^-skew within each ontology, so common types
    /// repeat across services. 0 samples uniformly.
    pub popularity_skew: f64,
    /// Whether services carry a ground-truth domain label (the ontology of
    /// their first output parameter).
    pub label_services: bool,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            ontology_count: 10,
            avg_concepts: 300,
            avg_params: 5,
            service_count: 100,
            rng_seed: 42,
            max_depth: 6,
            second_parent_chance: 0.3,
            label_services: true,
        }
    }
}

impl GenConfig {
    /// Parses the flat `key = value` document; `#` starts a comment.
    pub fn parse(text: &str) -> Result<GenConfig> {
        let mut cfg = GenConfig::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::InvalidConfig(format!("line {}: expected key = value", lineno + 1)))?;
            let key = key.trim();
            let value = value.trim();
            macro_rules! bad {
                () => {
                    |_| Error::InvalidConfig(format!("line {}: bad value for {key}", lineno + 1))
                };
            }
            match key {
                "ontology_count" => cfg.ontology_count = value.parse().map_err(bad!())?,
                "avg_concepts" => cfg.avg_concepts = value.parse().map_err(bad!())?,
                "avg_params" => cfg.avg_params = value.parse().map_err(bad!())?,
                "service_count" => cfg.service_count = value.parse().map_err(bad!())?,
                "rng_seed" => cfg.rng_seed = value.parse().map_err(bad!())?,
                "max_depth" => cfg.max_depth = value.parse().map_err(bad!())?,
                "second_parent_chance" => cfg.second_parent_chance = value.parse().map_err(bad!())?,
                "label_services" => cfg.label_services = value.parse().map_err(bad!())?,
                other => return Err(Error::InvalidConfig(format!("unknown key `{other}`"))),
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.ontology_count == 0
            || self.avg_concepts == 0
            || self.avg_params == 0
            || self.max_depth == 0
        {
            return Err(Error::InvalidConfig("counts must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.second_parent_chance) {
            return Err(Error::InvalidConfig("second_parent_chance must be in [0,1]".into()));
        }
        Ok(())
    }

    pub fn render(&self) -> String {
        format!(
            "ontology_count = {}\navg_concepts = {}\navg_params = {}\nservice_count = {}\nrng_seed = {}\nmax_depth = {}\nsecond_parent_chance = {}\nlabel_services = {}\n",
            self.ontology_count,
            self.avg_concepts,
            self.avg_params,
            self.service_count,
            self.rng_seed,
            self.max_depth,
            self.second_parent_chance,
            self.label_services,
        )
    }
}

/// Generates the domain ontologies: random DAGs where each non-root concept
/// picks one or two parents from strictly shallower levels, producing the
/// multiple-inheritance diamonds that exercise OR-inheritance.
pub fn gen_domain_space(cfg: &GenConfig) -> Result<Vec<OntologyDocument>> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let mut docs = Vec::with_capacity(cfg.ontology_count);
    for k in 0..cfg.ontology_count {
        let lo = (cfg.avg_concepts as f64 * 0.8).round() as usize;
        let hi = (cfg.avg_concepts as f64 * 1.2).round() as usize;
        let n = rng.gen_range(lo.max(1)..=hi.max(1));
        let mut levels: Vec<usize> = (0..n).map(|_| rng.gen_range(1..=cfg.max_depth)).collect();
        levels[0] = 1; // at least one root
        let mut concepts = Vec::with_capacity(n);
        for (j, &level) in levels.iter().enumerate() {
            let name = format!("o{k}_c{j}");
            let shallower: Vec<usize> = (0..j).filter(|&i| levels[i] < level).collect();
            let mut parents = Vec::new();
            if level > 1 && !shallower.is_empty() {
                let first = shallower[rng.gen_range(0..shallower.len())];
                parents.push(format!("o{k}_c{first}"));
                if shallower.len() > 1 && rng.gen_bool(cfg.second_parent_chance) {
                    let second = shallower[rng.gen_range(0..shallower.len())];
                    if second != first {
                        parents.push(format!("o{k}_c{second}"));
                    }
                }
            }
            concepts.push(ConceptDecl { name, parents });
        }
        docs.push(OntologyDocument {
            name: format!("ont{k}"),
            concepts,
        });
    }
    Ok(docs)
}

/// Generates a service batch over the domain space. Parameter counts vary
/// around `avg_params`; inputs and outputs are disjoint concept sets, so
/// every service passes validation.
pub fn gen_services(cfg: &GenConfig, space: &DomainSpace) -> Result<Vec<ServiceDocument>> {
    cfg.validate()?;
    // separate stream so ontology and service generation stay independent
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed.wrapping_add(0x5e71_1ce5));
    let pool: Vec<String> = space
        .ontologies()
        .iter()
        .flat_map(|o| o.ordinary_concepts().map(|c| o.concept_name(c).to_string()))
        .collect();
    if pool.len() < 2 * (cfg.avg_params + 2) {
        return Err(Error::InvalidConfig("domain space too small for parameter sizes".into()));
    }
    let mut services = Vec::with_capacity(cfg.service_count);
    for s in 0..cfg.service_count {
        let lo = cfg.avg_params.saturating_sub(2).max(1);
        let hi = cfg.avg_params + 2;
        let i_count = rng.gen_range(lo..=hi);
        let o_count = rng.gen_range(lo..=hi);
        let mut picked: Vec<usize> = Vec::new();
        while picked.len() < i_count + o_count {
            let c = rng.gen_range(0..pool.len());
            if !picked.contains(&c) {
                picked.push(c);
            }
        }
        let inputs: Vec<String> = picked[..i_count].iter().map(|&c| pool[c].clone()).collect();
        let outputs: Vec<String> = picked[i_count..].iter().map(|&c| pool[c].clone()).collect();
        let domain = if cfg.label_services {
            space.resolve(&outputs[0]).map(|gc| space.ontology(gc.ontology).name().to_string())
        } else {
            None
        };
        services.push(ServiceDocument {
            id: format!("svc{s:04}"),
            name: format!("synthetic service {s}"),
            inputs,
            outputs,
            domain,
            preconditions: None,
            results: None,
        });
    }
    Ok(services)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::service::ServiceRegistry;

    #[test]
    fn fixed_seed_is_deterministic() {
        let cfg = GenConfig {
            ontology_count: 2,
            avg_concepts: 30,
            service_count: 10,
            ..GenConfig::default()
        };
        let a = gen_domain_space(&cfg).unwrap();
        let b = gen_domain_space(&cfg).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        let space = DomainSpace::from_documents(&a).unwrap();
        let sa = gen_services(&cfg, &space).unwrap();
        let sb = gen_services(&cfg, &space).unwrap();
        assert_eq!(serde_json::to_string(&sa).unwrap(), serde_json::to_string(&sb).unwrap());
    }

    #[test]
    fn single_small_ontology_has_requested_size() {
        let cfg = GenConfig {
            ontology_count: 1,
            avg_concepts: 10,
            max_depth: 3,
            ..GenConfig::default()
        };
        let docs = gen_domain_space(&cfg).unwrap();
        assert_eq!(docs.len(), 1);
        let n = docs[0].concepts.len();
        assert!((8..=12).contains(&n), "got {n}");
        // declared concepts plus ⊤/⊥
        let space = DomainSpace::from_documents(&docs).unwrap();
        assert_eq!(space.ontology(0).concept_count(), n + 2);
    }

    #[test]
    fn generated_dags_load_and_services_validate() {
        let cfg = GenConfig {
            ontology_count: 3,
            avg_concepts: 40,
            service_count: 30,
            rng_seed: 7,
            ..GenConfig::default()
        };
        let docs = gen_domain_space(&cfg).unwrap();
        let space = DomainSpace::from_documents(&docs).unwrap();
        let services = gen_services(&cfg, &space).unwrap();
        assert_eq!(services.len(), 30);
        let mut reg = ServiceRegistry::new();
        reg.admit_batch(&services, &space).unwrap();
        assert_eq!(reg.len(), 30);
        assert!(reg.iter().all(|s| s.domain_label.is_some()));
    }

    #[test]
    fn config_roundtrip_and_validation() {
        let cfg = GenConfig::default();
        let parsed = GenConfig::parse(&cfg.render()).unwrap();
        assert_eq!(parsed, cfg);
        assert!(GenConfig::parse("ontology_count = 0").is_err());
        assert!(GenConfig::parse("nonsense = 1").is_err());
        let with_comment = GenConfig::parse("rng_seed = 9 # fixed\n\n").unwrap();
        assert_eq!(with_comment.rng_seed, 9);
    }
}
