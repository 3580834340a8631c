//! Concept taxonomies, lattice normalization, and bit-code assignment.
//!
//! A loaded taxonomy is augmented with a universal parent `⊤` (code all
//! zeros) and a universal child `⊥` (code all ones) so that it forms a
//! lattice. Encoding is a topological span of the lattice: the concept
//! visited i-th receives identity bit i plus the OR of its parents' codes,
//! so a concept's code carries the identity bits of all its ancestors and
//! subsumption reduces to [`BitCode::absorbs`].
//!
//! Ties in the span are broken by ascending concept name, which makes code
//! tables reproducible across runs.
//!
//! An encoded ontology behaves as an immutable snapshot: readers may query
//! it concurrently, and a single writer produces the next generation.

use std::collections::hash_map::Entry;
use std::collections::{BinaryHeap, HashMap};

use serde::{Deserialize, Serialize};

use crate::bitcode::BitCode;
use crate::{Error, Result};

pub const TOP_NAME: &str = "⊤";
pub const BOTTOM_NAME: &str = "⊥";

/// Index of a concept within one [`BaseOntology`]. Stable for the lifetime
/// of the ontology; never reused.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ConceptId(pub u32);

impl ConceptId {
    fn idx(self) -> usize {
        self.0 as usize
    }
}

/// A concept reference within a [`DomainSpace`]: ontology slot plus local id.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GlobalConcept {
    pub ontology: usize,
    pub concept: ConceptId,
}

/// Flattened import format for one taxonomy document.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OntologyDocument {
    pub name: String,
    pub concepts: Vec<ConceptDecl>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConceptDecl {
    pub name: String,
    #[serde(default)]
    pub parents: Vec<String>,
}

impl OntologyDocument {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("document serialization")
    }
}

/// A concept DAG normalized to a lattice, together with its code table.
#[derive(Debug, Clone)]
pub struct BaseOntology {
    name: String,
    concept_names: Vec<String>,
    parents: Vec<Vec<ConceptId>>,
    children: Vec<Vec<ConceptId>>,
    codes: Vec<BitCode>,
    name_index: HashMap<String, ConceptId>,
    top: ConceptId,
    bottom: ConceptId,
    generation: u64,
    width: usize,
}

impl BaseOntology {
    /// Loads a document, synthesizing `⊤`/`⊥` where absent, validates the
    /// DAG, and assigns codes.
    pub fn load(doc: &OntologyDocument) -> Result<Self> {
        let mut concept_names = vec![TOP_NAME.to_string(), BOTTOM_NAME.to_string()];
        let mut name_index: HashMap<String, ConceptId> = HashMap::new();
        name_index.insert(TOP_NAME.to_string(), ConceptId(0));
        name_index.insert(BOTTOM_NAME.to_string(), ConceptId(1));

        for decl in &doc.concepts {
            if decl.name == TOP_NAME || decl.name == BOTTOM_NAME {
                return Err(Error::ReservedConcept(decl.name.clone()));
            }
            let id = ConceptId(concept_names.len() as u32);
            match name_index.entry(decl.name.clone()) {
                Entry::Occupied(_) => return Err(Error::DuplicateConcept(decl.name.clone())),
                Entry::Vacant(v) => {
                    v.insert(id);
                }
            }
            concept_names.push(decl.name.clone());
        }

        let n = concept_names.len();
        let mut parents: Vec<Vec<ConceptId>> = vec![Vec::new(); n];
        let mut dangling: Vec<String> = Vec::new();
        for decl in &doc.concepts {
            let id = name_index[&decl.name];
            let mut ps = Vec::new();
            for p in &decl.parents {
                match name_index.get(p) {
                    Some(&pid) if pid != ConceptId(0) && pid != ConceptId(1) => ps.push(pid),
                    Some(_) => return Err(Error::ReservedConcept(p.clone())),
                    None => dangling.push(format!("{} (parent of {})", p, decl.name)),
                }
            }
            ps.sort_unstable();
            ps.dedup();
            if ps.is_empty() {
                ps.push(ConceptId(0)); // ⊤ is the implicit sole parent of declared roots
            }
            parents[id.idx()] = ps;
        }
        if !dangling.is_empty() {
            return Err(Error::DanglingParent(dangling.join(", ")));
        }

        let mut onto = BaseOntology {
            name: doc.name.clone(),
            concept_names,
            parents,
            children: vec![Vec::new(); n],
            codes: Vec::new(),
            name_index,
            top: ConceptId(0),
            bottom: ConceptId(1),
            generation: 0,
            width: 0,
        };
        onto.rebuild_children();
        onto.check_acyclic()?;
        onto.encode();
        Ok(onto)
    }

    /// Empty lattice: just `⊤` and `⊥`.
    pub fn empty(name: &str) -> Self {
        BaseOntology::load(&OntologyDocument {
            name: name.to_string(),
            concepts: Vec::new(),
        })
        .expect("empty document is always valid")
    }

    fn rebuild_children(&mut self) {
        let n = self.concept_names.len();
        for c in &mut self.children {
            c.clear();
        }
        self.children.resize(n, Vec::new());
        for id in 0..n {
            if ConceptId(id as u32) == self.bottom {
                continue;
            }
            for &p in &self.parents[id] {
                self.children[p.idx()].push(ConceptId(id as u32));
            }
        }
        // ⊥ is the child of every concept that has no other child
        let leaves: Vec<ConceptId> = (0..n)
            .map(|i| ConceptId(i as u32))
            .filter(|&c| c != self.bottom && self.children[c.idx()].is_empty())
            .collect();
        self.parents[self.bottom.idx()] = leaves.clone();
        for leaf in leaves {
            self.children[leaf.idx()].push(self.bottom);
        }
        for c in &mut self.children {
            c.sort_unstable();
            c.dedup();
        }
    }

    fn check_acyclic(&self) -> Result<()> {
        // iterative DFS over child edges, reporting the offending cycle
        let n = self.concept_names.len();
        let mut state = vec![0u8; n]; // 0 new, 1 on stack, 2 done
        let mut stack: Vec<(usize, usize)> = Vec::new();
        let mut path: Vec<usize> = Vec::new();
        for start in 0..n {
            if state[start] != 0 {
                continue;
            }
            stack.push((start, 0));
            state[start] = 1;
            path.push(start);
            while let Some(&mut (node, ref mut next)) = stack.last_mut() {
                if *next < self.children[node].len() {
                    let child = self.children[node][*next].idx();
                    *next += 1;
                    match state[child] {
                        0 => {
                            state[child] = 1;
                            stack.push((child, 0));
                            path.push(child);
                        }
                        1 => {
                            let from = path.iter().position(|&x| x == child).unwrap_or(0);
                            let cycle: Vec<&str> = path[from..]
                                .iter()
                                .chain(std::iter::once(&child))
                                .map(|&i| self.concept_names[i].as_str())
                                .collect();
                            return Err(Error::ConceptCycle(cycle.join(" -> ")));
                        }
                        _ => {}
                    }
                } else {
                    state[node] = 2;
                    stack.pop();
                    path.pop();
                }
            }
        }
        Ok(())
    }

    /// Assigns codes by topological span. Idempotent for a fixed ontology;
    /// increments the generation.
    pub fn encode(&mut self) {
        let n = self.concept_names.len();
        self.width = n;
        self.codes = vec![BitCode::zeros(n); n];

        // Kahn span over ordinary concepts, ready set ordered by name.
        let mut remaining: Vec<usize> = vec![0; n];
        for id in 0..n {
            let c = ConceptId(id as u32);
            if c == self.top || c == self.bottom {
                continue;
            }
            remaining[id] = self.parents[id].iter().filter(|&&p| p != self.top).count();
        }
        let mut ready: BinaryHeap<std::cmp::Reverse<(String, u32)>> = BinaryHeap::new();
        for id in 0..n {
            let c = ConceptId(id as u32);
            if c != self.top && c != self.bottom && remaining[id] == 0 {
                ready.push(std::cmp::Reverse((self.concept_names[id].clone(), id as u32)));
            }
        }
        let mut visit = 0usize;
        while let Some(std::cmp::Reverse((_, id))) = ready.pop() {
            visit += 1;
            let id = ConceptId(id);
            let mut code = BitCode::zeros(n);
            for p in self.parents[id.idx()].clone() {
                code.or_assign(&self.codes[p.idx()]);
            }
            code.set_bit(visit);
            self.codes[id.idx()] = code;
            for &c in &self.children[id.idx()] {
                if c == self.bottom {
                    continue;
                }
                remaining[c.idx()] -= 1;
                if remaining[c.idx()] == 0 {
                    ready.push(std::cmp::Reverse((self.concept_names[c.idx()].clone(), c.0)));
                }
            }
        }
        debug_assert_eq!(visit, n - 2, "span must visit every ordinary concept");
        self.codes[self.bottom.idx()] = BitCode::ones(n);
        self.generation += 1;
    }

    /// True when `cy` subsumes `cx` (`cx ⊑ cy`), i.e. the OR of the two
    /// codes equals `cx`'s code.
    pub fn subsumes(&self, cx: ConceptId, cy: ConceptId) -> bool {
        self.codes[cx.idx()].absorbs(&self.codes[cy.idx()])
    }

    /// Adds a fresh leaf concept under `parents`. Appends a single identity
    /// bit, leaving existing codes and the generation untouched.
    pub fn add_concept(&mut self, name: &str, parents: &[ConceptId]) -> Result<ConceptId> {
        self.insert_concept(name, parents, &[])
    }

    /// Adds a fresh concept with explicit parents and children. With no
    /// children this appends one bit; otherwise existing concepts must
    /// inherit the new identity bit, so the whole table is re-encoded and
    /// the generation bumps.
    pub fn insert_concept(
        &mut self,
        name: &str,
        parents: &[ConceptId],
        children: &[ConceptId],
    ) -> Result<ConceptId> {
        if name == TOP_NAME || name == BOTTOM_NAME {
            return Err(Error::ReservedConcept(name.to_string()));
        }
        if self.name_index.contains_key(name) {
            return Err(Error::DuplicateConcept(name.to_string()));
        }
        for &c in parents.iter().chain(children) {
            if c.idx() >= self.concept_names.len() || c == self.bottom {
                return Err(Error::UnknownConcept(format!("{c:?}")));
            }
        }
        let mut ps: Vec<ConceptId> = parents.iter().copied().filter(|&p| p != self.top).collect();
        ps.sort_unstable();
        ps.dedup();
        if ps.is_empty() {
            ps.push(self.top);
        }
        let mut cs: Vec<ConceptId> = children.iter().copied().filter(|&c| c != self.top).collect();
        cs.sort_unstable();
        cs.dedup();
        // a cycle closes exactly when a designated child is already an
        // ancestor of a designated parent
        for &c in &cs {
            for &p in &ps {
                if self.reaches_ancestor(c, p) {
                    return Err(Error::ConceptCycle(format!(
                        "{} -> {} -> {}",
                        self.concept_names[c.idx()],
                        self.concept_names[p.idx()],
                        self.concept_names[c.idx()],
                    )));
                }
            }
        }

        let id = ConceptId(self.concept_names.len() as u32);
        self.concept_names.push(name.to_string());
        self.name_index.insert(name.to_string(), id);
        self.parents.push(ps.clone());
        self.children.push(Vec::new());
        for &c in &cs {
            self.parents[c.idx()].push(id);
            self.parents[c.idx()].sort_unstable();
        }
        self.rebuild_children();

        if cs.is_empty() {
            // incremental append: one new identity bit at position width+1
            let pos = self.width + 1;
            let mut code = BitCode::zeros(pos);
            for &p in &ps {
                code.or_assign(&self.codes[p.idx()]);
            }
            code.set_bit(pos);
            self.codes.push(code);
            self.width = pos;
            self.codes[self.bottom.idx()] = BitCode::ones(pos);
        } else {
            self.codes.push(BitCode::zeros(0));
            self.encode();
        }
        Ok(id)
    }

    /// True when `ancestor` is reachable from `from` by walking parent edges.
    fn reaches_ancestor(&self, ancestor: ConceptId, from: ConceptId) -> bool {
        let mut stack = vec![from];
        let mut seen = vec![false; self.concept_names.len()];
        while let Some(c) = stack.pop() {
            if c == ancestor {
                return true;
            }
            if std::mem::replace(&mut seen[c.idx()], true) {
                continue;
            }
            stack.extend(self.parents[c.idx()].iter().copied());
        }
        false
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn generation(&self) -> u64 {
        self.generation
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn top(&self) -> ConceptId {
        self.top
    }

    pub fn bottom(&self) -> ConceptId {
        self.bottom
    }

    pub fn concept(&self, name: &str) -> Option<ConceptId> {
        self.name_index.get(name).copied()
    }

    pub fn concept_name(&self, id: ConceptId) -> &str {
        &self.concept_names[id.idx()]
    }

    pub fn code(&self, id: ConceptId) -> &BitCode {
        &self.codes[id.idx()]
    }

    pub fn parents(&self, id: ConceptId) -> &[ConceptId] {
        &self.parents[id.idx()]
    }

    pub fn children(&self, id: ConceptId) -> &[ConceptId] {
        &self.children[id.idx()]
    }

    pub fn concept_count(&self) -> usize {
        self.concept_names.len()
    }

    pub fn concept_ids(&self) -> impl Iterator<Item = ConceptId> + '_ {
        (0..self.concept_names.len() as u32).map(ConceptId)
    }

    /// Ordinary concepts: everything except `⊤` and `⊥`.
    pub fn ordinary_concepts(&self) -> impl Iterator<Item = ConceptId> + '_ {
        let (top, bottom) = (self.top, self.bottom);
        self.concept_ids().filter(move |&c| c != top && c != bottom)
    }
}

/// Snapshot of a domain space's per-ontology generations and widths. Codes
/// computed under one stamp stay valid as long as the stamp they were
/// computed under is compatible with the space's current stamp.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpaceStamp {
    pub entries: Vec<StampEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StampEntry {
    pub name: String,
    pub generation: u64,
    pub width: usize,
}

impl SpaceStamp {
    /// True when codes computed under `self` are still valid for a space
    /// currently stamped `current`: same ontologies and generations, and
    /// segment offsets unchanged (only the last segment may have grown).
    pub fn compatible_with(&self, current: &SpaceStamp) -> bool {
        if self.entries.len() != current.entries.len() {
            return false;
        }
        let last = self.entries.len().saturating_sub(1);
        self.entries.iter().zip(&current.entries).enumerate().all(|(i, (old, new))| {
            old.name == new.name
                && old.generation == new.generation
                && if i == last {
                    old.width <= new.width
                } else {
                    old.width == new.width
                }
        })
    }

    pub fn total_width(&self) -> usize {
        self.entries.iter().map(|e| e.width).sum()
    }
}

/// A collection of encoded ontologies forming one composite code space.
/// Each ontology owns a contiguous bit range; a concept's composite code is
/// its b-code shifted into that range, so identity bits stay disjoint
/// across ontologies.
#[derive(Debug, Clone, Default)]
pub struct DomainSpace {
    ontologies: Vec<BaseOntology>,
    name_index: HashMap<String, GlobalConcept>,
}

impl DomainSpace {
    pub fn new() -> Self {
        DomainSpace::default()
    }

    pub fn from_documents(docs: &[OntologyDocument]) -> Result<Self> {
        let mut space = DomainSpace::new();
        for doc in docs {
            space.push_ontology(BaseOntology::load(doc)?)?;
        }
        Ok(space)
    }

    /// Appends an encoded ontology as the last code segment. Ordinary
    /// concept names must be unique across the space.
    pub fn push_ontology(&mut self, onto: BaseOntology) -> Result<usize> {
        let slot = self.ontologies.len();
        for c in onto.ordinary_concepts() {
            let name = onto.concept_name(c).to_string();
            match self.name_index.entry(name) {
                Entry::Occupied(e) => {
                    return Err(Error::DuplicateConcept(e.key().clone()));
                }
                Entry::Vacant(v) => {
                    v.insert(GlobalConcept {
                        ontology: slot,
                        concept: c,
                    });
                }
            }
        }
        self.ontologies.push(onto);
        Ok(slot)
    }

    pub fn ontologies(&self) -> &[BaseOntology] {
        &self.ontologies
    }

    pub fn ontology(&self, slot: usize) -> &BaseOntology {
        &self.ontologies[slot]
    }

    pub fn ontology_mut(&mut self, slot: usize) -> &mut BaseOntology {
        &mut self.ontologies[slot]
    }

    /// Resolves an ordinary concept by name.
    pub fn resolve(&self, name: &str) -> Option<GlobalConcept> {
        self.name_index.get(name).copied()
    }

    pub fn concept_name(&self, gc: GlobalConcept) -> &str {
        self.ontologies[gc.ontology].concept_name(gc.concept)
    }

    /// Bit offset of an ontology's segment within the composite space.
    pub fn segment_offset(&self, slot: usize) -> usize {
        self.ontologies[..slot].iter().map(|o| o.width()).sum()
    }

    pub fn total_width(&self) -> usize {
        self.ontologies.iter().map(|o| o.width()).sum()
    }

    /// The concept's b-code shifted into its ontology's segment.
    pub fn composite_code(&self, gc: GlobalConcept) -> BitCode {
        let mut code = self.ontologies[gc.ontology]
            .code(gc.concept)
            .shifted(self.segment_offset(gc.ontology));
        // widen to the full composite space so widths stay meaningful
        let total = self.total_width();
        if code.width() < total {
            let padded = BitCode::zeros(total).or(&code);
            code = padded;
        }
        code
    }

    /// True when `cy` subsumes `cx`. Concepts of different ontologies are
    /// never mutually subsumptive.
    pub fn subsumes(&self, cx: GlobalConcept, cy: GlobalConcept) -> bool {
        cx.ontology == cy.ontology && self.ontologies[cx.ontology].subsumes(cx.concept, cy.concept)
    }

    pub fn stamp(&self) -> SpaceStamp {
        SpaceStamp {
            entries: self
                .ontologies
                .iter()
                .map(|o| StampEntry {
                    name: o.name().to_string(),
                    generation: o.generation(),
                    width: o.width(),
                })
                .collect(),
        }
    }

    /// Validates that codes carrying `stamp` are still usable.
    pub fn check_stamp(&self, stamp: &SpaceStamp) -> Result<()> {
        if stamp.compatible_with(&self.stamp()) {
            Ok(())
        } else {
            Err(Error::StaleCode)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(name: &str, concepts: &[(&str, &[&str])]) -> OntologyDocument {
        OntologyDocument {
            name: name.to_string(),
            concepts: concepts
                .iter()
                .map(|(n, ps)| ConceptDecl {
                    name: n.to_string(),
                    parents: ps.iter().map(|p| p.to_string()).collect(),
                })
                .collect(),
        }
    }

    fn vehicle_doc() -> OntologyDocument {
        doc(
            "vehicle",
            &[
                ("Vehicle", &[]),
                ("LandVehicle", &["Vehicle"]),
                ("SpaceVehicle", &["Vehicle"]),
                ("WaterVehicle", &["Vehicle"]),
                ("Bicycle", &["LandVehicle"]),
                ("Bus", &["LandVehicle"]),
                ("Car", &["LandVehicle"]),
            ],
        )
    }

    #[test]
    fn vehicle_taxonomy_codes() {
        let onto = BaseOntology::load(&vehicle_doc()).unwrap();
        let land = onto.concept("LandVehicle").unwrap();
        let car = onto.concept("Car").unwrap();
        assert_eq!(onto.code(land).set_positions(), vec![1, 2]);
        assert_eq!(onto.code(car).set_positions(), vec![1, 2, 5]);
        assert!(onto.subsumes(car, land));
        assert!(!onto.subsumes(land, car));
    }

    #[test]
    fn empty_document_is_the_two_element_lattice() {
        let onto = BaseOntology::empty("void");
        assert_eq!(onto.concept_count(), 2);
        assert_eq!(onto.width(), 2);
        assert_eq!(onto.code(onto.top()).to_hex(), "0");
        assert!(onto.code(onto.top()).is_zero());
        assert_eq!(onto.code(onto.bottom()).set_positions(), vec![1, 2]);
    }

    #[test]
    fn chain_inherits_single_path() {
        let onto = BaseOntology::load(&doc("chain", &[("A", &[]), ("B", &["A"])])).unwrap();
        let a = onto.concept("A").unwrap();
        let b = onto.concept("B").unwrap();
        assert_eq!(onto.code(a).set_positions(), vec![1]);
        assert_eq!(onto.code(b).set_positions(), vec![1, 2]);
    }

    #[test]
    fn diamond_or_inheritance() {
        let onto = BaseOntology::load(&doc(
            "diamond",
            &[("A", &[]), ("B", &[]), ("C", &["A", "B"])],
        ))
        .unwrap();
        let a = onto.concept("A").unwrap();
        let b = onto.concept("B").unwrap();
        let c = onto.concept("C").unwrap();
        let expected = onto.code(a).or(onto.code(b));
        // C = A|B plus its own identity bit
        assert!(onto.code(c).absorbs(&expected));
        assert_eq!(onto.code(c).count_ones(), expected.count_ones() + 1);
        assert!(onto.subsumes(c, a) && onto.subsumes(c, b));
    }

    #[test]
    fn everything_subsumed_by_top() {
        let onto = BaseOntology::load(&vehicle_doc()).unwrap();
        for c in onto.concept_ids() {
            assert!(onto.subsumes(c, onto.top()));
        }
    }

    #[test]
    fn cycle_rejected_with_path() {
        let err = BaseOntology::load(&doc("cyc", &[("A", &["B"]), ("B", &["A"])])).unwrap_err();
        match err {
            Error::ConceptCycle(path) => assert!(path.contains("A") && path.contains("B")),
            other => panic!("expected cycle error, got {other}"),
        }
    }

    #[test]
    fn duplicate_and_dangling_rejected() {
        assert!(matches!(
            BaseOntology::load(&doc("dup", &[("A", &[]), ("A", &[])])),
            Err(Error::DuplicateConcept(_))
        ));
        assert!(matches!(
            BaseOntology::load(&doc("dang", &[("A", &["Ghost"])])),
            Err(Error::DanglingParent(_))
        ));
    }

    #[test]
    fn deterministic_encode() {
        let a = BaseOntology::load(&vehicle_doc()).unwrap();
        let b = BaseOntology::load(&vehicle_doc()).unwrap();
        for c in a.concept_ids() {
            assert_eq!(a.code(c), b.code(c));
        }
    }

    #[test]
    fn leaf_append_keeps_generation_and_grows_width() {
        let mut onto = BaseOntology::load(&vehicle_doc()).unwrap();
        let gen = onto.generation();
        let n0 = onto.width();
        let car = onto.concept("Car").unwrap();
        let car_code = onto.code(car).clone();
        let sports = onto.add_concept("SportsCar", &[car]).unwrap();
        assert_eq!(onto.generation(), gen);
        assert_eq!(onto.width(), n0 + 1);
        assert!(onto.code(sports).absorbs(&car_code));
        assert_eq!(onto.code(sports).count_ones(), car_code.count_ones() + 1);
        assert!(onto.subsumes(sports, car));
        // older code still compares correctly against the grown table
        assert!(onto.code(car).absorbs(&car_code));
        // ⊥ keeps covering the new position
        assert!(onto.code(onto.bottom()).bit(n0 + 1));
    }

    #[test]
    fn insert_with_children_reencodes() {
        let mut onto = BaseOntology::load(&vehicle_doc()).unwrap();
        let gen = onto.generation();
        let vehicle = onto.concept("Vehicle").unwrap();
        let land = onto.concept("LandVehicle").unwrap();
        let motor = onto.insert_concept("Motorized", &[vehicle], &[land]).unwrap();
        assert_eq!(onto.generation(), gen + 1);
        assert!(onto.subsumes(land, motor));
        assert!(onto.subsumes(motor, vehicle));
        let car = onto.concept("Car").unwrap();
        assert!(onto.subsumes(car, motor));
    }

    #[test]
    fn duplicate_append_rejected() {
        let mut onto = BaseOntology::load(&vehicle_doc()).unwrap();
        let car = onto.concept("Car").unwrap();
        assert!(matches!(
            onto.add_concept("Car", &[car]),
            Err(Error::DuplicateConcept(_))
        ));
    }

    #[test]
    fn composite_codes_have_disjoint_segments() {
        let space = DomainSpace::from_documents(&[
            doc("a", &[("X", &[]), ("X1", &["X"])]),
            doc("b", &[("Y", &[]), ("Y1", &["Y"])]),
        ])
        .unwrap();
        let x1 = space.resolve("X1").unwrap();
        let y1 = space.resolve("Y1").unwrap();
        let cx = space.composite_code(x1);
        let cy = space.composite_code(y1);
        assert!(!cx.intersects(&cy));
        assert!(!space.subsumes(x1, y1) && !space.subsumes(y1, x1));
        let x = space.resolve("X").unwrap();
        assert!(space.subsumes(x1, x));
        assert!(space.composite_code(x1).absorbs(&space.composite_code(x)));
    }

    #[test]
    fn stamp_compatibility_rules() {
        let mut space = DomainSpace::from_documents(&[
            doc("a", &[("X", &[])]),
            doc("b", &[("Y", &[])]),
        ])
        .unwrap();
        let old = space.stamp();
        assert!(space.check_stamp(&old).is_ok());

        // append to the last segment: offsets unchanged, still compatible
        let y = space.ontology(1).concept("Y").unwrap();
        space.ontology_mut(1).add_concept("Y2", &[y]).unwrap();
        assert!(space.check_stamp(&old).is_ok());

        // append to a non-last segment shifts offsets: stale
        let x = space.ontology(0).concept("X").unwrap();
        space.ontology_mut(0).add_concept("X2", &[x]).unwrap();
        assert!(matches!(space.check_stamp(&old), Err(Error::StaleCode)));
    }
}
