//! Online taxonomical cluster spaces.
//!
//! A cluster space is the Hasse diagram of services under the per-feature
//! subsumption order: parents are more general, children more specific,
//! and every taxonomy (the region reachable from one root) is a cluster.
//! Taxonomies may overlap — a node can descend from several roots.
//!
//! Insertion is online: a new service is wired between its most specific
//! parents (MSP) and least specific children (LSC). The MSP search
//! descends from the roots following plug-in matches only, which is sound
//! because any dominator of the sample sits on an all-dominator chain from
//! some root. The LSC search is restricted to the region below the MSP;
//! when the MSP is empty it scans the whole space. Exact matches merge
//! into the existing node's service set. A sample with an empty MSP that
//! sibling-matches a root gains a synthesized abstract parent holding the
//! AND of the two codes; the abstract node is placed by the same insertion
//! procedure, so all Hasse invariants hold uniformly.
//!
//! Spaces follow a single-writer discipline; readers may traverse any
//! snapshot taken between writes.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::Serialize;

use crate::bitcode::BitCode;
use crate::matchmaker::{relate, MatchStrength};
use crate::ontology::SpaceStamp;
use crate::service::{Feature, GCode, ServiceDescription, ServiceId};
use crate::{Error, Result};

/// Identifier of a node within one cluster space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct NodeId(pub u64);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum NodeKind {
    /// Holds the equivalence class of services sharing one g-code.
    Concrete,
    /// Synthesized common cover of sibling services; holds no services.
    Abstract,
}

impl NodeKind {
    pub fn label(self) -> &'static str {
        match self {
            NodeKind::Concrete => "concrete",
            NodeKind::Abstract => "abstract",
        }
    }
}

/// One node of the service Hasse diagram.
#[derive(Debug, Clone)]
pub struct TaxonomyNode {
    pub id: NodeId,
    pub kind: NodeKind,
    pub services: BTreeSet<ServiceId>,
    pub gcode: BitCode,
    pub parents: BTreeSet<NodeId>,
    pub children: BTreeSet<NodeId>,
}

/// How an insertion placed its service.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PlacementOutcome {
    /// First node of an empty space.
    FirstRoot,
    /// Exact g-code match: joined an existing node's service set.
    MergedInto(NodeId),
    /// New node wired between its MSP and LSC.
    Placed {
        parents: BTreeSet<NodeId>,
        children: BTreeSet<NodeId>,
        abstracts_created: Vec<NodeId>,
    },
}

#[derive(Debug, Clone)]
pub struct PlacementReport {
    pub service: ServiceId,
    pub node: NodeId,
    pub outcome: PlacementOutcome,
    /// Pairwise comparisons spent by this insertion.
    pub comparisons: u64,
    /// Node count before the insertion.
    pub space_size_before: usize,
}

/// Canonical, id-free rendering of a topology, used to compare spaces
/// built under different insertion orders.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CanonicalTopology {
    pub nodes: Vec<CanonicalNode>,
    pub edges: Vec<(String, String)>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct CanonicalNode {
    pub gcode_hex: String,
    pub kind: &'static str,
    pub services: Vec<String>,
}

enum Payload<'a> {
    Concrete(&'a ServiceId),
    Abstract,
}

struct MspSearch {
    exact: Option<NodeId>,
    msp: BTreeSet<NodeId>,
    /// Sibling-matched roots with their AND codes, considered only when
    /// the MSP comes back empty.
    root_siblings: Vec<(NodeId, BitCode)>,
    memo: HashMap<NodeId, MatchStrength>,
}

/// The Hasse diagram of services (concrete and abstract) under one
/// feature's subsumption order.
#[derive(Debug, Clone)]
pub struct ClusterSpace {
    feature: Feature,
    stamp: SpaceStamp,
    nodes: BTreeMap<NodeId, TaxonomyNode>,
    roots: BTreeSet<NodeId>,
    service_index: BTreeMap<ServiceId, NodeId>,
    next_id: u64,
    comparisons: u64,
}

impl ClusterSpace {
    pub fn new(feature: Feature, stamp: SpaceStamp) -> Self {
        ClusterSpace {
            feature,
            stamp,
            nodes: BTreeMap::new(),
            roots: BTreeSet::new(),
            service_index: BTreeMap::new(),
            next_id: 0,
            comparisons: 0,
        }
    }

    /// Reassembles a space from stored nodes (snapshot reload). The node
    /// set must already satisfy the structural invariants.
    pub fn from_parts(
        feature: Feature,
        stamp: SpaceStamp,
        nodes: Vec<TaxonomyNode>,
        comparisons: u64,
    ) -> Result<Self> {
        let mut space = ClusterSpace::new(feature, stamp);
        space.comparisons = comparisons;
        for node in nodes {
            space.next_id = space.next_id.max(node.id.0 + 1);
            if node.parents.is_empty() {
                space.roots.insert(node.id);
            }
            for sid in &node.services {
                if space.service_index.insert(sid.clone(), node.id).is_some() {
                    return Err(Error::DuplicateService(sid.0.clone()));
                }
            }
            space.nodes.insert(node.id, node);
        }
        space
            .check_invariants()
            .map_err(|e| Error::Malformed(format!("space snapshot: {e}")))?;
        Ok(space)
    }

    pub fn feature(&self) -> Feature {
        self.feature
    }

    pub fn stamp(&self) -> &SpaceStamp {
        &self.stamp
    }

    /// Total pairwise comparisons spent by insertions so far.
    pub fn comparisons(&self) -> u64 {
        self.comparisons
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, id: NodeId) -> Option<&TaxonomyNode> {
        self.nodes.get(&id)
    }

    pub fn nodes(&self) -> impl Iterator<Item = &TaxonomyNode> {
        self.nodes.values()
    }

    pub fn roots(&self) -> &BTreeSet<NodeId> {
        &self.roots
    }

    pub fn node_of_service(&self, id: &ServiceId) -> Option<NodeId> {
        self.service_index.get(id).copied()
    }

    pub fn service_count(&self) -> usize {
        self.service_index.len()
    }

    /// Inserts a service by its per-feature g-code.
    pub fn insert(&mut self, id: &ServiceId, gcode: &GCode) -> Result<PlacementReport> {
        if gcode.feature != self.feature {
            return Err(Error::FeatureMismatch(self.feature.label(), gcode.feature.label()));
        }
        self.reconcile_stamp(&gcode.stamp)?;
        if self.service_index.contains_key(id) {
            return Err(Error::DuplicateService(id.0.clone()));
        }
        let size_before = self.nodes.len();
        let before = self.comparisons;
        let (node, outcome) = self.place(&gcode.code, Payload::Concrete(id));
        Ok(PlacementReport {
            service: id.clone(),
            node,
            outcome,
            comparisons: self.comparisons - before,
            space_size_before: size_before,
        })
    }

    fn reconcile_stamp(&mut self, incoming: &SpaceStamp) -> Result<()> {
        if incoming == &self.stamp || incoming.compatible_with(&self.stamp) {
            Ok(())
        } else if self.stamp.compatible_with(incoming) {
            // incoming codes were computed after an append; widths only grow
            self.stamp = incoming.clone();
            Ok(())
        } else {
            Err(Error::StaleCode)
        }
    }

    fn place(&mut self, code: &BitCode, payload: Payload<'_>) -> (NodeId, PlacementOutcome) {
        let mut abstracts_created = Vec::new();
        loop {
            if self.nodes.is_empty() {
                let id = self.new_node(code.clone(), &payload);
                return (id, PlacementOutcome::FirstRoot);
            }
            let mut counter = 0u64;
            let search = self.msp_search(code, &mut counter);
            if let Some(target) = search.exact {
                self.comparisons += counter;
                self.merge_into(target, &payload);
                return (target, PlacementOutcome::MergedInto(target));
            }
            if search.msp.is_empty() {
                if let Some(cover) = pick_sibling_cover(&search.root_siblings) {
                    self.comparisons += counter;
                    // place the abstract cover first, then retry the sample
                    let (abs_node, abs_outcome) = self.place(&cover, Payload::Abstract);
                    if let PlacementOutcome::Placed { abstracts_created: nested, .. } = abs_outcome {
                        abstracts_created.extend(nested);
                    }
                    abstracts_created.push(abs_node);
                    continue;
                }
                // new root: LSC must be sought over the whole space
                let children = self.lsc_full(code, &search.memo, &mut counter);
                self.comparisons += counter;
                let id = self.wire(code.clone(), &payload, &BTreeSet::new(), &children);
                return (
                    id,
                    PlacementOutcome::Placed {
                        parents: BTreeSet::new(),
                        children,
                        abstracts_created,
                    },
                );
            }
            let children = self.lsc_restricted(code, &search.msp, &search.memo, &mut counter);
            self.comparisons += counter;
            let id = self.wire(code.clone(), &payload, &search.msp, &children);
            return (
                id,
                PlacementOutcome::Placed {
                    parents: search.msp,
                    children,
                    abstracts_created,
                },
            );
        }
    }

    /// Depth-first MSP search from the roots, descending through plug-in
    /// matches only. Each node is compared at most once per insertion.
    fn msp_search(&self, code: &BitCode, counter: &mut u64) -> MspSearch {
        let mut memo: HashMap<NodeId, MatchStrength> = HashMap::new();
        let mut dominators: BTreeSet<NodeId> = BTreeSet::new();
        let mut exact = None;
        let mut root_siblings = Vec::new();

        let mut stack: Vec<NodeId> = self.roots.iter().rev().copied().collect();
        while let Some(id) = stack.pop() {
            if memo.contains_key(&id) {
                continue;
            }
            *counter += 1;
            let strength = relate(code, &self.nodes[&id].gcode).strength;
            memo.insert(id, strength);
            match strength {
                MatchStrength::Exact => {
                    exact = Some(id);
                    break;
                }
                MatchStrength::PlugIn => {
                    dominators.insert(id);
                    stack.extend(self.nodes[&id].children.iter().rev());
                }
                MatchStrength::Sibling if self.roots.contains(&id) => {
                    root_siblings.push((id, code.and(&self.nodes[&id].gcode)));
                }
                _ => {}
            }
        }

        // Def-6 minimality: a dominator with a dominating child is not most
        // specific. The search visits every dominator, so the child test is
        // exhaustive.
        let msp = dominators
            .iter()
            .copied()
            .filter(|d| {
                self.nodes[d]
                    .children
                    .iter()
                    .all(|c| !dominators.contains(c))
            })
            .collect();
        MspSearch {
            exact,
            msp,
            root_siblings,
            memo,
        }
    }

    /// LSC search restricted to the region below the MSP. Classifications
    /// already made by the MSP phase are reused.
    fn lsc_restricted(
        &self,
        code: &BitCode,
        msp: &BTreeSet<NodeId>,
        memo: &HashMap<NodeId, MatchStrength>,
        counter: &mut u64,
    ) -> BTreeSet<NodeId> {
        let mut seen: BTreeSet<NodeId> = BTreeSet::new();
        let mut candidates: Vec<NodeId> = Vec::new();
        let mut stack: Vec<NodeId> = msp
            .iter()
            .flat_map(|m| self.nodes[m].children.iter().copied())
            .collect();
        while let Some(id) = stack.pop() {
            if !seen.insert(id) {
                continue;
            }
            let strength = match memo.get(&id) {
                Some(&s) => s,
                None => {
                    *counter += 1;
                    relate(code, &self.nodes[&id].gcode).strength
                }
            };
            match strength {
                MatchStrength::Subsume => candidates.push(id),
                _ => stack.extend(self.nodes[&id].children.iter().copied()),
            }
        }
        self.maximal_among(candidates)
    }

    /// LSC search over the whole space, used when the sample has no MSP.
    /// Nodes already classified during the MSP phase are skipped when that
    /// classification rules them out.
    fn lsc_full(
        &self,
        code: &BitCode,
        memo: &HashMap<NodeId, MatchStrength>,
        counter: &mut u64,
    ) -> BTreeSet<NodeId> {
        let mut candidates: Vec<NodeId> = Vec::new();
        for (&id, node) in &self.nodes {
            let strength = match memo.get(&id) {
                Some(&s) => s,
                None => {
                    *counter += 1;
                    relate(code, &node.gcode).strength
                }
            };
            if strength == MatchStrength::Subsume {
                candidates.push(id);
            }
        }
        self.maximal_among(candidates)
    }

    /// Def-7 maximality: a candidate dominated by another candidate is not
    /// least specific. Dominance among stored nodes coincides with graph
    /// reachability, so an ancestor walk decides it without code work.
    fn maximal_among(&self, candidates: Vec<NodeId>) -> BTreeSet<NodeId> {
        let cands: BTreeSet<NodeId> = candidates.into_iter().collect();
        cands
            .iter()
            .copied()
            .filter(|&c| {
                let mut stack: Vec<NodeId> = self.nodes[&c].parents.iter().copied().collect();
                let mut seen = BTreeSet::new();
                while let Some(p) = stack.pop() {
                    if !seen.insert(p) {
                        continue;
                    }
                    if cands.contains(&p) {
                        return false;
                    }
                    stack.extend(self.nodes[&p].parents.iter().copied());
                }
                true
            })
            .collect()
    }

    fn new_node(&mut self, code: BitCode, payload: &Payload<'_>) -> NodeId {
        let id = NodeId(self.next_id);
        self.next_id += 1;
        let (kind, services) = match payload {
            Payload::Concrete(sid) => {
                self.service_index.insert((*sid).clone(), id);
                (NodeKind::Concrete, BTreeSet::from([(*sid).clone()]))
            }
            Payload::Abstract => (NodeKind::Abstract, BTreeSet::new()),
        };
        self.nodes.insert(
            id,
            TaxonomyNode {
                id,
                kind,
                services,
                gcode: code,
                parents: BTreeSet::new(),
                children: BTreeSet::new(),
            },
        );
        self.roots.insert(id);
        id
    }

    fn merge_into(&mut self, target: NodeId, payload: &Payload<'_>) {
        if let Payload::Concrete(sid) = payload {
            let node = self.nodes.get_mut(&target).expect("merge target exists");
            node.services.insert((*sid).clone());
            node.kind = NodeKind::Concrete;
            self.service_index.insert((*sid).clone(), target);
        }
        // an abstract payload matching an existing code reuses that node
    }

    fn wire(
        &mut self,
        code: BitCode,
        payload: &Payload<'_>,
        parents: &BTreeSet<NodeId>,
        children: &BTreeSet<NodeId>,
    ) -> NodeId {
        let id = self.new_node(code, payload);
        for &p in parents {
            self.add_edge(p, id);
        }
        for &c in children {
            self.add_edge(id, c);
        }
        // edges from an MSP member straight to an LSC member are now
        // transitively implied through the new node
        for &p in parents {
            for &c in children {
                if self.nodes[&p].children.contains(&c) {
                    self.remove_edge(p, c);
                }
            }
        }
        id
    }

    fn add_edge(&mut self, parent: NodeId, child: NodeId) {
        debug_assert_ne!(parent, child);
        self.nodes.get_mut(&parent).expect("edge parent").children.insert(child);
        self.nodes.get_mut(&child).expect("edge child").parents.insert(parent);
        self.roots.remove(&child);
    }

    fn remove_edge(&mut self, parent: NodeId, child: NodeId) {
        self.nodes.get_mut(&parent).expect("edge parent").children.remove(&child);
        let child_node = self.nodes.get_mut(&child).expect("edge child");
        child_node.parents.remove(&parent);
        if child_node.parents.is_empty() {
            self.roots.insert(child);
        }
    }

    /// Removes one service. The node survives while other services share
    /// it; afterwards it is excised with its parents re-linked to its
    /// children wherever that does not re-introduce a transitive edge.
    /// Abstract parents left with fewer than two children are pruned
    /// recursively.
    pub fn remove(&mut self, id: &ServiceId) -> Result<()> {
        let node_id = self
            .service_index
            .remove(id)
            .ok_or_else(|| Error::UnknownService(id.0.clone()))?;
        let node = self.nodes.get_mut(&node_id).expect("indexed node exists");
        node.services.remove(id);
        if !node.services.is_empty() {
            return Ok(());
        }
        let orphaned_parents = self.excise(node_id);
        let mut worklist: Vec<NodeId> = orphaned_parents.into_iter().collect();
        while let Some(p) = worklist.pop() {
            let prune = match self.nodes.get(&p) {
                Some(n) => n.kind == NodeKind::Abstract && n.children.len() < 2,
                None => false,
            };
            if prune {
                worklist.extend(self.excise(p));
            }
        }
        Ok(())
    }

    /// Unlinks and deletes a node, reconnecting parents to children unless
    /// a path between them survives elsewhere. Returns the former parents.
    fn excise(&mut self, id: NodeId) -> BTreeSet<NodeId> {
        let node = self.nodes.remove(&id).expect("excised node exists");
        self.roots.remove(&id);
        for &p in &node.parents {
            self.nodes.get_mut(&p).expect("parent").children.remove(&id);
        }
        for &c in &node.children {
            let cn = self.nodes.get_mut(&c).expect("child");
            cn.parents.remove(&id);
            if cn.parents.is_empty() {
                self.roots.insert(c);
            }
        }
        for &p in &node.parents {
            for &c in &node.children {
                if !self.nodes[&p].children.contains(&c) && !self.reachable(p, c) {
                    self.add_edge(p, c);
                }
            }
        }
        node.parents
    }

    /// True when `to` is reachable from `from` along child edges.
    pub fn reachable(&self, from: NodeId, to: NodeId) -> bool {
        let mut stack = vec![from];
        let mut seen = BTreeSet::new();
        while let Some(n) = stack.pop() {
            if n == to {
                return true;
            }
            if !seen.insert(n) {
                continue;
            }
            stack.extend(self.nodes[&n].children.iter().copied());
        }
        false
    }

    /// Def-6 set for an external code: the most specific nodes dominating
    /// it. For an exact match this is the matched node's parent set (the
    /// merge path).
    pub fn find_msp(&self, code: &BitCode) -> BTreeSet<NodeId> {
        let mut counter = 0;
        let search = self.msp_search(code, &mut counter);
        match search.exact {
            Some(n) => self.nodes[&n].parents.clone(),
            None => search.msp,
        }
    }

    /// Def-7 set for an external code given its MSP: the least specific
    /// nodes it dominates.
    pub fn find_lsc(&self, code: &BitCode, msp: &BTreeSet<NodeId>) -> BTreeSet<NodeId> {
        let mut counter = 0;
        if msp.is_empty() {
            self.lsc_full(code, &HashMap::new(), &mut counter)
        } else {
            self.lsc_restricted(code, msp, &HashMap::new(), &mut counter)
        }
    }

    /// One taxonomy per root: the distinct services reachable from it.
    pub fn taxonomies(&self) -> Vec<(NodeId, BTreeSet<ServiceId>)> {
        self.roots
            .iter()
            .map(|&root| {
                let mut services = BTreeSet::new();
                let mut stack = vec![root];
                let mut seen = BTreeSet::new();
                while let Some(n) = stack.pop() {
                    if !seen.insert(n) {
                        continue;
                    }
                    let node = &self.nodes[&n];
                    services.extend(node.services.iter().cloned());
                    stack.extend(node.children.iter().copied());
                }
                (root, services)
            })
            .collect()
    }

    /// Canonical Hasse diagram over the concrete g-code equivalence
    /// classes, computed from codes alone. Identical across insertion
    /// orders of the same service set.
    pub fn canonical_concrete(&self) -> CanonicalTopology {
        let concrete: Vec<&TaxonomyNode> = self
            .nodes
            .values()
            .filter(|n| n.kind == NodeKind::Concrete)
            .collect();
        let mut nodes: Vec<CanonicalNode> = concrete
            .iter()
            .map(|n| CanonicalNode {
                gcode_hex: n.gcode.to_hex(),
                kind: NodeKind::Concrete.label(),
                services: n.services.iter().map(|s| s.0.clone()).collect(),
            })
            .collect();
        nodes.sort();
        let mut edges = Vec::new();
        for a in &concrete {
            for b in &concrete {
                if a.id == b.id || a.gcode == b.gcode {
                    continue;
                }
                // parent->child edge when a strictly dominates b...
                if !b.gcode.absorbs(&a.gcode) {
                    continue;
                }
                // ...with no concrete class strictly between
                let direct = concrete.iter().all(|m| {
                    m.id == a.id
                        || m.id == b.id
                        || m.gcode == a.gcode
                        || m.gcode == b.gcode
                        || !(m.gcode.absorbs(&a.gcode) && b.gcode.absorbs(&m.gcode))
                });
                if direct {
                    edges.push((a.gcode.to_hex(), b.gcode.to_hex()));
                }
            }
        }
        edges.sort();
        edges.dedup();
        CanonicalTopology { nodes, edges }
    }

    /// Canonical rendering of the full stored topology, abstracts included.
    pub fn canonical_full(&self) -> CanonicalTopology {
        let mut nodes: Vec<CanonicalNode> = self
            .nodes
            .values()
            .map(|n| CanonicalNode {
                gcode_hex: n.gcode.to_hex(),
                kind: n.kind.label(),
                services: n.services.iter().map(|s| s.0.clone()).collect(),
            })
            .collect();
        nodes.sort();
        let mut edges: Vec<(String, String)> = self
            .nodes
            .values()
            .flat_map(|n| {
                n.children
                    .iter()
                    .map(|c| (n.gcode.to_hex(), self.nodes[c].gcode.to_hex()))
            })
            .collect();
        edges.sort();
        edges.dedup();
        CanonicalTopology { nodes, edges }
    }

    /// Pairs of concrete nodes in sibling relation that share no common
    /// ancestor node. Reported by order-independence checks; root-level
    /// sibling pairs are always covered by construction.
    pub fn uncovered_sibling_pairs(&self) -> Vec<(NodeId, NodeId)> {
        let ids: Vec<NodeId> = self
            .nodes
            .values()
            .filter(|n| n.kind == NodeKind::Concrete)
            .map(|n| n.id)
            .collect();
        let ancestors: BTreeMap<NodeId, BTreeSet<NodeId>> = ids
            .iter()
            .map(|&id| (id, self.ancestor_closure(id)))
            .collect();
        let mut out = Vec::new();
        for (i, &a) in ids.iter().enumerate() {
            for &b in &ids[i + 1..] {
                let rel = relate(&self.nodes[&a].gcode, &self.nodes[&b].gcode);
                if rel.strength == MatchStrength::Sibling
                    && ancestors[&a].intersection(&ancestors[&b]).next().is_none()
                {
                    out.push((a, b));
                }
            }
        }
        out
    }

    fn ancestor_closure(&self, id: NodeId) -> BTreeSet<NodeId> {
        let mut out = BTreeSet::new();
        let mut stack: Vec<NodeId> = self.nodes[&id].parents.iter().copied().collect();
        while let Some(n) = stack.pop() {
            if out.insert(n) {
                stack.extend(self.nodes[&n].parents.iter().copied());
            }
        }
        out
    }

    /// Structural self-check used by the property suites: edge mirror
    /// consistency, acyclicity, per-edge order soundness, the Hasse
    /// no-transitive-edge property, root bookkeeping, distinct node codes,
    /// and service-index agreement.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        // edge mirrors, self-edges, kind/service agreement
        for node in self.nodes.values() {
            if node.parents.contains(&node.id) || node.children.contains(&node.id) {
                return Err(format!("self edge on {}", node.id));
            }
            match node.kind {
                NodeKind::Concrete if node.services.is_empty() => {
                    return Err(format!("concrete node {} without services", node.id));
                }
                NodeKind::Abstract if !node.services.is_empty() => {
                    return Err(format!("abstract node {} holding services", node.id));
                }
                _ => {}
            }
            for p in &node.parents {
                let pn = self.nodes.get(p).ok_or(format!("dangling parent of {}", node.id))?;
                if !pn.children.contains(&node.id) {
                    return Err(format!("edge {}->{} not mirrored", p, node.id));
                }
                let rel = relate(&node.gcode, &pn.gcode).strength;
                if rel != MatchStrength::PlugIn {
                    return Err(format!("edge {p}->{} violates the order: {rel}", node.id));
                }
            }
            for c in &node.children {
                let cn = self.nodes.get(c).ok_or(format!("dangling child of {}", node.id))?;
                if !cn.parents.contains(&node.id) {
                    return Err(format!("edge {}->{} not mirrored", node.id, c));
                }
            }
            if node.parents.is_empty() != self.roots.contains(&node.id) {
                return Err(format!("root bookkeeping off for {}", node.id));
            }
        }
        for (sid, nid) in &self.service_index {
            match self.nodes.get(nid) {
                Some(n) if n.services.contains(sid) => {}
                _ => return Err(format!("service index broken for {sid}")),
            }
        }
        for node in self.nodes.values() {
            for sid in &node.services {
                if self.service_index.get(sid) != Some(&node.id) {
                    return Err(format!("service {sid} not indexed to {}", node.id));
                }
            }
        }
        // distinct codes
        let mut codes: Vec<&BitCode> = self.nodes.values().map(|n| &n.gcode).collect();
        codes.sort();
        if codes.windows(2).any(|w| w[0] == w[1]) {
            return Err("duplicate node codes".into());
        }

        // reachability closure over a dense index (also proves acyclicity)
        let ids: Vec<NodeId> = self.nodes.keys().copied().collect();
        let index: HashMap<NodeId, usize> = ids.iter().enumerate().map(|(i, &n)| (n, i)).collect();
        let n = ids.len();
        let words = n.div_ceil(64);
        let mut indegree: Vec<usize> = ids.iter().map(|id| self.nodes[id].parents.len()).collect();
        let mut order: Vec<usize> = (0..n).filter(|&i| indegree[i] == 0).collect();
        let mut head = 0;
        while head < order.len() {
            let i = order[head];
            head += 1;
            for c in &self.nodes[&ids[i]].children {
                let ci = index[c];
                indegree[ci] -= 1;
                if indegree[ci] == 0 {
                    order.push(ci);
                }
            }
        }
        if order.len() != n {
            return Err("cycle detected".into());
        }
        let mut reach: Vec<Vec<u64>> = vec![vec![0u64; words]; n];
        for &i in order.iter().rev() {
            for c in &self.nodes[&ids[i]].children {
                let ci = index[c];
                reach[i][ci / 64] |= 1 << (ci % 64);
                let (left, right) = if i < ci {
                    let (a, b) = reach.split_at_mut(ci);
                    (&mut a[i], &b[0])
                } else {
                    let (a, b) = reach.split_at_mut(i);
                    (&mut b[0], &a[ci])
                };
                for (w, r) in left.iter_mut().zip(right.iter()) {
                    *w |= r;
                }
            }
        }
        for node in self.nodes.values() {
            for c in &node.children {
                let ci = index[c];
                for c2 in &node.children {
                    if c2 == c {
                        continue;
                    }
                    if reach[index[c2]][ci / 64] >> (ci % 64) & 1 == 1 {
                        return Err(format!("transitive edge {}->{} via {}", node.id, c, c2));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Chooses the sibling cover for a sample with an empty MSP: the most
/// specific shared abstraction among the sibling-matched roots, ties broken
/// by code value then root id for determinism.
fn pick_sibling_cover(root_siblings: &[(NodeId, BitCode)]) -> Option<BitCode> {
    root_siblings
        .iter()
        .max_by(|(ida, a), (idb, b)| {
            a.count_ones()
                .cmp(&b.count_ones())
                .then_with(|| b.cmp(a))
                .then_with(|| idb.cmp(ida))
        })
        .map(|(_, code)| code.clone())
}

/// Builds one feature's cluster space by repeated insertion in iteration
/// order.
pub fn converge<'a, I>(
    services: I,
    feature: Feature,
    stamp: SpaceStamp,
) -> Result<(ClusterSpace, Vec<PlacementReport>)>
where
    I: IntoIterator<Item = &'a ServiceDescription>,
{
    let mut space = ClusterSpace::new(feature, stamp);
    let mut reports = Vec::new();
    for svc in services {
        reports.push(space.insert(&svc.id, svc.gcode(feature))?);
    }
    Ok((space, reports))
}

/// Builds both feature spaces over the same batch.
pub fn converge_both<'a, I>(
    services: I,
    stamp: &SpaceStamp,
) -> Result<((ClusterSpace, Vec<PlacementReport>), (ClusterSpace, Vec<PlacementReport>))>
where
    I: IntoIterator<Item = &'a ServiceDescription> + Clone,
{
    let i = converge(services.clone(), Feature::Input, stamp.clone())?;
    let o = converge(services, Feature::Output, stamp.clone())?;
    Ok((i, o))
}
