//! The Bag-of-Parts e-graph.
//!
//! Each e-class holds every known way of fabricating one bag of parts. Atomic
//! e-nodes pack the whole bag onto a single piece of stock; union e-nodes
//! combine the arrangements of two smaller bags. Classes are keyed by
//! [`BopKey`] and never merge, and structurally identical e-nodes are stored
//! once, so sub-arrangements are shared across designs.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::{self, Write as _};
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fabrication::{ArrangementTerm, AtomicPlans, Packing};
use crate::fingerprint::Fingerprint;
use crate::model::{BopKey, DesignSpaceModel, DesignVector};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EClassId(pub u32);

impl fmt::Display for EClassId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "E{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ENodeId(pub u32);

#[derive(Debug)]
pub enum ENode {
    Atomic {
        packing: Packing,
        plans: OnceLock<Arc<AtomicPlans>>,
    },
    Union {
        left: EClassId,
        right: EClassId,
    },
}

impl ENode {
    pub fn is_atomic(&self) -> bool {
        matches!(self, ENode::Atomic { .. })
    }

    pub fn children(&self) -> Option<(EClassId, EClassId)> {
        match self {
            ENode::Atomic { .. } => None,
            ENode::Union { left, right } => Some((*left, *right)),
        }
    }
}

#[derive(Debug)]
struct NodeEntry {
    class: EClassId,
    fingerprint: Fingerprint,
    node: ENode,
}

#[derive(Clone, Debug)]
pub struct EClass {
    pub id: EClassId,
    pub key: BopKey,
    pub nodes: Vec<ENodeId>,
    /// Distinct arrangements ever encoded in this class.
    pub explored_count: u64,
    pub e_score: f64,
    pub i_score: f64,
    pub p_score: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EGraphStats {
    pub n_classes: usize,
    pub n_enodes: usize,
    pub n_roots: usize,
    pub n_atomic: usize,
    pub n_union: usize,
}

#[derive(Debug, Default)]
pub struct BopEGraph {
    classes: BTreeMap<EClassId, EClass>,
    by_key: HashMap<BopKey, EClassId>,
    nodes: Vec<Option<NodeEntry>>,
    by_fingerprint: HashMap<Fingerprint, ENodeId>,
    roots: BTreeMap<EClassId, BTreeSet<DesignVector>>,
    next_class: u32,
}

/// Removal of classes one at a time with their cascade. A removal that
/// would reach a protected class is undone.
pub struct Cascade<'g> {
    graph: &'g BopEGraph,
    parents: HashMap<EClassId, Vec<ENodeId>>,
    live: HashMap<EClassId, usize>,
    dead_classes: BTreeSet<EClassId>,
    dead_nodes: BTreeSet<ENodeId>,
}

enum Undo {
    Class(EClassId),
    Node(ENodeId),
    Count(EClassId),
}

impl<'g> Cascade<'g> {
    pub fn new(graph: &'g BopEGraph) -> Self {
        let mut parents: HashMap<EClassId, Vec<ENodeId>> = HashMap::new();
        for (id, e) in graph.live_nodes() {
            if let ENode::Union { left, right } = e.node {
                parents.entry(left).or_default().push(id);
                if right != left {
                    parents.entry(right).or_default().push(id);
                }
            }
        }
        Cascade {
            graph,
            parents,
            live: graph.classes.values().map(|c| (c.id, c.nodes.len())).collect(),
            dead_classes: BTreeSet::new(),
            dead_nodes: BTreeSet::new(),
        }
    }

    /// Removes `class` and its cascade unless that reaches `protected`.
    /// Returns whether the removal took place.
    pub fn remove(&mut self, class: EClassId, protected: &BTreeSet<EClassId>) -> bool {
        if !self.graph.is_live(class) || self.dead_classes.contains(&class) {
            return true;
        }
        let mut log = Vec::new();
        let mut queue = vec![class];
        while let Some(c) = queue.pop() {
            if protected.contains(&c) {
                self.undo(log);
                return false;
            }
            if !self.dead_classes.insert(c) {
                continue;
            }
            log.push(Undo::Class(c));
            for &n in &self.graph.classes[&c].nodes {
                if self.dead_nodes.insert(n) {
                    log.push(Undo::Node(n));
                }
            }
            for &u in self.parents.get(&c).map(Vec::as_slice).unwrap_or_default() {
                if !self.dead_nodes.insert(u) {
                    continue;
                }
                log.push(Undo::Node(u));
                let owner = self.graph.nodes[u.0 as usize].as_ref().expect("live").class;
                let left = self.live.get_mut(&owner).expect("live class");
                *left -= 1;
                log.push(Undo::Count(owner));
                if *left == 0 && !self.dead_classes.contains(&owner) {
                    queue.push(owner);
                }
            }
        }
        true
    }

    fn undo(&mut self, log: Vec<Undo>) {
        for u in log.into_iter().rev() {
            match u {
                Undo::Class(c) => {
                    self.dead_classes.remove(&c);
                }
                Undo::Node(n) => {
                    self.dead_nodes.remove(&n);
                }
                Undo::Count(c) => *self.live.get_mut(&c).expect("live class") += 1,
            }
        }
    }

    pub fn finish(self) -> (BTreeSet<EClassId>, BTreeSet<ENodeId>) {
        (self.dead_classes, self.dead_nodes)
    }
}

impl BopEGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn class(&self, id: EClassId) -> Option<&EClass> {
        self.classes.get(&id)
    }

    pub(crate) fn class_mut(&mut self, id: EClassId) -> Option<&mut EClass> {
        self.classes.get_mut(&id)
    }

    /// Live classes in id order.
    pub fn classes(&self) -> impl Iterator<Item = &EClass> {
        self.classes.values()
    }

    pub fn class_ids(&self) -> Vec<EClassId> {
        self.classes.keys().copied().collect()
    }

    pub fn class_for_key(&self, key: &BopKey) -> Option<EClassId> {
        self.by_key.get(key).copied()
    }

    pub fn is_live(&self, id: EClassId) -> bool {
        self.classes.contains_key(&id)
    }

    pub fn node(&self, id: ENodeId) -> Option<&ENode> {
        self.entry(id).map(|e| &e.node)
    }

    pub fn node_class(&self, id: ENodeId) -> Option<EClassId> {
        self.entry(id).map(|e| e.class)
    }

    pub fn node_fingerprint(&self, id: ENodeId) -> Option<Fingerprint> {
        self.entry(id).map(|e| e.fingerprint)
    }

    pub fn node_by_fingerprint(&self, fp: Fingerprint) -> Option<ENodeId> {
        self.by_fingerprint.get(&fp).copied()
    }

    fn entry(&self, id: ENodeId) -> Option<&NodeEntry> {
        self.nodes.get(id.0 as usize).and_then(Option::as_ref)
    }

    fn live_nodes(&self) -> impl Iterator<Item = (ENodeId, &NodeEntry)> {
        self.nodes
            .iter()
            .enumerate()
            .filter_map(|(i, e)| e.as_ref().map(|e| (ENodeId(i as u32), e)))
    }

    /// Root classes in id order with the designs registered on each.
    pub fn roots(&self) -> &BTreeMap<EClassId, BTreeSet<DesignVector>> {
        &self.roots
    }

    pub fn root_classes(&self) -> Vec<EClassId> {
        self.roots.keys().copied().collect()
    }

    pub fn is_root(&self, id: EClassId) -> bool {
        self.roots.contains_key(&id)
    }

    /// The class holding `design`, if registered.
    pub fn root_of(&self, design: &DesignVector) -> Option<EClassId> {
        self.roots
            .iter()
            .find(|(_, ds)| ds.contains(design))
            .map(|(c, _)| *c)
    }

    fn union_fingerprint(&self, a: EClassId, b: EClassId) -> (EClassId, EClassId, Fingerprint) {
        let (l, r) = if self.classes[&a].key <= self.classes[&b].key {
            (a, b)
        } else {
            (b, a)
        };
        let mut bytes = vec![b'U'];
        bytes.extend_from_slice(&self.classes[&l].key.to_bytes());
        bytes.push(0);
        bytes.extend_from_slice(&self.classes[&r].key.to_bytes());
        (l, r, Fingerprint::of(&bytes))
    }

    fn atomic_fingerprint(packing: &Packing) -> Fingerprint {
        let mut bytes = vec![b'A'];
        bytes.extend_from_slice(&packing.fingerprint().to_bytes());
        Fingerprint::of(&bytes)
    }

    fn class_for(&mut self, key: BopKey) -> EClassId {
        if let Some(&id) = self.by_key.get(&key) {
            return id;
        }
        let id = EClassId(self.next_class);
        self.next_class += 1;
        self.by_key.insert(key.clone(), id);
        self.classes.insert(
            id,
            EClass {
                id,
                key,
                nodes: Vec::new(),
                explored_count: 0,
                e_score: 0.0,
                i_score: 0.0,
                p_score: 0.0,
            },
        );
        id
    }

    fn add_node(&mut self, class: EClassId, fingerprint: Fingerprint, node: ENode) -> ENodeId {
        let id = ENodeId(self.nodes.len() as u32);
        self.nodes.push(Some(NodeEntry {
            class,
            fingerprint,
            node,
        }));
        self.by_fingerprint.insert(fingerprint, id);
        let c = self.classes.get_mut(&class).expect("class just resolved");
        c.nodes.push(id);
        c.explored_count += 1;
        id
    }

    /// Inserts a term bottom-up, reusing existing e-nodes, and returns the
    /// class of its bag of parts.
    pub fn insert_arrangement(&mut self, term: &ArrangementTerm) -> Result<EClassId> {
        Ok(self.insert_node(term)?.0)
    }

    /// Like [`Self::insert_arrangement`], also returning the e-node the term's root maps to.
    pub fn insert_node(&mut self, term: &ArrangementTerm) -> Result<(EClassId, ENodeId)> {
        match term {
            ArrangementTerm::Atomic(p) => {
                let fp = Self::atomic_fingerprint(p);
                if let Some(&n) = self.by_fingerprint.get(&fp) {
                    return Ok((self.entry(n).expect("indexed node is live").class, n));
                }
                p.validate()?;
                let class = self.class_for(p.key());
                let n = self.add_node(
                    class,
                    fp,
                    ENode::Atomic {
                        packing: p.clone(),
                        plans: OnceLock::new(),
                    },
                );
                Ok((class, n))
            }
            ArrangementTerm::Union(a, b) => {
                let (ca, _) = self.insert_node(a)?;
                let (cb, _) = self.insert_node(b)?;
                let (left, right, fp) = self.union_fingerprint(ca, cb);
                if let Some(&n) = self.by_fingerprint.get(&fp) {
                    return Ok((self.entry(n).expect("indexed node is live").class, n));
                }
                let key = self.classes[&left].key.union(&self.classes[&right].key);
                let class = self.class_for(key);
                let n = self.add_node(class, fp, ENode::Union { left, right });
                Ok((class, n))
            }
        }
    }

    /// The e-node a term's root maps to, if the whole term is in the graph.
    pub fn lookup(&self, term: &ArrangementTerm) -> Option<(EClassId, ENodeId)> {
        let fp = match term {
            ArrangementTerm::Atomic(p) => Self::atomic_fingerprint(p),
            ArrangementTerm::Union(a, b) => {
                let (ca, _) = self.lookup(a)?;
                let (cb, _) = self.lookup(b)?;
                self.union_fingerprint(ca, cb).2
            }
        };
        let n = self.node_by_fingerprint(fp)?;
        Some((self.entry(n)?.class, n))
    }

    /// The e-node chosen in each class a term passes through. `None` if the
    /// term is not in the graph or uses two arrangements of the same bag.
    pub fn term_support(&self, term: &ArrangementTerm) -> Option<BTreeMap<EClassId, ENodeId>> {
        fn walk(g: &BopEGraph, t: &ArrangementTerm, out: &mut BTreeMap<EClassId, ENodeId>) -> Option<()> {
            let (c, n) = g.lookup(t)?;
            if *out.entry(c).or_insert(n) != n {
                return None;
            }
            if let ArrangementTerm::Union(a, b) = t {
                walk(g, a, out)?;
                walk(g, b, out)?;
            }
            Some(())
        }
        let mut out = BTreeMap::new();
        walk(self, term, &mut out)?;
        Some(out)
    }

    /// Records `design` as realized by root class `class`. Returns whether the
    /// pair is new.
    pub fn register_root(&mut self, model: &DesignSpaceModel, design: DesignVector, class: EClassId) -> Result<bool> {
        let Some(c) = self.classes.get(&class) else {
            return Err(Error::DeadClass(class));
        };
        if model.instantiate_design(&design)?.key() != c.key {
            return Err(Error::RootKeyMismatch(class));
        }
        Ok(self.roots.entry(class).or_default().insert(design))
    }

    /// Classes and e-nodes that removing `doomed` would take with it: every
    /// union referencing a removed class goes, and a class left without
    /// e-nodes is removed in turn.
    pub fn cascade(&self, doomed: &BTreeSet<EClassId>) -> (BTreeSet<EClassId>, BTreeSet<ENodeId>) {
        let mut c = Cascade::new(self);
        for &d in doomed {
            c.remove(d, &BTreeSet::new());
        }
        c.finish()
    }

    /// Removes `doomed` and everything that depends on it. Fails without
    /// changing the graph if a protected class would be removed, directly or
    /// by cascade. Returns the number of e-nodes removed.
    pub fn contract(&mut self, doomed: &BTreeSet<EClassId>, protected: &BTreeSet<EClassId>) -> Result<usize> {
        if let Some(c) = doomed.intersection(protected).next() {
            return Err(Error::Protected(*c));
        }
        let (dead_classes, dead_nodes) = self.cascade(doomed);
        if let Some(c) = dead_classes.intersection(protected).next() {
            return Err(Error::Protected(*c));
        }
        for n in &dead_nodes {
            if let Some(e) = self.nodes[n.0 as usize].take() {
                self.by_fingerprint.remove(&e.fingerprint);
            }
        }
        for c in &dead_classes {
            if let Some(class) = self.classes.remove(c) {
                self.by_key.remove(&class.key);
            }
            self.roots.remove(c);
        }
        for class in self.classes.values_mut() {
            class.nodes.retain(|n| !dead_nodes.contains(n));
        }
        Ok(dead_nodes.len())
    }

    pub fn stats(&self) -> EGraphStats {
        let mut s = EGraphStats {
            n_classes: self.classes.len(),
            n_roots: self.roots.len(),
            ..EGraphStats::default()
        };
        for (_, e) in self.live_nodes() {
            s.n_enodes += 1;
            if e.node.is_atomic() {
                s.n_atomic += 1;
            } else {
                s.n_union += 1;
            }
        }
        s
    }

    /// Full consistency check: every e-node's bag recomputed bottom-up equals
    /// its class key, no reference to a dead class, no empty class, indexes
    /// coherent. Union children are strictly smaller bags, so the graph is
    /// acyclic by construction; that is checked too.
    pub fn audit(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Violation(m));
        for (key, id) in &self.by_key {
            match self.classes.get(id) {
                Some(c) if &c.key == key => {}
                _ => return fail(format!("key index points {id} at the wrong class")),
            }
        }
        let mut members = 0;
        for c in self.classes.values() {
            if c.nodes.is_empty() {
                return fail(format!("{} is empty", c.id));
            }
            if self.by_key.get(&c.key) != Some(&c.id) {
                return fail(format!("{} missing from the key index", c.id));
            }
            for &n in &c.nodes {
                let Some(e) = self.entry(n) else {
                    return fail(format!("{} lists a removed e-node", c.id));
                };
                if e.class != c.id {
                    return fail(format!("e-node {} listed in {} but owned by {}", n.0, c.id, e.class));
                }
                members += 1;
                let key = match &e.node {
                    ENode::Atomic { packing, .. } => {
                        packing.validate()?;
                        packing.key()
                    }
                    ENode::Union { left, right } => {
                        let (Some(l), Some(r)) = (self.classes.get(left), self.classes.get(right)) else {
                            return fail(format!("union in {} references a dead class", c.id));
                        };
                        if l.key.len() >= c.key.len() || r.key.len() >= c.key.len() {
                            return fail(format!("union in {} has a child at least as large", c.id));
                        }
                        l.key.union(&r.key)
                    }
                };
                if key != c.key {
                    return fail(format!("e-node {} does not represent the bag of {}", n.0, c.id));
                }
            }
        }
        let live = self.live_nodes().count();
        if live != members || self.by_fingerprint.len() != live {
            return fail("e-node arena, class lists and fingerprint index disagree".into());
        }
        for (fp, n) in &self.by_fingerprint {
            if self.entry(*n).map(|e| e.fingerprint) != Some(*fp) {
                return fail(format!("fingerprint index points at stale e-node {}", n.0));
            }
        }
        for (c, designs) in &self.roots {
            if !self.is_live(*c) {
                return fail(format!("root {c} is dead"));
            }
            if designs.is_empty() {
                return fail(format!("root {c} has no design"));
            }
        }
        Ok(())
    }

    /// GraphViz rendering: one cluster per class, atomic e-nodes as boxes,
    /// union e-nodes with edges to their child classes.
    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph bop {\n  compound=true;\n  node [fontsize=10];\n");
        for c in self.classes.values() {
            let root = if self.is_root(c.id) { ", style=bold" } else { "" };
            let _ = writeln!(s, "  subgraph cluster_{} {{\n    label=\"{} {}\"{};", c.id.0, c.id, c.key, root.replace(", ", "; "));
            for &n in &c.nodes {
                let e = self.entry(n).expect("listed nodes are live");
                match &e.node {
                    ENode::Atomic { packing, .. } => {
                        let _ = writeln!(s, "    n{} [shape=box, label=\"{}\"];", n.0, packing.stock.id);
                    }
                    ENode::Union { .. } => {
                        let _ = writeln!(s, "    n{} [shape=circle, label=\"∪\"];", n.0);
                    }
                }
            }
            let _ = writeln!(s, "  }}");
        }
        for (id, e) in self.live_nodes() {
            if let ENode::Union { left, right } = e.node {
                for child in [left, right] {
                    let target = self.classes[&child].nodes[0];
                    let _ = writeln!(s, "  n{} -> n{} [lhead=cluster_{}];", id.0, target.0, child.0);
                }
            }
        }
        s.push_str("}\n");
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{parse_model, ConcretePart, PartShape};

    fn model() -> DesignSpaceModel {
        parse_model(
            r#"{
            "templates": [
                {"id": "x", "shape": {"bar": {"len": 500}}, "material": "pine"},
                {"id": "y", "shape": {"bar": {"len": 300}}, "material": "pine"},
                {"id": "z", "shape": {"bar": {"len": 250}}, "material": "pine"}
            ],
            "connectors": [{"id": "c", "variants": [[], [{"template": "z", "shape": {"bar": {"len": 260}}}]]}],
            "stock": [
                {"id": "long", "shape": {"bar": {"len": 1500}}, "price": 8, "kerf": 3, "material": "pine"},
                {"id": "short", "shape": {"bar": {"len": 600}}, "price": 4, "kerf": 3, "material": "pine"}
            ],
            "tools": [{"id": "chop", "kind": "chopsaw", "cut_time": 20}]
        }"#,
        )
        .unwrap()
    }

    fn part(id: &str, len: f64) -> ConcretePart {
        ConcretePart::new(id, PartShape::bar(len), "pine")
    }

    fn atomic(m: &DesignSpaceModel, stock: usize, parts: &[ConcretePart]) -> ArrangementTerm {
        let seq: Vec<_> = parts.iter().map(|p| (p.clone(), false)).collect();
        ArrangementTerm::Atomic(Packing::pack(&m.stock[stock], &seq).unwrap())
    }

    #[test]
    fn empty_graph_stats() {
        assert_eq!(BopEGraph::new().stats(), EGraphStats::default());
    }

    #[test]
    fn atomic_insert_is_idempotent() {
        let m = model();
        let mut g = BopEGraph::new();
        let t = atomic(&m, 0, &[part("x", 500.0), part("y", 300.0)]);
        let a = g.insert_arrangement(&t).unwrap();
        assert_eq!(
            g.stats(),
            EGraphStats {
                n_classes: 1,
                n_enodes: 1,
                n_roots: 0,
                n_atomic: 1,
                n_union: 0
            }
        );
        let b = g.insert_arrangement(&t).unwrap();
        assert_eq!(a, b);
        assert_eq!(g.stats().n_enodes, 1);
        assert_eq!(g.class(a).unwrap().explored_count, 1);
    }

    #[test]
    fn union_is_commutative() {
        let m = model();
        let mut g = BopEGraph::new();
        let a = atomic(&m, 0, &[part("x", 500.0)]);
        let b = atomic(&m, 1, &[part("y", 300.0)]);
        let u1 = g.insert_arrangement(&ArrangementTerm::union(a.clone(), b.clone())).unwrap();
        let u2 = g.insert_arrangement(&ArrangementTerm::union(b, a)).unwrap();
        assert_eq!(u1, u2);
        assert_eq!(g.stats().n_union, 1);
        g.audit().unwrap();
    }

    #[test]
    fn self_union_allowed() {
        let m = model();
        let mut g = BopEGraph::new();
        let y = atomic(&m, 1, &[part("y", 300.0)]);
        let c = g.insert_arrangement(&ArrangementTerm::union(y.clone(), y)).unwrap();
        assert_eq!(g.class(c).unwrap().key.len(), 2);
        g.audit().unwrap();
    }

    #[test]
    fn roots_are_sets_and_checked() {
        let m = model();
        let mut g = BopEGraph::new();
        let bag = m.instantiate_design(&DesignVector(vec![0])).unwrap();
        let t = ArrangementTerm::from_packings(vec![
            Packing::pack(&m.stock[0], &bag.parts().iter().map(|p| (p.clone(), false)).collect::<Vec<_>>()).unwrap(),
        ])
        .unwrap();
        let c = g.insert_arrangement(&t).unwrap();
        assert!(g.register_root(&m, DesignVector(vec![0]), c).unwrap());
        assert!(!g.register_root(&m, DesignVector(vec![0]), c).unwrap());
        assert!(matches!(
            g.register_root(&m, DesignVector(vec![1]), c),
            Err(Error::RootKeyMismatch(_))
        ));
        assert!(matches!(
            g.register_root(&m, DesignVector(vec![0]), EClassId(99)),
            Err(Error::DeadClass(_))
        ));
        assert_eq!(g.stats().n_roots, 1);
    }

    #[test]
    fn contraction_cascades() {
        let m = model();
        let mut g = BopEGraph::new();
        let x = atomic(&m, 0, &[part("x", 500.0)]);
        let y = atomic(&m, 1, &[part("y", 300.0)]);
        let xy = atomic(&m, 0, &[part("x", 500.0), part("y", 300.0)]);
        let parent = g.insert_arrangement(&ArrangementTerm::union(x, y.clone())).unwrap();
        g.insert_arrangement(&xy).unwrap();
        let cy = g.insert_arrangement(&y).unwrap();
        assert_eq!(g.contract(&BTreeSet::new(), &BTreeSet::new()).unwrap(), 0);
        let removed = g.contract(&BTreeSet::from([cy]), &BTreeSet::new()).unwrap();
        assert_eq!(removed, 2);
        assert!(g.is_live(parent));
        assert_eq!(g.class(parent).unwrap().nodes.len(), 1);
        g.audit().unwrap();
    }

    #[test]
    fn contraction_refuses_to_empty_protected() {
        let m = model();
        let mut g = BopEGraph::new();
        let x = atomic(&m, 0, &[part("x", 500.0)]);
        let y = atomic(&m, 1, &[part("y", 300.0)]);
        let parent = g.insert_arrangement(&ArrangementTerm::union(x, y.clone())).unwrap();
        let cy = g.insert_arrangement(&y).unwrap();
        let before = g.stats();
        assert!(matches!(
            g.contract(&BTreeSet::from([cy]), &BTreeSet::from([parent])),
            Err(Error::Protected(_))
        ));
        assert_eq!(g.stats(), before);
    }

    #[test]
    fn dot_mentions_every_class() {
        let m = model();
        let mut g = BopEGraph::new();
        let x = atomic(&m, 0, &[part("x", 500.0)]);
        let y = atomic(&m, 1, &[part("y", 300.0)]);
        g.insert_arrangement(&ArrangementTerm::union(x, y)).unwrap();
        let dot = g.to_dot();
        for c in g.class_ids() {
            assert!(dot.contains(&format!("cluster_{}", c.0)));
        }
    }
}
