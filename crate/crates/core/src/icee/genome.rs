//! Genomes over the e-graph: one integer per e-class picking its
//! representative e-node, plus one shared integer over the concatenated
//! e-nodes of all root classes that fixes the design.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;

use crate::egraph::{BopEGraph, EClassId, ENode, ENodeId};
use crate::error::{Error, Result};
use crate::fabrication::{arrangement_fingerprint, ArrangementTerm, Packing};
use crate::fingerprint::Fingerprint;
use crate::model::DesignVector;

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Genome {
    pub root_gene: u32,
    pub genes: BTreeMap<EClassId, u32>,
}

/// The root classes with their e-nodes, in the order the root gene indexes them.
pub fn root_nodes(g: &BopEGraph) -> Vec<(EClassId, ENodeId)> {
    g.root_classes()
        .into_iter()
        .flat_map(|c| g.class(c).expect("roots are live").nodes.iter().map(move |&n| (c, n)))
        .collect()
}

/// A term selected by a genome.
#[derive(Clone, Debug)]
pub struct DecodedTerm {
    pub root: EClassId,
    pub design: DesignVector,
    /// Atomic e-nodes in depth-first order, with repeats.
    pub leaves: Vec<ENodeId>,
    /// The e-node used in every class the term visits.
    pub support: BTreeMap<EClassId, ENodeId>,
    pub fingerprint: Fingerprint,
}

impl Genome {
    /// A uniformly random valid genome.
    pub fn random<R: Rng + ?Sized>(g: &BopEGraph, rng: &mut R) -> Result<Genome> {
        let roots = root_nodes(g);
        if roots.is_empty() {
            return Err(Error::InvalidGenome("the e-graph has no root".into()));
        }
        let genes = g
            .classes()
            .map(|c| (c.id, rng.gen_range(0..c.nodes.len() as u32)))
            .collect();
        Ok(Genome {
            root_gene: rng.gen_range(0..roots.len() as u32),
            genes,
        })
    }

    /// Makes the genome valid for the current graph: genes of dead classes are
    /// dropped, missing or out-of-range genes redrawn uniformly.
    pub fn repair<R: Rng + ?Sized>(&mut self, g: &BopEGraph, rng: &mut R) {
        self.genes.retain(|c, _| g.is_live(*c));
        for c in g.classes() {
            let n = c.nodes.len() as u32;
            let gene = self.genes.entry(c.id).or_insert(n);
            if *gene >= n {
                *gene = rng.gen_range(0..n);
            }
        }
        let roots = root_nodes(g).len() as u32;
        if roots > 0 && self.root_gene >= roots {
            self.root_gene = rng.gen_range(0..roots);
        }
    }

    pub fn is_valid(&self, g: &BopEGraph) -> bool {
        self.root_gene < root_nodes(g).len() as u32
            && g.classes().all(|c| self.genes.get(&c.id).is_some_and(|&x| (x as usize) < c.nodes.len()))
    }

    /// The genome that selects `support`, with `root` the class whose root
    /// e-node starts the term. Other classes keep `fill`'s genes.
    pub fn encode(g: &BopEGraph, root: EClassId, support: &BTreeMap<EClassId, ENodeId>, fill: &Genome) -> Result<Genome> {
        let start = support
            .get(&root)
            .ok_or_else(|| Error::InvalidGenome(format!("support does not cover root {root}")))?;
        let root_gene = root_nodes(g)
            .iter()
            .position(|&(c, n)| c == root && n == *start)
            .ok_or_else(|| Error::InvalidGenome(format!("{root} is not a live root")))? as u32;
        let mut genes = fill.genes.clone();
        for (&c, &n) in support {
            let class = g.class(c).ok_or(Error::DeadClass(c))?;
            let idx = class
                .nodes
                .iter()
                .position(|&x| x == n)
                .ok_or_else(|| Error::InvalidGenome(format!("e-node {} is not in {c}", n.0)))?;
            genes.insert(c, idx as u32);
        }
        Ok(Genome { root_gene, genes })
    }

    /// Follows the genome from the root gene down to atomic e-nodes.
    pub fn decode(&self, g: &BopEGraph) -> Result<DecodedTerm> {
        self.decode_with(g, &root_nodes(g))
    }

    /// [`Self::decode`] with the root e-nodes precomputed by [`root_nodes`].
    pub fn decode_with(&self, g: &BopEGraph, roots: &[(EClassId, ENodeId)]) -> Result<DecodedTerm> {
        let &(root, start) = roots
            .get(self.root_gene as usize)
            .ok_or_else(|| Error::InvalidGenome(format!("root gene {} out of range", self.root_gene)))?;
        let design = g.roots()[&root].first().expect("roots hold a design").clone();
        let mut support = BTreeMap::new();
        support.insert(root, start);
        let mut leaves = Vec::new();
        let mut path = BTreeSet::new();
        path.insert(root);
        self.walk(g, start, &mut path, &mut support, &mut leaves)?;
        let fingerprint = arrangement_fingerprint(leaves.iter().map(|&n| atomic_packing(g, n)));
        Ok(DecodedTerm {
            root,
            design,
            leaves,
            support,
            fingerprint,
        })
    }

    fn walk(
        &self,
        g: &BopEGraph,
        node: ENodeId,
        path: &mut BTreeSet<EClassId>,
        support: &mut BTreeMap<EClassId, ENodeId>,
        leaves: &mut Vec<ENodeId>,
    ) -> Result<()> {
        match g.node(node).ok_or_else(|| Error::InvalidGenome(format!("e-node {} is dead", node.0)))? {
            ENode::Atomic { .. } => leaves.push(node),
            ENode::Union { left, right } => {
                for child in [*left, *right] {
                    if !path.insert(child) {
                        return Err(Error::Cycle(child));
                    }
                    let class = g.class(child).ok_or(Error::DeadClass(child))?;
                    let gene = *self
                        .genes
                        .get(&child)
                        .ok_or_else(|| Error::InvalidGenome(format!("no gene for {child}")))?;
                    let n = *class
                        .nodes
                        .get(gene as usize)
                        .ok_or_else(|| Error::InvalidGenome(format!("gene {gene} out of range for {child}")))?;
                    support.insert(child, n);
                    self.walk(g, n, path, support, leaves)?;
                    path.remove(&child);
                }
            }
        }
        Ok(())
    }

    /// Flat gene list in `[root, classes in id order]` layout.
    pub fn to_vec(&self, layout: &[EClassId]) -> Vec<u32> {
        std::iter::once(self.root_gene)
            .chain(layout.iter().map(|c| self.genes.get(c).copied().unwrap_or(0)))
            .collect()
    }

    pub fn from_vec(v: &[u32], layout: &[EClassId]) -> Genome {
        Genome {
            root_gene: v[0],
            genes: layout.iter().copied().zip(v[1..].iter().copied()).collect(),
        }
    }
}

pub(crate) fn atomic_packing(g: &BopEGraph, n: ENodeId) -> &Packing {
    match g.node(n) {
        Some(ENode::Atomic { packing, .. }) => packing,
        _ => panic!("leaf e-node {} is not atomic", n.0),
    }
}

/// Rebuilds the arrangement term a decoded genome denotes.
pub fn term_of(g: &BopEGraph, t: &DecodedTerm) -> ArrangementTerm {
    fn build(g: &BopEGraph, n: ENodeId, support: &BTreeMap<EClassId, ENodeId>) -> ArrangementTerm {
        match g.node(n).expect("decoded nodes are live") {
            ENode::Atomic { packing, .. } => ArrangementTerm::Atomic(packing.clone()),
            ENode::Union { left, right } => {
                ArrangementTerm::union(build(g, support[left], support), build(g, support[right], support))
            }
        }
    }
    build(g, t.support[&t.root], &t.support)
}
