use std::collections::HashSet;
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use super::{dominates, hypervolume, non_dominated_sort};
use crate::egraph::EClassId;
use crate::fabrication::{FabricationPlan, ObjectiveVector};
use crate::fingerprint::Fingerprint;
use crate::model::DesignVector;

/// Maximum number of solutions kept; beyond it the highest layers are evicted.
pub const ARCHIVE_CAP: usize = 50_000;

/// A (design, fabrication plan) pair with its cost.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub design: DesignVector,
    pub term_fingerprint: Fingerprint,
    pub plan: Arc<FabricationPlan>,
    pub cost: ObjectiveVector,
    /// The e-node chosen in every e-class the term passes through, by e-node
    /// fingerprint so it survives contraction elsewhere in the graph.
    #[serde(skip)]
    pub support: Vec<(EClassId, Fingerprint)>,
}

/// 1.1 × the componentwise maximum; a component whose maximum is not positive
/// gets 1.0 so the reference still bounds a non-degenerate box.
pub fn reference_point<'a>(points: impl IntoIterator<Item = &'a ObjectiveVector>) -> ObjectiveVector {
    let mut max = [f64::NEG_INFINITY; 3];
    for p in points {
        for (m, v) in max.iter_mut().zip(p.0) {
            *m = m.max(v);
        }
    }
    ObjectiveVector(max.map(|m| if m > 0.0 { 1.1 * m } else { 1.0 }))
}

/// The solution set `S`: every evaluated solution, deduplicated by
/// `(term_fingerprint, cost)`, with cached non-dominated layers.
#[derive(Debug, Default)]
pub struct SolutionArchive {
    solutions: Vec<Solution>,
    seen: HashSet<(Fingerprint, [u64; 3])>,
    front: Vec<usize>,
    layers: OnceLock<Vec<Vec<usize>>>,
    reference: Option<ObjectiveVector>,
}

impl SolutionArchive {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.solutions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.solutions.is_empty()
    }

    pub fn solutions(&self) -> &[Solution] {
        &self.solutions
    }

    pub fn contains(&self, term: Fingerprint, cost: &ObjectiveVector) -> bool {
        self.seen.contains(&(term, cost.bits()))
    }

    /// Returns whether the solution was new. Dominated solutions are kept.
    pub fn insert(&mut self, s: Solution) -> bool {
        if !self.seen.insert((s.term_fingerprint, s.cost.bits())) {
            return false;
        }
        let idx = self.solutions.len();
        let cost = s.cost;
        self.solutions.push(s);
        self.layers = OnceLock::new();
        if !self.front.iter().any(|&j| dominates(&self.solutions[j].cost, &cost)) {
            self.front.retain(|&j| !dominates(&cost, &self.solutions[j].cost));
            self.front.push(idx);
        }
        if self.solutions.len() > ARCHIVE_CAP {
            self.evict();
        }
        true
    }

    fn evict(&mut self) {
        let layers = self.layers().clone();
        let mut excess = self.solutions.len() - ARCHIVE_CAP;
        let mut drop = vec![false; self.solutions.len()];
        for layer in layers.iter().rev() {
            for &i in layer.iter().rev() {
                if excess == 0 {
                    break;
                }
                drop[i] = true;
                excess -= 1;
            }
        }
        let old = std::mem::take(&mut self.solutions);
        self.solutions = old
            .into_iter()
            .zip(drop)
            .filter_map(|(s, d)| (!d).then_some(s))
            .collect();
        self.seen = self
            .solutions
            .iter()
            .map(|s| (s.term_fingerprint, s.cost.bits()))
            .collect();
        self.layers = OnceLock::new();
        self.front = self.layers()[0].clone();
    }

    pub fn layers(&self) -> &Vec<Vec<usize>> {
        self.layers.get_or_init(|| {
            let costs: Vec<ObjectiveVector> = self.solutions.iter().map(|s| s.cost).collect();
            non_dominated_sort(&costs)
        })
    }

    /// Indices of layer 0 in insertion order.
    pub fn front_indices(&self) -> Vec<usize> {
        let mut f = self.front.clone();
        f.sort_unstable();
        f
    }

    pub fn front(&self) -> Vec<&Solution> {
        self.front_indices().into_iter().map(|i| &self.solutions[i]).collect()
    }

    pub fn front_costs(&self) -> Vec<ObjectiveVector> {
        self.front_indices().into_iter().map(|i| self.solutions[i].cost).collect()
    }

    /// Current hypervolume reference, enlarging the stored one if some
    /// solution now exceeds it. It never shrinks.
    pub fn reference(&mut self) -> ObjectiveVector {
        let fresh = reference_point(self.solutions.iter().map(|s| &s.cost));
        let r = match self.reference {
            None => fresh,
            Some(old) => {
                let max = ObjectiveVector(std::array::from_fn(|i| {
                    self.solutions.iter().map(|s| s.cost.0[i]).fold(f64::NEG_INFINITY, f64::max)
                }));
                ObjectiveVector(std::array::from_fn(|i| {
                    if max.0[i] >= old.0[i] {
                        fresh.0[i]
                    } else {
                        old.0[i]
                    }
                }))
            }
        };
        if !self.solutions.is_empty() {
            self.reference = Some(r);
        }
        r
    }

    pub fn hypervolume(&mut self) -> f64 {
        if self.solutions.is_empty() {
            return 0.0;
        }
        let r = self.reference();
        hypervolume(&self.front_costs(), &r.0).expect("three objectives")
    }
}
