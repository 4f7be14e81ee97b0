//! Multi-objective toolkit: dominance, non-dominated sorting, NSGA-III
//! selection, exact hypervolume and the solution archive. All objectives are
//! minimized.

mod archive;
mod hypervolume;
mod nsga3;

pub use archive::{reference_point, Solution, SolutionArchive, ARCHIVE_CAP};
pub use hypervolume::hypervolume;
pub use nsga3::{das_dennis, default_divisions, nsga3_select};

use std::cmp::Ordering;

/// `a` is no worse than `b` everywhere and strictly better somewhere.
pub fn dominates<A: AsRef<[f64]> + ?Sized>(a: &A, b: &A) -> bool {
    let (a, b) = (a.as_ref(), b.as_ref());
    debug_assert_eq!(a.len(), b.len());
    let mut strict = false;
    for (x, y) in a.iter().zip(b) {
        if x > y {
            return false;
        }
        if x < y {
            strict = true;
        }
    }
    strict
}

fn lex(a: &[f64], b: &[f64]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

/// Splits `points` into non-dominated layers: layer 0 is the Pareto front and
/// layer `l` the front of what remains after removing layers `0..l`. Indices
/// inside a layer are ascending.
///
/// Points are visited in lexicographic order, so only earlier points can
/// dominate later ones, and each point's layer is found by binary search
/// (if layer `k` holds a dominator, so does every layer below it).
pub fn non_dominated_sort<P: AsRef<[f64]>>(points: &[P]) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| lex(points[a].as_ref(), points[b].as_ref()).then(a.cmp(&b)));
    let mut layers: Vec<Vec<usize>> = Vec::new();
    for &i in &order {
        let p = points[i].as_ref();
        let dominated_in = |layer: &Vec<usize>| layer.iter().rev().any(|&j| dominates(points[j].as_ref(), p));
        let (mut lo, mut hi) = (0, layers.len());
        while lo < hi {
            let mid = (lo + hi) / 2;
            if dominated_in(&layers[mid]) {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        if lo == layers.len() {
            layers.push(vec![i]);
        } else {
            layers[lo].push(i);
        }
    }
    for l in &mut layers {
        l.sort_unstable();
    }
    layers
}
