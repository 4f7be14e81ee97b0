//! Physical cuts of a packing, their execution semantics and order enumeration.
//!
//! Every cut measures its position from an edge of the piece it falls in. The
//! reference is the edge with the shortest dependency chain; factory edges
//! have depth zero and an edge produced by a cut has depth one more than the
//! reference that cut used. A square cut referenced off a factory edge is
//! exact; every other cut costs `base_error * (1 + depth)`.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::packing::{is_square, same_angle, Packing, Rect, EPS};
use crate::error::{Error, Result};
use crate::model::{quantize, DesignSpaceModel, Ident, StockKind, Tool};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    /// Cut line parallel to the x axis; splits along y.
    Horizontal,
    /// Cut line parallel to the y axis; splits along x.
    Vertical,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CutGeometry {
    /// Cross-cut of a bar at `position` with saw setting `angle`.
    Cross { position: f64, angle: f64 },
    /// Edge-to-edge straight cut of a sheet region.
    Guillotine {
        axis: Axis,
        position: f64,
        from: f64,
        to: f64,
    },
}

impl CutGeometry {
    /// Saw configuration, quantized. Changing it between consecutive cuts costs a setup.
    pub fn setting(&self) -> i64 {
        match *self {
            CutGeometry::Cross { angle, .. } => quantize(angle),
            CutGeometry::Guillotine { axis, .. } => match axis {
                Axis::Horizontal => 0,
                Axis::Vertical => quantize(90.0),
            },
        }
    }

    fn identity(&self) -> (u8, i64, i64, i64, i64) {
        match *self {
            CutGeometry::Cross { position, angle } => (0, quantize(position), quantize(angle), 0, 0),
            CutGeometry::Guillotine {
                axis,
                position,
                from,
                to,
            } => (
                1 + axis as u8,
                quantize(position),
                quantize(from),
                quantize(to),
                0,
            ),
        }
    }

    fn position(&self) -> f64 {
        match *self {
            CutGeometry::Cross { position, .. } | CutGeometry::Guillotine { position, .. } => position,
        }
    }

    fn is_standard(&self) -> bool {
        match *self {
            CutGeometry::Cross { angle, .. } => is_square(angle),
            CutGeometry::Guillotine { .. } => true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cut {
    pub tool: Ident,
    pub geometry: CutGeometry,
}

/// Ordered cuts separating one piece of stock into its parts and offcuts.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CutOrder {
    pub cuts: Vec<Cut>,
}

impl CutOrder {
    pub fn len(&self) -> usize {
        self.cuts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cuts.is_empty()
    }

    pub(crate) fn fingerprint_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.cuts.len() * 40);
        for c in &self.cuts {
            out.extend_from_slice(c.tool.as_bytes());
            let (a, b, d, e, f) = c.geometry.identity();
            out.push(a);
            for v in [b, d, e, f] {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out
    }
}

/// The canonical set of cuts a packing needs, in position order.
pub fn required_cuts(packing: &Packing) -> Result<Vec<CutGeometry>> {
    match packing.kind() {
        StockKind::OneD => bar_cuts(packing),
        StockKind::TwoD => {
            let rects = packing.rects()?;
            let mut out = Vec::new();
            split_sheet(packing.stock_rect(), rects, packing.stock.kerf, &mut out)?;
            Ok(out)
        }
    }
}

fn bar_cuts(packing: &Packing) -> Result<Vec<CutGeometry>> {
    let spans = packing.spans()?;
    let kerf = packing.stock.kerf;
    let cap = packing.stock_length();
    let mut out = Vec::new();
    for (i, s) in spans.iter().enumerate() {
        if i == 0 {
            if !(is_square(s.left) && s.start.abs() < EPS) {
                out.push(CutGeometry::Cross {
                    position: s.start - kerf / 2.0,
                    angle: s.left,
                });
            }
            continue;
        }
        let prev = &spans[i - 1];
        if same_angle(prev.right, s.left) && (s.start - prev.end - kerf).abs() < EPS {
            out.push(CutGeometry::Cross {
                position: prev.end + kerf / 2.0,
                angle: s.left,
            });
        } else {
            out.push(CutGeometry::Cross {
                position: prev.end + kerf / 2.0,
                angle: prev.right,
            });
            out.push(CutGeometry::Cross {
                position: s.start - kerf / 2.0,
                angle: s.left,
            });
        }
    }
    let last = spans.last().ok_or_else(|| Error::InvalidPacking("packing has no parts".into()))?;
    if !(is_square(last.right) && (last.end - cap).abs() < EPS) {
        out.push(CutGeometry::Cross {
            position: last.end + kerf / 2.0,
            angle: last.right,
        });
    }
    Ok(out)
}

fn lo_hi(r: &Rect, axis: Axis) -> (f64, f64) {
    match axis {
        Axis::Horizontal => (r.y0, r.y1),
        Axis::Vertical => (r.x0, r.x1),
    }
}

fn across(r: &Rect, axis: Axis) -> (f64, f64) {
    match axis {
        Axis::Horizontal => (r.x0, r.x1),
        Axis::Vertical => (r.y0, r.y1),
    }
}

fn with_range(r: &Rect, axis: Axis, lo: f64, hi: f64) -> Rect {
    let mut out = *r;
    match axis {
        Axis::Horizontal => {
            out.y0 = lo;
            out.y1 = hi;
        }
        Axis::Vertical => {
            out.x0 = lo;
            out.x1 = hi;
        }
    }
    out
}

/// Recursive guillotine decomposition. Separating cuts are preferred over
/// trims, horizontal over vertical, low positions over high ones.
fn split_sheet(region: Rect, parts: Vec<Rect>, kerf: f64, out: &mut Vec<CutGeometry>) -> Result<()> {
    if parts.len() == 1 {
        let p = &parts[0];
        if (p.x0 - region.x0).abs() < EPS
            && (p.y0 - region.y0).abs() < EPS
            && (p.x1 - region.x1).abs() < EPS
            && (p.y1 - region.y1).abs() < EPS
        {
            return Ok(());
        }
    }
    // (trim?, axis, center, kerf band)
    let mut best: Option<(bool, Axis, f64, f64, f64)> = None;
    for axis in [Axis::Horizontal, Axis::Vertical] {
        let (rlo, rhi) = lo_hi(&region, axis);
        for p in &parts {
            let (plo, phi) = lo_hi(p, axis);
            let mut lines = Vec::with_capacity(2);
            if phi < rhi - EPS {
                lines.push((phi, phi + kerf));
            }
            if plo > rlo + EPS {
                lines.push((plo - kerf, plo));
            }
            for (a, b) in lines {
                let mut below = 0;
                let mut ok = true;
                for q in &parts {
                    let (qlo, qhi) = lo_hi(q, axis);
                    if qhi <= a + EPS {
                        below += 1;
                    } else if qlo < b - EPS {
                        ok = false;
                        break;
                    }
                }
                if !ok {
                    continue;
                }
                let trim = below == 0 || below == parts.len();
                let center = (a + b) / 2.0;
                let cand = (trim, axis, center, a, b);
                let better = match best {
                    None => true,
                    Some((t, ax, c, _, _)) => (trim, axis, quantize(center)) < (t, ax, quantize(c)),
                };
                if better {
                    best = Some(cand);
                }
            }
        }
    }
    let Some((_, axis, center, a, b)) = best else {
        return Err(Error::InvalidPacking("packing is not guillotine-separable".into()));
    };
    let (from, to) = across(&region, axis);
    out.push(CutGeometry::Guillotine {
        axis,
        position: center,
        from,
        to,
    });
    let (rlo, rhi) = lo_hi(&region, axis);
    let (low, high): (Vec<Rect>, Vec<Rect>) = parts.into_iter().partition(|q| lo_hi(q, axis).1 <= a + EPS);
    if !low.is_empty() {
        split_sheet(with_range(&region, axis, rlo, a.min(rhi)), low, kerf, out)?;
    }
    if !high.is_empty() {
        split_sheet(with_range(&region, axis, b.max(rlo), rhi), high, kerf, out)?;
    }
    Ok(())
}

#[derive(Clone, Debug)]
struct Piece {
    rect: Rect,
    /// left, right, bottom, top
    depth: [u32; 4],
}

/// Incremental executor of a cut sequence.
#[derive(Clone, Debug)]
pub(crate) struct Simulator {
    kind: StockKind,
    kerf: f64,
    base_error: f64,
    /// 1D: executed cut positions with the depth of the edges they produce.
    bar_edges: Vec<(f64, u32)>,
    /// 2D: current pieces.
    pieces: Vec<Piece>,
}

impl Simulator {
    pub fn new(packing: &Packing, base_error: f64) -> Self {
        let rect = packing.stock_rect();
        Simulator {
            kind: packing.kind(),
            kerf: packing.stock.kerf,
            base_error,
            bar_edges: Vec::new(),
            pieces: vec![Piece {
                rect,
                depth: [0; 4],
            }],
        }
    }

    fn find_piece(&self, g: &CutGeometry) -> Option<usize> {
        let CutGeometry::Guillotine {
            axis,
            position,
            from,
            to,
        } = *g
        else {
            return None;
        };
        let slack = self.kerf / 2.0 + EPS;
        self.pieces.iter().position(|p| {
            let (lo, hi) = lo_hi(&p.rect, axis);
            let (a, b) = across(&p.rect, axis);
            (a - from).abs() < EPS && (b - to).abs() < EPS && position > lo - slack && position < hi + slack
        })
    }

    pub fn can_apply(&self, g: &CutGeometry) -> bool {
        match self.kind {
            StockKind::OneD => true,
            StockKind::TwoD => self.find_piece(g).is_some(),
        }
    }

    /// Executes a cut and returns its precision error.
    pub fn apply(&mut self, g: &CutGeometry) -> Result<f64> {
        let depth = match (self.kind, *g) {
            (StockKind::OneD, CutGeometry::Cross { position, .. }) => {
                let mut left = 0;
                let mut right = 0;
                let mut left_pos = f64::NEG_INFINITY;
                let mut right_pos = f64::INFINITY;
                for &(p, d) in &self.bar_edges {
                    if p < position && p > left_pos {
                        left_pos = p;
                        left = d;
                    }
                    if p > position && p < right_pos {
                        right_pos = p;
                        right = d;
                    }
                }
                let depth = left.min(right);
                self.bar_edges.push((position, depth + 1));
                depth
            }
            (StockKind::TwoD, CutGeometry::Guillotine { axis, position, .. }) => {
                let idx = self.find_piece(g).ok_or_else(|| {
                    Error::InvalidCutOrder(format!("cut at {position:.3} does not span its piece"))
                })?;
                let piece = self.pieces.swap_remove(idx);
                let (lo_edge, hi_edge) = match axis {
                    Axis::Horizontal => (2, 3),
                    Axis::Vertical => (0, 1),
                };
                let depth = piece.depth[lo_edge].min(piece.depth[hi_edge]);
                let (lo, hi) = lo_hi(&piece.rect, axis);
                let half = self.kerf / 2.0;
                let mut low = Piece {
                    rect: with_range(&piece.rect, axis, lo, (position - half).max(lo)),
                    depth: piece.depth,
                };
                low.depth[hi_edge] = depth + 1;
                let mut high = Piece {
                    rect: with_range(&piece.rect, axis, (position + half).min(hi), hi),
                    depth: piece.depth,
                };
                high.depth[lo_edge] = depth + 1;
                self.pieces.push(low);
                self.pieces.push(high);
                depth
            }
            _ => {
                return Err(Error::InvalidCutOrder(
                    "cut geometry does not match stock kind".into(),
                ))
            }
        };
        Ok(if g.is_standard() && depth == 0 {
            0.0
        } else {
            self.base_error * (1.0 + depth as f64)
        })
    }
}

/// Per-cut precision errors of executing `order` on `packing`; fails if the
/// order is not a permutation of the required cuts or a cut is not edge-to-edge.
pub(crate) fn simulate(packing: &Packing, order: &[CutGeometry], base_error: f64) -> Result<Vec<f64>> {
    let required = required_cuts(packing)?;
    let mut want: Vec<_> = required.iter().map(CutGeometry::identity).collect();
    let mut got: Vec<_> = order.iter().map(CutGeometry::identity).collect();
    want.sort();
    got.sort();
    if want != got {
        return Err(Error::InvalidCutOrder(format!(
            "order has {} cuts but the packing on `{}` needs {} different ones",
            order.len(),
            packing.stock.id,
            required.len()
        )));
    }
    let mut sim = Simulator::new(packing, base_error);
    order.iter().map(|g| sim.apply(g)).collect()
}

fn tool_for<'m>(model: &'m DesignSpaceModel, packing: &Packing) -> &'m Tool {
    model
        .tool_for(packing.kind())
        .expect("validated model has a tool for every stock kind in use")
}

/// Up to `limit` distinct valid cut orders, deterministic. Heuristic orders
/// come first (setting-grouped, then edge-inward sweeps), followed by
/// lexicographic enumeration of the remaining valid sequences.
pub fn enumerate_cut_orders(packing: &Packing, model: &DesignSpaceModel, limit: usize) -> Vec<CutOrder> {
    let tool = tool_for(model, packing);
    let cuts = match required_cuts(packing) {
        Ok(c) => c,
        Err(_) => return Vec::new(),
    };
    let to_order = |idx: &[usize]| CutOrder {
        cuts: idx
            .iter()
            .map(|&i| Cut {
                tool: tool.id.clone(),
                geometry: cuts[i],
            })
            .collect(),
    };
    index_orders(packing, &cuts, limit.max(1))
        .iter()
        .map(|o| to_order(o))
        .collect()
}

pub(crate) fn index_orders(packing: &Packing, cuts: &[CutGeometry], limit: usize) -> Vec<Vec<usize>> {
    let n = cuts.len();
    let mut seen: HashSet<Vec<usize>> = HashSet::new();
    let mut out = Vec::new();
    let mut push = |o: Vec<usize>, out: &mut Vec<Vec<usize>>| {
        if out.len() < limit && o.len() == n && seen.insert(o.clone()) {
            out.push(o);
        }
    };
    if n == 0 {
        return vec![Vec::new()];
    }

    type Pick = fn(&[CutGeometry], &[usize], Option<usize>) -> usize;
    // Each greedy picks among currently valid cut indices (ascending position).
    let grouped: Pick = |cuts, valid, prev| {
        let want = prev.map(|p| cuts[p].setting());
        valid
            .iter()
            .copied()
            .min_by_key(|&i| {
                let s = cuts[i].setting();
                (Some(s) != want, s, quantize(cuts[i].position()))
            })
            .unwrap()
    };
    let grouped_desc: Pick = |cuts, valid, prev| {
        let want = prev.map(|p| cuts[p].setting());
        valid
            .iter()
            .copied()
            .min_by_key(|&i| {
                let s = cuts[i].setting();
                (Some(s) != want, s, -quantize(cuts[i].position()))
            })
            .unwrap()
    };
    let ascending: Pick = |cuts, valid, _| {
        valid
            .iter()
            .copied()
            .min_by_key(|&i| quantize(cuts[i].position()))
            .unwrap()
    };
    let descending: Pick = |cuts, valid, _| {
        valid
            .iter()
            .copied()
            .max_by_key(|&i| quantize(cuts[i].position()))
            .unwrap()
    };
    for pick in [grouped, ascending, descending, grouped_desc] {
        let mut sim = Simulator::new(packing, 0.0);
        let mut done = vec![false; n];
        let mut order = Vec::with_capacity(n);
        let mut prev = None;
        while order.len() < n {
            let valid: Vec<usize> = (0..n).filter(|&i| !done[i] && sim.can_apply(&cuts[i])).collect();
            if valid.is_empty() {
                break;
            }
            let i = pick(cuts, &valid, prev);
            if sim.apply(&cuts[i]).is_err() {
                break;
            }
            done[i] = true;
            order.push(i);
            prev = Some(i);
        }
        push(order, &mut out);
    }
    // Alternating sweep from both ends (1D only; every order is valid there).
    if packing.kind() == StockKind::OneD {
        let mut by_pos: Vec<usize> = (0..n).collect();
        by_pos.sort_by(|&a, &b| cuts[a].position().total_cmp(&cuts[b].position()));
        let mut alt = Vec::with_capacity(n);
        let (mut lo, mut hi) = (0usize, n);
        while lo < hi {
            alt.push(by_pos[lo]);
            lo += 1;
            if lo < hi {
                hi -= 1;
                alt.push(by_pos[hi]);
            }
        }
        push(alt, &mut out);
    }

    if out.len() < limit {
        let sim = Simulator::new(packing, 0.0);
        let mut prefix = Vec::with_capacity(n);
        let mut done = vec![false; n];
        dfs(cuts, sim, &mut prefix, &mut done, limit, &mut seen, &mut out);
    }
    out
}

fn dfs(
    cuts: &[CutGeometry],
    sim: Simulator,
    prefix: &mut Vec<usize>,
    done: &mut [bool],
    limit: usize,
    seen: &mut HashSet<Vec<usize>>,
    out: &mut Vec<Vec<usize>>,
) {
    if out.len() >= limit {
        return;
    }
    if prefix.len() == cuts.len() {
        if seen.insert(prefix.clone()) {
            out.push(prefix.clone());
        }
        return;
    }
    for i in 0..cuts.len() {
        if done[i] || !sim.can_apply(&cuts[i]) {
            continue;
        }
        let mut next = sim.clone();
        if next.apply(&cuts[i]).is_err() {
            continue;
        }
        done[i] = true;
        prefix.push(i);
        dfs(cuts, next, prefix, done, limit, seen, out);
        prefix.pop();
        done[i] = false;
        if out.len() >= limit {
            return;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fabrication::packing::Offset;
    use crate::model::{ConcretePart, PartShape, StockType};

    fn bar_stock(len: f64) -> StockType {
        StockType {
            id: "bar".into(),
            shape: PartShape::bar(len),
            price: 5.0,
            kerf: 2.0,
            material: "pine".into(),
        }
    }

    #[test]
    fn single_flush_part_with_one_cut() {
        let p = ConcretePart::new("a", PartShape::bar(100.0), "pine");
        let packing = Packing::pack(&bar_stock(500.0), &[(p, false)]).unwrap();
        let cuts = required_cuts(&packing).unwrap();
        assert_eq!(cuts.len(), 1);
    }

    #[test]
    fn mixed_angles_need_separate_cuts() {
        let sq = ConcretePart::new("a", PartShape::bar(100.0), "pine");
        let mi = ConcretePart::new("b", PartShape::mitered(100.0, 45.0, 45.0), "pine");
        let packing = Packing::pack(&bar_stock(500.0), &[(sq.clone(), false), (sq, false), (mi, false)]).unwrap();
        // shared square cut, square right end of #2, miter left of #3, miter right of #3
        let cuts = required_cuts(&packing).unwrap();
        assert_eq!(cuts.len(), 4);
        packing.validate().unwrap();
    }

    #[test]
    fn interior_pieces_accumulate_error() {
        // Three square parts, 3 cuts at ~100, ~200, ~300 on a 500 bar.
        let p = ConcretePart::new("a", PartShape::bar(98.0), "pine");
        let packing = Packing::pack(&bar_stock(500.0), &[(p.clone(), false), (p.clone(), false), (p, false)]).unwrap();
        let cuts = required_cuts(&packing).unwrap();
        assert_eq!(cuts.len(), 3);
        let ltr = simulate(&packing, &cuts, 1.0).unwrap();
        assert_eq!(ltr, vec![0.0, 0.0, 0.0]);
        let outside_in = [cuts[0], cuts[2], cuts[1]];
        let errs = simulate(&packing, &outside_in, 1.0).unwrap();
        // middle cut falls in a piece bounded by two cut edges of depth 1
        assert_eq!(errs, vec![0.0, 0.0, 2.0]);
    }

    #[test]
    fn sheet_order_must_respect_guillotine() {
        let stock = StockType {
            id: "sheet".into(),
            shape: PartShape::rect(1000.0, 1000.0),
            price: 40.0,
            kerf: 2.0,
            material: "ply".into(),
        };
        let a = ConcretePart::new("a", PartShape::rect(400.0, 300.0), "ply");
        let b = ConcretePart::new("b", PartShape::rect(400.0, 200.0), "ply");
        let packing = Packing::pack(&stock, &[(a, false), (b, false)]).unwrap();
        assert!(matches!(packing.placements[1].offset, Offset::Planar { y, .. } if y == 0.0));
        let cuts = required_cuts(&packing).unwrap();
        // split between the parts, then trims above a, above b and right of b
        assert_eq!(cuts.len(), 4);
        assert!(matches!(cuts[0], CutGeometry::Guillotine { axis: Axis::Vertical, from, to, .. } if from == 0.0 && to == 1000.0));
        simulate(&packing, &cuts, 1.0).unwrap();
        let mut reversed = cuts.clone();
        reversed.reverse();
        assert!(simulate(&packing, &reversed, 1.0).is_err());
        let orders = index_orders(&packing, &cuts, 1000);
        assert!(!orders.is_empty());
        for o in &orders {
            let seq: Vec<_> = o.iter().map(|&i| cuts[i]).collect();
            simulate(&packing, &seq, 1.0).unwrap();
        }
    }

    #[test]
    fn foreign_order_rejected() {
        let p = ConcretePart::new("a", PartShape::bar(100.0), "pine");
        let packing = Packing::pack(&bar_stock(500.0), &[(p, false)]).unwrap();
        let bogus = [CutGeometry::Cross {
            position: 42.0,
            angle: 90.0,
        }];
        assert!(simulate(&packing, &bogus, 1.0).is_err());
    }
}
