//! Packings: parts laid out on a single piece of stock.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fingerprint::Fingerprint;
use crate::model::{bop_key, quantize, BagOfParts, BopKey, ConcretePart, PartShape, StockKind, StockType, SQUARE};

pub(crate) const EPS: f64 = 1e-6;

/// Position of a part on its stock. 1D offsets are measured along the bar;
/// 2D offsets are the lower-left corner of the (possibly rotated) part.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Offset {
    Linear { x: f64, flipped: bool },
    Planar { x: f64, y: f64, rotated: bool },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Placement {
    pub part: ConcretePart,
    pub offset: Offset,
}

/// Axis-aligned rectangle in stock coordinates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct Rect {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

/// Bar extent in stock coordinates. Angles are saw settings: the orientation of
/// the end line relative to the bar axis, 90 for square ends.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct Span {
    pub start: f64,
    pub end: f64,
    pub left: f64,
    pub right: f64,
}

pub(crate) fn same_angle(a: f64, b: f64) -> bool {
    quantize(a) == quantize(b)
}

pub(crate) fn is_square(a: f64) -> bool {
    same_angle(a, SQUARE)
}

/// Whether flipping a part changes anything. Symmetric parts are never flipped.
pub(crate) fn has_orientations(part: &ConcretePart) -> bool {
    match part.shape {
        PartShape::Bar {
            angle_left,
            angle_right,
            ..
        } => !same_angle(angle_left, angle_right),
        PartShape::Rect { width, height } => quantize(width) != quantize(height),
    }
}

/// Oriented end angles and length of a bar part.
fn bar_geometry(part: &ConcretePart, flipped: bool) -> Option<(f64, f64, f64)> {
    match part.shape {
        PartShape::Bar {
            length,
            angle_left,
            angle_right,
        } => {
            let (al, ar) = if flipped {
                (angle_right, angle_left)
            } else {
                (angle_left, angle_right)
            };
            Some((length, al, 180.0 - ar))
        }
        PartShape::Rect { .. } => None,
    }
}

fn rect_dims(part: &ConcretePart, rotated: bool) -> Option<(f64, f64)> {
    match part.shape {
        PartShape::Rect { width, height } => Some(if rotated {
            (height, width)
        } else {
            (width, height)
        }),
        PartShape::Bar { .. } => None,
    }
}

/// Parts assigned to one piece of stock, with their positions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Packing {
    pub stock: StockType,
    pub placements: Vec<Placement>,
}

impl Packing {
    /// Lays out `seq` (part, orientation flag) on `stock`: tight left-to-right
    /// for bars, next-fit shelves for sheets. `None` if it does not fit.
    pub fn pack(stock: &StockType, seq: &[(ConcretePart, bool)]) -> Option<Packing> {
        if seq.is_empty() || seq.iter().any(|(p, _)| p.material != stock.material) {
            return None;
        }
        match stock.kind() {
            StockKind::OneD => pack_bar(stock, seq),
            StockKind::TwoD => pack_sheet(stock, seq),
        }
    }

    pub fn kind(&self) -> StockKind {
        self.stock.kind()
    }

    pub fn bag(&self) -> BagOfParts {
        self.placements.iter().map(|p| p.part.clone()).collect()
    }

    pub fn key(&self) -> BopKey {
        bop_key(&self.bag())
    }

    pub fn fingerprint(&self) -> Fingerprint {
        Fingerprint::of(&self.canonical_bytes())
    }

    fn canonical_bytes(&self) -> Vec<u8> {
        let mut rows: Vec<Vec<u8>> = self
            .placements
            .iter()
            .map(|p| {
                let mut row = BopKey::from_keys([p.part.key()]).to_bytes();
                match p.offset {
                    Offset::Linear { x, flipped } => {
                        row.extend_from_slice(&quantize(x).to_le_bytes());
                        if let Some((len, left, right)) = bar_geometry(&p.part, flipped) {
                            for v in [len, left, right] {
                                row.extend_from_slice(&quantize(v).to_le_bytes());
                            }
                        }
                    }
                    Offset::Planar { x, y, rotated } => {
                        row.extend_from_slice(&quantize(x).to_le_bytes());
                        row.extend_from_slice(&quantize(y).to_le_bytes());
                        if let Some((w, h)) = rect_dims(&p.part, rotated) {
                            row.extend_from_slice(&quantize(w).to_le_bytes());
                            row.extend_from_slice(&quantize(h).to_le_bytes());
                        }
                    }
                }
                row
            })
            .collect();
        rows.sort();
        let mut out = Vec::new();
        out.extend_from_slice(&(self.stock.id.len() as u32).to_le_bytes());
        out.extend_from_slice(self.stock.id.as_bytes());
        for r in rows {
            out.extend_from_slice(&(r.len() as u32).to_le_bytes());
            out.extend_from_slice(&r);
        }
        out
    }

    pub(crate) fn stock_length(&self) -> f64 {
        match self.stock.shape {
            PartShape::Bar { length, .. } => length,
            PartShape::Rect { width, .. } => width,
        }
    }

    pub(crate) fn stock_rect(&self) -> Rect {
        match self.stock.shape {
            PartShape::Rect { width, height } => Rect {
                x0: 0.0,
                y0: 0.0,
                x1: width,
                y1: height,
            },
            PartShape::Bar { length, .. } => Rect {
                x0: 0.0,
                y0: 0.0,
                x1: length,
                y1: 0.0,
            },
        }
    }

    /// Bar spans sorted by start position.
    pub(crate) fn spans(&self) -> Result<Vec<Span>> {
        let mut spans = Vec::with_capacity(self.placements.len());
        for p in &self.placements {
            let Offset::Linear { x, flipped } = p.offset else {
                return Err(Error::InvalidPacking("planar offset on bar stock".into()));
            };
            let (len, left, right) = bar_geometry(&p.part, flipped)
                .ok_or_else(|| Error::InvalidPacking("sheet part on bar stock".into()))?;
            spans.push(Span {
                start: x,
                end: x + len,
                left,
                right,
            });
        }
        spans.sort_by(|a, b| a.start.total_cmp(&b.start));
        Ok(spans)
    }

    pub(crate) fn rects(&self) -> Result<Vec<Rect>> {
        let mut out = Vec::with_capacity(self.placements.len());
        for p in &self.placements {
            let Offset::Planar { x, y, rotated } = p.offset else {
                return Err(Error::InvalidPacking("linear offset on sheet stock".into()));
            };
            let (w, h) = rect_dims(&p.part, rotated)
                .ok_or_else(|| Error::InvalidPacking("bar part on sheet stock".into()))?;
            out.push(Rect {
                x0: x,
                y0: y,
                x1: x + w,
                y1: y + h,
            });
        }
        Ok(out)
    }

    /// Checks materials, bounds, kerf gaps and (for sheets) guillotine feasibility.
    pub fn validate(&self) -> Result<()> {
        if self.placements.is_empty() {
            return Err(Error::InvalidPacking("packing has no parts".into()));
        }
        if let Some(p) = self
            .placements
            .iter()
            .find(|p| p.part.material != self.stock.material)
        {
            return Err(Error::InvalidPacking(format!(
                "part `{}` is {} but stock `{}` is {}",
                p.part.template_id, p.part.material, self.stock.id, self.stock.material
            )));
        }
        let kerf = self.stock.kerf;
        match self.kind() {
            StockKind::OneD => {
                let spans = self.spans()?;
                let cuts = super::cuts::required_cuts(self)?;
                let total: f64 = spans.iter().map(|s| s.end - s.start).sum();
                if spans[0].start < -EPS || total + kerf * cuts.len() as f64 > self.stock_length() + EPS {
                    return Err(Error::InvalidPacking(format!(
                        "parts and kerf exceed stock `{}`",
                        self.stock.id
                    )));
                }
                for w in spans.windows(2) {
                    if w[1].start < w[0].end + kerf - EPS {
                        return Err(Error::InvalidPacking("overlapping bar parts".into()));
                    }
                }
                Ok(())
            }
            StockKind::TwoD => {
                let rects = self.rects()?;
                let bounds = self.stock_rect();
                for r in &rects {
                    if r.x0 < -EPS || r.y0 < -EPS || r.x1 > bounds.x1 + EPS || r.y1 > bounds.y1 + EPS {
                        return Err(Error::InvalidPacking("part outside sheet".into()));
                    }
                }
                for (i, a) in rects.iter().enumerate() {
                    for b in &rects[i + 1..] {
                        let apart_x = b.x0 >= a.x1 + kerf - EPS || a.x0 >= b.x1 + kerf - EPS;
                        let apart_y = b.y0 >= a.y1 + kerf - EPS || a.y0 >= b.y1 + kerf - EPS;
                        if !apart_x && !apart_y {
                            return Err(Error::InvalidPacking("overlapping sheet parts".into()));
                        }
                    }
                }
                super::cuts::required_cuts(self).map(|_| ())
            }
        }
    }
}

fn pack_bar(stock: &StockType, seq: &[(ConcretePart, bool)]) -> Option<Packing> {
    let PartShape::Bar { length: cap, .. } = stock.shape else {
        return None;
    };
    let kerf = stock.kerf;
    let mut placements = Vec::with_capacity(seq.len());
    let mut cursor = 0.0;
    let mut prev_right: Option<f64> = None;
    for (part, flipped) in seq {
        let flipped = *flipped && has_orientations(part);
        let (len, left, right) = bar_geometry(part, flipped)?;
        let x = match prev_right {
            None if is_square(left) => 0.0,
            None => kerf,
            Some(pr) if same_angle(pr, left) => cursor + kerf,
            Some(_) => cursor + 2.0 * kerf,
        };
        placements.push(Placement {
            part: part.clone(),
            offset: Offset::Linear { x, flipped },
        });
        cursor = x + len;
        prev_right = Some(right);
        if cursor > cap + EPS {
            return None;
        }
    }
    let last = prev_right.expect("non-empty sequence");
    let closes_flush = is_square(last) && (cursor - cap).abs() < EPS;
    if !closes_flush && cursor + kerf > cap + EPS {
        return None;
    }
    Some(Packing {
        stock: stock.clone(),
        placements,
    })
}

fn pack_sheet(stock: &StockType, seq: &[(ConcretePart, bool)]) -> Option<Packing> {
    let PartShape::Rect {
        width: sw,
        height: sh,
    } = stock.shape
    else {
        return None;
    };
    let kerf = stock.kerf;
    let mut placements = Vec::with_capacity(seq.len());
    let mut shelf_y = 0.0;
    let mut shelf_h: f64 = 0.0;
    let mut cursor = 0.0;
    let mut shelf_empty = true;
    for (part, rotated) in seq {
        let rotated = *rotated && has_orientations(part);
        let (w, h) = rect_dims(part, rotated)?;
        if w > sw + EPS {
            return None;
        }
        let x = if shelf_empty {
            0.0
        } else if cursor + kerf + w <= sw + EPS {
            cursor + kerf
        } else {
            shelf_y += shelf_h + kerf;
            shelf_h = 0.0;
            0.0
        };
        if shelf_y + h > sh + EPS {
            return None;
        }
        placements.push(Placement {
            part: part.clone(),
            offset: Offset::Planar {
                x,
                y: shelf_y,
                rotated,
            },
        });
        cursor = x + w;
        shelf_h = shelf_h.max(h);
        shelf_empty = false;
    }
    Some(Packing {
        stock: stock.clone(),
        placements,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::PartShape;

    fn bar_stock(len: f64, kerf: f64) -> StockType {
        StockType {
            id: "bar".into(),
            shape: PartShape::bar(len),
            price: 5.0,
            kerf,
            material: "pine".into(),
        }
    }

    fn sheet(w: f64, h: f64) -> StockType {
        StockType {
            id: "sheet".into(),
            shape: PartShape::rect(w, h),
            price: 40.0,
            kerf: 3.0,
            material: "ply".into(),
        }
    }

    #[test]
    fn square_bars_share_cuts() {
        let p = ConcretePart::new("a", PartShape::bar(100.0), "pine");
        let packing = Packing::pack(&bar_stock(500.0, 3.0), &[(p.clone(), false), (p.clone(), false)]).unwrap();
        let spans = packing.spans().unwrap();
        assert_eq!(spans[0].start, 0.0);
        assert!((spans[1].start - 103.0).abs() < 1e-9);
        packing.validate().unwrap();
    }

    #[test]
    fn mitered_first_part_needs_trim() {
        let p = ConcretePart::new("a", PartShape::mitered(100.0, 45.0, 90.0), "pine");
        let packing = Packing::pack(&bar_stock(500.0, 3.0), &[(p.clone(), false)]).unwrap();
        assert_eq!(packing.spans().unwrap()[0].start, 3.0);
        let flipped = Packing::pack(&bar_stock(500.0, 3.0), &[(p, true)]).unwrap();
        assert_eq!(flipped.spans().unwrap()[0].start, 0.0);
        assert_ne!(packing.fingerprint(), flipped.fingerprint());
        assert_eq!(packing.key(), flipped.key());
    }

    #[test]
    fn mirrored_parts_fingerprint_by_placed_geometry() {
        let a = ConcretePart::new("a", PartShape::mitered(100.0, 45.0, 90.0), "pine");
        let b = ConcretePart::new("b", PartShape::mitered(100.0, 90.0, 45.0), "pine");
        let stock = bar_stock(500.0, 3.0);
        let pa = Packing::pack(&stock, &[(a.clone(), false)]).unwrap();
        let pb = Packing::pack(&stock, &[(b.clone(), false)]).unwrap();
        assert_eq!(pa.key(), pb.key());
        assert_ne!(pa.fingerprint(), pb.fingerprint());
        assert_eq!(pa.fingerprint(), Packing::pack(&stock, &[(b, true)]).unwrap().fingerprint());
    }

    #[test]
    fn overfull_bar_rejected() {
        let p = ConcretePart::new("a", PartShape::bar(250.0), "pine");
        assert!(Packing::pack(&bar_stock(500.0, 3.0), &[(p.clone(), false), (p.clone(), false)]).is_none());
        // Exactly flush: no closing cut needed.
        let q = ConcretePart::new("b", PartShape::bar(500.0), "pine");
        assert!(Packing::pack(&bar_stock(500.0, 3.0), &[(q, false)]).is_some());
    }

    #[test]
    fn material_mismatch_rejected() {
        let p = ConcretePart::new("a", PartShape::bar(100.0), "oak");
        assert!(Packing::pack(&bar_stock(500.0, 3.0), &[(p, false)]).is_none());
    }

    #[test]
    fn shelves_wrap() {
        let p = ConcretePart::new("a", PartShape::rect(400.0, 300.0), "ply");
        let seq = vec![(p.clone(), false); 3];
        let packing = Packing::pack(&sheet(1000.0, 1000.0), &seq).unwrap();
        let rects = packing.rects().unwrap();
        assert_eq!(rects[2].x0, 0.0);
        assert!((rects[2].y0 - 303.0).abs() < 1e-9);
        packing.validate().unwrap();
        let rotated = Packing::pack(&sheet(1000.0, 1000.0), &[(p, true)]).unwrap();
        assert_eq!(rotated.rects().unwrap()[0].x1, 300.0);
    }

    #[test]
    fn overlapping_sheet_parts_invalid() {
        let p = ConcretePart::new("a", PartShape::rect(400.0, 300.0), "ply");
        let packing = Packing {
            stock: sheet(1000.0, 1000.0),
            placements: vec![
                Placement {
                    part: p.clone(),
                    offset: Offset::Planar { x: 0.0, y: 0.0, rotated: false },
                },
                Placement {
                    part: p,
                    offset: Offset::Planar { x: 200.0, y: 100.0, rotated: false },
                },
            ],
        };
        assert!(packing.validate().is_err());
    }
}
