//! Design space: part templates, connectors with discrete variants, stock and tools.
//!
//! A [`DesignVector`] picks one variant per connector. Applying the variants'
//! shape overrides to the default templates yields a [`BagOfParts`], whose
//! canonical [`BopKey`] is the equivalence key of the e-graph.

mod schema;

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use schema::parse_model;

/// Resolution used when comparing dimensions: 1e-3 mm and 1e-3 degrees.
pub const QUANTUM: f64 = 1e-3;

/// Angle of a square (standard-setup) end, in degrees.
pub const SQUARE: f64 = 90.0;

pub(crate) fn quantize(x: f64) -> i64 {
    (x / QUANTUM).round() as i64
}

pub type Ident = Arc<str>;

/// Geometry of a part or a stock envelope. Lengths in mm, angles in degrees.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PartShape {
    Bar {
        #[serde(rename = "len")]
        length: f64,
        #[serde(rename = "al", default = "square")]
        angle_left: f64,
        #[serde(rename = "ar", default = "square")]
        angle_right: f64,
    },
    Rect {
        #[serde(rename = "w")]
        width: f64,
        #[serde(rename = "h")]
        height: f64,
    },
}

fn square() -> f64 {
    SQUARE
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum StockKind {
    #[serde(rename = "1d")]
    OneD,
    #[serde(rename = "2d")]
    TwoD,
}

impl PartShape {
    pub fn bar(length: f64) -> Self {
        PartShape::Bar {
            length,
            angle_left: SQUARE,
            angle_right: SQUARE,
        }
    }

    pub fn mitered(length: f64, angle_left: f64, angle_right: f64) -> Self {
        PartShape::Bar {
            length,
            angle_left,
            angle_right,
        }
    }

    pub fn rect(width: f64, height: f64) -> Self {
        PartShape::Rect { width, height }
    }

    pub fn kind(&self) -> StockKind {
        match self {
            PartShape::Bar { .. } => StockKind::OneD,
            PartShape::Rect { .. } => StockKind::TwoD,
        }
    }

    /// Length for bars, area for rectangles. Used to order parts for packing.
    pub fn extent(&self) -> f64 {
        match *self {
            PartShape::Bar { length, .. } => length,
            PartShape::Rect { width, height } => width * height,
        }
    }

    pub(crate) fn validate(&self, what: &str) -> Result<()> {
        let ok = match *self {
            PartShape::Bar {
                length,
                angle_left,
                angle_right,
            } => {
                length.is_finite()
                    && length > 0.0
                    && [angle_left, angle_right]
                        .iter()
                        .all(|a| a.is_finite() && *a > 0.0 && *a <= 180.0)
            }
            PartShape::Rect { width, height } => {
                width.is_finite() && height.is_finite() && width > 0.0 && height > 0.0
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Invariant(format!(
                "{what}: dimensions must be positive and angles in (0, 180]"
            )))
        }
    }

    fn key(&self) -> ShapeKey {
        match *self {
            PartShape::Bar {
                length,
                angle_left,
                angle_right,
            } => {
                let (a, b) = (quantize(angle_left), quantize(angle_right));
                ShapeKey::Bar {
                    length: quantize(length),
                    lo: a.min(b),
                    hi: a.max(b),
                }
            }
            PartShape::Rect { width, height } => {
                let (w, h) = (quantize(width), quantize(height));
                ShapeKey::Rect {
                    long: w.max(h),
                    short: w.min(h),
                }
            }
        }
    }
}

/// Quantized, orientation-free shape. Bars are identical under end-for-end
/// flips, rectangles under quarter turns.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ShapeKey {
    Bar { length: i64, lo: i64, hi: i64 },
    Rect { long: i64, short: i64 },
}

/// Equivalence key of a single part: everything but the template id.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PartKey {
    pub shape: ShapeKey,
    pub material: Ident,
}

/// A part with concrete dimensions. Equality ignores `template_id`, so
/// symmetric parts coming from different templates unify.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConcretePart {
    pub template_id: Ident,
    pub shape: PartShape,
    pub material: Ident,
}

impl ConcretePart {
    pub fn new(template_id: &str, shape: PartShape, material: &str) -> Self {
        ConcretePart {
            template_id: template_id.into(),
            shape,
            material: material.into(),
        }
    }

    pub fn key(&self) -> PartKey {
        PartKey {
            shape: self.shape.key(),
            material: self.material.clone(),
        }
    }
}

impl PartialEq for ConcretePart {
    fn eq(&self, other: &Self) -> bool {
        self.key() == other.key()
    }
}

impl Eq for ConcretePart {}

impl Hash for ConcretePart {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.key().hash(state)
    }
}

/// Multiset of concrete parts.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BagOfParts(pub Vec<ConcretePart>);

impl BagOfParts {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn parts(&self) -> &[ConcretePart] {
        &self.0
    }

    pub fn key(&self) -> BopKey {
        bop_key(self)
    }
}

impl FromIterator<ConcretePart> for BagOfParts {
    fn from_iter<I: IntoIterator<Item = ConcretePart>>(iter: I) -> Self {
        BagOfParts(iter.into_iter().collect())
    }
}

/// Canonical form of a bag of parts: sorted `(part key, multiplicity)` pairs.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BopKey {
    entries: Vec<(PartKey, u32)>,
}

impl BopKey {
    pub fn from_keys<I: IntoIterator<Item = PartKey>>(keys: I) -> Self {
        let mut keys: Vec<PartKey> = keys.into_iter().collect();
        keys.sort();
        let mut entries: Vec<(PartKey, u32)> = Vec::new();
        for k in keys {
            match entries.last_mut() {
                Some((last, n)) if *last == k => *n += 1,
                _ => entries.push((k, 1)),
            }
        }
        BopKey { entries }
    }

    pub fn entries(&self) -> &[(PartKey, u32)] {
        &self.entries
    }

    /// Number of parts, counting multiplicity.
    pub fn len(&self) -> usize {
        self.entries.iter().map(|(_, n)| *n as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Multiset sum.
    pub fn union(&self, other: &BopKey) -> BopKey {
        let mut entries = Vec::with_capacity(self.entries.len() + other.entries.len());
        let (mut i, mut j) = (0, 0);
        while i < self.entries.len() || j < other.entries.len() {
            match (self.entries.get(i), other.entries.get(j)) {
                (Some(a), Some(b)) if a.0 == b.0 => {
                    entries.push((a.0.clone(), a.1 + b.1));
                    i += 1;
                    j += 1;
                }
                (Some(a), Some(b)) if a.0 < b.0 => {
                    entries.push(a.clone());
                    i += 1;
                }
                (Some(_), Some(b)) => {
                    entries.push(b.clone());
                    j += 1;
                }
                (Some(a), None) => {
                    entries.push(a.clone());
                    i += 1;
                }
                (None, Some(b)) => {
                    entries.push(b.clone());
                    j += 1;
                }
                (None, None) => unreachable!(),
            }
        }
        BopKey { entries }
    }

    /// Canonical byte encoding, stable across runs and platforms.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.entries.len() * 40);
        for (k, n) in &self.entries {
            match k.shape {
                ShapeKey::Bar { length, lo, hi } => {
                    out.push(b'B');
                    for v in [length, lo, hi] {
                        out.extend_from_slice(&v.to_le_bytes());
                    }
                }
                ShapeKey::Rect { long, short } => {
                    out.push(b'R');
                    for v in [long, short] {
                        out.extend_from_slice(&v.to_le_bytes());
                    }
                }
            }
            out.extend_from_slice(&(k.material.len() as u32).to_le_bytes());
            out.extend_from_slice(k.material.as_bytes());
            out.extend_from_slice(&n.to_le_bytes());
        }
        out
    }
}

impl fmt::Display for BopKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (k, n)) in self.entries.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            match k.shape {
                ShapeKey::Bar { length, lo, hi } => write!(
                    f,
                    "bar{}@{}/{}",
                    length as f64 * QUANTUM,
                    lo as f64 * QUANTUM,
                    hi as f64 * QUANTUM
                )?,
                ShapeKey::Rect { long, short } => write!(
                    f,
                    "rect{}x{}",
                    long as f64 * QUANTUM,
                    short as f64 * QUANTUM
                )?,
            }
            if *n > 1 {
                write!(f, " x{n}")?;
            }
        }
        f.write_str("}")
    }
}

pub fn bop_key(bag: &BagOfParts) -> BopKey {
    BopKey::from_keys(bag.0.iter().map(ConcretePart::key))
}

/// `|bag|` minus the number of distinct parts; higher means more duplication.
pub fn identical_parts_score(bag: &BagOfParts) -> usize {
    let key = bop_key(bag);
    bag.len() - key.entries.len()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StockType {
    pub id: Ident,
    pub shape: PartShape,
    pub price: f64,
    pub kerf: f64,
    pub material: Ident,
}

impl StockType {
    pub fn kind(&self) -> StockKind {
        self.shape.kind()
    }

    /// Whether a single part could ever be cut from this stock.
    pub fn accepts(&self, part: &ConcretePart) -> bool {
        if part.material != self.material || part.shape.kind() != self.kind() {
            return false;
        }
        match (part.shape, self.shape) {
            (PartShape::Bar { length, .. }, PartShape::Bar { length: cap, .. }) => {
                length <= cap + 1e-9
            }
            (
                PartShape::Rect { width, height },
                PartShape::Rect {
                    width: sw,
                    height: sh,
                },
            ) => {
                (width <= sw + 1e-9 && height <= sh + 1e-9)
                    || (height <= sw + 1e-9 && width <= sh + 1e-9)
            }
            _ => false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ToolKind {
    Chopsaw,
    Tracksaw,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tool {
    pub id: Ident,
    pub kind: ToolKind,
    /// Seconds per physical cut.
    pub cut_time: f64,
    /// Seconds per configuration change.
    pub setup_time: f64,
    /// Millimeters per non-standard cut.
    pub base_error: f64,
    pub stack_limit: u32,
}

impl Tool {
    pub fn applicable_kind(&self) -> StockKind {
        match self.kind {
            ToolKind::Chopsaw => StockKind::OneD,
            ToolKind::Tracksaw => StockKind::TwoD,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BarEnd {
    Left,
    Right,
}

/// What a variant does to one template.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum OverrideEffect {
    /// Replaces the whole shape.
    Replace(PartShape),
    /// Sets the angle of one bar end and shortens the bar by `trim`. Two
    /// connectors touching the two ends of a bar compose.
    End { end: BarEnd, angle: f64, trim: f64 },
    /// Leaves the part out of the design.
    Omit,
}

impl OverrideEffect {
    pub fn apply(&self, shape: PartShape) -> PartShape {
        match (*self, shape) {
            (OverrideEffect::Replace(s), _) => s,
            (
                OverrideEffect::End { end, angle, trim },
                PartShape::Bar {
                    length,
                    angle_left,
                    angle_right,
                },
            ) => match end {
                BarEnd::Left => PartShape::mitered(length - trim, angle, angle_right),
                BarEnd::Right => PartShape::mitered(length - trim, angle_left, angle),
            },
            (OverrideEffect::End { .. } | OverrideEffect::Omit, other) => other,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ShapeOverride {
    pub template: Ident,
    pub effect: OverrideEffect,
}

/// One connecting variant: shape overrides applied to part templates.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Variant {
    pub overrides: Vec<ShapeOverride>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Connector {
    pub id: Ident,
    pub variants: Vec<Variant>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Template {
    pub id: Ident,
    pub part: ConcretePart,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NamedDesign {
    pub name: String,
    pub genes: DesignVector,
}

/// One variant index per connector.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DesignVector(pub Vec<u32>);

impl DesignVector {
    pub fn genes(&self) -> &[u32] {
        &self.0
    }
}

impl fmt::Display for DesignVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(u32::to_string).collect();
        f.write_str(&parts.join("-"))
    }
}

impl From<Vec<u32>> for DesignVector {
    fn from(v: Vec<u32>) -> Self {
        DesignVector(v)
    }
}

/// Size of the design space.
#[derive(Clone, Debug, PartialEq)]
pub struct DesignSpaceSize {
    /// Product of variant counts over all connectors.
    pub assignments: BigUint,
    pub unique_bops: usize,
    /// `false` when `unique_bops` is a lower bound from sampling.
    pub exact: bool,
}

/// Validated, immutable design space.
#[derive(Clone, Debug)]
pub struct DesignSpaceModel {
    pub templates: Vec<Template>,
    pub connectors: Vec<Connector>,
    pub stock: Vec<StockType>,
    pub tools: Vec<Tool>,
    /// Named reference designs; the first one is the input design.
    pub designs: Vec<NamedDesign>,
    template_index: HashMap<Ident, usize>,
}

impl DesignSpaceModel {
    pub fn new(
        templates: Vec<Template>,
        connectors: Vec<Connector>,
        stock: Vec<StockType>,
        tools: Vec<Tool>,
        designs: Vec<NamedDesign>,
    ) -> Result<Self> {
        let mut template_index = HashMap::new();
        for (i, t) in templates.iter().enumerate() {
            if template_index.insert(t.id.clone(), i).is_some() {
                return Err(Error::DuplicateId {
                    kind: "template",
                    id: t.id.to_string(),
                });
            }
        }
        let model = DesignSpaceModel {
            templates,
            connectors,
            stock,
            tools,
            designs,
            template_index,
        };
        model.validate()?;
        Ok(model)
    }

    fn validate(&self) -> Result<()> {
        if self.templates.is_empty() {
            return Err(Error::Invariant("model has no part templates".into()));
        }
        for t in &self.templates {
            t.part.shape.validate(&format!("template `{}`", t.id))?;
        }
        unique_ids("connector", self.connectors.iter().map(|c| &c.id))?;
        unique_ids("stock", self.stock.iter().map(|s| &s.id))?;
        unique_ids("tool", self.tools.iter().map(|t| &t.id))?;

        for c in &self.connectors {
            if c.variants.is_empty() {
                return Err(Error::Invariant(format!(
                    "connector `{}` has no variants",
                    c.id
                )));
            }
            for (vi, v) in c.variants.iter().enumerate() {
                let mut seen = BTreeSet::new();
                for o in &v.overrides {
                    let Some(&ti) = self.template_index.get(&o.template) else {
                        return Err(Error::Invariant(format!(
                            "connector `{}` variant {vi} references unknown template `{}`",
                            c.id, o.template
                        )));
                    };
                    if !seen.insert(o.template.clone()) {
                        return Err(Error::Invariant(format!(
                            "connector `{}` variant {vi} overrides template `{}` twice",
                            c.id, o.template
                        )));
                    }
                    let what = format!("connector `{}` variant {vi} override of `{}`", c.id, o.template);
                    let base = self.templates[ti].part.shape;
                    let kind_ok = match o.effect {
                        OverrideEffect::Replace(shape) => {
                            shape.validate(&what)?;
                            shape.kind() == base.kind()
                        }
                        OverrideEffect::End { angle, trim, .. } => {
                            PartShape::mitered(1.0, angle, SQUARE).validate(&what)?;
                            if !(trim.is_finite() && trim >= 0.0) {
                                return Err(Error::Invariant(format!("{what}: trim must be >= 0")));
                            }
                            base.kind() == StockKind::OneD
                        }
                        OverrideEffect::Omit => true,
                    };
                    if !kind_ok {
                        return Err(Error::Invariant(format!(
                            "connector `{}` variant {vi} changes the kind of template `{}`",
                            c.id, o.template
                        )));
                    }
                }
            }
        }

        for s in &self.stock {
            s.shape.validate(&format!("stock `{}`", s.id))?;
            if !(s.price.is_finite() && s.price >= 0.0) {
                return Err(Error::Invariant(format!("stock `{}`: price must be >= 0", s.id)));
            }
            if !(s.kerf.is_finite() && s.kerf >= 0.0) {
                return Err(Error::Invariant(format!("stock `{}`: kerf must be >= 0", s.id)));
            }
        }
        for t in &self.tools {
            let fields = [t.cut_time, t.setup_time, t.base_error];
            if fields.iter().any(|v| !v.is_finite() || *v < 0.0) {
                return Err(Error::Invariant(format!(
                    "tool `{}`: times and errors must be >= 0",
                    t.id
                )));
            }
            if t.stack_limit < 1 {
                return Err(Error::Invariant(format!(
                    "tool `{}`: stack_limit must be >= 1",
                    t.id
                )));
            }
        }

        // Every part shape that can occur needs a stock of its kind and material,
        // and a tool that can cut that kind.
        let mut needed = BTreeSet::new();
        for t in &self.templates {
            needed.insert((t.part.shape.kind(), t.part.material.clone()));
        }
        for kind in needed.iter().map(|(k, _)| *k).collect::<BTreeSet<_>>() {
            if !self.tools.iter().any(|t| t.applicable_kind() == kind) {
                return Err(Error::Invariant(format!("no tool can cut {kind:?} stock")));
            }
        }
        for (kind, material) in needed {
            if !self
                .stock
                .iter()
                .any(|s| s.kind() == kind && s.material == material)
            {
                return Err(Error::Invariant(format!(
                    "no {kind:?} stock of material `{material}`"
                )));
            }
        }

        for d in &self.designs {
            self.check_design(&d.genes)?;
        }
        Ok(())
    }

    pub fn check_design(&self, d: &DesignVector) -> Result<()> {
        if d.0.len() != self.connectors.len() {
            return Err(Error::GeneCount {
                got: d.0.len(),
                expected: self.connectors.len(),
            });
        }
        for (c, &g) in self.connectors.iter().zip(&d.0) {
            if g as usize >= c.variants.len() {
                return Err(Error::GeneOutOfRange {
                    connector: c.id.to_string(),
                    gene: g,
                    variants: c.variants.len(),
                });
            }
        }
        Ok(())
    }

    /// Number of part templates, i.e. parts in a canonical design.
    pub fn n_parts(&self) -> usize {
        self.templates.len()
    }

    pub fn variant_counts(&self) -> Vec<u32> {
        self.connectors
            .iter()
            .map(|c| c.variants.len() as u32)
            .collect()
    }

    /// The input design: first named design, or all-zero genes.
    pub fn input_design(&self) -> DesignVector {
        self.designs
            .first()
            .map(|d| d.genes.clone())
            .unwrap_or_else(|| DesignVector(vec![0; self.connectors.len()]))
    }

    pub fn instantiate_design(&self, d: &DesignVector) -> Result<BagOfParts> {
        self.check_design(d)?;
        let mut parts: Vec<ConcretePart> = self.templates.iter().map(|t| t.part.clone()).collect();
        let mut kept = vec![true; parts.len()];
        for (c, &g) in self.connectors.iter().zip(&d.0) {
            for o in &c.variants[g as usize].overrides {
                let i = self.template_index[&o.template];
                if o.effect == OverrideEffect::Omit {
                    kept[i] = false;
                }
                parts[i].shape = o.effect.apply(parts[i].shape);
            }
        }
        let parts: Vec<ConcretePart> = parts.into_iter().zip(kept).filter_map(|(p, k)| k.then_some(p)).collect();
        if parts.is_empty() {
            return Err(Error::Invariant(format!("design {d} omits every part")));
        }
        for p in &parts {
            p.shape.validate(&format!("part `{}` of design {d}", p.template_id))?;
        }
        Ok(BagOfParts(parts))
    }

    pub fn random_design<R: Rng + ?Sized>(&self, rng: &mut R) -> DesignVector {
        DesignVector(
            self.connectors
                .iter()
                .map(|c| rng.gen_range(0..c.variants.len() as u32))
                .collect(),
        )
    }

    /// Total number of assignments as a float, saturating for huge spaces.
    pub fn assignment_count_f64(&self) -> f64 {
        self.connectors
            .iter()
            .map(|c| c.variants.len() as f64)
            .product()
    }

    /// Iterates every design vector in mixed-radix order.
    pub fn all_designs(&self) -> AllDesigns {
        AllDesigns {
            radix: self.variant_counts(),
            next: Some(vec![0; self.connectors.len()]),
        }
    }

    pub fn design_space_size(&self, cap: u64) -> DesignSpaceSize {
        let cap = cap.max(1);
        let assignments: BigUint = self
            .connectors
            .iter()
            .fold(BigUint::from(1u32), |acc, c| acc * c.variants.len());
        if assignments <= BigUint::from(cap) {
            let keys: BTreeSet<BopKey> = self
                .all_designs()
                .map(|d| bop_key(&self.instantiate_design(&d).expect("enumerated design is valid")))
                .collect();
            DesignSpaceSize {
                assignments,
                unique_bops: keys.len(),
                exact: true,
            }
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(0);
            let keys: BTreeSet<BopKey> = (0..cap)
                .map(|_| {
                    let d = self.random_design(&mut rng);
                    bop_key(&self.instantiate_design(&d).expect("sampled design is valid"))
                })
                .collect();
            DesignSpaceSize {
                assignments,
                unique_bops: keys.len(),
                exact: false,
            }
        }
    }

    pub fn tool(&self, id: &str) -> Option<&Tool> {
        self.tools.iter().find(|t| &*t.id == id)
    }

    pub fn stock_type(&self, id: &str) -> Option<&StockType> {
        self.stock.iter().find(|s| &*s.id == id)
    }

    /// First tool able to cut stock of the given kind.
    pub fn tool_for(&self, kind: StockKind) -> Option<&Tool> {
        self.tools.iter().find(|t| t.applicable_kind() == kind)
    }
}

fn unique_ids<'a>(kind: &'static str, ids: impl Iterator<Item = &'a Ident>) -> Result<()> {
    let mut seen = BTreeSet::new();
    for id in ids {
        if !seen.insert(id.clone()) {
            return Err(Error::DuplicateId {
                kind,
                id: id.to_string(),
            });
        }
    }
    Ok(())
}

/// Mixed-radix enumeration of design vectors.
pub struct AllDesigns {
    radix: Vec<u32>,
    next: Option<Vec<u32>>,
}

impl Iterator for AllDesigns {
    type Item = DesignVector;

    fn next(&mut self) -> Option<DesignVector> {
        let cur = self.next.take()?;
        let mut succ = cur.clone();
        let mut i = succ.len();
        loop {
            if i == 0 {
                break;
            }
            i -= 1;
            succ[i] += 1;
            if succ[i] < self.radix[i] {
                self.next = Some(succ);
                break;
            }
            succ[i] = 0;
        }
        Some(DesignVector(cur))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn part(id: &str, len: f64) -> ConcretePart {
        ConcretePart::new(id, PartShape::bar(len), "pine")
    }

    #[test]
    fn bop_key_is_order_independent_and_ignores_template() {
        let a = part("a", 100.0);
        let b = part("b", 200.0);
        let k1 = bop_key(&BagOfParts(vec![a.clone(), b.clone()]));
        let k2 = bop_key(&BagOfParts(vec![b, a]));
        assert_eq!(k1, k2);
        assert_eq!(k1.to_bytes(), k2.to_bytes());

        let m1 = ConcretePart::new("top", PartShape::mitered(500.0, 45.0, 45.0), "pine");
        let m2 = ConcretePart::new("bottom", PartShape::mitered(500.0, 45.0, 45.0), "pine");
        let k = bop_key(&BagOfParts(vec![m1, m2]));
        assert_eq!(k.entries().len(), 1);
        assert_eq!(k.entries()[0].1, 2);
    }

    #[test]
    fn empty_bag_key() {
        let k = bop_key(&BagOfParts::default());
        assert!(k.is_empty());
        assert_eq!(k.len(), 0);
        assert!(k.to_bytes().is_empty());
    }

    #[test]
    fn equality_quantizes_noise() {
        let a = part("a", 100.0);
        let b = part("b", 100.0 + 1e-7);
        assert_eq!(a, b);
        let c = part("c", 100.01);
        assert_ne!(a, c);
        let flipped1 = ConcretePart::new("x", PartShape::mitered(10.0, 45.0, 90.0), "pine");
        let flipped2 = ConcretePart::new("y", PartShape::mitered(10.0, 90.0, 45.0), "pine");
        assert_eq!(flipped1, flipped2);
        let other_material = ConcretePart::new("a", PartShape::bar(100.0), "oak");
        assert_ne!(a, other_material);
    }

    #[test]
    fn identical_parts_score_examples() {
        let bag = |lens: &[f64]| BagOfParts(lens.iter().map(|&l| part("p", l)).collect());
        assert_eq!(identical_parts_score(&bag(&[1.0, 2.0, 3.0, 4.0])), 0);
        assert_eq!(identical_parts_score(&bag(&[1.0, 1.0, 1.0, 1.0])), 3);
        assert_eq!(identical_parts_score(&bag(&[1.0, 1.0, 2.0, 2.0, 3.0])), 2);
    }

    #[test]
    fn union_matches_concatenation() {
        let a = BagOfParts(vec![part("a", 1.0), part("b", 2.0)]);
        let b = BagOfParts(vec![part("c", 2.0), part("d", 3.0)]);
        let both = BagOfParts(a.0.iter().chain(&b.0).cloned().collect());
        assert_eq!(a.key().union(&b.key()), both.key());
    }

    #[test]
    fn all_designs_counts_product() {
        let it = AllDesigns {
            radix: vec![2, 3],
            next: Some(vec![0, 0]),
        };
        let v: Vec<_> = it.collect();
        assert_eq!(v.len(), 6);
        assert_eq!(v[5], DesignVector(vec![1, 2]));
        let none = AllDesigns {
            radix: vec![],
            next: Some(vec![]),
        };
        assert_eq!(none.count(), 1);
    }
}
