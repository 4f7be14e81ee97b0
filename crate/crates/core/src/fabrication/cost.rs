//! Cost model.
//!
//! * material `f_c`: sum of stock prices over every piece used;
//! * precision `f_p`: sum over every piece of its cuts' errors (see [`super::cuts`]);
//! * time `f_t`: stacks of identical pieces run their cuts once. Each cut costs
//!   the tool's `cut_time`; each change of tool or saw setting between two
//!   consecutive cuts costs the new tool's `setup_time`.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::cuts::{simulate, CutGeometry, CutOrder};
use super::packing::Packing;
use crate::error::{Error, Result};
use crate::model::{DesignSpaceModel, Ident};

/// `(f_c, f_p, f_t)`, minimized componentwise.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(from = "Named", into = "Named")]
pub struct ObjectiveVector(pub [f64; 3]);

#[derive(Serialize, Deserialize)]
struct Named {
    f_c: f64,
    f_p: f64,
    f_t: f64,
}

impl From<Named> for ObjectiveVector {
    fn from(n: Named) -> Self {
        ObjectiveVector([n.f_c, n.f_p, n.f_t])
    }
}

impl From<ObjectiveVector> for Named {
    fn from(v: ObjectiveVector) -> Self {
        Named {
            f_c: v.0[0],
            f_p: v.0[1],
            f_t: v.0[2],
        }
    }
}

impl ObjectiveVector {
    pub const ZERO: ObjectiveVector = ObjectiveVector([0.0; 3]);

    pub fn new(f_c: f64, f_p: f64, f_t: f64) -> Self {
        ObjectiveVector([f_c, f_p, f_t])
    }

    pub fn f_c(&self) -> f64 {
        self.0[0]
    }

    pub fn f_p(&self) -> f64 {
        self.0[1]
    }

    pub fn f_t(&self) -> f64 {
        self.0[2]
    }

    pub fn min(&self, other: &Self) -> Self {
        ObjectiveVector(std::array::from_fn(|i| self.0[i].min(other.0[i])))
    }

    pub fn max(&self, other: &Self) -> Self {
        ObjectiveVector(std::array::from_fn(|i| self.0[i].max(other.0[i])))
    }

    pub fn add(&self, other: &Self) -> Self {
        ObjectiveVector(std::array::from_fn(|i| self.0[i] + other.0[i]))
    }

    pub fn le_all(&self, other: &Self) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| *a <= *b)
    }

    pub fn bits(&self) -> [u64; 3] {
        self.0.map(f64::to_bits)
    }
}

impl AsRef<[f64]> for ObjectiveVector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

impl fmt::Display for ObjectiveVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(c={:.4}, p={:.4}, t={:.4})", self.0[0], self.0[1], self.0[2])
    }
}

/// Tool plus quantized saw setting.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Config {
    pub tool: Ident,
    pub setting: i64,
}

pub(crate) fn config_of(tool: &Ident, g: &CutGeometry) -> Config {
    Config {
        tool: tool.clone(),
        setting: g.setting(),
    }
}

pub(crate) fn order_precision(model: &DesignSpaceModel, packing: &Packing, order: &CutOrder) -> Result<f64> {
    let Some(first) = order.cuts.first() else {
        return if super::cuts::required_cuts(packing)?.is_empty() {
            Ok(0.0)
        } else {
            Err(Error::InvalidCutOrder("empty order for a packing that needs cuts".into()))
        };
    };
    if order.cuts.iter().any(|c| c.tool != first.tool) {
        return Err(Error::InvalidCutOrder("mixed tools on one piece".into()));
    }
    let tool = lookup_tool(model, &first.tool)?;
    if tool.applicable_kind() != packing.kind() {
        return Err(Error::InvalidCutOrder(format!(
            "tool `{}` cannot cut stock `{}`",
            tool.id, packing.stock.id
        )));
    }
    let geoms: Vec<CutGeometry> = order.cuts.iter().map(|c| c.geometry).collect();
    Ok(simulate(packing, &geoms, tool.base_error)?.iter().sum())
}

fn lookup_tool<'m>(model: &'m DesignSpaceModel, id: &str) -> Result<&'m crate::model::Tool> {
    model
        .tool(id)
        .ok_or_else(|| Error::InvalidCutOrder(format!("unknown tool `{id}`")))
}

pub(crate) fn stack_limit(model: &DesignSpaceModel, order: &CutOrder) -> u32 {
    order
        .cuts
        .iter()
        .filter_map(|c| model.tool(&c.tool))
        .map(|t| t.stack_limit)
        .min()
        .unwrap_or(u32::MAX)
}

/// Evaluates a plan: `pieces` are the stock pieces with their cut orders and
/// `stacks` the execution sequence, each stack listing indices of identical
/// pieces cut together. Every piece must appear in exactly one stack.
pub fn evaluate_costs(
    model: &DesignSpaceModel,
    pieces: &[(Packing, CutOrder)],
    stacks: &[Vec<usize>],
) -> Result<ObjectiveVector> {
    let mut seen = vec![false; pieces.len()];
    for s in stacks {
        let Some(&head) = s.first() else {
            return Err(Error::InvalidCutOrder("empty stack".into()));
        };
        for &i in s {
            if i >= pieces.len() || std::mem::replace(&mut seen[i], true) {
                return Err(Error::InvalidCutOrder(format!("piece {i} stacked twice or unknown")));
            }
            if i != head && (pieces[i].0.fingerprint() != pieces[head].0.fingerprint() || pieces[i].1 != pieces[head].1) {
                return Err(Error::InvalidCutOrder(
                    "stacked pieces must share packing and cut order".into(),
                ));
            }
        }
        if s.len() as u32 > stack_limit(model, &pieces[head].1) {
            return Err(Error::InvalidCutOrder(format!(
                "stack of {} exceeds the tool's stack limit",
                s.len()
            )));
        }
    }
    if let Some(i) = seen.iter().position(|s| !s) {
        return Err(Error::InvalidCutOrder(format!("piece {i} is never cut")));
    }

    let mut f_c = 0.0;
    let mut f_p = 0.0;
    for (packing, order) in pieces {
        f_c += packing.stock.price;
        f_p += order_precision(model, packing, order)?;
    }
    let mut f_t = 0.0;
    let mut prev: Option<Config> = None;
    for s in stacks {
        for c in &pieces[s[0]].1.cuts {
            let tool = lookup_tool(model, &c.tool)?;
            let cfg = config_of(&c.tool, &c.geometry);
            if prev.as_ref().is_some_and(|p| *p != cfg) {
                f_t += tool.setup_time;
            }
            f_t += tool.cut_time;
            prev = Some(cfg);
        }
    }
    Ok(ObjectiveVector([f_c, f_p, f_t]))
}

/// One stack per piece, in piece order.
pub fn unstacked(n: usize) -> Vec<Vec<usize>> {
    (0..n).map(|i| vec![i]).collect()
}
