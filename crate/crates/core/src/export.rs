//! Front export: CSV with fixed formatting, JSON with the full fabrication
//! plans.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fabrication::ObjectiveVector;
use crate::model::DesignSpaceModel;
use crate::moo::{hypervolume, Solution};

pub const CSV_HEADER: &str = "design_vector,f_c,f_p,f_t,term_fingerprint";

/// `x` rounded to 6 significant digits, without trailing zeros.
pub fn sig6(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { "0".into() } else { x.to_string() };
    }
    let exp = x.abs().log10().floor() as i32;
    let s = if (-5..6).contains(&exp) {
        format!("{:.*}", (5 - exp).max(0) as usize, x)
    } else {
        let s = format!("{x:.5e}");
        let (mantissa, e) = s.split_once('e').expect("scientific format");
        return format!("{}e{e}", trim_zeros(mantissa));
    };
    trim_zeros(&s).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Solutions sorted by cost, then design, then term fingerprint.
pub fn sorted(front: &[Solution]) -> Vec<&Solution> {
    let mut v: Vec<&Solution> = front.iter().collect();
    v.sort_by(|a, b| {
        a.cost
            .0
            .iter()
            .zip(&b.cost.0)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| a.design.cmp(&b.design))
            .then_with(|| a.term_fingerprint.cmp(&b.term_fingerprint))
    });
    v
}

pub fn front_csv(front: &[Solution]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for s in sorted(front) {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            s.design,
            sig6(s.cost.f_c()),
            sig6(s.cost.f_p()),
            sig6(s.cost.f_t()),
            s.term_fingerprint
        );
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrontDocument {
    pub reference: ObjectiveVector,
    pub hypervolume: f64,
    pub solutions: Vec<Solution>,
}

impl FrontDocument {
    pub fn new(front: &[Solution], reference: ObjectiveVector) -> Result<Self> {
        let costs: Vec<ObjectiveVector> = front.iter().map(|s| s.cost).collect();
        Ok(FrontDocument {
            reference,
            hypervolume: hypervolume(&costs, &reference.0)?,
            solutions: sorted(front).into_iter().cloned().collect(),
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Re-evaluates every plan and checks it reproduces the stored cost exactly.
    pub fn revalidate(&self, model: &DesignSpaceModel) -> Result<()> {
        for s in &self.solutions {
            let cost = s.plan.evaluate(model)?;
            if cost.bits() != s.cost.bits() {
                return Err(Error::Violation(format!(
                    "plan of {} evaluates to {cost}, stored {}",
                    s.term_fingerprint, s.cost
                )));
            }
            let bag = model.instantiate_design(&s.design)?.key();
            let planned = crate::model::BopKey::from_keys(
                s.plan
                    .pieces
                    .iter()
                    .flat_map(|p| p.packing.placements.iter().map(|pl| pl.part.key())),
            );
            if bag != planned {
                return Err(Error::Violation(format!(
                    "plan of {} does not produce the parts of design {}",
                    s.term_fingerprint, s.design
                )));
            }
        }
        Ok(())
    }
}
