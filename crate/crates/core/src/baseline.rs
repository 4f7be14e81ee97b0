//! Reference optimizers: per-design nested optimization without sharing, and
//! an exhaustive oracle for small models.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fabrication::{enumerate_arrangements, optimize_atomic, plan_term, AtomicPlans, Packing};
use crate::fingerprint::Fingerprint;
use crate::icee::{pareto_filter, IceeParams, RunOptions, RunReport};
use crate::model::{BopKey, DesignSpaceModel, DesignVector};
use crate::moo::Solution;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleBudget {
    pub max_designs: usize,
    pub max_arrangements_per_design: usize,
    pub max_cut_orders_per_atomic: usize,
}

impl Default for OracleBudget {
    /// Enough for every order of a piece with up to six cuts.
    fn default() -> Self {
        OracleBudget {
            max_designs: 1_000,
            max_arrangements_per_design: 200_000,
            max_cut_orders_per_atomic: 720,
        }
    }
}

impl OracleBudget {
    pub fn validate(&self) -> Result<()> {
        if self.max_designs == 0 || self.max_arrangements_per_design == 0 || self.max_cut_orders_per_atomic == 0 {
            return Err(Error::Param("oracle budgets must be at least 1".into()));
        }
        Ok(())
    }
}

/// ICEE confined to one design: a fresh e-graph with a single root and no
/// design expansion.
pub fn optimize_single_design(
    model: &DesignSpaceModel,
    design: &DesignVector,
    params: &IceeParams,
    options: &RunOptions,
) -> Result<(Vec<Solution>, RunReport)> {
    let mut params = params.clone();
    params.k_nd = 0;
    let options = RunOptions {
        fixed_designs: Some(vec![design.clone()]),
        ..options.clone()
    };
    let (icee, report) = crate::icee::run(model, params, options)?;
    Ok((icee.front(), report))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DesignRun {
    pub design: DesignVector,
    pub front_size: usize,
    pub secs: f64,
}

#[derive(Clone, Debug)]
pub struct NestedOutcome {
    pub front: Vec<Solution>,
    pub runs: Vec<DesignRun>,
    pub total_secs: f64,
    /// Designs left unrun because `time_limit` passed.
    pub skipped: usize,
}

/// Runs [`optimize_single_design`] for each design in turn, sharing nothing,
/// and merges the fronts. Stops starting new designs once `time_limit`
/// seconds have passed.
pub fn nested_optimize(
    designs: &[DesignVector],
    model: &DesignSpaceModel,
    params: &IceeParams,
    options: &RunOptions,
    time_limit: Option<f64>,
) -> Result<NestedOutcome> {
    let t0 = Instant::now();
    let mut all = Vec::new();
    let mut runs = Vec::with_capacity(designs.len());
    for d in designs {
        if time_limit.is_some_and(|l| t0.elapsed().as_secs_f64() >= l) {
            break;
        }
        let t = Instant::now();
        let (front, _) = optimize_single_design(model, d, params, options)?;
        runs.push(DesignRun {
            design: d.clone(),
            front_size: front.len(),
            secs: t.elapsed().as_secs_f64(),
        });
        all.extend(front);
    }
    Ok(NestedOutcome {
        front: pareto_filter(all),
        skipped: designs.len() - runs.len(),
        runs,
        total_secs: t0.elapsed().as_secs_f64(),
    })
}

/// Exact front over every unique bag of parts, every arrangement the
/// generator's placement rules can express, and up to
/// `max_cut_orders_per_atomic` cut orders per piece.
pub fn exhaustive_oracle(model: &DesignSpaceModel, budget: OracleBudget) -> Result<Vec<Solution>> {
    budget.validate()?;
    let size = model.design_space_size(budget.max_designs as u64);
    if !size.exact {
        return Err(Error::BudgetExceeded(format!(
            "{} assignments exceed the {} design budget",
            size.assignments, budget.max_designs
        )));
    }
    let mut designs: BTreeMap<BopKey, DesignVector> = BTreeMap::new();
    for d in model.all_designs() {
        let key = model.instantiate_design(&d)?.key();
        designs.entry(key).or_insert(d);
    }
    let mut plans: HashMap<Fingerprint, Arc<AtomicPlans>> = HashMap::new();
    let mut all = Vec::new();
    for design in designs.into_values() {
        let bag = model.instantiate_design(&design)?;
        let terms = enumerate_arrangements(&bag, model, budget.max_arrangements_per_design)?;
        log::debug!("oracle: design {design}, {} arrangements", terms.len());
        let missing: Vec<Packing> = {
            let mut m: HashMap<Fingerprint, Packing> = HashMap::new();
            for t in &terms {
                for p in t.packings() {
                    if !plans.contains_key(&p.fingerprint()) {
                        m.entry(p.fingerprint()).or_insert_with(|| p.clone());
                    }
                }
            }
            let mut v: Vec<(Fingerprint, Packing)> = m.into_iter().collect();
            v.sort_by_key(|(f, _)| *f);
            v.into_iter().map(|(_, p)| p).collect()
        };
        let solved: Vec<Result<(Fingerprint, AtomicPlans)>> = missing
            .par_iter()
            .map(|p| Ok((p.fingerprint(), optimize_atomic(model, p, budget.max_cut_orders_per_atomic)?)))
            .collect();
        for r in solved {
            let (f, a) = r?;
            plans.insert(f, Arc::new(a));
        }
        let evaluated: Vec<Result<Vec<Solution>>> = terms
            .par_iter()
            .map(|t| {
                let leaves: Vec<(Packing, Arc<AtomicPlans>)> = t
                    .packings()
                    .into_iter()
                    .map(|p| (p.clone(), plans[&p.fingerprint()].clone()))
                    .collect();
                let fp = t.fingerprint();
                Ok(plan_term(model, &leaves)?
                    .into_iter()
                    .map(|(plan, cost)| Solution {
                        design: design.clone(),
                        term_fingerprint: fp,
                        plan: Arc::new(plan),
                        cost,
                        support: Vec::new(),
                    })
                    .collect())
            })
            .collect();
        let mut batch = Vec::new();
        for r in evaluated {
            batch.extend(r?);
        }
        all.extend(pareto_filter(batch));
        all = pareto_filter(all);
    }
    Ok(all)
}
