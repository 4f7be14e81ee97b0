//! Cutting-order optimization: per-packing plans, term bounds and whole-term plans.

use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use super::cost::{config_of, evaluate_costs, stack_limit, Config, ObjectiveVector};
use super::cuts::{enumerate_cut_orders, CutOrder};
use super::packing::Packing;
use crate::error::{Error, Result};
use crate::fingerprint::Fingerprint;
use crate::model::DesignSpaceModel;

/// Local search budget of [`finalize_term`].
pub const LOCAL_SEARCH_ITERATIONS: usize = 100;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CutPlan {
    pub order: CutOrder,
    pub cost: ObjectiveVector,
}

/// The two single-objective optima of one packing, plus every order evaluated.
#[derive(Clone, Debug)]
pub struct AtomicPlans {
    pub min_time: CutPlan,
    pub min_precision: CutPlan,
    pub candidates: Vec<CutPlan>,
}

/// Evaluates up to `p` cut orders per packing, memoizing into atomic e-nodes.
#[derive(Debug)]
pub struct CutPlanner<'m> {
    pub model: &'m DesignSpaceModel,
    pub p: usize,
    enumerations: AtomicUsize,
}

impl<'m> CutPlanner<'m> {
    pub fn new(model: &'m DesignSpaceModel, p: usize) -> Self {
        CutPlanner {
            model,
            p: p.max(1),
            enumerations: AtomicUsize::new(0),
        }
    }

    /// Number of times cut orders were actually enumerated.
    pub fn enumerations(&self) -> usize {
        self.enumerations.load(Ordering::Relaxed)
    }

    pub fn optimize(&self, packing: &Packing) -> Result<AtomicPlans> {
        self.enumerations.fetch_add(1, Ordering::Relaxed);
        optimize_atomic(self.model, packing, self.p)
    }

    /// Cached plans of a packing; computes and stores them on first use.
    pub fn cached(&self, cell: &OnceLock<Arc<AtomicPlans>>, packing: &Packing) -> Result<Arc<AtomicPlans>> {
        if let Some(p) = cell.get() {
            return Ok(p.clone());
        }
        let plans = Arc::new(self.optimize(packing)?);
        Ok(cell.get_or_init(|| plans).clone())
    }
}

fn order_key(order: &CutOrder) -> Fingerprint {
    Fingerprint::of(&order.fingerprint_bytes())
}

/// Min-time and min-precision orders among the first `p` enumerated ones.
/// Ties go to the other objective, then to the order fingerprint.
pub fn optimize_atomic(model: &DesignSpaceModel, packing: &Packing, p: usize) -> Result<AtomicPlans> {
    let orders = enumerate_cut_orders(packing, model, p);
    if orders.is_empty() {
        return Err(Error::InvalidPacking(format!(
            "no valid cut order for a packing on `{}`",
            packing.stock.id
        )));
    }
    let mut candidates = Vec::with_capacity(orders.len());
    for order in orders {
        let cost = evaluate_costs(model, &[(packing.clone(), order.clone())], &[vec![0]])?;
        candidates.push(CutPlan { order, cost });
    }
    let keyed: Vec<Fingerprint> = candidates.iter().map(|c| order_key(&c.order)).collect();
    let best = |primary: usize, secondary: usize| {
        (0..candidates.len())
            .min_by(|&a, &b| {
                let (ca, cb) = (&candidates[a].cost.0, &candidates[b].cost.0);
                ca[primary]
                    .total_cmp(&cb[primary])
                    .then(ca[secondary].total_cmp(&cb[secondary]))
                    .then(keyed[a].cmp(&keyed[b]))
            })
            .expect("non-empty")
    };
    let t = best(2, 1);
    let pr = best(1, 2);
    Ok(AtomicPlans {
        min_time: candidates[t].clone(),
        min_precision: candidates[pr].clone(),
        candidates,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlannedPiece {
    pub packing: Packing,
    pub order: CutOrder,
}

/// A complete fabrication plan: every stock piece with its cut order, and the
/// execution sequence of stacks (indices into `pieces`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FabricationPlan {
    pub pieces: Vec<PlannedPiece>,
    pub stacks: Vec<Vec<usize>>,
}

impl FabricationPlan {
    pub fn evaluate(&self, model: &DesignSpaceModel) -> Result<ObjectiveVector> {
        let pieces: Vec<(Packing, CutOrder)> = self
            .pieces
            .iter()
            .map(|p| (p.packing.clone(), p.order.clone()))
            .collect();
        evaluate_costs(model, &pieces, &self.stacks)
    }

    pub fn fingerprint(&self) -> Fingerprint {
        let mut bytes = Vec::new();
        for p in &self.pieces {
            bytes.extend_from_slice(&p.packing.fingerprint().to_bytes());
            bytes.extend_from_slice(&p.order.fingerprint_bytes());
        }
        for s in &self.stacks {
            bytes.push(b'|');
            for &i in s {
                bytes.extend_from_slice(&(i as u64).to_le_bytes());
            }
        }
        Fingerprint::of(&bytes)
    }
}

/// Identical packings of a term, in first-appearance order.
struct Group {
    packing: Packing,
    count: usize,
    plans: Arc<AtomicPlans>,
    limit: usize,
}

fn group_leaves(model: &DesignSpaceModel, leaves: &[(Packing, Arc<AtomicPlans>)]) -> Vec<Group> {
    let mut index: HashMap<Fingerprint, usize> = HashMap::new();
    let mut groups: Vec<Group> = Vec::new();
    for (packing, plans) in leaves {
        let fp = packing.fingerprint();
        match index.get(&fp) {
            Some(&g) => groups[g].count += 1,
            None => {
                index.insert(fp, groups.len());
                let limit = stack_limit(model, &plans.min_time.order).max(1) as usize;
                groups.push(Group {
                    packing: packing.clone(),
                    count: 1,
                    plans: plans.clone(),
                    limit,
                });
            }
        }
    }
    groups
}

/// Lower and upper bound of a term's cost. The lower bound takes each
/// packing's best value per objective and charges the time of identical
/// packings once per full stack; the upper bound is the exact cost of the
/// min-time orders stacked in term order.
pub fn term_bounds(
    model: &DesignSpaceModel,
    leaves: &[(Packing, Arc<AtomicPlans>)],
) -> Result<(ObjectiveVector, ObjectiveVector)> {
    let groups = group_leaves(model, leaves);
    let mut lower = ObjectiveVector::ZERO;
    for g in &groups {
        let best = g.plans.min_time.cost.min(&g.plans.min_precision.cost);
        let n = g.count as f64;
        let runs = g.count.div_ceil(g.limit) as f64;
        lower = lower.add(&ObjectiveVector::new(best.f_c() * n, best.f_p() * n, best.f_t() * runs));
    }
    let choice = vec![0usize; groups.len()];
    let cands: Vec<Vec<CutPlan>> = groups.iter().map(|g| vec![g.plans.min_time.clone()]).collect();
    let upper = build_plan(&groups, &cands, &choice, &initial_sequence(&groups)).evaluate(model)?;
    Ok((lower, upper))
}

fn initial_sequence(groups: &[Group]) -> Vec<(usize, usize)> {
    let mut seq = Vec::new();
    for (gi, g) in groups.iter().enumerate() {
        let mut left = g.count;
        while left > 0 {
            let s = left.min(g.limit);
            seq.push((gi, s));
            left -= s;
        }
    }
    seq
}

fn build_plan(groups: &[Group], cands: &[Vec<CutPlan>], choice: &[usize], seq: &[(usize, usize)]) -> FabricationPlan {
    let mut pieces = Vec::new();
    let mut stacks = Vec::new();
    for &(g, size) in seq {
        let order = &cands[g][choice[g]].order;
        let start = pieces.len();
        for _ in 0..size {
            pieces.push(PlannedPiece {
                packing: groups[g].packing.clone(),
                order: order.clone(),
            });
        }
        stacks.push((start..start + size).collect());
    }
    FabricationPlan { pieces, stacks }
}

/// Precomputed summary of one candidate order for fast sequence evaluation.
struct OrderSummary {
    time: f64,
    precision: f64,
    first: Option<(Config, f64)>,
    last: Option<Config>,
}

fn summarize(model: &DesignSpaceModel, plan: &CutPlan) -> OrderSummary {
    let setup = |tool: &str| model.tool(tool).map_or(0.0, |t| t.setup_time);
    OrderSummary {
        time: plan.cost.f_t(),
        precision: plan.cost.f_p(),
        first: plan
            .order
            .cuts
            .first()
            .map(|c| (config_of(&c.tool, &c.geometry), setup(&c.tool))),
        last: plan.order.cuts.last().map(|c| config_of(&c.tool, &c.geometry)),
    }
}

fn fast_eval(groups: &[Group], sums: &[Vec<OrderSummary>], choice: &[usize], seq: &[(usize, usize)]) -> (f64, f64) {
    let mut t = 0.0;
    let mut prev: Option<&Config> = None;
    for &(g, _) in seq {
        let s = &sums[g][choice[g]];
        if let (Some(p), Some((first, setup))) = (prev, &s.first) {
            if p != first {
                t += setup;
            }
        }
        t += s.time;
        if let Some(l) = &s.last {
            prev = Some(l);
        }
    }
    let p = groups
        .iter()
        .enumerate()
        .map(|(g, grp)| sums[g][choice[g]].precision * grp.count as f64)
        .sum();
    (t, p)
}

/// Steepest-descent over order choices and stack sequence, minimizing
/// `(primary, secondary)` lexicographically.
fn local_search(
    groups: &[Group],
    sums: &[Vec<OrderSummary>],
    choice: &mut [usize],
    seq: &mut [(usize, usize)],
    time_first: bool,
) {
    let score = |choice: &[usize], seq: &[(usize, usize)]| {
        let (t, p) = fast_eval(groups, sums, choice, seq);
        if time_first {
            (t, p)
        } else {
            (p, t)
        }
    };
    let better = |a: (f64, f64), b: (f64, f64)| a.0 < b.0 - 1e-9 || (a.0 <= b.0 + 1e-9 && a.1 < b.1 - 1e-9);
    let mut current = score(choice, seq);
    for _ in 0..LOCAL_SEARCH_ITERATIONS {
        let mut best: Option<((f64, f64), Move)> = None;
        for g in 0..groups.len() {
            for c in 0..sums[g].len() {
                if c == choice[g] {
                    continue;
                }
                let old = choice[g];
                choice[g] = c;
                let s = score(choice, seq);
                choice[g] = old;
                if better(s, best.map_or(current, |b| b.0)) {
                    best = Some((s, Move::Choose(g, c)));
                }
            }
        }
        for i in 0..seq.len() {
            for j in i + 1..seq.len() {
                if seq[i].0 == seq[j].0 {
                    continue;
                }
                seq.swap(i, j);
                let s = score(choice, seq);
                seq.swap(i, j);
                if better(s, best.map_or(current, |b| b.0)) {
                    best = Some((s, Move::Swap(i, j)));
                }
            }
        }
        match best {
            None => break,
            Some((s, Move::Choose(g, c))) => {
                choice[g] = c;
                current = s;
            }
            Some((s, Move::Swap(i, j))) => {
                seq.swap(i, j);
                current = s;
            }
        }
    }
}

#[derive(Clone, Copy)]
enum Move {
    Choose(usize, usize),
    Swap(usize, usize),
}

/// Min-time and min-precision plans for a whole term: identical packings are
/// stacked, orders and stack sequence improved by local search from the
/// upper-bound plan. Returns one or two distinct `(plan, cost)` pairs.
pub fn plan_term(
    model: &DesignSpaceModel,
    leaves: &[(Packing, Arc<AtomicPlans>)],
) -> Result<Vec<(FabricationPlan, ObjectiveVector)>> {
    let groups = group_leaves(model, leaves);
    let cands: Vec<Vec<CutPlan>> = groups.iter().map(|g| g.plans.candidates.clone()).collect();
    let sums: Vec<Vec<OrderSummary>> = cands
        .iter()
        .map(|cs| cs.iter().map(|c| summarize(model, c)).collect())
        .collect();
    let index_of = |g: usize, plan: &CutPlan| cands[g].iter().position(|c| c.order == plan.order).unwrap_or(0);

    let mut out: Vec<(FabricationPlan, ObjectiveVector)> = Vec::new();
    for time_first in [true, false] {
        let mut choice: Vec<usize> = groups
            .iter()
            .enumerate()
            .map(|(g, grp)| {
                let start = if time_first {
                    &grp.plans.min_time
                } else {
                    &grp.plans.min_precision
                };
                index_of(g, start)
            })
            .collect();
        let mut seq = initial_sequence(&groups);
        local_search(&groups, &sums, &mut choice, &mut seq, time_first);
        let plan = build_plan(&groups, &cands, &choice, &seq);
        let cost = plan.evaluate(model)?;
        if !out.iter().any(|(p, c)| *c == cost || *p == plan) {
            out.push((plan, cost));
        }
    }
    Ok(out)
}

/// Branch-and-bound step of extraction: returns no solution when some point of
/// `front` dominates the term's lower bound, else [`plan_term`].
pub fn finalize_term(
    model: &DesignSpaceModel,
    leaves: &[(Packing, Arc<AtomicPlans>)],
    front: &[ObjectiveVector],
) -> Result<Vec<(FabricationPlan, ObjectiveVector)>> {
    let (lower, _) = term_bounds(model, leaves)?;
    if front.iter().any(|f| crate::moo::dominates(f, &lower)) {
        return Ok(Vec::new());
    }
    plan_term(model, leaves)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fabrication::cuts::required_cuts;
    use crate::model::{parse_model, ConcretePart, PartShape};

    fn model() -> DesignSpaceModel {
        parse_model(
            r#"{
            "templates": [{"id": "a", "shape": {"bar": {"len": 100}}, "material": "pine"}],
            "stock": [{"id": "s", "shape": {"bar": {"len": 800}}, "price": 5, "kerf": 2, "material": "pine"}],
            "tools": [{"id": "saw", "kind": "chopsaw", "cut_time": 10, "setup_time": 30, "base_error": 0.5, "stack_limit": 4}]
        }"#,
        )
        .unwrap()
    }

    fn bar(id: &str, len: f64) -> ConcretePart {
        ConcretePart::new(id, PartShape::bar(len), "pine")
    }

    fn miter(id: &str, len: f64) -> ConcretePart {
        ConcretePart::new(id, PartShape::mitered(len, 45.0, 45.0), "pine")
    }

    #[test]
    fn single_cut_plans_coincide() {
        let m = model();
        let p = Packing::pack(&m.stock[0], &[(bar("a", 100.0), false)]).unwrap();
        assert_eq!(required_cuts(&p).unwrap().len(), 1);
        let plans = optimize_atomic(&m, &p, 10).unwrap();
        assert_eq!(plans.min_time, plans.min_precision);
    }

    #[test]
    fn min_time_groups_equal_angles() {
        let m = model();
        let p = Packing::pack(
            &m.stock[0],
            &[(bar("a", 100.0), false), (miter("b", 150.0), false), (bar("c", 120.0), false)],
        )
        .unwrap();
        let plans = optimize_atomic(&m, &p, 1000).unwrap();
        let best = plans
            .candidates
            .iter()
            .map(|c| c.cost.f_t())
            .fold(f64::INFINITY, f64::min);
        assert_eq!(plans.min_time.cost.f_t(), best);
        let settings: Vec<i64> = plans.min_time.order.cuts.iter().map(|c| c.geometry.setting()).collect();
        let changes = settings.windows(2).filter(|w| w[0] != w[1]).count();
        let mut distinct = settings.clone();
        distinct.sort();
        distinct.dedup();
        assert_eq!(changes, distinct.len() - 1);
    }

    #[test]
    fn planner_memoizes() {
        let m = model();
        let p = Packing::pack(&m.stock[0], &[(bar("a", 100.0), false), (bar("b", 300.0), false)]).unwrap();
        let planner = CutPlanner::new(&m, 10);
        let cell = OnceLock::new();
        let a = planner.cached(&cell, &p).unwrap();
        let b = planner.cached(&cell, &p).unwrap();
        assert!(Arc::ptr_eq(&a, &b));
        assert_eq!(planner.enumerations(), 1);
    }

    fn leaves(m: &DesignSpaceModel, packings: &[Packing]) -> Vec<(Packing, Arc<AtomicPlans>)> {
        packings
            .iter()
            .map(|p| (p.clone(), Arc::new(optimize_atomic(m, p, 100).unwrap())))
            .collect()
    }

    #[test]
    fn bounds_of_single_atomic() {
        let m = model();
        let p = Packing::pack(&m.stock[0], &[(bar("a", 100.0), false), (miter("b", 200.0), false)]).unwrap();
        let l = leaves(&m, &[p]);
        let (lower, upper) = term_bounds(&m, &l).unwrap();
        assert_eq!(lower, l[0].1.min_time.cost.min(&l[0].1.min_precision.cost));
        assert_eq!(upper, l[0].1.min_time.cost);
    }

    #[test]
    fn identical_packings_get_stack_credit() {
        let m = model();
        let p = Packing::pack(&m.stock[0], &[(bar("a", 100.0), false), (bar("b", 300.0), false)]).unwrap();
        let l = leaves(&m, &[p.clone(), p]);
        let (lower, upper) = term_bounds(&m, &l).unwrap();
        let single = l[0].1.min_time.cost.min(&l[0].1.min_precision.cost);
        assert_eq!(lower.f_t(), single.f_t());
        assert_eq!(lower.f_c(), 10.0);
        assert!(lower.le_all(&upper));
    }

    #[test]
    fn planned_costs_reevaluate_and_respect_bounds() {
        let m = model();
        let p1 = Packing::pack(&m.stock[0], &[(miter("a", 100.0), false), (bar("b", 300.0), false)]).unwrap();
        let p2 = Packing::pack(&m.stock[0], &[(bar("c", 250.0), false), (miter("d", 90.0), true)]).unwrap();
        let l = leaves(&m, &[p1.clone(), p2, p1]);
        let (lower, upper) = term_bounds(&m, &l).unwrap();
        let sols = plan_term(&m, &l).unwrap();
        assert!(!sols.is_empty() && sols.len() <= 2);
        for (plan, cost) in &sols {
            assert_eq!(plan.evaluate(&m).unwrap(), *cost);
            assert!(lower.le_all(cost));
        }
        assert!(sols[0].1.f_t() <= upper.f_t());
    }

    #[test]
    fn pruned_when_lower_bound_dominated() {
        let m = model();
        let p = Packing::pack(&m.stock[0], &[(bar("a", 100.0), false)]).unwrap();
        let l = leaves(&m, &[p]);
        assert!(!finalize_term(&m, &l, &[]).unwrap().is_empty());
        let zero = [ObjectiveVector::ZERO];
        assert!(finalize_term(&m, &l, &zero).unwrap().is_empty());
    }
}
