//! Shared workloads for benchmarks, integration tests and the acceptance
//! target: bundled fixtures, the four-term box e-graph, fuzzed models and a
//! brute-force extractor.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::PathBuf;
use std::sync::Arc;

use bopco::egraph::ENode;
use bopco::fabrication::{plan_term, CutPlanner};
use bopco::export::{front_csv, FrontDocument};
use bopco::icee::{pareto_filter, root_nodes, run, Genome, IceeParams, RunOptions, RunReport};
use bopco::model::{ConcretePart, StockType};
use bopco::moo::Solution;
use bopco::{
    parse_model, ArrangementTerm, BopEGraph, BopKey, DesignSpaceModel, DesignVector, EClassId, ENodeId, Packing, Result,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

const ANGLES: [f64; 3] = [45.0, 60.0, 90.0];

/// Fixtures used for the co-optimization comparison.
pub const COMPARISON_FIXTURES: [&str; 3] = ["frame", "shelf", "cabinet"];

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/../core/fixtures")).join(format!("{name}.json"))
}

pub fn load_fixture(name: &str) -> DesignSpaceModel {
    let path = fixture_path(name);
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    parse_model(&text).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

/// Two box variants sharing sub-bags: an open box `{x, y, y, z}` and a box with a
/// lid `{x, y, y, z, z, w}`.
pub struct BoxGraph {
    pub model: DesignSpaceModel,
    pub graph: BopEGraph,
    pub terms: Vec<ArrangementTerm>,
    pub open: DesignVector,
    pub lidded: DesignVector,
}

fn part(model: &DesignSpaceModel, id: &str) -> ConcretePart {
    model
        .templates
        .iter()
        .find(|t| t.id.as_ref() == id)
        .unwrap_or_else(|| panic!("template {id}"))
        .part
        .clone()
}

fn stock<'a>(model: &'a DesignSpaceModel, id: &str) -> &'a StockType {
    model.stock_type(id).unwrap_or_else(|| panic!("stock {id}"))
}

fn atomic(model: &DesignSpaceModel, stock_id: &str, parts: &[&str]) -> ArrangementTerm {
    let seq: Vec<(ConcretePart, bool)> = parts.iter().map(|p| (part(model, p), false)).collect();
    ArrangementTerm::Atomic(Packing::pack(stock(model, stock_id), &seq).expect("parts fit"))
}

fn union(a: ArrangementTerm, b: ArrangementTerm) -> ArrangementTerm {
    ArrangementTerm::union(a, b)
}

/// Inserts four arrangements: the open box twice (all singles, then `{x,y}`
/// on one long board), the lidded box with `{w,z}` on one board, and the
/// lidded box with `{w,y,z,z}` on one board.
pub fn box_graph() -> BoxGraph {
    let model = load_fixture("box");
    let m = &model;
    let xy_split = || union(atomic(m, "long", &["x"]), atomic(m, "short", &["y1"]));
    let yz_split = || union(atomic(m, "short", &["y2"]), atomic(m, "short", &["z1"]));
    let terms = vec![
        union(xy_split(), yz_split()),
        union(atomic(m, "long", &["x", "y1"]), yz_split()),
        union(xy_split(), union(yz_split(), atomic(m, "long", &["w", "z2"]))),
        union(xy_split(), atomic(m, "long", &["w", "y2", "z1", "z2"])),
    ];
    let open = DesignVector(vec![0]);
    let lidded = DesignVector(vec![1]);
    let mut graph = BopEGraph::new();
    for (i, t) in terms.iter().enumerate() {
        let class = graph.insert_arrangement(t).expect("insert");
        let design = if i < 2 { &open } else { &lidded };
        graph.register_root(&model, design.clone(), class).expect("register");
    }
    BoxGraph {
        model,
        graph,
        terms,
        open,
        lidded,
    }
}

impl BoxGraph {
    /// Bag key of the named templates.
    pub fn key(&self, ids: &[&str]) -> BopKey {
        BopKey::from_keys(ids.iter().map(|id| part(&self.model, id).key()))
    }

    pub fn class(&self, ids: &[&str]) -> EClassId {
        self.graph.class_for_key(&self.key(ids)).expect("class present")
    }

    /// Selects the open box, `{x,y}` on one board and `{y}`, `{z}` alone.
    pub fn worked_genome(&self) -> Genome {
        let open = self.class(&["x", "y1", "y2", "z1"]);
        let xy = self.class(&["x", "y1"]);
        let root_gene = root_nodes(&self.graph)
            .iter()
            .position(|(c, _)| *c == open)
            .expect("open box is a root") as u32;
        let atomic = self.graph.class(xy).expect("live").nodes.iter().position(|&n| {
            self.graph.node(n).is_some_and(ENode::is_atomic)
        });
        let mut genes: BTreeMap<EClassId, u32> = self.graph.class_ids().into_iter().map(|c| (c, 0)).collect();
        genes.insert(xy, atomic.expect("{x,y} has a packing") as u32);
        Genome { root_gene, genes }
    }

    /// Bags of the pieces a decoded term cuts, sorted.
    pub fn leaf_keys(&self, leaves: &[ENodeId]) -> Vec<BopKey> {
        let mut keys: Vec<BopKey> = leaves
            .iter()
            .map(|&n| match self.graph.node(n) {
                Some(ENode::Atomic { packing, .. }) => packing.key(),
                _ => unreachable!("leaves are atomic"),
            })
            .collect();
        keys.sort();
        keys
    }

    /// Tree nodes of all inserted terms counted separately.
    pub fn tree_nodes(&self) -> usize {
        self.terms.iter().map(ArrangementTerm::node_count).sum()
    }
}

/// Every genome over `graph`, in lexicographic order.
pub fn all_genomes(graph: &BopEGraph) -> Vec<Genome> {
    let roots = root_nodes(graph).len() as u32;
    let classes: Vec<(EClassId, u32)> = graph.classes().map(|c| (c.id, c.nodes.len() as u32)).collect();
    let mut out = Vec::new();
    let mut digits = vec![0u32; classes.len()];
    for root_gene in 0..roots {
        loop {
            out.push(Genome {
                root_gene,
                genes: classes.iter().zip(&digits).map(|((c, _), &d)| (*c, d)).collect(),
            });
            let mut i = 0;
            while i < digits.len() {
                digits[i] += 1;
                if digits[i] < classes[i].1 {
                    break;
                }
                digits[i] = 0;
                i += 1;
            }
            if i == digits.len() {
                break;
            }
        }
    }
    out
}

/// The exact front over every term a genome can select, each planned with
/// `p` cut orders per piece.
pub fn brute_force_front(model: &DesignSpaceModel, graph: &BopEGraph, p: usize) -> Result<Vec<Solution>> {
    let planner = CutPlanner::new(model, p);
    let mut seen = HashSet::new();
    let mut all = Vec::new();
    for g in all_genomes(graph) {
        let d = g.decode(graph)?;
        if !seen.insert(d.fingerprint) {
            continue;
        }
        let leaves = d
            .leaves
            .iter()
            .map(|&n| match graph.node(n) {
                Some(ENode::Atomic { packing, plans }) => Ok((packing.clone(), planner.cached(plans, packing)?)),
                _ => unreachable!("leaves are atomic"),
            })
            .collect::<Result<Vec<_>>>()?;
        for (plan, cost) in plan_term(model, &leaves)? {
            all.push(Solution {
                design: d.design.clone(),
                term_fingerprint: d.fingerprint,
                plan: Arc::new(plan),
                cost,
                support: Vec::new(),
            });
        }
    }
    Ok(pareto_filter(all))
}

/// Parameters scaled down so a fuzzed model runs a full loop in well under a
/// second.
pub fn small_params(model: &DesignSpaceModel) -> IceeParams {
    let mut p = IceeParams::for_model(model, 0.5);
    p.k_f = p.k_f.min(6);
    p.n_pop = p.n_pop.max(4);
    p.p = p.p.min(4);
    p.t_p = 3;
    p.mt_p = 6;
    p.k_m = 2;
    p
}

/// A random valid model: bars, sheets or both, up to four connectors whose
/// variants trim, miter, resize or drop parts.
pub fn fuzz_model(seed: u64) -> DesignSpaceModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let kinds: &[&str] = match rng.gen_range(0..3) {
        0 => &["bar"],
        1 => &["rect"],
        _ => &["bar", "rect"],
    };
    let n_templates = rng.gen_range(2..=5);
    let mut templates = Vec::new();
    let mut kind_of = BTreeMap::new();
    for i in 0..n_templates {
        let kind = kinds[i % kinds.len()];
        let id = format!("t{i}");
        let shape = random_shape(kind, &mut rng);
        kind_of.insert(id.clone(), kind);
        templates.push(json!({"id": id, "shape": shape, "material": kind}));
    }
    let mut connectors = Vec::new();
    for c in 0..rng.gen_range(0..=4) {
        let mut variants = Vec::new();
        for _ in 0..rng.gen_range(1..=3) {
            let mut overrides = Vec::new();
            let mut used = HashSet::new();
            for _ in 0..rng.gen_range(0..=2) {
                let t = rng.gen_range(0..n_templates);
                // t0 is never dropped, so no bag is empty.
                if !used.insert(t) {
                    continue;
                }
                let id = format!("t{t}");
                let o = match (kind_of[&id], rng.gen_range(0..4)) {
                    (_, 0) if t > 0 => json!({"template": id, "omit": true}),
                    ("bar", 1) => json!({
                        "template": id,
                        "end": if rng.gen_bool(0.5) { "left" } else { "right" },
                        "angle": ANGLES[rng.gen_range(0..ANGLES.len())],
                    }),
                    ("bar", 2) => json!({"template": id, "end": "left", "trim": rng.gen_range(1..40)}),
                    (kind, _) => json!({"template": id, "shape": random_shape(kind, &mut rng)}),
                };
                overrides.push(o);
            }
            variants.push(Value::Array(overrides));
        }
        connectors.push(json!({"id": format!("c{c}"), "variants": variants}));
    }
    let mut stock = Vec::new();
    let mut tools = Vec::new();
    for kind in kinds {
        for s in 0..rng.gen_range(1..=2) {
            let shape = if *kind == "bar" {
                json!({"bar": {"len": rng.gen_range(700..1600)}})
            } else {
                json!({"rect": {"w": rng.gen_range(1000..1800), "h": rng.gen_range(700..1000)}})
            };
            stock.push(json!({
                "id": format!("{kind}-{s}"),
                "shape": shape,
                "price": rng.gen_range(2..30),
                "kerf": rng.gen_range(0..4),
                "material": kind,
            }));
        }
        tools.push(json!({
            "id": format!("{kind}-saw"),
            "kind": if *kind == "bar" { "chopsaw" } else { "tracksaw" },
            "cut_time": rng.gen_range(5..40),
            "setup_time": rng.gen_range(0..60),
            "base_error": rng.gen_range(0.1..1.0),
            "stack_limit": rng.gen_range(1..=3),
        }));
    }
    let doc = json!({"templates": templates, "connectors": connectors, "stock": stock, "tools": tools});
    parse_model(&doc.to_string()).unwrap_or_else(|e| panic!("fuzz model {seed}: {e}\n{doc}"))
}

fn random_shape<R: Rng>(kind: &str, rng: &mut R) -> Value {
    if kind == "bar" {
        json!({"bar": {"len": rng.gen_range(80..600)}})
    } else {
        json!({"rect": {"w": rng.gen_range(80..600), "h": rng.gen_range(80..600)}})
    }
}

/// Costs of a front as sorted bit patterns, for exact comparisons.
pub fn cost_bits(front: &[Solution]) -> Vec<[u64; 3]> {
    let mut v: Vec<[u64; 3]> = front.iter().map(|s| s.cost.bits()).collect();
    v.sort_unstable();
    v
}

/// Distinct designs on a front with how many solutions each contributes.
pub fn designs_on(front: &[Solution]) -> HashMap<DesignVector, usize> {
    let mut m = HashMap::new();
    for s in front {
        *m.entry(s.design.clone()).or_insert(0) += 1;
    }
    m
}

/// Outcome of [`fuzz_campaign`].
#[derive(Clone, Debug, Default)]
pub struct FuzzSummary {
    pub models: usize,
    pub iterations: usize,
    pub violations: Vec<String>,
}

/// Runs audited ICEE loops of `per_model` iterations on fuzzed models until
/// `iterations` have run. Every model is run twice with the same seed; the
/// replay must reproduce the front and the hypervolume trace exactly, and
/// every front plan must re-evaluate to its stored cost.
pub fn fuzz_campaign(iterations: usize, per_model: usize) -> FuzzSummary {
    let mut summary = FuzzSummary::default();
    let mut seed = 0;
    while summary.iterations < iterations {
        let model = fuzz_model(seed);
        let mut params = small_params(&model);
        params.mt_d = per_model;
        params.t_d = per_model;
        let options = RunOptions {
            seed,
            audit: true,
            ..RunOptions::default()
        };
        let mut runs = Vec::new();
        for _ in 0..2 {
            match run(&model, params.clone(), options.clone()) {
                Ok((icee, report)) => runs.push((icee.front(), report)),
                Err(e) => summary.violations.push(format!("model {seed}: {e}")),
            }
        }
        if let [(front, report), (replay, replay_report)] = &runs[..] {
            summary.iterations += report.n_iter;
            let trace = |r: &RunReport| r.iterations.iter().map(|i| i.hypervolume.to_bits()).collect::<Vec<_>>();
            if front_csv(front) != front_csv(replay) || trace(report) != trace(replay_report) {
                summary.violations.push(format!("model {seed}: replay diverged"));
            }
            if report.iterations.windows(2).any(|w| w[1].hypervolume < w[0].hypervolume) {
                summary.violations.push(format!("model {seed}: hypervolume decreased"));
            }
            let doc = FrontDocument::new(front, report.reference);
            if let Err(e) = doc.and_then(|d| d.revalidate(&model)) {
                summary.violations.push(format!("model {seed}: {e}"));
            }
        } else {
            summary.iterations += per_model;
        }
        summary.models += 1;
        seed += 1;
    }
    summary
}
