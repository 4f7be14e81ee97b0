//! The ICEE loop: extract a Pareto front from the e-graph with a genetic
//! algorithm, score and contract e-classes, expand with new designs and
//! arrangements, until the hypervolume stalls.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::sync::Arc;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::genome::{root_nodes, DecodedTerm, Genome};
use super::params::IceeParams;
use crate::egraph::{BopEGraph, Cascade, EClassId, EGraphStats, ENode};
use crate::error::{Error, Result};
use crate::fabrication::{generate_arrangements, ArrangementTerm, plan_term, term_bounds, CutPlanner, FabricationPlan, ObjectiveVector};
use crate::fingerprint::Fingerprint;
use crate::model::{identical_parts_score, BopKey, DesignSpaceModel, DesignVector};
use crate::moo::{default_divisions, dominates, nsga3_select, non_dominated_sort, Solution, SolutionArchive};

/// Designs sampled at initialization when the design space is larger.
pub const INIT_SAMPLES: u64 = 100_000;

/// Possible orientations of a part, the denominator of the exploration score.
pub const ORIENTATIONS: f64 = 2.0;

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub seed: u64,
    /// Worker threads for term finalization; 0 uses all cores.
    pub threads: usize,
    /// Audit the e-graph and the front after every iteration.
    pub audit: bool,
    /// Restrict the search to these designs and disable design expansion.
    pub fixed_designs: Option<Vec<DesignVector>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub hypervolume: f64,
    pub front_size: usize,
    pub archive_size: usize,
    pub generations: usize,
    pub stats: EGraphStats,
    pub enodes_removed: usize,
    pub new_designs: usize,
    pub new_arrangements: usize,
    pub frozen: bool,
    pub extraction_secs: f64,
    pub contraction_expansion_secs: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub seed: u64,
    pub params: IceeParams,
    pub iterations: Vec<IterationRecord>,
    /// Iterations run.
    pub n_iter: usize,
    /// Design vectors ever registered in the e-graph.
    pub n_edv: usize,
    /// Distinct arrangements ever generated.
    pub n_arr: usize,
    /// Distinct design vectors on the final front.
    pub n_pdv: usize,
    pub initialization_secs: f64,
    pub extraction_secs: f64,
    pub contraction_expansion_secs: f64,
    pub total_secs: f64,
    pub hypervolume: f64,
    pub reference: ObjectiveVector,
    pub stop_reason: String,
    pub explored_designs: Vec<DesignVector>,
}

#[derive(Clone, Debug)]
enum Evaluated {
    Pruned(ObjectiveVector),
    Solved(Vec<(Arc<FabricationPlan>, ObjectiveVector)>),
}

impl Evaluated {
    fn fitness(&self) -> ObjectiveVector {
        match self {
            Evaluated::Pruned(lower) => *lower,
            Evaluated::Solved(s) => s[0].1,
        }
    }
}

#[derive(Clone, Debug)]
struct Member {
    genome: Genome,
    fitness: ObjectiveVector,
}

/// State of one ICEE run.
pub struct Icee<'m> {
    model: &'m DesignSpaceModel,
    params: IceeParams,
    options: RunOptions,
    planner: CutPlanner<'m>,
    graph: BopEGraph,
    archive: SolutionArchive,
    history: HashSet<Fingerprint>,
    terms: HashMap<Fingerprint, Evaluated>,
    /// Arrangements inserted since the last extraction.
    fresh: Vec<ArrangementTerm>,
    explored: BTreeSet<DesignVector>,
    rng: ChaCha8Rng,
    pool: rayon::ThreadPool,
    start: Instant,
    iterations: Vec<IterationRecord>,
    last_hv: f64,
    stall: usize,
    initialization_secs: f64,
}

impl<'m> Icee<'m> {
    pub fn new(model: &'m DesignSpaceModel, params: IceeParams, options: RunOptions) -> Result<Self> {
        params.validate()?;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(options.threads)
            .build()
            .map_err(|e| Error::Param(format!("thread pool: {e}")))?;
        if let Some(ds) = &options.fixed_designs {
            if ds.is_empty() {
                return Err(Error::Param("fixed design list is empty".into()));
            }
            for d in ds {
                model.check_design(d)?;
            }
        }
        Ok(Icee {
            model,
            planner: CutPlanner::new(model, params.p),
            params,
            rng: ChaCha8Rng::seed_from_u64(options.seed),
            options,
            graph: BopEGraph::new(),
            archive: SolutionArchive::new(),
            history: HashSet::new(),
            terms: HashMap::new(),
            fresh: Vec::new(),
            explored: BTreeSet::new(),
            pool,
            start: Instant::now(),
            iterations: Vec::new(),
            last_hv: 0.0,
            stall: 0,
            initialization_secs: 0.0,
        })
    }

    /// An engine over an existing e-graph, in place of [`Self::initialize`].
    pub fn with_graph(model: &'m DesignSpaceModel, params: IceeParams, options: RunOptions, graph: BopEGraph) -> Result<Self> {
        let mut icee = Self::new(model, params, options)?;
        icee.explored = graph.roots().values().flatten().cloned().collect();
        icee.graph = graph;
        Ok(icee)
    }

    pub fn graph(&self) -> &BopEGraph {
        &self.graph
    }

    pub fn archive(&self) -> &SolutionArchive {
        &self.archive
    }

    pub fn params(&self) -> &IceeParams {
        &self.params
    }

    pub fn iterations(&self) -> &[IterationRecord] {
        &self.iterations
    }

    /// Layer 0 of the archive.
    pub fn front(&self) -> Vec<Solution> {
        self.archive.front().into_iter().cloned().collect()
    }

    /// Seeds the e-graph with the top `K_d` designs by identical parts.
    pub fn initialize(&mut self) -> Result<()> {
        let t0 = Instant::now();
        self.start = t0;
        let candidates: Vec<DesignVector> = match &self.options.fixed_designs {
            Some(ds) => ds.clone(),
            None if self.model.assignment_count_f64() <= INIT_SAMPLES as f64 => self.model.all_designs().collect(),
            None => {
                let mut seen = BTreeSet::new();
                for _ in 0..INIT_SAMPLES {
                    seen.insert(self.model.random_design(&mut self.rng));
                }
                seen.into_iter().collect()
            }
        };
        let limit = if self.options.fixed_designs.is_some() {
            usize::MAX
        } else {
            self.params.k_d
        };
        let chosen = self.rank_designs(candidates, limit, false)?;
        for d in chosen {
            self.add_design(d, self.params.k_f)?;
        }
        if self.graph.roots().is_empty() {
            return Err(Error::Unpackable("no arrangement could be generated for any design".into()));
        }
        self.initialization_secs = t0.elapsed().as_secs_f64();
        log::info!(
            "initialized: {} root classes, {} e-nodes",
            self.graph.roots().len(),
            self.graph.stats().n_enodes
        );
        Ok(())
    }

    /// Distinct-BOP designs by identical parts score, ties by BOP key, at most
    /// `limit`. With `skip_rooted`, designs whose bag already has a root class
    /// are registered there and not returned.
    fn rank_designs(&mut self, designs: Vec<DesignVector>, limit: usize, skip_rooted: bool) -> Result<Vec<DesignVector>> {
        let mut by_key: BTreeMap<BopKey, (usize, DesignVector)> = BTreeMap::new();
        for d in designs {
            let bag = self.model.instantiate_design(&d)?;
            let key = bag.key();
            if skip_rooted {
                if let Some(c) = self.graph.class_for_key(&key).filter(|c| self.graph.is_root(*c)) {
                    if self.graph.register_root(self.model, d.clone(), c)? {
                        self.explored.insert(d);
                    }
                    continue;
                }
            }
            by_key.entry(key).or_insert((identical_parts_score(&bag), d));
        }
        let mut ranked: Vec<(BopKey, usize, DesignVector)> = by_key.into_iter().map(|(k, (s, d))| (k, s, d)).collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        Ok(ranked.into_iter().take(limit).map(|(_, _, d)| d).collect())
    }

    /// Inserts `k` new arrangements of `design`'s bag and registers it as a root.
    fn add_design(&mut self, design: DesignVector, k: usize) -> Result<usize> {
        let bag = self.model.instantiate_design(&design)?;
        let terms = generate_arrangements(&bag, self.model, k, &mut self.history, &mut self.rng)?;
        let n = terms.len();
        for t in terms {
            let c = self.graph.insert_arrangement(&t)?;
            self.graph.register_root(self.model, design.clone(), c)?;
            self.fresh.push(t);
        }
        if self.graph.root_of(&design).is_some() {
            self.explored.insert(design);
        }
        Ok(n)
    }

    fn evaluate_all(&mut self, genomes: &[Genome]) -> Result<Vec<ObjectiveVector>> {
        let roots = root_nodes(&self.graph);
        let decoded: Vec<DecodedTerm> = genomes
            .iter()
            .map(|g| g.decode_with(&self.graph, &roots))
            .collect::<Result<_>>()?;
        let mut pending: Vec<&DecodedTerm> = Vec::new();
        let mut queued = HashSet::new();
        for d in &decoded {
            if !self.terms.contains_key(&d.fingerprint) && queued.insert(d.fingerprint) {
                pending.push(d);
            }
        }
        let front = self.archive.front_costs();
        let graph = &self.graph;
        let planner = &self.planner;
        let model = self.model;
        let results: Vec<Result<Evaluated>> = self.pool.install(|| {
            pending
                .par_iter()
                .map(|d| finalize(model, planner, graph, d, &front))
                .collect()
        });
        for (d, r) in pending.iter().zip(results) {
            self.terms.insert(d.fingerprint, r?);
        }
        let mut fitness = Vec::with_capacity(decoded.len());
        for d in &decoded {
            let e = &self.terms[&d.fingerprint];
            if let Evaluated::Solved(sols) = e {
                let support: Vec<(EClassId, Fingerprint)> = d
                    .support
                    .iter()
                    .map(|(&c, &n)| (c, self.graph.node_fingerprint(n).expect("decoded e-node is live")))
                    .collect();
                for (plan, cost) in sols {
                    self.archive.insert(Solution {
                        design: d.design.clone(),
                        term_fingerprint: d.fingerprint,
                        plan: plan.clone(),
                        cost: *cost,
                        support: support.clone(),
                    });
                }
            }
            fitness.push(e.fitness());
        }
        Ok(fitness)
    }

    /// The genome selecting a layer-0 solution's term, if its support is live.
    fn encode_solution(&self, s: &Solution, fill: &Genome) -> Option<Genome> {
        let mut support = BTreeMap::new();
        for &(c, fp) in &s.support {
            let n = self.graph.node_by_fingerprint(fp)?;
            if self.graph.node_class(n) != Some(c) {
                return None;
            }
            support.insert(c, n);
        }
        let root = *support
            .keys()
            .max_by_key(|c| self.graph.class(**c).map_or(0, |x| x.key.len()))?;
        Genome::encode(&self.graph, root, &support, fill).ok()
    }

    fn mutate(&mut self, genome: &mut Genome, layout: &[EClassId], n_roots: u32) {
        let i = self.rng.gen_range(0..=layout.len());
        if i == 0 {
            genome.root_gene = self.rng.gen_range(0..n_roots);
        } else {
            let c = layout[i - 1];
            let n = self.graph.class(c).expect("layout is live").nodes.len() as u32;
            genome.genes.insert(c, self.rng.gen_range(0..n));
        }
    }

    /// Genetic extraction of the Pareto front. The first generation holds the
    /// front, every arrangement inserted since the last extraction, and random
    /// genomes up to `N_pop`. Returns the generations run.
    pub fn extract_pareto(&mut self) -> Result<usize> {
        let n_pop = self.params.n_pop;
        let layout = self.graph.class_ids();
        let n_roots = root_nodes(&self.graph).len() as u32;
        if n_roots == 0 {
            return Err(Error::Violation("extraction on an e-graph without roots".into()));
        }
        let mut genomes: Vec<Genome> = Vec::new();
        let mut seen = HashSet::new();
        let fill = Genome::random(&self.graph, &mut self.rng)?;
        let front: Vec<Solution> = self.front();
        for s in &front {
            if genomes.len() >= n_pop {
                break;
            }
            if let Some(g) = self.encode_solution(s, &fill) {
                if seen.insert(g.clone()) {
                    genomes.push(g);
                }
            }
        }
        for t in std::mem::take(&mut self.fresh) {
            let Some(support) = self.graph.term_support(&t) else {
                continue;
            };
            let Some((root, _)) = self.graph.lookup(&t) else {
                continue;
            };
            if let Ok(g) = Genome::encode(&self.graph, root, &support, &fill) {
                if seen.insert(g.clone()) {
                    genomes.push(g);
                }
            }
        }
        while genomes.len() < n_pop {
            genomes.push(Genome::random(&self.graph, &mut self.rng)?);
        }
        let fitness = self.evaluate_all(&genomes)?;
        let mut population: Vec<Member> = genomes
            .into_iter()
            .zip(fitness)
            .map(|(genome, fitness)| Member { genome, fitness })
            .collect();

        let divisions = default_divisions(3);
        if population.len() > n_pop {
            population = select(population, n_pop, divisions)?;
        }
        let mut best = self.archive.hypervolume();
        let mut stall = 0;
        let mut generations = 0;
        while generations < self.params.mt_p && stall < self.params.t_p {
            generations += 1;
            let mut children: Vec<Genome> = Vec::with_capacity(n_pop);
            while children.len() < n_pop {
                let a = population.choose(&mut self.rng).expect("population is non-empty");
                let b = population.choose(&mut self.rng).expect("population is non-empty");
                let (mut x, mut y) = (a.genome.to_vec(&layout), b.genome.to_vec(&layout));
                if self.rng.gen_bool(self.params.mc_p) && x.len() > 1 {
                    let cut = self.rng.gen_range(1..x.len());
                    x[cut..].swap_with_slice(&mut y[cut..]);
                }
                for v in [x, y] {
                    if children.len() >= n_pop {
                        break;
                    }
                    let mut child = Genome::from_vec(&v, &layout);
                    if self.rng.gen_bool(self.params.mm_p) {
                        self.mutate(&mut child, &layout, n_roots);
                    }
                    children.push(child);
                }
            }
            let fitness = self.evaluate_all(&children)?;
            population.extend(
                children
                    .into_iter()
                    .zip(fitness)
                    .map(|(genome, fitness)| Member { genome, fitness }),
            );
            if population.len() > n_pop {
                population = select(population, n_pop, divisions)?;
            }
            let hv = self.archive.hypervolume();
            if improved(hv, best) {
                best = hv;
                stall = 0;
            } else {
                stall += 1;
            }
        }
        Ok(generations)
    }

    /// Computes exploration, impact and pruning scores of every live class and
    /// returns the classes to remove. Classes whose removal would cascade into a
    /// root or a layer-0 support class are kept.
    pub fn score_and_select_prunable(&mut self) -> BTreeSet<EClassId> {
        let ids = self.graph.class_ids();
        let mut impact: BTreeMap<EClassId, f64> = ids.iter().map(|&c| (c, 0.0)).collect();
        let layers = self.archive.layers().clone();
        for (l, layer) in layers.iter().enumerate() {
            let inc = 10f64.powi(-(l.min(400) as i32));
            for &i in layer {
                for (c, _) in &self.archive.solutions()[i].support {
                    if let Some(v) = impact.get_mut(c) {
                        *v += inc;
                    }
                }
            }
        }
        let explore: Vec<f64> = ids
            .iter()
            .map(|&c| {
                let class = self.graph.class(c).expect("live");
                (class.explored_count as f64 / (class.key.len() as f64 * ORIENTATIONS)).min(1.0)
            })
            .collect();
        let raw_i: Vec<f64> = ids.iter().map(|c| impact[c]).collect();
        let e_norm = normalize(&explore);
        let i_norm = normalize(&raw_i);
        let w = self.params.w;
        let mut doomed = BTreeSet::new();
        let protected = self.protected();
        for (k, &c) in ids.iter().enumerate() {
            let p = w * i_norm[k] + (1.0 - w) * (1.0 - e_norm[k]);
            let class = self.graph.class_mut(c).expect("live");
            class.e_score = e_norm[k];
            class.i_score = i_norm[k];
            class.p_score = p;
            if p < self.params.p_rate && !protected.contains(&c) {
                doomed.insert(c);
            }
        }
        let mut cascade = Cascade::new(&self.graph);
        doomed.into_iter().filter(|&c| cascade.remove(c, &protected)).collect()
    }

    /// Root classes and every class used by a layer-0 solution.
    pub fn protected(&self) -> BTreeSet<EClassId> {
        let mut p: BTreeSet<EClassId> = self.graph.root_classes().into_iter().collect();
        for s in self.archive.front() {
            p.extend(s.support.iter().map(|(c, _)| *c));
        }
        p
    }

    /// Adds new designs from a design-space GA step and new arrangements for
    /// the most impactful root classes. Returns `(designs, arrangements)` added.
    pub fn expand(&mut self) -> Result<(usize, usize)> {
        let mut new_designs = 0;
        let mut new_arrangements = 0;
        if self.options.fixed_designs.is_none() && self.params.k_nd > 0 && !self.model.connectors.is_empty() {
            for d in self.design_offspring()? {
                let n = self.add_design(d, self.params.k_f)?;
                new_arrangements += n;
                new_designs += usize::from(n > 0);
            }
        }

        let mut roots: Vec<(EClassId, f64, f64)> = self
            .graph
            .root_classes()
            .into_iter()
            .map(|c| {
                let class = self.graph.class(c).expect("roots are live");
                (c, class.i_score, class.p_score)
            })
            .collect();
        roots.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        roots.truncate(self.params.k_d);
        let weights: Vec<f64> = roots.iter().map(|r| r.2).collect();
        let split = largest_remainder(self.params.k_f * self.params.k_d, &weights);
        for ((c, _, _), k) in roots.into_iter().zip(split) {
            if k == 0 {
                continue;
            }
            let design = self.graph.roots()[&c].first().expect("roots hold a design").clone();
            let bag = self.model.instantiate_design(&design)?;
            for t in generate_arrangements(&bag, self.model, k, &mut self.history, &mut self.rng)? {
                let class = self.graph.insert_arrangement(&t)?;
                self.graph.register_root(self.model, design.clone(), class)?;
                self.fresh.push(t);
                new_arrangements += 1;
            }
        }
        Ok((new_designs, new_arrangements))
    }

    /// `K_m` rounds of `K_d` offspring from the archive's designs, parents
    /// chosen by binary tournament on their lowest layer; the best `K_nd` new
    /// bags by identical parts score.
    fn design_offspring(&mut self) -> Result<Vec<DesignVector>> {
        let mut lowest: BTreeMap<DesignVector, usize> = BTreeMap::new();
        let layers = self.archive.layers().clone();
        for (l, layer) in layers.iter().enumerate() {
            for &i in layer {
                lowest.entry(self.archive.solutions()[i].design.clone()).or_insert(l);
            }
        }
        if lowest.is_empty() {
            return Ok(Vec::new());
        }
        let parents: Vec<(DesignVector, usize)> = lowest.into_iter().collect();
        let counts = self.model.variant_counts();
        let mut candidates = Vec::new();
        for _ in 0..self.params.k_m {
            for _ in 0..self.params.k_d {
                let a = self.tournament(&parents);
                let b = self.tournament(&parents);
                let mut child = a.0.clone();
                if self.rng.gen_bool(self.params.mc_d) && child.len() > 1 {
                    let cut = self.rng.gen_range(1..child.len());
                    child[cut..].copy_from_slice(&b.0[cut..]);
                }
                if self.rng.gen_bool(self.params.mm_d) {
                    let i = self.rng.gen_range(0..child.len());
                    child[i] = self.rng.gen_range(0..counts[i]);
                }
                candidates.push(DesignVector(child));
            }
        }
        self.rank_designs(candidates, self.params.k_nd, true)
    }

    fn tournament<'a>(&mut self, parents: &'a [(DesignVector, usize)]) -> &'a DesignVector {
        let a = &parents[self.rng.gen_range(0..parents.len())];
        let b = &parents[self.rng.gen_range(0..parents.len())];
        if b.1 < a.1 {
            &b.0
        } else {
            &a.0
        }
    }

    /// Checks the e-graph and that every layer-0 solution still decodes to its
    /// term from a genome over the live graph.
    pub fn audit(&self) -> Result<()> {
        self.graph.audit()?;
        let fill = Genome {
            root_gene: 0,
            genes: self.graph.classes().map(|c| (c.id, 0)).collect(),
        };
        for s in self.archive.front() {
            let genome = self
                .encode_solution(s, &fill)
                .ok_or_else(|| Error::Violation(format!("front solution {} lost its support", s.term_fingerprint)))?;
            let d = genome.decode(&self.graph)?;
            if d.fingerprint != s.term_fingerprint {
                return Err(Error::Violation(format!(
                    "front solution {} decodes to {}",
                    s.term_fingerprint, d.fingerprint
                )));
            }
            let key = self.model.instantiate_design(&s.design)?.key();
            if self.graph.class(d.root).map(|c| &c.key) != Some(&key) {
                return Err(Error::Violation(format!("front solution {} changed bag", s.term_fingerprint)));
            }
        }
        Ok(())
    }

    pub fn is_frozen(&self) -> bool {
        self.start.elapsed().as_secs_f64() >= self.params.timeout_secs
    }

    /// One iteration: extraction, then scoring, contraction and expansion
    /// unless frozen. Returns whether the loop should continue.
    pub fn step(&mut self) -> Result<bool> {
        let t0 = Instant::now();
        let generations = self.extract_pareto()?;
        let hv = self.archive.hypervolume();
        let extraction_secs = t0.elapsed().as_secs_f64();
        if hv < self.last_hv * (1.0 - 1e-12) {
            return Err(Error::Violation(format!(
                "hypervolume decreased from {} to {hv}",
                self.last_hv
            )));
        }
        if improved(hv, self.last_hv) {
            self.stall = 0;
        } else {
            self.stall += 1;
        }
        self.last_hv = hv;

        let t1 = Instant::now();
        let frozen = self.is_frozen();
        let (mut removed, mut new_designs, mut new_arrangements) = (0, 0, 0);
        let done = self.stall >= self.params.t_d || self.iterations.len() + 1 >= self.params.mt_d;
        if !frozen && !done {
            let doomed = self.score_and_select_prunable();
            let protected = self.protected();
            removed = self.graph.contract(&doomed, &protected)?;
            if self.options.audit {
                self.audit()?;
            }
            (new_designs, new_arrangements) = self.expand()?;
        }
        if self.options.audit {
            self.audit()?;
        }
        let record = IterationRecord {
            iteration: self.iterations.len(),
            hypervolume: hv,
            front_size: self.archive.front_indices().len(),
            archive_size: self.archive.len(),
            generations,
            stats: self.graph.stats(),
            enodes_removed: removed,
            new_designs,
            new_arrangements,
            frozen,
            extraction_secs,
            contraction_expansion_secs: t1.elapsed().as_secs_f64(),
        };
        log::debug!(
            "iteration {}: hv {:.6e}, front {}, {} e-nodes (-{removed}, +{new_arrangements} arrangements, +{new_designs} designs)",
            record.iteration,
            hv,
            record.front_size,
            record.stats.n_enodes
        );
        self.iterations.push(record);
        Ok(!done)
    }

    /// Initializes and iterates until the hypervolume stalls for `t_d`
    /// iterations or `mt_d` iterations have run.
    pub fn run(&mut self) -> Result<RunReport> {
        self.initialize()?;
        while self.step()? {}
        Ok(self.report())
    }

    pub fn report(&mut self) -> RunReport {
        let stop_reason = if self.stall >= self.params.t_d {
            format!("no hypervolume improvement for {} iterations", self.params.t_d)
        } else {
            format!("iteration limit {}", self.params.mt_d)
        };
        let pdv: BTreeSet<&DesignVector> = self.archive.front().into_iter().map(|s| &s.design).collect();
        RunReport {
            seed: self.options.seed,
            params: self.params.clone(),
            n_iter: self.iterations.len(),
            n_edv: self.explored.len(),
            n_arr: self.history.len(),
            n_pdv: pdv.len(),
            initialization_secs: self.initialization_secs,
            extraction_secs: self.iterations.iter().map(|r| r.extraction_secs).sum(),
            contraction_expansion_secs: self.iterations.iter().map(|r| r.contraction_expansion_secs).sum(),
            total_secs: self.start.elapsed().as_secs_f64(),
            hypervolume: self.archive.hypervolume(),
            reference: self.archive.reference(),
            stop_reason,
            explored_designs: self.explored.iter().cloned().collect(),
            iterations: self.iterations.clone(),
        }
    }
}

fn select(population: Vec<Member>, n: usize, divisions: usize) -> Result<Vec<Member>> {
    let points: Vec<ObjectiveVector> = population.iter().map(|m| m.fitness).collect();
    let keep = nsga3_select(&points, n, divisions)?;
    let mut slots: Vec<Option<Member>> = population.into_iter().map(Some).collect();
    Ok(keep.into_iter().map(|i| slots[i].take().expect("distinct indices")).collect())
}

fn improved(new: f64, old: f64) -> bool {
    new > old + 1e-12 * old.abs().max(1e-300)
}

fn finalize(
    model: &DesignSpaceModel,
    planner: &CutPlanner<'_>,
    graph: &BopEGraph,
    d: &DecodedTerm,
    front: &[ObjectiveVector],
) -> Result<Evaluated> {
    let leaves = d
        .leaves
        .iter()
        .map(|&n| {
            let ENode::Atomic { packing, plans } = graph.node(n).expect("decoded e-node is live") else {
                unreachable!("leaves are atomic");
            };
            Ok((packing.clone(), planner.cached(plans, packing)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let (lower, _) = term_bounds(model, &leaves)?;
    if front.iter().any(|f| dominates(f, &lower)) {
        return Ok(Evaluated::Pruned(lower));
    }
    Ok(Evaluated::Solved(
        plan_term(model, &leaves)?
            .into_iter()
            .map(|(p, c)| (Arc::new(p), c))
            .collect(),
    ))
}

/// Min-max normalization; all equal (or a single value) maps to 1.0.
pub fn normalize(values: &[f64]) -> Vec<f64> {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if values.len() < 2 || hi - lo <= 1e-12 * hi.abs().max(1.0) {
        return vec![1.0; values.len()];
    }
    values.iter().map(|v| (v - lo) / (hi - lo)).collect()
}

/// Splits `total` proportionally to `weights` by largest remainder, ties to
/// the earlier index. All-zero weights split evenly.
pub fn largest_remainder(total: usize, weights: &[f64]) -> Vec<usize> {
    if weights.is_empty() {
        return Vec::new();
    }
    let sum: f64 = weights.iter().map(|w| w.max(0.0)).sum();
    let w: Vec<f64> = if sum > 0.0 {
        weights.iter().map(|w| w.max(0.0) / sum).collect()
    } else {
        vec![1.0 / weights.len() as f64; weights.len()]
    };
    let quotas: Vec<f64> = w.iter().map(|x| x * total as f64).collect();
    let mut out: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
    let mut left = total - out.iter().sum::<usize>().min(total);
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| {
        let fa = quotas[a] - quotas[a].floor();
        let fb = quotas[b] - quotas[b].floor();
        fb.total_cmp(&fa).then(a.cmp(&b))
    });
    for i in order.into_iter().cycle() {
        if left == 0 {
            break;
        }
        out[i] += 1;
        left -= 1;
    }
    out
}

/// Runs ICEE to completion and returns the engine for inspection.
pub fn run<'m>(model: &'m DesignSpaceModel, params: IceeParams, options: RunOptions) -> Result<(Icee<'m>, RunReport)> {
    let mut icee = Icee::new(model, params, options)?;
    let report = icee.run()?;
    Ok((icee, report))
}

/// The non-dominated subset of `solutions`, first occurrence kept among equal costs.
pub fn pareto_filter(solutions: Vec<Solution>) -> Vec<Solution> {
    let costs: Vec<ObjectiveVector> = solutions.iter().map(|s| s.cost).collect();
    let Some(first) = non_dominated_sort(&costs).into_iter().next() else {
        return Vec::new();
    };
    let keep: BTreeSet<usize> = first.into_iter().collect();
    let mut seen = HashSet::new();
    solutions
        .into_iter()
        .enumerate()
        .filter(|(i, s)| keep.contains(i) && seen.insert((s.term_fingerprint, s.cost.bits())))
        .map(|(_, s)| s)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn largest_remainder_split() {
        assert_eq!(largest_remainder(12, &[0.5, 0.25, 0.25]), vec![6, 3, 3]);
        assert_eq!(largest_remainder(10, &[1.0, 1.0, 1.0]), vec![4, 3, 3]);
        assert_eq!(largest_remainder(5, &[0.0, 0.0]), vec![3, 2]);
        assert_eq!(largest_remainder(7, &[0.1, 0.0, 0.9]).iter().sum::<usize>(), 7);
    }

    #[test]
    fn degenerate_normalization() {
        assert_eq!(normalize(&[3.0]), vec![1.0]);
        assert_eq!(normalize(&[2.0, 2.0]), vec![1.0, 1.0]);
        assert_eq!(normalize(&[1.0, 3.0, 2.0]), vec![0.0, 1.0, 0.5]);
    }
}
