//! Arrangement terms and the heuristic arrangement generator.

use std::collections::{BTreeMap, HashMap, HashSet};

use rand::seq::SliceRandom;
use rand::Rng;

use super::packing::{has_orientations, is_square, Packing};
use crate::error::{Error, Result};
use crate::fingerprint::Fingerprint;
use crate::model::{BagOfParts, BopKey, ConcretePart, DesignSpaceModel, PartKey, PartShape, StockKind};

/// A bag of parts assigned to stock: atomic packings combined by binary unions.
#[derive(Clone, Debug, PartialEq)]
pub enum ArrangementTerm {
    Atomic(Packing),
    Union(Box<ArrangementTerm>, Box<ArrangementTerm>),
}

impl ArrangementTerm {
    pub fn union(a: ArrangementTerm, b: ArrangementTerm) -> Self {
        ArrangementTerm::Union(Box::new(a), Box::new(b))
    }

    /// Canonical tree over a list of packings: sorted by (bag, fingerprint) and
    /// folded to the right, so arrangements sharing a tail share sub-terms.
    pub fn from_packings(packings: Vec<Packing>) -> Option<Self> {
        let mut keyed: Vec<(BopKey, Fingerprint, Packing)> = packings
            .into_iter()
            .map(|p| (p.key(), p.fingerprint(), p))
            .collect();
        keyed.sort_by(|a, b| (&a.0, a.1).cmp(&(&b.0, b.1)));
        let mut iter = keyed.into_iter().rev().map(|(_, _, p)| ArrangementTerm::Atomic(p));
        let mut acc = iter.next()?;
        for t in iter {
            acc = ArrangementTerm::union(t, acc);
        }
        Some(acc)
    }

    pub fn packings(&self) -> Vec<&Packing> {
        let mut out = Vec::new();
        self.collect_packings(&mut out);
        out
    }

    fn collect_packings<'a>(&'a self, out: &mut Vec<&'a Packing>) {
        match self {
            ArrangementTerm::Atomic(p) => out.push(p),
            ArrangementTerm::Union(a, b) => {
                a.collect_packings(out);
                b.collect_packings(out);
            }
        }
    }

    pub fn key(&self) -> BopKey {
        match self {
            ArrangementTerm::Atomic(p) => p.key(),
            ArrangementTerm::Union(a, b) => a.key().union(&b.key()),
        }
    }

    /// Identity of the arrangement: the multiset of its packings.
    pub fn fingerprint(&self) -> Fingerprint {
        arrangement_fingerprint(self.packings().into_iter())
    }

    pub fn node_count(&self) -> usize {
        match self {
            ArrangementTerm::Atomic(_) => 1,
            ArrangementTerm::Union(a, b) => 1 + a.node_count() + b.node_count(),
        }
    }

    /// A genome holds one choice per e-class, so a term can only be extracted
    /// if every bag of parts inside it is arranged the same way everywhere.
    pub fn is_representable(&self) -> bool {
        let mut seen = HashMap::new();
        self.structure(&mut seen).is_some()
    }

    fn structure(&self, seen: &mut HashMap<BopKey, Fingerprint>) -> Option<(BopKey, Fingerprint)> {
        let (key, fp) = match self {
            ArrangementTerm::Atomic(p) => {
                let mut bytes = vec![b'A'];
                bytes.extend_from_slice(&p.fingerprint().to_bytes());
                (p.key(), Fingerprint::of(&bytes))
            }
            ArrangementTerm::Union(a, b) => {
                let (ka, fa) = a.structure(seen)?;
                let (kb, fb) = b.structure(seen)?;
                let (lo, hi) = if (&ka, fa) <= (&kb, fb) { (fa, fb) } else { (fb, fa) };
                let mut bytes = vec![b'U'];
                bytes.extend_from_slice(&lo.to_bytes());
                bytes.extend_from_slice(&hi.to_bytes());
                (ka.union(&kb), Fingerprint::of(&bytes))
            }
        };
        match seen.get(&key) {
            Some(prev) if *prev != fp => None,
            _ => {
                seen.insert(key.clone(), fp);
                Some((key, fp))
            }
        }
    }
}

pub fn arrangement_fingerprint<'a>(packings: impl Iterator<Item = &'a Packing>) -> Fingerprint {
    let mut fps: Vec<Fingerprint> = packings.map(Packing::fingerprint).collect();
    fps.sort();
    let mut bytes = Vec::with_capacity(fps.len() * 16);
    for f in fps {
        bytes.extend_from_slice(&f.to_bytes());
    }
    Fingerprint::of(&bytes)
}

/// Fails with the first part that no stock can hold.
pub fn check_packable(bag: &BagOfParts, model: &DesignSpaceModel) -> Result<()> {
    for part in bag.parts() {
        let fits = model.stock.iter().any(|s| {
            s.accepts(part) && [false, true].iter().any(|&o| Packing::pack(s, &[(part.clone(), o)]).is_some())
        });
        if !fits {
            return Err(Error::Unpackable(part.template_id.to_string()));
        }
    }
    Ok(())
}

#[derive(Clone, Debug)]
struct Bin {
    stock: usize,
    seq: Vec<(ConcretePart, bool)>,
}

#[derive(Clone, Copy, PartialEq)]
enum StockPick {
    Largest,
    Cheapest,
    Random,
}

#[derive(Clone, Copy, PartialEq)]
enum Orient {
    /// Square ends toward factory edges and matching ends adjacent, so cuts are shared.
    Share,
    Random,
}

struct Packer<'m> {
    model: &'m DesignSpaceModel,
}

impl<'m> Packer<'m> {
    fn accepting(&self, part: &ConcretePart) -> Vec<usize> {
        (0..self.model.stock.len())
            .filter(|&i| self.model.stock[i].accepts(part))
            .collect()
    }

    fn fits(&self, stock: usize, seq: &[(ConcretePart, bool)]) -> bool {
        Packing::pack(&self.model.stock[stock], seq).is_some()
    }

    /// Orientation candidates for appending `part` to `seq`, preferred first.
    fn orientations<R: Rng + ?Sized>(
        &self,
        seq: &[(ConcretePart, bool)],
        part: &ConcretePart,
        policy: Orient,
        rng: &mut R,
    ) -> Vec<bool> {
        if !has_orientations(part) {
            return vec![false];
        }
        let first = match policy {
            Orient::Random => rng.gen_bool(0.5),
            Orient::Share => match part.shape {
                PartShape::Bar {
                    angle_left,
                    angle_right,
                    ..
                } => {
                    let prev_right = seq.last().and_then(|(p, f)| match p.shape {
                        PartShape::Bar {
                            angle_left: l,
                            angle_right: r,
                            ..
                        } => Some(180.0 - if *f { l } else { r }),
                        PartShape::Rect { .. } => None,
                    });
                    match prev_right {
                        None => !is_square(angle_left) && is_square(angle_right),
                        Some(pr) => {
                            let matches = |a: f64| super::packing::same_angle(a, pr);
                            !matches(angle_left) && matches(angle_right)
                        }
                    }
                }
                PartShape::Rect { .. } => false,
            },
        };
        vec![first, !first]
    }

    fn try_append<R: Rng + ?Sized>(&self, bin: &mut Bin, part: &ConcretePart, policy: Orient, rng: &mut R) -> bool {
        if !self.model.stock[bin.stock].accepts(part) {
            return false;
        }
        for o in self.orientations(&bin.seq, part, policy, rng) {
            bin.seq.push((part.clone(), o));
            if self.fits(bin.stock, &bin.seq) {
                return true;
            }
            bin.seq.pop();
        }
        false
    }

    fn open_bin<R: Rng + ?Sized>(&self, part: &ConcretePart, pick: StockPick, policy: Orient, rng: &mut R) -> Result<Bin> {
        let mut options: Vec<usize> = self
            .accepting(part)
            .into_iter()
            .filter(|&s| {
                let mut b = Bin { stock: s, seq: Vec::new() };
                self.try_append(&mut b, part, policy, &mut rand::rngs::mock::StepRng::new(0, 0))
            })
            .collect();
        if options.is_empty() {
            return Err(Error::Unpackable(part.template_id.to_string()));
        }
        let stocks = &self.model.stock;
        let stock = match pick {
            StockPick::Largest => {
                options.sort_by(|&a, &b| {
                    stocks[b]
                        .shape
                        .extent()
                        .total_cmp(&stocks[a].shape.extent())
                        .then(stocks[a].price.total_cmp(&stocks[b].price))
                });
                options[0]
            }
            StockPick::Cheapest => {
                options.sort_by(|&a, &b| stocks[a].price.total_cmp(&stocks[b].price).then(a.cmp(&b)));
                options[0]
            }
            StockPick::Random => *options.choose(rng).expect("non-empty"),
        };
        let mut bin = Bin { stock, seq: Vec::new() };
        let ok = self.try_append(&mut bin, part, policy, rng);
        debug_assert!(ok);
        Ok(bin)
    }

    /// Re-homes each bin on the cheapest stock that still holds its contents.
    fn downsize(&self, bins: &mut [Bin]) {
        for bin in bins.iter_mut() {
            let mut best = bin.stock;
            for s in 0..self.model.stock.len() {
                let st = &self.model.stock[s];
                if st.price < self.model.stock[best].price
                    && bin.seq.iter().all(|(p, _)| st.accepts(p))
                    && self.fits(s, &bin.seq)
                {
                    best = s;
                }
            }
            bin.stock = best;
        }
    }

    fn first_fit_decreasing<R: Rng + ?Sized>(
        &self,
        parts: &[ConcretePart],
        pick: StockPick,
        policy: Orient,
        rng: &mut R,
    ) -> Result<Vec<Bin>> {
        let mut sorted = parts.to_vec();
        sorted.sort_by(|a, b| b.shape.extent().total_cmp(&a.shape.extent()).then_with(|| a.key().cmp(&b.key())));
        let mut bins: Vec<Bin> = Vec::new();
        for part in &sorted {
            if !bins.iter_mut().any(|b| self.try_append(b, part, policy, rng)) {
                bins.push(self.open_bin(part, pick, policy, rng)?);
            }
        }
        self.downsize(&mut bins);
        Ok(bins)
    }

    /// Packs copies of each distinct part together so the resulting packings
    /// repeat and can be stacked.
    fn grouped<R: Rng + ?Sized>(&self, parts: &[ConcretePart], rng: &mut R) -> Result<Vec<Bin>> {
        let mut groups: BTreeMap<PartKey, Vec<ConcretePart>> = BTreeMap::new();
        for p in parts {
            groups.entry(p.key()).or_default().push(p.clone());
        }
        let mut bins = Vec::new();
        let mut leftovers = Vec::new();
        for copies in groups.values() {
            let m = copies.len();
            let mut best: Option<(f64, usize, usize)> = None; // (price per copy, -n, stock)
            for s in self.accepting(&copies[0]) {
                let mut bin = Bin { stock: s, seq: Vec::new() };
                let mut n = 0;
                while n < m && self.try_append(&mut bin, &copies[n], Orient::Share, rng) {
                    n += 1;
                }
                if n == 0 {
                    continue;
                }
                let per = self.model.stock[s].price / n as f64;
                let better = match best {
                    None => true,
                    Some((bp, bn, _)) => per < bp - 1e-12 || ((per - bp).abs() <= 1e-12 && n > bn),
                };
                if better {
                    best = Some((per, n, s));
                }
            }
            let Some((_, n, stock)) = best else {
                return Err(Error::Unpackable(copies[0].template_id.to_string()));
            };
            let full = m / n;
            for b in 0..full {
                let mut bin = Bin { stock, seq: Vec::new() };
                for part in &copies[b * n..(b + 1) * n] {
                    let ok = self.try_append(&mut bin, part, Orient::Share, rng);
                    debug_assert!(ok);
                }
                bins.push(bin);
            }
            leftovers.extend_from_slice(&copies[full * n..]);
        }
        if !leftovers.is_empty() {
            bins.extend(self.first_fit_decreasing(&leftovers, StockPick::Largest, Orient::Share, rng)?);
        }
        Ok(bins)
    }

    fn singles<R: Rng + ?Sized>(&self, parts: &[ConcretePart], rng: &mut R) -> Result<Vec<Bin>> {
        parts
            .iter()
            .map(|p| self.open_bin(p, StockPick::Cheapest, Orient::Share, rng))
            .collect()
    }

    fn randomized<R: Rng + ?Sized>(&self, parts: &[ConcretePart], rng: &mut R) -> Result<Vec<Bin>> {
        let mut order = parts.to_vec();
        order.shuffle(rng);
        if rng.gen_bool(0.5) {
            order.sort_by(|a, b| b.shape.extent().total_cmp(&a.shape.extent()));
        }
        let policy = if rng.gen_bool(0.5) { Orient::Share } else { Orient::Random };
        let open_new = rng.gen_range(0.0..0.5);
        let mut bins: Vec<Bin> = Vec::new();
        for part in &order {
            let mut placed = false;
            if !bins.is_empty() && !rng.gen_bool(open_new) {
                let mut idx: Vec<usize> = (0..bins.len()).collect();
                if rng.gen_bool(0.5) {
                    idx.shuffle(rng);
                }
                for i in idx {
                    if self.try_append(&mut bins[i], part, policy, rng) {
                        placed = true;
                        break;
                    }
                }
            }
            if !placed {
                bins.push(self.open_bin(part, StockPick::Random, policy, rng)?);
            }
        }
        if rng.gen_bool(0.5) {
            self.downsize(&mut bins);
        }
        Ok(bins)
    }

    fn realize(&self, bins: Vec<Bin>) -> Option<Vec<Packing>> {
        bins.into_iter()
            .map(|b| Packing::pack(&self.model.stock[b.stock], &b.seq))
            .collect()
    }
}

/// Within one arrangement, packings holding the same bag are made identical
/// (the first one wins) so the arrangement stays extractable.
fn normalize(packings: Vec<Packing>) -> Vec<Packing> {
    let mut canon: HashMap<BopKey, Packing> = HashMap::new();
    packings
        .into_iter()
        .map(|p| canon.entry(p.key()).or_insert(p).clone())
        .collect()
}

/// Generates up to `k` arrangements of `bag` whose fingerprints are not yet in
/// `history`, adding the new ones to it. Dense first-fit packings and
/// grouped identical parts come first, randomized variations after.
pub fn generate_arrangements<R: Rng + ?Sized>(
    bag: &BagOfParts,
    model: &DesignSpaceModel,
    k: usize,
    history: &mut HashSet<Fingerprint>,
    rng: &mut R,
) -> Result<Vec<ArrangementTerm>> {
    check_packable(bag, model)?;
    let packer = Packer { model };
    let parts = bag.parts();
    let mut out = Vec::new();
    if parts.is_empty() || k == 0 {
        return Ok(out);
    }
    let attempts = 40 * k + 40;
    for attempt in 0..attempts {
        if out.len() >= k {
            break;
        }
        let bins = match attempt {
            0 => packer.first_fit_decreasing(parts, StockPick::Largest, Orient::Share, rng)?,
            1 => packer.grouped(parts, rng)?,
            2 => packer.first_fit_decreasing(parts, StockPick::Cheapest, Orient::Share, rng)?,
            3 => packer.singles(parts, rng)?,
            _ if attempt % 4 == 0 => packer.first_fit_decreasing(parts, StockPick::Random, Orient::Random, rng)?,
            _ => packer.randomized(parts, rng)?,
        };
        let Some(packings) = packer.realize(bins) else {
            continue;
        };
        let Some(term) = ArrangementTerm::from_packings(normalize(packings)) else {
            continue;
        };
        if !term.is_representable() {
            continue;
        }
        debug_assert_eq!(term.key(), bag.key());
        if history.insert(term.fingerprint()) {
            out.push(term);
        }
    }
    Ok(out)
}

/// Every arrangement the generator's placement rules can express: all
/// partitions of the bag into pieces, every part order and orientation within
/// a piece, every stock type that fits. Fails past `max` arrangements.
pub fn enumerate_arrangements(bag: &BagOfParts, model: &DesignSpaceModel, max: usize) -> Result<Vec<ArrangementTerm>> {
    check_packable(bag, model)?;
    let parts = bag.parts();
    let n = parts.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut block_options: HashMap<BopKey, Vec<Packing>> = HashMap::new();
    let mut seen_partitions: HashSet<Vec<BopKey>> = HashSet::new();
    let mut seen_terms: HashSet<Fingerprint> = HashSet::new();
    let mut out = Vec::new();

    let mut labels = vec![0usize; n];
    let mut partitions = Vec::new();
    restricted_growth(&mut labels, 0, 0, &mut partitions);

    for labels in partitions {
        let blocks_n = labels.iter().max().map_or(0, |m| m + 1);
        let mut blocks: Vec<Vec<ConcretePart>> = vec![Vec::new(); blocks_n];
        for (i, &l) in labels.iter().enumerate() {
            blocks[l].push(parts[i].clone());
        }
        let mut keys: Vec<BopKey> = blocks
            .iter()
            .map(|b| BopKey::from_keys(b.iter().map(ConcretePart::key)))
            .collect();
        keys.sort();
        if !seen_partitions.insert(keys.clone()) {
            continue;
        }
        // Distinct block bags with multiplicity; identical blocks share one packing.
        let mut distinct: Vec<(BopKey, usize, Vec<ConcretePart>)> = Vec::new();
        for b in blocks {
            let k = BopKey::from_keys(b.iter().map(ConcretePart::key));
            match distinct.iter_mut().find(|(dk, _, _)| *dk == k) {
                Some(e) => e.1 += 1,
                None => distinct.push((k, 1, b)),
            }
        }
        distinct.sort_by(|a, b| a.0.cmp(&b.0));
        for (k, _, b) in &distinct {
            if !block_options.contains_key(k) {
                block_options.insert(k.clone(), block_packings(b, model));
            }
        }
        let options: Vec<&Vec<Packing>> = distinct.iter().map(|(k, _, _)| &block_options[k]).collect();
        if options.iter().any(|o| o.is_empty()) {
            continue;
        }
        let mut choice = vec![0usize; options.len()];
        loop {
            let mut packings = Vec::new();
            for (d, &c) in choice.iter().enumerate() {
                for _ in 0..distinct[d].1 {
                    packings.push(options[d][c].clone());
                }
            }
            let term = ArrangementTerm::from_packings(packings).expect("non-empty");
            if term.is_representable() && seen_terms.insert(term.fingerprint()) {
                if out.len() >= max {
                    return Err(Error::BudgetExceeded(format!(
                        "more than {max} arrangements for one design"
                    )));
                }
                out.push(term);
            }
            // odometer
            let mut i = choice.len();
            loop {
                if i == 0 {
                    break;
                }
                i -= 1;
                choice[i] += 1;
                if choice[i] < options[i].len() {
                    break;
                }
                choice[i] = 0;
                if i == 0 {
                    i = usize::MAX;
                    break;
                }
            }
            if i == usize::MAX || choice.iter().all(|&c| c == 0) {
                break;
            }
        }
    }
    Ok(out)
}

fn restricted_growth(labels: &mut Vec<usize>, i: usize, max_label: usize, out: &mut Vec<Vec<usize>>) {
    if i == labels.len() {
        out.push(labels.clone());
        return;
    }
    let limit = if i == 0 { 0 } else { max_label + 1 };
    for l in 0..=limit {
        labels[i] = l;
        restricted_growth(labels, i + 1, max_label.max(l), out);
    }
}

/// All distinct single-stock packings of exactly these parts.
fn block_packings(parts: &[ConcretePart], model: &DesignSpaceModel) -> Vec<Packing> {
    let mut seqs: Vec<Vec<ConcretePart>> = Vec::new();
    let mut seen_seq: HashSet<Vec<PartKey>> = HashSet::new();
    permute(&mut parts.to_vec(), 0, &mut |p| {
        let keys: Vec<PartKey> = p.iter().map(ConcretePart::key).collect();
        if seen_seq.insert(keys) {
            seqs.push(p.to_vec());
        }
    });
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    let kind = parts[0].shape.kind();
    for stock in &model.stock {
        if stock.kind() != kind || !parts.iter().all(|p| stock.accepts(p)) {
            continue;
        }
        for seq in &seqs {
            let flexible: Vec<usize> = (0..seq.len()).filter(|&i| has_orientations(&seq[i])).collect();
            for mask in 0u64..(1u64 << flexible.len()) {
                let mut oriented: Vec<(ConcretePart, bool)> = seq.iter().map(|p| (p.clone(), false)).collect();
                for (b, &i) in flexible.iter().enumerate() {
                    oriented[i].1 = mask >> b & 1 == 1;
                }
                if let Some(p) = Packing::pack(stock, &oriented) {
                    if seen.insert(p.fingerprint()) {
                        out.push(p);
                    }
                }
            }
        }
    }
    debug_assert!(out.iter().all(|p| p.kind() == kind || kind == StockKind::TwoD));
    out
}

fn permute<F: FnMut(&[ConcretePart])>(v: &mut Vec<ConcretePart>, k: usize, f: &mut F) {
    if k == v.len() {
        f(v);
        return;
    }
    for i in k..v.len() {
        v.swap(k, i);
        permute(v, k + 1, f);
        v.swap(k, i);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{parse_model, PartShape};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn box_model() -> DesignSpaceModel {
        parse_model(
            r#"{
            "templates": [
                {"id": "x", "shape": {"bar": {"len": 500}}, "material": "pine"},
                {"id": "y1", "shape": {"bar": {"len": 300}}, "material": "pine"},
                {"id": "y2", "shape": {"bar": {"len": 300}}, "material": "pine"},
                {"id": "z", "shape": {"bar": {"len": 250}}, "material": "pine"}
            ],
            "stock": [
                {"id": "long", "shape": {"bar": {"len": 1500}}, "price": 8, "kerf": 3, "material": "pine"},
                {"id": "short", "shape": {"bar": {"len": 600}}, "price": 4, "kerf": 3, "material": "pine"}
            ],
            "tools": [{"id": "chop", "kind": "chopsaw", "cut_time": 20, "setup_time": 60, "base_error": 0.5, "stack_limit": 2}]
        }"#,
        )
        .unwrap()
    }

    #[test]
    fn single_part_single_stock_has_one_arrangement() {
        let m = parse_model(
            r#"{
            "templates": [{"id": "a", "shape": {"bar": {"len": 100}}, "material": "pine"}],
            "stock": [{"id": "s", "shape": {"bar": {"len": 500}}, "price": 3, "kerf": 2, "material": "pine"}],
            "tools": [{"id": "saw", "kind": "chopsaw", "cut_time": 10}]
        }"#,
        )
        .unwrap();
        let bag = m.instantiate_design(&m.input_design()).unwrap();
        let mut history = HashSet::new();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let terms = generate_arrangements(&bag, &m, 5, &mut history, &mut rng).unwrap();
        assert_eq!(terms.len(), 1);
        assert!(matches!(terms[0], ArrangementTerm::Atomic(_)));
        assert_eq!(enumerate_arrangements(&bag, &m, 10).unwrap().len(), 1);
    }

    #[test]
    fn generated_terms_preserve_the_bag() {
        let m = box_model();
        let bag = m.instantiate_design(&m.input_design()).unwrap();
        let mut history = HashSet::new();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let terms = generate_arrangements(&bag, &m, 30, &mut history, &mut rng).unwrap();
        assert!(terms.len() > 5);
        for t in &terms {
            assert_eq!(t.key(), bag.key());
            assert!(t.is_representable());
            for p in t.packings() {
                p.validate().unwrap();
            }
        }
    }

    #[test]
    fn history_makes_calls_disjoint() {
        let m = box_model();
        let bag = m.instantiate_design(&m.input_design()).unwrap();
        let mut history = HashSet::new();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let first = generate_arrangements(&bag, &m, 6, &mut history, &mut rng).unwrap();
        let second = generate_arrangements(&bag, &m, 6, &mut history, &mut rng).unwrap();
        let a: HashSet<_> = first.iter().map(ArrangementTerm::fingerprint).collect();
        assert!(second.iter().all(|t| !a.contains(&t.fingerprint())));
    }

    #[test]
    fn generator_space_is_inside_enumeration() {
        let m = box_model();
        let bag = m.instantiate_design(&m.input_design()).unwrap();
        let all: HashSet<_> = enumerate_arrangements(&bag, &m, 100_000)
            .unwrap()
            .iter()
            .map(ArrangementTerm::fingerprint)
            .collect();
        let mut history = HashSet::new();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let gen = generate_arrangements(&bag, &m, 40, &mut history, &mut rng).unwrap();
        for t in gen {
            assert!(all.contains(&t.fingerprint()));
        }
    }

    #[test]
    fn unpackable_part_is_named() {
        let m = box_model();
        let bag = BagOfParts(vec![ConcretePart::new("beam", PartShape::bar(5000.0), "pine")]);
        let mut history = HashSet::new();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        match generate_arrangements(&bag, &m, 1, &mut history, &mut rng) {
            Err(Error::Unpackable(id)) => assert_eq!(id, "beam"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unrepresentable_terms_detected() {
        let m = box_model();
        let y = ConcretePart::new("y", PartShape::bar(300.0), "pine");
        let long = Packing::pack(&m.stock[0], &[(y.clone(), false)]).unwrap();
        let short = Packing::pack(&m.stock[1], &[(y, false)]).unwrap();
        let mixed = ArrangementTerm::from_packings(vec![long.clone(), short]).unwrap();
        assert!(!mixed.is_representable());
        let same = ArrangementTerm::from_packings(vec![long.clone(), long]).unwrap();
        assert!(same.is_representable());
    }

    #[test]
    fn partitions_of_four_are_bell_number() {
        let mut out = Vec::new();
        restricted_growth(&mut vec![0; 4], 0, 0, &mut out);
        assert_eq!(out.len(), 15);
    }
}
