//! Acceptance checks, one PASS/FAIL line per criterion.

use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::Instant;

use bopco::baseline::{exhaustive_oracle, optimize_single_design, OracleBudget};
use bopco::export::FrontDocument;
use bopco::icee::{beta, derive_params, run, IceeParams, RunOptions};
use bopco::moo::{dominates, hypervolume, non_dominated_sort, reference_point, Solution};
use bopco::ObjectiveVector;
use bopco_bench::{box_graph, fixture_path, fuzz_campaign, load_fixture, COMPARISON_FIXTURES};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

type Outcome = Result<String, String>;
type Check<'a> = Box<dyn Fn() -> Outcome + 'a>;

fn bopco(args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_bopco"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    if out.status.success() {
        Ok(())
    } else {
        Err(format!("bopco {}: {}", args.join(" "), String::from_utf8_lossy(&out.stderr)))
    }
}

fn costs(front: &[Solution]) -> Vec<ObjectiveVector> {
    front.iter().map(|s| s.cost).collect()
}

fn hv(front: &[Solution], reference: &ObjectiveVector) -> f64 {
    hypervolume(&costs(front), &reference.0).expect("finite costs")
}

fn frame_oracle(dir: &Path) -> Outcome {
    let model = load_fixture("frame");
    let golden = exhaustive_oracle(&model, OracleBudget::default()).map_err(|e| e.to_string())?;
    let frozen = FrontDocument::from_json(&std::fs::read_to_string(fixture_path("frame_oracle")).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    let mut a: Vec<[u64; 3]> = golden.iter().map(|s| s.cost.bits()).collect();
    let mut b: Vec<[u64; 3]> = frozen.solutions.iter().map(|s| s.cost.bits()).collect();
    a.sort_unstable();
    b.sort_unstable();
    a.dedup();
    b.dedup();
    if a != b {
        return Err("oracle front differs from the frozen golden front".into());
    }
    let reference = reference_point(golden.iter().map(|s| &s.cost));
    let target = hv(&golden, &reference);
    let mut ratios = Vec::new();
    for seed in 0..5 {
        let out = dir.join(format!("frame-{seed}"));
        let t = Instant::now();
        bopco(&[
            "optimize",
            fixture_path("frame").to_str().unwrap(),
            "--seed",
            &seed.to_string(),
            "--out",
            out.to_str().unwrap(),
        ])?;
        let secs = t.elapsed().as_secs_f64();
        let doc = FrontDocument::from_json(&std::fs::read_to_string(out.join("front.json")).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;
        let r = hv(&doc.solutions, &reference) / target;
        if r < 0.95 || secs > 60.0 {
            return Err(format!("seed {seed}: {:.1}% of oracle hypervolume in {secs:.1}s", 100.0 * r));
        }
        ratios.push(format!("{:.1}%/{secs:.1}s", 100.0 * r));
    }
    Ok(format!("oracle hypervolume {target:.4}; seeds 0..4: {}", ratios.join(", ")))
}

fn sharing_speedup(dir: &Path) -> Outcome {
    let model = load_fixture("synthetic");
    let bops = model.design_space_size(u64::MAX).unique_bops;
    if bops < 50 {
        return Err(format!("synthetic model has only {bops} unique bags"));
    }
    let out = dir.join("synthetic");
    let t = Instant::now();
    bopco(&[
        "compare",
        fixture_path("synthetic").to_str().unwrap(),
        "--seed",
        "0",
        "--out",
        out.to_str().unwrap(),
    ])?;
    let total = t.elapsed().as_secs_f64();
    let c: Value = serde_json::from_str(&std::fs::read_to_string(out.join("comparison.json")).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    let ours = c["ours_secs"].as_f64().unwrap_or(f64::NAN);
    let base = c["baseline_secs"].as_f64().unwrap_or(f64::NAN);
    let ratio = c["hypervolume_ratio"].as_f64().unwrap_or(f64::NAN);
    let summary = format!(
        "{bops} bags, {} designs: ICEE {ours:.1}s vs nested {base:.1}s ({:.2}x), hypervolume ratio {ratio:.4}, {total:.0}s total",
        c["designs"],
        ours / base
    );
    if ours <= 0.5 * base && (ratio - 1.0).abs() <= 0.02 && total <= 600.0 && c["baseline_timed_out"] == false {
        Ok(summary)
    } else {
        Err(summary)
    }
}

fn co_optimization() -> Outcome {
    let mut lines = Vec::new();
    let mut strict = false;
    for name in COMPARISON_FIXTURES {
        let model = load_fixture(name);
        let params = IceeParams::for_model(&model, 0.75);
        let options = RunOptions::default();
        let (icee, _) = run(&model, params.clone(), options.clone()).map_err(|e| format!("{name}: {e}"))?;
        let co = icee.front();
        let (single, _) =
            optimize_single_design(&model, &model.input_design(), &params, &options).map_err(|e| format!("{name}: {e}"))?;
        let all = costs(&co).into_iter().chain(costs(&single)).collect::<Vec<_>>();
        let reference = reference_point(&all);
        let (h_co, h_single) = (hv(&co, &reference), hv(&single, &reference));
        if h_co < h_single {
            return Err(format!("{name}: co-optimized {h_co:.4} < single design {h_single:.4}"));
        }
        let best = |f: &[Solution], k: usize| f.iter().map(|s| s.cost.0[k]).fold(f64::INFINITY, f64::min);
        let better: Vec<&str> = ["f_c", "f_p", "f_t"]
            .into_iter()
            .enumerate()
            .filter(|&(k, _)| best(&co, k) < best(&single, k))
            .map(|(_, n)| n)
            .collect();
        strict |= !better.is_empty();
        lines.push(format!("{name} {h_co:.4} >= {h_single:.4} (better minimum: {})", better.join("/")));
    }
    if strict {
        Ok(lines.join("; "))
    } else {
        Err(format!("no fixture improves an objective minimum; {}", lines.join("; ")))
    }
}

fn box_fixture() -> Outcome {
    let b = box_graph();
    let stats = b.graph.stats();
    if stats.n_classes != 9 {
        return Err(format!("{} e-classes", stats.n_classes));
    }
    let d = b.worked_genome().decode(&b.graph).map_err(|e| e.to_string())?;
    let mut want = vec![b.key(&["x", "y1"]), b.key(&["y1"]), b.key(&["z1"])];
    want.sort();
    if d.design != b.open || b.leaf_keys(&d.leaves) != want {
        return Err("worked genome decodes to a different term".into());
    }
    if stats.n_enodes >= b.tree_nodes() {
        return Err(format!("{} e-nodes vs {} tree nodes", stats.n_enodes, b.tree_nodes()));
    }
    Ok(format!(
        "9 e-classes, genome decodes to {{x,y}} + {{y}} + {{z}}, {} e-nodes < {} tree nodes",
        stats.n_enodes,
        b.tree_nodes()
    ))
}

fn quadratic_layers(points: &[Vec<f64>]) -> Vec<Vec<usize>> {
    let mut left: Vec<usize> = (0..points.len()).collect();
    let mut layers = Vec::new();
    while !left.is_empty() {
        let (layer, rest): (Vec<usize>, Vec<usize>) = left
            .iter()
            .partition(|&&i| !left.iter().any(|&j| dominates(&points[j], &points[i])));
        layers.push(layer);
        left = rest;
    }
    layers
}

fn random_front(rng: &mut ChaCha8Rng, n: usize) -> Vec<Vec<f64>> {
    let pts: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            let v: Vec<f64> = (0..3).map(|_| rng.gen_range(0.05..1.0f64)).collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            v.iter().map(|x| x / norm + rng.gen_range(0.0..0.05)).collect()
        })
        .collect();
    quadratic_layers(&pts).swap_remove(0).into_iter().map(|i| pts[i].clone()).collect()
}

fn monte_carlo(front: &[Vec<f64>], reference: &[f64], samples: usize, rng: &mut ChaCha8Rng) -> f64 {
    let lo: Vec<f64> = (0..3)
        .map(|k| front.iter().map(|p| p[k]).fold(f64::INFINITY, f64::min))
        .collect();
    let mut hits = 0usize;
    let mut s = [0.0; 3];
    for _ in 0..samples {
        for k in 0..3 {
            s[k] = rng.gen_range(lo[k]..reference[k]);
        }
        if front.iter().any(|p| p.iter().zip(&s).all(|(a, b)| a <= b)) {
            hits += 1;
        }
    }
    let volume: f64 = (0..3).map(|k| reference[k] - lo[k]).product();
    volume * hits as f64 / samples as f64
}

fn moo_exactness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for i in 0..1000 {
        let n = rng.gen_range(1..=200);
        let d = if i % 2 == 0 { 2 } else { 3 };
        let grid = rng.gen_bool(0.5);
        let pts: Vec<Vec<f64>> = (0..n)
            .map(|_| {
                (0..d)
                    .map(|_| if grid { rng.gen_range(0..8) as f64 } else { rng.gen::<f64>() })
                    .collect()
            })
            .collect();
        let mut got = non_dominated_sort(&pts);
        let mut want = quadratic_layers(&pts);
        for l in got.iter_mut().chain(want.iter_mut()) {
            l.sort_unstable();
        }
        if got != want {
            return Err(format!("non-dominated sort differs on instance {i}"));
        }
    }
    let mut worst: f64 = 0.0;
    for i in 0..100 {
        let n = rng.gen_range(1..=12);
        let front = random_front(&mut rng, n);
        let reference = [1.2, 1.2, 1.2];
        let exact = hypervolume(&front, &reference).map_err(|e| e.to_string())?;
        let estimate = monte_carlo(&front, &reference, 1_000_000, &mut rng);
        let err = (exact - estimate).abs() / estimate;
        worst = worst.max(err);
        if err > 0.01 {
            return Err(format!("front {i}: exact {exact:.6} vs Monte Carlo {estimate:.6}"));
        }
    }
    for t in 0..100_000 {
        let p: Vec<[f64; 3]> = (0..3)
            .map(|_| [0; 3].map(|_| rng.gen_range(0..4) as f64))
            .collect();
        let (a, b, c) = (&p[0], &p[1], &p[2]);
        let ok = !dominates(a, a)
            && !(dominates(a, b) && dominates(b, a))
            && (!(dominates(a, b) && dominates(b, c)) || dominates(a, c));
        if !ok {
            return Err(format!("dominance properties fail on triple {t}: {p:?}"));
        }
    }
    Ok(format!(
        "1000 sorts match, 100 hypervolumes within {:.3}% of Monte Carlo, 100000 triples ordered",
        100.0 * worst
    ))
}

fn parameter_formulas() -> Outcome {
    let p = derive_params(0.75, 4, 13);
    let checks = [
        ("beta", beta(0.75) == 7),
        ("P", p.p == 10),
        ("K_d", p.k_d == 4),
        ("N_pop", p.n_pop == 16),
        ("K_f", p.k_f == 28),
        ("K_nd", p.k_nd == 1),
        ("t_d", p.t_d == 10),
        ("mt_d", p.mt_d == 200),
        ("t_p", p.t_p == 20),
        ("mt_p", p.mt_p == 200),
        ("mc_d", p.mc_d == 0.95),
        ("mm_d", p.mm_d == 0.80),
        ("mc_p", p.mc_p == 0.95),
        ("mm_p", p.mm_p == 0.80),
        ("w", p.w == 0.7),
        ("P_rate", p.p_rate == 0.3),
        ("K_m", p.k_m == 10),
    ];
    let bad: Vec<&str> = checks.iter().filter(|c| !c.1).map(|c| c.0).collect();
    if bad.is_empty() {
        Ok("beta=7, P=10, K_d=4, N_pop=16 and all loop constants".into())
    } else {
        Err(format!("wrong: {}", bad.join(", ")))
    }
}

fn safety() -> Outcome {
    let s = fuzz_campaign(500, 10);
    if s.violations.is_empty() {
        Ok(format!("{} audited iterations over {} fuzzed models, no violations", s.iterations, s.models))
    } else {
        Err(format!("{} violations: {:?}", s.violations.len(), s.violations))
    }
}

fn main() -> ExitCode {
    if std::env::args().any(|a| a == "--list") {
        return ExitCode::SUCCESS;
    }
    let dir = tempfile::tempdir().expect("temporary directory");
    let criteria: [(&str, Check); 7] = [
        ("frame oracle equivalence", Box::new(|| frame_oracle(dir.path()))),
        ("sharing speedup", Box::new(|| sharing_speedup(dir.path()))),
        ("co-optimization vs single design", Box::new(co_optimization)),
        ("box e-graph", Box::new(box_fixture)),
        ("MOO exactness", Box::new(moo_exactness)),
        ("parameter formulas", Box::new(parameter_formulas)),
        ("safety invariants", Box::new(safety)),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(m) => println!("PASS {} {name}: {m}", i + 1),
            Err(m) => {
                failed += 1;
                println!("FAIL {} {name}: {m}", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
