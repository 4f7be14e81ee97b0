use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bopco::baseline::{exhaustive_oracle, nested_optimize, OracleBudget};
use bopco::export::{front_csv, sig6, FrontDocument};
use bopco::icee::{Icee, IceeParams, RunOptions};
use bopco::moo::{hypervolume, reference_point, Solution};
use bopco::{parse_model, DesignSpaceModel, ObjectiveVector};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Map, Value};

/// Joint optimization of design variants and fabrication plans.
#[derive(Parser)]
#[command(name = "bopco", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the optimizer and write front.csv, front.json and report.json.
    Optimize {
        #[command(flatten)]
        run: RunArgs,
        /// Also write the final e-graph as egraph.dot.
        #[arg(long)]
        dot: bool,
    },
    /// Run the optimizer, then the nested per-design baseline over the explored designs.
    Compare {
        #[command(flatten)]
        run: RunArgs,
        /// Add the exhaustive oracle's hypervolume.
        #[arg(long)]
        oracle: bool,
        /// Stop the baseline after this many seconds.
        #[arg(long)]
        baseline_timeout_secs: Option<f64>,
    },
    /// Compute the exhaustive front of a small model.
    Oracle {
        model: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[arg(long, default_value_t = OracleBudget::default().max_designs)]
        max_designs: usize,
        #[arg(long, default_value_t = OracleBudget::default().max_arrangements_per_design)]
        max_arrangements: usize,
        #[arg(long, default_value_t = OracleBudget::default().max_cut_orders_per_atomic)]
        max_cut_orders: usize,
        #[arg(long, default_value_t = 0)]
        threads: usize,
    },
    /// Print model statistics and the derived parameters.
    Stats {
        model: PathBuf,
        #[arg(long, default_value_t = 0.75)]
        alpha: f64,
    },
    /// Write the e-graph after initialization and `--iterations` ICEE iterations as DOT.
    ExportDot {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, default_value_t = 0)]
        iterations: usize,
    },
}

#[derive(Args)]
struct RunArgs {
    model: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    alpha: Option<f64>,
    /// Override a parameter, e.g. `--param t_d=5`. Repeatable.
    #[arg(long = "param", value_name = "K=V")]
    params: Vec<String>,
    /// JSON object overriding parameters and the seed.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    timeout_secs: Option<f64>,
    /// Worker threads; 0 uses all cores.
    #[arg(long, default_value_t = 0)]
    threads: usize,
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Audit the e-graph after every iteration.
    #[arg(long)]
    audit: bool,
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    Infeasible(String),
    #[error("{0}")]
    Violation(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Parse(_) => 1,
            CliError::Infeasible(_) => 2,
            CliError::Violation(_) => 3,
        }
    }
}

impl From<bopco::Error> for CliError {
    fn from(e: bopco::Error) -> Self {
        use bopco::Error as E;
        match e {
            E::Schema { .. } | E::Json(_) | E::Io(_) | E::Param(_) => CliError::Parse(e.to_string()),
            E::Invariant(_)
            | E::DuplicateId { .. }
            | E::GeneOutOfRange { .. }
            | E::GeneCount { .. }
            | E::Unpackable(_)
            | E::BudgetExceeded(_) => CliError::Infeasible(e.to_string()),
            _ => CliError::Violation(e.to_string()),
        }
    }
}

type CliResult<T> = Result<T, CliError>;

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Parse(format!("{}: {e}", path.display()))
}

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| io_err(path, e))
}

fn write(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|e| CliError::Violation(format!("{}: {e}", path.display())))
}

fn load_model(path: &Path) -> CliResult<DesignSpaceModel> {
    parse_model(&read(path)?).map_err(|e| match CliError::from(e) {
        CliError::Parse(m) => CliError::Parse(format!("{}: {m}", path.display())),
        other => other,
    })
}

fn ensure_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::Violation(format!("{}: {e}", dir.display())))
}

/// Derived parameters with the config file, `--param` and `--timeout-secs`
/// applied in that order; returns them with the seed.
fn resolve(model: &DesignSpaceModel, args: &RunArgs) -> CliResult<(IceeParams, u64)> {
    let mut config = Map::new();
    if let Some(path) = &args.config {
        match serde_json::from_str::<Value>(&read(path)?) {
            Ok(Value::Object(m)) => config = m,
            Ok(_) => return Err(CliError::Parse(format!("{}: config must be a JSON object", path.display()))),
            Err(e) => return Err(CliError::Parse(format!("{}: {e}", path.display()))),
        }
    }
    let seed = match (args.seed, config.remove("seed")) {
        (Some(s), _) => s,
        (None, Some(v)) => v
            .as_u64()
            .ok_or_else(|| CliError::Parse(format!("config seed `{v}` is not an unsigned integer")))?,
        (None, None) => 0,
    };
    let alpha = match (args.alpha, config.remove("alpha")) {
        (Some(a), _) => a,
        (None, Some(v)) => v
            .as_f64()
            .ok_or_else(|| CliError::Parse(format!("config alpha `{v}` is not a number")))?,
        (None, None) => 0.75,
    };
    if !(0.0..=1.0).contains(&alpha) {
        return Err(CliError::Parse(format!("alpha = {alpha} is outside [0, 1]")));
    }
    let mut params = IceeParams::for_model(model, alpha);
    params.merge_json(&config)?;
    for kv in &args.params {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| CliError::Parse(format!("`--param {kv}` is not of the form key=value")))?;
        params.set(k.trim(), v.trim())?;
    }
    if let Some(t) = args.timeout_secs {
        params.set("timeout_secs", &t.to_string())?;
    }
    Ok((params, seed))
}

fn write_front(dir: &Path, front: &[Solution], reference: ObjectiveVector) -> CliResult<()> {
    write(&dir.join("front.csv"), &front_csv(front))?;
    let doc = FrontDocument::new(front, reference)?;
    write(&dir.join("front.json"), &doc.to_json()?)
}

fn to_json<T: serde::Serialize>(v: &T) -> CliResult<String> {
    serde_json::to_string_pretty(v).map_err(|e| CliError::Violation(e.to_string()))
}

fn cmd_optimize(args: &RunArgs, dot: bool) -> CliResult<()> {
    let model = load_model(&args.model)?;
    let (params, seed) = resolve(&model, args)?;
    ensure_dir(&args.out)?;
    let options = RunOptions {
        seed,
        threads: args.threads,
        audit: args.audit,
        fixed_designs: None,
    };
    let mut icee = Icee::new(&model, params, options)?;
    let report = icee.run()?;
    let front = icee.front();
    write_front(&args.out, &front, report.reference)?;
    write(&args.out.join("report.json"), &to_json(&report)?)?;
    if dot {
        write(&args.out.join("egraph.dot"), &icee.graph().to_dot())?;
    }
    println!(
        "{} solutions, hypervolume {}, {} iterations, {:.2}s ({})",
        front.len(),
        sig6(report.hypervolume),
        report.n_iter,
        report.total_secs,
        report.stop_reason
    );
    Ok(())
}

fn cmd_compare(args: &RunArgs, oracle: bool, baseline_timeout: Option<f64>) -> CliResult<()> {
    let model = load_model(&args.model)?;
    let (params, seed) = resolve(&model, args)?;
    ensure_dir(&args.out)?;
    let options = RunOptions {
        seed,
        threads: args.threads,
        audit: args.audit,
        fixed_designs: None,
    };
    let mut icee = Icee::new(&model, params.clone(), options.clone())?;
    let report = icee.run()?;
    let ours = icee.front();
    let nested = nested_optimize(&report.explored_designs, &model, &params, &options, baseline_timeout)?;
    let oracle_front = if oracle {
        Some(exhaustive_oracle(&model, OracleBudget::default())?)
    } else {
        None
    };

    let mut all: Vec<ObjectiveVector> = ours.iter().chain(&nested.front).map(|s| s.cost).collect();
    if let Some(o) = &oracle_front {
        all.extend(o.iter().map(|s| s.cost));
    }
    let reference = reference_point(&all);
    let hv = |front: &[Solution]| -> CliResult<f64> {
        let costs: Vec<ObjectiveVector> = front.iter().map(|s| s.cost).collect();
        Ok(hypervolume(&costs, &reference.0)?)
    };
    let hv_ours = hv(&ours)?;
    let hv_base = hv(&nested.front)?;
    let timed_out = nested.skipped > 0;
    let mut table = json!({
        "model": args.model.display().to_string(),
        "seed": seed,
        "designs": report.explored_designs.len(),
        "ours_secs": report.total_secs,
        "baseline_secs": nested.total_secs,
        "speedup": nested.total_secs / report.total_secs.max(1e-9),
        "ours_hypervolume": hv_ours,
        "baseline_hypervolume": hv_base,
        "hypervolume_ratio": if hv_base > 0.0 { hv_ours / hv_base } else { f64::NAN },
        "baseline_timed_out": timed_out,
        "baseline_designs_skipped": nested.skipped,
        "reference": reference,
    });
    let mut csv = String::from("method,minutes,hypervolume,front_size,designs\n");
    csv += &format!(
        "ours,{},{},{},{}\n",
        sig6(report.total_secs / 60.0),
        sig6(hv_ours),
        ours.len(),
        report.explored_designs.len()
    );
    csv += &format!(
        "baseline{},{},{},{},{}\n",
        if timed_out { " (timeout)" } else { "" },
        sig6(nested.total_secs / 60.0),
        sig6(hv_base),
        nested.front.len(),
        nested.runs.len()
    );
    if let Some(o) = &oracle_front {
        let h = hv(o)?;
        table["oracle_hypervolume"] = json!(h);
        csv += &format!("oracle,,{},{},\n", sig6(h), o.len());
    }
    write(&args.out.join("comparison.csv"), &csv)?;
    write(&args.out.join("comparison.json"), &to_json(&table)?)?;
    write(&args.out.join("report.json"), &to_json(&report)?)?;
    write_front(&args.out, &ours, reference)?;
    write(&args.out.join("baseline_front.csv"), &front_csv(&nested.front))?;
    print!("{csv}");
    Ok(())
}

fn cmd_oracle(model_path: &Path, out: &Path, budget: OracleBudget, threads: usize) -> CliResult<()> {
    let model = load_model(model_path)?;
    ensure_dir(out)?;
    let pool = rayon_pool(threads)?;
    let front = pool.install(|| exhaustive_oracle(&model, budget))?;
    let reference = reference_point(front.iter().map(|s| &s.cost));
    write_front(out, &front, reference)?;
    let costs: Vec<ObjectiveVector> = front.iter().map(|s| s.cost).collect();
    println!(
        "{} solutions, hypervolume {}",
        front.len(),
        sig6(hypervolume(&costs, &reference.0)?)
    );
    Ok(())
}

fn rayon_pool(threads: usize) -> CliResult<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Violation(format!("thread pool: {e}")))
}

fn cmd_stats(model_path: &Path, alpha: f64) -> CliResult<()> {
    let model = load_model(model_path)?;
    let size = model.design_space_size(bopco::icee::INIT_SAMPLES);
    let params = IceeParams::for_model(&model, alpha);
    let stats = json!({
        "parts": model.n_parts(),
        "connectors": model.connectors.len(),
        "connecting_variations": model.connectors.iter().map(|c| c.variants.len()).sum::<usize>(),
        "assignments": size.assignments.to_string(),
        "unique_bops": size.unique_bops,
        "unique_bops_exact": size.exact,
        "stock_types": model.stock.len(),
        "tools": model.tools.len(),
        "params": params,
    });
    println!("{}", to_json(&stats)?);
    Ok(())
}

fn cmd_export_dot(args: &RunArgs, iterations: usize) -> CliResult<()> {
    let model = load_model(&args.model)?;
    let (params, seed) = resolve(&model, args)?;
    let options = RunOptions {
        seed,
        threads: args.threads,
        audit: args.audit,
        fixed_designs: None,
    };
    let mut icee = Icee::new(&model, params, options)?;
    icee.initialize()?;
    for _ in 0..iterations {
        if !icee.step()? {
            break;
        }
    }
    ensure_dir(&args.out)?;
    let path = args.out.join("egraph.dot");
    write(&path, &icee.graph().to_dot())?;
    println!("{}", path.display());
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("BOPCO_LOG", "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Optimize { run, dot } => cmd_optimize(run, *dot),
        Command::Compare {
            run,
            oracle,
            baseline_timeout_secs,
        } => cmd_compare(run, *oracle, *baseline_timeout_secs),
        Command::Oracle {
            model,
            out,
            max_designs,
            max_arrangements,
            max_cut_orders,
            threads,
        } => cmd_oracle(
            model,
            out,
            OracleBudget {
                max_designs: *max_designs,
                max_arrangements_per_design: *max_arrangements,
                max_cut_orders_per_atomic: *max_cut_orders,
            },
            *threads,
        ),
        Command::Stats { model, alpha } => cmd_stats(model, *alpha),
        Command::ExportDot { run, iterations } => cmd_export_dot(run, *iterations),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_follow_error_class() {
        let code = |e: bopco::Error| CliError::from(e).code();
        assert_eq!(code(bopco::Error::Param("x".into())), 1);
        assert_eq!(code(bopco::Error::Unpackable("x".into())), 2);
        assert_eq!(code(bopco::Error::Invariant("x".into())), 2);
        assert_eq!(code(bopco::Error::Violation("x".into())), 3);
        assert_eq!(code(bopco::Error::Cycle(bopco::EClassId(0))), 3);
    }
}
