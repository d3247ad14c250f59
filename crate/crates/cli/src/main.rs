use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use concentra::experiments::{estimate_distance, run_rate_experiment, EstimatorKind, ExperimentConfig};
use concentra::laplace::{laplace_error_scan, TubularFrame};
use concentra::limit::{build_limit_measure, check_from_below, default_u_grid};
use concentra::problem::json::resolve_problem;
use concentra::sampling::SeedSpec;
use concentra::{Error, GibbsFamily};

#[derive(Parser)]
#[command(name = "concentra", version, about = "Limit measures and Wasserstein rates for concentrating Gibbs families")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the structural, tail and Hessian conditions of a problem.
    Validate {
        /// Builtin name or path to a JSON problem.
        problem: String,
        #[arg(long)]
        dim: Option<usize>,
    },
    /// Print the limit measure as JSON.
    Limit {
        problem: String,
        #[arg(long)]
        dim: Option<usize>,
        /// Also evaluate the from-below condition at this n.
        #[arg(long)]
        from_below: Option<u64>,
    },
    /// Estimate W^p between μₙ and the limit.
    Distance {
        problem: String,
        #[arg(long)]
        n: u64,
        #[arg(long, default_value_t = 2)]
        p: u32,
        /// semi_discrete, coupling, empirical or closed_form.
        #[arg(long, default_value = "coupling")]
        method: String,
        #[arg(long, default_value_t = 2048)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        dim: Option<usize>,
        /// Write the transport plan as `i,j,mass` CSV, when there is one.
        #[arg(long)]
        plan: Option<PathBuf>,
    },
    /// Run a rate experiment described by a JSON config.
    Rate {
        config: PathBuf,
        /// Override the output prefix of the config.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Tabulate the Laplace error of the slice integral at one base point.
    LaplaceScan {
        problem: String,
        /// Index into the default base-point grid (points, then 64 per sphere).
        #[arg(long, default_value_t = 0)]
        u_index: usize,
        #[arg(long)]
        dim: Option<usize>,
        /// First grid value; the grid doubles from there.
        #[arg(long, default_value_t = 32)]
        n_start: u64,
        #[arg(long, default_value_t = 7)]
        points: usize,
    },
}

fn family(problem: &str, dim: Option<usize>) -> concentra::Result<GibbsFamily> {
    resolve_problem::<f64>(problem, dim)
}

fn emit(text: &str) {
    // a closed pipe (e.g. `| head`) is not an error worth reporting
    let _ = std::io::stdout().write_all(text.as_bytes());
}

fn print(v: &Value) {
    emit(&format!("{}\n", serde_json::to_string_pretty(v).expect("serializable")));
}

fn run(cli: Cli) -> concentra::Result<ExitCode> {
    match cli.command {
        Command::Validate { problem, dim } => {
            let fam = family(&problem, dim)?;
            let report = fam.validate()?;
            print(&serde_json::to_value(&report)?);
            if !report.passed {
                eprintln!("validation failed: {}", report.failure_summary());
                return Ok(ExitCode::from(2));
            }
        }
        Command::Limit { problem, dim, from_below } => {
            let fam = family(&problem, dim)?;
            let limit = build_limit_measure(&fam)?;
            let mut out = limit.to_json();
            if let Some(n) = from_below {
                let report = check_from_below(&fam, n, &default_u_grid(&fam))?;
                out["from_below"] = serde_json::to_value(&report)?;
            }
            print(&out);
        }
        Command::Distance {
            problem,
            n,
            p,
            method,
            count,
            seed,
            dim,
            plan,
        } => {
            let fam = family(&problem, dim)?;
            let limit = build_limit_measure(&fam)?;
            let kind = EstimatorKind::parse(&method)?;
            let est = estimate_distance(&fam, &limit, n, p, kind, count, SeedSpec::new(seed, 0))?;
            if let (Some(path), Some(pl)) = (plan, &est.plan) {
                std::fs::write(path, pl.to_csv())?;
            }
            print(&json!({
                "problem": fam.name(),
                "n": n,
                "p": p,
                "method": est.method,
                "value": est.value,
                "standard_error": est.standard_error,
            }));
        }
        Command::Rate { config, output } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if output.is_some() {
                cfg.output = output;
            }
            let report = run_rate_experiment(&cfg)?;
            print(&json!({
                "problem": report.problem,
                "fit": report.fit,
                "partial": report.partial,
                "error": report.error,
            }));
            if report.partial {
                return Ok(ExitCode::from(3));
            }
        }
        Command::LaplaceScan {
            problem,
            u_index,
            dim,
            n_start,
            points,
        } => {
            let fam = family(&problem, dim)?;
            let grid = default_u_grid(&fam);
            let u = grid.get(u_index).ok_or_else(|| {
                Error::InvalidConfig(format!("u-index {u_index} out of range (grid has {})", grid.len()))
            })?;
            let (index, _) = fam.minimal_set().nearest(u);
            let frame = TubularFrame::for_component(&fam, index)?;
            let n_grid: Vec<u64> = (0..points).map(|k| n_start << k).collect();
            let scan = laplace_error_scan(&frame, &fam, u, &n_grid)?;
            emit(&scan.to_csv());
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_validation() {
                ExitCode::from(2)
            } else {
                ExitCode::from(3)
            }
        }
    }
}
