//! Command-line front end: `forward`, `inverse`, `fdm`, `nilt`, `verify`.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use subdiff::run::{cmd_fdm, cmd_forward, cmd_inverse, cmd_nilt, NiltRequest, RunConfig};

#[derive(Parser)]
#[command(
    name = "subdiff",
    version,
    about = "Laplace-domain neural solvers for time-fractional subdiffusion"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Named preset (see the subcommand help for the list).
    #[arg(long)]
    preset: Option<String>,
    /// TOML config file; its `run.preset` is used unless `--preset` is given.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Repeatable `section.key=value` override.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Output directory (overrides `run.out_dir`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Master seed (overrides `run.seed`).
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Train a forward model on a preset and score it against its reference.
    ///
    /// Presets: forward1d, forward2d-t1, forward2d-t10, forward3d.
    Forward(RunArgs),
    /// Jointly recover the diffusion coefficient and solution.
    ///
    /// Presets: inverse3d, inverse2d-desk.
    Inverse(RunArgs),
    /// Run the finite-difference reference solver alone (1D/2D presets).
    Fdm(RunArgs),
    /// Numerically invert a named transform pair or a checkpoint slice, or
    /// export Stehfest coefficient tables.
    Nilt {
        /// Named pair: one-over-s, one-over-s2, exp-decay.
        #[arg(long, conflicts_with_all = ["coefficients", "checkpoint"])]
        pair: Option<String>,
        /// Export the M-term Stehfest weights as CSV.
        #[arg(long, value_name = "M", conflicts_with = "checkpoint")]
        coefficients: Option<usize>,
        /// Invert a checkpointed network at --point.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        /// Comma-separated spatial point for --checkpoint.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        point: Vec<f64>,
        /// Comma-separated times.
        #[arg(long, value_delimiter = ',', default_values_t = vec![0.5, 1.0, 2.0])]
        times: Vec<f64>,
        /// Stehfest term count.
        #[arg(long, default_value_t = 12)]
        m: usize,
        /// Smallest trained time for --checkpoint.
        #[arg(long, default_value_t = 0.01)]
        t1: f64,
        /// Final trained time for --checkpoint.
        #[arg(long = "t-final", default_value_t = 1.0)]
        t_final: f64,
        #[arg(long, default_value = "runs/nilt")]
        out: PathBuf,
    },
    /// Run the fast invariant suite and exit nonzero on any failure.
    Verify {
        /// Seed for the randomized probes.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn resolve_config(args: &RunArgs) -> Result<RunConfig, subdiff::Error> {
    let file_text = match &args.config {
        Some(path) => Some(std::fs::read_to_string(path)?),
        None => None,
    };
    // The preset decides the defaults; it comes from --preset or the file.
    let preset_name = match (&args.preset, &file_text) {
        (Some(name), _) => name.clone(),
        (None, Some(text)) => {
            let doc: toml::Table = text
                .parse()
                .map_err(|e: toml::de::Error| subdiff::Error::Config(e.to_string()))?;
            doc.get("run")
                .and_then(|r| r.get("preset"))
                .and_then(|p| p.as_str())
                .map(str::to_string)
                .ok_or_else(|| {
                    subdiff::Error::Config(
                        "config file must set run.preset (or pass --preset)".into(),
                    )
                })?
        }
        (None, None) => {
            return Err(subdiff::Error::Config(
                "either --preset or --config is required".into(),
            ))
        }
    };
    let mut cfg = RunConfig::preset(&preset_name)?;
    if let Some(text) = &file_text {
        cfg = cfg.merged_with_toml(text)?;
        cfg.run.preset = preset_name;
    }
    for assignment in &args.set {
        cfg = cfg.with_override(assignment)?;
    }
    if let Some(seed) = args.seed {
        cfg.run.seed = seed;
    }
    if let Some(out) = &args.out {
        cfg.run.out_dir = out.display().to_string();
    }
    Ok(cfg)
}

fn print_metrics(manifest: &subdiff::run::RunManifest) {
    println!("preset:   {}", manifest.preset);
    println!("seed:     {}", manifest.seed);
    println!("duration: {:.1} s", manifest.duration_seconds);
    for (key, value) in &manifest.metrics {
        println!("{key}: {value:.6e}");
    }
    println!(
        "artifacts in {}: {}",
        manifest.config.run.out_dir,
        manifest.outputs.join(", ")
    );
}

fn run_nilt(
    pair: &Option<String>,
    coefficients: &Option<usize>,
    checkpoint: &Option<PathBuf>,
    point: &[f64],
    times: &[f64],
    m: usize,
    t1: f64,
    t_final: f64,
    out: &PathBuf,
) -> Result<(), subdiff::Error> {
    let request = if let Some(m) = coefficients {
        NiltRequest::Coefficients { m: *m }
    } else if let Some(path) = checkpoint {
        NiltRequest::Checkpoint {
            path: path.clone(),
            point: point.to_vec(),
            times: times.to_vec(),
            m,
            t1,
            t_final,
        }
    } else if let Some(name) = pair {
        NiltRequest::Pair {
            name: name.clone(),
            times: times.to_vec(),
            m,
        }
    } else {
        return Err(subdiff::Error::Config(
            "nilt needs --pair, --coefficients, or --checkpoint".into(),
        ));
    };
    let rows = cmd_nilt(&request, out)?;
    match &request {
        NiltRequest::Coefficients { m } => {
            println!("Stehfest weights, M = {m}:");
            for (i, mu, _) in &rows {
                println!("  mu_{:<2} = {mu:+.6e}", *i as usize);
            }
        }
        _ => {
            println!("{:>10} {:>16} {:>16} {:>10}", "t", "numeric", "exact", "abs err");
            for (t, numeric, exact) in &rows {
                if exact.is_nan() {
                    println!("{t:>10.4} {numeric:>16.8e} {:>16} {:>10}", "-", "-");
                } else {
                    println!(
                        "{t:>10.4} {numeric:>16.8e} {exact:>16.8e} {:>10.2e}",
                        (numeric - exact).abs()
                    );
                }
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome: Result<ExitCode, subdiff::Error> = match &cli.command {
        Command::Forward(args) => resolve_config(args).and_then(|cfg| {
            let manifest = cmd_forward(&cfg)?;
            print_metrics(&manifest);
            Ok(ExitCode::SUCCESS)
        }),
        Command::Inverse(args) => resolve_config(args).and_then(|cfg| {
            let manifest = cmd_inverse(&cfg)?;
            print_metrics(&manifest);
            Ok(ExitCode::SUCCESS)
        }),
        Command::Fdm(args) => resolve_config(args).and_then(|cfg| {
            let manifest = cmd_fdm(&cfg)?;
            print_metrics(&manifest);
            Ok(ExitCode::SUCCESS)
        }),
        Command::Nilt {
            pair,
            coefficients,
            checkpoint,
            point,
            times,
            m,
            t1,
            t_final,
            out,
        } => run_nilt(pair, coefficients, checkpoint, point, times, *m, *t1, *t_final, out)
            .map(|()| ExitCode::SUCCESS),
        Command::Verify { seed } => {
            let results = subdiff::run::verify::run_all(*seed);
            let mut failed = 0usize;
            let mut group = "";
            for r in &results {
                if r.group != group {
                    group = r.group;
                    println!("[{group}]");
                }
                let mark = if r.passed { "PASS" } else { "FAIL" };
                if r.detail.is_empty() {
                    println!("  {mark}  {}", r.name);
                } else {
                    println!("  {mark}  {} ({})", r.name, r.detail);
                }
                if !r.passed {
                    failed += 1;
                }
            }
            println!("\n{} checks, {} failed", results.len(), failed);
            return if failed == 0 {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            };
        }
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
