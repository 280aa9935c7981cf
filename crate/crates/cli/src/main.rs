use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use threeslp::ablation::{alpha_grid, init_grid, k_grid};
use threeslp::config::{ExperimentConfig, Mode, Overrides};
use threeslp::pipeline::{load_graph, run_experiment};
use threeslp::prepare::prepare_content_cites;
use threeslp::{analyze, run_ablation, run_gradcheck, CliError, ExperimentReport};

#[derive(Parser)]
#[command(name = "threeslp", version, about = "Link prediction on graphs known only by their node attributes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Sweep {
    K,
    Alpha,
    Init,
}

#[derive(Subcommand)]
enum Command {
    /// Convert raw exports (or the synthetic generator) into a dataset directory
    Prepare {
        /// Content file: id, features..., class per line
        #[arg(long, requires = "cites")]
        content: Option<PathBuf>,
        /// Citation file: two ids per line
        #[arg(long)]
        cites: Option<PathBuf>,
        /// Dataset name recorded in meta.json
        #[arg(long, default_value = "dataset")]
        name: String,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Run the prediction pipeline and the attribute-only baseline over several seeds
    Run {
        #[command(flatten)]
        overrides: Overrides,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long, default_value = "runs")]
        out: PathBuf,
    },
    /// Attribute-only baseline (no training)
    Baseline {
        #[command(flatten)]
        overrides: Overrides,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long, default_value = "runs")]
        out: PathBuf,
    },
    /// Sweep k, the teleport pair, or the initialization method
    Ablate {
        #[command(flatten)]
        overrides: Overrides,
        #[arg(long, value_enum)]
        sweep: Sweep,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long, default_value = "runs")]
        out: PathBuf,
    },
    /// Homophily diagnostics and spectrum alignment of a dataset
    Analyze {
        #[command(flatten)]
        overrides: Overrides,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Spectrum alignment only
    Spectrum {
        #[command(flatten)]
        overrides: Overrides,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Finite-difference check of every analytic gradient
    Gradcheck {
        /// Multiply analytic gradients by this factor (fault injection)
        #[arg(long)]
        inject_fault: Option<f64>,
    },
}

fn write_json(out: Option<&PathBuf>, file: &str, json: &str) -> Result<(), CliError> {
    match out {
        Some(dir) => {
            std::fs::create_dir_all(dir).map_err(|e| CliError::Data(format!("{}: {e}", dir.display())))?;
            let path = dir.join(file);
            std::fs::write(&path, json).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
            println!("wrote {}", path.display());
        }
        None => {
            // a closed pipe (e.g. `| head`) is not an error
            let _ = writeln!(std::io::stdout().lock(), "{json}");
        }
    }
    Ok(())
}

fn summarize(r: &ExperimentReport) -> Result<(), CliError> {
    println!("dataset {} (n = {}, d = {})", r.dataset.name, r.dataset.n, r.dataset.d);
    for (name, a) in &r.aggregates {
        println!("  {name:<22} {:.4} ± {:.4} over {}", a.mean, a.std, a.count);
    }
    for n in &r.notices {
        println!("  note: {n}");
    }
    println!("report {}/report.json", r.run_dir);
    if r.runs.iter().all(|x| !x.ok) {
        return Err(CliError::Numeric("every repeat failed".into()));
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Prepare {
            content,
            cites,
            name,
            out,
            overrides,
        } => match (content, cites) {
            (Some(c), Some(l)) => {
                let s = prepare_content_cites(&name, &c, &l, &out)?;
                println!(
                    "{} nodes, {} features, {} edges, {} classes ({} links dropped) -> {}",
                    s.nodes,
                    s.features,
                    s.edges,
                    s.classes,
                    s.dropped_links,
                    out.display()
                );
                Ok(())
            }
            _ => {
                let cfg = overrides.resolve()?;
                let g = load_graph(&ExperimentConfig { dataset: None, ..cfg })?;
                slp_core::graph::save_dataset(&g, &out)?;
                println!("{} -> {}", g.name(), out.display());
                Ok(())
            }
        },
        Command::Run { overrides, jobs, out } => summarize(&run_experiment(&overrides.resolve()?, &out, jobs)?),
        Command::Baseline { overrides, jobs, out } => {
            let cfg = ExperimentConfig {
                mode: Mode::PscNa,
                ..overrides.resolve()?
            };
            summarize(&run_experiment(&cfg, &out, jobs)?)
        }
        Command::Ablate {
            overrides,
            sweep,
            jobs,
            out,
        } => {
            let cfg = overrides.resolve()?;
            let points = match sweep {
                Sweep::K => k_grid(&cfg),
                Sweep::Alpha => alpha_grid(&cfg),
                Sweep::Init => init_grid(&cfg),
            };
            let rep = run_ablation(&cfg, &points, &out, jobs)?;
            print!("{}", rep.summary_csv());
            println!("wrote {}", out.join("sweep.csv").display());
            Ok(())
        }
        Command::Analyze { overrides, out } => {
            let cfg = overrides.resolve()?;
            let rep = analyze(&load_graph(&cfg)?, &cfg, true)?;
            let json = serde_json::to_string_pretty(&rep).expect("report serializes");
            write_json(out.as_ref(), "analysis.json", &json)
        }
        Command::Spectrum { overrides, out } => {
            let cfg = overrides.resolve()?;
            let rep = analyze(&load_graph(&cfg)?, &cfg, true)?;
            let json = serde_json::to_string_pretty(&rep.spectrum).expect("report serializes");
            write_json(out.as_ref(), "spectrum.json", &json)
        }
        Command::Gradcheck { inject_fault } => {
            let s = run_gradcheck(inject_fault)?;
            for c in &s.cases {
                println!(
                    "{} {:<46} max rel err {:.3e}",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.name,
                    c.max_relative_error
                );
            }
            println!("{} cases in {:.2}s (tolerance {:e})", s.cases.len(), s.elapsed_s, s.tolerance);
            if s.passed {
                Ok(())
            } else {
                Err(CliError::Numeric("gradient check failed".into()))
            }
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
