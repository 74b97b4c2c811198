use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use cq_scatter::assembly::Scheme;
use cq_scatter::cq::MultistepRule;
use cq_scatter::scenarios::{
    all_combinations, convergence_study, error_table_csv, render_snapshots, run_scenario,
    write_snapshots, Scenario, Spatial,
};
use cq_scatter::Result;

/// Transient acoustic scattering with convolution quadrature.
#[derive(Debug, Parser)]
#[command(name = "cq-scatter", version)]
struct Cli {
    /// Worker threads for the frequency solves.
    #[arg(long, global = true, env = "CQ_SCATTER_WORKERS")]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve one scenario and write the field at the observation points.
    Solve {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        rule: Option<MultistepRule>,
        #[arg(long)]
        scheme: Option<Scheme>,
        #[arg(long = "N")]
        steps: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Maximum error at the observation points for several step counts.
    Converge {
        #[arg(long)]
        config: PathBuf,
        #[arg(long = "N-list", value_delimiter = ',', required = true)]
        steps: Vec<usize>,
        #[arg(long = "reference-N")]
        reference_steps: usize,
        /// Collocation points of the reference (MFS or Galerkin).
        #[arg(long = "reference-M")]
        reference_m: Option<usize>,
        /// Sources of the reference (MFS only).
        #[arg(long = "reference-K")]
        reference_k: Option<usize>,
        /// Restrict the study to one rule.
        #[arg(long)]
        rule: Option<MultistepRule>,
        /// Restrict the study to one scheme.
        #[arg(long)]
        scheme: Option<Scheme>,
        /// Write the table here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Total field on the snapshot grid at the given times.
    Snapshots {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_delimiter = ',')]
        times: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load(path: &Path, workers: Option<usize>) -> Result<Scenario> {
    let mut sc = Scenario::from_file(path)?;
    if workers.is_some() {
        sc.workers = workers;
    }
    Ok(sc)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Solve {
            config,
            rule,
            scheme,
            steps,
            out,
        } => {
            let mut sc = load(&config, cli.workers)?;
            if let Some(r) = rule {
                sc.rule = r;
            }
            if let Some(s) = scheme {
                sc.scheme = s;
            }
            if let Some(n) = steps {
                sc.steps = n;
            }
            if out.is_some() {
                sc.output = out;
            }
            let run = run_scenario(&sc)?;
            for w in &run.report.warnings {
                eprintln!("warning: {w}");
            }
            println!(
                "{}: {} {} N = {}, {} systems, max |u| = {:e}, max relative residual = {:e}",
                sc.name,
                sc.scheme,
                sc.rule,
                sc.steps,
                run.report.records.len(),
                run.field.max_abs(),
                run.report.max_residual()
            );
            if let Some(dir) = &sc.output {
                println!("written to {}", dir.display());
            }
        }
        Command::Converge {
            config,
            steps,
            reference_steps,
            reference_m,
            reference_k,
            rule,
            scheme,
            out,
        } => {
            let sc = load(&config, cli.workers)?;
            let mut reference = Scenario {
                steps: reference_steps,
                ..sc.clone()
            };
            reference.spatial = match reference.spatial {
                Spatial::Mfs { m, k, radius } => Spatial::Mfs {
                    m: reference_m.unwrap_or(m),
                    k: reference_k.unwrap_or(k),
                    radius,
                },
                Spatial::Galerkin { m } => Spatial::Galerkin {
                    m: reference_m.unwrap_or(m),
                },
            };
            let combos: Vec<_> = all_combinations()
                .into_iter()
                .filter(|(r, s)| rule.is_none_or(|x| x == *r) && scheme.is_none_or(|x| x == *s))
                .collect();
            let table = error_table_csv(&convergence_study(&sc, &steps, &reference, &combos)?);
            match out {
                Some(path) => std::fs::write(&path, table)
                    .map_err(|e| cq_scatter::Error::Io(format!("cannot write {}: {e}", path.display())))?,
                None => print!("{table}"),
            }
        }
        Command::Snapshots { config, times, out } => {
            let sc = load(&config, cli.workers)?;
            let set = render_snapshots(&sc, &times)?;
            for w in &set.warnings {
                eprintln!("warning: {w}");
            }
            let dir = out
                .or_else(|| sc.output.clone())
                .unwrap_or_else(|| PathBuf::from(format!("{}-snapshots", sc.name)));
            write_snapshots(&dir, &set)?;
            println!("{} snapshots written to {}", set.frames.len(), dir.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
