use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};
use igac::catalog::{self, CatalogId, CATALOG, RATIO_FAMILIES};
use igac::manifold::{metric_analytic, ParamPoint};
use igac::scenario::run_path;
use igac::table::fmt_num;

/// Information-geometric complexity experiments.
#[derive(Parser)]
#[command(name = "igac", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file, or every *.toml file in a directory.
    Run {
        path: PathBuf,
        /// Output directory; otherwise IGAC_OUT, the scenario's out_dir, then ./igac-out.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        workers: usize,
    },
    /// Model catalog.
    Catalog {
        #[command(subcommand)]
        action: CatalogAction,
    },
    /// Print the metric of a catalog model at a point.
    Metric {
        #[arg(long)]
        model: String,
        /// k=v pairs; list values use ';' (omega=1;2).
        #[arg(long, default_value = "")]
        params: String,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        theta: Vec<f64>,
    },
    /// Tabulate a closed-form ratio family as rho,value CSV.
    Ratios {
        #[arg(long)]
        family: String,
        #[arg(long = "rho-grid")]
        rho_grid: String,
    },
}

#[derive(Subcommand)]
enum CatalogAction {
    List,
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: Cli) -> anyhow::Result<bool> {
    match cli.command {
        Command::Run { path, out, workers } => run(path, out, workers),
        Command::Catalog {
            action: CatalogAction::List,
        } => {
            for e in CATALOG {
                let params: Vec<String> = e.params.iter().map(|(n, d)| format!("{n} in {d}")).collect();
                let params = if params.is_empty() { "-".into() } else { params.join("; ") };
                println!("{}\tdim={}\t({})\tparams: {}\t{}", e.name, e.dimension, e.coordinates, params, e.family);
            }
            println!();
            println!("ratio families:");
            for (name, _, domain) in RATIO_FAMILIES {
                println!("{name}\trho in {domain}");
            }
            Ok(true)
        }
        Command::Metric { model, params, theta } => {
            let id = CatalogId::from_parts(&model, &catalog::parse_params(&params)?)?;
            let m = catalog::build(&id)?;
            if theta.len() != m.dim() {
                bail!("{id} has dimension {}, got {} coordinates", m.dim(), theta.len());
            }
            let g = metric_analytic(&m, &ParamPoint::new(theta))?;
            for row in g.components().row_iter() {
                let cells: Vec<String> = row.iter().map(|x| fmt_num(*x)).collect();
                println!("{}", cells.join(","));
            }
            Ok(true)
        }
        Command::Ratios { family, rho_grid } => {
            let f = catalog::ratio_family(&family)?;
            let grid = catalog::parse_grid(&rho_grid)?;
            println!("rho,value");
            for rho in grid {
                let v = f(rho).with_context(|| format!("{family} at rho = {rho}"))?;
                println!("{},{}", fmt_num(rho), fmt_num(v));
            }
            Ok(true)
        }
    }
}

fn run(path: PathBuf, out: Option<PathBuf>, workers: usize) -> anyhow::Result<bool> {
    let results = run_path(&path, out.as_deref(), workers)?;
    if results.is_empty() {
        bail!("no scenario files under {}", path.display());
    }
    let mut ok = true;
    for (file, result) in results {
        match result {
            Ok(report) => {
                let status = if report.passed() { "PASS" } else { "FAIL" };
                ok &= report.passed();
                println!(
                    "{status} {} [{}] {:.3}s",
                    report.id,
                    report.kind,
                    report.duration.as_secs_f64()
                );
                for a in &report.assertions {
                    let mark = if a.passed { "ok  " } else { "FAIL" };
                    println!("  {mark} {}: {} (want {})", a.name, a.measured, a.bound);
                }
                for n in &report.notes {
                    println!("  note: {n}");
                }
                for f in &report.files {
                    println!("  wrote {}", f.display());
                }
            }
            Err(e) => {
                ok = false;
                println!("FAIL {}: {e}", file.display());
            }
        }
    }
    Ok(ok)
}
