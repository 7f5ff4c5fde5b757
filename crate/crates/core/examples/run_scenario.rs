//! Loading and running a scenario file from code.
//!
//! cargo run --release --example run_scenario -- [scenario.toml] [out-dir]

use std::path::PathBuf;

use igac::scenario::{load_scenario, out_dir, run};

fn main() -> igac::Result<()> {
    let mut args = std::env::args().skip(1);
    let file = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios/spin_integrable_log.toml"));
    let scenario = load_scenario(&file)?;
    let out = out_dir(args.next().map(PathBuf::from).as_deref(), &scenario);
    let report = run(&scenario, &out)?;
    println!("{} [{}] passed: {}", report.id, report.kind, report.passed());
    for a in &report.assertions {
        println!("  {}: {} (want {})", a.name, a.measured, a.bound);
    }
    for f in &report.fits {
        println!("  {}: {}", f.quantity, f);
    }
    for f in &report.files {
        println!("  wrote {}", f.display());
    }
    Ok(())
}
