//! Closed-form complexity ratios of the correlated Gaussian models.
//!
//! cargo run --example ratio_tables

use igac::catalog::{rho_grid, RATIO_FAMILIES};

fn main() -> igac::Result<()> {
    let grid = rho_grid(0.0, 0.7, 0.1)?;
    print!("{:>6}", "rho");
    for (name, _, _) in RATIO_FAMILIES {
        print!(" {:>12.12}", name);
    }
    println!();
    for rho in grid {
        print!("{rho:>6.2}");
        for (_, f, _) in RATIO_FAMILIES {
            match f(rho) {
                Ok(v) => print!(" {v:>12.6}"),
                Err(_) => print!(" {:>12}", "-"),
            }
        }
        println!();
    }
    for (name, _, domain) in RATIO_FAMILIES {
        println!("{name}: rho in {domain}");
    }
    Ok(())
}
