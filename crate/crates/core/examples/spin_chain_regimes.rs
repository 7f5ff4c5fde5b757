//! Integrable versus chaotic spin chains: logarithmic against linear entropy growth.
//!
//! cargo run --release --example spin_chain_regimes

use igac::catalog::{build, CatalogId};
use igac::complexity::igc;
use igac::geodesic::integrate_ivp;
use igac::growth::{classify_growth, Quantity};
use igac::manifold::ParamPoint;

fn run(id: CatalogId, theta0: Vec<f64>, v0: Vec<f64>, start: f64, tail: f64) -> igac::Result<()> {
    let model = build(&id)?;
    let path = integrate_ivp(&model, &ParamPoint::new(theta0), &v0, 20.0, 1e-10)?;
    let taus: Vec<f64> = (0..151).map(|i| start + (20.0 - start) * i as f64 / 150.0).collect();
    let trace = igc(&model, &path, &taus, 0.0)?;
    println!("{id}\n  S: {}", classify_growth(&trace, Quantity::Ige, tail)?);
    Ok(())
}

fn main() -> igac::Result<()> {
    // mu_A = e^tau, mu_B = e^{2 tau}: V = 2 s^2, C = 2 tau^2 / 3, S = 2 ln tau + const
    run(CatalogId::SpinIntegrable, vec![1.0, 1.0], vec![1.0, 2.0], 1.0, 0.5)?;
    run(CatalogId::SpinChaotic, vec![1.0, 0.0, 1e6], vec![0.5, 2e5, 2e6], 5.0, 1.0)?;
    Ok(())
}
