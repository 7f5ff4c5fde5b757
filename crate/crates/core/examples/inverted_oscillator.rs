//! Inverted harmonic oscillators: exponential volumes, linear entropy.
//!
//! cargo run --release --example inverted_oscillator

use igac::catalog::{build, CatalogId};
use igac::complexity::igc;
use igac::geodesic::integrate_ivp;
use igac::growth::{classify_growth, Quantity};
use igac::manifold::ParamPoint;

fn main() -> igac::Result<()> {
    for omega in [vec![1.0], vec![1.0, 2.0]] {
        let model = build(&CatalogId::Iho { omega: omega.clone() })?;
        let theta0 = vec![1.0; omega.len()];
        let v0 = vec![0.5; omega.len()];
        let path = integrate_ivp(&model, &ParamPoint::new(theta0), &v0, 40.0, 1e-10)?;
        let taus: Vec<f64> = (0..351).map(|i| 5.0 + 0.1 * i as f64).collect();
        let trace = igc(&model, &path, &taus, 0.0)?;
        println!("{}", model.name());
        println!("  V: {}", classify_growth(&trace, Quantity::Volume, 1.0)?);
        println!("  S: {}", classify_growth(&trace, Quantity::Ige, 1.0)?);
    }
    Ok(())
}
