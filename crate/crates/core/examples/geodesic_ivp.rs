//! Geodesics of the Gaussian manifold from initial data, written as CSV.
//!
//! cargo run --example geodesic_ivp -- [out.csv]

use std::path::PathBuf;

use igac::catalog::{build, CatalogId};
use igac::geodesic::{integrate_ivp, squared_speed};
use igac::manifold::ParamPoint;

fn main() -> igac::Result<()> {
    let out = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| "gaussian_path.csv".into());
    let model = build(&CatalogId::UncorrelatedGaussian { l: 1 })?;

    // pure width motion: sigma(tau) = e^tau
    let radial = integrate_ivp(&model, &ParamPoint::new(vec![0.0, 1.0]), &[0.0, 1.0], 3.0, 1e-12)?;
    for tau in [1.0, 2.0, 3.0] {
        let sigma = radial.theta_at(tau)?[1];
        println!("tau={tau}: sigma={sigma:.12} e^tau={:.12}", f64::exp(tau));
    }

    // a tilted start traces a half-ellipse and heads back toward sigma -> 0
    let p = integrate_ivp(&model, &ParamPoint::new(vec![0.0, 1.0]), &[1.0, 0.5], 30.0, 1e-10)?;
    let s0 = squared_speed(&model, &p, 0)?;
    let s1 = squared_speed(&model, &p, p.len() - 1)?;
    println!(
        "{} knots, stopped at tau={:.3} (truncated: {}), squared speed {s0:.12} -> {s1:.12}",
        p.len(),
        p.end(),
        p.truncated()
    );
    p.write_csv(&out)?;
    println!("wrote {}", out.display());
    Ok(())
}
