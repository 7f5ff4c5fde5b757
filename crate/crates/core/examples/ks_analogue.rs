//! Entropy growth rate of a Gaussian geodesic against the rate of its width.
//!
//! cargo run --release --example ks_analogue

use igac::catalog::{build, CatalogId};
use igac::complexity::{igc, ks_analogue};
use igac::geodesic::integrate_ivp;
use igac::manifold::ParamPoint;

fn main() -> igac::Result<()> {
    let model = build(&CatalogId::UncorrelatedGaussian { l: 1 })?;
    // squared speed 2 gives sigma ~ e^{-tau}; the wide start leaves room for 170 e-folds
    let s = 1e70;
    let path = integrate_ivp(&model, &ParamPoint::new(vec![0.0, s]), &[0.1995 * s, -0.99 * s], 170.0, 1e-10)?;
    let taus: Vec<f64> = (0..151).map(|i| 1.0 + 169.0 * i as f64 / 150.0).collect();
    let trace = igc(&model, &path, &taus, 0.0)?;
    let ks = ks_analogue(&trace, 0.5)?;
    let (a, b) = (85.0, 170.0);
    let lambda = (path.theta_at(a)?[1].ln() - path.theta_at(b)?[1].ln()) / (b - a);
    println!("KS analogue {ks:.5}, width decay rate {lambda:.5}");
    Ok(())
}
