//! Embedded Gaussian pairs: macroscopic correlation from a constraint, and the IGE asymptotics.
//!
//! cargo run --example embedded_gaussian

use igac::catalog::formulas::{embedded_ige_closed, embedded_terms};
use igac::catalog::{build, embedded_gaussian_with, embedded_rho, CatalogId};
use igac::manifold::ParamPoint;

fn main() -> igac::Result<()> {
    let (a, b) = (0.5, 1.0);
    let rho = embedded_rho(a, b);
    println!("linear constraint mu2 = {a} mu1 + {b} sigma1 gives rho = {rho:.6}");

    let linear = build(&CatalogId::EmbeddedGaussian { l: 1, a, b })?;
    let curved = embedded_gaussian_with(1, |mu, sigma| mu * mu + sigma)?;
    let theta = ParamPoint::new(vec![1.5, 1.0]);
    println!("linear constraint metric {}", linear.metric(&theta)?.components());
    println!("mu^2 + sigma constraint metric {}", curved.metric(&theta)?.components());

    let (lambda, xi) = (1.0, 1.0);
    let t = embedded_terms(lambda, xi, rho)?;
    println!("Delta={:.6} Lambda1={:.6} Lambda2={:.6}", t.delta, t.lambda1, t.lambda2);
    for tau in [1.0, 10.0, 100.0] {
        println!("tau={tau:>5}: S = {:.6}", embedded_ige_closed(tau, 2, lambda, xi, rho)?);
    }
    Ok(())
}
