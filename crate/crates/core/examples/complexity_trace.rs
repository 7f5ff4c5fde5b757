//! Volume, IGC and IGE along a Gaussian geodesic, with growth classification.
//!
//! cargo run --release --example complexity_trace

use igac::catalog::{build, CatalogId};
use igac::complexity::{igc, ks_analogue};
use igac::geodesic::integrate_ivp;
use igac::growth::{classify_growth, Quantity};
use igac::manifold::ParamPoint;

fn main() -> igac::Result<()> {
    let model = build(&CatalogId::UncorrelatedGaussian { l: 1 })?;
    // the manifold is scale invariant, so a wide start keeps the run away from sigma -> 0
    let s = 1e6;
    let path = integrate_ivp(&model, &ParamPoint::new(vec![0.0, s]), &[0.2 * s, 2.0 * s], 20.0, 1e-10)?;
    let taus: Vec<f64> = (0..151).map(|i| 5.0 + 0.1 * i as f64).collect();
    let trace = igc(&model, &path, &taus, 0.0)?;

    for i in (0..trace.len()).step_by(30) {
        println!(
            "tau={:5.1} V={:.6e} C={:.6e} S={:.6}",
            trace.tau()[i],
            trace.volume()[i],
            trace.igc()[i],
            trace.ige()[i]
        );
    }
    for q in [Quantity::Volume, Quantity::Igc, Quantity::Ige] {
        println!("{q}: {}", classify_growth(&trace, q, 1.0)?);
    }
    println!("KS analogue {:.6}", ks_analogue(&trace, 1.0)?);
    trace.write_csv("gaussian_trace.csv".as_ref())?;
    Ok(())
}
