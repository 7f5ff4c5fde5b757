//! Fisher-Rao metric of a catalog model: closed form, quadrature, and the connection.
//!
//! cargo run --example fisher_metric

use igac::catalog::{build, CatalogId};
use igac::manifold::{christoffel, fisher_density, metric_analytic, metric_of_density, ParamPoint, QuadratureSpec};

fn main() -> igac::Result<()> {
    let id = CatalogId::BivariateCorr { rho: 0.5 };
    let model = build(&id)?;
    let theta = ParamPoint::new(vec![0.3, 1.7]);

    let exact = metric_analytic(&model, &theta)?;
    let numeric = metric_of_density(&model, &theta, &QuadratureSpec::default())?;
    println!("{id} at {:?}", theta.coords());
    println!("closed form {}", exact.components());
    println!("quadrature  {}", numeric.components());
    println!("relative error {:.3e}", numeric.relative_error(&exact));
    println!("volume element sqrt(det g) = {:.12}", fisher_density(&exact)?);

    let gamma = christoffel(&model, &theta, None)?;
    for k in 0..model.dim() {
        for a in 0..model.dim() {
            for b in a..model.dim() {
                let v = gamma.get(k, a, b);
                if v != 0.0 {
                    println!("Gamma^{k}_{a}{b} = {v:.12}");
                }
            }
        }
    }
    Ok(())
}
