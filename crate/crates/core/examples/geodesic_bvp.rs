//! Two-point geodesic problem solved by shooting on the spin-chain manifold.
//!
//! cargo run --example geodesic_bvp

use std::f64::consts::E;

use igac::catalog::{build, CatalogId};
use igac::geodesic::{solve_bvp, BoundaryProblem};
use igac::manifold::ParamPoint;

fn main() -> igac::Result<()> {
    let model = build(&CatalogId::SpinIntegrable)?;
    let bp = BoundaryProblem::new(ParamPoint::new(vec![1.0, 1.0]), ParamPoint::new(vec![E, E * E]), 1.0)?;
    let path = solve_bvp(&model, &bp, 1e-10)?;
    println!("initial velocity {:?} (exact: [1, 2])", path.velocity(0));
    println!("end point {:?}", path.end_theta());

    let gauss = build(&CatalogId::UncorrelatedGaussian { l: 1 })?;
    let bp = BoundaryProblem::new(ParamPoint::new(vec![-1.0, 1.0]), ParamPoint::new(vec![1.0, 1.0]), 1.0)?;
    let path = solve_bvp(&gauss, &bp, 1e-10)?;
    let mid = path.theta_at(0.5)?;
    println!("Gaussian (-1,1) -> (1,1): width at the midpoint {:.6} (the geodesic bulges upward)", mid[1]);
    Ok(())
}
