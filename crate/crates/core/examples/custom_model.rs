//! A user-defined manifold: the Poincare half-plane with a closure metric.
//!
//! cargo run --example custom_model

use std::sync::Arc;

use igac::complexity::igc;
use igac::geodesic::integrate_ivp;
use igac::manifold::{DomainBox, MetricRule, ParamPoint, StatisticalModel};
use nalgebra::DMatrix;

fn main() -> igac::Result<()> {
    let domain = DomainBox::new(vec![(f64::NEG_INFINITY, f64::INFINITY), (0.0, f64::INFINITY)])?;
    let model = StatisticalModel::new("half_plane", domain).with_rule(MetricRule::Custom {
        metric: Arc::new(|th| DMatrix::from_diagonal_element(2, 2, 1.0 / (th[1] * th[1]))),
        derivative: None,
    });
    let path = integrate_ivp(&model, &ParamPoint::new(vec![0.0, 1.0]), &[1.0, 0.0], 3.0, 1e-10)?;
    // geodesics are half circles centred on the axis
    for tau in [1.0, 2.0, 3.0] {
        let th = path.theta_at(tau)?;
        println!("tau={tau}: theta={th:?} radius^2={:.9}", th[0] * th[0] + th[1] * th[1]);
    }
    // no factorized volume was declared, so volumes go through the box route
    let trace = igc(&model, &path, &[0.5, 1.0, 2.0], 0.0)?;
    println!("C = {:?}", trace.igc());
    Ok(())
}
