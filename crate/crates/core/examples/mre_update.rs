//! Maximum relative entropy updating on a grid: data plus a moment constraint.
//!
//! cargo run --example mre_update

use igac::mre::{bayes_update, mre_update, GridPrior, MomentConstraint};

fn main() -> igac::Result<()> {
    // two hypotheses, uniform prior, likelihood of the observed datum (0.8, 0.4)
    let g = GridPrior::new(vec![1.0, 2.0], vec![1.0, 1.0], vec![0.5, 0.5], vec!["x".into()], vec![vec![0.8, 0.4]])?;
    let bayes = bayes_update(&g, 0)?;
    println!("Bayes posterior {:?}", bayes.posterior);
    let s = mre_update(&g, 0, Some(&MomentConstraint::mean(1.25)), 1e-14)?;
    println!("with <theta> = 1.25: posterior {:?}, beta {:.7} (ln 2/3 = {:.7})", s.posterior, s.beta, (2f64 / 3.0).ln());

    // coin bias on 101 nodes after one head, then a constraint on the mean bias
    let theta: Vec<f64> = (0..=100).map(|i| i as f64 / 100.0).collect();
    let heads = theta.clone();
    let g = GridPrior::normalized(theta, vec![0.01; 101], vec![1.0; 101], vec!["heads".into()], vec![heads])?;
    for target in [0.5, 0.6, 0.75] {
        let s = mre_update(&g, 0, Some(&MomentConstraint::mean(target)), 1e-12)?;
        println!("target {target}: beta {:+.6}, achieved {:.12}", s.beta, s.moment.unwrap_or(f64::NAN));
    }
    Ok(())
}
