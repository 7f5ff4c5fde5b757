use igac::mre::{bayes_update, mre_update, solve_beta, GridPrior, MomentConstraint};
use proptest::prelude::*;

fn grid(theta_step: f64, prior: Vec<f64>, lik: Vec<f64>) -> GridPrior {
    let n = prior.len();
    let theta = (0..n).map(|i| i as f64 * theta_step).collect();
    GridPrior::normalized(theta, vec![theta_step; n], prior, vec!["x".into()], vec![lik]).unwrap()
}

fn random_grid() -> impl Strategy<Value = GridPrior> {
    (3usize..40).prop_flat_map(|n| {
        (
            0.05f64..2.0,
            prop::collection::vec(0.01f64..1.0, n),
            prop::collection::vec(0.01f64..1.0, n),
        )
            .prop_map(|(h, p, l)| grid(h, p, l))
    })
}

fn bayes_mean(g: &GridPrior) -> f64 {
    let b = bayes_update(g, 0).unwrap();
    b.posterior
        .iter()
        .zip(g.weights())
        .zip(g.theta())
        .map(|((p, w), t)| p * w * t)
        .sum()
}

proptest! {
    #[test]
    fn zero_multiplier_is_bayes(g in random_grid()) {
        let c = MomentConstraint::mean(bayes_mean(&g));
        let m = mre_update(&g, 0, Some(&c), 1e-12).unwrap();
        let b = bayes_update(&g, 0).unwrap();
        prop_assert_eq!(m.beta, 0.0);
        for (x, y) in m.posterior.iter().zip(&b.posterior) {
            prop_assert!((x - y).abs() <= 1e-12);
        }
    }

    #[test]
    fn moment_map_is_increasing(g in random_grid(), a in -5.0f64..5.0, d in 0.01f64..3.0) {
        let lo = g.theta()[0];
        let hi = *g.theta().last().unwrap();
        let moment = |beta: f64| {
            // brute force: tilt the Bayes posterior directly
            let b = bayes_update(&g, 0).unwrap();
            let mass: Vec<f64> = b.posterior.iter().zip(g.weights()).zip(g.theta())
                .map(|((p, w), t)| p * w * (beta * (t - lo)).exp()).collect();
            let z: f64 = mass.iter().sum();
            mass.iter().zip(g.theta()).map(|(m, t)| m * t).sum::<f64>() / z
        };
        prop_assert!(moment(a + d) > moment(a));
        prop_assert!(moment(a) > lo && moment(a) < hi);
    }

    #[test]
    fn posterior_positive_normalized_and_idempotent(g in random_grid(), frac in 0.05f64..0.95) {
        let lo = g.theta()[0];
        let hi = *g.theta().last().unwrap();
        let c = MomentConstraint::mean(lo + frac * (hi - lo));
        let s = mre_update(&g, 0, Some(&c), 1e-12).unwrap();
        let mass: f64 = s.posterior.iter().zip(g.weights()).map(|(p, w)| p * w).sum();
        prop_assert!((mass - 1.0).abs() <= 1e-12);
        prop_assert!(s.posterior.iter().all(|p| *p > 0.0));
        prop_assert!((s.moment.unwrap() - c.target()).abs() <= 1e-12);

        let again = mre_update(&g, 0, Some(&c.with_target(s.moment.unwrap())), 1e-12).unwrap();
        for (x, y) in again.posterior.iter().zip(&s.posterior) {
            prop_assert!((x - y).abs() <= 1e-12 * x.abs().max(1.0));
        }
    }
}

#[test]
fn gaussian_grid_matches_brute_force_tilt() {
    let n = 101;
    let h = 0.1;
    let theta: Vec<f64> = (0..n).map(|i| -5.0 + i as f64 * h).collect();
    let prior: Vec<f64> = theta.iter().map(|t| (-0.5 * t * t).exp()).collect();
    let lik: Vec<f64> = theta.iter().map(|t| (-0.5 * (1.2 - t).powi(2) / 0.25).exp()).collect();
    let g = GridPrior::normalized(theta.clone(), vec![h; n], prior.clone(), vec!["x".into()], vec![lik.clone()])
        .unwrap();
    let c = MomentConstraint::mean(0.3);
    let s = mre_update(&g, 0, Some(&c), 1e-12).unwrap();
    assert!((s.moment.unwrap() - 0.3).abs() <= 1e-10);

    let beta = s.beta;
    let raw: Vec<f64> = (0..n)
        .map(|i| h * g.prior()[i] * lik[i] * (beta * theta[i]).exp())
        .collect();
    let z: f64 = raw.iter().sum();
    let oracle: Vec<f64> = raw.iter().map(|r| r / z / h).collect();
    let sup = oracle
        .iter()
        .zip(&s.posterior)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    assert!(sup <= 1e-12, "sup-norm {sup:e}");
    assert_eq!(solve_beta(&g, 0, &c, 1e-12).unwrap(), beta);
}

#[test]
fn csv_loader_reads_named_columns() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("grid.csv");
    std::fs::write(
        &path,
        "theta,weight,prior,lik_heads,lik_tails\n1,1,1,0.8,0.2\n2,1,1,0.4,0.6\n",
    )
    .unwrap();
    let g = GridPrior::from_csv(&path).unwrap();
    assert_eq!(g.observables(), ["heads", "tails"]);
    assert_eq!(g.prior(), [0.5, 0.5]);
    let s = bayes_update(&g, g.observable("heads").unwrap()).unwrap();
    assert!((s.posterior[0] - 2.0 / 3.0).abs() < 1e-15);

    std::fs::write(&path, "theta,weight,prior\n1,1,abc\n").unwrap();
    let err = GridPrior::from_csv(&path).unwrap_err().to_string();
    assert!(err.contains("line 2"), "{err}");
}
