//! Maximum relative entropy updating on a one-dimensional θ grid.
//!
//! The data constraint conditions on a single observed value `x′`; the
//! moment constraint tilts the result by `exp(β f(θ))`. With no moment
//! constraint the update is ordinary Bayes.

use std::path::Path;
use std::sync::Arc;

use crate::error::{Error, Result};

const NORMALIZATION_TOL: f64 = 1e-12;
const MAX_DOUBLINGS: usize = 64;
const MAX_ITERATIONS: usize = 400;

/// Prior over macrostates on a grid, with the likelihood of each declared observable.
#[derive(Debug, Clone, PartialEq)]
pub struct GridPrior {
    theta: Vec<f64>,
    weights: Vec<f64>,
    prior: Vec<f64>,
    observables: Vec<String>,
    // likelihood[j][i] = P_old(x_j | θ_i)
    likelihood: Vec<Vec<f64>>,
}

impl GridPrior {
    /// Validates shapes, ordering, signs and `Σ wᵢ P(θᵢ) = 1`.
    pub fn new(
        theta: Vec<f64>,
        weights: Vec<f64>,
        prior: Vec<f64>,
        observables: Vec<String>,
        likelihood: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let n = theta.len();
        if n == 0 {
            return Err(Error::InvalidGrid("grid has no nodes".into()));
        }
        if weights.len() != n || prior.len() != n {
            return Err(Error::InvalidGrid(format!(
                "grid has {n} nodes but {} weights and {} prior values",
                weights.len(),
                prior.len()
            )));
        }
        if theta.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidGrid("theta nodes must be strictly increasing".into()));
        }
        if let Some(i) = weights.iter().position(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::InvalidGrid(format!("weight at node {i} must be positive")));
        }
        if let Some(i) = prior.iter().position(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(Error::InvalidGrid(format!("prior at node {i} must be non-negative")));
        }
        if observables.len() != likelihood.len() {
            return Err(Error::InvalidGrid(format!(
                "{} observable names for {} likelihood columns",
                observables.len(),
                likelihood.len()
            )));
        }
        for (name, column) in observables.iter().zip(&likelihood) {
            if column.len() != n {
                return Err(Error::InvalidGrid(format!(
                    "likelihood column {name} has {} entries, expected {n}",
                    column.len()
                )));
            }
            if let Some(i) = column.iter().position(|l| !(l.is_finite() && *l >= 0.0)) {
                return Err(Error::InvalidGrid(format!(
                    "likelihood {name} at node {i} must be non-negative"
                )));
            }
        }
        let mass: f64 = weights.iter().zip(&prior).map(|(w, p)| w * p).sum();
        if (mass - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::InvalidGrid(format!(
                "prior mass is {mass}, expected 1 within {NORMALIZATION_TOL:e}"
            )));
        }
        Ok(Self {
            theta,
            weights,
            prior,
            observables,
            likelihood,
        })
    }

    /// As [`GridPrior::new`] but rescales the prior to unit mass first.
    pub fn normalized(
        theta: Vec<f64>,
        weights: Vec<f64>,
        mut prior: Vec<f64>,
        observables: Vec<String>,
        likelihood: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let mass: f64 = weights.iter().zip(&prior).map(|(w, p)| w * p).sum();
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(Error::InvalidGrid(format!("prior mass {mass} cannot be normalized")));
        }
        prior.iter_mut().for_each(|p| *p /= mass);
        Self::new(theta, weights, prior, observables, likelihood)
    }

    /// Reads `theta, weight, prior, lik_<name>...` columns. The prior is rescaled to unit mass.
    pub fn from_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let csv_err = |source| Error::Csv {
            path: path.to_path_buf(),
            source,
        };
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_path(path)
            .map_err(csv_err)?;
        let headers = reader.headers().map_err(csv_err)?.clone();
        let find = |name: &str| {
            headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| Error::InvalidGrid(format!("{}: missing column {name}", path.display())))
        };
        let (ti, wi, pi) = (find("theta")?, find("weight")?, find("prior")?);
        let lik_cols: Vec<(usize, String)> = headers
            .iter()
            .enumerate()
            .filter_map(|(i, h)| h.strip_prefix("lik_").map(|n| (i, n.to_string())))
            .collect();
        let (mut theta, mut weights, mut prior) = (vec![], vec![], vec![]);
        let mut likelihood = vec![Vec::new(); lik_cols.len()];
        for (row, record) in reader.records().enumerate() {
            let record = record.map_err(csv_err)?;
            let num = |col: usize| -> Result<f64> {
                let field = record.get(col).unwrap_or("");
                field.parse().map_err(|_| {
                    Error::InvalidGrid(format!(
                        "{}: line {}, column {}: cannot parse {field:?} as a number",
                        path.display(),
                        row + 2,
                        &headers[col]
                    ))
                })
            };
            theta.push(num(ti)?);
            weights.push(num(wi)?);
            prior.push(num(pi)?);
            for (j, (col, _)) in lik_cols.iter().enumerate() {
                likelihood[j].push(num(*col)?);
            }
        }
        let names = lik_cols.into_iter().map(|(_, n)| n).collect();
        Self::normalized(theta, weights, prior, names, likelihood)
    }

    pub fn len(&self) -> usize {
        self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta.is_empty()
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn prior(&self) -> &[f64] {
        &self.prior
    }

    pub fn observables(&self) -> &[String] {
        &self.observables
    }

    /// Index of an observable by name.
    pub fn observable(&self, name: &str) -> Result<usize> {
        self.observables
            .iter()
            .position(|o| o == name)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown observable {name:?}")))
    }

    pub fn likelihood(&self, observable: usize) -> &[f64] {
        &self.likelihood[observable]
    }

    /// `ln(wᵢ P_old(θᵢ) P_old(x′|θᵢ))`; `-∞` off the support.
    fn log_joint(&self, observable: usize) -> Result<Vec<f64>> {
        let column = self.likelihood.get(observable).ok_or_else(|| {
            Error::InvalidArgument(format!(
                "observable index {observable} out of range for {} columns",
                self.likelihood.len()
            ))
        })?;
        Ok((0..self.len())
            .map(|i| (self.weights[i] * self.prior[i] * column[i]).ln())
            .collect())
    }
}

/// Expected-value constraint `⟨f⟩ = F`.
#[derive(Clone)]
pub struct MomentConstraint {
    f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    target: f64,
}

impl std::fmt::Debug for MomentConstraint {
    fn fmt(&self, fm: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        fm.debug_struct("MomentConstraint")
            .field("target", &self.target)
            .finish_non_exhaustive()
    }
}

impl MomentConstraint {
    pub fn new(f: impl Fn(f64) -> f64 + Send + Sync + 'static, target: f64) -> Self {
        Self {
            f: Arc::new(f),
            target,
        }
    }

    /// `⟨θ⟩ = target`.
    pub fn mean(target: f64) -> Self {
        Self::new(|t| t, target)
    }

    pub fn target(&self) -> f64 {
        self.target
    }

    pub fn eval(&self, theta: f64) -> f64 {
        (self.f)(theta)
    }

    pub fn with_target(&self, target: f64) -> Self {
        Self {
            f: self.f.clone(),
            target,
        }
    }
}

/// Updated distribution on the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct MreSolution {
    /// `P_new(θᵢ)`, normalized so that `Σ wᵢ P_new(θᵢ) = 1`.
    pub posterior: Vec<f64>,
    pub beta: f64,
    /// `⟨f⟩` under the posterior, when a constraint was given.
    pub moment: Option<f64>,
    /// `ln Δ(x′, β)`, the log normalizer.
    pub log_normalizer: f64,
}

impl MreSolution {
    pub fn normalizer(&self) -> f64 {
        self.log_normalizer.exp()
    }
}

struct Tilted {
    // unnormalized log masses ln(wᵢ Pᵢ Lᵢ) + β fᵢ
    log_mass: Vec<f64>,
    log_z: f64,
}

fn tilt(log_joint: &[f64], f: Option<&[f64]>, beta: f64) -> Tilted {
    let log_mass: Vec<f64> = match f {
        Some(f) if beta != 0.0 => log_joint.iter().zip(f).map(|(l, fi)| l + beta * fi).collect(),
        _ => log_joint.to_vec(),
    };
    let peak = log_mass.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = log_mass.iter().map(|l| (l - peak).exp()).sum();
    Tilted {
        log_z: peak + sum.ln(),
        log_mass,
    }
}

fn moment_at(log_joint: &[f64], f: &[f64], beta: f64) -> f64 {
    let t = tilt(log_joint, Some(f), beta);
    t.log_mass
        .iter()
        .zip(f)
        .filter(|(l, _)| l.is_finite())
        .map(|(l, fi)| fi * (l - t.log_z).exp())
        .sum()
}

fn solution(prior: &GridPrior, log_joint: &[f64], f: Option<&[f64]>, beta: f64) -> MreSolution {
    let t = tilt(log_joint, f, beta);
    // P_new(θᵢ) = mass_i / (wᵢ Z)
    let posterior: Vec<f64> = t
        .log_mass
        .iter()
        .zip(&prior.weights)
        .map(|(l, w)| (l - t.log_z).exp() / w)
        .collect();
    let moment = f.map(|f| {
        posterior
            .iter()
            .zip(&prior.weights)
            .zip(f)
            .map(|((p, w), fi)| p * w * fi)
            .sum()
    });
    MreSolution {
        posterior,
        beta,
        moment,
        log_normalizer: t.log_z,
    }
}

fn evidence_check(log_joint: &[f64]) -> Result<()> {
    if log_joint.iter().all(|l| *l == f64::NEG_INFINITY) {
        Err(Error::ZeroEvidence)
    } else {
        Ok(())
    }
}

/// Bayes' rule: `P_new(θ) = P_old(θ) P_old(x′|θ) / P_old(x′)`.
pub fn bayes_update(prior: &GridPrior, observable: usize) -> Result<MreSolution> {
    let log_joint = prior.log_joint(observable)?;
    evidence_check(&log_joint)?;
    Ok(solution(prior, &log_joint, None, 0.0))
}

fn constraint_values(prior: &GridPrior, log_joint: &[f64], c: &MomentConstraint) -> Result<Vec<f64>> {
    let f: Vec<f64> = prior.theta.iter().map(|&t| c.eval(t)).collect();
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for (fi, l) in f.iter().zip(log_joint) {
        if l.is_finite() {
            lo = lo.min(*fi);
            hi = hi.max(*fi);
        }
    }
    let target = c.target();
    if !(target > lo && target < hi) {
        return Err(Error::InfeasibleMoment {
            target,
            min: lo,
            max: hi,
        });
    }
    Ok(f)
}

/// Multiplier β such that the tilted posterior mean of `f` is within `tol` of the target.
pub fn solve_beta(prior: &GridPrior, observable: usize, c: &MomentConstraint, tol: f64) -> Result<f64> {
    let log_joint = prior.log_joint(observable)?;
    evidence_check(&log_joint)?;
    let f = constraint_values(prior, &log_joint, c)?;
    find_beta(&log_joint, &f, c.target(), tol)
}

fn find_beta(log_joint: &[f64], f: &[f64], target: f64, tol: f64) -> Result<f64> {
    let residual = |b: f64| moment_at(log_joint, f, b) - target;
    let r0 = residual(0.0);
    if r0.abs() <= tol {
        return Ok(0.0);
    }
    // Refine to the rounding floor of the moment, not just to `tol`, so that
    // repeated solves land on the same β.
    let fscale = f
        .iter()
        .zip(log_joint)
        .filter(|(_, l)| l.is_finite())
        .map(|(fi, _)| fi.abs())
        .fold(0.0, f64::max);
    let done = tol.min(8.0 * f64::EPSILON * fscale.max(f64::MIN_POSITIVE));

    // bracket [a, b] with r(a) < 0 < r(b)
    let (mut a, mut b) = (-1.0f64, 1.0f64);
    let (mut ra, mut rb) = (residual(a), residual(b));
    let mut doublings = 0;
    while ra > 0.0 || rb < 0.0 {
        if doublings == MAX_DOUBLINGS {
            return Err(Error::BetaNotBracketed { lower: a, upper: b });
        }
        doublings += 1;
        if ra > 0.0 {
            b = a;
            rb = ra;
            a *= 2.0;
            ra = residual(a);
        } else {
            a = b;
            ra = rb;
            b *= 2.0;
            rb = residual(b);
        }
    }
    if ra.abs() <= done {
        return Ok(a);
    }
    if rb.abs() <= done {
        return Ok(b);
    }

    // Illinois-modified regula falsi, falling back to bisection when the
    // secant point is not well inside the bracket.
    let mut side = 0i8;
    for _ in 0..MAX_ITERATIONS {
        let secant = (a * rb - b * ra) / (rb - ra);
        let width = b - a;
        let x = if secant.is_finite() && secant > a + 0.01 * width && secant < b - 0.01 * width {
            secant
        } else {
            0.5 * (a + b)
        };
        let rx = residual(x);
        if rx.abs() <= done {
            return Ok(x);
        }
        if rx < 0.0 {
            a = x;
            ra = rx;
            if side == -1 {
                rb *= 0.5;
            }
            side = -1;
        } else {
            b = x;
            rb = rx;
            if side == 1 {
                ra *= 0.5;
            }
            side = 1;
        }
        if b - a <= 2.0 * f64::EPSILON * a.abs().max(b.abs()) {
            // bracket collapsed to adjacent floats
            let (x, r) = if ra.abs() <= rb.abs() { (a, residual(a)) } else { (b, residual(b)) };
            return if r.abs() <= tol { Ok(x) } else { Err(Error::MaxIterations(MAX_ITERATIONS)) };
        }
    }
    Err(Error::MaxIterations(MAX_ITERATIONS))
}

/// Maximum relative entropy update under the data `x′` and an optional moment constraint.
pub fn mre_update(
    prior: &GridPrior,
    observable: usize,
    constraint: Option<&MomentConstraint>,
    tol: f64,
) -> Result<MreSolution> {
    let Some(c) = constraint else {
        return bayes_update(prior, observable);
    };
    let log_joint = prior.log_joint(observable)?;
    evidence_check(&log_joint)?;
    let f = constraint_values(prior, &log_joint, c)?;
    let beta = find_beta(&log_joint, &f, c.target(), tol)?;
    Ok(solution(prior, &log_joint, Some(&f), beta))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_point() -> GridPrior {
        GridPrior::new(
            vec![1.0, 2.0],
            vec![1.0, 1.0],
            vec![0.5, 0.5],
            vec!["x".into()],
            vec![vec![0.8, 0.4]],
        )
        .unwrap()
    }

    #[test]
    fn hand_bayes() {
        let s = bayes_update(&two_point(), 0).unwrap();
        assert!((s.posterior[0] - 2.0 / 3.0).abs() < 1e-15);
        assert!((s.posterior[1] - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(s.beta, 0.0);
        assert!((s.normalizer() - 0.6).abs() < 1e-15);
    }

    #[test]
    fn uninformative_data_and_degenerate_prior() {
        let flat = GridPrior::new(
            vec![0.0, 1.0, 2.0],
            vec![1.0; 3],
            vec![0.2, 0.3, 0.5],
            vec!["x".into()],
            vec![vec![1.0; 3]],
        )
        .unwrap();
        assert_eq!(bayes_update(&flat, 0).unwrap().posterior, vec![0.2, 0.3, 0.5]);

        let point = GridPrior::new(
            vec![1.0, 2.0],
            vec![1.0; 2],
            vec![1.0, 0.0],
            vec!["x".into()],
            vec![vec![0.3, 0.9]],
        )
        .unwrap();
        assert_eq!(bayes_update(&point, 0).unwrap().posterior, vec![1.0, 0.0]);
    }

    #[test]
    fn impossible_observation() {
        let g = GridPrior::new(
            vec![1.0, 2.0],
            vec![1.0; 2],
            vec![1.0, 0.0],
            vec!["x".into()],
            vec![vec![0.0, 0.7]],
        )
        .unwrap();
        assert!(matches!(bayes_update(&g, 0), Err(Error::ZeroEvidence)));
    }

    #[test]
    fn two_point_root() {
        let g = two_point();
        let c = MomentConstraint::mean(1.25);
        let s = mre_update(&g, 0, Some(&c), 1e-12).unwrap();
        assert!((s.beta - (2.0f64 / 3.0).ln()).abs() < 1e-10, "{}", s.beta);
        assert!((s.posterior[0] - 0.75).abs() < 1e-12);
        assert!((s.posterior[1] - 0.25).abs() < 1e-12);
        assert!((s.moment.unwrap() - 1.25).abs() <= 1e-12);
    }

    #[test]
    fn infeasible_targets() {
        let g = two_point();
        for target in [1.0, 2.0, 0.5, 3.0] {
            assert!(matches!(
                solve_beta(&g, 0, &MomentConstraint::mean(target), 1e-12),
                Err(Error::InfeasibleMoment { .. })
            ));
        }
    }

    #[test]
    fn target_near_supremum() {
        let g = two_point();
        let c = MomentConstraint::mean(2.0 - 1e-9);
        let beta = solve_beta(&g, 0, &c, 1e-12).unwrap();
        assert!(beta > 15.0);
        let s = mre_update(&g, 0, Some(&c), 1e-12).unwrap();
        assert!((s.moment.unwrap() - c.target()).abs() <= 1e-12);
    }

    #[test]
    fn strict_grid_validation() {
        let bad_mass = GridPrior::new(vec![0.0, 1.0], vec![1.0; 2], vec![0.5, 0.6], vec![], vec![]);
        assert!(matches!(bad_mass, Err(Error::InvalidGrid(_))));
        let negative = GridPrior::new(
            vec![0.0, 1.0],
            vec![1.0; 2],
            vec![0.5, 0.5],
            vec!["x".into()],
            vec![vec![0.1, -0.1]],
        );
        assert!(negative.is_err());
        let unordered = GridPrior::new(vec![1.0, 0.0], vec![1.0; 2], vec![0.5, 0.5], vec![], vec![]);
        assert!(unordered.is_err());
    }
}
