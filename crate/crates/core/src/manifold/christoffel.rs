//! Levi-Civita connection coefficients and reparametrization checks.

use nalgebra::DMatrix;

use super::domain::ParamPoint;
use super::metric::pullback;
use super::model::StatisticalModel;
use crate::error::{Error, Result};

/// `Γ^κ_{μν}` stored as `[κ][μ][ν]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Christoffel {
    n: usize,
    data: Vec<f64>,
}

impl Christoffel {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n * n],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, kappa: usize, mu: usize, nu: usize) -> f64 {
        self.data[(kappa * self.n + mu) * self.n + nu]
    }

    fn set(&mut self, kappa: usize, mu: usize, nu: usize, v: f64) {
        let n = self.n;
        self.data[(kappa * n + mu) * n + nu] = v;
    }

    /// `-Γ^κ_{μν} v^μ v^ν` for every κ.
    pub fn contract(&self, v: &[f64], out: &mut [f64]) {
        let n = self.n;
        for (kappa, o) in out.iter_mut().enumerate().take(n) {
            let mut acc = 0.0;
            for mu in 0..n {
                for nu in 0..n {
                    acc += self.get(kappa, mu, nu) * v[mu] * v[nu];
                }
            }
            *o = -acc;
        }
    }

    pub fn max_abs_diff(&self, other: &Christoffel) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Assembles Γ from `g⁻¹` and `∂_λ g_{μν}`.
    pub fn from_derivatives(g: &DMatrix<f64>, dg: &[DMatrix<f64>]) -> Result<Self> {
        let n = g.nrows();
        let inv = g.clone().try_inverse().ok_or(Error::SingularMetric)?;
        let mut gamma = Self::zeros(n);
        for kappa in 0..n {
            for mu in 0..n {
                for nu in mu..n {
                    let mut acc = 0.0;
                    for lambda in 0..n {
                        let lower = dg[mu][(nu, lambda)] + dg[nu][(mu, lambda)] - dg[lambda][(mu, nu)];
                        acc += inv[(kappa, lambda)] * lower;
                    }
                    let v = 0.5 * acc;
                    gamma.set(kappa, mu, nu, v);
                    gamma.set(kappa, nu, mu, v);
                }
            }
        }
        Ok(gamma)
    }
}

/// Default central-difference step for coordinate k.
pub fn default_step(theta: &[f64], k: usize) -> f64 {
    f64::EPSILON.cbrt() * theta[k].abs().max(1.0)
}

/// Christoffel symbols at θ. Analytic derivatives are used when the model's
/// rule supplies them; otherwise `∂g` comes from central differences with
/// relative step `step` (scaled by `max(1, |θ^k|)`).
pub fn christoffel(model: &StatisticalModel, theta: &ParamPoint, step: Option<f64>) -> Result<Christoffel> {
    model.domain().check(theta.coords())?;
    let th = theta.coords();
    let g = model.metric_matrix(th)?;
    if step.is_none() {
        if let Some(dg) = model.rule().and_then(|r| r.derivative(th)) {
            return Christoffel::from_derivatives(&g, &dg);
        }
    }
    let dg = metric_differences(model, th, step)?;
    Christoffel::from_derivatives(&g, &dg)
}

/// Christoffel symbols by central differences only, ignoring analytic derivatives.
pub fn christoffel_numeric(model: &StatisticalModel, theta: &ParamPoint, step: f64) -> Result<Christoffel> {
    christoffel(model, theta, Some(step))
}

fn metric_differences(model: &StatisticalModel, th: &[f64], step: Option<f64>) -> Result<Vec<DMatrix<f64>>> {
    let n = th.len();
    let mut out = Vec::with_capacity(n);
    let mut shifted = th.to_vec();
    for k in 0..n {
        let h = match step {
            Some(s) if s > 0.0 => s * th[k].abs().max(1.0),
            Some(s) => {
                return Err(Error::InvalidArgument(format!(
                    "finite-difference step must be positive, got {s}"
                )))
            }
            None => default_step(th, k),
        };
        shifted[k] = th[k] + h;
        model.domain().check(&shifted)?;
        let plus = model.metric_matrix(&shifted)?;
        shifted[k] = th[k] - h;
        model.domain().check(&shifted)?;
        let minus = model.metric_matrix(&shifted)?;
        shifted[k] = th[k];
        out.push((plus - minus) / (2.0 * h));
    }
    Ok(out)
}

/// Coordinate change θ = φ(θ′) with Jacobian `∂θ/∂θ′`.
pub trait Diffeomorphism {
    fn forward(&self, primed: &[f64]) -> Vec<f64>;
    fn jacobian(&self, primed: &[f64]) -> DMatrix<f64>;
}

/// Closure-backed [`Diffeomorphism`].
pub struct CoordinateMap<F, J> {
    pub forward: F,
    pub jacobian: J,
}

impl<F, J> Diffeomorphism for CoordinateMap<F, J>
where
    F: Fn(&[f64]) -> Vec<f64>,
    J: Fn(&[f64]) -> DMatrix<f64>,
{
    fn forward(&self, primed: &[f64]) -> Vec<f64> {
        (self.forward)(primed)
    }

    fn jacobian(&self, primed: &[f64]) -> DMatrix<f64> {
        (self.jacobian)(primed)
    }
}

/// Max-norm of `g′(θ′) − Jᵀ g(θ) J`, where `g′` is `primed_metric` and `θ = φ(θ′)`.
pub fn check_reparam_covariance(
    model: &StatisticalModel,
    diffeo: &impl Diffeomorphism,
    primed_metric: impl Fn(&[f64]) -> DMatrix<f64>,
    theta_primed: &ParamPoint,
) -> Result<f64> {
    let tp = theta_primed.coords();
    let jac = diffeo.jacobian(tp);
    let det = jac.determinant();
    if det == 0.0 || !det.is_finite() {
        return Err(Error::NonInvertibleJacobian(det));
    }
    let theta = ParamPoint::new(diffeo.forward(tp));
    let g = model.metric(&theta)?;
    let transported = pullback(g.components(), &jac);
    Ok((primed_metric(tp) - transported).amax())
}
