//! Statistical manifolds: domain, metric rule, density family, volume factorization.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use super::density::{metric_numeric, DensityFamily, QuadratureSpec};
use super::domain::{DomainBox, ParamPoint};
use super::metric::MetricTensor;
use crate::error::{Error, Result};

pub type MetricFn = Arc<dyn Fn(&[f64]) -> DMatrix<f64> + Send + Sync>;
pub type MetricDerivFn = Arc<dyn Fn(&[f64]) -> Vec<DMatrix<f64>> + Send + Sync>;
pub type FactorFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type AccelFn = Arc<dyn Fn(&[f64], &[f64], &mut [f64]) + Send + Sync>;

/// Closed-form metric components, optionally with their coordinate derivatives.
#[derive(Clone)]
pub enum MetricRule {
    /// `g_{μν}(θ) = A_{μν} / (θ^{s(μ)} θ^{s(ν)})` where `s` maps every index to
    /// the coordinate that sets its scale (a σ, or the coordinate itself).
    /// Every Gaussian and exponential-family model in the catalog has this shape.
    Scaled {
        coupling: DMatrix<f64>,
        scale_of: Vec<usize>,
    },
    /// Conformally flat `g = (1 + ½ Σ ω_k² θ_k²) δ`.
    Conformal { omega_sq: Vec<f64> },
    /// Any closure; derivatives fall back to finite differences when absent.
    Custom {
        metric: MetricFn,
        derivative: Option<MetricDerivFn>,
    },
}

impl MetricRule {
    pub fn evaluate(&self, theta: &[f64]) -> DMatrix<f64> {
        match self {
            MetricRule::Scaled { coupling, scale_of } => {
                let n = scale_of.len();
                DMatrix::from_fn(n, n, |mu, nu| {
                    coupling[(mu, nu)] / (theta[scale_of[mu]] * theta[scale_of[nu]])
                })
            }
            MetricRule::Conformal { omega_sq } => {
                let n = omega_sq.len();
                let factor = 1.0 + conformal_excess(omega_sq, theta);
                DMatrix::identity(n, n) * factor
            }
            MetricRule::Custom { metric, .. } => metric(theta),
        }
    }

    /// `∂_λ g_{μν}` for every λ, when known in closed form.
    pub fn derivative(&self, theta: &[f64]) -> Option<Vec<DMatrix<f64>>> {
        match self {
            MetricRule::Scaled { scale_of, .. } => {
                let g = self.evaluate(theta);
                let n = scale_of.len();
                Some(
                    (0..n)
                        .map(|lambda| {
                            DMatrix::from_fn(n, n, |mu, nu| {
                                let mut d = 0.0;
                                if scale_of[mu] == lambda {
                                    d -= 1.0 / theta[lambda];
                                }
                                if scale_of[nu] == lambda {
                                    d -= 1.0 / theta[lambda];
                                }
                                g[(mu, nu)] * d
                            })
                        })
                        .collect(),
                )
            }
            MetricRule::Conformal { omega_sq } => {
                let n = omega_sq.len();
                Some(
                    (0..n)
                        .map(|lambda| DMatrix::identity(n, n) * (omega_sq[lambda] * theta[lambda]))
                        .collect(),
                )
            }
            MetricRule::Custom { derivative, .. } => derivative.as_ref().map(|d| d(theta)),
        }
    }
}

/// `-Φ = ½ Σ ω_k² θ_k²`.
pub(crate) fn conformal_excess(omega_sq: &[f64], theta: &[f64]) -> f64 {
    0.5 * omega_sq
        .iter()
        .zip(theta)
        .map(|(w, x)| w * x * x)
        .sum::<f64>()
}

/// One coordinate's share `√g_κ(θ^κ)` of the Fisher density.
#[derive(Clone)]
pub enum Factor {
    /// `g_κ ≡ 1`: the determinant does not depend on θ^κ.
    Unit,
    /// `√g_κ = |θ^κ|^{-c}`.
    Power(i32),
    General(FactorFn),
}

impl Factor {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Factor::Unit => 1.0,
            Factor::Power(c) => x.abs().powi(-c),
            Factor::General(f) => f(x),
        }
    }

    /// `∫_a^b √g_κ(x) dx` in closed form, when available.
    pub fn antiderivative_diff(&self, a: f64, b: f64) -> Option<f64> {
        match *self {
            Factor::Unit => Some(b - a),
            Factor::Power(0) => Some(b - a),
            Factor::Power(1) => Some((b / a).ln()),
            Factor::Power(c) => {
                let e = 1 - c;
                Some((b.powi(e) - a.powi(e)) / e as f64)
            }
            Factor::General(_) => None,
        }
    }
}

/// Factorization `√det g = constant · Π_κ √g_κ(θ^κ)`.
#[derive(Clone)]
pub struct VolumeFactorization {
    pub constant: f64,
    pub factors: Vec<Factor>,
}

impl VolumeFactorization {
    pub fn factor(&self, k: usize, x: f64) -> f64 {
        self.factors[k].eval(x)
    }

    /// Product form for the scaled rule: `√det A · Π_κ θ_κ^{-c_κ}`, with `c_κ`
    /// the number of indices whose scale coordinate is κ.
    pub fn for_scaled(coupling: &DMatrix<f64>, scale_of: &[usize]) -> Self {
        let n = scale_of.len();
        let factors = (0..n)
            .map(|k| match scale_of.iter().filter(|&&s| s == k).count() {
                0 => Factor::Unit,
                c => Factor::Power(c as i32),
            })
            .collect();
        Self {
            constant: coupling.determinant().sqrt(),
            factors,
        }
    }
}

/// Equations of motion used by the geodesic engine.
#[derive(Clone)]
pub enum Flow {
    /// `θ̈^κ = -Γ^κ_{μν} θ̇^μ θ̇^ν`.
    LeviCivita,
    /// A reparametrized Newtonian form `θ̈ = a(θ, θ̇)`; the affine speed is not conserved.
    Newtonian(AccelFn),
}

/// A named statistical manifold.
#[derive(Clone)]
pub struct StatisticalModel {
    name: String,
    domain: DomainBox,
    rule: Option<MetricRule>,
    density: Option<DensityFamily>,
    volume: Option<VolumeFactorization>,
    flow: Flow,
}

impl fmt::Debug for StatisticalModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("StatisticalModel")
            .field("name", &self.name)
            .field("domain", &self.domain)
            .field("analytic", &self.rule.is_some())
            .field("density", &self.density.is_some())
            .field("factorized", &self.volume.is_some())
            .finish()
    }
}

impl StatisticalModel {
    pub fn new(name: impl Into<String>, domain: DomainBox) -> Self {
        Self {
            name: name.into(),
            domain,
            rule: None,
            density: None,
            volume: None,
            flow: Flow::LeviCivita,
        }
    }

    pub fn with_rule(mut self, rule: MetricRule) -> Self {
        self.rule = Some(rule);
        self
    }

    pub fn with_density(mut self, density: DensityFamily) -> Self {
        self.density = Some(density);
        self
    }

    pub fn with_volume(mut self, volume: VolumeFactorization) -> Self {
        self.volume = Some(volume);
        self
    }

    pub fn with_flow(mut self, flow: Flow) -> Self {
        self.flow = flow;
        self
    }

    /// Drops the determinant factorization so volumes use box quadrature.
    pub fn without_volume(mut self) -> Self {
        self.volume = None;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn domain(&self) -> &DomainBox {
        &self.domain
    }

    pub fn rule(&self) -> Option<&MetricRule> {
        self.rule.as_ref()
    }

    pub fn density(&self) -> Option<&DensityFamily> {
        self.density.as_ref()
    }

    pub fn volume(&self) -> Option<&VolumeFactorization> {
        self.volume.as_ref()
    }

    pub fn flow(&self) -> &Flow {
        &self.flow
    }

    /// Metric components without domain checks, preferring the analytic rule.
    pub(crate) fn metric_matrix(&self, theta: &[f64]) -> Result<DMatrix<f64>> {
        match &self.rule {
            Some(rule) => Ok(rule.evaluate(theta)),
            None => {
                let family = self
                    .density
                    .as_ref()
                    .ok_or_else(|| Error::NoDensityFamily(self.name.clone()))?;
                let g = metric_numeric(
                    family,
                    &self.domain,
                    &ParamPoint::from(theta),
                    &QuadratureSpec::default(),
                )?;
                Ok(g.components().clone())
            }
        }
    }

    /// Metric at θ from whichever source the model carries.
    pub fn metric(&self, theta: &ParamPoint) -> Result<MetricTensor> {
        self.domain.check(theta.coords())?;
        MetricTensor::new(theta.clone(), self.metric_matrix(theta.coords())?)
    }

    /// `√det g` at θ, via the factorization when present.
    pub fn volume_density(&self, theta: &[f64]) -> Result<f64> {
        let det = self.metric_matrix(theta)?.determinant();
        if det > 0.0 && det.is_finite() {
            Ok(det.sqrt())
        } else {
            Err(Error::NonPositiveDeterminant(det))
        }
    }
}

/// The model's closed-form metric at θ.
pub fn metric_analytic(model: &StatisticalModel, theta: &ParamPoint) -> Result<MetricTensor> {
    let rule = model
        .rule()
        .ok_or_else(|| Error::NoAnalyticRule(model.name().to_string()))?;
    model.domain().check(theta.coords())?;
    MetricTensor::new(theta.clone(), rule.evaluate(theta.coords()))
}

/// Fisher-Rao metric of the model's density family at θ.
pub fn metric_of_density(
    model: &StatisticalModel,
    theta: &ParamPoint,
    quad: &QuadratureSpec,
) -> Result<MetricTensor> {
    let family = model
        .density()
        .ok_or_else(|| Error::NoDensityFamily(model.name().to_string()))?;
    metric_numeric(family, model.domain(), theta, quad)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian_rule() -> MetricRule {
        MetricRule::Scaled {
            coupling: DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 2.0])),
            scale_of: vec![1, 1],
        }
    }

    #[test]
    fn scaled_rule_matches_line_element() {
        let g = gaussian_rule().evaluate(&[0.0, 2.0]);
        assert_eq!(g[(0, 0)], 0.25);
        assert_eq!(g[(1, 1)], 0.5);
        assert_eq!(g[(0, 1)], 0.0);
    }

    #[test]
    fn scaled_derivative_agrees_with_differences() {
        let rule = MetricRule::Scaled {
            coupling: DMatrix::from_row_slice(3, 3, &[1.5, 0.0, 0.0, 0.0, 2.0, -0.3, 0.0, -0.3, 2.0]),
            scale_of: vec![1, 1, 2],
        };
        let th = [0.3, 1.7, 0.8];
        let d = rule.derivative(&th).unwrap();
        let h = 1e-6;
        for lambda in 0..3 {
            let mut p = th;
            let mut m = th;
            p[lambda] += h;
            m[lambda] -= h;
            let fd = (rule.evaluate(&p) - rule.evaluate(&m)) / (2.0 * h);
            assert!((&fd - &d[lambda]).amax() < 1e-7, "lambda {lambda}");
        }
    }

    #[test]
    fn factorization_reproduces_fisher_density() {
        let coupling = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 2.0]);
        let vf = VolumeFactorization::for_scaled(&coupling, &[1, 1]);
        assert!(matches!(vf.factors[0], Factor::Unit));
        let sigma = 1.3;
        let direct = gaussian_rule().evaluate(&[0.0, sigma]).determinant().sqrt();
        assert!((vf.constant * vf.factor(1, sigma) - direct).abs() < 1e-14);
    }

    #[test]
    fn missing_rule_is_reported() {
        let m = StatisticalModel::new("bare", DomainBox::unbounded(1));
        assert!(matches!(
            metric_analytic(&m, &ParamPoint::new(vec![0.0])),
            Err(Error::NoAnalyticRule(_))
        ));
    }
}
