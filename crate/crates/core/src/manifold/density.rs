//! Density families `p(x|θ)` and the Fisher-Rao metric by quadrature.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::domain::{DomainBox, ParamPoint};
use super::metric::MetricTensor;
use crate::error::{Error, Result};
use crate::quadrature::{gauss_hermite, gauss_laguerre, Rule};

pub type LogDensityFn = Arc<dyn Fn(&[f64], &[f64]) -> f64 + Send + Sync>;
pub type SampleMapFn = Arc<dyn Fn(&[f64]) -> SampleMap + Send + Sync>;

/// One axis of a product-form sample space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Axis {
    /// Full line, integrated by Gauss-Hermite after `x = center + √2·scale·t`.
    Line { center: f64, scale: f64 },
    /// Half line `[0, ∞)`, integrated by Gauss-Laguerre after `x = scale·u^{1/power}`.
    HalfLine { scale: f64, power: f64 },
}

/// How to standardize the sample space at a given θ so the quadrature weight
/// matches the bulk of the density.
#[derive(Debug, Clone, PartialEq)]
pub enum SampleMap {
    /// Joint Gaussian weight: `x = mean + √2·factor·t` with `t` on a Hermite tensor grid.
    Gaussian {
        mean: DVector<f64>,
        factor: DMatrix<f64>,
    },
    /// Independent axes, each mapped on its own.
    Product(Vec<Axis>),
}

impl SampleMap {
    pub fn dim(&self) -> usize {
        match self {
            SampleMap::Gaussian { mean, .. } => mean.len(),
            SampleMap::Product(axes) => axes.len(),
        }
    }

    /// Quadrature nodes `x_i` with weights `W_i` such that `∫ F(x) dx ≈ Σ W_i F(x_i)`.
    ///
    /// The weights carry `exp(+t²)` / `exp(+u)` so they can be large; they are
    /// returned in log form to be combined with `log p` without overflow.
    fn nodes(&self, order: usize) -> Vec<(Vec<f64>, f64)> {
        match self {
            SampleMap::Gaussian { mean, factor } => {
                let l = mean.len();
                let rule = gauss_hermite(order);
                let log_jac = 0.5 * l as f64 * 2f64.ln() + factor.determinant().abs().ln();
                tensor_grid(&vec![&rule; l], |idx| {
                    let t = DVector::from_iterator(l, idx.iter().map(|&i| rule.nodes[i]));
                    let x = mean + factor * &t * 2f64.sqrt();
                    let log_w: f64 = idx.iter().map(|&i| rule.weights[i].ln()).sum::<f64>()
                        + t.norm_squared()
                        + log_jac;
                    (x.iter().copied().collect(), log_w)
                })
            }
            SampleMap::Product(axes) => {
                let hermite = gauss_hermite(order);
                let laguerre = gauss_laguerre(order);
                let rules: Vec<&Rule> = axes
                    .iter()
                    .map(|a| match a {
                        Axis::Line { .. } => &hermite,
                        Axis::HalfLine { .. } => &laguerre,
                    })
                    .collect();
                tensor_grid(&rules, |idx| {
                    let mut x = Vec::with_capacity(axes.len());
                    let mut log_w = 0.0;
                    for (axis, &i) in axes.iter().zip(idx) {
                        match *axis {
                            Axis::Line { center, scale } => {
                                let t = hermite.nodes[i];
                                x.push(center + 2f64.sqrt() * scale * t);
                                log_w += hermite.weights[i].ln() + t * t + (2f64.sqrt() * scale).ln();
                            }
                            Axis::HalfLine { scale, power } => {
                                let u = laguerre.nodes[i];
                                x.push(scale * u.powf(1.0 / power));
                                // dx = (scale/power) u^{1/power - 1} du
                                log_w += laguerre.weights[i].ln()
                                    + u
                                    + (scale / power).ln()
                                    + (1.0 / power - 1.0) * u.ln();
                            }
                        }
                    }
                    (x, log_w)
                })
            }
        }
    }
}

fn tensor_grid<T>(rules: &[&Rule], mut emit: impl FnMut(&[usize]) -> T) -> Vec<T> {
    let dims: Vec<usize> = rules.iter().map(|r| r.len()).collect();
    let total: usize = dims.iter().product();
    let mut out = Vec::with_capacity(total);
    let mut idx = vec![0usize; dims.len()];
    for _ in 0..total {
        out.push(emit(&idx));
        for k in (0..dims.len()).rev() {
            idx[k] += 1;
            if idx[k] < dims[k] {
                break;
            }
            idx[k] = 0;
        }
    }
    out
}

/// A parametric family of probability densities over a microspace.
#[derive(Clone)]
pub struct DensityFamily {
    sample_dim: usize,
    log_density: LogDensityFn,
    sample_map: SampleMapFn,
}

impl fmt::Debug for DensityFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DensityFamily")
            .field("sample_dim", &self.sample_dim)
            .finish_non_exhaustive()
    }
}

impl DensityFamily {
    pub fn new(
        sample_dim: usize,
        log_density: impl Fn(&[f64], &[f64]) -> f64 + Send + Sync + 'static,
        sample_map: impl Fn(&[f64]) -> SampleMap + Send + Sync + 'static,
    ) -> Self {
        Self {
            sample_dim,
            log_density: Arc::new(log_density),
            sample_map: Arc::new(sample_map),
        }
    }

    pub fn sample_dim(&self) -> usize {
        self.sample_dim
    }

    pub fn log_density(&self, x: &[f64], theta: &[f64]) -> f64 {
        (self.log_density)(x, theta)
    }

    pub fn sample_map(&self, theta: &[f64]) -> SampleMap {
        (self.sample_map)(theta)
    }

    /// `∫ p(x|θ) dx` at a fixed quadrature order.
    pub fn total_mass(&self, theta: &[f64], order: usize) -> f64 {
        self.sample_map(theta)
            .nodes(order)
            .iter()
            .map(|(x, log_w)| (self.log_density(x, theta) + log_w).exp())
            .sum()
    }
}

/// Settings for [`metric_numeric`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub initial_order: usize,
    pub max_order: usize,
    pub rel_tol: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            initial_order: 8,
            max_order: 128,
            rel_tol: 1e-10,
        }
    }
}

/// Fisher-Rao metric `∫ p ∂_μ log p ∂_ν log p dx`, evaluated by quadrature.
///
/// Scores are taken by fourth-order central differences in θ. The order is
/// doubled until successive estimates agree to `quad.rel_tol`.
pub fn metric_numeric(
    family: &DensityFamily,
    domain: &DomainBox,
    theta: &ParamPoint,
    quad: &QuadratureSpec,
) -> Result<MetricTensor> {
    domain.check(theta.coords())?;
    if quad.initial_order < 2 || quad.max_order < quad.initial_order {
        return Err(Error::InvalidArgument(format!(
            "quadrature orders must satisfy 2 <= initial <= max, got {} and {}",
            quad.initial_order, quad.max_order
        )));
    }
    let th = theta.coords();
    let n = th.len();
    let steps: Vec<f64> = (0..n)
        .map(|k| {
            let wanted = f64::EPSILON.powf(0.2) * th[k].abs().max(1.0);
            domain.stencil_step(k, th[k], wanted, 2.0)
        })
        .collect();
    let map = family.sample_map(th);

    let estimate = |order: usize| -> DMatrix<f64> {
        let mut g = DMatrix::<f64>::zeros(n, n);
        let mut score = vec![0.0; n];
        let mut shifted = th.to_vec();
        for (x, log_w) in map.nodes(order) {
            let log_p = family.log_density(&x, th);
            let weight = (log_p + log_w).exp();
            if weight == 0.0 || !weight.is_finite() {
                continue;
            }
            for k in 0..n {
                let h = steps[k];
                let mut eval = |delta: f64| {
                    shifted[k] = th[k] + delta;
                    let v = family.log_density(&x, &shifted);
                    shifted[k] = th[k];
                    v
                };
                let (p1, m1, p2, m2) = (eval(h), eval(-h), eval(2.0 * h), eval(-2.0 * h));
                score[k] = (8.0 * (p1 - m1) - (p2 - m2)) / (12.0 * h);
            }
            for mu in 0..n {
                for nu in mu..n {
                    g[(mu, nu)] += weight * score[mu] * score[nu];
                }
            }
        }
        for mu in 0..n {
            for nu in 0..mu {
                g[(mu, nu)] = g[(nu, mu)];
            }
        }
        g
    };

    let mut order = quad.initial_order;
    let mut previous = estimate(order);
    let mut change = f64::INFINITY;
    while order * 2 <= quad.max_order {
        order *= 2;
        let current = estimate(order);
        change = (&current - &previous).amax() / current.amax();
        if change < quad.rel_tol {
            return MetricTensor::new(theta.clone(), current);
        }
        previous = current;
    }
    Err(Error::QuadratureNotConverged { order, change })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn normal_location() -> DensityFamily {
        DensityFamily::new(
            1,
            |x, th| -0.5 * (x[0] - th[0]).powi(2) - 0.5 * (2.0 * PI).ln(),
            |th| SampleMap::Product(vec![Axis::Line { center: th[0], scale: 1.0 }]),
        )
    }

    #[test]
    fn unit_location_family_has_unit_information() {
        let fam = normal_location();
        let dom = DomainBox::unbounded(1);
        for mu in [-3.0, 0.0, 2.5] {
            let g = metric_numeric(&fam, &dom, &ParamPoint::new(vec![mu]), &QuadratureSpec::default()).unwrap();
            assert!((g.get(0, 0) - 1.0).abs() < 1e-9, "{}", g.get(0, 0));
        }
    }

    #[test]
    fn exponential_family_on_half_line() {
        let fam = DensityFamily::new(
            1,
            |x, th| -th[0].ln() - x[0] / th[0],
            |th| SampleMap::Product(vec![Axis::HalfLine { scale: th[0], power: 1.0 }]),
        );
        let dom = DomainBox::new(vec![(0.0, f64::INFINITY)]).unwrap();
        assert!((fam.total_mass(&[4.0], 16) - 1.0).abs() < 1e-13);
        let g = metric_numeric(&fam, &dom, &ParamPoint::new(vec![4.0]), &QuadratureSpec::default()).unwrap();
        assert!((g.get(0, 0) - 1.0 / 16.0).abs() < 1e-9 / 16.0);
    }

    #[test]
    fn rejects_order_below_two() {
        let fam = normal_location();
        let dom = DomainBox::unbounded(1);
        let spec = QuadratureSpec { initial_order: 1, ..Default::default() };
        assert!(metric_numeric(&fam, &dom, &ParamPoint::new(vec![0.0]), &spec).is_err());
    }

    #[test]
    fn non_converging_integrand_is_reported() {
        // Cauchy-like tails defeat a Hermite rule centred on the wrong scale.
        let fam = DensityFamily::new(
            1,
            |x, th| -(PI * (1.0 + (x[0] - th[0]).powi(2))).ln(),
            |th| SampleMap::Product(vec![Axis::Line { center: th[0], scale: 0.05 }]),
        );
        let dom = DomainBox::unbounded(1);
        let spec = QuadratureSpec { initial_order: 4, max_order: 32, rel_tol: 1e-12 };
        assert!(matches!(
            metric_numeric(&fam, &dom, &ParamPoint::new(vec![0.0]), &spec),
            Err(Error::QuadratureNotConverged { .. })
        ));
    }
}
