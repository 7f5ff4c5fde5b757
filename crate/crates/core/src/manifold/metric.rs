//! Metric tensors, the Fisher density and tensorial checks.

use nalgebra::DMatrix;

use super::domain::ParamPoint;
use crate::error::{Error, Result};

/// Symmetric metric components `g_{μν}` at a parameter point.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricTensor {
    point: ParamPoint,
    components: DMatrix<f64>,
}

impl MetricTensor {
    /// Wraps `components`, enforcing exact symmetry by averaging with the transpose.
    pub fn new(point: ParamPoint, components: DMatrix<f64>) -> Result<Self> {
        let n = point.dim();
        if components.nrows() != n || components.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: components.nrows(),
            });
        }
        let components = symmetrize(components);
        Ok(Self { point, components })
    }

    pub fn point(&self) -> &ParamPoint {
        &self.point
    }

    pub fn components(&self) -> &DMatrix<f64> {
        &self.components
    }

    pub fn dim(&self) -> usize {
        self.components.nrows()
    }

    pub fn get(&self, mu: usize, nu: usize) -> f64 {
        self.components[(mu, nu)]
    }

    pub fn determinant(&self) -> f64 {
        self.components.determinant()
    }

    pub fn is_symmetric(&self) -> bool {
        self.components == self.components.transpose()
    }

    /// True when a Cholesky factorization exists.
    pub fn is_positive_definite(&self) -> bool {
        self.components.clone().cholesky().is_some()
    }

    pub fn inverse(&self) -> Result<DMatrix<f64>> {
        self.components
            .clone()
            .try_inverse()
            .ok_or(Error::SingularMetric)
    }

    /// `g_{μν} u^μ v^ν`.
    pub fn inner(&self, u: &[f64], v: &[f64]) -> f64 {
        let n = self.dim();
        let mut acc = 0.0;
        for mu in 0..n {
            for nu in 0..n {
                acc += self.components[(mu, nu)] * u[mu] * v[nu];
            }
        }
        acc
    }

    /// Largest absolute component difference.
    pub fn max_abs_diff(&self, other: &MetricTensor) -> f64 {
        (&self.components - &other.components).amax()
    }

    /// Largest componentwise difference relative to the largest component of `reference`.
    pub fn relative_error(&self, reference: &MetricTensor) -> f64 {
        let scale = reference.components.amax();
        self.max_abs_diff(reference) / scale
    }
}

pub(crate) fn symmetrize(m: DMatrix<f64>) -> DMatrix<f64> {
    let t = m.transpose();
    (m + t) * 0.5
}

/// `√det g`, the Riemannian volume weight.
pub fn fisher_density(g: &MetricTensor) -> Result<f64> {
    let det = g.determinant();
    if det > 0.0 && det.is_finite() {
        Ok(det.sqrt())
    } else {
        Err(Error::NonPositiveDeterminant(det))
    }
}

/// Pulls `g` back through a coordinate map with Jacobian `J = ∂θ/∂θ′`: `Jᵀ g J`.
pub fn pullback(g: &DMatrix<f64>, jacobian: &DMatrix<f64>) -> DMatrix<f64> {
    symmetrize(jacobian.transpose() * g * jacobian)
}
