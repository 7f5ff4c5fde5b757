use std::fmt;

use crate::error::{Error, Result};

/// Points closer than this to a finite domain edge are refused.
pub const BOUNDARY_GUARD: f64 = 1e-9;

/// Per-coordinate open intervals bounding the parameter space.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainBox {
    bounds: Vec<(f64, f64)>,
}

impl DomainBox {
    pub fn new(bounds: Vec<(f64, f64)>) -> Result<Self> {
        for (k, &(lo, hi)) in bounds.iter().enumerate() {
            if lo.is_nan() || hi.is_nan() || lo >= hi {
                return Err(Error::InvalidArgument(format!(
                    "domain interval {k} must satisfy lower < upper, got ({lo}, {hi})"
                )));
            }
        }
        Ok(Self { bounds })
    }

    /// The whole of `R^n`.
    pub fn unbounded(n: usize) -> Self {
        Self {
            bounds: vec![(f64::NEG_INFINITY, f64::INFINITY); n],
        }
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn interval(&self, k: usize) -> (f64, f64) {
        self.bounds[k]
    }

    /// Index of the first coordinate that is outside the guarded interior.
    pub fn violation(&self, coords: &[f64]) -> Option<usize> {
        coords
            .iter()
            .zip(&self.bounds)
            .position(|(&x, &(lo, hi))| !(x.is_finite() && x > lo + BOUNDARY_GUARD && x < hi - BOUNDARY_GUARD))
    }

    pub fn contains(&self, coords: &[f64]) -> bool {
        coords.len() == self.dim() && self.violation(coords).is_none()
    }

    pub fn check(&self, coords: &[f64]) -> Result<()> {
        if coords.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: coords.len(),
            });
        }
        match self.violation(coords) {
            None => Ok(()),
            Some(index) => {
                let (lower, upper) = self.bounds[index];
                Err(Error::OutOfDomain {
                    index,
                    value: coords[index],
                    lower,
                    upper,
                })
            }
        }
    }

    /// Largest step `h ≤ wanted` such that `x ± reach·h` stays in the guarded interior.
    pub(crate) fn stencil_step(&self, k: usize, x: f64, wanted: f64, reach: f64) -> f64 {
        let (lo, hi) = self.bounds[k];
        let room = (x - lo - BOUNDARY_GUARD).min(hi - BOUNDARY_GUARD - x);
        if room.is_finite() {
            wanted.min(0.5 * room / reach)
        } else {
            wanted
        }
    }
}

/// Coordinates of a macrostate on a statistical manifold.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamPoint {
    coords: Vec<f64>,
}

impl ParamPoint {
    pub fn new(coords: Vec<f64>) -> Self {
        Self { coords }
    }

    /// Builds the point and checks it against `domain`.
    pub fn within(coords: Vec<f64>, domain: &DomainBox) -> Result<Self> {
        domain.check(&coords)?;
        Ok(Self { coords })
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.coords
    }
}

impl From<Vec<f64>> for ParamPoint {
    fn from(coords: Vec<f64>) -> Self {
        Self::new(coords)
    }
}

impl From<&[f64]> for ParamPoint {
    fn from(coords: &[f64]) -> Self {
        Self::new(coords.to_vec())
    }
}

impl fmt::Display for ParamPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, x) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, ")")
    }
}
