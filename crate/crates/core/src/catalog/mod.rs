//! Ready-made statistical manifolds and their closed-form results.

pub mod formulas;

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::manifold::{
    Axis, DensityFamily, DomainBox, Factor, Flow, MetricRule, SampleMap, StatisticalModel, VolumeFactorization,
};

/// A catalog entry with its parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum CatalogId {
    /// θ = (μ₁..μ_l, σ₁..σ_l).
    UncorrelatedGaussian { l: usize },
    /// θ = (μ, σ).
    BivariateCorr { rho: f64 },
    /// θ = (μ, σ); one correlated pair among three variables.
    TrivariateCase1 { rho: f64 },
    /// θ = (μ, σ); correlated chain x₁–x₂–x₃.
    TrivariateCase2 { rho: f64 },
    /// θ = (μ, σ); every pair correlated.
    TrivariateCase3 { rho: f64 },
    /// θ = (μ_x, μ_y, σ).
    Microcorrelated3d { rho: f64 },
    /// θ = (μ₁..μ_l, σ₁..σ_l) with the linear constraint `μ_{2j} = a·μ_{2j−1} + b·σ_{2j−1}`.
    EmbeddedGaussian { l: usize, a: f64, b: f64 },
    /// θ = (μ_x, σ_x, σ_y).
    Gauss3du,
    /// θ = (μ, σ) under `σ_x σ_y = Σ²`.
    Gauss2du { big_sigma: f64 },
    /// θ = (μ_x, σ_x, σ_y).
    Gauss3dc { rho: f64 },
    /// θ = (μ, σ) under `σ_x σ_y = Σ²`.
    Gauss2dc { rho: f64, big_sigma: f64 },
    /// θ = (θ₁..θ_l).
    Iho { omega: Vec<f64> },
    /// θ = (μ_A, μ_B).
    SpinIntegrable,
    /// θ = (μ′_A, μ′_B, σ′_B).
    SpinChaotic,
    /// θ = (μ_x, μ_y, σ).
    ScatteringUncorr,
    /// θ = (μ_x, μ_y, σ).
    ScatteringCorr { rho: f64 },
}

/// Listing row for a catalog model.
#[derive(Debug, Clone, PartialEq)]
pub struct CatalogEntry {
    pub name: &'static str,
    /// Dimension, or a description when it depends on a parameter.
    pub dimension: &'static str,
    pub coordinates: &'static str,
    pub params: &'static [(&'static str, &'static str)],
    pub family: &'static str,
}

pub const CATALOG: &[CatalogEntry] = &[
    CatalogEntry {
        name: "uncorrelated_gaussian",
        dimension: "2l",
        coordinates: "mu_1..mu_l, sigma_1..sigma_l",
        params: &[("l", "integer >= 1")],
        family: "l independent Gaussians",
    },
    CatalogEntry {
        name: "bivariate_corr",
        dimension: "2",
        coordinates: "mu, sigma",
        params: &[("rho", "(-1, 1)")],
        family: "correlated bivariate Gaussian",
    },
    CatalogEntry {
        name: "trivariate_case1",
        dimension: "2",
        coordinates: "mu, sigma",
        params: &[("rho", "(-1, 1)")],
        family: "trivariate Gaussian, one correlated pair",
    },
    CatalogEntry {
        name: "trivariate_case2",
        dimension: "2",
        coordinates: "mu, sigma",
        params: &[("rho", "(-sqrt(2)/2, sqrt(2)/2)")],
        family: "trivariate Gaussian, correlated chain",
    },
    CatalogEntry {
        name: "trivariate_case3",
        dimension: "2",
        coordinates: "mu, sigma",
        params: &[("rho", "(-1/2, 1)")],
        family: "trivariate Gaussian, all pairs correlated",
    },
    CatalogEntry {
        name: "microcorrelated_3d",
        dimension: "3",
        coordinates: "mu_x, mu_y, sigma",
        params: &[("rho", "(0, 1)")],
        family: "microcorrelated bivariate Gaussian, box volumes",
    },
    CatalogEntry {
        name: "embedded_gaussian",
        dimension: "2l",
        coordinates: "mu_1..mu_l, sigma_1..sigma_l",
        params: &[("l", "integer >= 1"), ("a", "real, a*b >= 0"), ("b", "real, a*b >= 0")],
        family: "Gaussian pairs with embedding constraints",
    },
    CatalogEntry {
        name: "gauss_3du",
        dimension: "3",
        coordinates: "mu_x, sigma_x, sigma_y",
        params: &[],
        family: "uncorrelated 3D Gaussian",
    },
    CatalogEntry {
        name: "gauss_2du",
        dimension: "2",
        coordinates: "mu, sigma",
        params: &[("Sigma", "(0, inf)")],
        family: "uncorrelated Gaussian under a minimum uncertainty relation",
    },
    CatalogEntry {
        name: "gauss_3dc",
        dimension: "3",
        coordinates: "mu_x, sigma_x, sigma_y",
        params: &[("rho", "(-1, 1)")],
        family: "correlated 3D Gaussian",
    },
    CatalogEntry {
        name: "gauss_2dc",
        dimension: "2",
        coordinates: "mu, sigma",
        params: &[("rho", "(-1, 1)"), ("Sigma", "(0, inf)")],
        family: "correlated Gaussian under a minimum uncertainty relation",
    },
    CatalogEntry {
        name: "iho",
        dimension: "l",
        coordinates: "theta_1..theta_l",
        params: &[("omega", "list of positive reals, e.g. omega=1;2")],
        family: "inverted harmonic oscillators",
    },
    CatalogEntry {
        name: "spin_integrable",
        dimension: "2",
        coordinates: "mu_A, mu_B",
        params: &[],
        family: "spin chain, transverse field (exponential level spacings)",
    },
    CatalogEntry {
        name: "spin_chaotic",
        dimension: "3",
        coordinates: "mu_A, mu_B, sigma_B",
        params: &[],
        family: "spin chain, tilted field (Rayleigh and Gaussian spacings)",
    },
    CatalogEntry {
        name: "scattering_uncorr",
        dimension: "3",
        coordinates: "mu_x, mu_y, sigma",
        params: &[],
        family: "pre-collision wave packets",
    },
    CatalogEntry {
        name: "scattering_corr",
        dimension: "3",
        coordinates: "mu_x, mu_y, sigma",
        params: &[("rho", "[0, 1)")],
        family: "post-collision wave packets",
    },
];

/// A parameter value as written in a scenario or on the command line.
#[derive(Debug, Clone, PartialEq)]
pub enum ParamValue {
    Number(f64),
    List(Vec<f64>),
}

impl ParamValue {
    /// Parses `1.5` or `1;2;3`.
    pub fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        let number = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidArgument(format!("cannot parse {s:?} as a number")))
        };
        if text.contains(';') {
            Ok(ParamValue::List(text.split(';').map(number).collect::<Result<_>>()?))
        } else {
            Ok(ParamValue::Number(number(text)?))
        }
    }

    fn number(&self, name: &str) -> Result<f64> {
        match self {
            ParamValue::Number(x) => Ok(*x),
            ParamValue::List(v) if v.len() == 1 => Ok(v[0]),
            ParamValue::List(_) => Err(Error::InvalidArgument(format!("parameter {name} expects a single number"))),
        }
    }

    fn list(&self) -> Vec<f64> {
        match self {
            ParamValue::Number(x) => vec![*x],
            ParamValue::List(v) => v.clone(),
        }
    }
}

pub type Params = BTreeMap<String, ParamValue>;

/// Parses `k=v,k=v` as used by the command line.
pub fn parse_params(text: &str) -> Result<Params> {
    let mut out = Params::new();
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| Error::InvalidArgument(format!("parameter {item:?} is not of the form key=value")))?;
        out.insert(k.trim().to_string(), ParamValue::parse(v)?);
    }
    Ok(out)
}

impl CatalogId {
    /// Builds an id from a model name and its named parameters.
    pub fn from_parts(name: &str, params: &Params) -> Result<Self> {
        let entry = CATALOG
            .iter()
            .find(|e| e.name == name)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown model {name:?}")))?;
        for key in params.keys() {
            if !entry.params.iter().any(|(p, _)| p == key) {
                return Err(Error::InvalidArgument(format!("model {name} has no parameter {key:?}")));
            }
        }
        let get = |key: &str| -> Result<f64> {
            params
                .get(key)
                .ok_or_else(|| Error::InvalidArgument(format!("model {name} requires parameter {key:?}")))?
                .number(key)
        };
        let count = |key: &str| -> Result<usize> {
            let x = get(key)?;
            if x >= 1.0 && x.fract() == 0.0 && x <= 64.0 {
                Ok(x as usize)
            } else {
                Err(Error::param(key, x, "integer in [1, 64]"))
            }
        };
        let id = match name {
            "uncorrelated_gaussian" => CatalogId::UncorrelatedGaussian { l: count("l")? },
            "bivariate_corr" => CatalogId::BivariateCorr { rho: get("rho")? },
            "trivariate_case1" => CatalogId::TrivariateCase1 { rho: get("rho")? },
            "trivariate_case2" => CatalogId::TrivariateCase2 { rho: get("rho")? },
            "trivariate_case3" => CatalogId::TrivariateCase3 { rho: get("rho")? },
            "microcorrelated_3d" => CatalogId::Microcorrelated3d { rho: get("rho")? },
            "embedded_gaussian" => CatalogId::EmbeddedGaussian {
                l: count("l")?,
                a: get("a")?,
                b: get("b")?,
            },
            "gauss_3du" => CatalogId::Gauss3du,
            "gauss_2du" => CatalogId::Gauss2du { big_sigma: get("Sigma")? },
            "gauss_3dc" => CatalogId::Gauss3dc { rho: get("rho")? },
            "gauss_2dc" => CatalogId::Gauss2dc {
                rho: get("rho")?,
                big_sigma: get("Sigma")?,
            },
            "iho" => CatalogId::Iho {
                omega: params
                    .get("omega")
                    .ok_or_else(|| Error::InvalidArgument("model iho requires parameter \"omega\"".into()))?
                    .list(),
            },
            "spin_integrable" => CatalogId::SpinIntegrable,
            "spin_chaotic" => CatalogId::SpinChaotic,
            "scattering_uncorr" => CatalogId::ScatteringUncorr,
            "scattering_corr" => CatalogId::ScatteringCorr { rho: get("rho")? },
            _ => unreachable!("listed in CATALOG"),
        };
        id.validate()?;
        Ok(id)
    }

    pub fn name(&self) -> &'static str {
        match self {
            CatalogId::UncorrelatedGaussian { .. } => "uncorrelated_gaussian",
            CatalogId::BivariateCorr { .. } => "bivariate_corr",
            CatalogId::TrivariateCase1 { .. } => "trivariate_case1",
            CatalogId::TrivariateCase2 { .. } => "trivariate_case2",
            CatalogId::TrivariateCase3 { .. } => "trivariate_case3",
            CatalogId::Microcorrelated3d { .. } => "microcorrelated_3d",
            CatalogId::EmbeddedGaussian { .. } => "embedded_gaussian",
            CatalogId::Gauss3du => "gauss_3du",
            CatalogId::Gauss2du { .. } => "gauss_2du",
            CatalogId::Gauss3dc { .. } => "gauss_3dc",
            CatalogId::Gauss2dc { .. } => "gauss_2dc",
            CatalogId::Iho { .. } => "iho",
            CatalogId::SpinIntegrable => "spin_integrable",
            CatalogId::SpinChaotic => "spin_chaotic",
            CatalogId::ScatteringUncorr => "scattering_uncorr",
            CatalogId::ScatteringCorr { .. } => "scattering_corr",
        }
    }

    /// Checks every parameter against its domain.
    pub fn validate(&self) -> Result<()> {
        let open = |x: f64, lo: f64, hi: f64, bound: &str| {
            if x > lo && x < hi {
                Ok(())
            } else {
                Err(Error::param("rho", x, bound))
            }
        };
        let positive = |name: &str, x: f64| {
            if x > 0.0 && x.is_finite() {
                Ok(())
            } else {
                Err(Error::param(name, x, "must be positive"))
            }
        };
        let replicas = |l: usize| {
            if (1..=64).contains(&l) {
                Ok(())
            } else {
                Err(Error::param("l", l as f64, "integer in [1, 64]"))
            }
        };
        match *self {
            CatalogId::UncorrelatedGaussian { l } => replicas(l),
            CatalogId::BivariateCorr { rho }
            | CatalogId::TrivariateCase1 { rho }
            | CatalogId::Gauss3dc { rho } => open(rho, -1.0, 1.0, "rho in (-1, 1)"),
            CatalogId::TrivariateCase2 { rho } => {
                open(rho, -FRAC_1_SQRT_2, FRAC_1_SQRT_2, "rho in (-sqrt(2)/2, sqrt(2)/2)")
            }
            CatalogId::TrivariateCase3 { rho } => open(rho, -0.5, 1.0, "rho in (-1/2, 1)"),
            CatalogId::Microcorrelated3d { rho } => open(rho, 0.0, 1.0, "rho in (0, 1)"),
            CatalogId::EmbeddedGaussian { l, a, b } => {
                replicas(l)?;
                if !(a.is_finite() && b.is_finite()) {
                    return Err(Error::param("a", a, "finite constraint coefficients"));
                }
                let rho = embedded_rho(a, b);
                if (0.0..1.0).contains(&rho) {
                    Ok(())
                } else {
                    Err(Error::param("rho", rho, "macroscopic correlation in [0, 1)"))
                }
            }
            CatalogId::Gauss3du | CatalogId::SpinIntegrable | CatalogId::SpinChaotic | CatalogId::ScatteringUncorr => {
                Ok(())
            }
            CatalogId::Gauss2du { big_sigma } => positive("Sigma", big_sigma),
            CatalogId::Gauss2dc { rho, big_sigma } => {
                open(rho, -1.0, 1.0, "rho in (-1, 1)")?;
                positive("Sigma", big_sigma)
            }
            CatalogId::Iho { ref omega } => {
                if omega.is_empty() {
                    return Err(Error::InvalidArgument("iho needs at least one frequency".into()));
                }
                omega.iter().try_for_each(|&w| positive("omega", w))
            }
            CatalogId::ScatteringCorr { rho } => {
                if (0.0..1.0).contains(&rho) {
                    Ok(())
                } else {
                    Err(Error::param("rho", rho, "rho in [0, 1)"))
                }
            }
        }
    }
}

impl fmt::Display for CatalogId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name())?;
        match self {
            CatalogId::UncorrelatedGaussian { l } => write!(f, "(l={l})"),
            CatalogId::BivariateCorr { rho }
            | CatalogId::TrivariateCase1 { rho }
            | CatalogId::TrivariateCase2 { rho }
            | CatalogId::TrivariateCase3 { rho }
            | CatalogId::Microcorrelated3d { rho }
            | CatalogId::Gauss3dc { rho }
            | CatalogId::ScatteringCorr { rho } => write!(f, "(rho={rho})"),
            CatalogId::EmbeddedGaussian { l, a, b } => write!(f, "(l={l}, a={a}, b={b})"),
            CatalogId::Gauss2du { big_sigma } => write!(f, "(Sigma={big_sigma})"),
            CatalogId::Gauss2dc { rho, big_sigma } => write!(f, "(rho={rho}, Sigma={big_sigma})"),
            CatalogId::Iho { omega } => {
                let w: Vec<String> = omega.iter().map(|w| w.to_string()).collect();
                write!(f, "(omega={})", w.join(";"))
            }
            _ => Ok(()),
        }
    }
}

pub type RatioFn = fn(f64) -> Result<f64>;

/// Closed-form complexity ratios as functions of the correlation, with their domains.
pub const RATIO_FAMILIES: &[(&str, RatioFn, &str)] = &[
    ("bivariate_strong", formulas::ratio_bivariate_strong, "(-1, 1)"),
    ("trivariate_weak", formulas::ratio_trivariate_weak, "(-1, 1)"),
    ("trivariate_mildly_weak", formulas::ratio_trivariate_mildly_weak, "(-sqrt(2)/2, sqrt(2)/2)"),
    ("trivariate_strong", formulas::ratio_trivariate_strong, "(-1/2, 1)"),
    ("ratio_3v2", formulas::ratio_3v2, "(-1/2, 1)"),
    ("f_micro", formulas::f_micro, "[0, 1)"),
    ("scattering_igc_ratio", formulas::scattering_igc_ratio, "[0, 1)"),
    ("scattering_ige_shift", formulas::scattering_ige_shift, "[0, 1)"),
];

pub fn ratio_family(name: &str) -> Result<RatioFn> {
    RATIO_FAMILIES
        .iter()
        .find(|(n, _, _)| *n == name)
        .map(|(_, f, _)| *f)
        .ok_or_else(|| {
            let known: Vec<&str> = RATIO_FAMILIES.iter().map(|(n, _, _)| *n).collect();
            Error::InvalidArgument(format!("unknown ratio family {name:?}; known: {}", known.join(", ")))
        })
}

/// Inclusive grid `start, start + step, …, stop`.
pub fn rho_grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && start.is_finite() && stop.is_finite() && stop >= start) {
        return Err(Error::InvalidArgument(format!(
            "grid {start}:{stop}:{step} needs start <= stop and a positive step"
        )));
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    if n > 10_000_000 {
        return Err(Error::InvalidArgument("grid has too many points".into()));
    }
    Ok((0..=n).map(|i| start + i as f64 * step).collect())
}

/// Parses `a:b:step`.
pub fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        return Err(Error::InvalidArgument(format!("grid {text:?} is not of the form a:b:step")));
    }
    let num = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|_| Error::InvalidArgument(format!("cannot parse {s:?} as a number")))
    };
    rho_grid(num(parts[0])?, num(parts[1])?, num(parts[2])?)
}

/// Macroscopic correlation coefficient of an embedding constraint with
/// partial derivatives `∂μ_{2j}/∂μ_{2j−1} = a`, `∂μ_{2j}/∂σ_{2j−1} = b`.
pub fn embedded_rho(a: f64, b: f64) -> f64 {
    a * b / ((1.0 + a * a).sqrt() * (2.0 + 0.5 * b * b).sqrt())
}

const R: f64 = f64::INFINITY;

fn line() -> (f64, f64) {
    (-R, R)
}

fn half() -> (f64, f64) {
    (0.0, R)
}

fn scaled(name: String, bounds: Vec<(f64, f64)>, coupling: DMatrix<f64>, scale_of: Vec<usize>) -> StatisticalModel {
    let volume = VolumeFactorization::for_scaled(&coupling, &scale_of);
    StatisticalModel::new(name, DomainBox::new(bounds).expect("catalog domains are valid"))
        .with_rule(MetricRule::Scaled { coupling, scale_of })
        .with_volume(volume)
}

fn diag(entries: &[f64]) -> DMatrix<f64> {
    DMatrix::from_diagonal(&DVector::from_column_slice(entries))
}

/// Multivariate normal `N(mean(θ), cov(θ))` on `R^k`.
fn gaussian_family(
    k: usize,
    mean: impl Fn(&[f64]) -> DVector<f64> + Send + Sync + 'static,
    cov: impl Fn(&[f64]) -> DMatrix<f64> + Send + Sync + 'static,
) -> DensityFamily {
    let mean = Arc::new(mean);
    let cov = Arc::new(cov);
    let (m2, c2) = (mean.clone(), cov.clone());
    DensityFamily::new(
        k,
        move |x, th| {
            let Some(chol) = cov(th).cholesky() else {
                return f64::NEG_INFINITY;
            };
            let d = DVector::from_column_slice(x) - mean(th);
            let z = chol.l().solve_lower_triangular(&d).expect("Cholesky factor is invertible");
            let log_det: f64 = chol.l().diagonal().iter().map(|v| v.ln()).sum::<f64>() * 2.0;
            -0.5 * z.norm_squared() - 0.5 * log_det - 0.5 * k as f64 * (2.0 * PI).ln()
        },
        move |th| SampleMap::Gaussian {
            mean: m2(th),
            factor: c2(th).cholesky().map(|c| c.l()).unwrap_or_else(|| DMatrix::identity(k, k)),
        },
    )
}

fn correlation(k: usize, pairs: &[(usize, usize)], rho: f64) -> DMatrix<f64> {
    let mut r = DMatrix::identity(k, k);
    for &(i, j) in pairs {
        r[(i, j)] = rho;
        r[(j, i)] = rho;
    }
    r
}

fn trivariate(name: String, rho: f64, pairs: &'static [(usize, usize)]) -> StatisticalModel {
    let r = correlation(3, pairs, rho);
    let ones = DVector::from_element(3, 1.0);
    let mean_info = (ones.transpose() * r.clone().try_inverse().expect("validated correlation") * &ones)[(0, 0)];
    scaled(name, vec![line(), half()], diag(&[mean_info, 6.0]), vec![1, 1]).with_density(gaussian_family(
        3,
        |th| DVector::from_element(3, th[0]),
        move |th| &r * (th[1] * th[1]),
    ))
}

fn micro_coupling(rho: f64) -> DMatrix<f64> {
    let d = 1.0 - rho * rho;
    DMatrix::from_row_slice(3, 3, &[1.0 / d, -rho / d, 0.0, -rho / d, 1.0 / d, 0.0, 0.0, 0.0, 4.0])
}

fn micro_density(rho: f64) -> DensityFamily {
    gaussian_family(
        2,
        |th| DVector::from_column_slice(&th[..2]),
        move |th| correlation(2, &[(0, 1)], rho) * (th[2] * th[2]),
    )
}

/// Covariance of `(x, y)` with standard deviations `sx`, `sy` and correlation ρ.
fn cov2(sx: f64, sy: f64, rho: f64) -> DMatrix<f64> {
    DMatrix::from_row_slice(2, 2, &[sx * sx, rho * sx * sy, rho * sx * sy, sy * sy])
}

fn log_exponential(x: f64, mean: f64) -> f64 {
    -mean.ln() - x / mean
}

/// Builds the model for a validated catalog id.
pub fn build(id: &CatalogId) -> Result<StatisticalModel> {
    id.validate()?;
    let name = id.to_string();
    let model = match *id {
        CatalogId::UncorrelatedGaussian { l } => {
            let mut coupling = vec![1.0; l];
            coupling.extend(vec![2.0; l]);
            let scale_of = (0..2 * l).map(|i| l + i % l).collect();
            let mut bounds = vec![line(); l];
            bounds.extend(vec![half(); l]);
            scaled(name, bounds, diag(&coupling), scale_of).with_density(DensityFamily::new(
                l,
                move |x, th| {
                    (0..l)
                        .map(|k| {
                            let z = (x[k] - th[k]) / th[l + k];
                            -0.5 * z * z - th[l + k].ln() - 0.5 * (2.0 * PI).ln()
                        })
                        .sum()
                },
                move |th| {
                    SampleMap::Product(
                        (0..l)
                            .map(|k| Axis::Line {
                                center: th[k],
                                scale: th[l + k],
                            })
                            .collect(),
                    )
                },
            ))
        }
        CatalogId::BivariateCorr { rho } => {
            // mean (μ, 0): the μ-information is then 1/((1−ρ²)σ²) as in the line element
            scaled(name, vec![line(), half()], diag(&[1.0 / (1.0 - rho * rho), 4.0]), vec![1, 1]).with_density(
                gaussian_family(
                    2,
                    |th| DVector::from_column_slice(&[th[0], 0.0]),
                    move |th| cov2(th[1], th[1], rho),
                ),
            )
        }
        CatalogId::TrivariateCase1 { rho } => trivariate(name, rho, &[(0, 1)]),
        CatalogId::TrivariateCase2 { rho } => trivariate(name, rho, &[(0, 1), (1, 2)]),
        CatalogId::TrivariateCase3 { rho } => trivariate(name, rho, &[(0, 1), (0, 2), (1, 2)]),
        CatalogId::Microcorrelated3d { rho } => {
            // no factorization on purpose: volumes go through box quadrature
            scaled(name, vec![line(), line(), half()], micro_coupling(rho), vec![2, 2, 2])
                .without_volume()
                .with_density(micro_density(rho))
        }
        CatalogId::ScatteringUncorr => {
            scaled(name, vec![line(), line(), half()], micro_coupling(0.0), vec![2, 2, 2]).with_density(micro_density(0.0))
        }
        CatalogId::ScatteringCorr { rho } => {
            scaled(name, vec![line(), line(), half()], micro_coupling(rho), vec![2, 2, 2]).with_density(micro_density(rho))
        }
        CatalogId::EmbeddedGaussian { l, a, b } => {
            let rho = embedded_rho(a, b);
            let mut coupling = DMatrix::zeros(2 * l, 2 * l);
            for j in 0..l {
                coupling[(j, j)] = 1.0;
                coupling[(l + j, l + j)] = 2.0;
                coupling[(j, l + j)] = rho;
                coupling[(l + j, j)] = rho;
            }
            let scale_of = (0..2 * l).map(|i| l + i % l).collect();
            let mut bounds = vec![line(); l];
            bounds.extend(vec![half(); l]);
            scaled(name, bounds, coupling, scale_of)
        }
        CatalogId::Gauss3du => scaled(name, vec![line(), half(), half()], diag(&[1.0, 2.0, 2.0]), vec![1, 1, 2])
            .with_density(gaussian_family(
                2,
                |th| DVector::from_column_slice(&[th[0], 0.0]),
                |th| cov2(th[1], th[2], 0.0),
            )),
        CatalogId::Gauss2du { big_sigma } => {
            let s2 = big_sigma * big_sigma;
            scaled(name, vec![line(), half()], diag(&[1.0, 4.0]), vec![1, 1]).with_density(gaussian_family(
                2,
                |th| DVector::from_column_slice(&[th[0], 0.0]),
                move |th| cov2(th[1], s2 / th[1], 0.0),
            ))
        }
        CatalogId::Gauss3dc { rho } => {
            let d = 1.0 - rho * rho;
            let r2 = rho * rho;
            let coupling = DMatrix::from_row_slice(
                3,
                3,
                &[1.0 / d, 0.0, 0.0, 0.0, (2.0 - r2) / d, -r2 / d, 0.0, -r2 / d, (2.0 - r2) / d],
            );
            scaled(name, vec![line(), half(), half()], coupling, vec![1, 1, 2]).with_density(gaussian_family(
                2,
                |th| DVector::from_column_slice(&[th[0], 0.0]),
                move |th| cov2(th[1], th[2], rho),
            ))
        }
        CatalogId::Gauss2dc { rho, big_sigma } => {
            let d = 1.0 - rho * rho;
            let s2 = big_sigma * big_sigma;
            scaled(name, vec![line(), half()], diag(&[1.0 / d, 4.0 / d]), vec![1, 1]).with_density(gaussian_family(
                2,
                |th| DVector::from_column_slice(&[th[0], 0.0]),
                move |th| cov2(th[1], s2 / th[1], rho),
            ))
        }
        CatalogId::Iho { ref omega } => {
            let omega_sq: Vec<f64> = omega.iter().map(|w| w * w).collect();
            let l = omega_sq.len();
            let accel_w = omega_sq.clone();
            let mut model = StatisticalModel::new(name, DomainBox::unbounded(l))
                .with_rule(MetricRule::Conformal {
                    omega_sq: omega_sq.clone(),
                })
                .with_flow(Flow::Newtonian(Arc::new(move |theta, _v, out| {
                    for k in 0..theta.len() {
                        out[k] = accel_w[k] * theta[k];
                    }
                })));
            if l == 1 {
                let w2 = omega_sq[0];
                model = model.with_volume(VolumeFactorization {
                    constant: 1.0,
                    factors: vec![Factor::General(Arc::new(move |x| (1.0 + 0.5 * w2 * x * x).sqrt()))],
                });
            }
            model
        }
        CatalogId::SpinIntegrable => scaled(name, vec![half(), half()], diag(&[1.0, 1.0]), vec![0, 1]).with_density(
            DensityFamily::new(
                2,
                |x, th| log_exponential(x[0], th[0]) + log_exponential(x[1], th[1]),
                |th| {
                    SampleMap::Product(vec![
                        Axis::HalfLine { scale: th[0], power: 1.0 },
                        Axis::HalfLine { scale: th[1], power: 1.0 },
                    ])
                },
            ),
        ),
        CatalogId::SpinChaotic => {
            scaled(name, vec![half(), line(), half()], diag(&[4.0, 1.0, 2.0]), vec![0, 2, 2]).with_density(
                DensityFamily::new(
                    2,
                    |x, th| {
                        // Rayleigh with mean μ′_A, then N(μ′_B, σ′_B²)
                        let s = th[0] * (2.0 / PI).sqrt();
                        let rayleigh = x[0].ln() - 2.0 * s.ln() - x[0] * x[0] / (2.0 * s * s);
                        let z = (x[1] - th[1]) / th[2];
                        rayleigh - 0.5 * z * z - th[2].ln() - 0.5 * (2.0 * PI).ln()
                    },
                    |th| {
                        SampleMap::Product(vec![
                            Axis::HalfLine {
                                scale: 2.0 * th[0] / PI.sqrt(),
                                power: 2.0,
                            },
                            Axis::Line {
                                center: th[1],
                                scale: th[2],
                            },
                        ])
                    },
                ),
            )
        }
    };
    Ok(model)
}

/// Embedded Gaussian with a user-supplied constraint `μ_{2j} = c(μ_{2j−1}, σ_{2j−1})`.
///
/// The macroscopic correlation is evaluated pointwise from central differences
/// of `c`, so the metric has no closed-form derivatives and no factorized volume.
pub fn embedded_gaussian_with(
    l: usize,
    constraint: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
) -> Result<StatisticalModel> {
    if !(1..=64).contains(&l) {
        return Err(Error::param("l", l as f64, "integer in [1, 64]"));
    }
    let c = Arc::new(constraint);
    let metric = move |th: &[f64]| {
        let mut g = DMatrix::zeros(2 * l, 2 * l);
        for j in 0..l {
            let (mu, sigma) = (th[j], th[l + j]);
            let hm = 1e-6 * mu.abs().max(1.0);
            let hs = 1e-6 * sigma;
            let a = (c(mu + hm, sigma) - c(mu - hm, sigma)) / (2.0 * hm);
            let b = (c(mu, sigma + hs) - c(mu, sigma - hs)) / (2.0 * hs);
            let rho = embedded_rho(a, b);
            let s2 = sigma * sigma;
            g[(j, j)] = 1.0 / s2;
            g[(l + j, l + j)] = 2.0 / s2;
            g[(j, l + j)] = rho / s2;
            g[(l + j, j)] = rho / s2;
        }
        g
    };
    let mut bounds = vec![line(); l];
    bounds.extend(vec![half(); l]);
    Ok(
        StatisticalModel::new(format!("embedded_gaussian(l={l}, custom)"), DomainBox::new(bounds)?).with_rule(
            MetricRule::Custom {
                metric: Arc::new(metric),
                derivative: None,
            },
        ),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::{metric_analytic, ParamPoint};

    fn g(id: CatalogId, theta: &[f64]) -> DMatrix<f64> {
        metric_analytic(&build(&id).unwrap(), &ParamPoint::new(theta.to_vec()))
            .unwrap()
            .components()
            .clone()
    }

    #[test]
    fn transcribed_line_elements() {
        assert_eq!(g(CatalogId::UncorrelatedGaussian { l: 1 }, &[0.0, 2.0]), diag(&[0.25, 0.5]));
        let b = g(CatalogId::BivariateCorr { rho: 0.6 }, &[0.0, 1.0]);
        assert!((b - diag(&[1.5625, 4.0])).amax() < 1e-15);
        assert_eq!(g(CatalogId::SpinIntegrable, &[2.0, 4.0]), diag(&[0.25, 1.0 / 16.0]));
        assert_eq!(g(CatalogId::SpinChaotic, &[2.0, 0.0, 2.0]), diag(&[1.0, 0.25, 0.5]));
    }

    #[test]
    fn trivariate_mean_information() {
        let rho: f64 = 0.3;
        let c1 = g(CatalogId::TrivariateCase1 { rho }, &[0.0, 1.0])[(0, 0)];
        let c2 = g(CatalogId::TrivariateCase2 { rho }, &[0.0, 1.0])[(0, 0)];
        let c3 = g(CatalogId::TrivariateCase3 { rho }, &[0.0, 1.0])[(0, 0)];
        assert!((c1 - (3.0 + rho) / (1.0 + rho)).abs() < 1e-13);
        assert!((c2 - (3.0 - 4.0 * rho) / (1.0 - 2.0 * rho * rho)).abs() < 1e-13);
        assert!((c3 - 3.0 / (1.0 + 2.0 * rho)).abs() < 1e-13);
    }

    #[test]
    fn reduced_models_coincide_without_correlation() {
        for th in [[0.3, 0.7], [-2.0, 4.0]] {
            assert_eq!(
                g(CatalogId::Gauss2dc { rho: 0.0, big_sigma: 1.3 }, &th),
                g(CatalogId::Gauss2du { big_sigma: 1.3 }, &th)
            );
        }
    }

    #[test]
    fn domain_violations_name_the_bound() {
        let err = build(&CatalogId::TrivariateCase2 { rho: 0.8 }).unwrap_err().to_string();
        assert!(err.contains("sqrt(2)/2"), "{err}");
        assert!(build(&CatalogId::TrivariateCase3 { rho: -0.6 }).is_err());
        assert!(build(&CatalogId::ScatteringCorr { rho: 1.0 }).is_err());
        assert!(build(&CatalogId::EmbeddedGaussian { l: 1, a: 1.0, b: -1.0 }).is_err());
        assert!(build(&CatalogId::Iho { omega: vec![] }).is_err());
    }

    #[test]
    fn parses_names_and_parameters() {
        let p = parse_params("omega=1;2").unwrap();
        let id = CatalogId::from_parts("iho", &p).unwrap();
        assert_eq!(id, CatalogId::Iho { omega: vec![1.0, 2.0] });
        assert_eq!(id.to_string(), "iho(omega=1;2)");
        assert!(CatalogId::from_parts("bivariate_corr", &Params::new()).is_err());
        assert!(CatalogId::from_parts("nope", &Params::new()).is_err());
        let extra = parse_params("rho=0.1,l=2").unwrap();
        assert!(CatalogId::from_parts("bivariate_corr", &extra).is_err());
        assert!(parse_params("rho").is_err());
    }

    #[test]
    fn default_embedding_correlation() {
        let rho = embedded_rho(1.0, 1.0);
        assert!((rho - 1.0 / (2f64.sqrt() * 2.5f64.sqrt())).abs() < 1e-15);
        let m = embedded_gaussian_with(1, |mu, sigma| mu + sigma).unwrap();
        let th = ParamPoint::new(vec![0.5, 1.5]);
        let custom = metric_analytic(&m, &th).unwrap();
        let linear = metric_analytic(&build(&CatalogId::EmbeddedGaussian { l: 1, a: 1.0, b: 1.0 }).unwrap(), &th).unwrap();
        assert!(custom.max_abs_diff(&linear) < 1e-8);
    }

    #[test]
    fn grids_include_both_ends() {
        let g = parse_grid("0:0.9:0.1").unwrap();
        assert_eq!(g.len(), 10);
        assert!((g[9] - 0.9).abs() < 1e-15);
        assert_eq!(parse_grid("0.5:0.5:0.1").unwrap(), vec![0.5]);
        assert!(parse_grid("1:0:0.1").is_err());
        assert!(parse_grid("0:1").is_err());
        assert!(ratio_family("f_micro").is_ok());
        assert!(ratio_family("nope").is_err());
    }

    #[test]
    fn every_entry_builds() {
        for e in CATALOG {
            let mut p = Params::new();
            for (k, _) in e.params {
                let v = match *k {
                    "l" => ParamValue::Number(2.0),
                    "omega" => ParamValue::List(vec![1.0, 2.0]),
                    "Sigma" | "a" | "b" => ParamValue::Number(1.0),
                    _ => ParamValue::Number(0.3),
                };
                p.insert(k.to_string(), v);
            }
            let id = CatalogId::from_parts(e.name, &p).unwrap();
            let m = build(&id).unwrap();
            assert!(m.dim() >= 2 || e.name == "iho");
        }
    }
}
