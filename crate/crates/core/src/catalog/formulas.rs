//! Closed-form complexity ratios, asymptotics and scattering relations.

use crate::error::{Error, Result};

fn open(name: &str, x: f64, lo: f64, hi: f64, bound: &str) -> Result<()> {
    if x > lo && x < hi {
        Ok(())
    } else {
        Err(Error::param(name, x, bound))
    }
}

fn half_open(name: &str, x: f64, lo: f64, hi: f64, bound: &str) -> Result<()> {
    if x >= lo && x < hi {
        Ok(())
    } else {
        Err(Error::param(name, x, bound))
    }
}

fn positive(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::param(name, x, "must be positive"))
    }
}

/// Correlated over uncorrelated IGC, bivariate Gaussian: `√(1+ρ)`.
pub fn ratio_bivariate_strong(rho: f64) -> Result<f64> {
    open("rho", rho, -1.0, 1.0, "rho in (-1, 1)")?;
    Ok((1.0 + rho).sqrt())
}

/// Trivariate, single correlated pair: `√3·√((1+ρ)/(3+ρ))`.
pub fn ratio_trivariate_weak(rho: f64) -> Result<f64> {
    open("rho", rho, -1.0, 1.0, "rho in (-1, 1)")?;
    Ok(3f64.sqrt() * ((1.0 + rho) / (3.0 + rho)).sqrt())
}

/// Trivariate chain of correlations: `√3·√((1−2ρ²)/(3−4ρ))`.
pub fn ratio_trivariate_mildly_weak(rho: f64) -> Result<f64> {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    open("rho", rho, -r, r, "rho in (-sqrt(2)/2, sqrt(2)/2)")?;
    Ok(3f64.sqrt() * ((1.0 - 2.0 * rho * rho) / (3.0 - 4.0 * rho)).sqrt())
}

/// Trivariate, all pairs correlated: `√(1+2ρ)`.
pub fn ratio_trivariate_strong(rho: f64) -> Result<f64> {
    open("rho", rho, -0.5, 1.0, "rho in (-1/2, 1)")?;
    Ok((1.0 + 2.0 * rho).sqrt())
}

/// Fully connected trivariate over bivariate ratio: `√((1+2ρ)/(1+ρ))`.
pub fn ratio_3v2(rho: f64) -> Result<f64> {
    open("rho", rho, -0.5, 1.0, "rho in (-1/2, 1)")?;
    Ok(((1.0 + 2.0 * rho) / (1.0 + rho)).sqrt())
}

/// Asymptotic IGC compression factor of the microcorrelated 3D model.
pub fn f_micro(rho: f64) -> Result<f64> {
    half_open("rho", rho, 0.0, 1.0, "rho in [0, 1)")?;
    let r2 = rho * rho;
    let root = (4.0 * (4.0 - r2) / (2.0 - 2.0 * r2).powi(2)).sqrt();
    let a = (2.0 + rho) / (4.0 * (1.0 - r2));
    Ok(root * a.powf(-1.5) / 2f64.powf(2.5))
}

/// Post- over pre-collision IGC: `√((1−ρ)/(1+ρ))`.
pub fn scattering_igc_ratio(rho: f64) -> Result<f64> {
    half_open("rho", rho, 0.0, 1.0, "rho in [0, 1)")?;
    Ok(((1.0 - rho) / (1.0 + rho)).sqrt())
}

/// IGE shift due to correlation: `½ log((1−ρ)/(1+ρ))`.
pub fn scattering_ige_shift(rho: f64) -> Result<f64> {
    half_open("rho", rho, 0.0, 1.0, "rho in [0, 1)")?;
    Ok(0.5 * ((1.0 - rho) / (1.0 + rho)).ln())
}

/// IGC on the correlated scattering manifold.
pub fn scattering_igc_closed(tau: f64, rho: f64, lambda: f64) -> Result<f64> {
    positive("tau", tau)?;
    positive("lambda", lambda)?;
    let ratio = scattering_igc_ratio(rho)?;
    let lt = lambda * tau;
    Ok(8.0 / lambda * ratio * (-0.75 * lambda + 0.25 * lt.sinh() / tau + (0.5 * lt).tanh() / tau))
}

/// Post-collision IGE: `λτ − log(λτ) + ½ log((1−ρ)/(1+ρ))`.
pub fn scattering_ige_closed(tau: f64, rho: f64, lambda: f64) -> Result<f64> {
    positive("tau", tau)?;
    positive("lambda", lambda)?;
    let lt = lambda * tau;
    Ok(lt - lt.ln() + scattering_ige_shift(rho)?)
}

/// Wave-packet preparation and interaction parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatteringParams {
    /// Central wavenumber.
    pub k0: f64,
    /// Momentum dispersion.
    pub sigma_k0: f64,
    /// Initial separation.
    pub r0: f64,
    /// Potential range.
    pub l: f64,
    /// s-wave scattering length.
    pub a_s: f64,
}

impl ScatteringParams {
    fn check(&self) -> Result<()> {
        positive("k0", self.k0)?;
        if !(self.sigma_k0 >= 0.0 && self.sigma_k0.is_finite()) {
            return Err(Error::param("sigma_k0", self.sigma_k0, "must be non-negative"));
        }
        positive("r0", self.r0)?;
        positive("l", self.l)?;
        positive("a_s", self.a_s)
    }

    /// True when the perturbative conditions `k₀L ≪ 1`, `ρ_QM ≪ 1` hold (taken as ≤ 0.1).
    pub fn perturbative(&self) -> bool {
        self.k0 * self.l <= 0.1 && rho_qm(self).map(|r| r <= 0.1).unwrap_or(false)
    }
}

/// Purity of the post-collision state, with a flag telling whether the
/// parameters are inside the regime where the expansion holds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Purity {
    pub value: f64,
    pub perturbative: bool,
}

/// `1 − 4ρk₀²(2k₀² + σ_k₀²)R₀L³/3`.
pub fn purity(rho: f64, p: &ScatteringParams) -> Result<Purity> {
    half_open("rho", rho, 0.0, 1.0, "rho in [0, 1)")?;
    positive("k0", p.k0)?;
    positive("r0", p.r0)?;
    positive("l", p.l)?;
    if !(p.sigma_k0 >= 0.0) {
        return Err(Error::param("sigma_k0", p.sigma_k0, "must be non-negative"));
    }
    let k2 = p.k0 * p.k0;
    let value = 1.0 - 4.0 * rho * k2 * (2.0 * k2 + p.sigma_k0 * p.sigma_k0) * p.r0 * p.l.powi(3) / 3.0;
    Ok(Purity {
        value,
        perturbative: p.k0 * p.l <= 0.1 && rho <= 0.1,
    })
}

/// `√(8(2k₀² + σ_k₀²)R₀a_s)`, required to fall in `[0, 1)`.
pub fn rho_qm(p: &ScatteringParams) -> Result<f64> {
    p.check()?;
    let rho = (8.0 * (2.0 * p.k0 * p.k0 + p.sigma_k0 * p.sigma_k0) * p.r0 * p.a_s).sqrt();
    half_open("rho_qm", rho, 0.0, 1.0, "rho_qm in [0, 1)")?;
    Ok(rho)
}

/// Correlation recovered from IGCs: `(C_u² − C_c²)/(C_u² + C_c²)`.
pub fn rho_from_complexity(c_uncorr: f64, c_corr: f64) -> Result<f64> {
    positive("c_uncorr", c_uncorr)?;
    if !(c_corr >= 0.0 && c_corr.is_finite()) {
        return Err(Error::param("c_corr", c_corr, "must be non-negative"));
    }
    let (u, c) = (c_uncorr * c_uncorr, c_corr * c_corr);
    Ok((u - c) / (u + c))
}

/// `Δ(ρ) = 1 + 4ρ²`.
pub fn embedded_delta(rho: f64) -> f64 {
    1.0 + 4.0 * rho * rho
}

/// Components of the embedded-model IGE asymptotics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmbeddedTerms {
    pub delta: f64,
    pub alpha_plus: f64,
    pub alpha_minus: f64,
    pub sigma: f64,
    pub lambda1: f64,
    pub lambda2: f64,
}

pub fn embedded_terms(lambda: f64, xi: f64, rho: f64) -> Result<EmbeddedTerms> {
    // ρ = 0 makes Λ₂ singular
    open("rho", rho, 0.0, 1.0, "rho in (0, 1)")?;
    positive("lambda", lambda)?;
    positive("xi", xi)?;
    let delta = embedded_delta(rho);
    let sd = delta.sqrt();
    let alpha_plus = 0.5 * (3.0 + sd);
    let alpha_minus = 0.5 * (3.0 - sd);
    let sigma = -(xi / (4.0 * lambda)) * ((1.0 + sd) / (1.0 - sd)) * (2.0 * alpha_minus / alpha_plus).sqrt();
    let r2 = rho * rho;
    let lambda1 = 2.0 * rho * (2.0 - r2).sqrt() / (1.0 + sd);
    let lambda2 = (delta * (2.0 - r2)).sqrt() * sigma.ln() / (rho * lambda);
    Ok(EmbeddedTerms {
        delta,
        alpha_plus,
        alpha_minus,
        sigma,
        lambda1,
        lambda2,
    })
}

/// `l·log[Λ₁(ρ) + Λ₂(ρ,λ)/τ]`.
pub fn embedded_ige_closed(tau: f64, l: usize, lambda: f64, xi: f64, rho: f64) -> Result<f64> {
    positive("tau", tau)?;
    if l == 0 {
        return Err(Error::param("l", 0.0, "must be at least 1"));
    }
    let t = embedded_terms(lambda, xi, rho)?;
    let arg = t.lambda1 + t.lambda2 / tau;
    if !(arg > 0.0) {
        return Err(Error::param("tau", tau, format!("log argument {arg} must be positive")));
    }
    Ok(l as f64 * arg.ln())
}
