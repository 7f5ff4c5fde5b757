//! Asymptotic growth classification of complexity traces.

use std::fmt;

use serde::Serialize;

use crate::complexity::{least_squares, tail_window, ComplexityTrace};
use crate::error::{Error, Result};
use crate::table::fmt_num;

/// Minimum samples in the fit window.
pub const MIN_SAMPLES: usize = 20;
/// R² lead the winner needs over the runner-up.
pub const MARGIN: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Quantity {
    Volume,
    Igc,
    Ige,
}

impl Quantity {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "volume" | "V" => Ok(Quantity::Volume),
            "igc" | "C" => Ok(Quantity::Igc),
            "ige" | "S" => Ok(Quantity::Ige),
            _ => Err(Error::InvalidArgument(format!("unknown trace quantity {s:?}"))),
        }
    }

    pub fn of(self, trace: &ComplexityTrace) -> &[f64] {
        match self {
            Quantity::Volume => trace.volume(),
            Quantity::Igc => trace.igc(),
            Quantity::Ige => trace.ige(),
        }
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Quantity::Volume => "volume",
            Quantity::Igc => "igc",
            Quantity::Ige => "ige",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    /// `y = a·τ + b`
    Linear,
    /// `y = a·ln τ + b`
    Logarithmic,
    /// `ln y = a·τ + b`
    Exponential,
    /// `ln y = a·ln τ + b`
    PowerLaw,
    /// No candidate leads by [`MARGIN`].
    Ambiguous,
}

impl Regime {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(Regime::Linear),
            "logarithmic" => Ok(Regime::Logarithmic),
            "exponential" => Ok(Regime::Exponential),
            "power-law" | "power_law" => Ok(Regime::PowerLaw),
            "ambiguous" => Ok(Regime::Ambiguous),
            _ => Err(Error::InvalidArgument(format!("unknown regime {s:?}"))),
        }
    }

    /// Name of the leading coefficient.
    pub fn coefficient_name(self) -> &'static str {
        match self {
            Regime::Linear => "slope",
            Regime::Logarithmic => "coefficient",
            Regime::Exponential => "rate",
            Regime::PowerLaw => "exponent",
            Regime::Ambiguous => "coefficient",
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::Linear => "linear",
            Regime::Logarithmic => "logarithmic",
            Regime::Exponential => "exponential",
            Regime::PowerLaw => "power-law",
            Regime::Ambiguous => "ambiguous",
        })
    }
}

/// Regression of one candidate in its linearizing transform.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegimeFit {
    pub regime: Regime,
    pub coefficient: f64,
    pub intercept: f64,
    pub r2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthFit {
    pub quantity: Quantity,
    pub regime: Regime,
    /// Highest-R² candidate; its coefficients describe the regime.
    pub best: RegimeFit,
    pub runner_up: Option<RegimeFit>,
    pub candidates: Vec<RegimeFit>,
    pub window: (f64, f64),
    pub samples: usize,
}

impl GrowthFit {
    pub fn r2(&self) -> f64 {
        self.best.r2
    }

    pub fn coefficient(&self) -> f64 {
        self.best.coefficient
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("fit serializes")
    }
}

impl fmt::Display for GrowthFit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "regime={} {}={} intercept={} r2={} window=[{}, {}]",
            self.regime,
            self.best.regime.coefficient_name(),
            fmt_num(self.best.coefficient),
            fmt_num(self.best.intercept),
            fmt_num(self.best.r2),
            fmt_num(self.window.0),
            fmt_num(self.window.1),
        )?;
        if self.regime == Regime::Ambiguous {
            write!(f, " best={}", self.best.regime)?;
            if let Some(r) = &self.runner_up {
                write!(f, " runner_up={} runner_up_r2={}", r.regime, fmt_num(r.r2))?;
            }
        }
        Ok(())
    }
}

fn fit(regime: Regime, x: &[f64], y: &[f64]) -> RegimeFit {
    let (a, b) = least_squares(x, y);
    let my = y.iter().sum::<f64>() / y.len() as f64;
    let sst: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    let sse: f64 = x.iter().zip(y).map(|(x, y)| (y - a * x - b).powi(2)).sum();
    let r2 = if sst > 0.0 { (1.0 - sse / sst).clamp(0.0, 1.0) } else { 0.0 };
    RegimeFit {
        regime,
        coefficient: a,
        intercept: b,
        r2,
    }
}

/// Classifies samples `y(τ)` over the tail window.
///
/// Candidates needing `ln y` are skipped when some tail value is not positive.
pub fn classify_series(tau: &[f64], y: &[f64], tail: f64, quantity: Quantity) -> Result<GrowthFit> {
    if tau.len() != y.len() {
        return Err(Error::InvalidArgument("tau and values differ in length".into()));
    }
    let w = tail_window(tau.len(), tail, MIN_SAMPLES)?;
    let (t, v) = (&tau[w.clone()], &y[w]);
    if !v.iter().all(|x| x.is_finite()) {
        return Err(Error::DegenerateTrace(format!("{quantity} is not finite in the tail window")));
    }
    if !t.iter().all(|x| *x > 0.0) {
        return Err(Error::DegenerateTrace("tau must be positive in the tail window".into()));
    }
    if v.iter().all(|x| *x == v[0]) {
        return Err(Error::DegenerateTrace(format!("{quantity} is constant over the tail window")));
    }
    let log_t: Vec<f64> = t.iter().map(|x| x.ln()).collect();
    let mut candidates = vec![fit(Regime::Linear, t, v), fit(Regime::Logarithmic, &log_t, v)];
    if v.iter().all(|x| *x > 0.0) {
        let log_v: Vec<f64> = v.iter().map(|x| x.ln()).collect();
        candidates.push(fit(Regime::Exponential, t, &log_v));
        candidates.push(fit(Regime::PowerLaw, &log_t, &log_v));
    }
    let mut ranked = candidates.clone();
    ranked.sort_by(|a, b| b.r2.total_cmp(&a.r2));
    let best = ranked[0];
    let runner_up = ranked.get(1).copied();
    let regime = match runner_up {
        Some(r) if best.r2 - r.r2 < MARGIN => Regime::Ambiguous,
        _ => best.regime,
    };
    Ok(GrowthFit {
        quantity,
        regime,
        best,
        runner_up,
        candidates,
        window: (t[0], t[t.len() - 1]),
        samples: t.len(),
    })
}

/// Classifies the growth of one trace quantity over the last `tail` fraction of samples.
pub fn classify_growth(trace: &ComplexityTrace, quantity: Quantity, tail: f64) -> Result<GrowthFit> {
    classify_series(trace.tau(), quantity.of(trace), tail, quantity)
}
