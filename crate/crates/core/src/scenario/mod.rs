//! Declarative experiment files: one TOML scenario per file.
//!
//! ```toml
//! kind = "complexity_trace"
//!
//! [model]
//! name = "spin_integrable"
//!
//! [geodesic]
//! theta0 = [1.0, 1.0]
//! v0 = [1.0, 2.0]
//!
//! [tau]
//! start = 1.0
//! stop = 20.0
//! count = 100
//!
//! [[expect]]
//! quantity = "ige"
//! regime = "logarithmic"
//! ```

mod run;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::catalog::{self, CatalogId, ParamValue, Params};
use crate::error::{Error, Result};
use crate::geodesic::DEFAULT_TOL;
use crate::growth::{Quantity, Regime};

pub use run::{out_dir, run, run_file, run_path, Assertion, RunReport, DEFAULT_OUT_DIR, OUT_ENV};

pub const DEFAULT_TAIL: f64 = 0.5;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Raw {
    id: Option<String>,
    kind: String,
    out_dir: Option<PathBuf>,
    description: Option<String>,
    model: Option<RawModel>,
    settings: Option<RawSettings>,
    geodesic: Option<RawGeodesic>,
    tau: Option<RawTau>,
    metric_check: Option<RawMetricCheck>,
    ratios: Option<RawRatios>,
    mre: Option<RawMre>,
    compare: Option<RawCompare>,
    #[serde(default)]
    expect: Vec<RawExpect>,
}

#[derive(Debug, Deserialize)]
struct RawModel {
    name: String,
    #[serde(flatten)]
    params: BTreeMap<String, toml::Value>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSettings {
    tol: Option<f64>,
    s0: Option<f64>,
    tail: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGeodesic {
    theta0: Option<Vec<f64>>,
    v0: Option<Vec<f64>>,
    tau_max: Option<f64>,
    theta1: Option<Vec<f64>>,
    span: Option<f64>,
    expect_v0: Option<Vec<f64>>,
    v0_tol: Option<f64>,
    speed_drift: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTau {
    start: Option<f64>,
    stop: Option<f64>,
    count: Option<usize>,
    values: Option<Vec<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMetricCheck {
    points: Option<usize>,
    seed: Option<u64>,
    rel_tol: Option<f64>,
    #[serde(rename = "box")]
    sample_box: Option<Vec<[f64; 2]>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRatios {
    families: Vec<String>,
    grid: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMre {
    grid: PathBuf,
    observable: String,
    mean: Option<f64>,
    tol: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCompare {
    closed_form: String,
    rel_tol: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawExpect {
    quantity: String,
    regime: String,
    coefficient: Option<f64>,
    rel_tol: Option<f64>,
    min_r2: Option<f64>,
    positive: Option<bool>,
}

/// Numeric settings shared by the geodesic experiments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Settings {
    pub tol: f64,
    pub s0: f64,
    pub tail: f64,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            s0: 0.0,
            tail: DEFAULT_TAIL,
        }
    }
}

/// Expected growth of one trace quantity.
#[derive(Debug, Clone, PartialEq)]
pub struct Expectation {
    pub quantity: Quantity,
    pub regime: Regime,
    /// Leading coefficient and relative tolerance.
    pub coefficient: Option<(f64, f64)>,
    pub min_r2: Option<f64>,
    /// Require a positive leading coefficient.
    pub positive: bool,
}

/// Exact traces available for comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClosedForm {
    /// `C(τ) = |a b| τ²/3` along `μ = μ₀ exp((v/μ₀) τ)`.
    SpinIntegrable,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Experiment {
    MetricCheck {
        points: usize,
        seed: u64,
        rel_tol: f64,
        sample_box: Option<Vec<(f64, f64)>>,
    },
    GeodesicIvp {
        theta0: Vec<f64>,
        v0: Vec<f64>,
        tau_max: f64,
        speed_drift: f64,
    },
    GeodesicBvp {
        theta0: Vec<f64>,
        theta1: Vec<f64>,
        span: f64,
        expect_v0: Option<(Vec<f64>, f64)>,
    },
    ComplexityTrace {
        theta0: Vec<f64>,
        v0: Vec<f64>,
        taus: Vec<f64>,
        expect: Vec<Expectation>,
        compare: Option<(ClosedForm, f64)>,
    },
    RatioTable {
        families: Vec<String>,
        grid: Vec<f64>,
    },
    MreUpdate {
        grid: PathBuf,
        observable: String,
        mean: Option<f64>,
        tol: f64,
    },
}

impl Experiment {
    pub fn kind(&self) -> &'static str {
        match self {
            Experiment::MetricCheck { .. } => "metric_check",
            Experiment::GeodesicIvp { .. } => "geodesic_ivp",
            Experiment::GeodesicBvp { .. } => "geodesic_bvp",
            Experiment::ComplexityTrace { .. } => "complexity_trace",
            Experiment::RatioTable { .. } => "ratio_table",
            Experiment::MreUpdate { .. } => "mre_update",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub id: String,
    pub description: Option<String>,
    pub model: Option<CatalogId>,
    pub settings: Settings,
    pub experiment: Experiment,
    pub out_dir: Option<PathBuf>,
    /// Directory relative paths inside the scenario resolve against.
    pub base_dir: PathBuf,
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

fn param_value(key: &str, v: &toml::Value, errors: &mut Vec<String>) -> Option<ParamValue> {
    let num = |v: &toml::Value| match v {
        toml::Value::Float(x) => Some(*x),
        toml::Value::Integer(i) => Some(*i as f64),
        _ => None,
    };
    match v {
        toml::Value::Array(items) => match items.iter().map(num).collect::<Option<Vec<_>>>() {
            Some(list) => Some(ParamValue::List(list)),
            None => {
                errors.push(format!("model.{key}: expected numbers"));
                None
            }
        },
        other => match num(other) {
            Some(x) => Some(ParamValue::Number(x)),
            None => {
                errors.push(format!("model.{key}: expected a number or an array of numbers"));
                None
            }
        },
    }
}

fn positive(errors: &mut Vec<String>, field: &str, x: f64) -> f64 {
    if !(x > 0.0 && x.is_finite()) {
        errors.push(format!("{field}: must be positive, got {x}"));
    }
    x
}

/// Parses and validates scenario text. `default_id` names scenarios without an `id`.
pub fn parse_scenario(text: &str, default_id: &str) -> Result<Scenario> {
    let raw: Raw = toml::from_str(text).map_err(|e| Error::ScenarioParse {
        line: e.span().map(|s| line_of(text, s.start)).unwrap_or(0),
        message: e.message().to_string(),
    })?;
    let mut errors = Vec::new();

    let id = raw.id.clone().unwrap_or_else(|| default_id.to_string());
    if id.is_empty() || !id.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
        errors.push(format!("id: {id:?} must be non-empty and use only letters, digits, '_' or '-'"));
    }

    let model = raw.model.as_ref().and_then(|m| {
        let mut params = Params::new();
        for (k, v) in &m.params {
            if let Some(p) = param_value(k, v, &mut errors) {
                params.insert(k.clone(), p);
            }
        }
        match CatalogId::from_parts(&m.name, &params) {
            Ok(id) => Some(id),
            Err(e) => {
                errors.push(format!("model: {e}"));
                None
            }
        }
    });

    let mut settings = Settings::default();
    if let Some(s) = &raw.settings {
        if let Some(t) = s.tol {
            settings.tol = positive(&mut errors, "settings.tol", t);
        }
        if let Some(s0) = s.s0 {
            if !(s0 >= 0.0 && s0.is_finite()) {
                errors.push(format!("settings.s0: must be nonnegative, got {s0}"));
            }
            settings.s0 = s0;
        }
        if let Some(t) = s.tail {
            if !(t > 0.0 && t <= 1.0) {
                errors.push(format!("settings.tail: must lie in (0, 1], got {t}"));
            }
            settings.tail = t;
        }
    }

    let needs_model = matches!(
        raw.kind.as_str(),
        "metric_check" | "geodesic_ivp" | "geodesic_bvp" | "complexity_trace"
    );
    if needs_model && raw.model.is_none() {
        errors.push(format!("model: required for {}", raw.kind));
    }
    let dim = model.as_ref().and_then(|m| catalog::build(m).ok()).map(|m| m.dim());

    let geo = raw.geodesic.as_ref();
    let vector = |name: &str, v: Option<&Vec<f64>>, errors: &mut Vec<String>| -> Vec<f64> {
        match v {
            None => {
                errors.push(format!("geodesic.{name}: required for {}", raw.kind));
                Vec::new()
            }
            Some(v) => {
                if let Some(n) = dim {
                    if v.len() != n {
                        errors.push(format!("geodesic.{name}: expected {n} entries, got {}", v.len()));
                    }
                }
                if !v.iter().all(|x| x.is_finite()) {
                    errors.push(format!("geodesic.{name}: entries must be finite"));
                }
                v.clone()
            }
        }
    };

    let experiment = match raw.kind.as_str() {
        "metric_check" => {
            let mc = raw.metric_check.as_ref();
            if let Some(m) = &model {
                if catalog::build(m).map(|m| m.density().is_none()).unwrap_or(false) {
                    errors.push(format!("model: {} has no density family to check against", m.name()));
                }
            }
            let sample_box = mc.and_then(|m| m.sample_box.as_ref()).map(|b| {
                if let Some(n) = dim {
                    if b.len() != n {
                        errors.push(format!("metric_check.box: expected {n} intervals, got {}", b.len()));
                    }
                }
                if b.iter().any(|[lo, hi]| !(lo < hi)) {
                    errors.push("metric_check.box: every interval needs lower < upper".into());
                }
                b.iter().map(|[lo, hi]| (*lo, *hi)).collect()
            });
            Experiment::MetricCheck {
                points: mc.and_then(|m| m.points).unwrap_or(20),
                seed: mc.and_then(|m| m.seed).unwrap_or(0),
                rel_tol: positive(
                    &mut errors,
                    "metric_check.rel_tol",
                    mc.and_then(|m| m.rel_tol).unwrap_or(1e-6),
                ),
                sample_box,
            }
        }
        "geodesic_ivp" => {
            let theta0 = vector("theta0", geo.and_then(|g| g.theta0.as_ref()), &mut errors);
            let v0 = vector("v0", geo.and_then(|g| g.v0.as_ref()), &mut errors);
            let tau_max = match geo.and_then(|g| g.tau_max) {
                Some(t) => positive(&mut errors, "geodesic.tau_max", t),
                None => {
                    errors.push("geodesic.tau_max: required for geodesic_ivp".into());
                    1.0
                }
            };
            Experiment::GeodesicIvp {
                theta0,
                v0,
                tau_max,
                speed_drift: positive(
                    &mut errors,
                    "geodesic.speed_drift",
                    geo.and_then(|g| g.speed_drift).unwrap_or(1e-8),
                ),
            }
        }
        "geodesic_bvp" => {
            let theta0 = vector("theta0", geo.and_then(|g| g.theta0.as_ref()), &mut errors);
            let theta1 = vector("theta1", geo.and_then(|g| g.theta1.as_ref()), &mut errors);
            let span = positive(&mut errors, "geodesic.span", geo.and_then(|g| g.span).unwrap_or(1.0));
            let expect_v0 = geo.and_then(|g| g.expect_v0.as_ref()).map(|v| {
                let v = vector("expect_v0", Some(v), &mut errors);
                let tol = positive(
                    &mut errors,
                    "geodesic.v0_tol",
                    geo.and_then(|g| g.v0_tol).unwrap_or(1e-6),
                );
                (v, tol)
            });
            Experiment::GeodesicBvp {
                theta0,
                theta1,
                span,
                expect_v0,
            }
        }
        "complexity_trace" => {
            let theta0 = vector("theta0", geo.and_then(|g| g.theta0.as_ref()), &mut errors);
            let v0 = vector("v0", geo.and_then(|g| g.v0.as_ref()), &mut errors);
            let taus = match &raw.tau {
                None => {
                    errors.push("tau: a grid (start, stop, count) or values is required".into());
                    Vec::new()
                }
                Some(t) => match (&t.values, t.start, t.stop, t.count) {
                    (Some(v), None, None, None) => v.clone(),
                    (None, Some(a), Some(b), Some(n)) if n >= 2 => {
                        (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
                    }
                    _ => {
                        errors.push("tau: give either values, or start, stop and count >= 2".into());
                        Vec::new()
                    }
                },
            };
            if !taus.is_empty() && (!(taus[0] > 0.0) || taus.windows(2).any(|w| !(w[1] > w[0]))) {
                errors.push("tau: values must be positive and strictly increasing".into());
            }
            let expect = raw
                .expect
                .iter()
                .enumerate()
                .filter_map(|(i, e)| {
                    let quantity = Quantity::parse(&e.quantity)
                        .map_err(|err| errors.push(format!("expect[{i}].quantity: {err}")))
                        .ok()?;
                    let regime = Regime::parse(&e.regime)
                        .map_err(|err| errors.push(format!("expect[{i}].regime: {err}")))
                        .ok()?;
                    let coefficient = e.coefficient.map(|c| {
                        (
                            c,
                            positive(&mut errors, &format!("expect[{i}].rel_tol"), e.rel_tol.unwrap_or(0.05)),
                        )
                    });
                    Some(Expectation {
                        quantity,
                        regime,
                        coefficient,
                        min_r2: e.min_r2,
                        positive: e.positive.unwrap_or(false),
                    })
                })
                .collect();
            let compare = raw.compare.as_ref().and_then(|c| {
                let tol = positive(&mut errors, "compare.rel_tol", c.rel_tol.unwrap_or(1e-6));
                match (c.closed_form.as_str(), &model) {
                    ("spin_integrable", Some(CatalogId::SpinIntegrable)) => Some((ClosedForm::SpinIntegrable, tol)),
                    (name, _) => {
                        errors.push(format!("compare.closed_form: {name:?} is not available for this model"));
                        None
                    }
                }
            });
            Experiment::ComplexityTrace {
                theta0,
                v0,
                taus,
                expect,
                compare,
            }
        }
        "ratio_table" => match &raw.ratios {
            None => {
                errors.push("ratios: families and grid are required for ratio_table".into());
                Experiment::RatioTable {
                    families: Vec::new(),
                    grid: Vec::new(),
                }
            }
            Some(r) => {
                for f in &r.families {
                    if let Err(e) = catalog::ratio_family(f) {
                        errors.push(format!("ratios.families: {e}"));
                    }
                }
                let grid = catalog::parse_grid(&r.grid).unwrap_or_else(|e| {
                    errors.push(format!("ratios.grid: {e}"));
                    Vec::new()
                });
                Experiment::RatioTable {
                    families: r.families.clone(),
                    grid,
                }
            }
        },
        "mre_update" => match &raw.mre {
            None => {
                errors.push("mre: grid and observable are required for mre_update".into());
                Experiment::MreUpdate {
                    grid: PathBuf::new(),
                    observable: String::new(),
                    mean: None,
                    tol: 1e-12,
                }
            }
            Some(m) => Experiment::MreUpdate {
                grid: m.grid.clone(),
                observable: m.observable.clone(),
                mean: m.mean,
                tol: positive(&mut errors, "mre.tol", m.tol.unwrap_or(1e-12)),
            },
        },
        other => {
            errors.push(format!(
                "kind: unknown experiment {other:?}; expected metric_check, geodesic_ivp, geodesic_bvp, \
                 complexity_trace, ratio_table or mre_update"
            ));
            Experiment::RatioTable {
                families: Vec::new(),
                grid: Vec::new(),
            }
        }
    };

    if !errors.is_empty() {
        return Err(Error::ScenarioInvalid(errors));
    }
    Ok(Scenario {
        id,
        description: raw.description,
        model,
        settings,
        experiment,
        out_dir: raw.out_dir,
        base_dir: PathBuf::from("."),
    })
}

/// Reads and validates a scenario file; its stem is the default id.
pub fn load_scenario(path: &Path) -> Result<Scenario> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("scenario");
    let mut s = parse_scenario(&text, stem)?;
    s.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
kind = "complexity_trace"
[model]
name = "spin_integrable"
[geodesic]
theta0 = [1.0, 1.0]
v0 = [1.0, 2.0]
[tau]
start = 1.0
stop = 5.0
count = 5
"#;

    #[test]
    fn defaults_are_filled() {
        let s = parse_scenario(MINIMAL, "min").unwrap();
        assert_eq!(s.id, "min");
        assert_eq!(s.settings, Settings::default());
        assert_eq!(s.settings.tol, 1e-10);
        assert_eq!(s.settings.tail, 0.5);
        match s.experiment {
            Experiment::ComplexityTrace { taus, .. } => assert_eq!(taus, vec![1.0, 2.0, 3.0, 4.0, 5.0]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn domain_violation_names_the_bound() {
        let text = "kind = \"metric_check\"\n[model]\nname = \"trivariate_case2\"\nrho = 0.8\n";
        let err = parse_scenario(text, "x").unwrap_err().to_string();
        assert!(err.contains("sqrt(2)/2"), "{err}");
    }

    #[test]
    fn missing_velocity_is_reported() {
        let text = "kind = \"geodesic_ivp\"\n[model]\nname = \"spin_integrable\"\n[geodesic]\ntheta0 = [1.0, 1.0]\ntau_max = 1.0\n";
        match parse_scenario(text, "x") {
            Err(Error::ScenarioInvalid(errs)) => assert!(errs.iter().any(|e| e.contains("geodesic.v0")), "{errs:?}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn syntax_errors_carry_a_line() {
        let text = "kind = \"ratio_table\"\n\n[ratios]\nfamilies = [\"f_micro\"\ngrid = 3\n";
        match parse_scenario(text, "x") {
            Err(Error::ScenarioParse { line, .. }) => assert!(line >= 4, "{line}"),
            other => panic!("{other:?}"),
        }
        let unknown = "kind = \"ratio_table\"\nbogus = 1\n";
        assert!(matches!(parse_scenario(unknown, "x"), Err(Error::ScenarioParse { line: 2, .. })));
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let text = MINIMAL.replace("v0 = [1.0, 2.0]", "v0 = [1.0]");
        assert!(matches!(parse_scenario(&text, "x"), Err(Error::ScenarioInvalid(_))));
    }
}
