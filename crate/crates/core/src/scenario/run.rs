use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use super::{load_scenario, ClosedForm, Experiment, Scenario};
use crate::catalog::{self, CatalogId};
use crate::complexity::{igc, ComplexityTrace};
use crate::error::{Error, Result};
use crate::geodesic::{integrate_ivp, solve_bvp, squared_speed, BoundaryProblem, GeodesicPath};
use crate::growth::{classify_growth, GrowthFit, Quantity, MARGIN};
use crate::manifold::{metric_analytic, metric_of_density, Flow, ParamPoint, QuadratureSpec, StatisticalModel};
use crate::mre::{bayes_update, mre_update, GridPrior, MomentConstraint};
use crate::table::{self, fmt_num};

/// Overrides the default output directory.
pub const OUT_ENV: &str = "IGAC_OUT";
pub const DEFAULT_OUT_DIR: &str = "igac-out";

/// Outcome of one check, with what was measured and what was required.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Assertion {
    pub name: String,
    pub measured: String,
    pub bound: String,
    pub passed: bool,
}

impl Assertion {
    fn at_most(name: impl Into<String>, measured: f64, bound: f64) -> Self {
        Self {
            name: name.into(),
            measured: fmt_num(measured),
            bound: format!("<= {}", fmt_num(bound)),
            passed: measured <= bound,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub id: String,
    pub kind: &'static str,
    pub files: Vec<PathBuf>,
    pub fits: Vec<GrowthFit>,
    pub assertions: Vec<Assertion>,
    pub notes: Vec<String>,
    pub duration: Duration,
}

impl RunReport {
    pub fn passed(&self) -> bool {
        self.assertions.iter().all(|a| a.passed)
    }
}

/// Output directory: explicit choice, then `IGAC_OUT`, then the scenario's own, then the default.
pub fn out_dir(explicit: Option<&Path>, scenario: &Scenario) -> PathBuf {
    if let Some(p) = explicit {
        return p.to_path_buf();
    }
    if let Some(p) = std::env::var_os(OUT_ENV).filter(|p| !p.is_empty()) {
        return PathBuf::from(p);
    }
    scenario
        .out_dir
        .clone()
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR))
}

struct Run<'a> {
    scenario: &'a Scenario,
    out: &'a Path,
    report: RunReport,
}

impl Run<'_> {
    fn file(&mut self, suffix: &str) -> PathBuf {
        let p = self.out.join(format!("{}_{suffix}", self.scenario.id));
        self.report.files.push(p.clone());
        p
    }

    fn model(&self) -> Result<(CatalogId, StatisticalModel)> {
        let id = self
            .scenario
            .model
            .clone()
            .ok_or_else(|| Error::InvalidArgument("scenario has no model".into()))?;
        let m = catalog::build(&id).map_err(|e| e.at("build model"))?;
        Ok((id, m))
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|source| Error::Io {
            path: dir.to_path_buf(),
            source,
        })?;
    }
    std::fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Executes one validated scenario, writing its files under `out`.
pub fn run(scenario: &Scenario, out: &Path) -> Result<RunReport> {
    let start = Instant::now();
    let mut r = Run {
        scenario,
        out,
        report: RunReport {
            id: scenario.id.clone(),
            kind: scenario.experiment.kind(),
            files: Vec::new(),
            fits: Vec::new(),
            assertions: Vec::new(),
            notes: Vec::new(),
            duration: Duration::ZERO,
        },
    };
    match &scenario.experiment {
        Experiment::MetricCheck {
            points,
            seed,
            rel_tol,
            sample_box,
        } => metric_check(&mut r, *points, *seed, *rel_tol, sample_box.as_deref())?,
        Experiment::GeodesicIvp {
            theta0,
            v0,
            tau_max,
            speed_drift,
        } => geodesic_ivp(&mut r, theta0, v0, *tau_max, *speed_drift)?,
        Experiment::GeodesicBvp {
            theta0,
            theta1,
            span,
            expect_v0,
        } => geodesic_bvp(&mut r, theta0, theta1, *span, expect_v0.as_ref())?,
        Experiment::ComplexityTrace {
            theta0,
            v0,
            taus,
            expect,
            compare,
        } => complexity_trace(&mut r, theta0, v0, taus, expect, *compare)?,
        Experiment::RatioTable { families, grid } => ratio_table(&mut r, families, grid)?,
        Experiment::MreUpdate {
            grid,
            observable,
            mean,
            tol,
        } => mre(&mut r, grid, observable, *mean, *tol)?,
    }
    r.report.duration = start.elapsed();
    Ok(r.report)
}

fn default_box(model: &StatisticalModel) -> Vec<(f64, f64)> {
    model
        .domain()
        .bounds()
        .iter()
        .map(|&(lo, hi)| match (lo.is_finite(), hi.is_finite()) {
            (false, false) => (-2.0, 2.0),
            (true, false) => (lo + 0.5, lo + 3.0),
            (false, true) => (hi - 3.0, hi - 0.5),
            (true, true) => (lo + 0.1 * (hi - lo), hi - 0.1 * (hi - lo)),
        })
        .collect()
}

fn metric_check(r: &mut Run, points: usize, seed: u64, rel_tol: f64, sample_box: Option<&[(f64, f64)]>) -> Result<()> {
    let (_, model) = r.model()?;
    let bounds = sample_box.map(<[_]>::to_vec).unwrap_or_else(|| default_box(&model));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let quad = QuadratureSpec::default();
    let mut rows = Vec::with_capacity(points);
    let mut worst = 0.0f64;
    for i in 0..points {
        let theta: Vec<f64> = bounds.iter().map(|&(lo, hi)| rng.gen_range(lo..hi)).collect();
        let p = ParamPoint::new(theta.clone());
        let exact = metric_analytic(&model, &p).map_err(|e| e.at("analytic metric"))?;
        let numeric = metric_of_density(&model, &p, &quad).map_err(|e| e.at("numeric metric"))?;
        let err = numeric.relative_error(&exact);
        worst = worst.max(err);
        let mut row = vec![i as f64];
        row.extend(theta);
        row.push(err);
        rows.push(row);
    }
    let mut header = vec!["point".to_string()];
    header.extend((1..=model.dim()).map(|k| format!("theta_{k}")));
    header.push("rel_error".into());
    let path = r.file("metric.csv");
    table::write_csv(&path, &header, rows)?;
    r.report
        .assertions
        .push(Assertion::at_most("max relative metric error", worst, rel_tol));
    Ok(())
}

fn speed_drift(model: &StatisticalModel, path: &GeodesicPath) -> Result<f64> {
    let s0 = squared_speed(model, path, 0)?;
    let mut drift = 0.0f64;
    for i in 1..path.len() {
        drift = drift.max((squared_speed(model, path, i)? - s0).abs() / s0);
    }
    Ok(drift)
}

fn geodesic_ivp(r: &mut Run, theta0: &[f64], v0: &[f64], tau_max: f64, bound: f64) -> Result<()> {
    let (_, model) = r.model()?;
    let tol = r.scenario.settings.tol;
    let path = integrate_ivp(&model, &ParamPoint::new(theta0.to_vec()), v0, tau_max, tol)
        .map_err(|e| e.at("geodesic integration"))?;
    let file = r.file("path.csv");
    path.write_csv(&file)?;
    if path.truncated() {
        r.report
            .notes
            .push(format!("path reached the domain boundary at tau = {}", fmt_num(path.end())));
    }
    match model.flow() {
        Flow::LeviCivita => {
            let drift = speed_drift(&model, &path).map_err(|e| e.at("speed check"))?;
            r.report
                .assertions
                .push(Assertion::at_most("relative squared-speed drift", drift, bound));
        }
        Flow::Newtonian(_) => r
            .report
            .notes
            .push("prescribed flow: squared speed is not conserved and was not checked".into()),
    }
    Ok(())
}

fn geodesic_bvp(r: &mut Run, theta0: &[f64], theta1: &[f64], span: f64, expect: Option<&(Vec<f64>, f64)>) -> Result<()> {
    let (_, model) = r.model()?;
    let bp = BoundaryProblem::new(ParamPoint::new(theta0.to_vec()), ParamPoint::new(theta1.to_vec()), span)?;
    let path = solve_bvp(&model, &bp, r.scenario.settings.tol).map_err(|e| e.at("shooting"))?;
    let file = r.file("path.csv");
    path.write_csv(&file)?;
    let v = path.velocity(0).to_vec();
    r.report.notes.push(format!(
        "initial velocity [{}]",
        v.iter().map(|x| fmt_num(*x)).collect::<Vec<_>>().join(", ")
    ));
    if let Some((want, tol)) = expect {
        let err = v.iter().zip(want).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        r.report
            .assertions
            .push(Assertion::at_most("max |v0 - expected|", err, *tol));
    }
    Ok(())
}

fn closed_form_igc(form: ClosedForm, theta0: &[f64], v0: &[f64], tau: f64) -> f64 {
    match form {
        ClosedForm::SpinIntegrable => {
            let a = v0[0] / theta0[0];
            let b = v0[1] / theta0[1];
            (a * b).abs() * tau * tau / 3.0
        }
    }
}

fn regime_assertion(fit: Option<&GrowthFit>, e: &super::Expectation) -> Vec<Assertion> {
    let name = format!("regime({})", e.quantity);
    let Some(fit) = fit else {
        return vec![Assertion {
            name,
            measured: "no fit".into(),
            bound: e.regime.to_string(),
            passed: false,
        }];
    };
    let mut out = vec![Assertion {
        name,
        measured: format!("{} (best {} r2={})", fit.regime, fit.best.regime, fmt_num(fit.r2())),
        bound: format!("{} with R2 lead >= {MARGIN}", e.regime),
        passed: fit.regime == e.regime,
    }];
    // coefficients of the expected regime, even when another candidate won
    let cand = fit.candidates.iter().find(|c| c.regime == e.regime).copied();
    if let Some((want, rel)) = e.coefficient {
        let got = cand.map(|c| c.coefficient).unwrap_or(f64::NAN);
        out.push(Assertion {
            name: format!("{}({})", e.regime.coefficient_name(), e.quantity),
            measured: fmt_num(got),
            bound: format!("{} +/- {}%", fmt_num(want), rel * 100.0),
            passed: ((got - want) / want).abs() <= rel,
        });
    }
    if let Some(min) = e.min_r2 {
        let got = cand.map(|c| c.r2).unwrap_or(f64::NAN);
        out.push(Assertion {
            name: format!("r2({})", e.quantity),
            measured: fmt_num(got),
            bound: format!(">= {}", fmt_num(min)),
            passed: got >= min,
        });
    }
    if e.positive {
        let got = cand.map(|c| c.coefficient).unwrap_or(f64::NAN);
        out.push(Assertion {
            name: format!("{}({}) sign", e.regime.coefficient_name(), e.quantity),
            measured: fmt_num(got),
            bound: "> 0".into(),
            passed: got > 0.0,
        });
    }
    out
}

/// Text and JSON fit report for a trace.
pub(crate) fn fit_report(
    trace: &ComplexityTrace,
    tail: f64,
    comparison: &[(f64, f64, f64)],
) -> (String, serde_json::Value, Vec<(Quantity, Result<GrowthFit>)>) {
    let fits: Vec<(Quantity, Result<GrowthFit>)> = [Quantity::Volume, Quantity::Igc, Quantity::Ige]
        .into_iter()
        .map(|q| (q, classify_growth(trace, q, tail)))
        .collect();
    let mut text = String::new();
    let _ = writeln!(
        text,
        "model={} path={} s0={} tail={} reversed={}",
        trace.model,
        trace.path,
        fmt_num(trace.s0),
        fmt_num(tail),
        trace.reversed
    );
    let mut json_fits = serde_json::Map::new();
    for (q, f) in &fits {
        match f {
            Ok(f) => {
                let _ = writeln!(text, "{q}: {f}");
                json_fits.insert(q.to_string(), serde_json::to_value(f).expect("fit serializes"));
            }
            Err(e) => {
                let _ = writeln!(text, "{q}: {e}");
                json_fits.insert(q.to_string(), json!({ "error": e.to_string() }));
            }
        }
    }
    if !comparison.is_empty() {
        let _ = writeln!(text, "comparison igc:");
        for (tau, numeric, exact) in comparison {
            let _ = writeln!(
                text,
                "tau={} numeric={} closed_form={} delta={}",
                fmt_num(*tau),
                fmt_num(*numeric),
                fmt_num(*exact),
                fmt_num((numeric - exact).abs())
            );
        }
    }
    let json = json!({
        "model": trace.model,
        "path": trace.path,
        "s0": trace.s0,
        "tail": tail,
        "reversed": trace.reversed,
        "fits": json_fits,
        "comparison": comparison.iter().map(|(t, n, e)| json!({
            "tau": t, "numeric": n, "closed_form": e, "delta": (n - e).abs()
        })).collect::<Vec<_>>(),
    });
    (text, json, fits)
}

fn complexity_trace(
    r: &mut Run,
    theta0: &[f64],
    v0: &[f64],
    taus: &[f64],
    expect: &[super::Expectation],
    compare: Option<(ClosedForm, f64)>,
) -> Result<()> {
    let (_, model) = r.model()?;
    let settings = r.scenario.settings;
    let tau_max = settings.s0 + taus.last().copied().unwrap_or(1.0);
    let path = integrate_ivp(&model, &ParamPoint::new(theta0.to_vec()), v0, tau_max, settings.tol)
        .map_err(|e| e.at("geodesic integration"))?;
    let file = r.file("path.csv");
    path.write_csv(&file)?;
    let trace = igc(&model, &path, taus, settings.s0)
        .map_err(|e| e.at("complexity trace"))?
        .with_path_id(format!("{}_path", r.scenario.id));
    let file = r.file("trace.csv");
    trace.write_csv(&file)?;
    if trace.reversed {
        r.report
            .notes
            .push("a coordinate reversed direction; volumes use |d theta|".into());
    }

    let comparison: Vec<(f64, f64, f64)> = match compare {
        Some((form, _)) => trace
            .tau()
            .iter()
            .zip(trace.igc())
            .map(|(&t, &c)| (t, c, closed_form_igc(form, theta0, v0, t)))
            .collect(),
        None => Vec::new(),
    };
    let (text, json, fits) = fit_report(&trace, settings.tail, &comparison);
    let file = r.file("fit.txt");
    write_text(&file, &text)?;
    let file = r.file("fit.json");
    write_text(&file, &(serde_json::to_string_pretty(&json).expect("json") + "\n"))?;

    for e in expect {
        let fit = fits.iter().find(|(q, _)| *q == e.quantity).and_then(|(_, f)| f.as_ref().ok());
        r.report.assertions.extend(regime_assertion(fit, e));
    }
    if let Some((_, tol)) = compare {
        let worst = comparison
            .iter()
            .map(|(_, n, e)| ((n - e) / e).abs())
            .fold(0.0, f64::max);
        r.report
            .assertions
            .push(Assertion::at_most("max relative |igc - closed form|", worst, tol));
    }
    r.report.fits = fits.into_iter().filter_map(|(_, f)| f.ok()).collect();
    Ok(())
}

fn ratio_table(r: &mut Run, families: &[String], grid: &[f64]) -> Result<()> {
    for name in families {
        let f = catalog::ratio_family(name)?;
        let rows = grid
            .iter()
            .map(|&rho| Ok(vec![rho, f(rho).map_err(|e| e.at("ratio evaluation"))?]))
            .collect::<Result<Vec<_>>>()?;
        let path = r.file(&format!("ratio_{name}.csv"));
        table::write_csv(&path, &["rho".to_string(), "value".to_string()], rows)?;
    }
    Ok(())
}

fn mre(r: &mut Run, grid: &Path, observable: &str, mean: Option<f64>, tol: f64) -> Result<()> {
    let path = if grid.is_absolute() {
        grid.to_path_buf()
    } else {
        r.scenario.base_dir.join(grid)
    };
    let prior = GridPrior::from_csv(&path).map_err(|e| e.at("load grid prior"))?;
    let obs = prior.observable(observable)?;
    let constraint = mean.map(MomentConstraint::mean);
    let sol = match &constraint {
        Some(c) => mre_update(&prior, obs, Some(c), tol),
        None => bayes_update(&prior, obs),
    }
    .map_err(|e| e.at("update"))?;
    let rows = (0..prior.len()).map(|i| vec![prior.theta()[i], prior.prior()[i], sol.posterior[i]]);
    let file = r.file("posterior.csv");
    table::write_csv(
        &file,
        &["theta".to_string(), "prior".to_string(), "posterior".to_string()],
        rows,
    )?;
    r.report.notes.push(format!("beta={}", fmt_num(sol.beta)));
    if let (Some(target), Some(m)) = (mean, sol.moment) {
        r.report
            .assertions
            .push(Assertion::at_most("|posterior mean - target|", (m - target).abs(), tol));
    }
    Ok(())
}

/// Loads and runs one scenario file.
pub fn run_file(path: &Path, explicit_out: Option<&Path>) -> Result<RunReport> {
    let scenario = load_scenario(path)?;
    let out = out_dir(explicit_out, &scenario);
    run(&scenario, &out)
}

/// Runs a scenario file, or every `*.toml` in a directory on up to `workers` threads.
///
/// Results come back in file-name order.
pub fn run_path(path: &Path, explicit_out: Option<&Path>, workers: usize) -> Result<Vec<(PathBuf, Result<RunReport>)>> {
    let files = if path.is_dir() {
        let mut files: Vec<PathBuf> = std::fs::read_dir(path)
            .map_err(|source| Error::Io {
                path: path.to_path_buf(),
                source,
            })?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|e| e == "toml"))
            .collect();
        files.sort();
        files
    } else {
        vec![path.to_path_buf()]
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidArgument(format!("cannot start workers: {e}")))?;
    Ok(pool.install(|| {
        files
            .par_iter()
            .map(|f| (f.clone(), run_file(f, explicit_out)))
            .collect()
    }))
}
