//! Statistical volumes along geodesics, the IGC, the IGE and the KS analogue.

use std::cell::Cell;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geodesic::GeodesicPath;
use crate::manifold::{Factor, StatisticalModel, VolumeFactorization};
use crate::quadrature::{adaptive_gk, gauss_legendre, Rule};
use crate::table;

const PANEL_ORDER: usize = 8;
const TURN_SAMPLES: usize = 4;
const BOX_REL_TOL: f64 = 1e-10;
const BOX_MAX_INTERVALS: usize = 200;

/// One coordinate's monotone pieces from `s0` on: times, coordinate values and
/// the accumulated variation of the volume measure up to each anchor.
#[derive(Debug, Clone)]
struct Anchors {
    t: Vec<f64>,
    theta: Vec<f64>,
    cum: Vec<f64>,
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl Anchors {
    fn locate(&self, t: f64) -> usize {
        self.t.partition_point(|&a| a <= t).saturating_sub(1)
    }
}

/// Precomputed volume data for one path and base point `s0`.
///
/// Building it costs one pass over the path; afterwards `V(s)` is cheap, which
/// is what the IGC needs.
pub struct VolumeProfile<'a> {
    model: &'a StatisticalModel,
    path: &'a GeodesicPath,
    s0: f64,
    active: Vec<usize>,
    anchors: Vec<Anchors>,
    reversed: bool,
}

impl<'a> VolumeProfile<'a> {
    pub fn new(model: &'a StatisticalModel, path: &'a GeodesicPath, s0: f64) -> Result<Self> {
        if path.dim() != model.dim() {
            return Err(Error::DimensionMismatch {
                expected: model.dim(),
                got: path.dim(),
            });
        }
        if !(s0 >= path.start() && s0 <= path.end()) {
            return Err(Error::PathTooShort {
                start: path.start(),
                end: path.end(),
                from: s0,
                to: s0,
            });
        }
        // a coordinate with zero velocity at every knot never moves; its factor is 1
        let active: Vec<usize> = (0..path.dim())
            .filter(|&k| (0..path.len()).any(|i| path.velocity(i)[k] != 0.0))
            .collect();
        let mut reversed = false;
        let mut anchors = Vec::with_capacity(active.len());
        for &k in &active {
            let (a, turned) = build_anchors(model, path, s0, k)?;
            reversed |= turned;
            anchors.push(a);
        }
        Ok(Self {
            model,
            path,
            s0,
            active,
            anchors,
            reversed,
        })
    }

    /// True when some active coordinate reverses direction after `s0`.
    pub fn reversed(&self) -> bool {
        self.reversed
    }

    pub fn s0(&self) -> f64 {
        self.s0
    }

    /// Largest `s` for which `V(s)` is defined.
    pub fn reach(&self) -> f64 {
        self.path.end() - self.s0
    }

    /// Volume `V(s)` of the region swept between `s0` and `s0 + s`.
    pub fn volume(&self, s: f64) -> Result<f64> {
        if !(s >= 0.0 && s <= self.reach()) {
            return Err(Error::PathTooShort {
                start: self.path.start(),
                end: self.path.end(),
                from: self.s0,
                to: self.s0 + s,
            });
        }
        let t = self.s0 + s;
        let theta = self.path.theta_at(t)?;
        let v = match self.model.volume() {
            Some(vf) => {
                let mut prod = vf.constant;
                for (a, &k) in self.anchors.iter().zip(&self.active) {
                    let j = a.locate(t);
                    prod *= a.cum[j] + measure(vf, k, a.theta[j], theta[k])?.abs();
                }
                prod
            }
            None => {
                let mut lo = theta.clone();
                let mut hi = theta.clone();
                for (a, &k) in self.anchors.iter().zip(&self.active) {
                    let j = a.locate(t);
                    lo[k] = a.lo[j].min(theta[k]);
                    hi[k] = a.hi[j].max(theta[k]);
                }
                box_volume(self.model, &self.active, &lo, &hi, theta)?
            }
        };
        if !v.is_finite() {
            return Err(Error::NonFiniteIntegrand(s));
        }
        Ok(v)
    }
}

/// `∫_a^b √g_κ(x) dx`.
fn measure(vf: &VolumeFactorization, k: usize, a: f64, b: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let factor = &vf.factors[k];
    let v = match factor.antiderivative_diff(a, b) {
        Some(v) => v,
        None => {
            let f: &Factor = factor;
            adaptive_gk(|x| f.eval(x), a, b, 1e-12, 0.0, 500)?
        }
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFiniteIntegrand(a))
    }
}

fn velocity_at(path: &GeodesicPath, t: f64, k: usize) -> Result<f64> {
    Ok(path.state_at(t)?.1[k])
}

/// Zeros of `θ̇_k` strictly inside `(a, b)`, by sampling and bisection.
fn turning_points(path: &GeodesicPath, a: f64, b: f64, k: usize, out: &mut Vec<f64>) -> Result<()> {
    let mut prev_t = a;
    let mut prev_v = velocity_at(path, a, k)?;
    for i in 1..=TURN_SAMPLES {
        let t = if i == TURN_SAMPLES {
            b
        } else {
            a + (b - a) * i as f64 / TURN_SAMPLES as f64
        };
        let v = velocity_at(path, t, k)?;
        if prev_v * v < 0.0 {
            let (mut lo, mut hi, mut vlo) = (prev_t, t, prev_v);
            for _ in 0..100 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                let vm = velocity_at(path, mid, k)?;
                if vm == 0.0 {
                    lo = mid;
                    hi = mid;
                    break;
                }
                if (vm < 0.0) == (vlo < 0.0) {
                    lo = mid;
                    vlo = vm;
                } else {
                    hi = mid;
                }
            }
            out.push(0.5 * (lo + hi));
        } else if v == 0.0 && i < TURN_SAMPLES {
            out.push(t);
        }
        prev_t = t;
        prev_v = v;
    }
    Ok(())
}

fn build_anchors(model: &StatisticalModel, path: &GeodesicPath, s0: f64, k: usize) -> Result<(Anchors, bool)> {
    let mut times = vec![s0];
    times.extend(path.taus().filter(|&t| t > s0));
    let mut all = Vec::with_capacity(times.len());
    let mut turned = false;
    let mut turns = Vec::new();
    for w in times.windows(2) {
        all.push(w[0]);
        turns.clear();
        turning_points(path, w[0], w[1], k, &mut turns)?;
        turned |= !turns.is_empty();
        all.extend(turns.iter().copied().filter(|&t| t > w[0] && t < w[1]));
    }
    all.push(*times.last().unwrap());

    let mut a = Anchors {
        t: Vec::with_capacity(all.len()),
        theta: Vec::with_capacity(all.len()),
        cum: Vec::with_capacity(all.len()),
        lo: Vec::with_capacity(all.len()),
        hi: Vec::with_capacity(all.len()),
    };
    for t in all {
        let x = path.theta_at(t)?[k];
        match a.theta.last().copied() {
            None => {
                a.cum.push(0.0);
                a.lo.push(x);
                a.hi.push(x);
            }
            Some(prev) => {
                let step = match model.volume() {
                    Some(vf) => measure(vf, k, prev, x)?.abs(),
                    None => 0.0,
                };
                a.cum.push(a.cum.last().unwrap() + step);
                a.lo.push(a.lo.last().unwrap().min(x));
                a.hi.push(a.hi.last().unwrap().max(x));
            }
        }
        a.t.push(t);
        a.theta.push(x);
    }
    Ok((a, turned))
}

/// `∫ √det g` over the box `[lo, hi]` in the active coordinates, the others held at `theta`.
fn box_volume(model: &StatisticalModel, active: &[usize], lo: &[f64], hi: &[f64], mut theta: Vec<f64>) -> Result<f64> {
    if active.iter().any(|&k| lo[k] == hi[k]) {
        return Ok(0.0);
    }
    nested(model, active, lo, hi, &mut theta)
}

fn nested(model: &StatisticalModel, active: &[usize], lo: &[f64], hi: &[f64], theta: &mut Vec<f64>) -> Result<f64> {
    let Some((&k, rest)) = active.split_first() else {
        return model.volume_density(theta);
    };
    let failure: Cell<Option<Error>> = Cell::new(None);
    let point = std::cell::RefCell::new(std::mem::take(theta));
    let v = adaptive_gk(
        |x| {
            let mut p = point.borrow_mut();
            p[k] = x;
            match nested(model, rest, lo, hi, &mut p) {
                Ok(v) => v,
                Err(e) => {
                    failure.set(Some(e));
                    f64::NAN
                }
            }
        },
        lo[k],
        hi[k],
        BOX_REL_TOL,
        0.0,
        BOX_MAX_INTERVALS,
    );
    *theta = point.into_inner();
    if let Some(e) = failure.take() {
        return Err(e);
    }
    v
}

/// Volume of the region swept by the geodesic between `s0` and `s0 + s`.
///
/// Factorizing metrics use `Π_κ ∫ √g_κ |dθ^κ|` along the path; the others
/// integrate `√det g` over the bounding box of the segment.
pub fn volume_at(model: &StatisticalModel, path: &GeodesicPath, s: f64, s0: f64) -> Result<f64> {
    if !(s >= 0.0) || s0 + s > path.end() {
        return Err(Error::PathTooShort {
            start: path.start(),
            end: path.end(),
            from: s0,
            to: s0 + s,
        });
    }
    VolumeProfile::new(model, path, s0)?.volume(s)
}

/// `C(τ) = (1/τ)∫_0^τ V(s) ds` at each τ of an increasing grid.
///
/// The integral is accumulated with Gauss-Legendre panels split at every grid
/// point and at every entry of `breaks`, so polynomial `V` of degree ≤ 15 on
/// each panel is integrated exactly.
pub fn average_volume(
    mut volume: impl FnMut(f64) -> Result<f64>,
    taus: &[f64],
    breaks: &[f64],
) -> Result<Vec<f64>> {
    check_grid(taus)?;
    let rule = gauss_legendre(PANEL_ORDER);
    let last = *taus.last().unwrap();
    let mut cuts: Vec<f64> = breaks.iter().copied().filter(|&b| b > 0.0 && b < last).collect();
    cuts.extend_from_slice(taus);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();

    let mut out = Vec::with_capacity(taus.len());
    let mut acc = 0.0;
    let mut from = 0.0;
    let mut next = 0;
    for cut in cuts {
        acc += panel(&rule, &mut volume, from, cut)?;
        from = cut;
        if taus[next] == cut {
            out.push(acc / cut);
            next += 1;
        }
    }
    Ok(out)
}

fn panel(rule: &Rule, volume: &mut impl FnMut(f64) -> Result<f64>, a: f64, b: f64) -> Result<f64> {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut sum = 0.0;
    for (x, w) in rule.nodes.iter().zip(&rule.weights) {
        sum += w * volume(mid + half * x)?;
    }
    Ok(sum * half)
}

fn check_grid(taus: &[f64]) -> Result<()> {
    if taus.is_empty() {
        return Err(Error::InvalidArgument("tau grid is empty".into()));
    }
    if !(taus[0] > 0.0) || taus.windows(2).any(|w| !(w[1] > w[0])) || !taus.iter().all(|t| t.is_finite()) {
        return Err(Error::InvalidArgument(
            "tau grid must be positive, finite and strictly increasing".into(),
        ));
    }
    Ok(())
}

/// Per-τ record of volume, IGC and IGE.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComplexityTrace {
    pub model: String,
    pub path: String,
    pub s0: f64,
    tau: Vec<f64>,
    volume: Vec<f64>,
    igc: Vec<f64>,
    ige: Vec<f64>,
    /// Some active coordinate changed direction; volumes used `|dθ|`.
    pub reversed: bool,
}

impl ComplexityTrace {
    /// Assembles a trace and attaches `S = ln C`.
    pub fn from_parts(
        model: impl Into<String>,
        s0: f64,
        tau: Vec<f64>,
        volume: Vec<f64>,
        igc: Vec<f64>,
    ) -> Result<Self> {
        if tau.len() != volume.len() || tau.len() != igc.len() {
            return Err(Error::InvalidArgument("trace columns differ in length".into()));
        }
        if tau.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidArgument("tau must be strictly increasing".into()));
        }
        if volume.iter().chain(&igc).any(|x| !(*x >= 0.0)) {
            return Err(Error::InvalidArgument("volumes and IGC must be nonnegative".into()));
        }
        let ige = igc.iter().map(|c| c.ln()).collect();
        Ok(Self {
            model: model.into(),
            path: "geodesic".into(),
            s0,
            tau,
            volume,
            igc,
            ige,
            reversed: false,
        })
    }

    pub fn with_path_id(mut self, id: impl Into<String>) -> Self {
        self.path = id.into();
        self
    }

    pub fn len(&self) -> usize {
        self.tau.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tau.is_empty()
    }

    pub fn tau(&self) -> &[f64] {
        &self.tau
    }

    pub fn volume(&self) -> &[f64] {
        &self.volume
    }

    pub fn igc(&self) -> &[f64] {
        &self.igc
    }

    pub fn ige(&self) -> &[f64] {
        &self.ige
    }

    /// Writes `tau, volume, igc, ige`.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let header: Vec<String> = ["tau", "volume", "igc", "ige"].iter().map(|s| s.to_string()).collect();
        table::write_csv(
            path,
            &header,
            (0..self.len()).map(|i| vec![self.tau[i], self.volume[i], self.igc[i], self.ige[i]]),
        )
    }
}

/// Builds the complexity trace of `path` on the τ grid, starting the volumes at `s0`.
pub fn igc(model: &StatisticalModel, path: &GeodesicPath, taus: &[f64], s0: f64) -> Result<ComplexityTrace> {
    check_grid(taus)?;
    let last = *taus.last().unwrap();
    if s0 + last > path.end() {
        return Err(Error::PathTooShort {
            start: path.start(),
            end: path.end(),
            from: s0,
            to: s0 + last,
        });
    }
    let profile = VolumeProfile::new(model, path, s0)?;
    let breaks: Vec<f64> = path.taus().map(|t| t - s0).collect();
    let c = average_volume(|s| profile.volume(s), taus, &breaks)?;
    let v = taus.iter().map(|&s| profile.volume(s)).collect::<Result<Vec<_>>>()?;
    let mut trace = ComplexityTrace::from_parts(model.name(), s0, taus.to_vec(), v, c)?;
    trace.reversed = profile.reversed();
    Ok(trace)
}

/// Indices of the last `fraction` of `n` samples.
pub(crate) fn tail_window(n: usize, fraction: f64, need: usize) -> Result<std::ops::Range<usize>> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::InvalidArgument(format!("tail fraction {fraction} must lie in (0, 1]")));
    }
    let len = ((n as f64) * fraction).ceil() as usize;
    let len = len.min(n);
    if len < need {
        return Err(Error::WindowTooSmall { got: len, need });
    }
    Ok(n - len..n)
}

/// Least-squares slope and intercept of `y` on `x`.
pub(crate) fn least_squares(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
    }
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Asymptotic IGE growth rate: slope of `S(τ)` over the tail of the samples.
pub fn ks_slope(tau: &[f64], ige: &[f64], tail: f64) -> Result<f64> {
    let w = tail_window(tau.len(), tail, 10)?;
    let (x, y) = (&tau[w.clone()], &ige[w]);
    if !y.iter().all(|v| v.is_finite()) {
        return Err(Error::DegenerateTrace("IGE is not finite in the tail window".into()));
    }
    Ok(least_squares(x, y).0)
}

/// KS analogue of a trace: least-squares slope of the IGE over the tail window.
pub fn ks_analogue(trace: &ComplexityTrace, tail: f64) -> Result<f64> {
    ks_slope(trace.tau(), trace.ige(), tail)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn average_of_polynomials_is_exact() {
        let taus = [0.5, 1.0, 2.5, 7.0];
        let c = average_volume(|s| Ok(2.0 * s * s * s - s + 4.0), &taus, &[]).unwrap();
        for (t, c) in taus.iter().zip(c) {
            let exact = 0.5 * t * t * t - 0.5 * t + 4.0;
            assert!((c - exact).abs() <= 1e-13 * exact, "{c} {exact}");
        }
    }

    #[test]
    fn constant_volume_has_constant_complexity() {
        let c = average_volume(|_| Ok(5.0), &[1.0, 2.0, 3.0], &[0.3, 1.7]).unwrap();
        assert!(c.iter().all(|c| (c - 5.0).abs() < 1e-14));
    }

    #[test]
    fn affine_entropy_gives_exact_slope() {
        let tau: Vec<f64> = (1..=40).map(|i| i as f64 * 0.5).collect();
        let s: Vec<f64> = tau.iter().map(|t| 3.0 * t + 2.0).collect();
        assert!((ks_slope(&tau, &s, 0.5).unwrap() - 3.0).abs() < 1e-12);
        assert!(matches!(ks_slope(&tau[..15], &s[..15], 0.5), Err(Error::WindowTooSmall { .. })));
    }

    #[test]
    fn bad_grids_are_rejected() {
        assert!(average_volume(|_| Ok(1.0), &[0.0, 1.0], &[]).is_err());
        assert!(average_volume(|_| Ok(1.0), &[1.0, 1.0], &[]).is_err());
        assert!(ComplexityTrace::from_parts("m", 0.0, vec![1.0], vec![-1.0], vec![1.0]).is_err());
    }
}
