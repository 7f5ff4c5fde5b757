//! Geodesic flows: initial-value integration and two-point shooting.

use std::path::Path;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::manifold::{christoffel, Flow, ParamPoint, StatisticalModel};
use crate::ode::{dopri5, hermite, Knot, RhsFailure, Stats};
use crate::table;

pub const DEFAULT_TOL: f64 = 1e-10;

/// Sampled geodesic `τ ↦ (θ(τ), θ̇(τ))` with cubic Hermite dense output.
#[derive(Debug, Clone, PartialEq)]
pub struct GeodesicPath {
    dim: usize,
    knots: Vec<Knot>,
    stats: Stats,
    tol: f64,
    truncated: bool,
}

impl GeodesicPath {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.knots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.knots.is_empty()
    }

    pub fn tau(&self, i: usize) -> f64 {
        self.knots[i].t
    }

    pub fn theta(&self, i: usize) -> &[f64] {
        &self.knots[i].y[..self.dim]
    }

    pub fn velocity(&self, i: usize) -> &[f64] {
        &self.knots[i].y[self.dim..]
    }

    pub fn start(&self) -> f64 {
        self.knots[0].t
    }

    pub fn end(&self) -> f64 {
        self.knots.last().unwrap().t
    }

    pub fn stats(&self) -> Stats {
        self.stats
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    /// True when the path stopped at the domain boundary before the requested end.
    pub fn truncated(&self) -> bool {
        self.truncated
    }

    /// Accepted step endpoints, in increasing τ.
    pub fn taus(&self) -> impl Iterator<Item = f64> + '_ {
        self.knots.iter().map(|k| k.t)
    }

    /// Interpolated `(θ, θ̇)` at τ inside the covered range.
    pub fn state_at(&self, tau: f64) -> Result<(Vec<f64>, Vec<f64>)> {
        if !(tau >= self.start() && tau <= self.end()) {
            return Err(Error::PathTooShort {
                start: self.start(),
                end: self.end(),
                from: tau,
                to: tau,
            });
        }
        let j = self.knots.partition_point(|k| k.t < tau);
        let mut y = vec![0.0; 2 * self.dim];
        if j == 0 {
            y.copy_from_slice(&self.knots[0].y);
        } else if self.knots[j].t == tau {
            y.copy_from_slice(&self.knots[j].y);
        } else {
            hermite(&self.knots[j - 1], &self.knots[j], tau, &mut y);
        }
        let v = y.split_off(self.dim);
        Ok((y, v))
    }

    pub fn theta_at(&self, tau: f64) -> Result<Vec<f64>> {
        Ok(self.state_at(tau)?.0)
    }

    pub fn end_theta(&self) -> &[f64] {
        self.theta(self.len() - 1)
    }

    /// Writes `tau, theta_1..theta_n, v_1..v_n` at every accepted step.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut header = vec!["tau".to_string()];
        header.extend((1..=self.dim).map(|k| format!("theta_{k}")));
        header.extend((1..=self.dim).map(|k| format!("v_{k}")));
        table::write_csv(
            path,
            &header,
            self.knots.iter().map(|k| {
                let mut row = vec![k.t];
                row.extend_from_slice(&k.y);
                row
            }),
        )
    }
}

fn acceleration(model: &StatisticalModel, theta: &[f64], v: &[f64], out: &mut [f64]) -> Result<()> {
    match model.flow() {
        Flow::LeviCivita => {
            let gamma = christoffel(model, &ParamPoint::from(theta), None)?;
            gamma.contract(v, out);
        }
        Flow::Newtonian(accel) => {
            model.domain().check(theta)?;
            accel(theta, v, out);
        }
    }
    Ok(())
}

/// Integrates the geodesic equation from `θ0` with initial velocity `v0` up to `tau_max`.
///
/// Leaving the domain ends the integration early with [`GeodesicPath::truncated`] set.
pub fn integrate_ivp(
    model: &StatisticalModel,
    theta0: &ParamPoint,
    v0: &[f64],
    tau_max: f64,
    tol: f64,
) -> Result<GeodesicPath> {
    let n = model.dim();
    model.domain().check(theta0.coords())?;
    if v0.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: v0.len() });
    }
    if v0.iter().all(|x| *x == 0.0) || v0.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidArgument("initial velocity must be finite and nonzero".into()));
    }
    if !(tau_max > 0.0) {
        return Err(Error::InvalidArgument(format!("tau_max must be positive, got {tau_max}")));
    }
    let mut y0 = theta0.coords().to_vec();
    y0.extend_from_slice(v0);
    let domain = model.domain();
    let sol = dopri5(
        |_, y, dy| {
            let (theta, v) = y.split_at(n);
            let (dtheta, dv) = dy.split_at_mut(n);
            dtheta.copy_from_slice(v);
            acceleration(model, theta, v, dv).map_err(RhsFailure::from)
        },
        |y| domain.contains(&y[..n]),
        0.0,
        &y0,
        tau_max,
        tol,
    )?;
    Ok(GeodesicPath {
        dim: n,
        knots: sol.knots,
        stats: sol.stats,
        tol,
        truncated: sol.truncated,
    })
}

/// `g_{μν}(θ_i) θ̇_i^μ θ̇_i^ν` at sample `i`.
pub fn squared_speed(model: &StatisticalModel, path: &GeodesicPath, i: usize) -> Result<f64> {
    let g = model.metric(&ParamPoint::from(path.theta(i)))?;
    let v = path.velocity(i);
    Ok(g.inner(v, v))
}

/// Endpoints and affine span of a two-point geodesic problem.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryProblem {
    pub initial: ParamPoint,
    pub target: ParamPoint,
    pub span: f64,
}

impl BoundaryProblem {
    pub fn new(initial: ParamPoint, target: ParamPoint, span: f64) -> Result<Self> {
        if initial.dim() != target.dim() {
            return Err(Error::DimensionMismatch {
                expected: initial.dim(),
                got: target.dim(),
            });
        }
        if initial == target {
            return Err(Error::InvalidArgument("boundary points must be distinct".into()));
        }
        if !(span > 0.0 && span.is_finite()) {
            return Err(Error::InvalidArgument(format!("span must be positive, got {span}")));
        }
        Ok(Self { initial, target, span })
    }
}

const SHOOTING_MAX_ITER: usize = 50;
const MAX_HALVINGS: usize = 30;

/// Geodesic from `bp.initial` reaching `bp.target` at `τ = bp.span`, by
/// Newton shooting on the initial velocity started from the chord.
pub fn solve_bvp(model: &StatisticalModel, bp: &BoundaryProblem, tol: f64) -> Result<GeodesicPath> {
    let n = model.dim();
    model.domain().check(bp.initial.coords())?;
    model.domain().check(bp.target.coords())?;
    if bp.initial.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, got: bp.initial.dim() });
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    let ivp_tol = (tol * 1e-3).clamp(1e-13, DEFAULT_TOL);
    let target = DVector::from_column_slice(bp.target.coords());

    // residual is None when the shot leaves the domain or fails outright
    let shoot = |v: &DVector<f64>| -> Option<(GeodesicPath, DVector<f64>)> {
        let path = integrate_ivp(model, &bp.initial, v.as_slice(), bp.span, ivp_tol).ok()?;
        if path.truncated() {
            return None;
        }
        let r = DVector::from_column_slice(path.end_theta()) - &target;
        r.iter().all(|x| x.is_finite()).then_some((path, r))
    };

    let chord = (&target - DVector::from_column_slice(bp.initial.coords())) / bp.span;
    let mut v = chord;
    let (mut path, mut r) = shoot(&v).ok_or(Error::ShootingDiverged {
        iterations: 0,
        best_residual: f64::INFINITY,
    })?;
    for iteration in 0..SHOOTING_MAX_ITER {
        let norm = r.norm();
        if norm <= tol {
            return Ok(path);
        }
        let diverged = || Error::ShootingDiverged {
            iterations: iteration,
            best_residual: norm,
        };
        let mut jac = DMatrix::zeros(n, n);
        for k in 0..n {
            let h = 1e-6 * v[k].abs().max(v.norm()).max(1e-8);
            let mut vp = v.clone();
            vp[k] += h;
            let mut vm = v.clone();
            vm[k] -= h;
            let column = match (shoot(&vp), shoot(&vm)) {
                (Some((_, rp)), Some((_, rm))) => (rp - rm) / (2.0 * h),
                (Some((_, rp)), None) => (rp - &r) / h,
                (None, Some((_, rm))) => (&r - rm) / h,
                (None, None) => return Err(diverged()),
            };
            jac.set_column(k, &column);
        }
        let step = jac.lu().solve(&(-&r)).ok_or_else(diverged)?;
        let mut lambda = 1.0;
        let mut accepted = None;
        for _ in 0..MAX_HALVINGS {
            let trial = &v + &step * lambda;
            if let Some((p, rt)) = shoot(&trial) {
                if rt.norm() < norm {
                    accepted = Some((trial, p, rt));
                    break;
                }
            }
            lambda *= 0.5;
        }
        let (nv, np, nr) = accepted.ok_or_else(diverged)?;
        v = nv;
        path = np;
        r = nr;
    }
    if r.norm() <= tol {
        return Ok(path);
    }
    Err(Error::ShootingDiverged {
        iterations: SHOOTING_MAX_ITER,
        best_residual: r.norm(),
    })
}
