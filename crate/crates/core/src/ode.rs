//! Dormand-Prince 5(4) integrator with cubic Hermite dense output.

use crate::error::{Error, Result};

// Butcher tableau
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// fifth-order weights minus the embedded fourth-order weights
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 5.0;
const MAX_STEPS: usize = 2_000_000;
// Absolute floor of the error scale. Tiny on purpose: coordinates such as σ
// decay exponentially along some geodesics and must stay relatively accurate.
const ATOL_FLOOR: f64 = 1e-300;

/// Why the right-hand side could not be evaluated.
#[derive(Debug)]
pub enum RhsFailure {
    /// The state left the region where the system is defined.
    OutOfRegion,
    Other(Error),
}

impl From<Error> for RhsFailure {
    fn from(e: Error) -> Self {
        match e {
            Error::OutOfDomain { .. } => RhsFailure::OutOfRegion,
            other => RhsFailure::Other(other),
        }
    }
}

/// Accepted step endpoint: time, state and derivative.
#[derive(Debug, Clone, PartialEq)]
pub struct Knot {
    pub t: f64,
    pub y: Vec<f64>,
    pub dy: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Stats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

/// Integration result. `truncated` is set when the solution left the region
/// of definition before `t_end`.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub knots: Vec<Knot>,
    pub stats: Stats,
    pub truncated: bool,
}

/// Cubic Hermite interpolant between two knots.
pub fn hermite(a: &Knot, b: &Knot, t: f64, out: &mut [f64]) {
    let h = b.t - a.t;
    let s = (t - a.t) / h;
    let s2 = s * s;
    let s3 = s2 * s;
    let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let h10 = s3 - 2.0 * s2 + s;
    let h01 = -2.0 * s3 + 3.0 * s2;
    let h11 = s3 - s2;
    for (i, o) in out.iter_mut().enumerate() {
        *o = h00 * a.y[i] + h10 * h * a.dy[i] + h01 * b.y[i] + h11 * h * b.dy[i];
    }
}

/// Integrates `y' = f(t, y)` from `t0` to `t_end` with mixed relative error
/// control at `tol`. `inside` is checked on every accepted state.
pub fn dopri5<F, G>(mut f: F, inside: G, t0: f64, y0: &[f64], t_end: f64, tol: f64) -> Result<Solution>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> std::result::Result<(), RhsFailure>,
    G: Fn(&[f64]) -> bool,
{
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    if !(t_end > t0) {
        return Err(Error::InvalidArgument(format!(
            "integration end {t_end} must exceed start {t0}"
        )));
    }
    let n = y0.len();
    let mut stats = Stats::default();
    let mut k = vec![vec![0.0; n]; 7];
    let mut eval = |t: f64, y: &[f64], out: &mut [f64], stats: &mut Stats| {
        stats.evaluations += 1;
        f(t, y, out)
    };

    let mut dy0 = vec![0.0; n];
    match eval(t0, y0, &mut dy0, &mut stats) {
        Ok(()) => {}
        Err(RhsFailure::OutOfRegion) => {
            return Err(Error::InvalidArgument("initial state is outside the region of definition".into()))
        }
        Err(RhsFailure::Other(e)) => return Err(e),
    }
    let mut knots = vec![Knot {
        t: t0,
        y: y0.to_vec(),
        dy: dy0,
    }];

    let span = t_end - t0;
    let mut h = initial_step(y0, &knots[0].dy, span, tol);
    let mut stage = vec![0.0; n];
    let mut y_new = vec![0.0; n];
    let mut last_failure_was_region = false;

    loop {
        let (t, y, dy) = {
            let last = knots.last().unwrap();
            (last.t, last.y.clone(), last.dy.clone())
        };
        if t >= t_end {
            return Ok(Solution {
                knots,
                stats,
                truncated: false,
            });
        }
        if stats.accepted + stats.rejected >= MAX_STEPS {
            return Err(Error::MaxIterations(MAX_STEPS));
        }
        let floor = 1e-14 * t.abs().max(1.0);
        if h < floor {
            if last_failure_was_region {
                return Ok(Solution {
                    knots,
                    stats,
                    truncated: true,
                });
            }
            return Err(Error::StepUnderflow { tau: t });
        }
        let last_step = t + h >= t_end;
        if last_step {
            h = t_end - t;
        }

        k[0].copy_from_slice(&dy);
        let mut failure = None;
        for s in 1..7 {
            for i in 0..n {
                let mut acc = 0.0;
                for (j, kj) in k.iter().enumerate().take(s) {
                    acc += A[s][j] * kj[i];
                }
                stage[i] = y[i] + h * acc;
            }
            if s == 6 {
                y_new.copy_from_slice(&stage);
                if !inside(&y_new) {
                    failure = Some(RhsFailure::OutOfRegion);
                    break;
                }
            }
            if let Err(e) = eval(t + C[s] * h, &stage, &mut k[s], &mut stats) {
                failure = Some(e);
                break;
            }
        }
        match failure {
            Some(RhsFailure::Other(e)) => return Err(e),
            Some(RhsFailure::OutOfRegion) => {
                stats.rejected += 1;
                last_failure_was_region = true;
                h *= 0.5;
                continue;
            }
            None => {}
        }

        let mut err = 0.0f64;
        for i in 0..n {
            let mut e = 0.0;
            for (j, kj) in k.iter().enumerate() {
                e += E[j] * kj[i];
            }
            let e = (h * e).abs();
            if e == 0.0 {
                continue;
            }
            let scale = ATOL_FLOOR + tol * y[i].abs().max(y_new[i].abs());
            err = err.max(e / scale);
        }
        if !err.is_finite() {
            stats.rejected += 1;
            h *= MIN_FACTOR;
            continue;
        }
        if err <= 1.0 {
            stats.accepted += 1;
            last_failure_was_region = false;
            let t_new = if last_step { t_end } else { t + h };
            knots.push(Knot {
                t: t_new,
                y: y_new.clone(),
                dy: k[6].clone(),
            });
            let factor = if err == 0.0 {
                MAX_FACTOR
            } else {
                (SAFETY * err.powf(-0.2)).clamp(MIN_FACTOR, MAX_FACTOR)
            };
            h *= factor;
        } else {
            stats.rejected += 1;
            h *= (SAFETY * err.powf(-0.2)).clamp(MIN_FACTOR, 1.0);
        }
    }
}

fn initial_step(y: &[f64], dy: &[f64], span: f64, tol: f64) -> f64 {
    // rate of relative change of the state
    let rate = y
        .iter()
        .zip(dy)
        .filter(|(_, d)| **d != 0.0)
        .map(|(yi, di)| di.abs() / yi.abs().max(1e-300))
        .fold(0.0, f64::max)
        .min(1e300);
    let h = if rate > 0.0 { 0.5 * tol.powf(0.2) / rate } else { span };
    h.min(span).max(1e-6 * span)
}
