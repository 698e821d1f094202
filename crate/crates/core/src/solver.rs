//! Inner minimization of the strongly convex prox objective
//! `phi_x(y) = g(y) + |x - y|^2 / (2 gamma)`.
//!
//! Two methods are provided: a gradient method with a constant or
//! backtracking step for smooth objectives, and ternary search for strictly
//! unimodal one-dimensional objectives that may be nonsmooth.

use crate::error::{Error, Result};
use crate::model::Point;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMethod {
    Gradient,
    Unimodal1d,
    Analytic,
}

impl SolveMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            SolveMethod::Gradient => "gradient",
            SolveMethod::Unimodal1d => "unimodal_1d",
            SolveMethod::Analytic => "analytic",
        }
    }
}

/// Outcome of an inner solve.
///
/// `residual` is the gradient norm at `minimizer` for the gradient method and
/// the final bracket width for ternary search. With modulus `mu`, a gradient
/// residual `r` bounds the distance to the true minimizer by `r / mu`.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveCertificate {
    pub minimizer: Point,
    pub value: f64,
    pub residual: f64,
    pub iterations: usize,
    pub method: SolveMethod,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Upper curvature bound of the objective. When set, the gradient method
    /// starts every line search at step `1 / lipschitz`.
    pub lipschitz: Option<f64>,
    /// First trial step of the backtracking search when `lipschitz` is unset.
    pub initial_step: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { tol: 1e-10, max_iter: 10_000, lipschitz: None, initial_step: 1.0 }
    }
}

const MIN_STEP: f64 = 1e-300;

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

/// Gradient method for a `modulus`-strongly convex objective.
///
/// The first trial step is `1/L` (or `initial_step` without a Lipschitz
/// bound); later trials use the spectral step `|s|^2 / <s, dg>` of the last
/// move. Trials are halved until the Armijo condition
/// `phi(y - t g) <= phi(y) - t/2 |g|^2` holds or, once value differences sink
/// below rounding, `|g|` decreases without `phi` rising beyond that noise.
/// The returned value never exceeds `phi(x0)`. Hitting `max_iter` or a
/// vanishing step returns a certificate with `converged == false`.
pub fn minimize_strongly_convex<V, G>(
    value: V,
    gradient: G,
    modulus: f64,
    x0: &Point,
    options: &SolverOptions,
) -> Result<SolveCertificate>
where
    V: Fn(&[f64]) -> f64,
    G: Fn(&[f64]) -> Option<Vec<f64>>,
{
    if !(modulus > 0.0) {
        return Err(Error::InvalidArgument(format!("strong convexity modulus {modulus} must be positive")));
    }
    let eval_grad = |y: &[f64]| -> Result<Vec<f64>> {
        let g = gradient(y).ok_or(Error::GradientUnavailable)?;
        if g.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteOracle);
        }
        Ok(g)
    };

    let start = x0.clone().into_vec();
    let f0 = value(&start);
    if !f0.is_finite() {
        return Err(Error::NonFiniteOracle);
    }
    let mut y = start.clone();
    let mut fy = f0;
    let mut g = eval_grad(&y)?;
    let mut gnorm = norm(&g);
    let first_step = options.lipschitz.map_or(options.initial_step, |l| 1.0 / l);
    // Steps beyond 1/modulus overshoot along every direction.
    let max_step = (1.0 / modulus).max(first_step);
    let mut next_step = first_step;

    let mut iterations = 0;
    let mut stalled = false;
    while gnorm > options.tol && iterations < options.max_iter {
        let noise = 8.0 * f64::EPSILON * fy.abs().max(1.0);
        let mut t = next_step;
        let accepted = loop {
            let trial: Vec<f64> = y.iter().zip(&g).map(|(a, b)| a - t * b).collect();
            let ft = value(&trial);
            if ft.is_finite() {
                if ft <= fy - 0.5 * t * gnorm * gnorm {
                    break Some((trial, ft));
                }
                if ft <= fy + noise {
                    let gt = eval_grad(&trial)?;
                    if norm(&gt) < gnorm {
                        break Some((trial, ft));
                    }
                }
            } else if ft.is_nan() {
                return Err(Error::NonFiniteOracle);
            }
            t *= 0.5;
            if t < MIN_STEP {
                break None;
            }
        };
        let Some((trial, ft)) = accepted else {
            stalled = true;
            break;
        };
        let gt = eval_grad(&trial)?;
        let mut ss = 0.0;
        let mut sy = 0.0;
        for i in 0..y.len() {
            let s = trial[i] - y[i];
            ss += s * s;
            sy += s * (gt[i] - g[i]);
        }
        next_step = if sy > 0.0 && ss > 0.0 { (ss / sy).min(max_step) } else { first_step };
        y = trial;
        fy = ft;
        g = gt;
        gnorm = norm(&g);
        iterations += 1;
    }

    if fy > f0 {
        // Only reachable through rounding-level moves from an optimal start.
        let g0 = eval_grad(&start)?;
        return Ok(SolveCertificate {
            minimizer: Point::new(start),
            value: f0,
            residual: norm(&g0),
            iterations,
            method: SolveMethod::Gradient,
            converged: !stalled && norm(&g0) <= options.tol,
        });
    }
    Ok(SolveCertificate {
        minimizer: Point::new(y),
        value: fy,
        residual: gnorm,
        iterations,
        method: SolveMethod::Gradient,
        converged: !stalled && gnorm <= options.tol,
    })
}

const PATTERN_PROBES: usize = 5;
const MAX_TERNARY_ITER: usize = 400;

/// Checks that equally spaced probes decrease to their minimum and then
/// increase, as any strictly unimodal function must.
fn has_descent_pattern(values: &[f64]) -> bool {
    let (argmin, _) = values
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |(bi, bv), (i, &v)| if v < bv { (i, v) } else { (bi, bv) });
    values[..=argmin].windows(2).all(|w| w[0] >= w[1]) && values[argmin..].windows(2).all(|w| w[0] <= w[1])
}

/// Ternary search for the minimum of a strictly unimodal function over the
/// closed interval `[lo, hi]`.
///
/// The minimum may sit at an endpoint. Five equally spaced probes must show
/// the descent pattern, otherwise the bracket is reported invalid.
pub fn minimize_unimodal_1d<V>(value: V, lo: f64, hi: f64, tol: f64) -> Result<SolveCertificate>
where
    V: Fn(f64) -> f64,
{
    if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
        return Err(Error::InvalidBracket { lo, hi });
    }
    let probes: Vec<f64> = (0..PATTERN_PROBES)
        .map(|i| value(lo + (hi - lo) * i as f64 / (PATTERN_PROBES - 1) as f64))
        .collect();
    if probes.iter().any(|v| v.is_nan()) {
        return Err(Error::NonFiniteOracle);
    }
    if probes.iter().all(|v| v.is_infinite()) || !has_descent_pattern(&probes) {
        return Err(Error::InvalidBracket { lo, hi });
    }

    let (mut a, mut b) = (lo, hi);
    let mut iterations = 0;
    while b - a > tol && iterations < MAX_TERNARY_ITER {
        let m1 = a + (b - a) / 3.0;
        let m2 = b - (b - a) / 3.0;
        if !(a < m1 && m1 <= m2 && m2 < b) {
            break;
        }
        let (v1, v2) = (value(m1), value(m2));
        if v1 < v2 {
            b = m2;
        } else if v1 > v2 {
            a = m1;
        } else {
            a = m1;
            b = m2;
        }
        iterations += 1;
    }

    let mid = 0.5 * (a + b);
    let (minimizer, best) = [(lo, probes[0]), (hi, probes[PATTERN_PROBES - 1])]
        .into_iter()
        .fold((mid, value(mid)), |(bx, bv), (x, v)| if v < bv { (x, v) } else { (bx, bv) });
    if !best.is_finite() {
        return Err(Error::NonFiniteOracle);
    }
    let width = b - a;
    Ok(SolveCertificate {
        minimizer: Point::scalar(minimizer),
        value: best,
        residual: width,
        iterations,
        method: SolveMethod::Unimodal1d,
        converged: width <= tol,
    })
}
