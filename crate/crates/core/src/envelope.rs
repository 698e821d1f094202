//! The Moreau envelope `f^gamma(x) = min_y f(y) + |x - y|^2 / (2 gamma)` and
//! its derivatives in `x` and `gamma`.

use crate::error::{Error, Result};
use crate::model::{distance_sq, ExtendedReal, FunctionSpec, Hessian, Point};
use crate::prox::{check_gamma, prox_with, ProxMode, ProxOptions, ProxResult};

/// Envelope value, gradient and gamma-derivative at one `(gamma, x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeReport {
    pub gamma: f64,
    pub x: Point,
    pub prox: Point,
    pub value: f64,
    pub gradient: Point,
    pub dgamma: f64,
    /// Present when the function has a Hessian oracle that is defined at the prox.
    pub hessian: Option<Hessian>,
}

/// Sharp moduli of the envelope of a `rho`-weakly convex function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvModuli {
    /// `rho / (1 - gamma rho)`; negative values declare strong convexity.
    pub weak: f64,
    /// `|rho| / (1 + gamma |rho|)` when `rho < 0`.
    pub strong: Option<f64>,
    /// Lipschitz constant of the envelope gradient.
    pub smooth: f64,
    /// `2 L_g` when a curvature bound `L_g` is known and `gamma L_g <= 1/2`.
    pub smooth_prox_image: Option<f64>,
}

fn prox_for_envelope(f: &FunctionSpec, gamma: f64, x: &[f64], options: &ProxOptions) -> Result<ProxResult> {
    prox_with(f, gamma, x, options)
}

fn value_from_prox(f: &FunctionSpec, gamma: f64, x: &[f64], p: &[f64]) -> Result<f64> {
    let fp = f.value_unchecked(p).finite().ok_or(Error::InfiniteValue("envelope"))?;
    Ok(fp + distance_sq(x, p) / (2.0 * gamma))
}

pub fn env_value(f: &FunctionSpec, gamma: f64, x: &[f64]) -> Result<f64> {
    env_value_with(f, gamma, x, &ProxOptions::default())
}

/// Uses the closed-form envelope in `Auto` and `Analytic` modes when present;
/// otherwise `f(p) + |x - p|^2 / (2 gamma)` with `p` the proximal point.
pub fn env_value_with(f: &FunctionSpec, gamma: f64, x: &[f64], options: &ProxOptions) -> Result<f64> {
    f.check_point(x)?;
    check_gamma(f.rho(), gamma)?;
    if options.mode != ProxMode::Numeric {
        if let Some(envelope) = f.analytic_envelope() {
            let v = envelope(gamma, x);
            return if v.is_nan() { Err(Error::NonFiniteOracle) } else { Ok(v) };
        }
    }
    let p = prox_for_envelope(f, gamma, x, options)?;
    value_from_prox(f, gamma, x, &p.point)
}

pub fn env_gradient(f: &FunctionSpec, gamma: f64, x: &[f64]) -> Result<Point> {
    env_gradient_with(f, gamma, x, &ProxOptions::default())
}

/// `(x - p) / gamma`.
pub fn env_gradient_with(f: &FunctionSpec, gamma: f64, x: &[f64], options: &ProxOptions) -> Result<Point> {
    let p = prox_for_envelope(f, gamma, x, options)?;
    Ok(gradient_from_prox(gamma, x, &p.point))
}

fn gradient_from_prox(gamma: f64, x: &[f64], p: &[f64]) -> Point {
    Point::new(x.iter().zip(p).map(|(a, b)| (a - b) / gamma).collect())
}

pub fn env_dgamma(f: &FunctionSpec, gamma: f64, x: &[f64]) -> Result<f64> {
    env_dgamma_with(f, gamma, x, &ProxOptions::default())
}

/// `-|x - p|^2 / (2 gamma^2)`.
pub fn env_dgamma_with(f: &FunctionSpec, gamma: f64, x: &[f64], options: &ProxOptions) -> Result<f64> {
    let p = prox_for_envelope(f, gamma, x, options)?;
    Ok(-distance_sq(x, &p.point) / (2.0 * gamma * gamma))
}

pub fn hj_residual(f: &FunctionSpec, gamma: f64, x: &[f64]) -> Result<f64> {
    hj_residual_with(f, gamma, x, &ProxOptions::default())
}

/// `|d/dgamma f^gamma + 1/2 |grad f^gamma|^2|`.
pub fn hj_residual_with(f: &FunctionSpec, gamma: f64, x: &[f64], options: &ProxOptions) -> Result<f64> {
    let p = prox_for_envelope(f, gamma, x, options)?;
    let gradient = gradient_from_prox(gamma, x, &p.point);
    let dgamma = -distance_sq(x, &p.point) / (2.0 * gamma * gamma);
    Ok((dgamma + 0.5 * gradient.norm_sq()).abs())
}

pub fn env_hessian(f: &FunctionSpec, gamma: f64, x: &[f64]) -> Result<Hessian> {
    env_hessian_with(f, gamma, x, &ProxOptions::default())
}

/// `(1/gamma)(I - (I + gamma H)^-1)` with `H` the Hessian of `f` at the
/// proximal point, evaluated entrywise as `l / (1 + gamma l)`.
pub fn env_hessian_with(f: &FunctionSpec, gamma: f64, x: &[f64], options: &ProxOptions) -> Result<Hessian> {
    if !f.has_hessian() {
        return Err(Error::HessianUnavailable);
    }
    let p = prox_for_envelope(f, gamma, x, options)?;
    hessian_from_prox(f, gamma, &p.point)
}

fn hessian_from_prox(f: &FunctionSpec, gamma: f64, p: &[f64]) -> Result<Hessian> {
    let h = f.hessian(p)?;
    let diagonal = h
        .diagonal()
        .ok_or_else(|| Error::Unsupported("envelope Hessian of a non-diagonal matrix".into()))?;
    let entries = diagonal
        .iter()
        .map(|&l| {
            let resolvent = 1.0 + gamma * l;
            if resolvent <= 0.0 {
                Err(Error::SingularResolvent(resolvent))
            } else {
                Ok(l / resolvent)
            }
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(Hessian::Diagonal(entries))
}

pub fn env_moduli(rho: f64, gamma: f64, curvature_bound: Option<f64>) -> Result<EnvModuli> {
    check_gamma(rho, gamma)?;
    let weak = rho / (1.0 - gamma * rho);
    let strong = (rho < 0.0).then(|| rho.abs() / (1.0 + gamma * rho.abs()));
    let smooth = if gamma * rho <= 0.5 { 1.0 / gamma } else { weak };
    let smooth_prox_image = curvature_bound.filter(|l| gamma * l <= 0.5).map(|l| 2.0 * l);
    Ok(EnvModuli { weak, strong, smooth, smooth_prox_image })
}

pub fn envelope_report(f: &FunctionSpec, gamma: f64, x: &[f64]) -> Result<EnvelopeReport> {
    envelope_report_with(f, gamma, x, &ProxOptions::default())
}

pub fn envelope_report_with(f: &FunctionSpec, gamma: f64, x: &[f64], options: &ProxOptions) -> Result<EnvelopeReport> {
    let p = prox_for_envelope(f, gamma, x, options)?;
    let value = match (options.mode, f.analytic_envelope()) {
        (ProxMode::Numeric, _) | (_, None) => value_from_prox(f, gamma, x, &p.point)?,
        (_, Some(envelope)) => envelope(gamma, x),
    };
    let hessian = if f.has_hessian() { hessian_from_prox(f, gamma, &p.point).ok() } else { None };
    Ok(EnvelopeReport {
        gamma,
        x: Point::from(x),
        gradient: gradient_from_prox(gamma, x, &p.point),
        dgamma: -distance_sq(x, &p.point) / (2.0 * gamma * gamma),
        prox: p.point,
        value,
        hessian,
    })
}

/// Outcome of the proximal point method `x_{k+1} = Prox_{gamma f}(x_k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProximalPointResult {
    /// Last iterate `x_k`, with `|x_k - Prox(x_k)| <= tol` when converged.
    pub point: Point,
    pub prox_of_point: Point,
    pub iterations: usize,
    pub converged: bool,
    /// `|grad f^gamma(point)| = |point - prox_of_point| / gamma`.
    pub gradient_norm: f64,
    /// `x_0, x_1, ..., x_k, Prox(x_k)`.
    pub trace: Vec<Point>,
}

pub fn proximal_point_minimize(
    f: &FunctionSpec,
    gamma: f64,
    x0: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<ProximalPointResult> {
    proximal_point_minimize_with(f, gamma, x0, tol, max_iter, &ProxOptions::default())
}

pub fn proximal_point_minimize_with(
    f: &FunctionSpec,
    gamma: f64,
    x0: &[f64],
    tol: f64,
    max_iter: usize,
    options: &ProxOptions,
) -> Result<ProximalPointResult> {
    if !(tol >= 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance {tol} must be non-negative")));
    }
    let mut x = Point::from(x0);
    let mut trace = vec![x.clone()];
    let mut iterations = 0;
    loop {
        let p = prox_with(f, gamma, &x, options)?.point;
        let step = p.distance(&x);
        trace.push(p.clone());
        if step <= tol || iterations >= max_iter {
            return Ok(ProximalPointResult {
                gradient_norm: step / gamma,
                converged: step <= tol,
                point: x,
                prox_of_point: p,
                iterations,
                trace,
            });
        }
        x = p;
        iterations += 1;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GammaRow {
    pub gamma: f64,
    pub env: f64,
    pub prox: Point,
    pub f_prox: f64,
}

/// Envelope and prox data for one `x` over an ascending gamma grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaProfile {
    pub x: Point,
    pub f_x: ExtendedReal,
    pub rows: Vec<GammaRow>,
}

fn max_increase(values: impl Iterator<Item = f64>) -> f64 {
    let values: Vec<f64> = values.collect();
    values.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max)
}

impl GammaProfile {
    /// Largest increase of the envelope between consecutive rows;
    /// `-inf` for fewer than two rows.
    pub fn max_env_increase(&self) -> f64 {
        max_increase(self.rows.iter().map(|r| r.env))
    }

    pub fn max_f_prox_increase(&self) -> f64 {
        max_increase(self.rows.iter().map(|r| r.f_prox))
    }

    /// `max_rows (env - f(x))`; `-inf` when `f(x) = +inf`.
    pub fn max_env_excess(&self) -> f64 {
        match self.f_x.finite() {
            Some(fx) => self.rows.iter().map(|r| r.env - fx).fold(f64::NEG_INFINITY, f64::max),
            None => f64::NEG_INFINITY,
        }
    }

    /// `(|prox - x|, |env - f(x)|)` at the smallest gamma, the small-gamma
    /// proxy for the limits `prox -> x` and `env -> f(x)`.
    pub fn limit_gaps(&self) -> Option<(f64, f64)> {
        let row = self.rows.first()?;
        let fx = self.f_x.finite()?;
        Some((row.prox.distance(&self.x), (row.env - fx).abs()))
    }
}

pub fn gamma_profile(f: &FunctionSpec, x: &[f64], gammas: &[f64]) -> Result<GammaProfile> {
    gamma_profile_with(f, x, gammas, &ProxOptions::default())
}

pub fn gamma_profile_with(f: &FunctionSpec, x: &[f64], gammas: &[f64], options: &ProxOptions) -> Result<GammaProfile> {
    let f_x = f.evaluate(x)?;
    if gammas.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidArgument("gamma grid must be strictly ascending".into()));
    }
    for &gamma in gammas {
        check_gamma(f.rho(), gamma)?;
    }
    let rows = gammas
        .iter()
        .map(|&gamma| {
            let p = prox_with(f, gamma, x, options)?.point;
            let f_prox = f.value_unchecked(&p).finite().ok_or(Error::InfiniteValue("envelope"))?;
            let env = match (options.mode, f.analytic_envelope()) {
                (ProxMode::Numeric, _) | (_, None) => f_prox + distance_sq(x, &p) / (2.0 * gamma),
                (_, Some(envelope)) => envelope(gamma, x),
            };
            Ok(GammaRow { gamma, env, prox: p, f_prox })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GammaProfile { x: Point::from(x), f_x, rows })
}

/// The envelope `f^gamma` as a function in its own right, with modulus
/// `rho / (1 - gamma rho)` and curvature bound equal to the smoothness modulus.
/// Oracle failures surface as NaN values.
pub fn envelope_function(f: &FunctionSpec, gamma: f64) -> Result<FunctionSpec> {
    envelope_function_with(f, gamma, ProxOptions::default())
}

pub fn envelope_function_with(f: &FunctionSpec, gamma: f64, options: ProxOptions) -> Result<FunctionSpec> {
    let moduli = env_moduli(f.rho(), gamma, f.curvature_bound())?;
    let (fv, ov) = (f.clone(), options.clone());
    let (fg, og) = (f.clone(), options.clone());
    let mut spec = FunctionSpec::new(format!("env({},{gamma:?})", f.name()), f.dim(), moduli.weak, move |x: &[f64]| {
        ExtendedReal::Finite(env_value_with(&fv, gamma, x, &ov).unwrap_or(f64::NAN))
    })?
    .with_gradient(move |x: &[f64]| env_gradient_with(&fg, gamma, x, &og).ok().map(Point::into_vec))
    .with_curvature_bound(moduli.smooth);
    if f.has_hessian() {
        let fh = f.clone();
        spec = spec.with_hessian(move |x: &[f64]| env_hessian_with(&fh, gamma, x, &options).ok());
    }
    Ok(spec)
}
