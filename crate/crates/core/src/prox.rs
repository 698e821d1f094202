//! Proximal points `Prox_{gamma f}(x) = argmin_y f(y) + |x - y|^2 / (2 gamma)`
//! and the identities they satisfy.
//!
//! For a `rho`-weakly convex `f` the prox objective is `(1/gamma - rho)`-strongly
//! convex, so the proximal point is unique whenever `gamma * rho < 1`.

use crate::error::{Error, Result};
use crate::model::{distance_sq, ExtendedReal, FunctionSpec, Point};
use crate::solver::{minimize_strongly_convex, minimize_unimodal_1d, SolveCertificate, SolveMethod, SolverOptions};

/// `gamma * rho` may not exceed `1 - GAMMA_GUARD`.
pub const GAMMA_GUARD: f64 = 1e-9;

const MAX_BRACKET_EXPANSIONS: usize = 64;

/// Which route computes the proximal point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ProxMode {
    /// Closed form when the function provides one, inner solver otherwise.
    #[default]
    Auto,
    /// Closed form only; unsupported when absent.
    Analytic,
    /// Inner solver, even when a closed form exists.
    Numeric,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProxOptions {
    pub mode: ProxMode,
    pub solver: SolverOptions,
    /// Growth bound `G` sizing the initial bracket `x +- 2 gamma G` of
    /// derivative-free solves.
    pub growth_bound: f64,
}

impl Default for ProxOptions {
    fn default() -> Self {
        ProxOptions { mode: ProxMode::Auto, solver: SolverOptions::default(), growth_bound: 1.0 }
    }
}

impl ProxOptions {
    pub fn numeric() -> Self {
        ProxOptions { mode: ProxMode::Numeric, ..ProxOptions::default() }
    }

    pub fn analytic() -> Self {
        ProxOptions { mode: ProxMode::Analytic, ..ProxOptions::default() }
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.solver.tol = tol;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProxResult {
    pub input: Point,
    pub gamma: f64,
    pub point: Point,
    pub certificate: SolveCertificate,
}

/// Rejects `gamma <= 0` and `gamma * rho > 1 - GAMMA_GUARD`.
pub fn check_gamma(rho: f64, gamma: f64) -> Result<()> {
    if !(gamma.is_finite() && gamma > 0.0) || gamma * rho > 1.0 - GAMMA_GUARD {
        return Err(Error::InadmissibleGamma { gamma, rho });
    }
    Ok(())
}

/// Value of the prox objective `f(y) + |x - y|^2 / (2 gamma)`.
pub(crate) fn prox_objective(f: &FunctionSpec, gamma: f64, x: &[f64], y: &[f64]) -> ExtendedReal {
    f.value_unchecked(y) + distance_sq(x, y) / (2.0 * gamma)
}

pub fn prox(f: &FunctionSpec, gamma: f64, x: &[f64]) -> Result<ProxResult> {
    prox_with(f, gamma, x, &ProxOptions::default())
}

pub fn prox_with(f: &FunctionSpec, gamma: f64, x: &[f64], options: &ProxOptions) -> Result<ProxResult> {
    f.check_point(x)?;
    check_gamma(f.rho(), gamma)?;
    let use_analytic = match options.mode {
        ProxMode::Auto => f.analytic_prox().is_some(),
        ProxMode::Analytic => {
            if f.analytic_prox().is_none() {
                return Err(Error::Unsupported(format!("{} has no closed-form prox", f.name())));
            }
            true
        }
        ProxMode::Numeric => false,
    };
    let certificate = if use_analytic {
        analytic_certificate(f, gamma, x)?
    } else {
        numeric_certificate(f, gamma, x, options)?
    };
    if !certificate.converged {
        return Err(Error::NotConverged { iterations: certificate.iterations, residual: certificate.residual });
    }
    Ok(ProxResult {
        input: Point::from(x),
        gamma,
        point: certificate.minimizer.clone(),
        certificate,
    })
}

fn analytic_certificate(f: &FunctionSpec, gamma: f64, x: &[f64]) -> Result<SolveCertificate> {
    let oracle = f.analytic_prox().expect("checked by caller");
    let p = Point::new(oracle(gamma, x));
    if p.dim() != f.dim() {
        return Err(Error::DimensionMismatch { expected: f.dim(), got: p.dim() });
    }
    if !p.is_finite() {
        return Err(Error::NonFiniteOracle);
    }
    Ok(SolveCertificate {
        value: prox_objective(f, gamma, x, &p).to_f64(),
        minimizer: p,
        residual: 0.0,
        iterations: 0,
        method: SolveMethod::Analytic,
        converged: true,
    })
}

fn numeric_certificate(f: &FunctionSpec, gamma: f64, x: &[f64], options: &ProxOptions) -> Result<SolveCertificate> {
    if f.is_differentiable() {
        let modulus = 1.0 / gamma - f.rho();
        let solver = SolverOptions {
            lipschitz: f.curvature_bound().map(|l| l + 1.0 / gamma),
            initial_step: gamma,
            ..options.solver.clone()
        };
        let start = match f.domain() {
            Some(domain) => domain.clamp(x),
            None => Point::from(x),
        };
        let value = |y: &[f64]| prox_objective(f, gamma, x, y).to_f64();
        let gradient = |y: &[f64]| {
            let g = f.gradient(y).ok()?;
            Some(g.iter().zip(y.iter().zip(x)).map(|(gi, (yi, xi))| gi + (yi - xi) / gamma).collect())
        };
        minimize_strongly_convex(value, gradient, modulus, &start, &solver)
    } else if f.dim() == 1 {
        bracketed_prox_1d(f, gamma, x[0], options)
    } else {
        Err(Error::Unsupported(format!(
            "derivative-free prox of {} in dimension {}",
            f.name(),
            f.dim()
        )))
    }
}

/// Ternary search on `x +- 2 gamma G`, clipped to the domain box. A side whose
/// minimizer lands on an edge that is not a domain boundary is doubled.
fn bracketed_prox_1d(f: &FunctionSpec, gamma: f64, x: f64, options: &ProxOptions) -> Result<SolveCertificate> {
    let (dom_lo, dom_hi) = match f.domain() {
        Some(d) => (d.lower[0], d.upper[0]),
        None => (f64::NEG_INFINITY, f64::INFINITY),
    };
    let tol = options.solver.tol;
    let phi = |y: f64| prox_objective(f, gamma, &[x], &[y]).to_f64();
    let initial = 2.0 * gamma * options.growth_bound.max(f64::MIN_POSITIVE);
    let (mut left, mut right) = (initial, initial);

    for _ in 0..MAX_BRACKET_EXPANSIONS {
        let (lo, lo_is_boundary) = clip_edge(x - left, dom_lo, dom_hi, true);
        let (hi, hi_is_boundary) = clip_edge(x + right, dom_lo, dom_hi, false);
        let mut certificate = minimize_unimodal_1d(phi, lo, hi, tol)?;
        let y = certificate.minimizer[0];
        let grow_left = !lo_is_boundary && y - lo <= 2.0 * tol;
        let grow_right = !hi_is_boundary && hi - y <= 2.0 * tol;
        if !grow_left && !grow_right {
            // Ternary search may lose the last few ulps; never return worse than x itself.
            let at_x = phi(x);
            if at_x <= certificate.value && at_x.is_finite() {
                certificate.minimizer = Point::scalar(x);
                certificate.value = at_x;
            }
            return Ok(certificate);
        }
        if grow_left {
            left *= 2.0;
        }
        if grow_right {
            right *= 2.0;
        }
    }
    Err(Error::InvalidBracket { lo: x - left, hi: x + right })
}

/// Clips a bracket edge into `[dom_lo, dom_hi]`; the flag tells whether the
/// result is the domain boundary on the edge's own side.
fn clip_edge(edge: f64, dom_lo: f64, dom_hi: f64, is_lower: bool) -> (f64, bool) {
    if is_lower {
        if edge <= dom_lo {
            (dom_lo, true)
        } else if edge >= dom_hi {
            (dom_hi, false)
        } else {
            (edge, false)
        }
    } else if edge >= dom_hi {
        (dom_hi, true)
    } else if edge <= dom_lo {
        (dom_lo, false)
    } else {
        (edge, false)
    }
}

/// `Prox_{gamma g}(x) = Prox_{gamma' g_rho}(x / (1 - gamma rho))` with
/// `gamma' = gamma / (1 - gamma rho)` and `g_rho = g + rho/2 |.|^2` convex.
pub fn prox_via_reduction(f: &FunctionSpec, gamma: f64, x: &[f64]) -> Result<ProxResult> {
    prox_via_reduction_with(f, gamma, x, &ProxOptions::default())
}

pub fn prox_via_reduction_with(f: &FunctionSpec, gamma: f64, x: &[f64], options: &ProxOptions) -> Result<ProxResult> {
    f.check_point(x)?;
    check_gamma(f.rho(), gamma)?;
    let scale = 1.0 - gamma * f.rho();
    let shifted = f.shift_to_convex();
    let scaled: Vec<f64> = x.iter().map(|v| v / scale).collect();
    let reduced = prox_with(&shifted, gamma / scale, &scaled, options)?;
    Ok(ProxResult { input: Point::from(x), gamma, point: reduced.point, certificate: reduced.certificate })
}

/// `|Prox_{gamma f}(x + gamma grad f(x)) - x|`, which vanishes wherever `f`
/// is differentiable.
pub fn prox_inverse_residual(f: &FunctionSpec, gamma: f64, x: &[f64]) -> Result<f64> {
    prox_inverse_residual_with(f, gamma, x, &ProxOptions::default())
}

pub fn prox_inverse_residual_with(f: &FunctionSpec, gamma: f64, x: &[f64], options: &ProxOptions) -> Result<f64> {
    check_gamma(f.rho(), gamma)?;
    let g = f.gradient(x)?;
    let shifted: Vec<f64> = x.iter().zip(g.iter()).map(|(a, b)| a + gamma * b).collect();
    let p = prox_with(f, gamma, &shifted, options)?;
    Ok(p.point.distance(x))
}

/// `p = Prox_f(z)` and `q = z - p`; for convex `f`, `q = Prox_{f*}(z)` and
/// `f(p) + f*(q) = <p, q>`.
#[derive(Debug, Clone, PartialEq)]
pub struct MoreauDecomposition {
    pub p: Point,
    pub q: Point,
}

pub fn moreau_decomposition(f: &FunctionSpec, z: &[f64]) -> Result<MoreauDecomposition> {
    moreau_decomposition_with(f, z, &ProxOptions::default())
}

pub fn moreau_decomposition_with(f: &FunctionSpec, z: &[f64], options: &ProxOptions) -> Result<MoreauDecomposition> {
    if f.rho() > 0.0 {
        return Err(Error::NotConvex(f.rho()));
    }
    let p = prox_with(f, 1.0, z, options)?.point;
    let q = Point::new(z.iter().zip(p.iter()).map(|(a, b)| a - b).collect());
    Ok(MoreauDecomposition { p, q })
}

/// Lipschitz constant `1 / (1 - gamma rho)` of `Prox_{gamma f}`.
pub fn prox_lipschitz_constant(rho: f64, gamma: f64) -> Result<f64> {
    check_gamma(rho, gamma)?;
    Ok(1.0 / (1.0 - gamma * rho))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zoo::make_function;

    fn spec(name: &str, params: &[f64]) -> FunctionSpec {
        make_function(name, params).unwrap().spec
    }

    #[test]
    fn paper_h_branches() {
        let h = spec("paper_h", &[]);
        for options in [ProxOptions::default(), ProxOptions::numeric()] {
            let p = prox_with(&h, 0.25, &[0.1], &options).unwrap().point[0];
            assert!((p - 0.2).abs() <= 1e-9, "{p}");
            let p = prox_with(&h, 0.25, &[1.0], &options).unwrap().point[0];
            assert!((p - 1.0).abs() <= 1e-9, "{p}");
        }
    }

    #[test]
    fn zero_prox_is_identity() {
        let z = spec("zero", &[]);
        for gamma in [0.1, 1.0, 7.5] {
            for x in [-3.0, 0.0, 2.5] {
                assert_eq!(prox(&z, gamma, &[x]).unwrap().point[0], x);
                assert_eq!(prox_with(&z, gamma, &[x], &ProxOptions::numeric()).unwrap().point[0], x);
            }
        }
    }

    #[test]
    fn soft_threshold_numeric_and_closed_form() {
        let f = spec("absolute_value", &[]);
        assert_eq!(prox(&f, 1.0, &[-3.0]).unwrap().point[0], -2.0);
        let numeric = prox_with(&f, 1.0, &[-3.0], &ProxOptions::numeric()).unwrap();
        assert_eq!(numeric.certificate.method, SolveMethod::Unimodal1d);
        assert!((numeric.point[0] + 2.0).abs() <= 1e-7);
        // Far from the origin the initial bracket must grow.
        let far = prox_with(&f, 0.5, &[40.0], &ProxOptions::numeric()).unwrap();
        assert!((far.point[0] - 39.5).abs() <= 1e-7);
    }

    #[test]
    fn indicator_projection() {
        let f = spec("indicator", &[0.0, 1.0]);
        for x in [2.0, 25.0] {
            let p = prox_with(&f, 0.5, &[x], &ProxOptions::numeric()).unwrap();
            assert_eq!(p.point[0], 1.0);
        }
        let p = prox_with(&f, 0.5, &[-7.0], &ProxOptions::numeric()).unwrap();
        assert_eq!(p.point[0], 0.0);
        let p = prox_with(&f, 0.5, &[0.3], &ProxOptions::numeric()).unwrap();
        assert!((p.point[0] - 0.3).abs() <= 1e-9);
    }

    #[test]
    fn inadmissible_gamma() {
        let h = spec("paper_h", &[]);
        assert!(matches!(prox(&h, 0.5, &[0.0]), Err(Error::InadmissibleGamma { .. })));
        assert!(matches!(prox(&h, -0.1, &[0.0]), Err(Error::InadmissibleGamma { .. })));
        assert!(matches!(prox(&h, 0.6, &[0.0]), Err(Error::InadmissibleGamma { .. })));
    }

    #[test]
    fn analytic_mode_requires_closed_form() {
        let f = spec("double_well", &[]);
        assert!(matches!(prox_with(&f, 0.1, &[0.3], &ProxOptions::analytic()), Err(Error::Unsupported(_))));
    }

    #[test]
    fn reduction_examples() {
        let z = spec("zero", &[]);
        assert_eq!(prox_via_reduction(&z, 0.3, &[1.25]).unwrap().point, prox(&z, 0.3, &[1.25]).unwrap().point);

        let h = spec("paper_h", &[]);
        let p = prox_via_reduction(&h, 0.25, &[0.1]).unwrap().point[0];
        assert!((p - 0.2).abs() <= 1e-8, "{p}");

        // -x^2/2 has rho = 1; stationarity (p - 1)/gamma - p = 0 at gamma = 0.5 gives p = 2.
        let neg = spec("quadratic", &[-1.0]);
        let p = prox_via_reduction(&neg, 0.5, &[1.0]).unwrap().point[0];
        assert!((p - 2.0).abs() <= 1e-9, "{p}");
        assert!((prox(&neg, 0.5, &[1.0]).unwrap().point[0] - 2.0).abs() <= 1e-12);
    }

    #[test]
    fn inverse_identity_examples() {
        let h = spec("paper_h", &[]);
        // x = 0.2: shifted point 0.2 + 0.25 * (-0.4) = 0.1, whose prox is 0.2.
        assert!(prox_inverse_residual(&h, 0.25, &[0.2]).unwrap() <= 1e-15);
        assert_eq!(prox_inverse_residual(&spec("zero", &[]), 0.7, &[1.5]).unwrap(), 0.0);
        let dw = spec("double_well", &[]);
        assert!(prox_inverse_residual(&dw, 0.1, &[0.3]).unwrap() <= 1e-7);
        let abs = spec("absolute_value", &[]);
        assert_eq!(prox_inverse_residual(&abs, 0.5, &[0.0]), Err(Error::GradientUnavailable));
    }

    #[test]
    fn decomposition_examples() {
        let abs = spec("absolute_value", &[]);
        let d = moreau_decomposition(&abs, &[3.0]).unwrap();
        assert_eq!((d.p[0], d.q[0]), (2.0, 1.0));
        let quad = spec("quadratic", &[1.0]);
        let d = moreau_decomposition(&quad, &[2.0]).unwrap();
        assert!((d.p[0] - 1.0).abs() < 1e-15 && (d.q[0] - 1.0).abs() < 1e-15);
        let d = moreau_decomposition(&abs, &[0.0]).unwrap();
        assert_eq!((d.p[0], d.q[0]), (0.0, 0.0));
        assert_eq!(moreau_decomposition(&spec("paper_h", &[]), &[1.0]), Err(Error::NotConvex(2.0)));
    }

    #[test]
    fn lipschitz_constant_examples() {
        assert_eq!(prox_lipschitz_constant(0.0, 3.0).unwrap(), 1.0);
        assert_eq!(prox_lipschitz_constant(2.0, 0.25).unwrap(), 2.0);
        assert!((prox_lipschitz_constant(1.0, 0.999).unwrap() - 1000.0).abs() < 1e-9);
        assert!(prox_lipschitz_constant(1.0, 1.0).is_err());
    }
}
