//! Closed-form test functions with exact moduli, proxes and envelopes.
//!
//! | name | modulus | closed forms |
//! |---|---|---|
//! | `zero` | 0 | prox = identity, envelope = 0 |
//! | `quadratic(a)` | `-a` | `x / (1 + g a)`, `a x^2 / (2 (1 + g a))` |
//! | `absolute_value` | 0 | soft threshold, Huber |
//! | `paper_h` | 2 | piecewise, valid for `g < 1/2` |
//! | `indicator(a,b)` | 0 | clamp, `dist^2 / (2 g)` |
//! | `double_well` | 4 | none |
//! | `diag_quadratic(a1,..,ad)` | `-min ai` | per axis |

use std::fmt;

use crate::error::{Error, Result};
use crate::model::{AxisBox, ExtendedReal, FunctionSpec, Hessian, Point};
use crate::prox::{prox_with, ProxOptions};
use crate::solver::SolverOptions;

/// Points closer than this to a kink or branch boundary are flagged
/// nondifferentiable.
pub const KINK_TOL: f64 = 1e-12;

pub const FUNCTION_NAMES: [&str; 7] =
    ["zero", "quadratic", "absolute_value", "paper_h", "indicator", "double_well", "diag_quadratic"];

#[derive(Debug, Clone)]
pub struct ZooEntry {
    pub spec: FunctionSpec,
    pub params: Vec<f64>,
    pub critical_points: Vec<Point>,
    pub minimizers: Vec<Point>,
    /// `None` when the function is unbounded below.
    pub min_value: Option<f64>,
    /// Global gradient Lipschitz constant `L_g`, when finite.
    pub smoothness: Option<f64>,
    /// Box for random sampling; lies inside the domain.
    pub sample_box: AxisBox,
}

impl ZooEntry {
    pub fn name(&self) -> &str {
        self.spec.name()
    }

    /// `name` or `name(p1,p2,..)`, the form accepted by [`parse_function`].
    pub fn label(&self) -> String {
        FunctionLabel { name: self.spec.name(), params: &self.params }.to_string()
    }
}

struct FunctionLabel<'a> {
    name: &'a str,
    params: &'a [f64],
}

impl fmt::Display for FunctionLabel<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name)?;
        if !self.params.is_empty() {
            let params: Vec<String> = self.params.iter().map(|p| format!("{p:?}")).collect();
            write!(f, "({})", params.join(","))?;
        }
        Ok(())
    }
}

fn default_box(dim: usize) -> AxisBox {
    AxisBox::cube(dim, -2.0, 2.0).expect("valid cube")
}

fn expect_params(name: &str, params: &[f64], count: usize) -> Result<()> {
    if params.len() != count {
        return Err(Error::InvalidParams(format!("{name} takes {count} parameter(s), got {}", params.len())));
    }
    if params.iter().any(|p| !p.is_finite()) {
        return Err(Error::InvalidParams(format!("{name} parameters must be finite")));
    }
    Ok(())
}

/// Builds a zoo member by name.
pub fn make_function(name: &str, params: &[f64]) -> Result<ZooEntry> {
    match name {
        "zero" => {
            expect_params(name, params, 0)?;
            Ok(zero())
        }
        "quadratic" => {
            expect_params(name, params, 1)?;
            diag_quadratic_named("quadratic", params.to_vec())
        }
        "absolute_value" => {
            expect_params(name, params, 0)?;
            Ok(absolute_value())
        }
        "paper_h" => {
            expect_params(name, params, 0)?;
            Ok(paper_h())
        }
        "indicator" => {
            expect_params(name, params, 2)?;
            indicator(params[0], params[1])
        }
        "double_well" => {
            expect_params(name, params, 0)?;
            Ok(double_well())
        }
        "diag_quadratic" => {
            if params.is_empty() || params.iter().any(|p| !p.is_finite()) {
                return Err(Error::InvalidParams("diag_quadratic takes one or more finite coefficients".into()));
            }
            diag_quadratic_named("diag_quadratic", params.to_vec())
        }
        other => Err(Error::UnknownFunction(other.to_string())),
    }
}

/// Parses `name` or `name(p1,p2,..)` into a name and parameter list.
pub fn parse_function(text: &str) -> Result<(String, Vec<f64>)> {
    let text = text.trim();
    let Some(open) = text.find('(') else {
        return Ok((text.to_string(), Vec::new()));
    };
    let inner = text[open + 1..]
        .strip_suffix(')')
        .ok_or_else(|| Error::InvalidParams(format!("unbalanced parentheses in `{text}`")))?;
    let params = if inner.trim().is_empty() {
        Vec::new()
    } else {
        inner
            .split(',')
            .map(|p| {
                p.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::InvalidParams(format!("cannot parse `{}` as a number", p.trim())))
            })
            .collect::<Result<Vec<f64>>>()?
    };
    Ok((text[..open].trim().to_string(), params))
}

/// `make_function` on the output of [`parse_function`].
pub fn function_from_str(text: &str) -> Result<ZooEntry> {
    let (name, params) = parse_function(text)?;
    make_function(&name, &params)
}

/// The members used by the invariant suites, one representative per shape.
pub fn suite_members() -> Vec<ZooEntry> {
    [
        ("zero", vec![]),
        ("quadratic", vec![2.0]),
        ("quadratic", vec![-1.0]),
        ("absolute_value", vec![]),
        ("paper_h", vec![]),
        ("indicator", vec![0.0, 1.0]),
        ("double_well", vec![]),
        ("diag_quadratic", vec![1.0, 3.0]),
    ]
    .into_iter()
    .map(|(name, params)| make_function(name, &params).expect("valid zoo member"))
    .collect()
}

fn zero() -> ZooEntry {
    let spec = FunctionSpec::new("zero", 1, 0.0, |_: &[f64]| ExtendedReal::ZERO)
        .expect("valid spec")
        .with_gradient(|x: &[f64]| Some(vec![0.0; x.len()]))
        .with_hessian(|x: &[f64]| Some(Hessian::Diagonal(vec![0.0; x.len()])))
        .with_curvature_bound(0.0)
        .with_analytic_prox(|_, x: &[f64]| x.to_vec())
        .with_analytic_envelope(|_, _: &[f64]| 0.0);
    ZooEntry {
        spec,
        params: vec![],
        critical_points: vec![Point::scalar(0.0)],
        minimizers: vec![Point::scalar(0.0)],
        min_value: Some(0.0),
        smoothness: Some(0.0),
        sample_box: default_box(1),
    }
}

fn diag_quadratic_named(name: &str, alphas: Vec<f64>) -> Result<ZooEntry> {
    let dim = alphas.len();
    // Adding 0.0 turns a -0.0 modulus into +0.0.
    let rho = -alphas.iter().cloned().fold(f64::INFINITY, f64::min) + 0.0;
    let smoothness = alphas.iter().map(|a| a.abs()).fold(0.0, f64::max);
    let (a_val, a_grad, a_hess, a_prox, a_env) =
        (alphas.clone(), alphas.clone(), alphas.clone(), alphas.clone(), alphas.clone());
    let spec = FunctionSpec::new(name, dim, rho, move |x: &[f64]| {
        ExtendedReal::Finite(a_val.iter().zip(x).map(|(a, v)| 0.5 * a * v * v).sum())
    })?
    .with_gradient(move |x: &[f64]| Some(a_grad.iter().zip(x).map(|(a, v)| a * v).collect()))
    .with_hessian(move |_: &[f64]| Some(Hessian::Diagonal(a_hess.clone())))
    .with_curvature_bound(smoothness)
    .with_analytic_prox(move |gamma, x: &[f64]| a_prox.iter().zip(x).map(|(a, v)| v / (1.0 + gamma * a)).collect())
    .with_analytic_envelope(move |gamma, x: &[f64]| {
        a_env.iter().zip(x).map(|(a, v)| a * v * v / (2.0 * (1.0 + gamma * a))).sum()
    });
    let bounded_below = alphas.iter().all(|a| *a >= 0.0);
    Ok(ZooEntry {
        spec,
        params: alphas,
        critical_points: vec![Point::zeros(dim)],
        minimizers: if bounded_below { vec![Point::zeros(dim)] } else { vec![] },
        min_value: bounded_below.then_some(0.0),
        smoothness: Some(smoothness),
        sample_box: default_box(dim),
    })
}

fn absolute_value() -> ZooEntry {
    let spec = FunctionSpec::new("absolute_value", 1, 0.0, |x: &[f64]| ExtendedReal::Finite(x[0].abs()))
        .expect("valid spec")
        .with_partial_gradient(|x: &[f64]| (x[0].abs() > KINK_TOL).then(|| vec![x[0].signum()]))
        .with_analytic_prox(|gamma, x: &[f64]| vec![x[0].signum() * (x[0].abs() - gamma).max(0.0)])
        .with_analytic_envelope(|gamma, x: &[f64]| {
            let a = x[0].abs();
            if a <= gamma {
                a * a / (2.0 * gamma)
            } else {
                a - 0.5 * gamma
            }
        });
    ZooEntry {
        spec,
        params: vec![],
        critical_points: vec![Point::scalar(0.0)],
        minimizers: vec![Point::scalar(0.0)],
        min_value: Some(0.0),
        smoothness: None,
        sample_box: default_box(1),
    }
}

/// `h(x) = 1/2 - x^2` on `|x| <= 1/2`, `(|x| - 1)^2` outside.
pub fn h_value(x: f64) -> f64 {
    if x.abs() <= 0.5 {
        0.5 - x * x
    } else {
        (x.abs() - 1.0).powi(2)
    }
}

/// Closed-form `Prox_{gamma h}(x)` for `0 < gamma < 1/2`.
pub fn h_prox(gamma: f64, x: f64) -> f64 {
    let knee = 0.5 - gamma;
    if x.abs() <= knee {
        x / (1.0 - 2.0 * gamma)
    } else if x > 0.0 {
        (x + 2.0 * gamma) / (1.0 + 2.0 * gamma)
    } else {
        (x - 2.0 * gamma) / (1.0 + 2.0 * gamma)
    }
}

/// Closed-form `h^gamma(x)` for `0 < gamma < 1/2`.
pub fn h_envelope(gamma: f64, x: f64) -> f64 {
    if x.abs() <= 0.5 - gamma {
        0.5 - x * x / (1.0 - 2.0 * gamma)
    } else {
        (x.abs() - 1.0).powi(2) / (1.0 + 2.0 * gamma)
    }
}

fn paper_h() -> ZooEntry {
    let spec = FunctionSpec::new("paper_h", 1, 2.0, |x: &[f64]| ExtendedReal::Finite(h_value(x[0])))
        .expect("valid spec")
        .with_gradient(|x: &[f64]| {
            let t = x[0];
            Some(vec![if t.abs() <= 0.5 { -2.0 * t } else { 2.0 * (t.abs() - 1.0) * t.signum() }])
        })
        .with_hessian(|x: &[f64]| {
            let t = x[0].abs();
            if (t - 0.5).abs() <= KINK_TOL {
                None
            } else {
                Some(Hessian::scalar(if t < 0.5 { -2.0 } else { 2.0 }))
            }
        })
        .with_curvature_bound(2.0)
        .with_analytic_prox(|gamma, x: &[f64]| vec![h_prox(gamma, x[0])])
        .with_analytic_envelope(|gamma, x: &[f64]| h_envelope(gamma, x[0]));
    ZooEntry {
        spec,
        params: vec![],
        critical_points: vec![Point::scalar(-1.0), Point::scalar(0.0), Point::scalar(1.0)],
        minimizers: vec![Point::scalar(-1.0), Point::scalar(1.0)],
        min_value: Some(0.0),
        smoothness: Some(2.0),
        sample_box: default_box(1),
    }
}

fn indicator(a: f64, b: f64) -> Result<ZooEntry> {
    if a > b {
        return Err(Error::InvalidParams(format!("indicator requires a <= b, got a = {a}, b = {b}")));
    }
    let domain = AxisBox::interval(a, b)?;
    let spec = FunctionSpec::new("indicator", 1, 0.0, |_: &[f64]| ExtendedReal::ZERO)?
        .with_partial_gradient(move |x: &[f64]| (x[0] - a > KINK_TOL && b - x[0] > KINK_TOL).then(|| vec![0.0]))
        .with_domain(domain.clone())?
        .with_analytic_prox(move |_, x: &[f64]| vec![x[0].clamp(a, b)])
        .with_analytic_envelope(move |gamma, x: &[f64]| {
            let d = x[0] - x[0].clamp(a, b);
            d * d / (2.0 * gamma)
        });
    let mid = Point::scalar(0.5 * (a + b));
    Ok(ZooEntry {
        spec,
        params: vec![a, b],
        critical_points: vec![mid.clone()],
        minimizers: vec![Point::scalar(a), mid, Point::scalar(b)],
        min_value: Some(0.0),
        smoothness: None,
        sample_box: domain,
    })
}

fn double_well() -> ZooEntry {
    let spec = FunctionSpec::new("double_well", 1, 4.0, |x: &[f64]| {
        let t = x[0] * x[0] - 1.0;
        ExtendedReal::Finite(t * t)
    })
    .expect("valid spec")
    .with_gradient(|x: &[f64]| Some(vec![4.0 * x[0] * (x[0] * x[0] - 1.0)]))
    .with_hessian(|x: &[f64]| Some(Hessian::scalar(12.0 * x[0] * x[0] - 4.0)));
    ZooEntry {
        spec,
        params: vec![],
        critical_points: vec![Point::scalar(-1.0), Point::scalar(0.0), Point::scalar(1.0)],
        minimizers: vec![Point::scalar(-1.0), Point::scalar(1.0)],
        min_value: Some(0.0),
        smoothness: None,
        sample_box: default_box(1),
    }
}

/// Numeric-versus-closed-form comparison at one `(gamma, x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CrosscheckRow {
    pub function: String,
    pub gamma: f64,
    pub x: Point,
    /// `|numeric prox - analytic prox|`, when a closed-form prox exists.
    pub prox_error: Option<f64>,
    /// `|numeric envelope - analytic envelope|`, when a closed-form envelope exists.
    pub env_error: Option<f64>,
}

impl CrosscheckRow {
    pub fn worst(&self) -> f64 {
        self.prox_error.into_iter().chain(self.env_error).fold(0.0, f64::max)
    }
}

/// Runs the inner solver with `solver_tol` and compares against the closed forms.
pub fn oracle_crosscheck(entry: &ZooEntry, gamma: f64, x: &[f64]) -> Result<CrosscheckRow> {
    oracle_crosscheck_with(entry, gamma, x, 1e-12)
}

pub fn oracle_crosscheck_with(entry: &ZooEntry, gamma: f64, x: &[f64], solver_tol: f64) -> Result<CrosscheckRow> {
    let f = &entry.spec;
    if f.analytic_prox().is_none() && f.analytic_envelope().is_none() {
        return Err(Error::Unsupported(format!("{} has no closed forms to cross-check", f.name())));
    }
    let numeric = ProxOptions {
        solver: SolverOptions { tol: solver_tol, ..SolverOptions::default() },
        ..ProxOptions::numeric()
    };
    let p = prox_with(f, gamma, x, &numeric)?.point;
    let prox_error = f.analytic_prox().map(|oracle| p.distance(&oracle(gamma, x)));
    let env_error = match f.analytic_envelope() {
        Some(oracle) => {
            let fp = f.evaluate(&p)?.finite().ok_or(Error::InfiniteValue("envelope"))?;
            let numeric_env = fp + crate::model::distance_sq(x, &p) / (2.0 * gamma);
            Some((numeric_env - oracle(gamma, x)).abs())
        }
        None => None,
    };
    Ok(CrosscheckRow { function: entry.label(), gamma, x: Point::from(x), prox_error, env_error })
}
