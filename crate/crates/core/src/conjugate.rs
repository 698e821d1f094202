//! Convex conjugates `f*(x) = sup_y <x, y> - f(y)`, Fenchel-Young gaps and
//! inf-convolutions.
//!
//! Strongly convex differentiable functions are handled by the inner solver
//! in any dimension. Everything else is one-dimensional and uses a dense
//! grid, one refinement pass around the incumbent, and an unboundedness
//! probe on the doubled box.

use crate::envelope::envelope_function;
use crate::error::{Error, Result};
use crate::model::{dot, AxisBox, ExtendedReal, FunctionSpec, Point};
use crate::solver::{minimize_strongly_convex, minimize_unimodal_1d, SolverOptions};

#[derive(Debug, Clone, PartialEq)]
pub struct ConjugateValue {
    /// `+inf` exactly when `bounded` is false.
    pub value: ExtendedReal,
    pub maximizer: Option<Point>,
    pub bounded: bool,
}

impl ConjugateValue {
    fn unbounded() -> Self {
        ConjugateValue { value: ExtendedReal::PosInfinity, maximizer: None, bounded: false }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConjugateOptions {
    /// Primal search box; defaults to the domain box, else `[-10, 10]^d`.
    pub search_box: Option<AxisBox>,
    pub points: usize,
    /// The refinement pass uses spacing `h / refine`.
    pub refine: usize,
    /// The sup is unbounded when doubling the box raises it by more than
    /// `(growth - 1) |sup|` with the argmax on the boundary of the doubled box.
    pub growth: f64,
    pub unbounded_tol: f64,
    pub solver: SolverOptions,
}

impl Default for ConjugateOptions {
    fn default() -> Self {
        ConjugateOptions {
            search_box: None,
            points: 4001,
            refine: 10,
            growth: 1.5,
            unbounded_tol: 1e-9,
            solver: SolverOptions { tol: 1e-12, ..SolverOptions::default() },
        }
    }
}

/// `lo + (hi - lo) k / (n - 1)`; exact at both ends and at the midpoint.
pub fn grid_point(lo: f64, hi: f64, k: usize, n: usize) -> f64 {
    if n < 2 {
        return 0.5 * (lo + hi);
    }
    if k == n - 1 {
        return hi;
    }
    lo + (hi - lo) * (k as f64 / (n - 1) as f64)
}

pub fn conjugate_value(f: &FunctionSpec, x: &[f64]) -> Result<ConjugateValue> {
    conjugate_value_with(f, x, &ConjugateOptions::default())
}

pub fn conjugate_value_with(f: &FunctionSpec, x: &[f64], options: &ConjugateOptions) -> Result<ConjugateValue> {
    f.check_point(x)?;
    if f.rho() < 0.0 && f.is_differentiable() && f.domain().is_none() {
        return conjugate_by_solver(f, x, &options.solver);
    }
    if f.dim() != 1 {
        return Err(Error::Unsupported(format!("grid conjugate of {} in dimension {}", f.name(), f.dim())));
    }
    conjugate_by_grid(f, x[0], options)
}

fn conjugate_by_solver(f: &FunctionSpec, x: &[f64], solver: &SolverOptions) -> Result<ConjugateValue> {
    let solver = SolverOptions { lipschitz: f.curvature_bound().filter(|l| *l > 0.0), ..solver.clone() };
    let value = |y: &[f64]| f.value_unchecked(y).to_f64() - dot(x, y);
    let gradient = |y: &[f64]| {
        let g = f.gradient(y).ok()?;
        Some(g.iter().zip(x).map(|(gi, xi)| gi - xi).collect())
    };
    let certificate = minimize_strongly_convex(value, gradient, -f.rho(), &Point::zeros(f.dim()), &solver)?;
    if !certificate.converged {
        return Err(Error::NotConverged { iterations: certificate.iterations, residual: certificate.residual });
    }
    Ok(ConjugateValue {
        value: ExtendedReal::Finite(-certificate.value),
        maximizer: Some(certificate.minimizer),
        bounded: true,
    })
}

/// Grid argmax of `x y - f(y)` over `[lo, hi]`: `(index, y, value)`.
fn grid_sup(f: &FunctionSpec, x: f64, lo: f64, hi: f64, n: usize) -> Option<(usize, f64, f64)> {
    let mut best: Option<(usize, f64, f64)> = None;
    for k in 0..n {
        let y = grid_point(lo, hi, k, n);
        if let Some(fy) = f.value_unchecked(&[y]).finite() {
            let v = x * y - fy;
            if best.map_or(true, |(_, _, bv)| v > bv) {
                best = Some((k, y, v));
            }
        }
    }
    best
}

fn conjugate_by_grid(f: &FunctionSpec, x: f64, options: &ConjugateOptions) -> Result<ConjugateValue> {
    let search = match (&options.search_box, f.domain()) {
        (Some(b), _) => b.clone(),
        (None, Some(d)) => d.clone(),
        (None, None) => AxisBox::interval(-10.0, 10.0)?,
    };
    let (lo, hi) = (search.lower[0], search.upper[0]);
    let n = options.points.max(3);
    let (_, y0, v0) = grid_sup(f, x, lo, hi, n).ok_or(Error::EmptyGrid)?;

    let doubled = search.scaled(2.0);
    let (lo2, hi2) = (doubled.lower[0], doubled.upper[0]);
    if let Some((k2, _, v2)) = grid_sup(f, x, lo2, hi2, n) {
        let on_boundary = k2 == 0 || k2 == n - 1;
        if on_boundary && v2 - v0 > (options.growth - 1.0) * v0.abs() + options.unbounded_tol {
            return Ok(ConjugateValue::unbounded());
        }
    }

    let h = if n > 1 { (hi - lo) / (n - 1) as f64 } else { 0.0 };
    let (a, b) = ((y0 - h).max(lo), (y0 + h).min(hi));
    let (mut y_best, mut v_best) = (y0, v0);
    // A concave objective can be polished exactly; otherwise use a finer grid.
    let polished = if f.rho() <= 0.0 {
        let neg = |y: f64| f.value_unchecked(&[y]).to_f64() - x * y;
        minimize_unimodal_1d(neg, a, b, options.solver.tol).ok()
    } else {
        None
    };
    match polished {
        Some(c) if -c.value > v_best => {
            y_best = c.minimizer[0];
            v_best = -c.value;
        }
        Some(_) => {}
        None => {
            let m = 2 * options.refine.max(1) + 1;
            if let Some((_, y, v)) = grid_sup(f, x, a, b, m) {
                if v > v_best {
                    y_best = y;
                    v_best = v;
                }
            }
        }
    }
    Ok(ConjugateValue { value: ExtendedReal::Finite(v_best), maximizer: Some(Point::scalar(y_best)), bounded: true })
}

/// `f(x) + f*(y) - <x, y>`, non-negative by the Fenchel-Young inequality.
pub fn fenchel_young_gap(f: &FunctionSpec, x: &[f64], y: &[f64]) -> Result<f64> {
    fenchel_young_gap_with(f, x, y, &ConjugateOptions::default())
}

pub fn fenchel_young_gap_with(f: &FunctionSpec, x: &[f64], y: &[f64], options: &ConjugateOptions) -> Result<f64> {
    let fx = f.evaluate(x)?.finite().ok_or(Error::InfiniteValue("Fenchel-Young gap"))?;
    let conj = conjugate_value_with(f, y, options)?;
    let fy = conj.value.finite().ok_or(Error::UnboundedConjugate)?;
    Ok(fx + fy - dot(x, y))
}

/// `f**(x) = sup_w x w - f*(w)` with `f*` tabulated on `points` nodes of
/// `dual`; unbounded nodes are skipped. One-dimensional.
pub fn biconjugate_value(
    f: &FunctionSpec,
    x: f64,
    dual: &AxisBox,
    points: usize,
    options: &ConjugateOptions,
) -> Result<f64> {
    if f.dim() != 1 || dual.dim() != 1 {
        return Err(Error::Unsupported("biconjugate in dimension > 1".into()));
    }
    let table = conjugate_table(f, dual.lower[0], dual.upper[0], points, options)?;
    biconjugate_from_table(&table, x)
}

/// `(w, f*(w))` on a uniform grid, `+inf` where unbounded.
pub fn conjugate_table(f: &FunctionSpec, lo: f64, hi: f64, points: usize, options: &ConjugateOptions) -> Result<Vec<(f64, ExtendedReal)>> {
    (0..points)
        .map(|k| {
            let w = grid_point(lo, hi, k, points);
            Ok((w, conjugate_value_with(f, &[w], options)?.value))
        })
        .collect()
}

pub fn biconjugate_from_table(table: &[(f64, ExtendedReal)], x: f64) -> Result<f64> {
    table
        .iter()
        .filter_map(|(w, v)| v.finite().map(|v| x * w - v))
        .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.max(v))))
        .ok_or(Error::EmptyGrid)
}

/// Sampling for [`inf_conv_value`]: nodes `y = x + k h` for
/// `|k h| <= half_width`, then one pass at spacing `h / refine` around the
/// incumbent.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub half_width: f64,
    pub points: usize,
    pub refine: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { half_width: 5.0, points: 4001, refine: 10 }
    }
}

/// `min_y f(y) + g(x - y)` over a grid centered at `x`. One-dimensional.
pub fn inf_conv_value(f: &FunctionSpec, g: &FunctionSpec, x: &[f64], grid: &GridSpec) -> Result<f64> {
    f.check_point(x)?;
    g.check_point(x)?;
    if f.dim() != 1 {
        return Err(Error::Unsupported("inf-convolution in dimension > 1".into()));
    }
    if !(grid.half_width > 0.0) || grid.points < 3 {
        return Err(Error::InvalidArgument("grid needs a positive half-width and at least 3 points".into()));
    }
    let x = x[0];
    let objective = |y: f64| f.value_unchecked(&[y]) + g.value_unchecked(&[x - y]);
    // Offsets from a center; the middle offset is exactly zero.
    let scan = |center: f64, half: f64, n: usize| {
        (0..n)
            .filter_map(|k| {
                let y = center + grid_point(-half, half, k, n);
                objective(y).finite().map(|v| (y, v))
            })
            .fold(None, |best: Option<(f64, f64)>, (y, v)| match best {
                Some((_, bv)) if bv <= v => best,
                _ => Some((y, v)),
            })
    };
    // An odd count puts y = x on the grid.
    let n = grid.points | 1;
    let (y0, v0) = scan(x, grid.half_width, n).ok_or(Error::EmptyGrid)?;
    let h = 2.0 * grid.half_width / (n - 1) as f64;
    let m = 2 * grid.refine.max(1) + 1;
    let refined = scan(y0, h, m).map_or(v0, |(_, v)| v.min(v0));
    Ok(refined)
}

/// `|(f^gamma)*(x) - (f*(x) + gamma |x|^2 / 2)|` for convex `f`.
pub fn envelope_conjugate_identity_gap(f: &FunctionSpec, gamma: f64, x: &[f64]) -> Result<f64> {
    envelope_conjugate_identity_gap_with(f, gamma, x, &ConjugateOptions::default())
}

pub fn envelope_conjugate_identity_gap_with(
    f: &FunctionSpec,
    gamma: f64,
    x: &[f64],
    options: &ConjugateOptions,
) -> Result<f64> {
    if f.rho() > 0.0 {
        return Err(Error::NotConvex(f.rho()));
    }
    let envelope = envelope_function(f, gamma)?;
    let lhs = conjugate_value_with(&envelope, x, options)?.value.finite().ok_or(Error::UnboundedConjugate)?;
    let rhs = conjugate_value_with(f, x, options)?.value.finite().ok_or(Error::UnboundedConjugate)?;
    Ok((lhs - (rhs + 0.5 * gamma * dot(x, x))).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zoo::make_function;

    fn spec(name: &str, params: &[f64]) -> FunctionSpec {
        make_function(name, params).unwrap().spec
    }

    #[test]
    fn quadratic_conjugate() {
        let q = spec("quadratic", &[2.0]);
        let c = conjugate_value(&q, &[1.0]).unwrap();
        assert!((c.value.to_f64() - 0.25).abs() <= 1e-12);
        assert!((c.maximizer.unwrap()[0] - 0.5).abs() <= 1e-12);
        let d = spec("diag_quadratic", &[1.0, 4.0]);
        let c = conjugate_value(&d, &[1.0, 2.0]).unwrap();
        assert!((c.value.to_f64() - (0.5 + 0.5)).abs() <= 1e-12);
    }

    #[test]
    fn absolute_value_conjugate_is_an_indicator() {
        let f = spec("absolute_value", &[]);
        let c = conjugate_value(&f, &[0.5]).unwrap();
        assert!(c.bounded && c.value.to_f64().abs() <= 1e-12);
        let c = conjugate_value(&f, &[2.0]).unwrap();
        assert!(!c.bounded && c.value == ExtendedReal::PosInfinity && c.maximizer.is_none());
        let c = conjugate_value(&f, &[-1.0]).unwrap();
        assert!(c.bounded && c.value.to_f64().abs() <= 1e-12);
    }

    #[test]
    fn zero_conjugate() {
        let z = spec("zero", &[]);
        assert_eq!(conjugate_value(&z, &[0.0]).unwrap().value, ExtendedReal::Finite(0.0));
        for x in [1e-3, -0.5, 3.0] {
            assert!(!conjugate_value(&z, &[x]).unwrap().bounded, "x = {x}");
        }
    }

    #[test]
    fn indicator_conjugate_is_support_function() {
        let f = spec("indicator", &[0.0, 1.0]);
        assert!((conjugate_value(&f, &[3.0]).unwrap().value.to_f64() - 3.0).abs() <= 1e-12);
        assert!(conjugate_value(&f, &[-3.0]).unwrap().value.to_f64().abs() <= 1e-12);
    }

    #[test]
    fn nonconvex_conjugates() {
        assert!(!conjugate_value(&spec("quadratic", &[-1.0]), &[0.3]).unwrap().bounded);
        // sup_y -(y^2 - 1)^2 = 0.
        let dw = conjugate_value(&spec("double_well", &[]), &[0.0]).unwrap();
        assert!(dw.bounded && dw.value.to_f64().abs() <= 1e-8);
    }

    #[test]
    fn fenchel_young_examples() {
        let q = spec("quadratic", &[2.0]);
        assert!(fenchel_young_gap(&q, &[1.0], &[2.0]).unwrap().abs() <= 1e-12);
        assert!(fenchel_young_gap(&q, &[1.0], &[-1.0]).unwrap() >= 0.0);
        let abs = spec("absolute_value", &[]);
        assert!(fenchel_young_gap(&abs, &[3.0], &[1.0]).unwrap().abs() <= 1e-12);
        assert_eq!(fenchel_young_gap(&abs, &[3.0], &[2.0]), Err(Error::UnboundedConjugate));
    }

    #[test]
    fn inf_convolution_examples() {
        let abs = spec("absolute_value", &[]);
        let v = inf_conv_value(&abs, &abs, &[1.4], &GridSpec::default()).unwrap();
        assert!((v - 1.4).abs() <= 1e-12);
        let point = spec("indicator", &[0.0, 0.0]);
        let h = spec("paper_h", &[]);
        let v = inf_conv_value(&h, &point, &[0.3], &GridSpec::default()).unwrap();
        assert_eq!(v, crate::zoo::h_value(0.3));
        let kernel = spec("quadratic", &[1.0 / 0.25]);
        let v = inf_conv_value(&h, &kernel, &[0.3], &GridSpec::default()).unwrap();
        assert!((v - crate::zoo::h_envelope(0.25, 0.3)).abs() <= 1e-6);
        let empty = spec("indicator", &[100.0, 101.0]);
        assert_eq!(inf_conv_value(&empty, &point, &[0.0], &GridSpec::default()), Err(Error::EmptyGrid));
    }

    #[test]
    fn envelope_conjugate_examples() {
        let q = spec("quadratic", &[1.0]);
        assert!(envelope_conjugate_identity_gap(&q, 1.0, &[1.0]).unwrap() <= 1e-10);
        let abs = spec("absolute_value", &[]);
        assert!(envelope_conjugate_identity_gap(&abs, 1.0, &[0.5]).unwrap() <= 1e-8);
        assert!(envelope_conjugate_identity_gap(&abs, 1.0, &[0.0]).unwrap() <= 1e-12);
        assert_eq!(envelope_conjugate_identity_gap(&spec("paper_h", &[]), 0.25, &[0.0]), Err(Error::NotConvex(2.0)));
    }

    #[test]
    fn biconjugate_recovers_convex_functions() {
        let dual = AxisBox::interval(-3.0, 3.0).unwrap();
        let abs = spec("absolute_value", &[]);
        let table = conjugate_table(&abs, -3.0, 3.0, 601, &ConjugateOptions::default()).unwrap();
        for x in [-1.5, -0.2, 0.0, 0.7] {
            assert!((biconjugate_from_table(&table, x).unwrap() - x.abs()).abs() <= 1e-9);
        }
        let q = spec("quadratic", &[2.0]);
        let v = biconjugate_value(&q, 0.4, &dual, 601, &ConjugateOptions::default()).unwrap();
        assert!((v - 0.16).abs() <= 1e-4);
    }
}
