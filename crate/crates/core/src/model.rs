//! Proper, lower-semicontinuous, weakly convex functions represented as
//! bundles of oracles.
//!
//! A [`FunctionSpec`] carries a value oracle plus optional gradient, Hessian
//! and closed-form prox/envelope oracles, together with its declared
//! weak-convexity modulus `rho`: the function `f` is `rho`-weakly convex when
//! `f + rho/2 |.|^2` is convex. Negative `rho` declares `(-rho)`-strong
//! convexity. The modulus is declared, never inferred; the sampled
//! [`FunctionSpec::weak_convexity_residual`] validates a declaration.

use std::fmt;
use std::ops::{Add, Deref, Mul, Sub};
use std::sync::Arc;

use crate::error::{Error, Result};

/// A finite real or the `+inf` sentinel. `-inf` never occurs.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub enum ExtendedReal {
    Finite(f64),
    PosInfinity,
}

impl ExtendedReal {
    pub const ZERO: ExtendedReal = ExtendedReal::Finite(0.0);

    pub fn is_finite(self) -> bool {
        matches!(self, ExtendedReal::Finite(v) if v.is_finite())
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            ExtendedReal::Finite(v) => Some(v),
            ExtendedReal::PosInfinity => None,
        }
    }

    /// Lossy view as `f64`, mapping the sentinel to `f64::INFINITY`.
    pub fn to_f64(self) -> f64 {
        match self {
            ExtendedReal::Finite(v) => v,
            ExtendedReal::PosInfinity => f64::INFINITY,
        }
    }
}

impl From<f64> for ExtendedReal {
    fn from(v: f64) -> Self {
        if v == f64::INFINITY {
            ExtendedReal::PosInfinity
        } else {
            ExtendedReal::Finite(v)
        }
    }
}

impl Add for ExtendedReal {
    type Output = ExtendedReal;

    fn add(self, rhs: ExtendedReal) -> ExtendedReal {
        match (self, rhs) {
            (ExtendedReal::Finite(a), ExtendedReal::Finite(b)) => ExtendedReal::Finite(a + b),
            _ => ExtendedReal::PosInfinity,
        }
    }
}

impl Add<f64> for ExtendedReal {
    type Output = ExtendedReal;

    fn add(self, rhs: f64) -> ExtendedReal {
        self + ExtendedReal::Finite(rhs)
    }
}

impl fmt::Display for ExtendedReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedReal::Finite(v) => write!(f, "{v:?}"),
            ExtendedReal::PosInfinity => f.write_str("inf"),
        }
    }
}

/// A point of `R^d`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Point(Vec<f64>);

impl Point {
    pub fn new(coordinates: Vec<f64>) -> Self {
        Point(coordinates)
    }

    pub fn scalar(v: f64) -> Self {
        Point(vec![v])
    }

    pub fn zeros(dim: usize) -> Self {
        Point(vec![0.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    pub fn dot(&self, other: &[f64]) -> f64 {
        dot(&self.0, other)
    }

    pub fn norm_sq(&self) -> f64 {
        dot(&self.0, &self.0)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn distance(&self, other: &[f64]) -> f64 {
        distance_sq(&self.0, other).sqrt()
    }

    /// First coordinate; convenient for one-dimensional work.
    pub fn first(&self) -> f64 {
        self.0[0]
    }
}

impl Deref for Point {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl From<Vec<f64>> for Point {
    fn from(v: Vec<f64>) -> Self {
        Point(v)
    }
}

impl From<&[f64]> for Point {
    fn from(v: &[f64]) -> Self {
        Point(v.to_vec())
    }
}

impl From<f64> for Point {
    fn from(v: f64) -> Self {
        Point(vec![v])
    }
}

impl Add for &Point {
    type Output = Point;

    fn add(self, rhs: &Point) -> Point {
        Point(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &Point {
    type Output = Point;

    fn sub(self, rhs: &Point) -> Point {
        Point(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl Mul<f64> for &Point {
    type Output = Point;

    fn mul(self, rhs: f64) -> Point {
        Point(self.0.iter().map(|a| a * rhs).collect())
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn distance_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Symmetric second-derivative matrix. Diagonal storage covers every
/// separable function; dense storage is accepted but only diagonal dense
/// matrices can be inverted by the envelope Hessian.
#[derive(Debug, Clone, PartialEq)]
pub enum Hessian {
    Diagonal(Vec<f64>),
    /// Row-major `dim x dim` entries.
    Dense { dim: usize, entries: Vec<f64> },
}

impl Hessian {
    pub fn scalar(v: f64) -> Self {
        Hessian::Diagonal(vec![v])
    }

    pub fn dim(&self) -> usize {
        match self {
            Hessian::Diagonal(d) => d.len(),
            Hessian::Dense { dim, .. } => *dim,
        }
    }

    /// The diagonal, when the matrix has no off-diagonal entries.
    pub fn diagonal(&self) -> Option<Vec<f64>> {
        match self {
            Hessian::Diagonal(d) => Some(d.clone()),
            Hessian::Dense { dim, entries } => {
                let n = *dim;
                let off_diagonal_zero = (0..n)
                    .flat_map(|i| (0..n).map(move |j| (i, j)))
                    .filter(|(i, j)| i != j)
                    .all(|(i, j)| entries[i * n + j] == 0.0);
                off_diagonal_zero.then(|| (0..n).map(|i| entries[i * n + i]).collect())
            }
        }
    }

    /// `v^T H v`.
    pub fn quadratic_form(&self, v: &[f64]) -> f64 {
        match self {
            Hessian::Diagonal(d) => d.iter().zip(v).map(|(h, x)| h * x * x).sum(),
            Hessian::Dense { dim, entries } => {
                let n = *dim;
                (0..n)
                    .map(|i| v[i] * (0..n).map(|j| entries[i * n + j] * v[j]).sum::<f64>())
                    .sum()
            }
        }
    }

    fn shifted(&self, rho: f64) -> Hessian {
        match self {
            Hessian::Diagonal(d) => Hessian::Diagonal(d.iter().map(|h| h + rho).collect()),
            Hessian::Dense { dim, entries } => {
                let mut entries = entries.clone();
                for i in 0..*dim {
                    entries[i * dim + i] += rho;
                }
                Hessian::Dense { dim: *dim, entries }
            }
        }
    }
}

/// Axis-aligned box `[lower_i, upper_i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AxisBox {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl AxisBox {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() || lower.is_empty() {
            return Err(Error::InvalidArgument("box bounds must have equal, positive length".into()));
        }
        if lower.iter().zip(&upper).any(|(l, u)| l.is_nan() || u.is_nan() || l > u) {
            return Err(Error::InvalidArgument("box requires lower <= upper".into()));
        }
        Ok(AxisBox { lower, upper })
    }

    /// The cube `[lo, hi]^dim`.
    pub fn cube(dim: usize, lo: f64, hi: f64) -> Result<Self> {
        AxisBox::new(vec![lo; dim], vec![hi; dim])
    }

    pub fn interval(lo: f64, hi: f64) -> Result<Self> {
        AxisBox::new(vec![lo], vec![hi])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .all(|(v, (l, u))| *v >= *l && *v <= *u)
    }

    pub fn clamp(&self, x: &[f64]) -> Point {
        Point(
            x.iter()
                .zip(self.lower.iter().zip(&self.upper))
                .map(|(v, (l, u))| v.clamp(*l, *u))
                .collect(),
        )
    }

    /// Same center, every half-width multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> AxisBox {
        let (lower, upper) = self
            .lower
            .iter()
            .zip(&self.upper)
            .map(|(l, u)| {
                let c = 0.5 * (l + u);
                let h = 0.5 * (u - l) * factor;
                (c - h, c + h)
            })
            .unzip();
        AxisBox { lower, upper }
    }
}

pub type ValueOracle = Arc<dyn Fn(&[f64]) -> ExtendedReal + Send + Sync>;
/// Returns `None` at points flagged nondifferentiable.
pub type GradientOracle = Arc<dyn Fn(&[f64]) -> Option<Vec<f64>> + Send + Sync>;
/// Returns `None` at points flagged not twice differentiable.
pub type HessianOracle = Arc<dyn Fn(&[f64]) -> Option<Hessian> + Send + Sync>;
/// `(gamma, x) -> Prox_{gamma f}(x)`.
pub type ProxOracle = Arc<dyn Fn(f64, &[f64]) -> Vec<f64> + Send + Sync>;
/// `(gamma, x) -> f^gamma(x)`.
pub type EnvelopeOracle = Arc<dyn Fn(f64, &[f64]) -> f64 + Send + Sync>;

/// A proper, lsc, `rho`-weakly convex function on `R^dim` given by oracles.
///
/// Immutable after construction; all oracles are pure and may be called
/// from several threads at once.
#[derive(Clone)]
pub struct FunctionSpec {
    name: String,
    dim: usize,
    rho: f64,
    value: ValueOracle,
    gradient: Option<GradientOracle>,
    hessian: Option<HessianOracle>,
    differentiable: bool,
    curvature_bound: Option<f64>,
    domain: Option<AxisBox>,
    analytic_prox: Option<ProxOracle>,
    analytic_envelope: Option<EnvelopeOracle>,
}

impl fmt::Debug for FunctionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FunctionSpec")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("rho", &self.rho)
            .field("gradient", &self.gradient.is_some())
            .field("hessian", &self.hessian.is_some())
            .field("differentiable", &self.differentiable)
            .field("curvature_bound", &self.curvature_bound)
            .field("domain", &self.domain)
            .field("analytic_prox", &self.analytic_prox.is_some())
            .field("analytic_envelope", &self.analytic_envelope.is_some())
            .finish()
    }
}

impl FunctionSpec {
    pub fn new<V>(name: impl Into<String>, dim: usize, rho: f64, value: V) -> Result<Self>
    where
        V: Fn(&[f64]) -> ExtendedReal + Send + Sync + 'static,
    {
        if dim == 0 {
            return Err(Error::InvalidArgument("dimension must be positive".into()));
        }
        if !rho.is_finite() {
            return Err(Error::InvalidArgument("rho must be finite".into()));
        }
        Ok(FunctionSpec {
            name: name.into(),
            dim,
            rho,
            value: Arc::new(value),
            gradient: None,
            hessian: None,
            differentiable: false,
            curvature_bound: None,
            domain: None,
            analytic_prox: None,
            analytic_envelope: None,
        })
    }

    /// Gradient defined on the whole domain; enables the gradient inner solver.
    pub fn with_gradient<G>(mut self, gradient: G) -> Self
    where
        G: Fn(&[f64]) -> Option<Vec<f64>> + Send + Sync + 'static,
    {
        self.gradient = Some(Arc::new(gradient));
        self.differentiable = true;
        self
    }

    /// Gradient that is missing at some points (kinks). The inner solver
    /// will not rely on it.
    pub fn with_partial_gradient<G>(mut self, gradient: G) -> Self
    where
        G: Fn(&[f64]) -> Option<Vec<f64>> + Send + Sync + 'static,
    {
        self.gradient = Some(Arc::new(gradient));
        self.differentiable = false;
        self
    }

    pub fn with_hessian<H>(mut self, hessian: H) -> Self
    where
        H: Fn(&[f64]) -> Option<Hessian> + Send + Sync + 'static,
    {
        self.hessian = Some(Arc::new(hessian));
        self
    }

    /// Upper bound `L` on the curvature, `grad^2 f <= L I`.
    pub fn with_curvature_bound(mut self, bound: f64) -> Self {
        self.curvature_bound = Some(bound);
        self
    }

    /// Value is `+inf` outside `domain`.
    pub fn with_domain(mut self, domain: AxisBox) -> Result<Self> {
        if domain.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: domain.dim() });
        }
        self.domain = Some(domain);
        Ok(self)
    }

    pub fn with_analytic_prox<P>(mut self, prox: P) -> Self
    where
        P: Fn(f64, &[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        self.analytic_prox = Some(Arc::new(prox));
        self
    }

    pub fn with_analytic_envelope<E>(mut self, envelope: E) -> Self
    where
        E: Fn(f64, &[f64]) -> f64 + Send + Sync + 'static,
    {
        self.analytic_envelope = Some(Arc::new(envelope));
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn is_differentiable(&self) -> bool {
        self.differentiable && self.gradient.is_some()
    }

    pub fn has_gradient(&self) -> bool {
        self.gradient.is_some()
    }

    pub fn has_hessian(&self) -> bool {
        self.hessian.is_some()
    }

    pub fn curvature_bound(&self) -> Option<f64> {
        self.curvature_bound
    }

    pub fn domain(&self) -> Option<&AxisBox> {
        self.domain.as_ref()
    }

    pub fn analytic_prox(&self) -> Option<&ProxOracle> {
        self.analytic_prox.as_ref()
    }

    pub fn analytic_envelope(&self) -> Option<&EnvelopeOracle> {
        self.analytic_envelope.as_ref()
    }

    pub(crate) fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: x.len() });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinitePoint);
        }
        Ok(())
    }

    pub(crate) fn in_domain(&self, x: &[f64]) -> bool {
        self.domain.as_ref().map_or(true, |d| d.contains(x))
    }

    /// `f(x)`; `+inf` outside the domain box.
    pub fn evaluate(&self, x: &[f64]) -> Result<ExtendedReal> {
        self.check_point(x)?;
        Ok(self.value_unchecked(x))
    }

    pub(crate) fn value_unchecked(&self, x: &[f64]) -> ExtendedReal {
        if !self.in_domain(x) {
            return ExtendedReal::PosInfinity;
        }
        (self.value)(x)
    }

    /// `grad f(x)`.
    pub fn gradient(&self, x: &[f64]) -> Result<Point> {
        self.check_point(x)?;
        let oracle = self.gradient.as_ref().ok_or(Error::GradientUnavailable)?;
        if !self.in_domain(x) {
            return Err(Error::GradientUnavailable);
        }
        let g = oracle(x).ok_or(Error::GradientUnavailable)?;
        if g.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: g.len() });
        }
        Ok(Point(g))
    }

    pub fn hessian(&self, x: &[f64]) -> Result<Hessian> {
        self.check_point(x)?;
        let oracle = self.hessian.as_ref().ok_or(Error::HessianUnavailable)?;
        if !self.in_domain(x) {
            return Err(Error::HessianUnavailable);
        }
        let h = oracle(x).ok_or(Error::HessianUnavailable)?;
        if h.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: h.dim() });
        }
        Ok(h)
    }

    /// `f(lx + (1-l)y) - l f(x) - (1-l) f(y) - rho/2 l(1-l) |x-y|^2`.
    ///
    /// Non-positive (up to rounding) for every triple when `rho` is a valid
    /// weak-convexity modulus.
    pub fn weak_convexity_residual(&self, x: &[f64], y: &[f64], lambda: f64) -> Result<f64> {
        self.check_point(x)?;
        self.check_point(y)?;
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::InvalidArgument(format!("lambda = {lambda} outside [0, 1]")));
        }
        let chord = chord_residual(self, x, y, lambda)?;
        let penalty = 0.5 * self.rho * lambda * (1.0 - lambda) * distance_sq(x, y);
        Ok(chord - penalty)
    }

    /// The convex function `g_rho = g + rho/2 |.|^2`, declared with modulus 0.
    ///
    /// Value, gradient and Hessian oracles are shifted together. Closed-form
    /// prox/envelope oracles are dropped unless `rho == 0`.
    pub fn shift_to_convex(&self) -> FunctionSpec {
        let rho = self.rho;
        if rho == 0.0 {
            return self.clone();
        }
        let value = Arc::clone(&self.value);
        let mut shifted = FunctionSpec {
            name: format!("shift({},{rho:?})", self.name),
            dim: self.dim,
            rho: 0.0,
            value: Arc::new(move |x: &[f64]| value(x) + 0.5 * rho * dot(x, x)),
            gradient: None,
            hessian: None,
            differentiable: self.differentiable,
            curvature_bound: self.curvature_bound.map(|l| (l + rho).max(0.0)),
            domain: self.domain.clone(),
            analytic_prox: None,
            analytic_envelope: None,
        };
        if let Some(gradient) = &self.gradient {
            let gradient = Arc::clone(gradient);
            shifted.gradient = Some(Arc::new(move |x: &[f64]| {
                gradient(x).map(|g| g.iter().zip(x).map(|(gi, xi)| gi + rho * xi).collect())
            }));
        }
        if let Some(hessian) = &self.hessian {
            let hessian = Arc::clone(hessian);
            shifted.hessian = Some(Arc::new(move |x: &[f64]| hessian(x).map(|h| h.shifted(rho))));
        }
        shifted
    }
}

/// `f(lx + (1-l)y) - l f(x) - (1-l) f(y)`; errors on `+inf` at any of the
/// three evaluation points.
pub(crate) fn chord_residual(f: &FunctionSpec, x: &[f64], y: &[f64], lambda: f64) -> Result<f64> {
    let mid: Vec<f64> = x.iter().zip(y).map(|(a, b)| lambda * a + (1.0 - lambda) * b).collect();
    let finite = |v: ExtendedReal| v.finite().ok_or(Error::InfiniteValue("chord residual"));
    let fx = finite(f.value_unchecked(x))?;
    let fy = finite(f.value_unchecked(y))?;
    let fm = finite(f.value_unchecked(&mid))?;
    Ok(fm - lambda * fx - (1.0 - lambda) * fy)
}
