//! Box-restricted lower estimates of the nonconvexity criterion
//! `NC(g) = sup g(l x + (1-l) y) - l g(x) - (1-l) g(y)`.
//!
//! Candidates `(x, y, l)` come from a seeded low-discrepancy sequence. After
//! every block of [`BLOCK`] candidates a pattern search polishes the
//! incumbent, if it changed. The budget is rounded up to whole blocks, so a
//! larger budget replays a smaller one as a prefix and never returns less.

use std::cmp::Ordering;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::envelope::envelope_function;
use crate::error::{Error, Result};
use crate::model::{chord_residual, AxisBox, FunctionSpec, Point};
use crate::prox::{check_gamma, prox};

pub const BLOCK: usize = 32;
/// Slack of the envelope comparison.
pub const COMPARISON_TOL: f64 = 1e-8;

const PATTERN_MAX_EVALS: usize = 4000;
const PATTERN_MIN_STEP: f64 = 1e-11;

#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub x: Point,
    pub y: Point,
    pub lambda: f64,
}

impl Witness {
    fn lex_cmp(&self, other: &Witness) -> Ordering {
        let lhs = self.x.iter().chain(self.y.iter()).chain(std::iter::once(&self.lambda));
        let rhs = other.x.iter().chain(other.y.iter()).chain(std::iter::once(&other.lambda));
        lhs.zip(rhs).map(|(a, b)| a.total_cmp(b)).find(|o| o.is_ne()).unwrap_or(Ordering::Equal)
    }
}

/// A lower estimate of `NC` over `sample_box`; `value` is the residual at `witness`.
#[derive(Debug, Clone, PartialEq)]
pub struct NcEstimate {
    pub value: f64,
    pub witness: Witness,
    pub sample_box: AxisBox,
    /// Number of sequence candidates evaluated (a whole number of blocks).
    pub budget: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NcComparison {
    pub envelope: NcEstimate,
    pub function: NcEstimate,
    /// `envelope.value <= function.value + COMPARISON_TOL`.
    pub ok: bool,
}

/// Additive recurrence with the generalized golden ratio in `dim` dimensions.
struct Kronecker {
    alpha: Vec<f64>,
    shift: Vec<f64>,
}

impl Kronecker {
    fn new(dim: usize, seed: u64) -> Self {
        // Positive root of t^(dim+1) = t + 1.
        let mut g: f64 = 2.0;
        for _ in 0..64 {
            let f = g.powi(dim as i32 + 1) - g - 1.0;
            let df = (dim as f64 + 1.0) * g.powi(dim as i32) - 1.0;
            g -= f / df;
        }
        let alpha = (1..=dim).map(|i| (1.0 / g).powi(i as i32).fract()).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let shift = (0..dim).map(|_| rng.gen::<f64>()).collect();
        Kronecker { alpha, shift }
    }

    fn point(&self, index: usize) -> Vec<f64> {
        let n = (index + 1) as f64;
        self.alpha.iter().zip(&self.shift).map(|(a, s)| (s + n * a).fract()).collect()
    }
}

fn lerp(lo: f64, hi: f64, t: f64) -> f64 {
    lo + (hi - lo) * t
}

fn witness_from_unit(sample_box: &AxisBox, u: &[f64]) -> Witness {
    let d = sample_box.dim();
    let coord = |i: usize, t: f64| lerp(sample_box.lower[i], sample_box.upper[i], t);
    Witness {
        x: Point::new((0..d).map(|i| coord(i, u[i])).collect()),
        y: Point::new((0..d).map(|i| coord(i, u[d + i])).collect()),
        lambda: u[2 * d],
    }
}

struct Search<'a> {
    f: &'a FunctionSpec,
    sample_box: &'a AxisBox,
    best: Option<(f64, Witness)>,
}

impl Search<'_> {
    fn residual(&self, w: &Witness) -> Result<f64> {
        chord_residual(self.f, &w.x, &w.y, w.lambda)
    }

    fn offer(&mut self, value: f64, w: Witness) -> bool {
        let better = match &self.best {
            None => true,
            Some((bv, bw)) => value > *bv || (value == *bv && w.lex_cmp(bw).is_lt()),
        };
        if better {
            self.best = Some((value, w));
        }
        better
    }

    /// Compass search over `(x, y, l)` from the incumbent, clipped to the box.
    fn refine(&mut self) -> Result<()> {
        let Some((mut value, mut w)) = self.best.clone() else {
            return Ok(());
        };
        let d = self.sample_box.dim();
        let widths: Vec<f64> = (0..d).map(|i| self.sample_box.upper[i] - self.sample_box.lower[i]).collect();
        let mut step = 0.125;
        let mut evals = 0;
        while step > PATTERN_MIN_STEP && evals < PATTERN_MAX_EVALS {
            let mut improved = false;
            for coord in 0..=2 * d {
                for sign in [1.0, -1.0] {
                    let mut trial = w.clone();
                    if coord == 2 * d {
                        trial.lambda = (w.lambda + sign * step).clamp(0.0, 1.0);
                    } else {
                        let i = coord % d;
                        let target = if coord < d { &mut trial.x } else { &mut trial.y };
                        let mut coords = target.clone().into_vec();
                        coords[i] = (coords[i] + sign * step * widths[i])
                            .clamp(self.sample_box.lower[i], self.sample_box.upper[i]);
                        *target = Point::new(coords);
                    }
                    evals += 1;
                    let v = self.residual(&trial)?;
                    if v > value {
                        value = v;
                        w = trial;
                        improved = true;
                    }
                }
            }
            if !improved {
                step *= 0.5;
            }
        }
        self.offer(value, w);
        Ok(())
    }
}

pub fn nc_estimate(f: &FunctionSpec, sample_box: &AxisBox, budget: usize, seed: u64) -> Result<NcEstimate> {
    nc_estimate_seeded(f, sample_box, budget, seed, &[])
}

/// Like [`nc_estimate`], with `extra` witnesses evaluated before the sequence.
/// Extras outside the box are ignored.
pub fn nc_estimate_seeded(
    f: &FunctionSpec,
    sample_box: &AxisBox,
    budget: usize,
    seed: u64,
    extra: &[Witness],
) -> Result<NcEstimate> {
    if sample_box.dim() != f.dim() {
        return Err(Error::DimensionMismatch { expected: f.dim(), got: sample_box.dim() });
    }
    if let Some(domain) = f.domain() {
        if !domain.contains(&sample_box.lower) || !domain.contains(&sample_box.upper) {
            return Err(Error::InvalidArgument("sampling box must lie inside the domain".into()));
        }
    }
    let blocks = budget.max(1).div_ceil(BLOCK);
    let sequence = Kronecker::new(2 * f.dim() + 1, seed);
    let mut search = Search { f, sample_box, best: None };

    for w in extra {
        let inside = sample_box.contains(&w.x) && sample_box.contains(&w.y) && (0.0..=1.0).contains(&w.lambda);
        if inside {
            let v = search.residual(w)?;
            search.offer(v, w.clone());
        }
    }
    let mut changed = !extra.is_empty();
    for block in 0..blocks {
        for j in 0..BLOCK {
            let w = witness_from_unit(sample_box, &sequence.point(block * BLOCK + j));
            let v = search.residual(&w)?;
            changed |= search.offer(v, w);
        }
        if changed {
            search.refine()?;
            changed = false;
        }
    }
    let (value, witness) = search.best.expect("at least one block evaluated");
    Ok(NcEstimate { value, witness, sample_box: sample_box.clone(), budget: blocks * BLOCK })
}

/// Paired estimates for `f^gamma` and `f` on the same candidate pool. The
/// `f` search also receives the proximal images of the envelope witness.
pub fn nc_envelope_comparison(
    f: &FunctionSpec,
    gamma: f64,
    sample_box: &AxisBox,
    budget: usize,
    seed: u64,
) -> Result<NcComparison> {
    check_gamma(f.rho(), gamma)?;
    let envelope = envelope_function(f, gamma)?;
    let env_nc = nc_estimate(&envelope, sample_box, budget, seed)?;
    let w = &env_nc.witness;
    let image = Witness {
        x: prox(f, gamma, &w.x)?.point,
        y: prox(f, gamma, &w.y)?.point,
        lambda: w.lambda,
    };
    let f_nc = nc_estimate_seeded(f, sample_box, budget, seed, &[image])?;
    let ok = env_nc.value <= f_nc.value + COMPARISON_TOL;
    Ok(NcComparison { envelope: env_nc, function: f_nc, ok })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zoo::make_function;
    use crate::model::ExtendedReal;

    fn entry(name: &str, params: &[f64]) -> crate::zoo::ZooEntry {
        make_function(name, params).unwrap()
    }

    fn cube() -> AxisBox {
        AxisBox::interval(-2.0, 2.0).unwrap()
    }

    #[test]
    fn convex_members_stay_non_positive() {
        for (name, params) in [("absolute_value", vec![]), ("quadratic", vec![2.0]), ("zero", vec![])] {
            let e = entry(name, &params);
            let est = nc_estimate(&e.spec, &cube(), 256, 7).unwrap();
            assert!(est.value <= 1e-12, "{name}: {}", est.value);
        }
        assert_eq!(nc_estimate(&entry("zero", &[]).spec, &cube(), 64, 1).unwrap().value, 0.0);
    }

    #[test]
    fn h_reaches_one_half() {
        let est = nc_estimate(&entry("paper_h", &[]).spec, &cube(), 512, 3).unwrap();
        assert!(est.value >= 0.5 - 1e-9, "{}", est.value);
        let w = &est.witness;
        let again = chord_residual(&entry("paper_h", &[]).spec, &w.x, &w.y, w.lambda).unwrap();
        assert_eq!(again, est.value);
    }

    #[test]
    fn box_must_stay_in_domain() {
        let f = make_function("indicator", &[0.0, 1.0]).unwrap().spec;
        assert!(nc_estimate(&f, &AxisBox::interval(0.0, 1.0).unwrap(), 32, 1).is_ok());
        assert!(matches!(nc_estimate(&f, &AxisBox::interval(-1.0, 1.0).unwrap(), 32, 1), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn budget_is_monotone_and_rounded() {
        let h = entry("double_well", &[]).spec;
        let small = nc_estimate(&h, &cube(), 40, 11).unwrap();
        let large = nc_estimate(&h, &cube(), 80, 11).unwrap();
        assert_eq!(small.budget, 64);
        assert!(large.value >= small.value);
    }

    #[test]
    fn infinite_values_are_rejected() {
        let half_line = FunctionSpec::new("half_line", 1, 0.0, |x: &[f64]| {
            if x[0] < 0.0 {
                ExtendedReal::PosInfinity
            } else {
                ExtendedReal::ZERO
            }
        })
        .unwrap();
        assert_eq!(nc_estimate(&half_line, &cube(), 32, 0), Err(Error::InfiniteValue("chord residual")));
    }

    #[test]
    fn envelope_comparison_examples() {
        let h = entry("paper_h", &[]).spec;
        let c = nc_envelope_comparison(&h, 0.25, &cube(), 256, 5).unwrap();
        assert!(c.ok, "{} vs {}", c.envelope.value, c.function.value);
        let z = nc_envelope_comparison(&entry("zero", &[]).spec, 0.5, &cube(), 64, 5).unwrap();
        assert_eq!((z.envelope.value, z.function.value, z.ok), (0.0, 0.0, true));
        let a = nc_envelope_comparison(&entry("absolute_value", &[]).spec, 0.5, &cube(), 128, 5).unwrap();
        assert!(a.ok && a.envelope.value <= 1e-12 && a.function.value <= 1e-12);
    }
}
