//! Seeded invariant suites run by `moreau check`.
//!
//! Each suite samples the zoo, evaluates one inequality or identity per
//! check and reports the worst violation against a fixed limit. Suites run
//! on separate threads and are merged by suite name, so the report depends
//! only on the seed and tolerance.

use std::fmt::Display;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::conjugate::{
    biconjugate_from_table, conjugate_table, conjugate_value_with, envelope_conjugate_identity_gap,
    fenchel_young_gap_with, ConjugateOptions,
};
use crate::envelope::{
    env_gradient_with, env_hessian_with, env_moduli, env_value_with, gamma_profile_with, hj_residual_with,
};
use crate::error::Result;
use crate::model::{dot, AxisBox, ExtendedReal, Point};
use crate::nc::{nc_envelope_comparison, nc_estimate};
use crate::numdiff::{central_difference, central_gradient, second_difference_diagonal};
use crate::prox::{
    moreau_decomposition_with, prox_inverse_residual_with, prox_via_reduction_with, prox_with, ProxOptions,
};
use crate::report::{PropertyReport, PropertyRow};
use crate::solver::{minimize_strongly_convex, SolverOptions};
use crate::zoo::{h_envelope, make_function, oracle_crosscheck, suite_members, ZooEntry};

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteConfig {
    pub seed: u64,
    /// Limit for the oracle cross-check and Hamilton-Jacobi checks.
    pub tolerance: f64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig { seed: 42, tolerance: 1e-8 }
    }
}

pub const SUITE_NAMES: [&str; 7] = ["conjugate", "envelope", "func_model", "inner_solver", "nc", "prox", "zoo"];

type SuiteFn = fn(&SuiteConfig) -> Vec<PropertyRow>;

const SUITES: [(&str, SuiteFn); 7] = [
    ("conjugate", conjugate_suite),
    ("envelope", envelope_suite),
    ("func_model", func_model_suite),
    ("inner_solver", inner_solver_suite),
    ("nc", nc_suite),
    ("prox", prox_suite),
    ("zoo", zoo_suite),
];

/// Runs every suite, one thread each.
pub fn run_all(config: &SuiteConfig) -> PropertyReport {
    let mut results: Vec<(&str, Vec<PropertyRow>)> = std::thread::scope(|scope| {
        let handles: Vec<_> = SUITES
            .iter()
            .map(|(name, suite)| (*name, scope.spawn(move || suite(config))))
            .collect();
        handles
            .into_iter()
            .map(|(name, h)| (name, h.join().expect("suite thread panicked")))
            .collect()
    });
    results.sort_by(|a, b| a.0.cmp(b.0));
    PropertyReport { seed: config.seed, rows: results.into_iter().flat_map(|(_, rows)| rows).collect() }
}

pub fn run_suite(name: &str, config: &SuiteConfig) -> Option<PropertyReport> {
    let (_, suite) = SUITES.iter().find(|(n, _)| *n == name)?;
    Some(PropertyReport { seed: config.seed, rows: suite(config) })
}

fn fnv1a(tag: &str) -> u64 {
    tag.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}

/// Independent stream per check so that adding a check never shifts another.
fn rng_for(seed: u64, tag: &str) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ fnv1a(tag))
}

fn uniform_point(rng: &mut ChaCha8Rng, b: &AxisBox) -> Point {
    Point::new(b.lower.iter().zip(&b.upper).map(|(l, u)| rng.gen_range(*l..=*u)).collect())
}

/// Admissible gammas `[0.05 g_max, g_max]` with `g_max = 0.9 / rho`, or 1 for convex members.
fn gamma_bounds(rho: f64) -> (f64, f64) {
    let hi = if rho > 0.0 { 0.9 / rho } else { 1.0 };
    (0.05 * hi, hi)
}

fn random_gamma(rng: &mut ChaCha8Rng, rho: f64) -> f64 {
    let (lo, hi) = gamma_bounds(rho);
    rng.gen_range(lo..=hi)
}

fn tight() -> ProxOptions {
    ProxOptions::default().with_tol(1e-12)
}

struct Check {
    row: PropertyRow,
    errors: usize,
    first_error: Option<String>,
    skipped: usize,
    nan: bool,
}

impl Check {
    fn new(suite: &str, check: &str, function: &str, limit: f64, seed: u64) -> Self {
        Check {
            row: PropertyRow {
                suite: suite.into(),
                check: check.into(),
                function: function.into(),
                samples: 0,
                worst: f64::NEG_INFINITY,
                limit,
                passed: false,
                seed,
                detail: String::new(),
            },
            errors: 0,
            first_error: None,
            skipped: 0,
            nan: false,
        }
    }

    fn observe(&mut self, v: f64) {
        self.row.samples += 1;
        if v.is_nan() {
            self.nan = true;
        } else if v > self.row.worst {
            self.row.worst = v;
        }
    }

    fn fail(&mut self, e: impl Display) {
        self.errors += 1;
        self.first_error.get_or_insert_with(|| e.to_string());
    }

    fn observe_result(&mut self, r: Result<f64>) {
        match r {
            Ok(v) => self.observe(v),
            Err(e) => self.fail(e),
        }
    }

    fn skip(&mut self) {
        self.skipped += 1;
    }

    /// True when nothing was measured and nothing failed.
    fn vacuous(&self) -> bool {
        self.row.samples == 0 && self.errors == 0
    }

    fn finish(mut self) -> PropertyRow {
        let mut notes = Vec::new();
        if let Some(e) = &self.first_error {
            notes.push(format!("{} error(s), first: {e}", self.errors));
        }
        if self.nan {
            notes.push("NaN observed".to_string());
        }
        if self.skipped > 0 {
            notes.push(format!("{} skipped", self.skipped));
        }
        if self.row.samples == 0 {
            notes.push("no samples".to_string());
        }
        self.row.passed =
            self.errors == 0 && !self.nan && self.row.samples > 0 && self.row.worst <= self.row.limit;
        self.row.detail = notes.join("; ");
        self.row
    }
}

fn finite_value(entry: &ZooEntry, x: &[f64]) -> Option<f64> {
    entry.spec.evaluate(x).ok().and_then(ExtendedReal::finite)
}

fn func_model_suite(config: &SuiteConfig) -> Vec<PropertyRow> {
    const SUITE: &str = "func_model";
    let seed = config.seed;
    let mut rows = Vec::new();
    for entry in suite_members() {
        let label = entry.label();
        let f = &entry.spec;
        let rho = f.rho();

        let mut rng = rng_for(seed, &format!("{SUITE}/weak_convexity/{label}"));
        let mut c = Check::new(SUITE, "weak_convexity_residual", &label, 1e-9, seed);
        for _ in 0..1000 {
            let x = uniform_point(&mut rng, &entry.sample_box);
            let y = uniform_point(&mut rng, &entry.sample_box);
            c.observe_result(f.weak_convexity_residual(&x, &y, rng.gen_range(0.0..=1.0)));
        }
        rows.push(c.finish());

        if !f.has_gradient() {
            continue;
        }
        let mut rng = rng_for(seed, &format!("{SUITE}/gradient_fd/{label}"));
        let mut c = Check::new(SUITE, "gradient_vs_central_difference", &label, 1e-5, seed);
        for _ in 0..100 {
            let x = uniform_point(&mut rng, &entry.sample_box);
            let Ok(g) = f.gradient(&x) else {
                c.skip();
                continue;
            };
            let fd = central_gradient(|y| f.evaluate(y).map_or(f64::NAN, ExtendedReal::to_f64), &x);
            if fd.iter().any(|v| !v.is_finite()) {
                c.skip();
                continue;
            }
            c.observe(g.distance(&fd) / (1.0 + g.norm()));
        }
        rows.push(c.finish());

        let mut rng = rng_for(seed, &format!("{SUITE}/gradient_monotone/{label}"));
        let mut c = Check::new(SUITE, "gradient_hypomonotone", &label, 1e-9, seed);
        for _ in 0..1000 {
            let x = uniform_point(&mut rng, &entry.sample_box);
            let y = uniform_point(&mut rng, &entry.sample_box);
            match (f.gradient(&x), f.gradient(&y)) {
                (Ok(gx), Ok(gy)) => {
                    let d = &x - &y;
                    c.observe(-rho * d.norm_sq() - d.dot(&(&gx - &gy)));
                }
                _ => c.skip(),
            }
        }
        rows.push(c.finish());

        if !f.has_hessian() {
            continue;
        }
        let mut rng = rng_for(seed, &format!("{SUITE}/hessian/{label}"));
        let mut c = Check::new(SUITE, "hessian_lower_bound", &label, 1e-9, seed);
        for _ in 0..1000 {
            let x = uniform_point(&mut rng, &entry.sample_box);
            let mut v: Vec<f64> = (0..f.dim()).map(|_| rng.gen_range(-1.0..=1.0)).collect();
            let n = dot(&v, &v).sqrt();
            if n < 1e-3 {
                c.skip();
                continue;
            }
            v.iter_mut().for_each(|a| *a /= n);
            match f.hessian(&x) {
                Ok(h) => c.observe(-rho - h.quadratic_form(&v)),
                Err(_) => c.skip(),
            }
        }
        rows.push(c.finish());
    }
    rows
}

fn inner_solver_suite(config: &SuiteConfig) -> Vec<PropertyRow> {
    const SUITE: &str = "inner_solver";
    let seed = config.seed;
    let mut rows = Vec::new();
    let tol = 1e-10;
    for entry in suite_members().into_iter().filter(|e| e.spec.is_differentiable()) {
        let label = entry.label();
        let f = &entry.spec;
        let mut rng = rng_for(seed, &format!("{SUITE}/{label}"));
        let mut unique = Check::new(SUITE, "distinct_starts_agree", &label, 0.0, seed);
        let mut descent = Check::new(SUITE, "monotone_descent", &label, 0.0, seed);
        for _ in 0..200 {
            let x = uniform_point(&mut rng, &entry.sample_box);
            let gamma = random_gamma(&mut rng, f.rho());
            let mu = 1.0 / gamma - f.rho();
            let value = |y: &[f64]| f.evaluate(y).map_or(f64::NAN, ExtendedReal::to_f64) + crate::model::distance_sq(&x, y) / (2.0 * gamma);
            let gradient = |y: &[f64]| {
                let g = f.gradient(y).ok()?;
                Some(g.iter().zip(y.iter().zip(x.iter())).map(|(gi, (yi, xi))| gi + (yi - xi) / gamma).collect())
            };
            let options = SolverOptions { tol, ..SolverOptions::default() };
            let start_b = uniform_point(&mut rng, &entry.sample_box);
            let a = minimize_strongly_convex(value, gradient, mu, &x, &options);
            let b = minimize_strongly_convex(value, gradient, mu, &start_b, &options);
            match (a, b) {
                (Ok(a), Ok(b)) if !(a.converged && b.converged) => {
                    unique.fail(format!("not converged, residuals {} and {}", a.residual, b.residual));
                    descent.skip();
                }
                (Ok(a), Ok(b)) => {
                    unique.observe(a.minimizer.distance(&b.minimizer) - 2.0 * tol / mu);
                    descent.observe(a.value - value(&x));
                    descent.observe(b.value - value(&start_b));
                }
                (Err(e), _) | (_, Err(e)) => {
                    unique.fail(&e);
                    descent.fail(e);
                }
            }
        }
        rows.push(unique.finish());
        rows.push(descent.finish());
    }

    let mut c = Check::new(SUITE, "quadratic_iterations", "diag_quadratic", 200.0, seed);
    let mut rng = rng_for(seed, &format!("{SUITE}/quadratic_iterations"));
    for _ in 0..50 {
        let alphas: Vec<f64> = (0..3).map(|_| rng.gen_range(0.1..=5.0)).collect();
        let x0 = Point::new((0..3).map(|_| rng.gen_range(-5.0..=5.0)).collect());
        let lipschitz = alphas.iter().cloned().fold(0.0, f64::max);
        let modulus = alphas.iter().cloned().fold(f64::INFINITY, f64::min);
        let value = |y: &[f64]| alphas.iter().zip(y).map(|(a, v)| 0.5 * a * v * v).sum::<f64>();
        let gradient = |y: &[f64]| Some(alphas.iter().zip(y).map(|(a, v)| a * v).collect());
        let options = SolverOptions { tol: 1e-10, lipschitz: Some(lipschitz), ..SolverOptions::default() };
        match minimize_strongly_convex(value, gradient, modulus, &x0, &options) {
            Ok(cert) if cert.converged => c.observe(cert.iterations as f64),
            Ok(cert) => c.fail(format!("not converged after {}", cert.iterations)),
            Err(e) => c.fail(e),
        }
    }
    rows.push(c.finish());
    rows
}

fn prox_suite(config: &SuiteConfig) -> Vec<PropertyRow> {
    const SUITE: &str = "prox";
    let seed = config.seed;
    let options = tight();
    let mut rows = Vec::new();
    for entry in suite_members() {
        let label = entry.label();
        let f = &entry.spec;
        let rho = f.rho();
        let outer = entry.sample_box.scaled(1.5);

        let mut rng = rng_for(seed, &format!("{SUITE}/pairs/{label}"));
        let mut coco = Check::new(SUITE, "cocoercivity", &label, 1e-9, seed);
        let mut lip = Check::new(SUITE, "lipschitz", &label, 1e-9, seed);
        for _ in 0..10_000 {
            let x = uniform_point(&mut rng, &outer);
            let y = uniform_point(&mut rng, &outer);
            let gamma = random_gamma(&mut rng, rho);
            let scale = 1.0 - gamma * rho;
            match (prox_with(f, gamma, &x, &options), prox_with(f, gamma, &y, &options)) {
                (Ok(p), Ok(q)) => {
                    let dp = &p.point - &q.point;
                    let dx = &x - &y;
                    coco.observe(dp.norm_sq() - dx.dot(&dp) / scale);
                    lip.observe(dp.norm() - dx.norm() / scale);
                }
                (Err(e), _) | (_, Err(e)) => {
                    coco.fail(&e);
                    lip.fail(e);
                }
            }
        }
        rows.push(coco.finish());
        rows.push(lip.finish());

        let mut rng = rng_for(seed, &format!("{SUITE}/technical/{label}"));
        let mut c = Check::new(SUITE, "three_point_inequality", &label, 1e-9, seed);
        for _ in 0..2000 {
            let x = uniform_point(&mut rng, &outer);
            let y = uniform_point(&mut rng, &entry.sample_box);
            let gamma = random_gamma(&mut rng, rho);
            let Some(gy) = finite_value(&entry, &y) else {
                c.skip();
                continue;
            };
            match prox_with(f, gamma, &x, &options) {
                Ok(p) => {
                    let p = p.point;
                    let gp = finite_value(&entry, &p).unwrap_or(f64::NAN);
                    let lhs = gp + (&x - &p).dot(&(&y - &p)) / gamma;
                    let rhs = gy + 0.5 * rho * (&y - &p).norm_sq();
                    c.observe(lhs - rhs);
                }
                Err(e) => c.fail(e),
            }
        }
        rows.push(c.finish());

        let mut rng = rng_for(seed, &format!("{SUITE}/reduction/{label}"));
        let mut c = Check::new(SUITE, "reduction_agrees", &label, 1e-7, seed);
        let shrink = (rho / 2.0).max(1.0);
        for _ in 0..30 {
            let x = uniform_point(&mut rng, &outer);
            for base in [0.05, 0.25, 0.45] {
                let gamma = base / shrink;
                match (prox_with(f, gamma, &x, &options), prox_via_reduction_with(f, gamma, &x, &options)) {
                    (Ok(a), Ok(b)) => c.observe(a.point.distance(&b.point)),
                    (Err(e), _) | (_, Err(e)) => c.fail(e),
                }
            }
        }
        rows.push(c.finish());

        if f.is_differentiable() {
            let mut rng = rng_for(seed, &format!("{SUITE}/inverse/{label}"));
            let mut c = Check::new(SUITE, "inverse_identity", &label, 1e-7, seed);
            for _ in 0..1000 {
                let x = uniform_point(&mut rng, &entry.sample_box);
                let gamma = random_gamma(&mut rng, rho);
                c.observe_result(prox_inverse_residual_with(f, gamma, &x, &options));
            }
            rows.push(c.finish());
        }
    }
    rows
}

fn gamma_grid(rho: f64, n: usize) -> Vec<f64> {
    let (lo, hi) = gamma_bounds(rho);
    (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
}

fn envelope_suite(config: &SuiteConfig) -> Vec<PropertyRow> {
    const SUITE: &str = "envelope";
    let seed = config.seed;
    let options = tight();
    let mut rows = Vec::new();
    for entry in suite_members() {
        let label = entry.label();
        let f = &entry.spec;
        let rho = f.rho();
        let env = |gamma: f64, x: &[f64]| env_value_with(f, gamma, x, &options).unwrap_or(f64::NAN);

        let mut rng = rng_for(seed, &format!("{SUITE}/derivatives/{label}"));
        let mut grad = Check::new(SUITE, "gradient_vs_central_difference", &label, 1e-5, seed);
        let mut dgam = Check::new(SUITE, "dgamma_vs_central_difference", &label, 1e-5, seed);
        let mut hj = Check::new(SUITE, "hamilton_jacobi", &label, config.tolerance, seed);
        let mut optimal = Check::new(SUITE, "gradient_equals_grad_f_at_prox", &label, 1e-7, seed);
        for _ in 0..100 {
            let x = uniform_point(&mut rng, &entry.sample_box);
            let gamma = random_gamma(&mut rng, rho);
            let report = match crate::envelope::envelope_report_with(f, gamma, &x, &options) {
                Ok(r) => r,
                Err(e) => {
                    grad.fail(e);
                    continue;
                }
            };
            let fd = central_gradient(|y| env(gamma, y), &x);
            grad.observe(report.gradient.distance(&fd) / (1.0 + report.gradient.norm()));
            let fd_gamma = central_difference(|g| env(g, &x), gamma);
            dgam.observe((report.dgamma - fd_gamma).abs() / fd_gamma.abs().max(1.0));
            hj.observe_result(hj_residual_with(f, gamma, &x, &options));
            if f.is_differentiable() {
                match f.gradient(&report.prox) {
                    Ok(g) => optimal.observe(report.gradient.distance(&g)),
                    Err(_) => optimal.skip(),
                }
            }
        }
        rows.extend([grad.finish(), dgam.finish(), hj.finish()]);
        if f.is_differentiable() {
            rows.push(optimal.finish());
        }

        let mut rng = rng_for(seed, &format!("{SUITE}/convexity/{label}"));
        let mut weak = Check::new(SUITE, "envelope_weak_convexity", &label, 1e-9, seed);
        let mut convex = Check::new(SUITE, "envelope_convexity", &label, 1e-9, seed);
        for _ in 0..1000 {
            let x = uniform_point(&mut rng, &entry.sample_box.scaled(1.5));
            let y = uniform_point(&mut rng, &entry.sample_box.scaled(1.5));
            let lambda: f64 = rng.gen_range(0.0..=1.0);
            let gamma = random_gamma(&mut rng, rho);
            let m: Vec<f64> = x.iter().zip(y.iter()).map(|(a, b)| lambda * a + (1.0 - lambda) * b).collect();
            let chord = env(gamma, &m) - lambda * env(gamma, &x) - (1.0 - lambda) * env(gamma, &y);
            let modulus = rho / (1.0 - gamma * rho);
            weak.observe(chord - 0.5 * modulus * lambda * (1.0 - lambda) * (&x - &y).norm_sq());
            if rho <= 0.0 {
                convex.observe(chord);
            }
        }
        rows.push(weak.finish());
        if rho <= 0.0 {
            rows.push(convex.finish());
        }

        let mut rng = rng_for(seed, &format!("{SUITE}/lipschitz/{label}"));
        let mut lip = Check::new(SUITE, "gradient_lipschitz_vs_smooth_modulus", &label, 1e-6, seed);
        for _ in 0..10_000 {
            let x = uniform_point(&mut rng, &entry.sample_box.scaled(1.5));
            let y = uniform_point(&mut rng, &entry.sample_box.scaled(1.5));
            let gamma = random_gamma(&mut rng, rho);
            let dist = x.distance(&y);
            if dist < 1e-9 {
                lip.skip();
                continue;
            }
            match (env_gradient_with(f, gamma, &x, &options), env_gradient_with(f, gamma, &y, &options)) {
                (Ok(gx), Ok(gy)) => {
                    let smooth = env_moduli(rho, gamma, None).map_or(f64::NAN, |m| m.smooth);
                    lip.observe(gx.distance(&gy) / dist - smooth);
                }
                (Err(e), _) | (_, Err(e)) => lip.fail(e),
            }
        }
        rows.push(lip.finish());

        if f.has_hessian() {
            let mut rng = rng_for(seed, &format!("{SUITE}/hessian/{label}"));
            let mut c = Check::new(SUITE, "hessian_vs_second_difference", &label, 1e-4, seed);
            for _ in 0..100 {
                let x = uniform_point(&mut rng, &entry.sample_box);
                let gamma = random_gamma(&mut rng, rho);
                // Second differences straddling a curvature jump of f are meaningless.
                let probe = |t: f64| -> Option<Vec<f64>> {
                    let shifted: Vec<f64> = x.iter().map(|v| v + t).collect();
                    let p = prox_with(f, gamma, &shifted, &options).ok()?.point;
                    f.hessian(&p).ok()?.diagonal()
                };
                let h = crate::numdiff::second_step(x.iter().cloned().fold(0.0, |a: f64, b| a.max(b.abs())));
                let local = [probe(-4.0 * h), probe(0.0), probe(4.0 * h)];
                let jump = |a: &Option<Vec<f64>>, b: &Option<Vec<f64>>| match (a, b) {
                    (Some(a), Some(b)) => a.iter().zip(b).any(|(u, v)| (u - v).abs() > 0.5),
                    _ => true,
                };
                if jump(&local[0], &local[1]) || jump(&local[1], &local[2]) {
                    c.skip();
                    continue;
                }
                match env_hessian_with(f, gamma, &x, &options) {
                    Ok(hess) => {
                        let diag = hess.diagonal().unwrap_or_default();
                        let fd = second_difference_diagonal(|y| env(gamma, y), &x);
                        let err = diag
                            .iter()
                            .zip(&fd)
                            .map(|(a, b)| (a - b).abs() / a.abs().max(1.0))
                            .fold(0.0, f64::max);
                        c.observe(err);
                    }
                    Err(e) => c.fail(e),
                }
            }
            rows.push(c.finish());
        }

        let mut rng = rng_for(seed, &format!("{SUITE}/gamma_profile/{label}"));
        let mut env_mono = Check::new(SUITE, "envelope_non_increasing_in_gamma", &label, 1e-10, seed);
        let mut below = Check::new(SUITE, "envelope_below_function", &label, 1e-12, seed);
        let mut limit = Check::new(SUITE, "small_gamma_limit", &label, 1.0, seed);
        for _ in 0..20 {
            let x = uniform_point(&mut rng, &entry.sample_box);
            let mut grid = vec![1e-4];
            grid.extend(gamma_grid(rho, 10));
            match gamma_profile_with(f, &x, &grid, &options) {
                Ok(profile) => {
                    env_mono.observe(profile.max_env_increase());
                    below.observe(profile.max_env_excess());
                    if let Some((dp, de)) = profile.limit_gaps() {
                        // |x - p| <= gamma |grad f(x)| and 0 <= f(x) - env <= gamma |grad f(x)|^2 / 2
                        // with |grad f| <= 30 on every sampling box.
                        limit.observe((dp / (30.0 * 1e-4)).max(de / (450.0 * 1e-4)));
                    }
                }
                Err(e) => {
                    env_mono.fail(&e);
                    below.fail(e);
                }
            }
        }
        rows.extend([env_mono.finish(), below.finish(), limit.finish()]);

        let mut crit = Check::new(SUITE, "critical_points_preserved", &label, 0.0, seed);
        let mut rng = rng_for(seed, &format!("{SUITE}/critical/{label}"));
        let mut points = entry.critical_points.clone();
        points.extend((0..20).map(|_| uniform_point(&mut rng, &entry.sample_box)));
        for x in &points {
            let gamma = 0.5 * gamma_bounds(rho).1;
            let Ok(ge) = env_gradient_with(f, gamma, x, &options) else {
                crit.fail("envelope gradient failed");
                continue;
            };
            let env_critical = ge.norm() <= 1e-10;
            let f_critical = match f.gradient(x) {
                Ok(g) => g.norm() <= 1e-10,
                // Kinks: critical exactly when listed.
                Err(_) => entry.critical_points.contains(x),
            };
            crit.observe(if env_critical == f_critical { 0.0 } else { 1.0 });
        }
        rows.push(crit.finish());
    }

    let h = make_function("paper_h", &[]).expect("zoo member");
    let mut c = Check::new(SUITE, "fixed_point_equivalence", &h.label(), 1e-12, seed);
    for x in &h.critical_points {
        for gamma in gamma_grid(2.0, 10) {
            match prox_with(&h.spec, gamma, x, &options) {
                Ok(p) => {
                    let fx = finite_value(&h, x).unwrap_or(f64::NAN);
                    let fp = finite_value(&h, &p.point).unwrap_or(f64::NAN);
                    let e = env_value_with(&h.spec, gamma, x, &options).unwrap_or(f64::NAN);
                    c.observe(p.point.distance(x).max((e - fx).abs()).max((fp - fx).abs()));
                }
                Err(e) => c.fail(e),
            }
        }
    }
    // Conversely, away from critical points the three equalities fail together.
    for x in [-0.7, -0.3, 0.2, 0.6, 1.4] {
        let gamma = 0.25;
        let p = prox_with(&h.spec, gamma, &[x], &options).map(|p| p.point[0]).unwrap_or(f64::NAN);
        let e = env_value_with(&h.spec, gamma, &[x], &options).unwrap_or(f64::NAN);
        let fx = crate::zoo::h_value(x);
        let detected = (p - x).abs() <= 1e-12 || (e - fx).abs() <= 1e-12;
        c.observe(if detected { 1.0 } else { 0.0 });
    }
    rows.push(c.finish());
    rows
}

fn conjugate_suite(config: &SuiteConfig) -> Vec<PropertyRow> {
    const SUITE: &str = "conjugate";
    let seed = config.seed;
    let options = ConjugateOptions::default();
    let grid_tol = 1e-5;
    let mut rows = Vec::new();
    for entry in suite_members().into_iter().filter(|e| e.spec.dim() == 1) {
        let label = entry.label();
        let f = &entry.spec;
        let conj = |w: f64| conjugate_value_with(f, &[w], &options).map(|c| c.value);

        let mut rng = rng_for(seed, &format!("{SUITE}/convexity/{label}"));
        let mut c = Check::new(SUITE, "conjugate_convexity", &label, grid_tol, seed);
        for _ in 0..40 {
            let (a, b): (f64, f64) = (rng.gen_range(-3.0..=3.0), rng.gen_range(-3.0..=3.0));
            let lambda: f64 = rng.gen_range(0.0..=1.0);
            match (conj(a), conj(b), conj(lambda * a + (1.0 - lambda) * b)) {
                (Ok(ExtendedReal::Finite(va)), Ok(ExtendedReal::Finite(vb)), Ok(ExtendedReal::Finite(vm))) => {
                    c.observe(vm - lambda * va - (1.0 - lambda) * vb);
                }
                (Ok(_), Ok(_), Ok(_)) => c.skip(),
                (Err(e), _, _) | (_, Err(e), _) | (_, _, Err(e)) => c.fail(e),
            }
        }
        // Conjugates unbounded at every sample leave nothing to test.
        if !c.vacuous() {
            rows.push(c.finish());
        }

        if f.rho() <= 0.0 {
            let mut c = Check::new(SUITE, "biconjugate", &label, grid_tol, seed);
            match conjugate_table(f, -4.0, 4.0, 801, &options) {
                Ok(table) => {
                    let mut rng = rng_for(seed, &format!("{SUITE}/biconjugate/{label}"));
                    for _ in 0..50 {
                        let x = uniform_point(&mut rng, &entry.sample_box);
                        let fx = finite_value(&entry, &x).unwrap_or(f64::NAN);
                        c.observe_result(biconjugate_from_table(&table, x[0]).map(|v| (v - fx).abs()));
                    }
                }
                Err(e) => c.fail(e),
            }
            rows.push(c.finish());

            let mut rng = rng_for(seed, &format!("{SUITE}/decomposition/{label}"));
            let mut sum = Check::new(SUITE, "moreau_decomposition_sum", &label, 1e-8, seed);
            let mut gap = Check::new(SUITE, "moreau_decomposition_fenchel_young", &label, 1e-6, seed);
            for _ in 0..100 {
                let z = uniform_point(&mut rng, &entry.sample_box.scaled(2.0));
                match moreau_decomposition_with(f, &z, &tight()) {
                    Ok(d) => {
                        sum.observe((&d.p + &d.q).distance(&z));
                        gap.observe_result(fenchel_young_gap_with(f, &d.p, &d.q, &options).map(f64::abs));
                    }
                    Err(e) => sum.fail(e),
                }
            }
            rows.extend([sum.finish(), gap.finish()]);
        }

        if f.rho() < 0.0 && f.is_differentiable() {
            let mut rng = rng_for(seed, &format!("{SUITE}/duality/{label}"));
            let mut c = Check::new(SUITE, "gradient_duality", &label, 1e-8, seed);
            let mut lip = Check::new(SUITE, "conjugate_smoothness", &label, 1e-8, seed);
            let mut prev: Option<(f64, f64)> = None;
            for _ in 0..100 {
                let x = uniform_point(&mut rng, &entry.sample_box);
                let Ok(g) = f.gradient(&x) else {
                    c.skip();
                    continue;
                };
                match conjugate_value_with(f, &g, &options) {
                    Ok(cv) => {
                        let m = cv.maximizer.unwrap_or_default();
                        c.observe(m.distance(&x));
                        if let Some((pg, pm)) = prev {
                            if (g[0] - pg).abs() > 1e-6 {
                                lip.observe((m[0] - pm).abs() / (g[0] - pg).abs() - 1.0 / (-f.rho()));
                            }
                        }
                        prev = Some((g[0], m[0]));
                    }
                    Err(e) => c.fail(e),
                }
            }
            rows.extend([c.finish(), lip.finish()]);
        }
    }

    for (name, params) in [("absolute_value", vec![]), ("quadratic", vec![1.0])] {
        let entry = make_function(name, &params).expect("zoo member");
        let mut c = Check::new(SUITE, "envelope_conjugate_identity", &entry.label(), 1e-4, seed);
        let mut rng = rng_for(seed, &format!("{SUITE}/envelope_identity/{}", entry.label()));
        for _ in 0..20 {
            let x: f64 = rng.gen_range(-0.9..=0.9);
            let gamma: f64 = rng.gen_range(0.1..=1.0);
            c.observe_result(envelope_conjugate_identity_gap(&entry.spec, gamma, &[x]));
        }
        rows.push(c.finish());
    }
    rows
}

fn nc_suite(config: &SuiteConfig) -> Vec<PropertyRow> {
    const SUITE: &str = "nc";
    let seed = config.seed;
    let cube = AxisBox::interval(-2.0, 2.0).expect("valid box");
    let mut rows = Vec::new();
    for entry in suite_members().into_iter().filter(|e| e.spec.dim() == 1 && e.spec.domain().is_none()) {
        let label = entry.label();
        let f = &entry.spec;
        let mut mono = Check::new(SUITE, "monotone_in_budget", &label, 0.0, seed);
        let mut cap = Check::new(SUITE, "residual_below_weak_convexity_cap", &label, 1e-9, seed);
        let mut previous: Option<f64> = None;
        for budget in [64, 128, 256, 512] {
            match nc_estimate(f, &cube, budget, seed) {
                Ok(est) => {
                    if let Some(prev) = previous {
                        mono.observe(prev - est.value);
                    }
                    previous = Some(est.value);
                    let w = &est.witness;
                    let bound = 0.5 * f.rho() * w.lambda * (1.0 - w.lambda) * w.x.distance(&w.y).powi(2);
                    cap.observe(est.value - bound);
                }
                Err(e) => mono.fail(e),
            }
        }
        rows.extend([mono.finish(), cap.finish()]);

        if f.rho() <= 0.0 {
            let mut c = Check::new(SUITE, "convex_estimate_non_positive", &label, 1e-12, seed);
            c.observe_result(nc_estimate(f, &cube, 512, seed).map(|e| e.value));
            rows.push(c.finish());
        } else if matches!(f.name(), "paper_h" | "double_well") {
            // Members with bounded nonconvexity on the whole line.
            let mut c = Check::new(SUITE, "envelope_does_not_increase_nc", &label, 1e-8, seed);
            for base in [0.05f64, 0.1, 0.2] {
                let gamma = base.min(0.9 / f.rho());
                c.observe_result(nc_envelope_comparison(f, gamma, &cube, 256, seed).map(|r| r.envelope.value - r.function.value));
            }
            rows.push(c.finish());
        }
    }
    let h = make_function("paper_h", &[]).expect("zoo member");
    let mut c = Check::new(SUITE, "h_estimate_reaches_one_half", &h.label(), 1e-9, seed);
    c.observe_result(nc_estimate(&h.spec, &cube, 512, seed).map(|e| 0.5 - e.value));
    rows.push(c.finish());
    rows
}

fn zoo_suite(config: &SuiteConfig) -> Vec<PropertyRow> {
    const SUITE: &str = "zoo";
    let seed = config.seed;
    let mut rows = Vec::new();
    for entry in suite_members() {
        let label = entry.label();
        let f = &entry.spec;

        let mut c = Check::new(SUITE, "metadata", &label, 1e-12, seed);
        for x in &entry.critical_points {
            match f.gradient(x) {
                Ok(g) => c.observe(g.norm()),
                Err(_) => c.skip(),
            }
        }
        if let Some(min) = entry.min_value {
            for x in &entry.minimizers {
                c.observe((finite_value(&entry, x).unwrap_or(f64::NAN) - min).abs());
            }
        }
        rows.push(c.finish());

        if f.analytic_prox().is_none() && f.analytic_envelope().is_none() {
            continue;
        }
        let mut rng = rng_for(seed, &format!("{SUITE}/crosscheck/{label}"));
        let mut c = Check::new(SUITE, "numeric_vs_closed_form", &label, config.tolerance, seed);
        for _ in 0..200 {
            let x = uniform_point(&mut rng, &entry.sample_box.scaled(1.5));
            let gamma = random_gamma(&mut rng, f.rho());
            c.observe_result(oracle_crosscheck(&entry, gamma, &x).map(|r| r.worst()));
        }
        rows.push(c.finish());

        if let (Some(oracle), true) = (f.analytic_prox(), f.is_differentiable()) {
            let mut rng = rng_for(seed, &format!("{SUITE}/first_order/{label}"));
            let mut c = Check::new(SUITE, "closed_form_prox_first_order", &label, 1e-10, seed);
            for _ in 0..200 {
                let x = uniform_point(&mut rng, &entry.sample_box.scaled(1.5));
                let gamma = random_gamma(&mut rng, f.rho());
                let p = Point::new(oracle(gamma, &x));
                match f.gradient(&p) {
                    Ok(g) => c.observe((&(&p - &x) * (1.0 / gamma)).distance(&(&g * -1.0))),
                    Err(e) => c.fail(e),
                }
            }
            rows.push(c.finish());
        }
    }

    let mut c = Check::new(SUITE, "h_envelope_continuous_at_knee", "paper_h", 1e-10, seed);
    for gamma in [0.01, 0.25, 0.49] {
        let knee: f64 = 0.5 - gamma;
        for side in [1.0, -1.0] {
            let k = side * knee;
            let outside = side * (knee + f64::EPSILON * knee.max(1.0));
            c.observe((h_envelope(gamma, k) - h_envelope(gamma, outside)).abs());
        }
    }
    rows.push(c.finish());
    rows
}
