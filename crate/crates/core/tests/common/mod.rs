//! Reference oracles for integration tests. Nothing here calls into the
//! library's numerics, so agreement is evidence rather than tautology.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(tag: &str) -> ChaCha8Rng {
    let mut h: u64 = 0x9e37_79b9_7f4a_7c15;
    for b in tag.bytes() {
        h = (h ^ b as u64).wrapping_mul(0x0100_0000_01b3);
    }
    ChaCha8Rng::seed_from_u64(h)
}

pub fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    rng.gen_range(lo..=hi)
}

/// Admissible step for a `rho`-weakly convex function, with `gamma rho <= 0.9`.
pub fn admissible_gamma(rng: &mut ChaCha8Rng, rho: f64) -> f64 {
    let hi = if rho > 0.0 { 0.9 / rho } else { 1.0 };
    rng.gen_range(0.05 * hi..=hi)
}

/// Central difference with step `eps^(1/3) max(1, |t|)`.
pub fn diff(f: impl Fn(f64) -> f64, t: f64) -> f64 {
    let h = 6e-6 * t.abs().max(1.0);
    (f(t + h) - f(t - h)) / (2.0 * h)
}

/// Three-point second difference with step `1e-4 max(1, |t|)`.
pub fn diff2(f: impl Fn(f64) -> f64, t: f64) -> f64 {
    let h = 1e-4 * t.abs().max(1.0);
    (f(t + h) - 2.0 * f(t) + f(t - h)) / (h * h)
}

pub fn grad(f: impl Fn(&[f64]) -> f64, x: &[f64]) -> Vec<f64> {
    (0..x.len())
        .map(|i| {
            diff(
                |t| {
                    let mut y = x.to_vec();
                    y[i] = t;
                    f(&y)
                },
                x[i],
            )
        })
        .collect()
}

pub fn hess_diag(f: impl Fn(&[f64]) -> f64, x: &[f64]) -> Vec<f64> {
    (0..x.len())
        .map(|i| {
            diff2(
                |t| {
                    let mut y = x.to_vec();
                    y[i] = t;
                    f(&y)
                },
                x[i],
            )
        })
        .collect()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| (u - v) * (u - v)).sum::<f64>().sqrt()
}

pub fn norm(a: &[f64]) -> f64 {
    a.iter().map(|u| u * u).sum::<f64>().sqrt()
}

// The piecewise test function: a concave cap glued to two convex parabolas.

pub fn h(x: f64) -> f64 {
    let a = x.abs();
    if a <= 0.5 {
        0.5 - a * a
    } else {
        (a - 1.0) * (a - 1.0)
    }
}

/// Minimizer of `h(y) + (y - x)^2 / (2 gamma)`, `0 < gamma < 1/2`, by
/// stationarity on each piece: `-2y + (y - x)/gamma = 0` on the cap and
/// `2(|y| - 1) sign(y) + (y - x)/gamma = 0` outside.
pub fn h_prox(gamma: f64, x: f64) -> f64 {
    let cap = x / (1.0 - 2.0 * gamma);
    if cap.abs() <= 0.5 {
        return cap;
    }
    let s = x.signum();
    s * (x.abs() + 2.0 * gamma) / (1.0 + 2.0 * gamma)
}

pub fn h_env(gamma: f64, x: f64) -> f64 {
    let p = h_prox(gamma, x);
    h(p) + (x - p) * (x - p) / (2.0 * gamma)
}

/// Golden-section minimum of a unimodal function on `[lo, hi]`.
pub fn golden_min(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut a = hi - r * (hi - lo);
    let mut b = lo + r * (hi - lo);
    let (mut fa, mut fb) = (f(a), f(b));
    for _ in 0..200 {
        if hi - lo <= 1e-14 * (1.0 + lo.abs().max(hi.abs())) {
            break;
        }
        if fa <= fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - r * (hi - lo);
            fa = f(a);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + r * (hi - lo);
            fb = f(b);
        }
    }
    0.5 * (lo + hi)
}

/// Brute-force one-dimensional prox: dense scan, then golden section on the
/// two cells around the best sample. Valid whenever the prox objective is
/// unimodal on `[lo, hi]`.
pub fn brute_prox(f: impl Fn(f64) -> f64, gamma: f64, x: f64, lo: f64, hi: f64) -> f64 {
    let phi = |y: f64| f(y) + (y - x) * (y - x) / (2.0 * gamma);
    let n = 20_000;
    let step = (hi - lo) / n as f64;
    let best = (0..=n).min_by(|&i, &j| phi(lo + step * i as f64).total_cmp(&phi(lo + step * j as f64))).unwrap();
    let c = lo + step * best as f64;
    golden_min(phi, (c - step).max(lo), (c + step).min(hi))
}

/// `sup_{|y| <= reach} w y - f(y)` for convex `f`, by golden section.
pub fn conjugate(f: impl Fn(f64) -> f64, w: f64, reach: f64) -> f64 {
    let obj = |y: f64| f(y) - w * y;
    let y = golden_min(obj, -reach, reach);
    -obj(y)
}

/// `Prox_{f*}(z)` for convex `f`, with the conjugate computed on `|y| <= reach`.
pub fn conjugate_prox(f: impl Fn(f64) -> f64 + Copy, z: f64, reach: f64) -> f64 {
    golden_min(|w| conjugate(f, w, reach) + 0.5 * (w - z) * (w - z), z - reach, z + reach)
}

/// Largest chord residual `f(l x + (1-l) y) - l f(x) - (1-l) f(y)` over an
/// `n x n x m` grid on `[lo, hi]^2 x [0, 1]`.
pub fn nc_grid(f: impl Fn(f64) -> f64, lo: f64, hi: f64, n: usize, m: usize) -> f64 {
    let at = |k: usize, count: usize, a: f64, b: f64| if k + 1 == count { b } else { a + (b - a) * k as f64 / (count - 1) as f64 };
    let values: Vec<f64> = (0..n).map(|i| f(at(i, n, lo, hi))).collect();
    let mut best = f64::NEG_INFINITY;
    for i in 0..n {
        let x = at(i, n, lo, hi);
        for j in 0..n {
            let y = at(j, n, lo, hi);
            for k in 0..m {
                let l = at(k, m, 0.0, 1.0);
                let r = f(l * x + (1.0 - l) * y) - l * values[i] - (1.0 - l) * values[j];
                best = best.max(r);
            }
        }
    }
    best
}

/// Running worst case of a batch of violation measures.
#[derive(Debug, Default)]
pub struct Tally {
    pub worst: f64,
    pub samples: usize,
    pub errors: Vec<String>,
}

impl Tally {
    pub fn new() -> Self {
        Tally { worst: f64::NEG_INFINITY, samples: 0, errors: Vec::new() }
    }

    pub fn observe(&mut self, v: f64) {
        self.samples += 1;
        if v.is_nan() {
            self.errors.push("NaN".into());
        } else {
            self.worst = self.worst.max(v);
        }
    }

    pub fn fail(&mut self, e: impl std::fmt::Display) {
        self.errors.push(e.to_string());
    }

    pub fn ok(&self, limit: f64) -> bool {
        self.errors.is_empty() && self.samples > 0 && self.worst <= limit
    }
}
