//! Finite-difference derivatives used to cross-check analytic oracles.

/// Central-difference step `cbrt(eps) * max(1, |t|)`, rounded so that
/// `t + h` and `t - h` are exactly representable offsets.
pub fn central_step(t: f64) -> f64 {
    let h = f64::EPSILON.cbrt() * t.abs().max(1.0);
    (t + h) - t
}

/// Second-difference step `eps^(1/4) * max(1, |t|)`.
pub fn second_step(t: f64) -> f64 {
    let h = f64::EPSILON.powf(0.25) * t.abs().max(1.0);
    (t + h) - t
}

/// `(f(t + h) - f(t - h)) / 2h`.
pub fn central_difference<F: Fn(f64) -> f64>(f: F, t: f64) -> f64 {
    let h = central_step(t);
    (f(t + h) - f(t - h)) / (2.0 * h)
}

/// `(f(t + h) - 2 f(t) + f(t - h)) / h^2`.
pub fn second_difference<F: Fn(f64) -> f64>(f: F, t: f64) -> f64 {
    let h = second_step(t);
    (f(t + h) - 2.0 * f(t) + f(t - h)) / (h * h)
}

/// Central-difference gradient with a per-coordinate step.
pub fn central_gradient<F: Fn(&[f64]) -> f64>(f: F, x: &[f64]) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            let h = central_step(x[i]);
            probe[i] = x[i] + h;
            let up = f(&probe);
            probe[i] = x[i] - h;
            let down = f(&probe);
            probe[i] = x[i];
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// Diagonal of the Hessian by second differences along each axis.
pub fn second_difference_diagonal<F: Fn(&[f64]) -> f64>(f: F, x: &[f64]) -> Vec<f64> {
    let center = f(x);
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            let h = second_step(x[i]);
            probe[i] = x[i] + h;
            let up = f(&probe);
            probe[i] = x[i] - h;
            let down = f(&probe);
            probe[i] = x[i];
            (up - 2.0 * center + down) / (h * h)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cubic_derivatives() {
        let f = |t: f64| t * t * t;
        assert!((central_difference(f, 2.0) - 12.0).abs() < 1e-8);
        assert!((second_difference(f, 2.0) - 12.0).abs() < 1e-5);
    }

    #[test]
    fn gradient_of_separable_quadratic() {
        let f = |x: &[f64]| x[0] * x[0] + 3.0 * x[1] * x[1];
        let g = central_gradient(f, &[1.0, -2.0]);
        assert!((g[0] - 2.0).abs() < 1e-8);
        assert!((g[1] + 12.0).abs() < 1e-8);
        let h = second_difference_diagonal(f, &[1.0, -2.0]);
        assert!((h[0] - 2.0).abs() < 1e-6);
        assert!((h[1] - 6.0).abs() < 1e-6);
    }
}
