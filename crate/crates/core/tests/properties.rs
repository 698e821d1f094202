mod common;

use moreau_core::envelope::{env_gradient, env_value, env_value_with};
use moreau_core::nc::nc_estimate;
use moreau_core::prox::{prox_via_reduction_with, prox_with};
use moreau_core::report::format_real;
use moreau_core::solver::{minimize_strongly_convex, SolverOptions};
use moreau_core::zoo::{function_from_str, make_function};
use moreau_core::{AxisBox, Point, ProxOptions};
use proptest::prelude::*;

fn tight() -> ProxOptions {
    ProxOptions::default().with_tol(1e-12)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn quadratic_numeric_prox_matches_closed_form(alpha in -0.9f64..5.0, gamma in 0.01f64..1.0, x in -10.0f64..10.0) {
        let f = make_function("quadratic", &[alpha]).unwrap().spec;
        prop_assume!(gamma * f.rho() < 0.95);
        let numeric = prox_with(&f, gamma, &[x], &ProxOptions::numeric().with_tol(1e-12)).unwrap();
        let exact = x / (1.0 + gamma * alpha);
        prop_assert!((numeric.point[0] - exact).abs() <= 1e-9 * exact.abs().max(1.0));
    }

    #[test]
    fn h_prox_is_lipschitz(x in -4.0f64..4.0, y in -4.0f64..4.0, gamma in 0.01f64..0.49) {
        let h = make_function("paper_h", &[]).unwrap().spec;
        let p = prox_with(&h, gamma, &[x], &tight()).unwrap().point[0];
        let q = prox_with(&h, gamma, &[y], &tight()).unwrap().point[0];
        prop_assert!((p - q).abs() <= (x - y).abs() / (1.0 - 2.0 * gamma) + 1e-12);
        prop_assert!((p - common::h_prox(gamma, x)).abs() <= 1e-12);
    }

    #[test]
    fn envelope_is_sandwiched(x in -3.0f64..3.0, gamma in 0.01f64..0.2) {
        let f = make_function("double_well", &[]).unwrap().spec;
        let p = prox_with(&f, gamma, &[x], &tight()).unwrap().point;
        let env = env_value(&f, gamma, &[x]).unwrap();
        let fx = f.evaluate(&[x]).unwrap().to_f64();
        let fp = f.evaluate(&p).unwrap().to_f64();
        prop_assert!(env <= fx + 1e-12);
        prop_assert!(env >= fp - 1e-12);
    }

    #[test]
    fn absolute_value_envelope_is_huber(x in -5.0f64..5.0, gamma in 0.01f64..2.0) {
        let f = make_function("absolute_value", &[]).unwrap().spec;
        let huber = if x.abs() <= gamma { x * x / (2.0 * gamma) } else { x.abs() - gamma / 2.0 };
        let numeric = env_value_with(&f, gamma, &[x], &ProxOptions::numeric()).unwrap();
        prop_assert!((numeric - huber).abs() <= 1e-10);
        let g = env_gradient(&f, gamma, &[x]).unwrap()[0];
        prop_assert!((g - (x / gamma).clamp(-1.0, 1.0)).abs() <= 1e-12);
    }

    #[test]
    fn reduction_matches_direct_prox(x in -3.0f64..3.0, t in 0.05f64..0.9) {
        let f = make_function("double_well", &[]).unwrap().spec;
        let gamma = t / f.rho();
        let a = prox_with(&f, gamma, &[x], &tight()).unwrap().point;
        let b = prox_via_reduction_with(&f, gamma, &[x], &tight()).unwrap().point;
        prop_assert!(a.distance(&b) <= 1e-8);
    }

    #[test]
    fn solver_lands_within_residual_over_modulus(
        alphas in proptest::collection::vec(0.1f64..10.0, 1..5),
        seed in proptest::collection::vec(-5.0f64..5.0, 5),
    ) {
        let x0 = Point::new(seed[..alphas.len()].to_vec());
        let value = |y: &[f64]| alphas.iter().zip(y).map(|(a, v)| 0.5 * a * v * v).sum::<f64>();
        let gradient = |y: &[f64]| Some(alphas.iter().zip(y).map(|(a, v)| a * v).collect());
        let modulus = alphas.iter().cloned().fold(f64::INFINITY, f64::min);
        let cert = minimize_strongly_convex(value, gradient, modulus, &x0, &SolverOptions::default()).unwrap();
        prop_assert!(cert.converged);
        prop_assert!(cert.minimizer.norm() <= cert.residual / modulus + 1e-15);
        prop_assert!(cert.value <= value(&x0));
    }

    #[test]
    fn nc_estimate_grows_with_budget(seed in any::<u64>(), small in 1usize..100, extra in 0usize..100) {
        let f = make_function("double_well", &[]).unwrap().spec;
        let b = AxisBox::interval(-2.0, 2.0).unwrap();
        let lo = nc_estimate(&f, &b, small, seed).unwrap();
        let hi = nc_estimate(&f, &b, small + extra, seed).unwrap();
        prop_assert!(hi.value >= lo.value);
        // rho/2 l(1-l)|x-y|^2 <= 2 * 1/4 * 16 on the box.
        prop_assert!(hi.value <= 8.0);
    }

    #[test]
    fn reals_round_trip(v in any::<f64>().prop_filter("finite", |v| v.is_finite())) {
        prop_assert_eq!(format_real(v).parse::<f64>().unwrap(), v);
    }

    #[test]
    fn labels_round_trip(a in -5.0f64..5.0, b in 0.1f64..5.0) {
        for entry in [make_function("quadratic", &[b]).unwrap(), make_function("diag_quadratic", &[b, a.abs() + 0.1]).unwrap()] {
            let again = function_from_str(&entry.label()).unwrap();
            prop_assert_eq!(again.label(), entry.label());
            prop_assert_eq!(again.params, entry.params);
        }
    }
}
