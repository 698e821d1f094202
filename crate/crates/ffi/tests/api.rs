use std::ffi::{c_void, CStr, CString};
use std::ptr;

use moreau_ffi::*;

fn zoo(label: &str) -> *mut MoreauFunction {
    let text = CString::new(label).unwrap();
    let mut f = ptr::null_mut();
    assert_eq!(unsafe { moreau_function_parse(text.as_ptr(), &mut f) }, MoreauStatus::Ok);
    f
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(moreau_last_error_message()) }.to_string_lossy().into_owned()
}

#[test]
fn zoo_handle_round_trip() {
    let name = CString::new("quadratic").unwrap();
    let mut f = ptr::null_mut();
    let status = unsafe { moreau_function_new(name.as_ptr(), [2.0].as_ptr(), 1, &mut f) };
    assert_eq!(status, MoreauStatus::Ok);
    unsafe {
        assert_eq!(moreau_function_dim(f), 1);
        assert_eq!(moreau_function_rho(f), -2.0);
        let mut v = 0.0;
        assert_eq!(moreau_evaluate(f, [3.0].as_ptr(), 1, &mut v), MoreauStatus::Ok);
        assert_eq!(v, 9.0);
        let mut p = [0.0];
        assert_eq!(moreau_prox(f, 0.5, [4.0].as_ptr(), 1, p.as_mut_ptr()), MoreauStatus::Ok);
        assert!((p[0] - 2.0).abs() <= 1e-12);
        moreau_function_free(f);
        moreau_function_free(ptr::null_mut());
    }
}

#[test]
fn h_envelope_through_the_abi() {
    let h = zoo("paper_h");
    let (gamma, x) = (0.25, 0.8);
    // Prox lands on the outer piece: (|x| + 2 gamma) / (1 + 2 gamma).
    let p = (x + 2.0 * gamma) / (1.0 + 2.0 * gamma);
    let env = (p - 1.0) * (p - 1.0) + (x - p) * (x - p) / (2.0 * gamma);
    unsafe {
        let mut v = 0.0;
        assert_eq!(moreau_env_value(h, gamma, [x].as_ptr(), 1, &mut v), MoreauStatus::Ok);
        assert!((v - env).abs() <= 1e-12);
        let mut g = [0.0];
        assert_eq!(moreau_env_gradient(h, gamma, [x].as_ptr(), 1, g.as_mut_ptr()), MoreauStatus::Ok);
        assert!((g[0] - (x - p) / gamma).abs() <= 1e-12);
        let mut d = 0.0;
        assert_eq!(moreau_env_dgamma(h, gamma, [x].as_ptr(), 1, &mut d), MoreauStatus::Ok);
        assert!((d + (x - p) * (x - p) / (2.0 * gamma * gamma)).abs() <= 1e-10);

        let mut out = [0.0];
        let (mut iterations, mut converged) = (0usize, false);
        let status = moreau_proximal_point(h, gamma, [0.3].as_ptr(), 1, 1e-10, 1000, out.as_mut_ptr(), &mut iterations, &mut converged);
        assert_eq!(status, MoreauStatus::Ok);
        assert!(converged && iterations > 0);
        assert!((out[0] - 1.0).abs() <= 1e-8);

        let status = moreau_proximal_point(h, gamma, [0.3].as_ptr(), 1, 1e-10, 2, out.as_mut_ptr(), &mut iterations, &mut converged);
        assert_eq!(status, MoreauStatus::NotConverged);
        assert!(!converged);

        let mut nc = 0.0;
        let status = moreau_nc_estimate(h, [-1.0].as_ptr(), [1.0].as_ptr(), 1, 64, 7, &mut nc);
        assert_eq!(status, MoreauStatus::Ok);
        assert!(nc > 0.0);
        moreau_function_free(h);
    }
}

#[test]
fn hessian_and_moduli() {
    let f = zoo("quadratic(3)");
    unsafe {
        let mut d = [0.0];
        assert_eq!(moreau_env_hessian_diag(f, 0.5, [1.0].as_ptr(), 1, d.as_mut_ptr()), MoreauStatus::Ok);
        assert!((d[0] - 3.0 / 2.5).abs() <= 1e-12);
        moreau_function_free(f);

        let mut m = MoreauEnvModuli { weak: 0.0, strong: 0.0, has_strong: false, smooth: 0.0, smooth_prox_image: 0.0, has_smooth_prox_image: false };
        assert_eq!(moreau_env_moduli(1.0, 0.25, f64::NAN, &mut m), MoreauStatus::Ok);
        assert!((m.weak - 1.0 / 0.75).abs() <= 1e-15);
        assert_eq!(m.smooth, 4.0);
        let mut l = 0.0;
        assert_eq!(moreau_prox_lipschitz_constant(1.0, 0.25, &mut l), MoreauStatus::Ok);
        assert!((l - 1.0 / 0.75).abs() <= 1e-15);
    }
}

#[test]
fn conjugate_of_a_quadratic_and_an_unbounded_one() {
    let f = zoo("quadratic(2)");
    let g = zoo("zero");
    unsafe {
        let mut v = 0.0;
        assert_eq!(moreau_conjugate_value(f, [1.0].as_ptr(), 1, &mut v), MoreauStatus::Ok);
        assert!((v - 0.25).abs() <= 1e-5);
        assert_eq!(moreau_conjugate_value(g, [1.0].as_ptr(), 1, &mut v), MoreauStatus::Ok);
        assert_eq!(v, f64::INFINITY);
        moreau_function_free(f);
        moreau_function_free(g);
    }
}

unsafe extern "C" fn shifted_value(x: *const f64, dim: usize, user: *mut c_void) -> f64 {
    let c = *(user as *const f64);
    std::slice::from_raw_parts(x, dim).iter().map(|v| 0.5 * (v - c) * (v - c)).sum()
}

unsafe extern "C" fn shifted_gradient(x: *const f64, dim: usize, out: *mut f64, user: *mut c_void) -> i32 {
    let c = *(user as *const f64);
    for i in 0..dim {
        *out.add(i) = *x.add(i) - c;
    }
    0
}

#[test]
fn callback_function_prox() {
    let mut center = 1.5f64;
    let user = &mut center as *mut f64 as *mut c_void;
    let mut f = ptr::null_mut();
    let status = unsafe { moreau_function_from_callbacks(2, 0.0, Some(shifted_value), Some(shifted_gradient), true, user, &mut f) };
    assert_eq!(status, MoreauStatus::Ok);
    unsafe {
        let mut p = [0.0; 2];
        assert_eq!(moreau_prox(f, 1.0, [0.0, 3.0].as_ptr(), 2, p.as_mut_ptr()), MoreauStatus::Ok);
        // (x + gamma c) / (1 + gamma)
        assert!((p[0] - 0.75).abs() <= 1e-8 && (p[1] - 2.25).abs() <= 1e-8, "{p:?}");
        moreau_function_free(f);
    }

    let status = unsafe { moreau_function_from_callbacks(1, 0.0, Some(shifted_value), None, true, user, &mut f) };
    assert_eq!(status, MoreauStatus::InvalidArgument);
    let status = unsafe { moreau_function_from_callbacks(1, 0.0, None, None, false, user, &mut f) };
    assert_eq!(status, MoreauStatus::NullPointer);
}

#[test]
fn errors_carry_codes_and_messages() {
    let h = zoo("paper_h");
    unsafe {
        let mut v = 0.0;
        assert_eq!(moreau_env_value(h, 0.6, [0.0].as_ptr(), 1, &mut v), MoreauStatus::InadmissibleGamma);
        assert!(last_error().contains("inadmissible gamma"), "{}", last_error());
        assert_eq!(moreau_env_value(h, 0.1, [0.0, 1.0].as_ptr(), 2, &mut v), MoreauStatus::DimensionMismatch);
        assert_eq!(moreau_env_value(h, 0.1, ptr::null(), 1, &mut v), MoreauStatus::NullPointer);
        assert_eq!(moreau_env_value(ptr::null(), 0.1, [0.0].as_ptr(), 1, &mut v), MoreauStatus::NullPointer);
        assert_eq!(moreau_env_value(h, 0.1, [0.0].as_ptr(), 1, ptr::null_mut()), MoreauStatus::NullPointer);
        moreau_function_free(h);

        let abs = zoo("absolute_value");
        let mut d = [0.0];
        assert_eq!(moreau_env_hessian_diag(abs, 0.1, [0.2].as_ptr(), 1, d.as_mut_ptr()), MoreauStatus::Unsupported);
        moreau_function_free(abs);

        let mut f = ptr::null_mut();
        let text = CString::new("nonsense").unwrap();
        assert_eq!(moreau_function_parse(text.as_ptr(), &mut f), MoreauStatus::UnknownFunction);
        assert!(f.is_null());
        assert_eq!(moreau_function_dim(ptr::null()), 0);
        assert!(moreau_function_rho(ptr::null()).is_nan());

        for code in 0..10 {
            let msg = CStr::from_ptr(moreau_status_message(code)).to_str().unwrap();
            assert!(!msg.is_empty() && msg != "unknown status");
        }
        assert_eq!(CStr::from_ptr(moreau_status_message(99)).to_str().unwrap(), "unknown status");
    }
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/moreau.h")).unwrap();
    let source = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/src/lib.rs")).unwrap();
    let exports: Vec<&str> = source
        .lines()
        .filter_map(|l| l.split("extern \"C\" fn ").nth(1))
        .filter_map(|rest| rest.split('(').next())
        .filter(|name| name.starts_with("moreau_"))
        .collect();
    assert!(exports.len() >= 18, "{exports:?}");
    for name in exports {
        assert!(header.contains(&format!("{name}(")), "{name} missing from header");
    }
    assert!(header.contains("typedef struct MoreauFunction MoreauFunction;"));
    assert!(header.contains("MOREAU_STATUS_INADMISSIBLE_GAMMA = 4"));
}
