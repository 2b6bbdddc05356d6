use apsdet_ffi::*;
use std::ffi::CStr;
use std::ptr;

fn last_error() -> String {
    let p = aps_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn model(l: usize, eigs: &[f64]) -> *mut ApsModel {
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { aps_model_canonical(l, eigs.as_ptr(), eigs.len(), &mut m) }, ApsStatus::Ok);
    m
}

fn sigma_theta(m: *const ApsModel, angles: &[f64]) -> *mut ApsInvolution {
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { aps_involution_sigma_theta(m, angles.as_ptr(), angles.len(), &mut s) }, ApsStatus::Ok);
    s
}

#[test]
fn det_ratio_round_trip() {
    use std::f64::consts::{FRAC_PI_3, FRAC_PI_6};
    let m = model(1, &[0.9]);
    let mut tau = ptr::null_mut();
    unsafe {
        assert_eq!(aps_involution_tau(m, &mut tau), ApsStatus::Ok);
        let a = sigma_theta(m, &[FRAC_PI_3]);
        let b = sigma_theta(m, &[FRAC_PI_6]);
        let (mut spectral, mut kernel) = (0.0, 0.0);
        assert_eq!(aps_cylinder_det_ratio(m, 1.7, tau, a, b, &mut spectral), ApsStatus::Ok);
        assert_eq!(aps_kernel_det_ratio(tau, a, b, &mut kernel), ApsStatus::Ok);
        assert!((spectral - 3.0).abs() < 1e-12 && (kernel - 3.0).abs() < 1e-12);
        let mut f = 0.0;
        assert_eq!(aps_fredholm_ratio(m, 1.0, tau, 2.0, a, b, &mut f), ApsStatus::Ok);
        assert!((f - 3.0).abs() < 1e-10, "{f}");
        for p in [tau, a, b] {
            aps_involution_free(p);
        }
        aps_model_free(m);
    }
}

#[test]
fn gluing_and_logdet() {
    let m = model(2, &[0.5, 1.5]);
    let mut s = ptr::null_mut();
    unsafe {
        assert_eq!(aps_involution_random(2, 17, &mut s), ApsStatus::Ok);
        let mut res = f64::NAN;
        assert_eq!(aps_gluing_residual(m, 1.2, ptr::null(), 0.8, s, &mut res), ApsStatus::Ok);
        assert!(res.abs() < 1e-10, "{res}");
        let mut dd = 0.0;
        assert_eq!(aps_cylinder_logdet(m, 0.8, ptr::null(), ptr::null(), &mut dd), ApsStatus::Ok);
        assert!(dd.is_finite());
        let mut n = 0;
        assert_eq!(aps_model_dim(m, &mut n), ApsStatus::Ok);
        assert_eq!(n, 8);
        assert_eq!(aps_model_half_kernel_dim(m, &mut n), ApsStatus::Ok);
        assert_eq!(n, 2);
        aps_involution_free(s);
        aps_model_free(m);
    }
}

#[test]
fn explicit_matrices() {
    // B = diag(1, -1), G = [[0, -1], [1, 0]]
    let b = [1.0, 0.0, 0.0, 0.0, 0.0, 0.0, -1.0, 0.0];
    let g = [0.0, 0.0, -1.0, 0.0, 1.0, 0.0, 0.0, 0.0];
    let mut m = ptr::null_mut();
    unsafe {
        assert_eq!(aps_model_from_matrices(2, b.as_ptr(), g.as_ptr(), &mut m), ApsStatus::Ok);
        let mut v = 0.0;
        assert_eq!(aps_cylinder_logdet(m, 1.0, ptr::null(), ptr::null(), &mut v), ApsStatus::Ok);
        // two Dirichlet modes of mass 1: ln(2 sinh 1) each
        assert!((v - 2.0 * (2.0 * 1f64.sinh()).ln()).abs() < 1e-13, "{v}");
        aps_model_free(m);
        let bad_g = [0.0; 8];
        assert_eq!(aps_model_from_matrices(2, b.as_ptr(), bad_g.as_ptr(), &mut m), ApsStatus::InvalidModel);
        assert!(!last_error().is_empty());
    }
}

#[test]
fn error_codes() {
    let m = model(1, &[]);
    unsafe {
        let mut s = ptr::null_mut();
        assert_eq!(aps_involution_sigma_theta(m, [2.0].as_ptr(), 1, &mut s), ApsStatus::InvalidArgument);
        assert!(last_error().contains("angle"));
        let mut tau = ptr::null_mut();
        aps_involution_tau(m, &mut tau);
        let mut v = 0.0;
        assert_eq!(aps_kernel_det_ratio(tau, tau, tau, &mut v), ApsStatus::NotInvertible);
        assert_eq!(aps_kernel_det_ratio(ptr::null(), tau, tau, &mut v), ApsStatus::NullPointer);
        assert_eq!(aps_cylinder_logdet(m, -1.0, ptr::null(), ptr::null(), &mut v), ApsStatus::InvalidArgument);
        assert_eq!(aps_model_canonical(1, [-1.0].as_ptr(), 1, &mut ptr::null_mut()), ApsStatus::InvalidModel);
        // a success clears the message
        let (mut z, mut d) = (0.0, 0.0);
        assert_eq!(aps_hurwitz_at_zero(0.5, &mut z, &mut d), ApsStatus::Ok);
        assert!(aps_last_error().is_null());
        assert!((d + 0.5 * 2f64.ln()).abs() < 1e-15 && z == 0.0);
        assert_eq!(CStr::from_ptr(aps_status_message(ApsStatus::NotInvertible)).to_str().unwrap(), "not invertible");
        aps_involution_free(tau);
        aps_model_free(m);
        aps_model_free(ptr::null_mut());
    }
}
