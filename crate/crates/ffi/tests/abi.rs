use std::ffi::CStr;
use std::ptr;

use hyperlattice_ffi::*;

fn last_error() -> String {
    let p = hl_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn ball_lifecycle_and_counts() {
    unsafe {
        let mut ball = ptr::null_mut();
        assert_eq!(hl_ball_new(1, 0.0, 1.0, 2.0, &mut ball), HlStatus::Ok);
        let mut n = 0u64;
        assert_eq!(hl_ball_count(ball, 1, &mut n), HlStatus::Ok);
        assert_eq!(n, 4);
        assert_eq!(hl_ball_count(ball, 0, &mut n), HlStatus::Ok);
        assert_eq!(n, 4);
        hl_ball_free(ball);

        assert_eq!(hl_ball_new(2, 0.0, 1.0, 2.0, &mut ball), HlStatus::Ok);
        assert_eq!(hl_ball_count(ball, 2, &mut n), HlStatus::Ok);
        assert_eq!(n, 2);
        hl_ball_free(ball);
        hl_ball_free(ptr::null_mut());
    }
}

#[test]
fn angles_handle() {
    unsafe {
        let mut ball = ptr::null_mut();
        assert_eq!(hl_ball_new(1, 0.0, 1.0, 2.0, &mut ball), HlStatus::Ok);

        let mut same = ptr::null_mut();
        assert_eq!(hl_ball_angles(ball, 0.0, 1.0, 1, &mut same), HlStatus::Ok);
        assert_eq!(hl_angles_len(same), 0);
        assert_eq!(hl_angles_undefined(same), 4);
        let mut ks = 0.0;
        assert_eq!(hl_angles_ks(same, &mut ks), HlStatus::NoData);
        hl_angles_free(same);

        let mut above = ptr::null_mut();
        assert_eq!(hl_ball_angles(ball, 0.0, 2.0, 1, &mut above), HlStatus::Ok);
        assert_eq!(hl_angles_len(above), 4);
        let mut s = HlAngleSample::default();
        for i in 0..4 {
            assert_eq!(hl_angles_get(above, i, &mut s), HlStatus::Ok);
            assert_eq!(s.theta, 0.0);
            assert_eq!(s.gamma.a * s.gamma.d - s.gamma.b * s.gamma.c, 1);
        }
        assert_eq!(hl_angles_get(above, 4, &mut s), HlStatus::InvalidArgument);
        assert!(last_error().contains("out of range"));
        assert_eq!(hl_angles_ks(above, &mut ks), HlStatus::Ok);
        assert!((ks - 0.5).abs() < 1e-12);
        hl_angles_free(above);
        hl_ball_free(ball);
        assert_eq!(hl_angles_len(ptr::null()), 0);
    }
}

#[test]
fn invalid_arguments_report_status_and_message() {
    unsafe {
        let mut ball = ptr::null_mut();
        assert_eq!(hl_ball_new(0, 0.0, 1.0, 2.0, &mut ball), HlStatus::InvalidArgument);
        assert!(ball.is_null());
        assert_eq!(hl_ball_new(1, 0.0, -1.0, 2.0, &mut ball), HlStatus::InvalidArgument);
        assert_eq!(hl_ball_new(1, 0.0, 1.0, 1.0, &mut ball), HlStatus::InvalidArgument);
        assert_eq!(hl_ball_new(1, 0.0, 1.0, 1e20, &mut ball), HlStatus::EntryBoundExceeded);
        assert!(last_error().contains("2^31"));
        assert_eq!(hl_ball_new(1, 0.0, 1.0, 2.0, ptr::null_mut()), HlStatus::NullPointer);
        let mut n = 0;
        assert_eq!(hl_ball_count(ptr::null(), 1, &mut n), HlStatus::NullPointer);
        assert_eq!(hl_xi(0.0, 0.0, 0.1, &mut 0.0), HlStatus::InvalidArgument);
        assert_eq!(hl_kloosterman(1, 1, 0, &mut 0.0, &mut 0.0), HlStatus::InvalidArgument);
        assert_eq!(hl_index(0, &mut n), HlStatus::InvalidArgument);
    }
}

#[test]
fn error_is_cleared_by_next_success() {
    unsafe {
        assert_eq!(hl_index(0, &mut 0), HlStatus::InvalidArgument);
        assert!(!hl_last_error().is_null());
        assert_eq!(hl_index(2, &mut 0), HlStatus::Ok);
        assert!(hl_last_error().is_null());
    }
}

#[test]
fn closed_forms() {
    unsafe {
        let mut v = 0.0;
        assert_eq!(hl_xi(0.0, 1.0, 0.3, &mut v), HlStatus::Ok);
        assert!((v - (0.3 / std::f64::consts::PI + 0.5)).abs() < 1e-12);
        assert_eq!(hl_density(0.0, 1.0, 0.0, 2.0, 0.0, &mut v), HlStatus::Ok);
        assert!((v - 1.25).abs() < 1e-12);
        let (mut re, mut im) = (0.0, 0.0);
        assert_eq!(hl_kloosterman(0, 0, 6, &mut re, &mut im), HlStatus::Ok);
        assert!((re - 2.0).abs() < 1e-12 && im.abs() < 1e-12);
        assert_eq!(hl_kloosterman(1, 1, 5, &mut re, &mut im), HlStatus::Ok);
        let mut bound = 0.0;
        assert_eq!(hl_weil_bound(1, 1, 5, &mut bound), HlStatus::Ok);
        assert!(re.abs() <= bound);
        let mut idx = 0;
        assert_eq!(hl_index(6, &mut idx), HlStatus::Ok);
        assert_eq!(idx, 144);
        assert_eq!(hl_c_n(1, &mut v), HlStatus::Ok);
        assert!((v - 6.0 / (std::f64::consts::PI * std::f64::consts::PI)).abs() < 1e-15);
        let mut n = 0;
        assert_eq!(hl_count_sector(1, 0.0, 1.0, 2.0, f64::NEG_INFINITY, 1, &mut n), HlStatus::Ok);
        assert_eq!(n, 0);
        assert_eq!(hl_count_sector(1, 0.0, 1.0, 2.0, f64::INFINITY, 1, &mut n), HlStatus::Ok);
        assert_eq!(n, 10);
    }
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(hl_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}
