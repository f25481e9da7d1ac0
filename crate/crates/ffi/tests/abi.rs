use std::ffi::{CStr, CString};
use std::ptr;

use adiabatic_qjump::renorm::frame_at;
use adiabatic_qjump::SystemConfig;
use adiabatic_qjump_ffi::*;

fn set(cfg: *mut AqjConfig, key: &str, value: &str) -> AqjStatus {
    let (k, v) = (CString::new(key).unwrap(), CString::new(value).unwrap());
    unsafe { aqj_config_set(cfg, k.as_ptr(), v.as_ptr()) }
}

fn last_error() -> String {
    let p = aqj_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

struct Config(*mut AqjConfig);

impl Config {
    fn small() -> Self {
        let c = Config(aqj_config_new());
        assert_eq!(set(c.0, "n_steps", "4000"), AqjStatus::Ok);
        c
    }
}

impl Drop for Config {
    fn drop(&mut self) {
        unsafe { aqj_config_free(self.0) }
    }
}

#[test]
fn config_errors_map_to_status_codes() {
    let c = Config::small();
    assert_eq!(set(c.0, "n_order", "3"), AqjStatus::UnsupportedOrder);
    assert_eq!(set(c.0, "no_such_key", "1"), AqjStatus::UnknownKey);
    assert!(last_error().contains("no_such_key"));
    assert_eq!(set(c.0, "beta", "warm"), AqjStatus::InvalidArgument);
    assert_eq!(set(c.0, "beta", "-1"), AqjStatus::Ok);
    assert_eq!(unsafe { aqj_config_validate(c.0) }, AqjStatus::InvalidArgument);
    let k = CString::new("beta").unwrap();
    assert_eq!(unsafe { aqj_config_set(c.0, k.as_ptr(), ptr::null()) }, AqjStatus::NullPointer);
    assert_eq!(unsafe { aqj_config_set(ptr::null_mut(), k.as_ptr(), k.as_ptr()) }, AqjStatus::NullPointer);
}

#[test]
fn frame_matches_core() {
    let c = Config::small();
    let core = SystemConfig { n_steps: 4000, ..SystemConfig::default() };
    for n in 0..3 {
        let mut f = AqjFrame::default();
        assert_eq!(unsafe { aqj_frame_at(c.0, 2.5, n, &mut f) }, AqjStatus::Ok);
        let expected = frame_at(&core, 2.5, n).unwrap();
        assert_eq!(f.order, n);
        assert_eq!(f.omega01, expected.omega01);
        assert_eq!(f.ket_e_re[1], expected.ket_e.0[1].re);
        assert_eq!(f.ket_g_im[0], expected.ket_g.0[0].im);
        assert_eq!(f.w_ge_im, expected.w_ge.im);
        assert_eq!(f.alpha, expected.alpha);
    }
    let mut f = AqjFrame::default();
    assert_eq!(unsafe { aqj_frame_at(c.0, 0.0, 5, &mut f) }, AqjStatus::UnsupportedOrder);
    assert_eq!(unsafe { aqj_frame_at(c.0, 0.0, 1, ptr::null_mut()) }, AqjStatus::NullPointer);
}

#[test]
fn ensemble_round_trip() {
    let c = Config::small();
    let mut ens: *mut AqjEnsemble = ptr::null_mut();
    assert_eq!(unsafe { aqj_ensemble_run(c.0, 1, 100, 2, &mut ens) }, AqjStatus::Ok);
    assert!(!ens.is_null());
    assert_eq!(unsafe { aqj_ensemble_len(ens) }, 100);

    let mut work = vec![0.0; 100];
    assert_eq!(unsafe { aqj_ensemble_work(ens, 1, work.as_mut_ptr(), 100) }, AqjStatus::Ok);
    let mean = work.iter().sum::<f64>() / 100.0;

    let mut own = AqjReport::default();
    assert_eq!(unsafe { aqj_ensemble_report(ens, 1, &mut own) }, AqjStatus::Ok);
    assert_eq!((own.dynamics_order, own.work_order, own.n_traj), (1, 1, 100));
    assert!((own.mean_work - mean).abs() < 1e-12);
    assert!(own.ift_mean.is_finite());
    // With reassigned heats there is no entropy-production estimate.
    let mut mixed = AqjReport::default();
    assert_eq!(unsafe { aqj_ensemble_report(ens, 0, &mut mixed) }, AqjStatus::Ok);
    assert!(mixed.ift_mean.is_nan());

    let mut too_many = vec![0.0; 101];
    assert_eq!(
        unsafe { aqj_ensemble_work(ens, 1, too_many.as_mut_ptr(), 101) },
        AqjStatus::InvalidArgument
    );
    unsafe { aqj_ensemble_free(ens) };
    unsafe { aqj_ensemble_free(ptr::null_mut()) };
}

#[test]
fn empty_ensemble_is_an_error() {
    let c = Config::small();
    let mut ens: *mut AqjEnsemble = ptr::null_mut();
    assert_eq!(unsafe { aqj_ensemble_run(c.0, 2, 0, 1, &mut ens) }, AqjStatus::EmptyEnsemble);
    assert!(ens.is_null());
    assert_eq!(unsafe { aqj_ensemble_len(ens) }, 0);
}

#[test]
fn version_is_a_c_string() {
    let v = unsafe { CStr::from_ptr(aqj_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}
