use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use qcontact_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(qc_last_error_message()) }
        .to_string_lossy()
        .into_owned()
}

fn builtin(spec: &str) -> *mut QcModel {
    let spec = CString::new(spec).unwrap();
    let mut model = ptr::null_mut();
    assert_eq!(
        unsafe { qc_model_from_builtin(spec.as_ptr(), &mut model) },
        QcStatus::Ok,
        "{}",
        last_error()
    );
    assert!(!model.is_null());
    model
}

#[test]
fn two_contact_field_and_dissipation() {
    let m = builtin("two-contact-r4");
    let (mut n, mut q) = (0, 0);
    unsafe {
        assert_eq!(qc_model_dims(m, &mut n, &mut q), QcStatus::Ok);
        assert_eq!((n, q), (1, 2));
        let x = [1.0, 2.0, 0.0, 0.0];
        let mut v = [0.0; 4];
        assert_eq!(qc_model_vector_field(m, x.as_ptr(), 4, v.as_mut_ptr(), 4), QcStatus::Ok);
        for (a, b) in v.iter().zip([2.0, -1.0, 1.5, -1.5]) {
            assert!((a - b).abs() < 1e-12, "{v:?}");
        }
        let mut h = 0.0;
        assert_eq!(qc_model_hamiltonian(m, x.as_ptr(), 4, &mut h), QcStatus::Ok);
        assert!((h - 2.5).abs() < 1e-15);
        let mut r = 1.0;
        assert_eq!(qc_model_dissipation_residual(m, x.as_ptr(), 4, &mut r), QcStatus::Ok);
        assert!(r.abs() < 1e-12);
        qc_model_free(m);
    }
}

#[test]
fn simulate_and_read_back() {
    let m = builtin("contact-r3");
    unsafe {
        let mut traj = ptr::null_mut();
        let pi = std::f64::consts::PI;
        assert_eq!(
            qc_simulate(m, ptr::null(), 0, 0.0, pi, 1e-10, 1e-10, 0.1, &mut traj),
            QcStatus::Ok
        );
        let (len, dim) = (qc_trajectory_len(traj), qc_trajectory_dim(traj));
        assert_eq!(dim, 3);
        let mut times = vec![0.0; len];
        assert_eq!(qc_trajectory_times(traj, times.as_mut_ptr(), len), QcStatus::Ok);
        assert_eq!(times[len - 1], pi);
        let mut states = vec![0.0; len * dim];
        assert_eq!(
            qc_trajectory_states(traj, states.as_mut_ptr(), len * dim - 1),
            QcStatus::BufferTooSmall
        );
        assert_eq!(qc_trajectory_states(traj, states.as_mut_ptr(), len * dim), QcStatus::Ok);
        let end = &states[(len - 1) * dim..];
        assert!(
            end[0].abs() < 1e-8 && (end[1] + 1.0).abs() < 1e-8 && end[2].abs() < 1e-8,
            "{end:?}"
        );
        qc_trajectory_free(traj);
        qc_model_free(m);
    }
}

#[test]
fn models_from_json() {
    let json = CString::new(
        r#"{"kind":"lagrangian","n":1,"qcount":2,"expressions":{"lagrangian":"v1^2/2 - q1^2/2 - 0.1*z1 - 0.2*z2"},"initial":[1,1,0,0]}"#,
    )
    .unwrap();
    let mut m = ptr::null_mut();
    unsafe {
        assert_eq!(
            qc_model_from_json(json.as_ptr(), &mut m),
            QcStatus::Ok,
            "{}",
            last_error()
        );
        let mut x0 = [0.0; 4];
        assert_eq!(qc_model_initial_state(m, x0.as_mut_ptr(), 4), QcStatus::Ok);
        let mut v = [0.0; 4];
        assert_eq!(
            qc_model_vector_field(m, x0.as_ptr(), 4, v.as_mut_ptr(), 4),
            QcStatus::Ok
        );
        assert!((v[1] + 1.3).abs() < 1e-14, "{v:?}");
        qc_model_free(m);

        let bad = CString::new(r#"{"kind":"lagrangian","n":1}"#).unwrap();
        assert_eq!(qc_model_from_json(bad.as_ptr(), &mut m), QcStatus::ConfigError);
        assert!(!last_error().is_empty());
    }
}

#[test]
fn errors_are_reported_not_raised() {
    unsafe {
        let mut m = ptr::null_mut();
        assert_eq!(qc_model_from_builtin(ptr::null(), &mut m), QcStatus::NullPointer);
        let spec = CString::new("no-such-model").unwrap();
        assert_eq!(qc_model_from_builtin(spec.as_ptr(), &mut m), QcStatus::ConfigError);
        assert!(last_error().contains("no-such-model"));
        assert!(m.is_null());

        let m = builtin("e1");
        let mut v = [0.0; 4];
        let short = [0.0; 3];
        assert_eq!(
            qc_model_vector_field(m, short.as_ptr(), 3, v.as_mut_ptr(), 4),
            QcStatus::InvalidArgument
        );
        let mut traj = ptr::null_mut();
        assert_eq!(
            qc_simulate(m, ptr::null(), 0, 1.0, 0.0, 1e-9, 1e-9, 0.0, &mut traj),
            QcStatus::InvalidArgument
        );
        assert_eq!(
            qc_model_vector_field(ptr::null(), short.as_ptr(), 3, v.as_mut_ptr(), 4),
            QcStatus::NullPointer
        );
        assert_eq!(qc_trajectory_len(ptr::null()), 0);
        qc_model_free(m);
        qc_model_free(ptr::null_mut());
        qc_trajectory_free(ptr::null_mut());
    }
}

#[test]
fn singular_points_are_evaluation_errors() {
    let json =
        CString::new(r#"{"kind":"lagrangian","n":1,"qcount":1,"expressions":{"lagrangian":"v1^3 - z1"}}"#).unwrap();
    let mut m = ptr::null_mut();
    unsafe {
        assert_eq!(
            qc_model_from_json(json.as_ptr(), &mut m),
            QcStatus::Ok,
            "{}",
            last_error()
        );
        let x = [0.0; 3];
        let mut v = [0.0; 3];
        assert_eq!(
            qc_model_vector_field(m, x.as_ptr(), 3, v.as_mut_ptr(), 3),
            QcStatus::EvaluationError
        );
        qc_model_free(m);
    }
}

fn target_dir() -> PathBuf {
    // tests run from target/<profile>/deps
    std::env::current_exe()
        .unwrap()
        .parent()
        .unwrap()
        .parent()
        .unwrap()
        .to_path_buf()
}

#[test]
fn header_compiles_and_links_from_c() {
    let crate_dir = Path::new(env!("CARGO_MANIFEST_DIR"));
    let lib = target_dir().join("libqcontact_ffi.a");
    let lib = if lib.exists() {
        lib
    } else {
        target_dir().join("deps/libqcontact_ffi.a")
    };
    assert!(lib.exists(), "static library not found at {}", lib.display());
    let out_dir = tempfile::tempdir().unwrap();
    let exe = out_dir.path().join("smoke");
    let status = Command::new("cc")
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(crate_dir.join("include"))
        .arg(crate_dir.join("tests/c/smoke.c"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .expect("a C compiler is available as cc");
    assert!(status.success());
    let run = Command::new(&exe).output().unwrap();
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    assert_eq!(String::from_utf8_lossy(&run.stdout), "ok\n");
}
