use std::ffi::CStr;
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use qshutter_ffi::*;

fn last_error() -> String {
    let mut buf = vec![0 as std::ffi::c_char; 256];
    let n = unsafe { qs_last_error_message(buf.as_mut_ptr(), buf.len()) };
    assert!(n > 0);
    unsafe { CStr::from_ptr(buf.as_ptr()) }.to_string_lossy().into_owned()
}

#[test]
fn canonical_pipeline() {
    unsafe {
        let mut profile = ptr::null_mut();
        assert_eq!(qs_profile_canonical(&mut profile), QsStatus::Ok);
        let mut len = 0.0;
        assert_eq!(qs_profile_length(profile, &mut len), QsStatus::Ok);
        assert_eq!(len, 15.0);

        let mut family = ptr::null_mut();
        assert_eq!(qs_pole_family_build(profile, 4, &mut family), QsStatus::Ok);
        let mut n = 0;
        assert_eq!(qs_pole_family_len(family, &mut n), QsStatus::Ok);
        assert_eq!(n, 4);
        let mut pole = QsPole { index: 0, k: QsComplex { re: 0.0, im: 0.0 }, energy: 0.0, width: 0.0, lifetime: 0.0 };
        assert_eq!(qs_pole_family_get(family, 0, &mut pole), QsStatus::Ok);
        assert_eq!(pole.index, 1);
        assert!((pole.energy - 80.054).abs() < 0.01);
        assert!(pole.k.im < 0.0);

        let mut tr = 0.0;
        assert_eq!(qs_transmission(profile, pole.energy, &mut tr), QsStatus::Ok);
        assert!(tr > 0.99);

        let mut taus = [0.0; 3];
        let mut ts = QsTimeScales { detuning: 0.0, omega: 0.0, tau_r: 0.0, tau_l: 0.0, tau_b: 0.0, crossover: false };
        assert_eq!(qs_time_scales(family, 1, 74.97, taus.as_mut_ptr(), 3, &mut ts), QsStatus::Ok);
        assert!((ts.tau_l - 640.35).abs() < 0.1);
        assert!((taus[1] / taus[0] - 3.0).abs() < 1e-12);
        assert!(ts.crossover);

        let mut series = ptr::null_mut();
        assert_eq!(qs_series_new(profile, family, 74.97, 1, &mut series), QsStatus::Ok);
        let mut psi = QsComplex { re: 0.0, im: 0.0 };
        assert_eq!(qs_series_psi(series, 100.0, 5000.0, &mut psi), QsStatus::Ok);
        let mut dens = 0.0;
        assert_eq!(qs_series_density(series, 100.0, 5000.0, &mut dens), QsStatus::Ok);
        assert!((dens - 1.0).abs() < 0.05, "density {dens}");

        qs_series_free(series);
        qs_pole_family_free(family);
        qs_profile_free(profile);
    }
}

#[test]
fn errors_map_to_status_codes() {
    unsafe {
        assert_eq!(qs_profile_canonical(ptr::null_mut()), QsStatus::NullPointer);
        assert!(last_error().contains("null"));

        let mut profile = ptr::null_mut();
        assert_eq!(qs_profile_double_barrier(230.0, -1.0, 5.0, 0.067, &mut profile), QsStatus::InvalidArgument);
        assert!(profile.is_null());
        assert!(last_error().contains("width"));

        assert_eq!(qs_profile_canonical(&mut profile), QsStatus::Ok);
        let mut tr = 0.0;
        assert_eq!(qs_transmission(profile, -5.0, &mut tr), QsStatus::Domain);
        let mut family = ptr::null_mut();
        assert_eq!(qs_pole_family_build(profile, 0, &mut family), QsStatus::InvalidArgument);
        qs_profile_free(profile);

        let mut w = QsComplex { re: 0.0, im: 0.0 };
        assert_eq!(qs_faddeeva(QsComplex { re: 0.0, im: -40.0 }, &mut w), QsStatus::Overflow);
        // null handles are no-ops on free
        qs_profile_free(ptr::null_mut());
        qs_series_free(ptr::null_mut());
    }
}

#[test]
fn special_functions() {
    unsafe {
        let mut w = QsComplex { re: 0.0, im: 0.0 };
        assert_eq!(qs_faddeeva(QsComplex { re: 0.0, im: 1.0 }, &mut w), QsStatus::Ok);
        assert!((w.re - 0.427_583_576_155_807).abs() < 1e-14);
        assert!(w.im.abs() < 1e-15);
        let mut m = QsComplex { re: 0.0, im: 0.0 };
        assert_eq!(qs_moshinsky(QsComplex { re: 0.0, im: 0.0 }, &mut m), QsStatus::Ok);
        assert!((m.re - 0.5).abs() < 1e-15);
        let v = CStr::from_ptr(qs_version()).to_str().unwrap();
        assert_eq!(v, env!("CARGO_PKG_VERSION"));
    }
}

#[test]
fn header_compiles_as_c() {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let header = root.join("include").join("qshutter.h");
    assert!(header.exists(), "generated header missing");
    let text = std::fs::read_to_string(&header).unwrap();
    for sym in ["qs_profile_canonical", "qs_pole_family_build", "qs_series_psi", "qs_faddeeva", "QS_STATUS_PANIC"] {
        assert!(text.contains(sym), "{sym} not in header");
    }
    let Ok(probe) = Command::new("cc").arg("--version").output() else {
        eprintln!("no C compiler; skipping compile check");
        return;
    };
    assert!(probe.status.success());
    let dir = std::env::temp_dir().join(format!("qshutter-header-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let src = dir.join("use.c");
    std::fs::write(
        &src,
        "#include \"qshutter.h\"\n\
         int run(void) {\n\
           QsProfile *p = NULL; QsPoleFamily *f = NULL; QsSeries *s = NULL;\n\
           QsComplex psi; QsPole pole; double t;\n\
           if (qs_profile_canonical(&p) != QS_STATUS_OK) return 1;\n\
           qs_transmission(p, 80.0, &t);\n\
           qs_pole_family_build(p, 3, &f);\n\
           qs_pole_family_get(f, 0, &pole);\n\
           qs_series_new(p, f, 74.97, 1, &s);\n\
           qs_series_psi(s, 15.0, 1000.0, &psi);\n\
           qs_series_free(s); qs_pole_family_free(f); qs_profile_free(p);\n\
           return 0;\n\
         }\n",
    )
    .unwrap();
    let out = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(root.join("include"))
        .arg(&src)
        .output()
        .unwrap();
    std::fs::remove_dir_all(&dir).ok();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}
