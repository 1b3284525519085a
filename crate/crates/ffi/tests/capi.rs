//! Exercises the C surface exactly as a C caller would: through the
//! extern functions and raw pointers, then checks the generated header.

use lifshitz_ffi::*;
use std::ffi::CStr;
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

fn new_params(sites: u64, p: f64, b: f64) -> *mut LifParams {
    let mut h: *mut LifParams = ptr::null_mut();
    let st = unsafe { lif_params_new(sites, p, b, &mut h) };
    assert_eq!(st, LifStatus::Ok);
    assert!(!h.is_null());
    h
}

#[test]
fn handle_lifecycle_and_validation() {
    let h = new_params(100, 0.5, 1.0);
    unsafe { lif_params_free(h) };
    unsafe { lif_params_free(ptr::null_mut()) };

    let mut out: *mut LifParams = ptr::null_mut();
    assert_eq!(
        unsafe { lif_params_new(0, 0.5, 1.0, &mut out) },
        LifStatus::InvalidArgument
    );
    assert_eq!(
        unsafe { lif_params_new(10, 1.5, 1.0, &mut out) },
        LifStatus::InvalidArgument
    );
    assert_eq!(
        unsafe { lif_params_new(10, 0.5, -1.0, &mut out) },
        LifStatus::InvalidArgument
    );
    assert!(out.is_null(), "failed constructor must not write the handle");
    assert_eq!(
        unsafe { lif_params_new(10, 0.5, 1.0, ptr::null_mut()) },
        LifStatus::NullPointer
    );
}

#[test]
fn streaming_count_matches_the_rust_api() {
    let params = lifshitz::model::ModelParams::new(5000, 0.5, 1.0).unwrap();
    let h = new_params(5000, 0.5, 1.0);
    for (seed, index, eps) in [(42u64, 0u64, 0.5f64), (42, 3, 1.0), (7, 1, 0.25)] {
        let mut got = u64::MAX;
        let st = unsafe { lif_count_below(h, seed, index, eps, &mut got) };
        assert_eq!(st, LifStatus::Ok);
        let want = lifshitz::spectral::count_below_streamed(&params, seed, index, eps).count as u64;
        assert_eq!(got, want, "seed={seed} index={index} eps={eps}");
    }
    let mut got = 0u64;
    assert_eq!(
        unsafe { lif_count_below(ptr::null(), 1, 0, 0.5, &mut got) },
        LifStatus::NullPointer
    );
    assert_eq!(
        unsafe { lif_count_below(h, 1, 0, f64::NAN, &mut got) },
        LifStatus::InvalidArgument
    );
    unsafe { lif_params_free(h) };
}

#[test]
fn longest_run_matches_the_rust_api() {
    let params = lifshitz::model::ModelParams::new(4096, 0.6, 2.0).unwrap();
    let h = new_params(4096, 0.6, 2.0);
    for index in 0..4u64 {
        let mut got = 0u64;
        assert_eq!(
            unsafe { lif_longest_zero_run(h, 11, index, &mut got) },
            LifStatus::Ok
        );
        let occ = lifshitz::model::OccupancyStream::new(&params, 11, index);
        let want = lifshitz::intervals::longest_zero_run(occ) as u64;
        assert_eq!(got, want);
        assert!(got > 0);
    }
    unsafe { lif_params_free(h) };
}

#[test]
fn scalar_evaluators_agree_and_reject_bad_domains() {
    let v = lif_lower_bound_ids(0.1, 0.5);
    assert!((v - 5.114520884631678e-4).abs() / v < 1e-12);
    assert_eq!(
        lif_upper_bound_ids(0.1, 0.5, 1.0, 1.0),
        lifshitz::bounds::upper_bound_ids(0.1, 0.5, 1.0, 1.0)
    );
    assert_eq!(
        lif_finite_lower_coeff(0.1, 0.5, f64::INFINITY),
        lifshitz::bounds::finite_lower_coeff(0.1, 0.5, f64::INFINITY)
    );
    assert_eq!(lif_sine_energy(3, 2), lifshitz::sine::sine_energy(3, 2));
    assert_eq!(lif_run_threshold(1.0, 131072.0, 0.5), 17.0);
    assert!((lif_run_limit_probability(1.0) - (1.0 - (-1.0f64).exp())).abs() < 1e-15);

    assert!(lif_lower_bound_ids(0.0, 0.5).is_nan());
    assert!(lif_lower_bound_ids(0.1, 1.0).is_nan());
    assert!(lif_upper_bound_ids(0.1, 0.5, 0.0, 1.0).is_nan());
    assert!(lif_upper_bound_ids(0.1, 0.5, 1.0, -1.0).is_nan());
    assert!(lif_finite_lower_coeff(0.1, 0.5, -1.0).is_nan());
    assert!(lif_sine_energy(3, 0).is_nan());
    assert!(lif_sine_energy(3, 4).is_nan());
    assert!(lif_run_threshold(0.0, 10.0, 0.5).is_nan());
    assert!(lif_run_limit_probability(-0.5).is_nan());
}

#[test]
fn version_is_a_static_c_string() {
    let v = unsafe { CStr::from_ptr(lif_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn generated_header_declares_the_surface_and_compiles() {
    let header = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("include")
        .join("lifshitz.h");
    let text = std::fs::read_to_string(&header).expect("build.rs generates the header");
    for symbol in [
        "typedef enum LifStatus",
        "typedef struct LifParams LifParams;",
        "lif_params_new",
        "lif_params_free",
        "lif_count_below",
        "lif_longest_zero_run",
        "lif_lower_bound_ids",
        "lif_upper_bound_ids",
        "lif_finite_lower_coeff",
        "lif_sine_energy",
        "lif_run_threshold",
        "lif_run_limit_probability",
        "lif_version",
    ] {
        assert!(text.contains(symbol), "header lacks {symbol}");
    }

    // Compile a tiny translation unit against the header when a C
    // compiler is around (it is in CI; skip silently otherwise).
    let Ok(probe) = Command::new("cc").arg("--version").output() else {
        eprintln!("no cc available, skipping header compile check");
        return;
    };
    if !probe.status.success() {
        eprintln!("cc not usable, skipping header compile check");
        return;
    }
    let dir = std::env::temp_dir().join(format!("lifshitz-hdr-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let main_c = dir.join("use_header.c");
    std::fs::write(
        &main_c,
        "#include \"lifshitz.h\"\n\
         int main(void) {\n\
           LifParams *h = 0;\n\
           if (lif_params_new(10, 0.5, 1.0, &h) != LIF_STATUS_OK) return 1;\n\
           uint64_t n = 0;\n\
           lif_count_below(h, 1, 0, 0.5, &n);\n\
           lif_params_free(h);\n\
           return lif_lower_bound_ids(0.1, 0.5) > 0.0 ? 0 : 1;\n\
         }\n",
    )
    .unwrap();
    let status = Command::new("cc")
        .arg("-fsyntax-only")
        .arg("-Wall")
        .arg("-Werror")
        .arg(format!("-I{}", header.parent().unwrap().display()))
        .arg(&main_c)
        .status()
        .unwrap();
    assert!(status.success(), "header does not compile cleanly");
    let _ = std::fs::remove_dir_all(&dir);
}
