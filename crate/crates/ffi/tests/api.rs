use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use thermoform_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(thermo_last_error()) }.to_string_lossy().into_owned()
}

struct Handles {
    sft: *mut ThermoSft,
    phis: Vec<*mut ThermoPotential>,
}

impl Drop for Handles {
    fn drop(&mut self) {
        unsafe {
            for &phi in &self.phis {
                thermo_potential_free(phi);
            }
            thermo_sft_free(self.sft);
        }
    }
}

fn full_shift() -> Handles {
    let mut sft = ptr::null_mut();
    assert_eq!(unsafe { thermo_sft_full_shift(2, &mut sft) }, ThermoStatus::Ok);
    Handles { sft, phis: vec![] }
}

fn potential(h: &mut Handles, memory: usize, values: &[f64]) -> *mut ThermoPotential {
    let mut phi = ptr::null_mut();
    let status = unsafe { thermo_potential_new(h.sft, memory, values.as_ptr(), values.len(), &mut phi) };
    assert_eq!(status, ThermoStatus::Ok, "{}", last_error());
    h.phis.push(phi);
    phi
}

#[test]
fn entropy_of_custom_system() {
    let matrix = [1u8, 1, 1, 0];
    let mut sft = ptr::null_mut();
    let mut h = 0.0;
    unsafe {
        assert_eq!(thermo_sft_new(2, matrix.as_ptr(), &mut sft), ThermoStatus::Ok);
        assert_eq!(thermo_sft_entropy(sft, &mut h), ThermoStatus::Ok);
        let mut count = 0;
        assert_eq!(thermo_sft_block_count(sft, 3, &mut count), ThermoStatus::Ok);
        assert_eq!(count, 5);
        thermo_sft_free(sft);
    }
    assert!((h - ((1.0 + 5f64.sqrt()) / 2.0).ln()).abs() < 1e-12);
}

#[test]
fn validation_status_and_message() {
    let periodic = [0u8, 1, 1, 0];
    let mut sft = ptr::null_mut();
    let status = unsafe { thermo_sft_new(2, periodic.as_ptr(), &mut sft) };
    assert_eq!(status, ThermoStatus::Validation);
    assert!(sft.is_null());
    assert!(last_error().starts_with("NotPrimitive"), "{}", last_error());

    let mut h = full_shift();
    let mut phi = ptr::null_mut();
    let short = [0.0, 1.0, 2.0];
    let status = unsafe { thermo_potential_new(h.sft, 2, short.as_ptr(), short.len(), &mut phi) };
    assert_eq!(status, ThermoStatus::Validation);
    let ok = potential(&mut h, 1, &[0.0, 1.0]);
    assert!(!ok.is_null());
    assert_eq!(last_error(), "");
}

#[test]
fn null_arguments() {
    let h = full_shift();
    unsafe {
        assert_eq!(thermo_sft_entropy(ptr::null(), &mut 0.0), ThermoStatus::NullArgument);
        assert_eq!(thermo_sft_entropy(h.sft, ptr::null_mut()), ThermoStatus::NullArgument);
        assert_eq!(thermo_pressure(h.sft, ptr::null(), &mut 0.0), ThermoStatus::NullArgument);
        thermo_sft_free(ptr::null_mut());
        thermo_potential_free(ptr::null_mut());
        thermo_measure_free(ptr::null_mut());
    }
}

#[test]
fn pressure_and_measure() {
    let mut h = full_shift();
    let phi = potential(&mut h, 1, &[0.0, 1.0]);
    let mut p = 0.0;
    let mut mu = ptr::null_mut();
    unsafe {
        assert_eq!(thermo_pressure(h.sft, phi, &mut p), ThermoStatus::Ok);
        assert!((p - (1.0 + 1f64.exp()).ln()).abs() < 1e-12);
        assert_eq!(thermo_equilibrium(h.sft, phi, ptr::null_mut(), &mut mu), ThermoStatus::Ok);
        let (mut order, mut n, mut entropy, mut avg) = (0, 0, 0.0, 0.0);
        assert_eq!(thermo_measure_order(mu, &mut order), ThermoStatus::Ok);
        assert_eq!(thermo_measure_state_count(mu, &mut n), ThermoStatus::Ok);
        assert_eq!(thermo_measure_entropy(mu, &mut entropy), ThermoStatus::Ok);
        assert_eq!(thermo_measure_integrate(mu, phi, &mut avg), ThermoStatus::Ok);
        assert!((entropy + avg - p).abs() < 1e-12);
        let mut kernel = vec![0.0; n * n];
        assert_eq!(thermo_measure_kernel(mu, kernel.as_mut_ptr(), 1), ThermoStatus::InvalidArgument);
        assert_eq!(thermo_measure_kernel(mu, kernel.as_mut_ptr(), kernel.len()), ThermoStatus::Ok);
        for row in kernel.chunks(n) {
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
        let mut stationary = vec![0.0; n];
        assert_eq!(thermo_measure_stationary(mu, stationary.as_mut_ptr(), n), ThermoStatus::Ok);
        let q = 1f64.exp() / (1.0 + 1f64.exp());
        assert_eq!((order, n), (1, 2));
        assert!((stationary[1] - q).abs() < 1e-12);
        thermo_measure_free(mu);
    }
}

#[test]
fn maximization_and_solvers() {
    let mut h = full_shift();
    let mut fixed = ptr::null_mut();
    unsafe {
        assert_eq!(thermo_potential_fixed_point(h.sft, 0, &mut fixed), ThermoStatus::Ok);
    }
    h.phis.push(fixed);
    let psi = potential(&mut h, 1, &[0.0, 1.0]);
    let mut m = ThermoMaximization::default();
    let mut r = ThermoSolveResult::default();
    unsafe {
        assert_eq!(thermo_max_ergodic_average(h.sft, fixed, &mut m), ThermoStatus::Ok);
        assert_eq!(m.beta, 0.0);
        assert!(m.unique && m.cycle_length == 1 && m.ground_entropy == 0.0);

        assert_eq!(thermo_solve_entropy(h.sft, fixed, 0.3, &mut r), ThermoStatus::Ok);
        assert!(r.residual <= 1e-8 && r.bracket_lo <= r.t && r.t <= r.bracket_hi);
        assert_eq!(thermo_solve_entropy(h.sft, fixed, 0.8, &mut r), ThermoStatus::Solver);
        assert!(last_error().starts_with("TargetOutOfRange"));

        assert_eq!(thermo_solve_pressure(h.sft, psi, fixed, 0.9, &mut r), ThermoStatus::Ok);
        assert!(r.residual <= 1e-8);
    }
}

#[test]
fn mismatched_systems() {
    let mut a = full_shift();
    let phi = potential(&mut a, 1, &[0.0, 1.0]);
    let mut golden = ptr::null_mut();
    let mut p = 0.0;
    unsafe {
        assert_eq!(thermo_sft_golden_mean(&mut golden), ThermoStatus::Ok);
        assert_eq!(thermo_pressure(golden, phi, &mut p), ThermoStatus::Validation);
        thermo_sft_free(golden);
    }
}

#[test]
fn loads_config() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.json");
    std::fs::write(
        &path,
        r#"{"alphabet": 2, "transitions": [[1,1],[1,0]], "potentials": {"p": {"memory": 1, "values": {"0": 0, "1": 1}}}}"#,
    )
    .unwrap();
    let path = CString::new(path.to_str().unwrap()).unwrap();
    let name = CString::new("p").unwrap();
    let missing = CString::new("q").unwrap();
    let (mut sft, mut phi) = (ptr::null_mut(), ptr::null_mut());
    unsafe {
        assert_eq!(thermo_config_load(path.as_ptr(), missing.as_ptr(), &mut sft, &mut phi), ThermoStatus::InvalidArgument);
        assert_eq!(thermo_config_load(path.as_ptr(), name.as_ptr(), &mut sft, &mut phi), ThermoStatus::Ok);
        let mut p = 0.0;
        assert_eq!(thermo_pressure(sft, phi, &mut p), ThermoStatus::Ok);
        assert!(p > 0.4812);
        thermo_potential_free(phi);
        thermo_sft_free(sft);
    }
}

fn header() -> String {
    std::fs::read_to_string(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include/thermoform.h")).unwrap()
}

#[test]
fn header_declares_api() {
    let text = header();
    for symbol in [
        "typedef struct ThermoSft ThermoSft;",
        "typedef struct ThermoMeasure ThermoMeasure;",
        "THERMO_STATUS_OK = 0",
        "THERMO_STATUS_PANIC = 6",
        "thermo_last_error(void)",
        "thermo_sft_new(",
        "thermo_potential_new(",
        "thermo_equilibrium(",
        "thermo_measure_kernel(",
        "thermo_solve_pressure(",
        "thermo_config_load(",
    ] {
        assert!(text.contains(symbol), "header lacks {symbol}");
    }
}

#[test]
fn c_program_links_against_static_library() {
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    // target/<profile>/deps/<this test> -> target/<profile>
    let profile_dir = std::env::current_exe().unwrap().parent().unwrap().parent().unwrap().to_path_buf();
    let library = profile_dir.join("libthermoform_ffi.a");
    assert!(library.exists(), "{} missing", library.display());
    let out_dir = tempfile::tempdir().unwrap();
    let binary = out_dir.path().join("smoke");
    let compile = Command::new("cc")
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(manifest.join("tests/smoke.c"))
        .arg(&library)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&binary)
        .output()
        .expect("C compiler available");
    assert!(compile.status.success(), "{}", String::from_utf8_lossy(&compile.stderr));
    let run = Command::new(&binary).output().unwrap();
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    assert!(String::from_utf8_lossy(&run.stdout).starts_with("ok 0.481211825"));
}
