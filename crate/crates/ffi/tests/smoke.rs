//! End-to-end exercises of the C ABI from Rust, plus a syntax check of the
//! generated header with the system C compiler.

use std::path::Path;
use std::process::Command;
use std::ptr;

use relufit_ffi::*;

fn last_error() -> String {
    let ptr = relufit_last_error_message();
    unsafe { std::ffi::CStr::from_ptr(ptr) }
        .to_string_lossy()
        .into_owned()
}

#[test]
fn generate_solve_and_read_trace() {
    let mut handle: *mut RelufitDataset = ptr::null_mut();
    let status = unsafe { relufit_dataset_generate(40, 4, 1.0, 400, 11, &mut handle) };
    assert_eq!(status, RelufitStatus::RelufitOk, "{}", last_error());
    assert!(!handle.is_null());

    let (mut n, mut d) = (0usize, 0usize);
    assert_eq!(
        unsafe { relufit_dataset_dims(handle, &mut n, &mut d) },
        RelufitStatus::RelufitOk
    );
    assert_eq!((n, d), (400, 40));

    let mut w_star = vec![0.0; d];
    assert_eq!(
        unsafe { relufit_dataset_planted(handle, w_star.as_mut_ptr(), w_star.len()) },
        RelufitStatus::RelufitOk
    );
    assert_eq!(w_star.iter().filter(|&&x| x != 0.0).count(), 4);

    let mut solution = vec![0.0; d];
    let mut trace: *mut RelufitTrace = ptr::null_mut();
    // Constraint kind 2 = l1, nonpositive radius = natural level from w*.
    let status = unsafe {
        relufit_solve(
            handle,
            2,
            -1.0,
            0,
            200,
            1.0,
            1e-12,
            solution.as_mut_ptr(),
            solution.len(),
            &mut trace,
        )
    };
    assert_eq!(status, RelufitStatus::RelufitOk, "{}", last_error());
    assert!(!trace.is_null());

    let len = unsafe { relufit_trace_len(trace) };
    assert!(len >= 2);
    let mut rel_errs = vec![0.0; len];
    assert_eq!(
        unsafe { relufit_trace_rel_errs(trace, rel_errs.as_mut_ptr(), len) },
        RelufitStatus::RelufitOk
    );
    assert_eq!(rel_errs[0], 1.0);
    assert!(*rel_errs.last().unwrap() <= 1e-9);
    assert!(unsafe { relufit_trace_converged_at(trace) } >= 0);

    let mut losses = vec![0.0; len];
    assert_eq!(
        unsafe { relufit_trace_losses(trace, losses.as_mut_ptr(), len) },
        RelufitStatus::RelufitOk
    );
    assert!(losses[0] > *losses.last().unwrap());

    let err = solution
        .iter()
        .zip(w_star.iter())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    assert!(err <= 1e-9, "recovery error {err}");

    unsafe {
        relufit_trace_free(trace);
        relufit_dataset_free(handle);
    }
}

#[test]
fn projection_and_width_entry_points() {
    let v = [3.0, 1.0];
    let mut out = [0.0; 2];
    let status = unsafe { relufit_project(2, 2.0, 0, v.as_ptr(), 2, out.as_mut_ptr()) };
    assert_eq!(status, RelufitStatus::RelufitOk);
    assert_eq!(out, [2.0, 0.0]);

    let mut width = 0.0;
    assert_eq!(
        unsafe { relufit_width_analytic_l1(200, 10, &mut width) },
        RelufitStatus::RelufitOk
    );
    assert!((width - 40.78).abs() <= 0.01);

    let mut phi = 0.0;
    assert_eq!(
        unsafe { relufit_phi_gamma(1.0, &mut phi) },
        RelufitStatus::RelufitOk
    );
    assert!((phi - (2.0 / std::f64::consts::PI).sqrt()).abs() <= 1e-8);

    let (mut n0, mut mc, mut se) = (0.0, 0.0, 0.0);
    let status = unsafe { relufit_width_mc(1, 50, 7, 2000, 1, &mut n0, &mut mc, &mut se) };
    assert_eq!(status, RelufitStatus::RelufitOk);
    assert!((mc - 7.0).abs() <= (3.0 * se).max(1.0));
}

#[test]
fn errors_set_messages_and_codes() {
    let mut handle: *mut RelufitDataset = ptr::null_mut();
    // sparsity > d is an invalid spec.
    let status = unsafe { relufit_dataset_generate(4, 9, 1.0, 10, 0, &mut handle) };
    assert_eq!(status, RelufitStatus::RelufitInvalidArgument);
    assert!(last_error().contains("sparsity"));

    let mut width = 0.0;
    assert_eq!(
        unsafe { relufit_width_analytic_l1(4, 9, &mut width) },
        RelufitStatus::RelufitInvalidArgument
    );

    // Buffer too small.
    let status = unsafe { relufit_dataset_generate(8, 2, 1.0, 10, 0, &mut handle) };
    assert_eq!(status, RelufitStatus::RelufitOk);
    let mut tiny = [0.0; 2];
    assert_eq!(
        unsafe { relufit_dataset_planted(handle, tiny.as_mut_ptr(), tiny.len()) },
        RelufitStatus::RelufitBufferTooSmall
    );
    unsafe { relufit_dataset_free(handle) };
}

#[test]
fn generated_header_is_valid_c() {
    let include_dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("include");
    let header = include_dir.join("relufit.h");
    assert!(header.exists(), "cbindgen header was not generated");
    let text = std::fs::read_to_string(&header).unwrap();
    for symbol in [
        "relufit_dataset_generate",
        "relufit_solve",
        "relufit_trace_rel_errs",
        "relufit_project",
        "relufit_width_analytic_l1",
        "RelufitStatus",
    ] {
        assert!(text.contains(symbol), "header is missing {symbol}");
    }

    // Syntax-check the header as C with the system compiler.
    let dir = tempfile::tempdir().unwrap();
    let main_c = dir.path().join("smoke.c");
    std::fs::write(&main_c, "#include \"relufit.h\"\nint main(void) { return 0; }\n").unwrap();
    let out = Command::new("cc")
        .arg("-fsyntax-only")
        .arg("-I")
        .arg(&include_dir)
        .arg(&main_c)
        .output()
        .expect("cc is available");
    assert!(
        out.status.success(),
        "header fails to parse as C: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}
