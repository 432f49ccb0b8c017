//! Acceptance criteria 1-10, one PASS/FAIL line each. Exits nonzero if any
//! criterion fails.

use std::f64::consts::PI;
use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use pinwheel_cli::commands::cmd_pinwheel;
use pinwheel_cli::config::RunConfig;
use pinwheel_core::pinwheel::{vector_sum_orientation, wrap_angle, ActivityStack, OrientationSampleSet};
use pinwheel_core::pipeline::{run_pipeline, PipelineParams};
use pinwheel_core::special::J0_FIRST_ZERO;
use pinwheel_core::synthesis::GridSpec;
use pinwheel_core::validation::{
    angular_spread_deviation, bessel_first_zero, bessel_limit_error, commutator_error, equal_uncertainty_mismatch,
    integral_curve_error, min_random_state_gap, parseval_error, planar_bracket_order, plane_wave_correlation,
    saturation_errors, single_state_annulus_fraction, RANDOM_STATE_COUNT,
};

struct Criterion {
    id: u32,
    title: &'static str,
    passed: bool,
    detail: String,
    elapsed: Duration,
}

/// Runs `body`, which returns `(passed, detail)`; a runtime budget is part of
/// the verdict when given.
fn run(id: u32, title: &'static str, budget: Option<Duration>, body: impl FnOnce() -> (bool, String)) -> Criterion {
    let start = Instant::now();
    let (ok, mut detail) = body();
    let elapsed = start.elapsed();
    let mut passed = ok;
    if let Some(b) = budget {
        let in_time = elapsed < b;
        passed &= in_time;
        detail.push_str(&format!(
            "; runtime {:.2}s < {:.0}s: {in_time}",
            elapsed.as_secs_f64(),
            b.as_secs_f64()
        ));
    }
    Criterion {
        id,
        title,
        passed,
        detail,
        elapsed,
    }
}

fn check(measured: f64, ok: bool, what: &str) -> (bool, String) {
    (ok, format!("{what} = {measured:.3e}"))
}

fn all(parts: Vec<(bool, String)>) -> (bool, String) {
    let passed = parts.iter().all(|(p, _)| *p);
    let detail = parts.into_iter().map(|(_, d)| d).collect::<Vec<_>>().join("; ");
    (passed, detail)
}

fn criterion_1() -> (bool, String) {
    let gap = min_random_state_gap(0, RANDOM_STATE_COUNT).expect("random states");
    check(gap, gap >= -1e-9, "min gap over 1000 states (>= -1e-9)")
}

fn criterion_2() -> (bool, String) {
    let (gap, residual) = saturation_errors(None).expect("saturation grid");
    all(vec![
        check(gap, gap < 1e-8, "max |gap| (< 1e-8)"),
        check(residual, residual < 1e-9, "max eigen residual (< 1e-9)"),
    ])
}

fn criterion_3() -> (bool, String) {
    let d = equal_uncertainty_mismatch().expect("balanced state");
    check(d, d < 1e-6, "|dn X1 - dn X2| at lambda = 1/(2 omega) (< 1e-6)")
}

fn criterion_4() -> (bool, String) {
    let d = angular_spread_deviation().expect("spreads");
    check(d, d <= 0.05, "max |dphi * 2 sqrt(lambda omega) - 1| (<= 0.05)")
}

fn criterion_5() -> (bool, String) {
    let corr = plane_wave_correlation(1.0, 0.0, 256).expect("plane wave");
    let bessel = bessel_limit_error(1.0, &GridSpec::default_for(1.0)).expect("bessel");
    let zero = (bessel_first_zero(1.0).expect("zero") - J0_FIRST_ZERO).abs();
    all(vec![
        (corr > 0.99, format!("plane-wave correlation = {corr:.6} (> 0.99)")),
        check(bessel, bessel < 1e-8, "max |u - pi J0| for r <= 20 (< 1e-8)"),
        check(zero, zero <= 1e-3, "first-zero error (<= 1e-3)"),
    ])
}

fn criterion_6() -> (bool, String) {
    let comm = commutator_error(0).expect("commutator");
    let (order, _) = planar_bracket_order();
    all(vec![
        check(comm, comm < 1e-10, "commutator error (< 1e-10)"),
        (
            (order - 2.0).abs() < 0.25,
            format!("planar bracket observed order = {order:.3} (2 +- 0.25)"),
        ),
    ])
}

fn criterion_7() -> (bool, String) {
    let e = integral_curve_error().expect("curves");
    check(e, e < 1e-6, "max RK4 endpoint error, 200 steps (< 1e-6)")
}

fn criterion_8() -> (bool, String) {
    let run = run_pipeline(&PipelineParams::default_with_seed(0)).expect("pipeline");
    let quantized = run.pinwheels.iter().all(|p| p.charge.abs() == 0.5);

    let grid = GridSpec::square(65, 6.0).unwrap();
    let beta = |x: f64, y: f64| (0.5 * y.atan2(x) + 0.2 * x).rem_euclid(PI);
    let omap = vector_sum_orientation(&ActivityStack::cos_squared(
        grid,
        &OrientationSampleSet::new(8).unwrap(),
        beta,
    ));
    let mut oracle_err: f64 = 0.0;
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            let d = wrap_angle(2.0 * (omap.preferred_at(i, j) - beta(grid.x1(i), grid.x2(j)))).abs() / 2.0;
            oracle_err = oracle_err.max(d);
        }
    }
    all(vec![
        (
            run.pinwheels.len() >= 10,
            format!("{} pinwheels (>= 10)", run.pinwheels.len()),
        ),
        (quantized, format!("charges all +-1/2: {quantized}")),
        (
            run.net_winding == run.boundary_winding,
            format!(
                "net charge {} vs boundary {}",
                run.net_charge(),
                0.5 * run.boundary_winding as f64
            ),
        ),
        check(oracle_err, oracle_err < 1e-12, "cos^2 oracle max error"),
    ])
}

fn criterion_9() -> (bool, String) {
    let run = run_pipeline(&PipelineParams::default_with_seed(0)).expect("pipeline");
    let offset = (run.annulus.peak_radius - 1.0).abs() / run.spectrum.bin_width();
    let frac = run.annulus.fraction_in_annulus;
    let single = single_state_annulus_fraction().expect("single states");
    let parseval = parseval_error().expect("parseval");
    all(vec![
        (offset <= 1.0, format!("peak offset = {offset:.2} bins (<= 1)")),
        (frac >= 0.9, format!("z-field annulus fraction = {frac:.4} (>= 0.9)")),
        (single >= 0.99, format!("single-state fraction = {single:.5} (>= 0.99)")),
        check(parseval, parseval < 1e-9, "Parseval relative error (< 1e-9)"),
    ])
}

fn files_in(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut entries: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                std::fs::read(e.path()).unwrap(),
            )
        })
        .collect();
    entries.sort();
    entries
}

fn criterion_10() -> (bool, String) {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    // Same output path for both runs so the echoed config matches too.
    let shared = tempfile::tempdir().unwrap();
    let out = shared.path().join("run");
    let cfg = RunConfig {
        out: out.clone(),
        ..Default::default()
    };
    cmd_pinwheel(&cfg).expect("first run");
    std::fs::rename(&out, a.path().join("run")).unwrap();
    cmd_pinwheel(&cfg).expect("second run");
    std::fs::rename(&out, b.path().join("run")).unwrap();

    let (fa, fb) = (files_in(&a.path().join("run")), files_in(&b.path().join("run")));
    let same_names = fa.iter().map(|f| &f.0).eq(fb.iter().map(|f| &f.0));
    let mut differing = Vec::new();
    let mut pixel_mismatch = Vec::new();
    for ((name, x), (_, y)) in fa.iter().zip(&fb) {
        if x != y {
            differing.push(name.clone());
        }
        if name.ends_with(".png") {
            let (ia, ib) = (image::load_from_memory(x).unwrap(), image::load_from_memory(y).unwrap());
            if ia.as_bytes() != ib.as_bytes() {
                pixel_mismatch.push(name.clone());
            }
        }
    }
    let ok = same_names && differing.is_empty() && pixel_mismatch.is_empty();
    (
        ok,
        format!(
            "{} files compared; byte mismatches {:?}; pixel mismatches {:?}",
            fa.len(),
            differing,
            pixel_mismatch
        ),
    )
}

fn main() -> ExitCode {
    // `cargo test -- --list` and similar probes pass flags; there is nothing
    // to enumerate.
    if std::env::args().any(|a| a == "--list") {
        return ExitCode::SUCCESS;
    }
    let s = Duration::from_secs;
    let results = [
        run(1, "uncertainty inequality", Some(s(5)), criterion_1),
        run(2, "saturation", Some(s(1)), criterion_2),
        run(3, "equal-uncertainty point", None, criterion_3),
        run(4, "angular spread asymptotics", None, criterion_4),
        run(5, "limiting fields", Some(s(30)), criterion_5),
        run(6, "commutator", None, criterion_6),
        run(7, "integral curves", None, criterion_7),
        run(8, "pinwheel pipeline", None, criterion_8),
        run(9, "annulus spectrum", Some(s(10)), criterion_9),
        run(10, "reproducibility", None, criterion_10),
    ];
    for c in &results {
        println!(
            "[{}] criterion {:>2} {}: {} ({:.2}s)",
            if c.passed { "PASS" } else { "FAIL" },
            c.id,
            c.title,
            c.detail,
            c.elapsed.as_secs_f64()
        );
    }
    let failed = results.iter().filter(|c| !c.passed).count();
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
