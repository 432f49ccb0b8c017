use pinwheel_core::validation::{run_suite, Mutation, SuiteOptions};

#[test]
fn clean_suite_passes() {
    let report = run_suite(&SuiteOptions::default()).unwrap();
    for c in &report.checks {
        assert!(c.passed, "{c:?}");
    }
    assert!(report.all_passed);
    assert!(report.checks.len() >= 15);
}

#[test]
fn flipped_x1_fails_saturation_only() {
    let report = run_suite(&SuiteOptions {
        seed: 0,
        mutation: Some(Mutation::FlipX1Sign),
    })
    .unwrap();
    assert!(!report.all_passed);
    let failed: Vec<&str> = report
        .checks
        .iter()
        .filter(|c| !c.passed)
        .map(|c| c.name.as_str())
        .collect();
    assert_eq!(failed, ["saturation_eigen_residual"]);
}
