use chanorder::selftest::{run, Hooks, Profile, Selftest};

#[test]
fn quick_profile_passes() {
    let outcomes = run(Profile::Quick, Hooks::default());
    for o in &outcomes {
        eprintln!("{} {:<34} {:>7.2}s {}", if o.passed { "ok  " } else { "FAIL" }, o.name, o.seconds, o.detail);
    }
    assert_eq!(outcomes.len(), 9);
    assert!(outcomes.iter().all(|o| o.passed));
}

#[test]
fn corrupted_solver_tolerance_is_caught() {
    let mut suite = Selftest::new(Profile::Quick, Hooks { corrupt_solver_tol: true });
    let first = suite.constructed_degradable();
    let bsc = suite.bsc_threshold();
    assert!(!first.passed || !bsc.passed, "{} / {}", first.detail, bsc.detail);
}
