//! Acceptance suite: one pass/fail line per criterion at full sample sizes.

use std::io::Write;

use chanorder::selftest::{run, Hooks, Profile};

#[test]
fn acceptance() {
    let outcomes = run(Profile::Full, Hooks::default());
    // Written to the raw handle so the summary shows even when output is captured.
    let mut err = std::io::stderr().lock();
    writeln!(err).unwrap();
    for o in &outcomes {
        writeln!(
            err,
            "[{}] criterion {}: {} ({:.2} s) — {}",
            if o.passed { "PASS" } else { "FAIL" },
            o.id,
            o.name,
            o.seconds,
            o.detail
        )
        .unwrap();
    }
    let failed: Vec<u8> = outcomes.iter().filter(|o| !o.passed).map(|o| o.id).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
