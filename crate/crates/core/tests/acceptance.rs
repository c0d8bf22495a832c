//! Runs the twelve acceptance criteria at full size and prints one line per
//! criterion. Run with `--nocapture` to see the lines.

use elastica::selftest::{Selftest, SelftestConfig, FULL_BUDGET};

/// Tolerance each criterion must report, as fixed by the acceptance table.
/// Criteria 9, 10 and 12 report ratios: reduction factor (at least 100),
/// image gap over `2π/n₀` (at most 1) and worst error over its tolerance
/// (at most 1).
const PINNED: [(usize, f64); 12] = [
    (1, 1e-5),
    (2, 1e-3),
    (3, 1e-10),
    (4, 1e-3),
    (5, 1e-8),
    (6, 1e-3),
    (7, 1e-3),
    (8, 1e-2),
    (9, 100.0),
    (10, 1.0),
    (11, 1e-4),
    (12, 1.0),
];

#[test]
fn acceptance() {
    let suite = Selftest::new(SelftestConfig::default());
    let report = suite.run();
    for check in &report.checks {
        println!("{}", check.line());
    }
    println!("suite time {:.1}s (budget {FULL_BUDGET}s)", report.total_seconds);

    assert_eq!(report.checks.len(), 12);
    for ((id, tol), check) in PINNED.iter().zip(&report.checks) {
        assert_eq!(check.id, *id);
        assert_eq!(check.tolerance, *tol, "criterion {id} tolerance drifted");
    }
    let failed: Vec<usize> = report.checks.iter().filter(|c| !c.passed).map(|c| c.id).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}

#[test]
fn quick_suite_fits_its_budget() {
    let report = Selftest::new(SelftestConfig {
        quick: true,
        ..SelftestConfig::default()
    })
    .run();
    for check in &report.checks {
        println!("quick {}", check.line());
    }
    assert!(report.all_passed);
    assert!(report.total_seconds < 60.0);
}

#[test]
fn tight_constraint_tolerance_is_reported_not_fatal() {
    // At 1e-14 the multiplier Newton iteration may exhaust its budget; the
    // affected checks must come back as results, not panics.
    let suite = Selftest::new(SelftestConfig {
        tol_f: 1e-14,
        quick: true,
        ..SelftestConfig::default()
    });
    for id in [5, 6] {
        let r = suite.check(id);
        println!("tol_f 1e-14 {}", r.line());
        assert_eq!(r.id, id);
    }
}
