//! Acceptance run: one PASS/FAIL line per criterion, followed by the
//! suite-level checks (fault injection, seed robustness, determinism).
//! Built without the libtest harness so the lines always reach stdout.

use std::process::ExitCode;

use finsler_cli::scenario::TaskKind;
use finsler_cli::suite::{self, CriterionReport, SuiteReport};
use finsler_cli::tasks::run_task;
use finsler_core::metric::MetricSpec;

const SEED: u64 = 0;
const EXTRA_SEEDS: [u64; 3] = [1, 2, 3];

fn pattern(r: &SuiteReport) -> Vec<bool> {
    r.criteria.iter().map(CriterionReport::passed).collect()
}

fn line(ok: bool, what: &str, detail: impl std::fmt::Display) -> bool {
    println!("[{}] {what}: {detail}", if ok { "PASS" } else { "FAIL" });
    ok
}

fn main() -> ExitCode {
    let mut all = true;
    let report = suite::verify_all(SEED);
    for c in &report.criteria {
        println!("{c}");
        for m in c.measurements.iter().filter(|m| !m.ok()) {
            println!("    failed: {} = {:e} (threshold {:e})", m.label, m.value, m.threshold);
        }
        for e in &c.errors {
            println!("    error: {e}");
        }
        all &= c.passed();
    }

    let randers = MetricSpec::randers_default();
    let run = |fault: bool| {
        let params = serde_json::json!({ "samples": 4, "seed": SEED, "fault": fault });
        run_task(TaskKind::JacobiCompare, &randers, &params, "acceptance").map(|o| o.passed())
    };
    let (clean, faulty) = (run(false), run(true));
    all &= line(
        matches!((&clean, &faulty), (Ok(true), Ok(false))),
        "fault injection",
        format!("jacobi-compare clean passes = {clean:?}, flipped curvature passes = {faulty:?}"),
    );

    let base = pattern(&report);
    for seed in EXTRA_SEEDS {
        let other = suite::verify_all(seed);
        all &= line(
            pattern(&other) == base,
            &format!("seed {seed} pass/fail pattern"),
            format!("{}/{} criteria pass", other.criteria.iter().filter(|c| c.passed()).count(), base.len()),
        );
    }

    let a = finsler_cli::suite_table(&report).render();
    let b = finsler_cli::suite_table(&suite::verify_all(SEED)).render();
    all &= line(a == b, "rerun determinism", format!("{} bytes of summary CSV compared", a.len()));

    println!("acceptance: {}", if all { "all criteria PASS" } else { "FAILURES present" });
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
