//! Acceptance criteria 1–7. Prints one pass/fail line per criterion and
//! exits nonzero if any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use warpflow_cli::suites::{
    axisymmetric_flow, axisymmetric_k1_config, axisymmetric_k2_config, identities, robustness, symfunc_properties,
    symmetric_exactness, symmetric_rate, SuiteOutcome, SYMFUNC_SAMPLES,
};

struct Criterion {
    number: u32,
    name: &'static str,
    limit: Option<Duration>,
    check: fn() -> SuiteOutcome,
}

fn criteria() -> Vec<Criterion> {
    let secs = |s: u64| Some(Duration::from_secs(s));
    vec![
        Criterion { number: 1, name: "symmetric exactness", limit: secs(1), check: symmetric_exactness },
        Criterion { number: 2, name: "symmetric rate -2/n", limit: secs(2), check: symmetric_rate },
        Criterion { number: 3, name: "axisymmetric k=1 m=0", limit: secs(60), check: || axisymmetric_flow(&axisymmetric_k1_config()).0 },
        Criterion { number: 4, name: "axisymmetric k=2 m=2", limit: secs(90), check: || axisymmetric_flow(&axisymmetric_k2_config()).0 },
        Criterion { number: 5, name: "symmetric-function properties", limit: secs(10), check: || symfunc_properties(SYMFUNC_SAMPLES) },
        Criterion { number: 6, name: "identity residuals", limit: secs(30), check: identities },
        Criterion { number: 7, name: "robustness", limit: None, check: || robustness(&axisymmetric_k1_config()) },
    ]
}

fn main() -> ExitCode {
    let filter: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut all = true;
    for c in criteria() {
        if !filter.is_empty() && !filter.contains(&c.number) {
            continue;
        }
        let start = Instant::now();
        let outcome = (c.check)();
        let elapsed = start.elapsed();
        let failed: Vec<String> = outcome
            .report
            .entries
            .iter()
            .filter(|e| !e.passed)
            .map(|e| format!("{} (measured {:.6e}, bound {:.3e})", e.id, e.measured, e.bound))
            .collect();
        let in_time = c.limit.is_none_or(|l| elapsed <= l);
        let passed = failed.is_empty() && in_time && !outcome.report.entries.is_empty();
        all &= passed;
        let limit = c.limit.map_or(String::new(), |l| format!(" / limit {:.0} s", l.as_secs_f64()));
        let mut line = format!(
            "criterion {}: {} [{}] {} claims, {:.2} s{limit}",
            c.number,
            if passed { "PASS" } else { "FAIL" },
            c.name,
            outcome.report.entries.len(),
            elapsed.as_secs_f64()
        );
        if !in_time {
            line.push_str(" (over time limit)");
        }
        if !failed.is_empty() {
            line.push_str(&format!("; failing: {}", failed.join(", ")));
        }
        println!("{line}");
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
