//! Runner for the acceptance suite in `tests/acceptance.rs`.
//!
//! Each criterion reports a one-line detail whether it passes or fails, so
//! a red run still shows how far each check got.

use std::process::ExitCode;
use std::time::Instant;

/// `Ok(detail)` on a pass, `Err(detail)` on a failure.
pub type Verdict = Result<String, String>;

/// Runs every check in order, printing one `PASS`/`FAIL` line each.
///
/// Exits with failure when any criterion fails.
pub fn run_criteria(criteria: &[(&str, &dyn Fn() -> Verdict)]) -> ExitCode {
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let (tag, detail) = match check() {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!(
            "criterion {:>2} {tag} {name} ({:.1} s): {detail}",
            i + 1,
            t.elapsed().as_secs_f64()
        );
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
