//! Rendering helpers shared by the CLI and tests.

use crate::checks::{PropertyCheck, Requirement};

/// Full-precision decimal rendering (17 significant digits), enough to
/// round-trip any f64.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// One line per check: `PASS/FAIL name observed <=|>= threshold`.
pub fn render_checks(checks: &[PropertyCheck]) -> String {
    let width = checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
    let mut out = String::new();
    for c in checks {
        let cmp = match c.requirement {
            Requirement::AtMost => "<=",
            Requirement::AtLeast => ">=",
        };
        out.push_str(&format!(
            "{} {:width$}  {} {} {}\n",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            fmt_f64(c.observed),
            cmp,
            fmt_f64(c.threshold),
        ));
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    out.push_str(&format!(
        "{} checks, {} failed\n",
        checks.len(),
        failed
    ));
    out
}

pub fn all_passed(checks: &[PropertyCheck]) -> bool {
    !checks.is_empty() && checks.iter().all(|c| c.passed)
}
