//! Shared reporting for the acceptance suite.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

/// Result of one check: pass flag and a short measured summary.
#[derive(Debug, Clone)]
pub struct Check {
    pub pass: bool,
    pub detail: String,
}

impl Check {
    pub fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self {
            pass,
            detail: detail.into(),
        }
    }
}

/// Collects PASS/FAIL lines and the overall outcome.
#[derive(Debug, Default)]
pub struct Report {
    failed: Vec<String>,
    total: usize,
}

impl Report {
    pub fn new() -> Self {
        Self::default()
    }

    /// Runs `f`, counts a panic as a failure, and fails the check if it
    /// overruns `budget`.
    pub fn run(
        &mut self,
        label: &str,
        name: &str,
        budget: Duration,
        f: impl FnOnce() -> Check,
    ) -> bool {
        let start = Instant::now();
        let check = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Check::new(false, format!("panicked: {msg}"))
        });
        let elapsed = start.elapsed();
        let in_time = elapsed <= budget;
        let pass = check.pass && in_time;
        let timing = format!("{:.2} s of {} s", elapsed.as_secs_f64(), budget.as_secs());
        let status = if pass { "PASS" } else { "FAIL" };
        let slow = if in_time { "" } else { " [over budget]" };
        println!(
            "{label}: {status} {name} | {} | {timing}{slow}",
            check.detail
        );
        self.total += 1;
        if !pass {
            self.failed.push(format!("{label} ({name})"));
        }
        pass
    }

    pub fn failures(&self) -> &[String] {
        &self.failed
    }

    /// Prints the tally and returns the process exit code.
    pub fn finish(&self) -> i32 {
        println!(
            "acceptance: {} of {} passed{}",
            self.total - self.failed.len(),
            self.total,
            if self.failed.is_empty() {
                String::new()
            } else {
                format!("; failed: {}", self.failed.join(", "))
            }
        );
        i32::from(!self.failed.is_empty())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn panics_and_overruns_fail() {
        let mut r = Report::new();
        assert!(r.run("a", "ok", Duration::from_secs(5), || Check::new(
            true, "fine"
        )));
        assert!(!r.run("b", "bad", Duration::from_secs(5), || Check::new(
            false, "no"
        )));
        assert!(!r.run("c", "boom", Duration::from_secs(5), || panic!("x")));
        assert!(!r.run("d", "slow", Duration::ZERO, || {
            std::thread::sleep(Duration::from_millis(2));
            Check::new(true, "")
        }));
        assert_eq!(r.failures(), ["b (bad)", "c (boom)", "d (slow)"]);
        assert_eq!(r.finish(), 1);
    }
}
