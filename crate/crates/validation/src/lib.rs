//! Minimal reporting harness for the acceptance suite.
//!
//! Each criterion runs once, in order, and prints a single line:
//!
//! ```text
//! PASS  C01  g2_11(0) at eta = 1 matches the closed form  [max rel 2.2e-16; 0.01 s]
//! ```
//!
//! The process exits with status 1 if any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

/// Outcome of one criterion: a pass flag plus findings for the report line.
#[derive(Debug, Default)]
pub struct Check {
    failures: Vec<String>,
    notes: Vec<String>,
}

impl Check {
    pub fn new() -> Self {
        Self::default()
    }

    /// Records `msg` as a failure unless `ok`.
    pub fn require(&mut self, ok: bool, msg: impl Into<String>) -> &mut Self {
        if !ok {
            self.failures.push(msg.into());
        }
        self
    }

    pub fn note(&mut self, msg: impl Into<String>) -> &mut Self {
        self.notes.push(msg.into());
        self
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    fn detail(&self) -> String {
        let mut parts = self.notes.clone();
        const SHOWN: usize = 3;
        if !self.failures.is_empty() {
            let mut f: Vec<String> = self.failures.iter().take(SHOWN).cloned().collect();
            if self.failures.len() > SHOWN {
                f.push(format!("and {} more", self.failures.len() - SHOWN));
            }
            parts.push(format!("failed: {}", f.join("; ")));
        }
        parts.join("; ")
    }
}

pub struct Suite {
    filters: Vec<String>,
    results: Vec<(u32, bool)>,
}

impl Suite {
    /// Arguments that do not start with `-` select criteria by substring of
    /// their id (`C05`) or title.
    pub fn from_args() -> Self {
        Self {
            filters: std::env::args()
                .skip(1)
                .filter(|a| !a.starts_with('-'))
                .map(|a| a.to_lowercase())
                .collect(),
            results: Vec::new(),
        }
    }

    pub fn run(&mut self, id: u32, title: &str, f: impl FnOnce() -> Check) {
        let tag = format!("C{id:02}");
        let hay = format!("{tag} {title}").to_lowercase();
        if !self.filters.is_empty() && !self.filters.iter().any(|f| hay.contains(f)) {
            return;
        }
        let start = Instant::now();
        let check = f();
        let elapsed = start.elapsed();
        let status = if check.passed() { "PASS" } else { "FAIL" };
        println!("{status}  {tag}  {title}  [{}; {}]", check.detail(), secs(elapsed));
        self.results.push((id, check.passed()));
    }

    pub fn finish(self) -> ExitCode {
        let failed: Vec<String> = self
            .results
            .iter()
            .filter(|(_, ok)| !ok)
            .map(|(id, _)| format!("C{id:02}"))
            .collect();
        println!(
            "acceptance: {} passed, {} failed{}",
            self.results.len() - failed.len(),
            failed.len(),
            if failed.is_empty() {
                String::new()
            } else {
                format!(" ({})", failed.join(", "))
            }
        );
        if failed.is_empty() {
            ExitCode::SUCCESS
        } else {
            ExitCode::from(1)
        }
    }
}

pub fn secs(d: Duration) -> String {
    format!("{:.2} s", d.as_secs_f64())
}

/// `|a - b| / |b|`, or `|a|` when `b` is zero.
pub fn rel_err(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        a.abs()
    } else {
        ((a - b) / b).abs()
    }
}
