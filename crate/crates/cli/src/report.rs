//! Structured-text run reports.
//!
//! A report is a sequence of `[section]` blocks of `key = value` lines. The
//! `[config]` block is a complete configuration document, so a report can be
//! re-run as is. Everything except the trailing `[timing]` block is a pure
//! function of the configuration.

use std::fmt::{self, Write as _};

use crate::config::ExperimentConfig;
use crate::error::CliError;

/// Shortest round-trip form, in scientific notation outside `[1e-4, 1e15)`.
pub fn fmt_f64(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || !a.is_finite() || (1e-4..1e15).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    /// `value <= bound + tolerance`
    Le,
    /// `value >= bound - tolerance`
    Ge,
    /// `|value - bound| <= tolerance`
    Within,
    /// Reported only.
    Info,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Le => "<=",
            Self::Ge => ">=",
            Self::Within => "within",
            Self::Info => "info",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    NotApplicable,
    Info,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Pass => "pass",
            Self::Fail => "fail",
            Self::NotApplicable => "not_applicable",
            Self::Info => "info",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Claim {
    pub name: String,
    pub value: f64,
    pub bound: f64,
    pub tolerance: f64,
    pub relation: Relation,
    pub status: Status,
    pub details: Vec<(String, String)>,
}

impl Claim {
    /// A checked claim; the status follows from value, bound and tolerance.
    pub fn check(
        name: impl Into<String>,
        value: f64,
        relation: Relation,
        bound: f64,
        tolerance: f64,
    ) -> Self {
        let ok = match relation {
            Relation::Le => value <= bound + tolerance,
            Relation::Ge => value >= bound - tolerance,
            Relation::Within => (value - bound).abs() <= tolerance,
            Relation::Info => true,
        };
        let status = match relation {
            Relation::Info => Status::Info,
            _ if ok => Status::Pass,
            _ => Status::Fail,
        };
        Self {
            name: name.into(),
            value,
            bound,
            tolerance,
            relation,
            status,
            details: Vec::new(),
        }
    }

    pub fn le(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self::check(name, value, Relation::Le, bound, 0.0)
    }

    pub fn ge(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self::check(name, value, Relation::Ge, bound, 0.0)
    }

    pub fn within(name: impl Into<String>, value: f64, target: f64, tolerance: f64) -> Self {
        Self::check(name, value, Relation::Within, target, tolerance)
    }

    pub fn info(name: impl Into<String>, value: f64) -> Self {
        Self::check(name, value, Relation::Info, f64::NAN, 0.0)
    }

    /// A claim outside the range where anything is asserted.
    pub fn not_applicable(name: impl Into<String>, value: f64) -> Self {
        Self {
            status: Status::NotApplicable,
            ..Self::info(name, value)
        }
    }

    pub fn detail(mut self, key: &str, value: impl fmt::Display) -> Self {
        self.details.push((key.to_string(), value.to_string()));
        self
    }

    pub fn detail_f64(self, key: &str, value: f64) -> Self {
        self.detail(key, fmt_f64(value))
    }

    pub fn passed(&self) -> bool {
        self.status != Status::Fail
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub config: ExperimentConfig,
    pub claims: Vec<Claim>,
    pub artifacts: Vec<String>,
    pub wall_clock_s: Option<f64>,
}

impl RunReport {
    pub fn new(config: ExperimentConfig, claims: Vec<Claim>) -> Self {
        Self {
            config,
            claims,
            artifacts: Vec::new(),
            wall_clock_s: None,
        }
    }

    pub fn passed(&self) -> bool {
        self.claims.iter().all(Claim::passed)
    }

    pub fn failed_claims(&self) -> Vec<&str> {
        self.claims
            .iter()
            .filter(|c| !c.passed())
            .map(|c| c.name.as_str())
            .collect()
    }

    /// The deterministic part of the report.
    pub fn render_body(&self) -> String {
        let mut out = String::new();
        let pass = if self.passed() { "pass" } else { "fail" };
        let _ = writeln!(out, "[run]");
        let _ = writeln!(out, "experiment = {}", self.config.experiment);
        let _ = writeln!(out, "status = {pass}");
        let _ = writeln!(out, "claims = {}", self.claims.len());
        let _ = writeln!(out, "failed = {}", self.failed_claims().len());
        let _ = writeln!(out, "\n[config]");
        out.push_str(&self.config.to_document());
        for c in &self.claims {
            let _ = writeln!(out, "\n[claim.{}]", c.name);
            let _ = writeln!(out, "value = {}", fmt_f64(c.value));
            if c.relation != Relation::Info {
                let _ = writeln!(out, "relation = {}", c.relation);
                let _ = writeln!(out, "bound = {}", fmt_f64(c.bound));
                let _ = writeln!(out, "tolerance = {}", fmt_f64(c.tolerance));
            }
            let _ = writeln!(out, "status = {}", c.status);
            for (k, v) in &c.details {
                let _ = writeln!(out, "{k} = {v}");
            }
        }
        let _ = writeln!(out, "\n[artifacts]");
        let _ = writeln!(out, "files = {}", self.artifacts.join(", "));
        out
    }

    pub fn render(&self) -> String {
        let mut out = self.render_body();
        if let Some(s) = self.wall_clock_s {
            let _ = writeln!(out, "\n[timing]\nwall_clock_s = {s:.3}");
        }
        out
    }

    pub fn summary_line(&self) -> String {
        let n_pass = self.claims.iter().filter(|c| c.status == Status::Pass).count();
        let n_na = self
            .claims
            .iter()
            .filter(|c| c.status == Status::NotApplicable)
            .count();
        let failed = self.failed_claims();
        let mut line = format!(
            "{}: {} ({} pass, {} fail, {} not applicable)",
            self.config.experiment,
            if failed.is_empty() { "PASS" } else { "FAIL" },
            n_pass,
            failed.len(),
            n_na
        );
        if !failed.is_empty() {
            let _ = write!(line, " failed: {}", failed.join(", "));
        }
        line
    }
}

/// The configuration echoed in a rendered report.
pub fn config_from_report(text: &str) -> Result<ExperimentConfig, CliError> {
    let mut in_config = false;
    let mut doc = String::new();
    for line in text.lines() {
        let trimmed = line.trim();
        if trimmed.starts_with('[') {
            in_config = trimmed == "[config]";
            continue;
        }
        if in_config {
            doc.push_str(line);
            doc.push('\n');
        }
    }
    ExperimentConfig::parse(&doc)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config() -> ExperimentConfig {
        ExperimentConfig::parse("experiment = neg-moments\nseed = 4\n").unwrap()
    }

    #[test]
    fn status_follows_relation() {
        assert_eq!(Claim::le("a", 1.0, 1.0).status, Status::Pass);
        assert_eq!(Claim::le("a", 1.1, 1.0).status, Status::Fail);
        assert_eq!(Claim::ge("a", 0.9, 1.0).status, Status::Fail);
        assert_eq!(Claim::within("a", 2.1, 2.0, 0.2).status, Status::Pass);
        assert_eq!(Claim::within("a", f64::NAN, 2.0, 0.2).status, Status::Fail);
        assert_eq!(Claim::info("a", 3.0).status, Status::Info);
        assert!(Claim::not_applicable("a", 3.0).passed());
    }

    #[test]
    fn floats_round_trip() {
        for x in [0.0, 1e-12, -3.5e-7, 0.1, 2.0, 1e20, 0.000123] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(fmt_f64(1e-12), "1e-12");
        assert_eq!(fmt_f64(0.5), "0.5");
    }

    #[test]
    fn report_reruns_from_its_config_echo() {
        let mut r = RunReport::new(config(), vec![Claim::le("x", 0.5, 1.0).detail("n", 3)]);
        r.artifacts.push("report.txt".into());
        r.wall_clock_s = Some(1.5);
        let text = r.render();
        assert!(text.starts_with(&r.render_body()));
        assert!(text.contains("[timing]") && !r.render_body().contains("[timing]"));
        assert_eq!(config_from_report(&text).unwrap(), r.config);
        assert!(r.passed());
        assert!(r.summary_line().contains("PASS"));
    }

    #[test]
    fn failing_claim_fails_report() {
        let r = RunReport::new(config(), vec![Claim::le("x", 2.0, 1.0), Claim::info("y", 0.0)]);
        assert!(!r.passed());
        assert_eq!(r.failed_claims(), vec!["x"]);
        assert!(r.render_body().contains("status = fail"));
    }
}
