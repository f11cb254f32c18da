use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// Maximum number of individual violations/warnings kept per report; the
/// counts stay exact.
const KEEP: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaViolation {
    pub lemma: String,
    pub iteration: usize,
    pub observed: f64,
    pub bound: f64,
    pub slack: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub column: Option<usize>,
}

/// Check counts and worst margin for one inequality of a monitor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LemmaSummary {
    pub checks: u64,
    pub worst_margin: f64,
    pub violations: u64,
    pub warnings: u64,
}

impl LemmaSummary {
    fn absorb(&mut self, other: &LemmaSummary) {
        self.checks += other.checks;
        self.worst_margin = self.worst_margin.min(other.worst_margin);
        self.violations += other.violations;
        self.warnings += other.warnings;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum MonitorStatus {
    Pass,
    Fail,
    Refused,
    /// No step met the monitor's premises, so nothing was checked.
    Vacuous,
}

impl MonitorStatus {
    pub fn is_failure(self) -> bool {
        self == MonitorStatus::Fail
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonitorReport {
    pub monitor: String,
    pub status: MonitorStatus,
    pub checks: u64,
    /// Smallest `bound − observed` (or `observed − bound` for lower
    /// bounds) over all checks.
    pub worst_margin: Option<f64>,
    pub violation_count: u64,
    pub warning_count: u64,
    /// Per-inequality breakdown, keyed by the violation label.
    #[serde(default)]
    pub lemmas: BTreeMap<String, LemmaSummary>,
    pub violations: Vec<LemmaViolation>,
    pub warnings: Vec<LemmaViolation>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub refusal: Option<String>,
    pub notes: Vec<String>,
}

impl MonitorReport {
    pub fn refused(monitor: &str, reason: impl Into<String>) -> Self {
        let mut t = Tally::new(monitor);
        t.refusal = Some(reason.into());
        t.into_report()
    }

    pub fn passed(&self) -> bool {
        self.status == MonitorStatus::Pass || self.status == MonitorStatus::Vacuous
    }

    /// Folds several reports of the same monitor into one.
    pub fn merge(monitor: &str, reports: impl IntoIterator<Item = MonitorReport>) -> Self {
        let mut t = Tally::new(monitor);
        for r in reports {
            t.checks += r.checks;
            t.worst_margin = match (t.worst_margin, r.worst_margin) {
                (Some(a), Some(b)) => Some(a.min(b)),
                (a, b) => a.or(b),
            };
            t.violation_count += r.violation_count;
            t.warning_count += r.warning_count;
            for (k, v) in &r.lemmas {
                t.lemmas
                    .entry(k.clone())
                    .and_modify(|s| s.absorb(v))
                    .or_insert(*v);
            }
            for v in r.violations {
                if t.violations.len() < KEEP {
                    t.violations.push(v);
                }
            }
            for w in r.warnings {
                if t.warnings.len() < KEEP {
                    t.warnings.push(w);
                }
            }
            if t.refusal.is_none() {
                t.refusal = r.refusal;
            }
            t.notes.extend(r.notes);
        }
        t.into_report()
    }
}

/// Default additive slack on strict inequalities: `1e-12 (1 + |bound|)`.
pub(crate) fn default_slack(bound: f64) -> f64 {
    1e-12 * (1.0 + bound.abs())
}

/// Accumulates checks for one monitor.
#[derive(Debug, Clone)]
pub(crate) struct Tally {
    pub monitor: String,
    pub checks: u64,
    pub worst_margin: Option<f64>,
    pub violation_count: u64,
    pub warning_count: u64,
    pub lemmas: BTreeMap<String, LemmaSummary>,
    pub violations: Vec<LemmaViolation>,
    pub warnings: Vec<LemmaViolation>,
    pub refusal: Option<String>,
    pub notes: Vec<String>,
}

impl Tally {
    pub fn new(monitor: &str) -> Self {
        Self {
            monitor: monitor.to_string(),
            checks: 0,
            worst_margin: None,
            violation_count: 0,
            warning_count: 0,
            lemmas: BTreeMap::new(),
            violations: Vec::new(),
            warnings: Vec::new(),
            refusal: None,
            notes: Vec::new(),
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn record(
        &mut self,
        lemma: &str,
        t: usize,
        column: Option<usize>,
        observed: f64,
        bound: f64,
        slack: f64,
        margin: f64,
        strict: bool,
    ) {
        self.checks += 1;
        self.worst_margin = Some(self.worst_margin.map_or(margin, |m| m.min(margin)));
        let summary = self.lemmas.entry(lemma.to_string()).or_insert(LemmaSummary {
            checks: 0,
            worst_margin: f64::INFINITY,
            violations: 0,
            warnings: 0,
        });
        summary.checks += 1;
        summary.worst_margin = summary.worst_margin.min(margin);
        if margin > 0.0 || (!strict && margin == 0.0) {
            return;
        }
        let v = LemmaViolation {
            lemma: lemma.to_string(),
            iteration: t,
            observed,
            bound,
            slack,
            column,
        };
        if slack > 0.0 && margin >= -slack {
            summary.warnings += 1;
            self.warning_count += 1;
            if self.warnings.len() < KEEP {
                self.warnings.push(v);
            }
        } else {
            summary.violations += 1;
            self.violation_count += 1;
            if self.violations.len() < KEEP {
                self.violations.push(v);
            }
        }
    }

    /// Checks `observed ≤ bound`.
    pub fn upper(&mut self, lemma: &str, t: usize, column: Option<usize>, observed: f64, bound: f64, slack: f64) {
        self.record(lemma, t, column, observed, bound, slack, bound - observed, false);
    }

    /// Checks `observed ≥ bound`.
    pub fn lower(&mut self, lemma: &str, t: usize, column: Option<usize>, observed: f64, bound: f64, slack: f64) {
        self.record(lemma, t, column, observed, bound, slack, observed - bound, false);
    }

    /// Checks `observed < bound`.
    pub fn strict_upper(&mut self, lemma: &str, t: usize, column: Option<usize>, observed: f64, bound: f64, slack: f64) {
        self.record(lemma, t, column, observed, bound, slack, bound - observed, true);
    }

    /// Checks `observed > bound`.
    pub fn strict_lower(&mut self, lemma: &str, t: usize, column: Option<usize>, observed: f64, bound: f64, slack: f64) {
        self.record(lemma, t, column, observed, bound, slack, observed - bound, true);
    }

    pub fn note(&mut self, s: impl Into<String>) {
        self.notes.push(s.into());
    }

    pub fn into_report(self) -> MonitorReport {
        let status = if self.refusal.is_some() {
            MonitorStatus::Refused
        } else if self.violation_count > 0 {
            MonitorStatus::Fail
        } else if self.checks == 0 {
            MonitorStatus::Vacuous
        } else {
            MonitorStatus::Pass
        };
        MonitorReport {
            monitor: self.monitor,
            status,
            checks: self.checks,
            worst_margin: self.worst_margin,
            violation_count: self.violation_count,
            warning_count: self.warning_count,
            lemmas: self.lemmas,
            violations: self.violations,
            warnings: self.warnings,
            refusal: self.refusal,
            notes: self.notes,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slack_splits_warnings_from_violations() {
        let mut t = Tally::new("m");
        t.upper("x", 0, None, 1.0, 2.0, 0.0);
        t.upper("x", 1, None, 2.0 + 1e-13, 2.0, 1e-12);
        t.upper("x", 2, None, 2.1, 2.0, 1e-12);
        t.strict_upper("y", 3, None, 1.0, 1.0, 0.0);
        t.strict_lower("z", 4, None, 1.0, 1.0, 1e-12);
        let r = t.into_report();
        assert_eq!(r.checks, 5);
        assert_eq!(r.warning_count, 2);
        assert_eq!(r.violation_count, 2);
        assert_eq!(r.status, MonitorStatus::Fail);
        assert_eq!(r.lemmas["x"].checks, 3);
        assert_eq!(r.lemmas["x"].warnings, 1);
        assert_eq!(r.lemmas["x"].violations, 1);
        assert!((r.lemmas["x"].worst_margin + 0.1).abs() < 1e-12);
        assert_eq!(r.lemmas["y"].violations, 1);
    }

    #[test]
    fn statuses() {
        assert_eq!(Tally::new("m").into_report().status, MonitorStatus::Vacuous);
        assert_eq!(MonitorReport::refused("m", "degenerate").status, MonitorStatus::Refused);
    }

    #[test]
    fn violation_json_schema() {
        let v = LemmaViolation {
            lemma: "bounded-domain".into(),
            iteration: 3,
            observed: 2.0,
            bound: 1.0,
            slack: 0.0,
            column: None,
        };
        let j = serde_json::to_value(&v).unwrap();
        let keys: Vec<_> = j.as_object().unwrap().keys().cloned().collect();
        assert_eq!(keys, ["bound", "iteration", "lemma", "observed", "slack"]);
    }
}
