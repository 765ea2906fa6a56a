//! Structured diagnostics shared by the static and behavior validators.

use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

/// Rule identifiers. The string form is the stable code used in reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Rule {
    #[serde(rename = "DANGLING")]
    Dangling,
    #[serde(rename = "DUPID")]
    DupId,
    #[serde(rename = "FOREST")]
    Forest,
    #[serde(rename = "SELF_EDGE")]
    SelfEdge,
    /// Cross-thimac flow must be transfer to transfer.
    V1,
    /// Intra-thimac flow adjacency table.
    V2,
    /// Release fan-out and receive fan-in.
    V3,
    /// Trigger source and target kinds.
    V4,
    /// Flow reachability from a create or a boundary transfer.
    V5,
    /// Simplified mode: each flow is strict already or can be gated.
    S1,
    #[serde(rename = "UNDEF")]
    Undef,
    #[serde(rename = "UNBOUNDED_LOOP")]
    UnboundedLoop,
    #[serde(rename = "LOOP_SHAPE")]
    LoopShape,
    #[serde(rename = "UNREACHABLE")]
    Unreachable,
    #[serde(rename = "COVERAGE")]
    Coverage,
    #[serde(rename = "REGION_DISCONNECTED")]
    RegionDisconnected,
}

impl Rule {
    pub fn code(self) -> &'static str {
        match self {
            Rule::Dangling => "DANGLING",
            Rule::DupId => "DUPID",
            Rule::Forest => "FOREST",
            Rule::SelfEdge => "SELF_EDGE",
            Rule::V1 => "V1",
            Rule::V2 => "V2",
            Rule::V3 => "V3",
            Rule::V4 => "V4",
            Rule::V5 => "V5",
            Rule::S1 => "S1",
            Rule::Undef => "UNDEF",
            Rule::UnboundedLoop => "UNBOUNDED_LOOP",
            Rule::LoopShape => "LOOP_SHAPE",
            Rule::Unreachable => "UNREACHABLE",
            Rule::Coverage => "COVERAGE",
            Rule::RegionDisconnected => "REGION_DISCONNECTED",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Violation {
    pub rule: Rule,
    pub severity: Severity,
    /// Dotted path of the offending element (or `src -> dst` for edges).
    pub location: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(
        &mut self,
        rule: Rule,
        severity: Severity,
        location: impl Into<String>,
        message: impl Into<String>,
    ) {
        self.violations.push(Violation {
            rule,
            severity,
            location: location.into(),
            message: message.into(),
        });
    }

    pub fn extend(&mut self, other: ValidationReport) {
        self.violations.extend(other.violations);
    }

    pub fn errors(&self) -> impl Iterator<Item = &Violation> {
        self.violations
            .iter()
            .filter(|v| v.severity == Severity::Error)
    }

    pub fn warnings(&self) -> impl Iterator<Item = &Violation> {
        self.violations
            .iter()
            .filter(|v| v.severity == Severity::Warning)
    }

    pub fn error_count(&self) -> usize {
        self.errors().count()
    }

    pub fn warning_count(&self) -> usize {
        self.warnings().count()
    }

    pub fn has_errors(&self) -> bool {
        self.errors().next().is_some()
    }

    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn with_rule(&self, rule: Rule) -> impl Iterator<Item = &Violation> {
        self.violations.iter().filter(move |v| v.rule == rule)
    }

    /// Canonical order: rule, then location, then message.
    pub fn sort(&mut self) {
        self.violations.sort_by(|a, b| {
            (a.rule, &a.location, &a.message, a.severity).cmp(&(
                b.rule,
                &b.location,
                &b.message,
                b.severity,
            ))
        });
    }

    pub fn summary(&self) -> String {
        format!(
            "{} errors, {} warnings",
            self.error_count(),
            self.warning_count()
        )
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "errors": self.error_count(),
            "warnings": self.warning_count(),
            "violations": self.violations,
        })
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(
            f,
            "{sev}[{}] {}: {}",
            self.rule, self.location, self.message
        )
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.violations {
            writeln!(f, "{v}")?;
        }
        write!(f, "{}", self.summary())
    }
}
