use std::fmt;

use crate::verify::CheckReport;

#[derive(Debug, Clone, PartialEq)]
pub struct StageLine {
    pub name: String,
    pub holds: bool,
    pub margin: f64,
    pub witness: Option<String>,
}

/// Structured text written to standard output by every subcommand except
/// `avg` and `catalog`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunReport {
    pub command: String,
    pub tolerances: Vec<(&'static str, f64)>,
    pub values: Vec<(String, String)>,
    pub stages: Vec<StageLine>,
    /// Nested check reports (scenario runs).
    pub checks: Vec<CheckReport>,
    pub notes: Vec<String>,
}

impl RunReport {
    pub fn new(command: String) -> Self {
        RunReport { command, ..Default::default() }
    }

    pub fn tol(&mut self, name: &'static str, v: f64) {
        self.tolerances.push((name, v));
    }

    pub fn value(&mut self, name: impl Into<String>, v: impl fmt::Display) {
        self.values.push((name.into(), v.to_string()));
    }

    pub fn stage(&mut self, name: impl Into<String>, holds: bool, margin: f64, witness: Option<String>) {
        self.stages.push(StageLine { name: name.into(), holds, margin, witness });
    }

    pub fn holds(&self) -> bool {
        self.stages.iter().all(|s| s.holds) && self.checks.iter().all(CheckReport::holds)
    }
}

impl fmt::Display for RunReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "command: {}", self.command)?;
        for (k, v) in &self.tolerances {
            writeln!(f, "{k}: {v:e}")?;
        }
        for (k, v) in &self.values {
            writeln!(f, "{k}: {v}")?;
        }
        for s in &self.stages {
            write!(f, "stage {}: {} margin={:.6e}", s.name, if s.holds { "PASS" } else { "FAIL" }, s.margin)?;
            if let Some(w) = &s.witness {
                write!(f, " at {w}")?;
            }
            writeln!(f)?;
        }
        for c in &self.checks {
            write!(f, "{c}")?;
        }
        for n in &self.notes {
            writeln!(f, "note: {n}")?;
        }
        writeln!(f, "result: {}", if self.holds() { "PASS" } else { "FAIL" })
    }
}
