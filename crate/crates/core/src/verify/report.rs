use std::fmt;
use std::path::Path;

use crate::fields::{FieldError, GridSpec};

/// Per-node margins of a pointwise stage; `NaN` marks inactive nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginMap {
    pub grid: GridSpec,
    pub values: Vec<f64>,
}

impl MarginMap {
    /// Columns `re,im,margin`, row-major.
    pub fn write_csv(&self, path: &Path) -> Result<(), FieldError> {
        let err = |e: csv::Error| FieldError::Io(format!("{}: {e}", path.display()));
        let mut w = csv::Writer::from_path(path).map_err(err)?;
        w.write_record(["re", "im", "margin"]).map_err(err)?;
        for (k, v) in self.values.iter().enumerate() {
            let z = self.grid.node_at(k);
            w.write_record([z.re.to_string(), z.im.to_string(), v.to_string()]).map_err(err)?;
        }
        w.flush().map_err(|e| FieldError::Io(format!("{}: {e}", path.display())))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn write_csv(&self, path: &Path) -> Result<(), FieldError> {
        let err = |e: csv::Error| FieldError::Io(format!("{}: {e}", path.display()));
        let mut w = csv::Writer::from_path(path).map_err(err)?;
        w.write_record(&self.header).map_err(err)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|v| v.to_string())).map_err(err)?;
        }
        w.flush().map_err(|e| FieldError::Io(format!("{}: {e}", path.display())))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stage {
    pub name: &'static str,
    pub holds: bool,
    /// Smallest slack; negative beyond the tolerance means failure.
    pub margin: f64,
    /// Node, cell or sector where the margin is attained.
    pub witness: Option<String>,
    pub details: Vec<String>,
    pub map: Option<MarginMap>,
    pub table: Option<Table>,
}

impl Stage {
    pub(crate) fn new(name: &'static str, holds: bool, margin: f64) -> Self {
        Stage { name, holds, margin, witness: None, details: Vec::new(), map: None, table: None }
    }

    pub(crate) fn witness(mut self, w: Option<String>) -> Self {
        self.witness = w;
        self
    }

    pub(crate) fn detail(mut self, d: impl Into<String>) -> Self {
        self.details.push(d.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub check: &'static str,
    pub stages: Vec<Stage>,
    /// Additive constant used by the pointwise stages.
    pub constant: Option<f64>,
    pub notes: Vec<String>,
}

impl CheckReport {
    pub(crate) fn new(check: &'static str) -> Self {
        CheckReport { check, stages: Vec::new(), constant: None, notes: Vec::new() }
    }

    pub fn holds(&self) -> bool {
        self.stages.iter().all(|s| s.holds)
    }

    pub fn stage(&self, name: &str) -> Option<&Stage> {
        self.stages.iter().find(|s| s.name == name)
    }

    pub fn first_failure(&self) -> Option<&Stage> {
        self.stages.iter().find(|s| !s.holds)
    }
}

fn verdict(b: bool) -> &'static str {
    if b {
        "PASS"
    } else {
        "FAIL"
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "check {}: {}", self.check, verdict(self.holds()))?;
        if let Some(c) = self.constant {
            writeln!(f, "  const = {c}")?;
        }
        for s in &self.stages {
            write!(f, "  stage {}: {} margin={:.6e}", s.name, verdict(s.holds), s.margin)?;
            if let Some(w) = &s.witness {
                write!(f, " at {w}")?;
            }
            writeln!(f)?;
            for d in &s.details {
                writeln!(f, "    {d}")?;
            }
        }
        for n in &self.notes {
            writeln!(f, "  note: {n}")?;
        }
        Ok(())
    }
}
