//! Report envelope and output encoding.

use std::fmt;
use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            pass,
            detail: detail.into(),
        }
    }
}

/// Field order is the serialization order; `result` and `inputs` are
/// `serde_json::Value`, whose maps are sorted.
#[derive(Debug, Clone, Serialize)]
pub struct ReportEnvelope {
    pub command: String,
    pub version: &'static str,
    pub inputs: Value,
    pub result: Value,
    pub checks: Vec<Check>,
}

impl ReportEnvelope {
    pub fn new(command: &str, inputs: Value, result: Value, checks: Vec<Check>) -> Self {
        ReportEnvelope {
            command: command.to_string(),
            version: VERSION,
            inputs,
            result,
            checks,
        }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, unparsable literals, out-of-budget requests: exit 2.
    Usage(String),
    Io(std::io::Error),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => f.write_str(m),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl From<kleinfour::Error> for CliError {
    fn from(e: kleinfour::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Usage(format!("serialization failed: {e}"))
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Usage(format!("csv output failed: {e}"))
    }
}

pub fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

pub fn to_value<T: Serialize>(x: &T) -> Result<Value, CliError> {
    Ok(serde_json::to_value(x)?)
}

/// Renders rows under a fixed header.
pub fn csv_table(header: &[&str], rows: &[Vec<String>]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    let bytes = w.into_inner().map_err(|e| usage(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| usage(e.to_string()))
}

pub fn emit(text: &str, out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(p) => std::fs::write(p, text)?,
        None => {
            let mut so = std::io::stdout().lock();
            so.write_all(text.as_bytes())?;
            so.flush()?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_has_header_and_rows() {
        let rows = vec![vec!["7".to_string(), "3".to_string()]];
        assert_eq!(csv_table(&["q", "t"], &rows).unwrap(), "q,t\n7,3\n");
    }

    #[test]
    fn envelope_passes_only_if_every_check_passes() {
        let ok = ReportEnvelope::new("x", Value::Null, Value::Null, vec![Check::new("a", true, "")]);
        assert!(ok.passed());
        let bad = ReportEnvelope::new(
            "x",
            Value::Null,
            Value::Null,
            vec![Check::new("a", true, ""), Check::new("b", false, "")],
        );
        assert!(!bad.passed());
        let json = serde_json::to_string(&ok).unwrap();
        let keys: Vec<_> = ["command", "version", "inputs", "result", "checks"]
            .iter()
            .map(|k| json.find(&format!("\"{k}\"")).unwrap())
            .collect();
        assert!(keys.windows(2).all(|w| w[0] < w[1]), "field order is fixed");
    }

    #[test]
    fn budget_errors_are_usage_errors() {
        let e: CliError = kleinfour::Error::BudgetExceeded {
            what: "morphism scan",
            needed: 10,
            budget: 5,
        }
        .into();
        assert!(matches!(e, CliError::Usage(m) if m.contains("budget allows 5")));
    }
}
