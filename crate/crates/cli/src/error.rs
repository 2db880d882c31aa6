use std::process::ExitCode;

use serde_json::{json, Value};
use thiserror::Error;

/// Failure of a CLI run, carrying its exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Malformed or inconsistent configuration (exit 3).
    #[error("configuration error: {0}")]
    Config(String),
    /// A numerical routine failed (exit 4).
    #[error("numerical failure: {0}")]
    Numerical(weakdamp::Error),
    /// Reading inputs or writing outputs failed (exit 4).
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 3,
            CliError::Numerical(_) | CliError::Io(_) => 4,
        }
    }

    /// Machine-readable description.
    pub fn diagnostics(&self) -> Value {
        let kind = match self {
            CliError::Config(_) => "config",
            CliError::Numerical(_) => "numerical",
            CliError::Io(_) => "io",
        };
        let mut v = json!({ "status": "error", "kind": kind, "exit_code": self.exit_code(), "message": self.to_string() });
        if let CliError::Numerical(e) = self {
            v["error"] = core_error_json(e);
        }
        v
    }
}

/// Errors that stem from the user's declarations or arguments are configuration errors; all
/// others are numerical failures.
impl From<weakdamp::Error> for CliError {
    fn from(e: weakdamp::Error) -> Self {
        use weakdamp::Error as E;
        match e.root() {
            E::Argument(_) | E::Precondition(_) | E::Validation { .. } => CliError::Config(e.to_string()),
            _ => CliError::Numerical(e),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

fn core_error_json(e: &weakdamp::Error) -> Value {
    use weakdamp::Error as E;
    match e {
        E::Mode { index, source } => json!({ "type": "mode", "index": index, "source": core_error_json(source) }),
        E::Quadrature { a, b, achieved } => json!({ "type": "quadrature", "a": a, "b": b, "achieved": achieved }),
        E::Stiffness { t } => json!({ "type": "stiffness", "t": t }),
        E::StepBudget { t, steps } => json!({ "type": "step_budget", "t": t, "steps": steps }),
        E::ZoneConstant { lambda, t, det } => json!({ "type": "zone_constant", "lambda": lambda, "t": t, "det": det }),
        E::SeriesDivergence { terms, increment } => {
            json!({ "type": "series_divergence", "terms": terms, "increment": increment })
        }
        E::Horizon { cap, difference } => json!({ "type": "horizon", "cap": cap, "difference": difference }),
        E::Singular { det } => json!({ "type": "singular", "det": det }),
        E::Validation { witness_t, message } => json!({ "type": "validation", "witness_t": witness_t, "message": message }),
        E::Inconsistency(m) => json!({ "type": "inconsistency", "message": m }),
        E::Domain(m) => json!({ "type": "domain", "message": m }),
        E::Argument(m) => json!({ "type": "argument", "message": m }),
        E::Precondition(m) => json!({ "type": "precondition", "message": m }),
    }
}

impl From<&CliError> for ExitCode {
    fn from(e: &CliError) -> Self {
        ExitCode::from(e.exit_code())
    }
}
