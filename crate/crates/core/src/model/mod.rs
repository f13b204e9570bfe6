//! Problem data: instances, expressions and the JSON file format.

mod expr;
mod instance;
pub mod io;

pub use expr::{ConvexityKind, Decomposition, Expr, Interval, LinExpr, QuadTerm};
pub use instance::{Instance, LinearRow, NonlinearConstraint};
pub use io::{load_instance, parse_instance, write_instance};

#[derive(Debug, thiserror::Error)]
pub enum ModelError {
    #[error("cannot access {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("schema violation in field `{field}`: {reason}")]
    Schema { field: String, reason: String },
    #[error("inconsistent bounds on variable {var}: lower {lower} > upper {upper}")]
    InconsistentBounds { var: usize, lower: f64, upper: f64 },
}

impl ModelError {
    pub(crate) fn schema(field: impl Into<String>, reason: impl Into<String>) -> ModelError {
        ModelError::Schema { field: field.into(), reason: reason.into() }
    }

    /// Prefixes the field path of a schema error raised by a nested parser.
    pub(crate) fn in_field(self, prefix: &str) -> ModelError {
        match self {
            ModelError::Schema { field, reason } if field == "expr" => ModelError::Schema { field: prefix.to_string(), reason },
            ModelError::Schema { field, reason } => ModelError::Schema { field: format!("{prefix}.{field}"), reason },
            other => other,
        }
    }
}
