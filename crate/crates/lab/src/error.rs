use serde::Serialize;

/// A validation message attached to a dotted config path.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FieldError {
    pub field: String,
    pub message: String,
}

impl FieldError {
    pub fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        FieldError {
            field: field.into(),
            message: message.into(),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error("invalid config: {}", summarize(.0))]
    Validation(Vec<FieldError>),
    #[error("{0}")]
    Pipeline(#[from] zaremba::Error),
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

fn summarize(errs: &[FieldError]) -> String {
    errs.iter()
        .map(|e| if e.field.is_empty() { e.message.clone() } else { format!("{}: {}", e.field, e.message) })
        .collect::<Vec<_>>()
        .join("; ")
}

impl LabError {
    pub fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        LabError::Io {
            context: context.into(),
            source,
        }
    }

    pub fn field(field: impl Into<String>, message: impl Into<String>) -> Self {
        LabError::Validation(vec![FieldError::new(field, message)])
    }

    /// 2 for configuration problems, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Validation(_) => 2,
            _ => 1,
        }
    }

    /// The machine-readable error record printed on failure.
    pub fn record(&self) -> serde_json::Value {
        match self {
            LabError::Validation(errs) => serde_json::json!({
                "error": "validation",
                "fields": errs,
            }),
            LabError::Pipeline(e) => serde_json::json!({
                "error": "pipeline",
                "message": e.to_string(),
            }),
            other => serde_json::json!({
                "error": "io",
                "message": other.to_string(),
            }),
        }
    }
}
