//! Text formats: scenario documents, trajectory tables, evaluation reports,
//! population files and intervention scripts.
//!
//! Every structured document is TOML with a top-level `version = 1` and no
//! unknown keys. Floats are written in shortest round-trip form, so parsing
//! a written value gives back the same bits.

mod population;
mod report;
mod scenario;
mod script;
mod trajectory;

pub use population::{parse_population, write_population};
pub use report::{write_report, write_sweep_table};
pub use scenario::{parse_scenario, write_scenario};
pub use script::{parse_script, write_script};
pub use trajectory::{read_trajectory, write_trajectory, write_trajectory_rows, TrajectoryRow, TrajectoryTable};

pub(crate) use scenario::ChainDoc;

use serde::de::DeserializeOwned;

pub const FORMAT_VERSION: i64 = 1;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("{}unknown key `{key}`", at(*line))]
    UnknownKey { key: String, line: Option<usize> },
    #[error("{}missing key `{key}`", at(*line))]
    MissingKey { key: String, line: Option<usize> },
    #[error("{}invalid value for `{key}`: {message}", at(*line))]
    InvalidValue {
        key: String,
        line: Option<usize>,
        message: String,
    },
}

impl ParseError {
    pub fn key(&self) -> Option<&str> {
        match self {
            ParseError::Syntax { .. } => None,
            ParseError::UnknownKey { key, .. }
            | ParseError::MissingKey { key, .. }
            | ParseError::InvalidValue { key, .. } => Some(key),
        }
    }

    pub fn line(&self) -> Option<usize> {
        match self {
            ParseError::Syntax { line, .. } => Some(*line),
            ParseError::UnknownKey { line, .. }
            | ParseError::MissingKey { line, .. }
            | ParseError::InvalidValue { line, .. } => *line,
        }
    }

    /// Short machine-readable category.
    pub fn code(&self) -> &'static str {
        match self {
            ParseError::Syntax { .. } => "syntax",
            ParseError::UnknownKey { .. } => "unknown-key",
            ParseError::MissingKey { .. } => "missing-key",
            ParseError::InvalidValue { .. } => "invalid-value",
        }
    }

    pub(crate) fn invalid(key: impl Into<String>, message: impl Into<String>) -> Self {
        ParseError::InvalidValue {
            key: key.into(),
            line: None,
            message: message.into(),
        }
    }
}

fn at(line: Option<usize>) -> String {
    line.map(|l| format!("line {l}: ")).unwrap_or_default()
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

fn backticked(msg: &str) -> Option<String> {
    let start = msg.find('`')? + 1;
    let len = msg[start..].find('`')?;
    Some(msg[start..start + len].to_string())
}

fn key_on_line(text: &str, line: usize) -> Option<String> {
    let l = text.lines().nth(line.checked_sub(1)?)?;
    let (k, _) = l.split_once('=')?;
    let k = k.trim().trim_start_matches('{').trim();
    // Inline tables put several keys on one line; the last one before the
    // error is the best guess available.
    let k = k.rsplit([',', '{']).next().unwrap_or(k).trim();
    (!k.is_empty()).then(|| k.to_string())
}

fn classify(text: &str, err: toml::de::Error) -> ParseError {
    let line = err.span().map(|s| line_of(text, s.start));
    let message = err.message().trim().to_string();
    if message.starts_with("unknown field") {
        if let Some(key) = backticked(&message) {
            return ParseError::UnknownKey { key, line };
        }
    }
    if message.starts_with("missing field") {
        if let Some(key) = backticked(&message) {
            return ParseError::MissingKey { key, line };
        }
    }
    if message.starts_with("invalid") || message.starts_with("unknown variant") {
        let key = line
            .and_then(|l| key_on_line(text, l))
            .unwrap_or_else(|| "?".to_string());
        return ParseError::InvalidValue { key, line, message };
    }
    ParseError::Syntax {
        line: line.unwrap_or(1),
        message,
    }
}

/// Strict parse of a versioned document.
pub(crate) fn from_toml<T: DeserializeOwned>(text: &str) -> Result<T, ParseError> {
    let table: toml::Table = toml::from_str(text).map_err(|e| classify(text, e))?;
    match table.get("version") {
        None => {
            return Err(ParseError::MissingKey {
                key: "version".into(),
                line: None,
            })
        }
        Some(toml::Value::Integer(v)) if *v == FORMAT_VERSION => {}
        Some(other) => {
            return Err(ParseError::InvalidValue {
                key: "version".into(),
                line: text
                    .lines()
                    .position(|l| l.trim_start().starts_with("version"))
                    .map(|i| i + 1),
                message: format!("expected {FORMAT_VERSION}, found {other}"),
            })
        }
    }
    toml::from_str(text).map_err(|e| classify(text, e))
}

pub(crate) fn to_toml<T: serde::Serialize>(value: &T) -> String {
    toml::to_string(value).expect("document types always serialize")
}

/// Formats a float so that parsing the text gives back the same value.
pub(crate) fn fmt_f64(v: f64) -> String {
    let s = format!("{v}");
    if v.is_finite() {
        s
    } else if v.is_nan() {
        "nan".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}
