//! Shared pass/fail records and JSON output.

use serde::{Deserialize, Serialize};
use thinflow::Result;

/// One gated check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub value: f64,
    pub threshold: String,
}

impl Check {
    pub fn new(name: &str, pass: bool, value: f64, threshold: String) -> Self {
        Self {
            name: name.into(),
            pass,
            value,
            threshold,
        }
    }
}

/// Versions of the crates that produced an output file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Versions {
    pub thinflow_harness: String,
}

impl Versions {
    pub fn current() -> Self {
        Self {
            thinflow_harness: env!("CARGO_PKG_VERSION").into(),
        }
    }
}

/// Pretty JSON with non-finite floats written as `null`.
pub fn to_json<S: Serialize>(value: &S) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)?)
}
