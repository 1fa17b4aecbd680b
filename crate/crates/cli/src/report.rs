//! Report envelope and serialization helpers. Reports are deterministic:
//! map keys are ordered, rates carry both an exact expression (when one
//! exists) and a fixed six-decimal rendering, and a given config + seed
//! always produces byte-identical output.

use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::Value;

use infunc_core::Rate;

pub const SCHEMA: &str = "infunc-report/1";

#[derive(Serialize)]
pub struct Report {
    pub schema: &'static str,
    pub command: String,
    pub config: Value,
    pub results: Value,
    pub verdicts: BTreeMap<String, bool>,
}

impl Report {
    pub fn new(
        command: &str,
        config: Value,
        results: Value,
        verdicts: BTreeMap<String, bool>,
    ) -> Self {
        Report {
            schema: SCHEMA,
            command: command.to_string(),
            config,
            results,
            verdicts,
        }
    }

    pub fn all_passed(&self) -> bool {
        self.verdicts.values().all(|&v| v)
    }

    pub fn first_failure(&self) -> Option<&str> {
        self.verdicts
            .iter()
            .find(|(_, &v)| !v)
            .map(|(k, _)| k.as_str())
    }

    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("report serializes");
        out.push('\n');
        out
    }
}

/// Six-decimal rendering used for every real-valued quantity in reports.
pub fn dp6(x: f64) -> String {
    format!("{x:.6}")
}

/// A rate as reported: exact expression when available, decimal always.
#[derive(Serialize)]
pub struct RateJson {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact: Option<String>,
    pub bits: String,
}

impl From<&Rate> for RateJson {
    fn from(r: &Rate) -> Self {
        RateJson {
            exact: r.exact.as_ref().map(|e| e.to_string()),
            bits: dp6(r.bits),
        }
    }
}

impl RateJson {
    pub fn from_bits(bits: f64) -> Self {
        RateJson {
            exact: None,
            bits: dp6(bits),
        }
    }

    pub fn log2(k: u64) -> Self {
        (&Rate::log2_int(k)).into()
    }
}

pub fn verdicts(pairs: &[(&str, bool)]) -> BTreeMap<String, bool> {
    pairs
        .iter()
        .map(|&(k, v)| (k.to_string(), v))
        .collect()
}
