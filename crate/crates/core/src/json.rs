//! JSON schemas for functions, graphs, distributions, rate vectors, and
//! spanning-tree lists.
//!
//! Functions: `{"arity": n, "alphabet_sizes": [...], "range_size": r,
//! "values": [...]}` (flat row-major) or the shorthand
//! `{"builtin": "and"|"parity"|"max"|"min"|"sum"|"sum_threshold"|"sum_interval",
//! "params": {...}}`.
//! Graphs: `{"kind": ..., "n": ..., "edges": [[i, j], ...],
//! "alphabet_sizes": [...], "collector": 1}`.
//! Distributions: `{"alphabet_sizes": [...], "probs": ["1/2", "1/4", ...]}`,
//! probabilities as exact rationals (`"p/q"` strings or integers).

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::model::{FunctionTable, GraphKind, JointDistribution, NetworkGraph, NodeId, RateVector};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FunctionJson {
    Table {
        arity: usize,
        alphabet_sizes: Vec<u32>,
        range_size: u32,
        values: Vec<u32>,
    },
    Builtin {
        builtin: String,
        #[serde(default)]
        params: Value,
    },
}

fn param_u32(params: &Value, key: &str) -> Result<u32> {
    params
        .get(key)
        .and_then(Value::as_u64)
        .map(|v| v as u32)
        .ok_or_else(|| Error::InvalidFunction(format!("builtin needs integer param \"{key}\"")))
}

fn param_u32_list(params: &Value, key: &str) -> Result<Vec<u32>> {
    let arr = params
        .get(key)
        .and_then(Value::as_array)
        .ok_or_else(|| Error::InvalidFunction(format!("builtin needs list param \"{key}\"")))?;
    arr.iter()
        .map(|v| {
            v.as_u64()
                .map(|x| x as u32)
                .ok_or_else(|| Error::InvalidFunction(format!("\"{key}\" must hold integers")))
        })
        .collect()
}

impl FunctionJson {
    pub fn build(&self) -> Result<FunctionTable> {
        match self {
            FunctionJson::Table {
                arity,
                alphabet_sizes,
                range_size,
                values,
            } => {
                if *arity != alphabet_sizes.len() {
                    return Err(Error::InvalidFunction(format!(
                        "arity {arity} but {} alphabet sizes",
                        alphabet_sizes.len()
                    )));
                }
                FunctionTable::new(alphabet_sizes, *range_size, values.clone())
            }
            FunctionJson::Builtin { builtin, params } => match builtin.as_str() {
                "and" => Ok(FunctionTable::and_of(param_u32(params, "n")? as usize)),
                "parity" => {
                    let modulus = param_u32(params, "mod")?;
                    let sizes = match param_u32_list(params, "alphabet_sizes") {
                        Ok(s) => s,
                        Err(_) => vec![modulus; param_u32(params, "n")? as usize],
                    };
                    FunctionTable::parity(&sizes, modulus)
                }
                "max" => FunctionTable::max_of(&param_u32_list(params, "alphabet_sizes")?),
                "min" => FunctionTable::min_of(&param_u32_list(params, "alphabet_sizes")?),
                "sum" => FunctionTable::sum_of(&param_u32_list(params, "alphabet_sizes")?),
                "sum_threshold" => FunctionTable::sum_threshold(
                    &param_u32_list(params, "ls")?,
                    param_u32(params, "theta")?,
                ),
                "sum_interval" => FunctionTable::sum_interval(
                    &param_u32_list(params, "ls")?,
                    param_u32(params, "a")?,
                    param_u32(params, "b")?,
                ),
                other => Err(Error::InvalidFunction(format!("unknown builtin {other:?}"))),
            },
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GraphJson {
    pub kind: GraphKind,
    pub n: usize,
    pub edges: Vec<(u32, u32)>,
    pub alphabet_sizes: Vec<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub collector: Option<u32>,
}

impl GraphJson {
    pub fn build(&self) -> Result<NetworkGraph> {
        NetworkGraph::new(self.kind, self.n, &self.edges, &self.alphabet_sizes, self.collector)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DistributionJson {
    pub alphabet_sizes: Vec<u32>,
    pub probs: Vec<Value>,
}

/// Parses `"p/q"`, `"p"`, or a JSON integer into an exact rational.
pub fn parse_rational(v: &Value) -> Result<BigRational> {
    let parse_int = |s: &str| -> Result<BigInt> {
        s.trim()
            .parse::<BigInt>()
            .map_err(|_| Error::InvalidDistribution(format!("bad rational component {s:?}")))
    };
    match v {
        Value::Number(n) => {
            let i = n
                .as_i64()
                .ok_or_else(|| Error::InvalidDistribution(format!("{n} is not an integer")))?;
            Ok(BigRational::from_integer(i.into()))
        }
        Value::String(s) => match s.split_once('/') {
            Some((num, den)) => {
                let den = parse_int(den)?;
                if den == BigInt::from(0) {
                    return Err(Error::InvalidDistribution("zero denominator".into()));
                }
                Ok(BigRational::new(parse_int(num)?, den))
            }
            None => Ok(BigRational::from_integer(parse_int(s)?)),
        },
        other => Err(Error::InvalidDistribution(format!(
            "expected a rational, got {other}"
        ))),
    }
}

impl DistributionJson {
    pub fn build(&self) -> Result<JointDistribution> {
        let probs = self
            .probs
            .iter()
            .map(parse_rational)
            .collect::<Result<Vec<_>>>()?;
        JointDistribution::new(&self.alphabet_sizes, probs)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RateEntryJson {
    pub edge: (u32, u32),
    pub bits: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RateVectorJson {
    pub rates: Vec<RateEntryJson>,
}

impl RateVectorJson {
    pub fn build(&self) -> Result<RateVector> {
        RateVector::from_entries(
            self.rates
                .iter()
                .map(|e| ((NodeId(e.edge.0), NodeId(e.edge.1)), e.bits)),
        )
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TreeListJson {
    pub trees: Vec<Vec<(u32, u32)>>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn function_table_round_trip() {
        let text = r#"{"arity": 2, "alphabet_sizes": [2, 2], "range_size": 2,
                       "values": [0, 0, 0, 1]}"#;
        let spec: FunctionJson = serde_json::from_str(text).unwrap();
        let f = spec.build().unwrap();
        assert_eq!(f.eval(&[1, 1]), 1);
    }

    #[test]
    fn builtin_shorthand() {
        let spec: FunctionJson =
            serde_json::from_str(r#"{"builtin": "parity", "params": {"n": 3, "mod": 4}}"#)
                .unwrap();
        let f = spec.build().unwrap();
        assert_eq!(f.arity(), 3);
        assert_eq!(f.eval(&[3, 2, 3]), 0);
        let spec: FunctionJson = serde_json::from_str(
            r#"{"builtin": "sum_threshold", "params": {"ls": [1, 1, 1], "theta": 2}}"#,
        )
        .unwrap();
        let f = spec.build().unwrap();
        assert_eq!(f.eval(&[1, 1, 0]), 1);
        assert_eq!(f.eval(&[1, 0, 0]), 0);
    }

    #[test]
    fn graph_schema() {
        let text = r#"{"kind": "directed-tree", "n": 3, "edges": [[2, 1], [3, 1]],
                       "alphabet_sizes": [4, 4, 4], "collector": 1}"#;
        let spec: GraphJson = serde_json::from_str(text).unwrap();
        let g = spec.build().unwrap();
        assert_eq!(g.node_count(), 3);
        assert_eq!(g.kind(), GraphKind::DirectedTree);
    }

    #[test]
    fn distribution_rationals() {
        let text = r#"{"alphabet_sizes": [2], "probs": ["1/3", "2/3"]}"#;
        let spec: DistributionJson = serde_json::from_str(text).unwrap();
        let p = spec.build().unwrap();
        assert!(p.is_strictly_positive());
        assert!(parse_rational(&Value::String("1/0".into())).is_err());
    }
}
