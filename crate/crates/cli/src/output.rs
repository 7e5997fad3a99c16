//! Artifact encoding: 17-significant-digit numbers, sorted JSON keys.

use serde_json::{Map, Number, Value};

use repulsive_core::format::fmt_f64;
use repulsive_core::solver::BOUNDARY_MASS_LIMIT;
use repulsive_core::spectral::{MAX_CONDITION, MAX_POINTS};

use crate::config::{RunConfig, Value as Param};

/// A file produced by a run, named relative to the output directory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
}

impl Artifact {
    pub fn new(name: impl Into<String>, bytes: Vec<u8>) -> Self {
        Artifact {
            name: name.into(),
            bytes,
        }
    }

    pub fn json(name: impl Into<String>, value: &Value) -> Self {
        let mut text = serde_json::to_string_pretty(value).expect("JSON values always serialize");
        text.push('\n');
        Artifact::new(name, text.into_bytes())
    }
}

/// `x` as a JSON number with 17 significant digits; `null` when not finite.
pub fn num(x: f64) -> Value {
    if !x.is_finite() {
        return Value::Null;
    }
    Value::Number(fmt_f64(x).parse::<Number>().expect("formatted floats are JSON numbers"))
}

pub fn nums(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|x| num(*x)).collect())
}

/// Builds a JSON object; the map keeps keys sorted.
pub fn object<const N: usize>(entries: [(&str, Value); N]) -> Value {
    Value::Object(
        entries
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect::<Map<_, _>>(),
    )
}

fn param_json(v: &Param) -> Value {
    match v {
        Param::Int(i) => Value::from(*i),
        Param::Float(x) => num(*x),
        Param::FloatList(xs) => nums(xs),
        Param::Exponent(_) | Param::Choice(_) => Value::String(v.canonical()),
    }
}

/// Resolved configuration, module constants, version and artifact list. The
/// output directory and worker count do not change results and are left out.
pub fn manifest(config: &RunConfig, artifacts: &[Artifact]) -> Value {
    let params = config
        .params
        .iter()
        .map(|(k, v)| (k.to_string(), param_json(v)))
        .collect::<Map<_, _>>();
    object([
        ("command", Value::String(config.command.name().into())),
        ("version", Value::String(env!("CARGO_PKG_VERSION").into())),
        ("seed", Value::from(config.seed)),
        ("parameters", Value::Object(params)),
        (
            "constants",
            object([
                ("boundary_mass_limit", num(BOUNDARY_MASS_LIMIT)),
                ("max_condition", num(MAX_CONDITION)),
                ("max_spectral_points", Value::from(MAX_POINTS as u64)),
            ]),
        ),
        (
            "artifacts",
            Value::Array(artifacts.iter().map(|a| Value::String(a.name.clone())).collect()),
        ),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_keep_seventeen_digits() {
        let v = num(0.1);
        assert_eq!(serde_json::to_string(&v).unwrap(), fmt_f64(0.1));
        assert_eq!(num(f64::NAN), Value::Null);
    }

    #[test]
    fn object_keys_are_sorted() {
        let v = object([("b", num(1.0)), ("a", num(2.0))]);
        let s = serde_json::to_string(&v).unwrap();
        assert!(s.find("\"a\"").unwrap() < s.find("\"b\"").unwrap());
    }
}
