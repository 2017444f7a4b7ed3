//! Map specifications and their JSON form.
//!
//! ```json
//! {"kind": "beta", "params": {"beta": "2"}, "backend": "rational"}
//! ```
//!
//! Parameter values are strings (`"p/q"`, integers, decimals) or JSON
//! numbers. Unknown top-level keys and unknown parameter names are rejected.

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::scalar::{Backend, Scalar};

/// Which digit sequence `a = (a₁, a₂, …)` the Egyptian fraction map uses.
#[derive(Clone, Debug, PartialEq)]
pub enum EgyptianSequence {
    /// `2, 3, 4, …`: the plain greedy map.
    Integers,
    /// `2, 4, 8, …`: binary expansions.
    PowersOfTwo,
    Primes,
    /// An explicit strictly increasing prefix, continued by consecutive integers.
    Prefix(Vec<i64>),
}

#[derive(Clone, Debug, PartialEq)]
pub enum PimSpec {
    /// `x ↦ βx mod 1`
    Beta { beta: Scalar },
    /// `x ↦ α + βx mod 1`
    AlphaBeta { alpha: Scalar, beta: Scalar },
    /// `x ↦ r/x mod 1`
    Gauss { r: Scalar },
    /// Renormalized logistic map, `0.8 < r <= 1`.
    Quadratic { r: Scalar },
    /// `x ↦ τx wod 1`, `1 < τ <= 2`.
    Tent { tau: Scalar },
    /// Linear full increasing branches on the gaps of the middle-thirds Cantor set.
    Cantor,
    /// Linear full increasing branches on `[1/(n+1), 1/n)` (`cuts == None`) or
    /// on the cells cut out by the given points.
    Luroth { cuts: Option<Vec<Scalar>> },
    /// `x ↦ x − 1/⌈1/x⌉_a`
    Egyptian { sequence: EgyptianSequence },
    /// Cells of the given lengths, each translated by its amount.
    IntervalExchange { lengths: Vec<Scalar>, translations: Vec<Scalar> },
    /// The three-branch piecewise linear map that is PTT but not TT.
    ExampleFirst,
}

impl PimSpec {
    pub fn beta(beta: Scalar) -> Self {
        PimSpec::Beta { beta }
    }

    pub fn gauss(r: Scalar) -> Self {
        PimSpec::Gauss { r }
    }

    pub fn tent(tau: Scalar) -> Self {
        PimSpec::Tent { tau }
    }

    pub fn egyptian() -> Self {
        PimSpec::Egyptian { sequence: EgyptianSequence::Integers }
    }

    /// The rotation `x ↦ x + (1 − α) mod 1` as a two-interval exchange with
    /// cells `[0, α)` and `[α, 1)`.
    pub fn rotation(alpha: Scalar) -> Self {
        let one = alpha.from_int(1);
        PimSpec::IntervalExchange {
            lengths: vec![alpha.clone(), &one - &alpha],
            translations: vec![&one - &alpha, -&alpha],
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            PimSpec::Beta { .. } => "beta",
            PimSpec::AlphaBeta { .. } => "alpha-beta",
            PimSpec::Gauss { .. } => "gauss",
            PimSpec::Quadratic { .. } => "quadratic",
            PimSpec::Tent { .. } => "tent",
            PimSpec::Cantor => "cantor",
            PimSpec::Luroth { .. } => "luroth",
            PimSpec::Egyptian { .. } => "egyptian",
            PimSpec::IntervalExchange { .. } => "interval-exchange",
            PimSpec::ExampleFirst => "example-first",
        }
    }

    fn params(&self) -> Vec<&Scalar> {
        match self {
            PimSpec::Beta { beta } => vec![beta],
            PimSpec::AlphaBeta { alpha, beta } => vec![alpha, beta],
            PimSpec::Gauss { r } | PimSpec::Quadratic { r } => vec![r],
            PimSpec::Tent { tau } => vec![tau],
            PimSpec::Luroth { cuts: Some(c) } => c.iter().collect(),
            PimSpec::IntervalExchange { lengths, translations } => {
                lengths.iter().chain(translations.iter()).collect()
            }
            _ => vec![],
        }
    }

    /// Rational when every parameter is exact and the family admits exact
    /// arithmetic; tent and quadratic maps default to float.
    pub fn default_backend(&self) -> Backend {
        match self {
            PimSpec::Quadratic { .. } | PimSpec::Tent { .. } => Backend::Float,
            _ if self.params().iter().all(|p| p.backend() == Backend::Rational) => {
                Backend::Rational
            }
            _ => Backend::Float,
        }
    }

    /// Moves every parameter to `backend`. Float parameters cannot move to
    /// the rational backend.
    pub fn on_backend(&self, backend: Backend) -> Result<PimSpec> {
        let conv = |s: &Scalar| -> Result<Scalar> {
            match (backend, s.backend()) {
                (Backend::Rational, Backend::Float) => Err(Error::InvalidSpec(format!(
                    "parameter {s} is a float; the rational backend needs exact parameters"
                ))),
                _ => Ok(backend.convert(s)),
            }
        };
        let convs = |v: &[Scalar]| v.iter().map(conv).collect::<Result<Vec<_>>>();
        Ok(match self {
            PimSpec::Beta { beta } => PimSpec::Beta { beta: conv(beta)? },
            PimSpec::AlphaBeta { alpha, beta } => {
                PimSpec::AlphaBeta { alpha: conv(alpha)?, beta: conv(beta)? }
            }
            PimSpec::Gauss { r } => PimSpec::Gauss { r: conv(r)? },
            PimSpec::Quadratic { r } => PimSpec::Quadratic { r: conv(r)? },
            PimSpec::Tent { tau } => PimSpec::Tent { tau: conv(tau)? },
            PimSpec::Luroth { cuts } => PimSpec::Luroth {
                cuts: cuts.as_deref().map(convs).transpose()?,
            },
            PimSpec::IntervalExchange { lengths, translations } => PimSpec::IntervalExchange {
                lengths: convs(lengths)?,
                translations: convs(translations)?,
            },
            other => other.clone(),
        })
    }

    pub fn to_json(&self, backend: Backend) -> Value {
        let s = |x: &Scalar| Value::String(x.to_string());
        let list = |v: &[Scalar]| Value::Array(v.iter().map(s).collect());
        let mut params = Map::new();
        match self {
            PimSpec::Beta { beta } => {
                params.insert("beta".into(), s(beta));
            }
            PimSpec::AlphaBeta { alpha, beta } => {
                params.insert("alpha".into(), s(alpha));
                params.insert("beta".into(), s(beta));
            }
            PimSpec::Gauss { r } | PimSpec::Quadratic { r } => {
                params.insert("r".into(), s(r));
            }
            PimSpec::Tent { tau } => {
                params.insert("tau".into(), s(tau));
            }
            PimSpec::Luroth { cuts: Some(c) } => {
                params.insert("cuts".into(), list(c));
            }
            PimSpec::Egyptian { sequence } => {
                let v = match sequence {
                    EgyptianSequence::Integers => Value::from("integers"),
                    EgyptianSequence::PowersOfTwo => Value::from("powers-of-two"),
                    EgyptianSequence::Primes => Value::from("primes"),
                    EgyptianSequence::Prefix(p) => Value::from(p.clone()),
                };
                params.insert("sequence".into(), v);
            }
            PimSpec::IntervalExchange { lengths, translations } => {
                params.insert("lengths".into(), list(lengths));
                params.insert("translations".into(), list(translations));
            }
            PimSpec::Cantor | PimSpec::Luroth { cuts: None } | PimSpec::ExampleFirst => {}
        }
        let mut root = Map::new();
        root.insert("kind".into(), Value::from(self.kind_name()));
        root.insert("params".into(), Value::Object(params));
        root.insert("backend".into(), Value::from(backend.to_string()));
        Value::Object(root)
    }
}

/// A parsed map spec file.
#[derive(Clone, Debug, PartialEq)]
pub struct MapSpec {
    pub spec: PimSpec,
    pub backend: Backend,
}

#[derive(Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    kind: String,
    #[serde(default)]
    params: Map<String, Value>,
    #[serde(default)]
    backend: Option<Backend>,
}

impl MapSpec {
    pub fn from_json_str(text: &str) -> Result<MapSpec> {
        let raw: RawSpec =
            serde_json::from_str(text).map_err(|e| Error::InvalidSpec(e.to_string()))?;
        Self::from_raw(raw)
    }

    pub fn from_value(value: Value) -> Result<MapSpec> {
        let raw: RawSpec =
            serde_json::from_value(value).map_err(|e| Error::InvalidSpec(e.to_string()))?;
        Self::from_raw(raw)
    }

    fn from_raw(raw: RawSpec) -> Result<MapSpec> {
        let mut p = Params { map: raw.params, backend: raw.backend };
        let spec = match raw.kind.as_str() {
            "beta" => PimSpec::Beta { beta: p.scalar("beta")? },
            "alpha-beta" => PimSpec::AlphaBeta { alpha: p.scalar("alpha")?, beta: p.scalar("beta")? },
            "gauss" => PimSpec::Gauss { r: p.scalar_or("r", 1)? },
            "quadratic" => PimSpec::Quadratic { r: p.scalar("r")? },
            "tent" => PimSpec::Tent { tau: p.scalar("tau")? },
            "cantor" => PimSpec::Cantor,
            "luroth" => PimSpec::Luroth { cuts: p.optional_list("cuts")? },
            "egyptian" => PimSpec::Egyptian { sequence: p.sequence()? },
            "interval-exchange" => {
                if p.map.contains_key("rotation") {
                    PimSpec::rotation(p.scalar("rotation")?)
                } else {
                    PimSpec::IntervalExchange {
                        lengths: p.list("lengths")?,
                        translations: p.list("translations")?,
                    }
                }
            }
            "example-first" => PimSpec::ExampleFirst,
            other => return Err(Error::InvalidSpec(format!("unknown map kind {other:?}"))),
        };
        if let Some(key) = p.map.keys().next() {
            return Err(Error::InvalidSpec(format!(
                "unknown parameter {key:?} for kind {:?}",
                raw.kind
            )));
        }
        let backend = raw.backend.unwrap_or_else(|| spec.default_backend());
        let spec = spec.on_backend(backend)?;
        Ok(MapSpec { spec, backend })
    }

    pub fn to_json(&self) -> Value {
        self.spec.to_json(self.backend)
    }
}

struct Params {
    map: Map<String, Value>,
    backend: Option<Backend>,
}

impl Params {
    fn take(&mut self, key: &str) -> Result<Value> {
        self.map
            .remove(key)
            .ok_or_else(|| Error::InvalidSpec(format!("missing parameter {key:?}")))
    }

    fn parse(&self, v: &Value) -> Result<Scalar> {
        match v {
            Value::String(s) => match self.backend {
                Some(b) => b.parse(s),
                None => s.parse(),
            },
            Value::Number(n) => {
                if let Some(i) = n.as_i64() {
                    Ok(self.backend.unwrap_or(Backend::Rational).int(i))
                } else {
                    match self.backend {
                        Some(Backend::Rational) => Backend::Rational.parse(&n.to_string()),
                        _ => Ok(Scalar::Approx(n.as_f64().unwrap_or(f64::NAN))),
                    }
                }
            }
            other => Err(Error::InvalidSpec(format!("expected a number, got {other}"))),
        }
    }

    fn scalar(&mut self, key: &str) -> Result<Scalar> {
        let v = self.take(key)?;
        self.parse(&v)
    }

    fn scalar_or(&mut self, key: &str, default: i64) -> Result<Scalar> {
        match self.map.remove(key) {
            Some(v) => self.parse(&v),
            None => Ok(self.backend.unwrap_or(Backend::Rational).int(default)),
        }
    }

    fn list(&mut self, key: &str) -> Result<Vec<Scalar>> {
        match self.take(key)? {
            Value::Array(items) => items.iter().map(|v| self.parse(v)).collect(),
            other => Err(Error::InvalidSpec(format!("{key:?} must be a list, got {other}"))),
        }
    }

    fn optional_list(&mut self, key: &str) -> Result<Option<Vec<Scalar>>> {
        if self.map.contains_key(key) {
            self.list(key).map(Some)
        } else {
            Ok(None)
        }
    }

    fn sequence(&mut self) -> Result<EgyptianSequence> {
        match self.map.remove("sequence") {
            None => Ok(EgyptianSequence::Integers),
            Some(Value::String(s)) => match s.as_str() {
                "integers" => Ok(EgyptianSequence::Integers),
                "powers-of-two" => Ok(EgyptianSequence::PowersOfTwo),
                "primes" => Ok(EgyptianSequence::Primes),
                other => Err(Error::InvalidSpec(format!("unknown sequence {other:?}"))),
            },
            Some(Value::Array(items)) => items
                .iter()
                .map(|v| {
                    v.as_i64().ok_or_else(|| {
                        Error::InvalidSpec(format!("sequence entries must be integers, got {v}"))
                    })
                })
                .collect::<Result<Vec<_>>>()
                .map(EgyptianSequence::Prefix),
            Some(other) => Err(Error::InvalidSpec(format!("bad sequence {other}"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_beta() {
        let m = MapSpec::from_json_str(r#"{"kind":"beta","params":{"beta":"2"}}"#).unwrap();
        assert_eq!(m.backend, Backend::Rational);
        assert_eq!(m.spec, PimSpec::beta(Scalar::ratio(2, 1)));
    }

    #[test]
    fn float_parameters_pick_float_backend() {
        let m = MapSpec::from_json_str(r#"{"kind":"beta","params":{"beta":1.618}}"#).unwrap();
        assert_eq!(m.backend, Backend::Float);
        let m = MapSpec::from_json_str(r#"{"kind":"tent","params":{"tau":"2"}}"#).unwrap();
        assert_eq!(m.backend, Backend::Float);
        let m = MapSpec::from_json_str(
            r#"{"kind":"tent","params":{"tau":"3/2"},"backend":"rational"}"#,
        )
        .unwrap();
        assert_eq!(m.spec, PimSpec::tent(Scalar::ratio(3, 2)));
    }

    #[test]
    fn decimal_strings_are_exact_on_rational_backend() {
        let m = MapSpec::from_json_str(
            r#"{"kind":"alpha-beta","params":{"alpha":"0.25","beta":2.5},"backend":"rational"}"#,
        )
        .unwrap();
        assert_eq!(
            m.spec,
            PimSpec::AlphaBeta { alpha: Scalar::ratio(1, 4), beta: Scalar::ratio(5, 2) }
        );
    }

    #[test]
    fn rejects_unknown_keys() {
        assert!(MapSpec::from_json_str(r#"{"kind":"beta","params":{"beta":"2"},"x":1}"#).is_err());
        assert!(MapSpec::from_json_str(r#"{"kind":"beta","params":{"beta":"2","gamma":1}}"#).is_err());
        assert!(MapSpec::from_json_str(r#"{"kind":"nope"}"#).is_err());
        assert!(MapSpec::from_json_str(r#"{"kind":"beta","params":{}}"#).is_err());
        assert!(MapSpec::from_json_str(
            r#"{"kind":"beta","params":{"beta":1.5},"backend":"rational"}"#
        )
        .is_ok());
        assert!(MapSpec::from_json_str(r#"{"kind":"beta","params":{"beta":"1.5"}}"#)
            .map(|m| m.backend == Backend::Float)
            .unwrap());
    }

    #[test]
    fn json_round_trip() {
        for text in [
            r#"{"kind":"beta","params":{"beta":"2"},"backend":"rational"}"#,
            r#"{"kind":"egyptian","params":{"sequence":[3,5]},"backend":"rational"}"#,
            r#"{"kind":"interval-exchange","params":{"rotation":0.41421356237309503}}"#,
            r#"{"kind":"example-first"}"#,
            r#"{"kind":"luroth","params":{"cuts":["0","1/3","1"]}}"#,
        ] {
            let m = MapSpec::from_json_str(text).unwrap();
            let again = MapSpec::from_value(m.to_json()).unwrap();
            assert_eq!(m, again, "{text}");
        }
    }
}
