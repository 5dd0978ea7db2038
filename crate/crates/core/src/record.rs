//! Inequality records: one measured instance of an identity or bound.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Verdict {
    /// The statement holds with the stated (or configured) constant.
    Holds,
    /// The statement was checked with a concrete constant and failed.
    Fails,
    /// Asymptotic statement; only the ratio is reported.
    RatioOnly,
    /// A hypothesis of the statement is not met by this input.
    Skipped { reason: String },
}

/// Enough context to regenerate the measured input.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub set: String,
    pub seed: Option<u64>,
    pub config: serde_json::Value,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InequalityRecord {
    pub theorem: String,
    #[serde(with = "float")]
    pub lhs: f64,
    #[serde(with = "float")]
    pub rhs: f64,
    #[serde(with = "float")]
    pub ratio: f64,
    #[serde(with = "float::map")]
    pub components: BTreeMap<String, f64>,
    pub verdict: Verdict,
    /// Whether the statement is an exact identity or inequality (as opposed to a `<<` bound).
    pub exact_statement: bool,
    pub provenance: Provenance,
}

impl InequalityRecord {
    /// `lhs <= rhs` with a small relative slack for floating-point sides.
    pub fn bound(theorem: &str, lhs: f64, rhs: f64) -> Self {
        let holds = lhs <= rhs * (1.0 + 1e-9) + 1e-9;
        Self::new(theorem, lhs, rhs, if holds { Verdict::Holds } else { Verdict::Fails }, true)
    }

    /// `lhs == rhs` up to `tol` absolute or relative error.
    pub fn identity(theorem: &str, lhs: f64, rhs: f64, tol: f64) -> Self {
        let holds = (lhs - rhs).abs() <= tol * rhs.abs().max(1.0);
        Self::new(theorem, lhs, rhs, if holds { Verdict::Holds } else { Verdict::Fails }, true)
    }

    /// An exact statement whose verdict was decided elsewhere (e.g. in exact arithmetic).
    pub fn checked(theorem: &str, lhs: f64, rhs: f64, holds: bool) -> Self {
        Self::new(theorem, lhs, rhs, if holds { Verdict::Holds } else { Verdict::Fails }, true)
    }

    pub fn ratio_only(theorem: &str, lhs: f64, rhs: f64) -> Self {
        Self::new(theorem, lhs, rhs, Verdict::RatioOnly, false)
    }

    pub fn skipped(theorem: &str, reason: impl Into<String>) -> Self {
        Self::new(theorem, f64::NAN, f64::NAN, Verdict::Skipped { reason: reason.into() }, false)
    }

    fn new(theorem: &str, lhs: f64, rhs: f64, verdict: Verdict, exact_statement: bool) -> Self {
        let ratio = if rhs != 0.0 { lhs / rhs } else if lhs == 0.0 { 0.0 } else { f64::INFINITY };
        Self {
            theorem: theorem.to_string(),
            lhs,
            rhs,
            ratio,
            components: BTreeMap::new(),
            verdict,
            exact_statement,
            provenance: Provenance::default(),
        }
    }

    pub fn with(mut self, name: &str, value: f64) -> Self {
        self.components.insert(name.to_string(), value);
        self
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = provenance;
        self
    }

    pub fn holds(&self) -> bool {
        self.verdict == Verdict::Holds
    }

    /// True unless an exact statement was checked and failed.
    pub fn acceptable(&self) -> bool {
        !(self.exact_statement && self.verdict == Verdict::Fails)
    }
}

/// Serde for `f64` that keeps non-finite values: they travel as the strings
/// `"NaN"`, `"inf"` and `"-inf"`, finite values as plain numbers.
pub mod float {
    use serde::{de, Deserialize, Deserializer, Serializer};

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_str(&v.to_string())
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) => match t.as_str() {
                "NaN" => Ok(f64::NAN),
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                _ => Err(de::Error::custom(format!("expected a number, NaN, inf or -inf, got `{t}`"))),
            },
        }
    }

    pub mod map {
        use std::collections::BTreeMap;

        use serde::{ser::SerializeMap, Deserialize, Deserializer, Serializer};

        #[derive(Deserialize)]
        struct Value(#[serde(with = "super")] f64);

        pub fn serialize<S: Serializer>(m: &BTreeMap<String, f64>, s: S) -> Result<S::Ok, S::Error> {
            struct Value<'a>(&'a f64);
            impl serde::Serialize for Value<'_> {
                fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                    super::serialize(self.0, s)
                }
            }
            let mut out = s.serialize_map(Some(m.len()))?;
            for (k, v) in m {
                out.serialize_entry(k, &Value(v))?;
            }
            out.end()
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<String, f64>, D::Error> {
            Ok(BTreeMap::<String, Value>::deserialize(d)?.into_iter().map(|(k, v)| (k, v.0)).collect())
        }
    }
}
