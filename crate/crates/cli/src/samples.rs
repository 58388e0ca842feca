//! Pointwise input for `harmonic --samples`.
//!
//! ```json
//! {"samples": [
//!   {"ric": {"11": 0, "12": 0, "13": 0, "22": -3, "23": 0, "33": -3},
//!    "dphi": [1, 0, 0], "e2phi": "44/5"}
//! ]}
//! ```
//!
//! `metric` is optional and defaults to the identity. Entries are JSON
//! numbers or rational strings. Harmonic curvature is assumed.

use std::path::Path;

use hetsol_core::algebra3::{Metric3, Sym2, Vec3, SYM_PAIRS};
use hetsol_core::chartfield::{parse_coeff, SYM_KEYS};
use hetsol_core::soliton::HarmonicSample;
use hetsol_core::{Error, Rational, Result, Scalar};
use serde::Deserialize;
use serde_json::Value;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SampleFile {
    samples: Vec<RawSample>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSample {
    #[serde(default)]
    metric: Option<serde_json::Map<String, Value>>,
    ric: serde_json::Map<String, Value>,
    dphi: [Value; 3],
    e2phi: Value,
}

/// Rational algebraic samples, converted per mode with [`SampleSet::to_scalar`].
#[derive(Clone, Debug, PartialEq)]
pub struct SampleSet {
    rows: Vec<([Rational; 6], [Rational; 6], [Rational; 3], Rational)>,
}

fn sym(map: &serde_json::Map<String, Value>, path: &str) -> Result<[Rational; 6]> {
    if let Some(k) = map.keys().find(|k| !SYM_KEYS.contains(&k.as_str())) {
        return Err(Error::Parse(format!("{path}.{k}: unknown component (expected one of 11 12 13 22 23 33)")));
    }
    let mut out: [Rational; 6] = Default::default();
    for (slot, key) in out.iter_mut().zip(SYM_KEYS) {
        let p = format!("{path}.{key}");
        *slot = parse_coeff(map.get(key).ok_or_else(|| Error::Parse(format!("{p}: missing component")))?, &p)?;
    }
    Ok(out)
}

impl SampleSet {
    pub fn from_json_str(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let file: SampleFile = serde_path_to_error::deserialize(de)
            .map_err(|e| {
                let path = e.path().to_string();
                Error::Parse(format!("{path}: {}", e.into_inner()))
            })?;
        let mut rows = Vec::with_capacity(file.samples.len());
        for (i, s) in file.samples.iter().enumerate() {
            let at = format!("samples[{i}]");
            let metric = match &s.metric {
                Some(m) => sym(m, &format!("{at}.metric"))?,
                None => std::array::from_fn(|k| Rational::from_i64(i64::from(SYM_PAIRS[k].0 == SYM_PAIRS[k].1))),
            };
            let ric = sym(&s.ric, &format!("{at}.ric"))?;
            let mut dphi: [Rational; 3] = Default::default();
            for (k, v) in s.dphi.iter().enumerate() {
                dphi[k] = parse_coeff(v, &format!("{at}.dphi[{k}]"))?;
            }
            let e2phi = parse_coeff(&s.e2phi, &format!("{at}.e2phi"))?;
            rows.push((metric, ric, dphi, e2phi));
        }
        if rows.is_empty() {
            return Err(Error::Parse("samples: at least one sample is required".into()));
        }
        Ok(SampleSet { rows })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn to_scalar<F: Scalar>(&self) -> Result<Vec<HarmonicSample<F>>> {
        self.rows
            .iter()
            .enumerate()
            .map(|(i, (g, ric, dphi, e2phi))| {
                let conv = |q: &Rational| F::from_rational(q);
                let metric = Metric3::new(Sym2(g.each_ref().map(conv)))
                    .map_err(|e| Error::Parse(format!("samples[{i}].metric: {e}")))?;
                Ok(HarmonicSample::new(metric, Sym2(ric.each_ref().map(conv)), Vec3(dphi.each_ref().map(conv)), conv(e2phi)))
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_sample_parses() {
        let set = SampleSet::from_json_str(
            r#"{"samples": [{"ric": {"11": 0, "12": 0, "13": 0, "22": -3, "23": 0, "33": -3},
                             "dphi": [1, 0, 0], "e2phi": "44/5"}]}"#,
        )
        .unwrap();
        let s: Vec<HarmonicSample<Rational>> = set.to_scalar().unwrap();
        assert_eq!(s[0].s, Rational::from_i64(-6));
        assert_eq!(s[0].e2phi, Rational::ratio(44, 5));
    }

    #[test]
    fn errors_carry_paths() {
        let err = SampleSet::from_json_str(
            r#"{"samples": [{"ric": {"11": 0, "12": 0, "13": 0, "22": -3, "23": 0}, "dphi": [1, 0, 0], "e2phi": 1}]}"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("samples[0].ric.33"), "{err}");
        let err = SampleSet::from_json_str(r#"{"samples": [{"ric": {}, "dphi": [1, 0], "e2phi": 1}]}"#).unwrap_err();
        assert!(err.to_string().contains("dphi"), "{err}");
    }
}
