use num::Zero;
use serde::{Deserialize, Serialize};

use crate::chartfield::Structure;
use crate::error::{Error, Result};
use crate::scalar::{format_rational, parse_rational, Rational, Scalar};

const BUILTIN: &str = include_str!("../../data/families.json");

/// Box in which grids and multi-starts sample `(a, e^{2 phi})`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub a: [f64; 2],
    pub e2phi: [f64; 2],
}

/// One family as written in the catalogue file. Brackets are 1-based
/// `[i, j, k, c]` meaning `[e_i, e_j] += a c e_k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilySpec {
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub brackets: Vec<(usize, usize, usize, String)>,
    pub metric: [String; 3],
    pub bounds: Bounds,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CatalogueFile {
    pub schema: u32,
    pub families: Vec<FamilySpec>,
}

/// A one-parameter family of left-invariant metrics: structure constants
/// `a c_ij^k` in a frame where the metric is `diag(d1, d2, d3)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LieFamily {
    pub name: String,
    pub description: String,
    /// `c_ij^k` at `a = 1`, stored at `9i + 3j + k`.
    pub unit: [Rational; 27],
    pub metric: [Rational; 3],
    pub bounds: Bounds,
}

/// `sum over cyclic (i, j, l) of [[e_i, e_j], e_l]`, largest component.
pub fn jacobi_defect<F: Scalar>(c: &[F]) -> F {
    let at = |i: usize, j: usize, k: usize| &c[9 * i + 3 * j + k];
    let mut worst = F::zero();
    for i in 0..3 {
        for j in 0..3 {
            for l in 0..3 {
                for n in 0..3 {
                    let mut t = F::zero();
                    for m in 0..3 {
                        t += at(i, j, m).clone() * at(m, l, n).clone();
                        t += at(j, l, m).clone() * at(m, i, n).clone();
                        t += at(l, i, m).clone() * at(m, j, n).clone();
                    }
                    if t.abs() > worst {
                        worst = t.abs();
                    }
                }
            }
        }
    }
    worst
}

impl LieFamily {
    /// Checks antisymmetry, the Jacobi identity and positivity of the metric.
    pub fn new(name: &str, description: &str, unit: [Rational; 27], metric: [Rational; 3], bounds: Bounds) -> Result<Self> {
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    if unit[9 * i + 3 * j + k] != -unit[9 * j + 3 * i + k].clone() {
                        return Err(Error::NotAntisymmetric);
                    }
                }
            }
        }
        let jac = jacobi_defect(&unit);
        if !jac.is_zero() {
            return Err(Error::JacobiViolated(jac.to_f64()));
        }
        if let Some(d) = metric.iter().find(|d| **d <= Rational::zero()) {
            return Err(Error::DegenerateMetric(format!("{name}: diagonal entry {} is not positive", format_rational(d))));
        }
        if !(bounds.a[0] < bounds.a[1] && bounds.e2phi[0] > 0.0 && bounds.e2phi[0] < bounds.e2phi[1]) {
            return Err(Error::Config(format!("{name}: bounds must be increasing with e2phi > 0")));
        }
        Ok(LieFamily { name: name.into(), description: description.into(), unit, metric, bounds })
    }

    pub fn from_spec(spec: &FamilySpec) -> Result<Self> {
        let path = |what: &str| format!("families[{}].{what}", spec.name);
        let mut unit: [Rational; 27] = std::array::from_fn(|_| Rational::zero());
        for (n, (i, j, k, c)) in spec.brackets.iter().enumerate() {
            if !(1..=3).contains(i) || !(1..=3).contains(j) || !(1..=3).contains(k) {
                return Err(Error::Parse(format!("{}: indices must be 1, 2 or 3", path(&format!("brackets[{n}]")))));
            }
            if i == j {
                return Err(Error::NotAntisymmetric);
            }
            let c = parse_rational(c).map_err(|e| Error::Parse(format!("{}: {e}", path(&format!("brackets[{n}]")))))?;
            let (i, j, k) = (i - 1, j - 1, k - 1);
            unit[9 * i + 3 * j + k] += &c;
            unit[9 * j + 3 * i + k] -= &c;
        }
        let mut metric: [Rational; 3] = std::array::from_fn(|_| Rational::zero());
        for (k, d) in spec.metric.iter().enumerate() {
            metric[k] = parse_rational(d).map_err(|e| Error::Parse(format!("{}: {e}", path(&format!("metric[{k}]")))))?;
        }
        LieFamily::new(&spec.name, &spec.description, unit, metric, spec.bounds.clone())
    }

    /// Structure constants at parameter `a`.
    pub fn structure<F: Scalar>(&self, a: &F) -> Structure<F> {
        self.unit.iter().map(|c| F::from_rational(c) * a.clone()).collect()
    }

    /// The same family with the metric scaled by `factor`.
    pub fn scaled(&self, factor: &Rational) -> Result<Self> {
        let metric = self.metric.clone().map(|d| d * factor);
        LieFamily::new(&self.name, &self.description, self.unit.clone(), metric, self.bounds.clone())
    }

    pub fn is_unimodular(&self) -> bool {
        (0..3).all(|j| (0..3).map(|i| &self.unit[9 * i + 3 * j + i]).fold(Rational::zero(), |a, b| a + b).is_zero())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Catalogue {
    pub families: Vec<LieFamily>,
}

impl Catalogue {
    pub fn builtin() -> Self {
        Catalogue::from_json_str(BUILTIN).expect("bundled catalogue is valid")
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let file: CatalogueFile = serde_json::from_str(text).map_err(|e| Error::Parse(format!("catalogue: {e}")))?;
        if file.schema != 1 {
            return Err(Error::Parse(format!("catalogue.schema: unsupported version {}", file.schema)));
        }
        let families = file.families.iter().map(LieFamily::from_spec).collect::<Result<_>>()?;
        Ok(Catalogue { families })
    }

    pub fn get(&self, name: &str) -> Result<&LieFamily> {
        self.families.iter().find(|f| f.name == name).ok_or_else(|| {
            let known: Vec<_> = self.families.iter().map(|f| f.name.as_str()).collect();
            Error::Config(format!("unknown family `{name}` (known: {})", known.join(", ")))
        })
    }

    pub fn names(&self) -> Vec<&str> {
        self.families.iter().map(|f| f.name.as_str()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_catalogue_loads() {
        let cat = Catalogue::builtin();
        assert_eq!(cat.names(), ["abelian", "heisenberg", "hyperbolic-solvable", "su2-milnor"]);
        assert!(cat.get("heisenberg").unwrap().is_unimodular());
        assert!(!cat.get("hyperbolic-solvable").unwrap().is_unimodular());
        assert!(cat.get("nil").is_err());
    }

    fn spec(brackets: Vec<(usize, usize, usize, &str)>) -> FamilySpec {
        FamilySpec {
            name: "t".into(),
            description: String::new(),
            brackets: brackets.into_iter().map(|(i, j, k, c)| (i, j, k, c.to_string())).collect(),
            metric: ["1".into(), "1".into(), "1".into()],
            bounds: Bounds { a: [0.1, 1.0], e2phi: [0.1, 1.0] },
        }
    }

    #[test]
    fn jacobi_violation_is_detected() {
        // [e1,e2] = e2, [e2,e3] = e1 fails Jacobi.
        let err = LieFamily::from_spec(&spec(vec![(1, 2, 2, "1"), (2, 3, 1, "1")])).unwrap_err();
        assert!(matches!(err, Error::JacobiViolated(_)));
    }

    #[test]
    fn diagonal_bracket_is_not_antisymmetric() {
        assert_eq!(LieFamily::from_spec(&spec(vec![(1, 1, 2, "1")])).unwrap_err(), Error::NotAntisymmetric);
    }

    #[test]
    fn degenerate_metric_is_rejected() {
        let mut s = spec(vec![]);
        s.metric[1] = "0".into();
        assert!(matches!(LieFamily::from_spec(&s), Err(Error::DegenerateMetric(_))));
    }

    #[test]
    fn malformed_catalogue_names_the_problem() {
        let err = Catalogue::from_json_str(r#"{"schema": 1, "families": [{"name": "x"}]}"#).unwrap_err();
        assert!(err.to_string().contains("brackets"), "{err}");
    }
}
