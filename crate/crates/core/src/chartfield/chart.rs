use serde_json::{json, Map, Value};

use super::expr::{Coords, FieldExpr, Poly, TrigPoly};
use crate::algebra3::SYM_PAIRS;
use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::scalar::{format_rational, parse_rational, Rational, Scalar};

/// A chart point. On ball charts these are Cartesian coordinates; on torus
/// charts they are half-angle tangents `t_i = tan(x_i / 2)`.
pub type Point = [Rational; 3];

pub const SYM_KEYS: [&str; 6] = ["11", "12", "13", "22", "23", "33"];

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Domain {
    /// Open ball of the given radius about the origin.
    Ball { radius: Rational },
    /// The `2 pi`-periodic 3-torus.
    Torus,
}

/// Symmetric 2-tensor field, upper triangle in the order of [`SYM_KEYS`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sym2Field(pub [FieldExpr; 6]);

impl Sym2Field {
    pub fn zero() -> Self {
        Sym2Field(std::array::from_fn(|_| FieldExpr::zero()))
    }

    pub fn get(&self, i: usize, j: usize) -> &FieldExpr {
        &self.0[crate::algebra3::SYM_INDEX[i][j]]
    }

    /// Jets of all six components.
    pub fn jets<F: Scalar>(&self, at: &Coords<F>, order: usize, name: &str) -> Result<[Jet<F>; 6]> {
        let mut out = Vec::with_capacity(6);
        for (k, f) in self.0.iter().enumerate() {
            out.push(f.jet(at, order, &format!("{name}{}", SYM_KEYS[k]))?);
        }
        Ok(out.try_into().unwrap_or_else(|_| unreachable!()))
    }

    pub fn eval_f64(&self, x: [f64; 3], name: &str) -> Result<[[f64; 3]; 3]> {
        let mut m = [[0.0; 3]; 3];
        for (k, &(i, j)) in SYM_PAIRS.iter().enumerate() {
            let v = self.0[k].eval_f64(x, &format!("{name}{}", SYM_KEYS[k]))?;
            m[i][j] = v;
            m[j][i] = v;
        }
        Ok(m)
    }
}

/// How the dilaton is specified.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Dilaton {
    /// `phi` itself.
    Phi(FieldExpr),
    /// `psi = e^{2 phi}`, which keeps `e^{2 phi}` rational in exact mode.
    Exp2Phi(FieldExpr),
}

/// Derivative data of the dilaton at a point.
#[derive(Clone, Debug)]
pub struct DilatonJet<F> {
    /// `phi - phi(p)` as a jet.
    pub shifted: Jet<F>,
    /// `e^{2 phi(p)}`, when representable in the scalar field.
    pub e2phi: Option<F>,
}

/// A metric and dilaton on a coordinate chart.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChartGeometry {
    pub domain: Domain,
    pub metric: Sym2Field,
    pub dilaton: Dilaton,
}

fn q(n: i64, d: i64) -> Rational {
    Rational::ratio(n, d)
}

impl ChartGeometry {
    pub fn new(domain: Domain, metric: Sym2Field, dilaton: Dilaton) -> Result<Self> {
        let chart = ChartGeometry { domain, metric, dilaton };
        chart.check_classes()?;
        Ok(chart)
    }

    fn check_classes(&self) -> Result<()> {
        let dil = match &self.dilaton {
            Dilaton::Phi(f) | Dilaton::Exp2Phi(f) => f,
        };
        let fields = self.metric.0.iter().chain(std::iter::once(dil));
        for (k, f) in fields.enumerate() {
            let name = if k < 6 { format!("metric.{}", SYM_KEYS[k]) } else { "dilaton".into() };
            self.check_field(f, &name)?;
        }
        Ok(())
    }

    pub(crate) fn check_field(&self, f: &FieldExpr, name: &str) -> Result<()> {
        match (&self.domain, f) {
            (Domain::Ball { .. }, FieldExpr::Trig(_)) => {
                Err(Error::UnsupportedField(format!("{name}: trig field on a ball chart")))
            }
            (Domain::Torus, f) if !f.is_trig() && !f.is_constant() => {
                Err(Error::UnsupportedField(format!("{name}: {} field on a torus chart", f.class_name())))
            }
            _ => Ok(()),
        }
    }

    /// Flat metric on a ball with the given dilaton.
    pub fn euclidean(dilaton: Dilaton) -> Self {
        let one = FieldExpr::constant(q(1, 1));
        let zero = FieldExpr::zero();
        let metric = Sym2Field([one.clone(), zero.clone(), zero.clone(), one.clone(), zero, one]);
        ChartGeometry { domain: Domain::Ball { radius: q(1_000_000, 1) }, metric, dilaton }
    }

    /// `4 / (1 - |x|^2)^2 delta` on the unit ball: constant curvature `-1`.
    pub fn poincare_ball(dilaton: Dilaton) -> Self {
        let r2 = Poly::from_terms([([2, 0, 0], q(1, 1)), ([0, 2, 0], q(1, 1)), ([0, 0, 2], q(1, 1))]);
        let w = Poly::constant(q(1, 1)).sub(&r2);
        let conformal = FieldExpr::Ratio { num: Poly::constant(q(4, 1)), den: w.mul(&w) };
        let zero = FieldExpr::zero();
        let metric = Sym2Field([
            conformal.clone(),
            zero.clone(),
            zero.clone(),
            conformal.clone(),
            zero,
            conformal,
        ]);
        ChartGeometry { domain: Domain::Ball { radius: q(1, 1) }, metric, dilaton }
    }

    /// Constant-coefficient metric on the torus.
    pub fn flat_torus(g: [Rational; 6], dilaton: Dilaton) -> Result<Self> {
        let metric = Sym2Field(g.map(|c| FieldExpr::Trig(TrigPoly::constant(c))));
        ChartGeometry::new(Domain::Torus, metric, dilaton)
    }

    pub fn with_dilaton(&self, dilaton: Dilaton) -> Result<Self> {
        ChartGeometry::new(self.domain.clone(), self.metric.clone(), dilaton)
    }

    /// Coordinates of `p` in the scalar field `F`, after the domain check.
    pub fn coords<F: Scalar>(&self, p: &Point) -> Result<Coords<F>> {
        let x: [F; 3] = std::array::from_fn(|i| F::from_rational(&p[i]));
        match &self.domain {
            Domain::Ball { radius } => {
                let r2: Rational = p.iter().map(|c| c * c).sum();
                if r2 >= radius * radius {
                    return Err(Error::OutOfDomain(format!(
                        "|p|^2 = {} is not below radius^2 = {}",
                        format_rational(&r2),
                        format_rational(&(radius * radius))
                    )));
                }
                Ok(Coords::Cartesian(x))
            }
            Domain::Torus => Ok(Coords::from_half_angles(&x)),
        }
    }

    /// Real coordinates of `p` as used by the finite-difference oracle
    /// (angles on the torus).
    pub fn real_coords(&self, p: &Point) -> [f64; 3] {
        let x = p.each_ref().map(|c| c.to_f64());
        match self.domain {
            Domain::Ball { .. } => x,
            Domain::Torus => x.map(|t| 2.0 * t.atan()),
        }
    }

    /// Whether the real point `x` lies in the domain.
    pub fn contains_f64(&self, x: [f64; 3]) -> bool {
        match &self.domain {
            Domain::Ball { radius } => {
                let r = radius.to_f64();
                x.iter().map(|c| c * c).sum::<f64>() < r * r
            }
            Domain::Torus => true,
        }
    }

    pub fn metric_jets<F: Scalar>(&self, at: &Coords<F>, order: usize) -> Result<[Jet<F>; 6]> {
        self.metric.jets(at, order, "g")
    }

    pub fn dilaton_jet<F: Scalar>(&self, at: &Coords<F>, order: usize) -> Result<DilatonJet<F>> {
        match &self.dilaton {
            Dilaton::Phi(f) => {
                let j = f.jet(at, order, "phi")?;
                let phi0 = j.value().clone();
                let e2phi = (phi0.clone() * F::from_i64(2)).exp();
                Ok(DilatonJet { shifted: j.add_scalar(&-phi0), e2phi })
            }
            Dilaton::Exp2Phi(f) => {
                let psi = f.jet(at, order, "exp2phi")?;
                let psi0 = psi.value().clone();
                if psi0 <= F::zero() {
                    return Err(Error::NonpositiveDilaton(psi0.to_string()));
                }
                let half = F::ratio(1, 2);
                let shifted = psi.log_shifted().expect("positive value").scale(&half);
                Ok(DilatonJet { shifted, e2phi: Some(psi0) })
            }
        }
    }

    /// `phi` at a real point, for the finite-difference oracle.
    pub fn phi_f64(&self, x: [f64; 3]) -> Result<f64> {
        match &self.dilaton {
            Dilaton::Phi(f) => f.eval_f64(x, "phi"),
            Dilaton::Exp2Phi(f) => {
                let psi = f.eval_f64(x, "exp2phi")?;
                if psi <= 0.0 {
                    return Err(Error::NonpositiveDilaton(psi.to_string()));
                }
                Ok(0.5 * psi.ln())
            }
        }
    }

    pub fn metric_f64(&self, x: [f64; 3]) -> Result<[[f64; 3]; 3]> {
        self.metric.eval_f64(x, "g")
    }

    // ---- JSON ------------------------------------------------------------

    /// Parses the chart description format. Errors name the offending path.
    pub fn from_json(v: &Value) -> Result<Self> {
        let obj = v.as_object().ok_or_else(|| perr("$", "expected an object"))?;
        let domain = parse_domain(get(obj, "$", "domain")?)?;
        let mobj = get(obj, "$", "metric")?.as_object().ok_or_else(|| perr("$.metric", "expected an object"))?;
        let mut comps = Vec::with_capacity(6);
        for key in SYM_KEYS {
            let path = format!("$.metric.{key}");
            let field = match mobj.get(key) {
                Some(f) => parse_field(f, &path)?,
                None => {
                    let (i, j) = (key.as_bytes()[0], key.as_bytes()[1]);
                    // The lower triangle may be given instead.
                    let alt = format!("{}{}", j as char, i as char);
                    match mobj.get(&alt) {
                        Some(f) => parse_field(f, &format!("$.metric.{alt}"))?,
                        None => return Err(perr(&path, "missing metric component")),
                    }
                }
            };
            comps.push(field);
        }
        let metric = Sym2Field(comps.try_into().unwrap_or_else(|_| unreachable!()));
        let dilaton = match obj.get("dilaton") {
            None => Dilaton::Phi(FieldExpr::zero()),
            Some(d) => {
                let dobj = d.as_object().ok_or_else(|| perr("$.dilaton", "expected an object"))?;
                match (dobj.get("phi"), dobj.get("exp2phi")) {
                    (Some(f), None) => Dilaton::Phi(parse_field(f, "$.dilaton.phi")?),
                    (None, Some(f)) => Dilaton::Exp2Phi(parse_field(f, "$.dilaton.exp2phi")?),
                    _ => return Err(perr("$.dilaton", "expected exactly one of `phi`, `exp2phi`")),
                }
            }
        };
        ChartGeometry::new(domain, metric, dilaton).map_err(|e| match e {
            Error::UnsupportedField(m) => Error::Parse(format!("$.{m}")),
            other => other,
        })
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let v: Value = serde_json::from_str(text).map_err(|e| Error::Parse(format!("invalid JSON: {e}")))?;
        ChartGeometry::from_json(&v)
    }

    pub fn to_json(&self) -> Value {
        let domain = match &self.domain {
            Domain::Ball { radius } => json!({"kind": "ball", "radius": format_rational(radius)}),
            Domain::Torus => json!({"kind": "torus"}),
        };
        let mut metric = Map::new();
        for (k, f) in self.metric.0.iter().enumerate() {
            metric.insert(SYM_KEYS[k].into(), field_to_json(f));
        }
        let dilaton = match &self.dilaton {
            Dilaton::Phi(f) => json!({"phi": field_to_json(f)}),
            Dilaton::Exp2Phi(f) => json!({"exp2phi": field_to_json(f)}),
        };
        json!({"domain": domain, "metric": metric, "dilaton": dilaton})
    }
}

fn perr(path: &str, msg: &str) -> Error {
    Error::Parse(format!("{path}: {msg}"))
}

fn get<'a>(obj: &'a Map<String, Value>, path: &str, key: &str) -> Result<&'a Value> {
    obj.get(key).ok_or_else(|| perr(&format!("{path}.{key}"), "missing field"))
}

fn parse_domain(v: &Value) -> Result<Domain> {
    let obj = v.as_object().ok_or_else(|| perr("$.domain", "expected an object"))?;
    match get(obj, "$.domain", "kind")?.as_str() {
        Some("ball") => {
            let radius = match obj.get("radius") {
                Some(r) => parse_coeff(r, "$.domain.radius")?,
                None => q(1, 1),
            };
            if radius <= q(0, 1) {
                return Err(perr("$.domain.radius", "must be positive"));
            }
            Ok(Domain::Ball { radius })
        }
        Some("torus") => Ok(Domain::Torus),
        _ => Err(perr("$.domain.kind", "expected `ball` or `torus`")),
    }
}

/// A coefficient is a JSON number or a string such as `"-3/4"`.
pub fn parse_coeff(v: &Value, path: &str) -> Result<Rational> {
    match v {
        Value::String(s) => parse_rational(s).map_err(|_| perr(path, &format!("not a rational: `{s}`"))),
        Value::Number(n) => parse_rational(&n.to_string()).map_err(|_| perr(path, "not a finite number")),
        _ => Err(perr(path, "expected a number or a string")),
    }
}

fn parse_index<const N: usize, T: std::str::FromStr>(key: &str, path: &str) -> Result<[T; N]> {
    let parts: Vec<&str> = key.split(',').map(str::trim).collect();
    if parts.len() != N {
        return Err(perr(path, &format!("index `{key}` must have {N} entries")));
    }
    let mut out = Vec::with_capacity(N);
    for p in parts {
        out.push(p.parse::<T>().map_err(|_| perr(path, &format!("bad index entry `{p}`")))?);
    }
    Ok(out.try_into().unwrap_or_else(|_| unreachable!()))
}

fn parse_poly(v: &Value, path: &str) -> Result<Poly> {
    let obj = v.as_object().ok_or_else(|| perr(path, "expected a map from exponents to coefficients"))?;
    let mut terms = Vec::new();
    for (k, c) in obj {
        let sub = format!("{path}.{k}");
        terms.push((parse_index::<3, u32>(k, &sub)?, parse_coeff(c, &sub)?));
    }
    Ok(Poly::from_terms(terms))
}

/// Parses one field: `{"class": "poly", "terms": {...}}`, `{"class":
/// "ratio", "num": {...}, "den": {...}}` or `{"class": "trig", "terms":
/// {"n1,n2,n3": {"cos": a, "sin": b}}}`. A bare number is a constant.
pub fn parse_field(v: &Value, path: &str) -> Result<FieldExpr> {
    if v.is_number() || v.is_string() {
        return Ok(FieldExpr::constant(parse_coeff(v, path)?));
    }
    let obj = v.as_object().ok_or_else(|| perr(path, "expected a field object"))?;
    let class = get(obj, path, "class")?.as_str().ok_or_else(|| perr(&format!("{path}.class"), "expected a string"))?;
    match class {
        "poly" => Ok(FieldExpr::Poly(parse_poly(get(obj, path, "terms")?, &format!("{path}.terms"))?)),
        "ratio" => {
            let num = parse_poly(get(obj, path, "num")?, &format!("{path}.num"))?;
            let den = parse_poly(get(obj, path, "den")?, &format!("{path}.den"))?;
            if den.is_zero() {
                return Err(perr(&format!("{path}.den"), "denominator is identically zero"));
            }
            Ok(FieldExpr::Ratio { num, den })
        }
        "trig" => {
            let tpath = format!("{path}.terms");
            let terms =
                get(obj, path, "terms")?.as_object().ok_or_else(|| perr(&tpath, "expected a map"))?;
            let mut t = TrigPoly::zero();
            for (k, c) in terms {
                let sub = format!("{tpath}.{k}");
                let n = parse_index::<3, i32>(k, &sub)?;
                let cobj = c.as_object().ok_or_else(|| perr(&sub, "expected {\"cos\": .., \"sin\": ..}"))?;
                for key in cobj.keys() {
                    if key != "cos" && key != "sin" {
                        return Err(perr(&format!("{sub}.{key}"), "unknown key"));
                    }
                }
                let a = cobj.get("cos").map(|x| parse_coeff(x, &format!("{sub}.cos"))).transpose()?;
                let b = cobj.get("sin").map(|x| parse_coeff(x, &format!("{sub}.sin"))).transpose()?;
                t = t.add(&TrigPoly::term(n, a.unwrap_or_else(|| q(0, 1)), b.unwrap_or_else(|| q(0, 1))));
            }
            Ok(FieldExpr::Trig(t))
        }
        other => Err(perr(&format!("{path}.class"), &format!("unknown field class `{other}`"))),
    }
}

fn poly_to_json(p: &Poly) -> Value {
    let mut m = Map::new();
    for (e, c) in p.terms() {
        m.insert(format!("{},{},{}", e[0], e[1], e[2]), Value::String(format_rational(c)));
    }
    Value::Object(m)
}

pub fn field_to_json(f: &FieldExpr) -> Value {
    match f {
        FieldExpr::Poly(p) => json!({"class": "poly", "terms": poly_to_json(p)}),
        FieldExpr::Ratio { num, den } => {
            json!({"class": "ratio", "num": poly_to_json(num), "den": poly_to_json(den)})
        }
        FieldExpr::Trig(t) => {
            let mut m = Map::new();
            for (n, (a, b)) in t.terms() {
                m.insert(
                    format!("{},{},{}", n[0], n[1], n[2]),
                    json!({"cos": format_rational(a), "sin": format_rational(b)}),
                );
            }
            json!({"class": "trig", "terms": m})
        }
    }
}
