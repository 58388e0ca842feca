//! Exactly differentiable scalar fields on a chart.

use std::collections::BTreeMap;

use num::{One, Zero};

use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::scalar::{Rational, Scalar};

/// Where a field is evaluated.
///
/// Ball charts use Cartesian coordinates. Torus charts use angles, carried
/// as `(cos x_i, sin x_i)` so that rational half-angle points evaluate
/// trigonometric fields without rounding.
#[derive(Clone, Debug, PartialEq)]
pub enum Coords<F> {
    Cartesian([F; 3]),
    Angles([(F, F); 3]),
}

impl<F: Scalar> Coords<F> {
    /// Angles from half-angle tangents `t_i = tan(x_i / 2)`.
    pub fn from_half_angles(t: &[F; 3]) -> Self {
        Coords::Angles(std::array::from_fn(|i| {
            let t2 = t[i].square();
            let den = F::one() + t2.clone();
            ((F::one() - t2) / den.clone(), F::from_i64(2) * t[i].clone() / den)
        }))
    }
}

impl Coords<f64> {
    pub fn from_angles_f64(x: [f64; 3]) -> Self {
        Coords::Angles(x.map(|a| (a.cos(), a.sin())))
    }
}

/// Polynomial in `(x1, x2, x3)` with rational coefficients.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Poly {
    terms: BTreeMap<[u32; 3], Rational>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly::default()
    }

    pub fn constant(c: Rational) -> Self {
        Poly::monomial([0, 0, 0], c)
    }

    pub fn monomial(e: [u32; 3], c: Rational) -> Self {
        let mut p = Poly::zero();
        p.add_term(e, c);
        p
    }

    pub fn var(i: usize) -> Self {
        let mut e = [0; 3];
        e[i] = 1;
        Poly::monomial(e, Rational::from_i64(1))
    }

    pub fn from_terms(terms: impl IntoIterator<Item = ([u32; 3], Rational)>) -> Self {
        let mut p = Poly::zero();
        for (e, c) in terms {
            p.add_term(e, c);
        }
        p
    }

    fn add_term(&mut self, e: [u32; 3], c: Rational) {
        let slot = self.terms.entry(e).or_insert_with(Rational::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&e);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u32; 3], &Rational)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    pub fn add(&self, o: &Poly) -> Poly {
        let mut out = self.clone();
        for (e, c) in &o.terms {
            out.add_term(*e, c.clone());
        }
        out
    }

    pub fn sub(&self, o: &Poly) -> Poly {
        self.add(&o.scale(&Rational::from_i64(-1)))
    }

    pub fn scale(&self, c: &Rational) -> Poly {
        Poly::from_terms(self.terms.iter().map(|(e, v)| (*e, v * c)))
    }

    pub fn mul(&self, o: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (a, ca) in &self.terms {
            for (b, cb) in &o.terms {
                out.add_term([a[0] + b[0], a[1] + b[1], a[2] + b[2]], ca * cb);
            }
        }
        out
    }

    pub fn derivative(&self, i: usize) -> Poly {
        Poly::from_terms(self.terms().filter(|(e, _)| e[i] > 0).map(|(e, c)| {
            let mut f = *e;
            f[i] -= 1;
            (f, c * Rational::from_i64(e[i] as i64))
        }))
    }

    pub fn eval<F: Scalar>(&self, x: &[F; 3]) -> F {
        self.terms.iter().fold(F::zero(), |acc, (e, c)| {
            let mut m = F::from_rational(c);
            for i in 0..3 {
                for _ in 0..e[i] {
                    m = m * x[i].clone();
                }
            }
            acc + m
        })
    }

    /// Taylor jet at `x`.
    pub fn jet<F: Scalar>(&self, x: &[F; 3], order: usize) -> Jet<F> {
        let deg = self.degree() as usize;
        let vars: [Jet<F>; 3] = std::array::from_fn(|i| Jet::variable(i, x[i].clone(), order));
        // powers[i][k] = x_i^k as a jet
        let powers: Vec<Vec<Jet<F>>> = vars
            .iter()
            .map(|v| {
                let mut row = vec![Jet::constant(F::one(), order)];
                for k in 1..=deg {
                    let next = row[k - 1].mul(v);
                    row.push(next);
                }
                row
            })
            .collect();
        let mut out = Jet::zero(order);
        for (e, c) in &self.terms {
            let m = powers[0][e[0] as usize].mul(&powers[1][e[1] as usize]).mul(&powers[2][e[2] as usize]);
            out = out.add(&m.scale(&F::from_rational(c)));
        }
        out
    }
}

/// Finite Fourier sum `sum_n a_n cos(n.x) + b_n sin(n.x)` on the 3-torus.
///
/// Frequencies are stored in canonical form (first nonzero entry positive),
/// so each trigonometric monomial has exactly one representation.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TrigPoly {
    terms: BTreeMap<[i32; 3], (Rational, Rational)>,
}

fn canonical(n: [i32; 3]) -> ([i32; 3], bool) {
    match n.iter().find(|k| **k != 0) {
        Some(k) if *k < 0 => (n.map(|k| -k), true),
        _ => (n, false),
    }
}

impl TrigPoly {
    pub fn zero() -> Self {
        TrigPoly::default()
    }

    pub fn constant(c: Rational) -> Self {
        TrigPoly::term([0, 0, 0], c, Rational::zero())
    }

    /// `a cos(n.x) + b sin(n.x)`.
    pub fn term(n: [i32; 3], a: Rational, b: Rational) -> Self {
        let mut t = TrigPoly::zero();
        t.add_term(n, a, b);
        t
    }

    fn add_term(&mut self, n: [i32; 3], a: Rational, b: Rational) {
        let (n, flipped) = canonical(n);
        let b = if flipped { -b } else { b };
        let b = if n == [0, 0, 0] { Rational::zero() } else { b };
        let slot = self.terms.entry(n).or_insert_with(|| (Rational::zero(), Rational::zero()));
        slot.0 += a;
        slot.1 += b;
        if slot.0.is_zero() && slot.1.is_zero() {
            self.terms.remove(&n);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[i32; 3], &(Rational, Rational))> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Largest `|n_k|` over all terms.
    pub fn degree(&self) -> u32 {
        self.terms.keys().flat_map(|n| n.iter().map(|k| k.unsigned_abs())).max().unwrap_or(0)
    }

    pub fn add(&self, o: &TrigPoly) -> TrigPoly {
        let mut out = self.clone();
        for (n, (a, b)) in &o.terms {
            out.add_term(*n, a.clone(), b.clone());
        }
        out
    }

    pub fn sub(&self, o: &TrigPoly) -> TrigPoly {
        self.add(&o.scale(&Rational::from_i64(-1)))
    }

    pub fn scale(&self, c: &Rational) -> TrigPoly {
        let mut out = TrigPoly::zero();
        for (n, (a, b)) in &self.terms {
            out.add_term(*n, a * c, b * c);
        }
        out
    }

    pub fn mul(&self, o: &TrigPoly) -> TrigPoly {
        let half = Rational::new(1.into(), 2.into());
        let mut out = TrigPoly::zero();
        for (n, (a, b)) in &self.terms {
            for (m, (c, d)) in &o.terms {
                let plus = [n[0] + m[0], n[1] + m[1], n[2] + m[2]];
                let minus = [n[0] - m[0], n[1] - m[1], n[2] - m[2]];
                // cos u cos v = (cos(u+v) + cos(u-v)) / 2, and so on.
                let cos_plus = (a * c - b * d) * &half;
                let cos_minus = (a * c + b * d) * &half;
                let sin_plus = (a * d + b * c) * &half;
                let sin_minus = (b * c - a * d) * &half;
                out.add_term(plus, cos_plus, sin_plus);
                out.add_term(minus, cos_minus, sin_minus);
            }
        }
        out
    }

    /// `d/dx_i`.
    pub fn derivative(&self, i: usize) -> TrigPoly {
        let mut out = TrigPoly::zero();
        for (n, (a, b)) in &self.terms {
            let k = Rational::from_i64(n[i] as i64);
            out.add_term(*n, b * &k, -(a * &k));
        }
        out
    }

    /// Average over the torus.
    pub fn mean(&self) -> Rational {
        self.terms.get(&[0, 0, 0]).map(|t| t.0.clone()).unwrap_or_else(Rational::zero)
    }

    /// Mean over the `N^3` uniform grid `x = 2 pi k / N`: the sum of the
    /// cosine coefficients whose frequencies are all divisible by `N` (sine
    /// terms cancel between `k` and `-k`). Equals [`TrigPoly::mean`] once
    /// `N` exceeds the degree.
    pub fn nodal_mean(&self, nodes: u32) -> Rational {
        let n = nodes as i32;
        self.terms
            .iter()
            .filter(|(f, _)| f.iter().all(|k| k % n == 0))
            .fold(Rational::zero(), |acc, (_, (a, _))| acc + a)
    }

    fn angle<F: Scalar>(n: &[i32; 3], cs: &[(F, F); 3]) -> (F, F) {
        // cos(n.x) + i sin(n.x) = prod_k (c_k + i s_k)^{n_k}
        let mut re = F::one();
        let mut im = F::zero();
        for k in 0..3 {
            let (c, s) = (&cs[k].0, &cs[k].1);
            let s = if n[k] < 0 { -s.clone() } else { s.clone() };
            for _ in 0..n[k].unsigned_abs() {
                let r = re.clone() * c.clone() - im.clone() * s.clone();
                im = re * s.clone() + im * c.clone();
                re = r;
            }
        }
        (re, im)
    }

    pub fn eval<F: Scalar>(&self, cs: &[(F, F); 3]) -> F {
        self.terms.iter().fold(F::zero(), |acc, (n, (a, b))| {
            let (c, s) = Self::angle(n, cs);
            acc + F::from_rational(a) * c + F::from_rational(b) * s
        })
    }

    /// Taylor jet in the angle coordinates at the point with the given
    /// `(cos, sin)` pairs.
    pub fn jet<F: Scalar>(&self, cs: &[(F, F); 3], order: usize) -> Jet<F> {
        let mut out = Jet::zero(order);
        for (n, (a, b)) in &self.terms {
            let (c0, s0) = Self::angle(n, cs);
            let phase = Jet::linear(n.map(|k| F::from_i64(k as i64)), order);
            let (cj, sj) = phase.cos_sin_nilpotent();
            // cos(u0 + d) = c0 cos d - s0 sin d, sin(u0 + d) = s0 cos d + c0 sin d
            let cos_n = cj.scale(&c0).sub(&sj.scale(&s0));
            let sin_n = cj.scale(&s0).add(&sj.scale(&c0));
            out = out.add(&cos_n.scale(&F::from_rational(a))).add(&sin_n.scale(&F::from_rational(b)));
        }
        out
    }
}

enum Pair {
    Poly(Poly, Poly),
    Ratio((Poly, Poly), (Poly, Poly)),
    Trig(TrigPoly, TrigPoly),
}

/// A scalar field in one of the supported closed-form classes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FieldExpr {
    Poly(Poly),
    Ratio { num: Poly, den: Poly },
    Trig(TrigPoly),
}

impl FieldExpr {
    pub fn constant(c: Rational) -> Self {
        FieldExpr::Poly(Poly::constant(c))
    }

    pub fn zero() -> Self {
        FieldExpr::Poly(Poly::zero())
    }

    pub fn is_trig(&self) -> bool {
        matches!(self, FieldExpr::Trig(_))
    }

    /// Constant polynomials make sense on every chart.
    pub fn is_constant(&self) -> bool {
        match self {
            FieldExpr::Poly(p) => p.degree() == 0,
            FieldExpr::Ratio { num, den } => num.degree() == 0 && den.degree() == 0,
            FieldExpr::Trig(t) => t.terms().all(|(n, _)| *n == [0, 0, 0]),
        }
    }

    pub fn class_name(&self) -> &'static str {
        match self {
            FieldExpr::Poly(_) => "poly",
            FieldExpr::Ratio { .. } => "ratio",
            FieldExpr::Trig(_) => "trig",
        }
    }

    fn constant_value(&self) -> Option<Rational> {
        match self {
            FieldExpr::Poly(p) if p.degree() == 0 => Some(p.eval(&[Rational::zero(), Rational::zero(), Rational::zero()])),
            _ => None,
        }
    }

    /// Normalises a pair of operands into a common class.
    fn pair(&self, o: &FieldExpr) -> Result<Pair> {
        use FieldExpr as E;
        let as_ratio = |f: &FieldExpr| match f {
            E::Poly(p) => Some((p.clone(), Poly::constant(Rational::one()))),
            E::Ratio { num, den } => Some((num.clone(), den.clone())),
            E::Trig(_) => None,
        };
        let as_trig = |f: &FieldExpr| match f {
            E::Trig(t) => Some(t.clone()),
            _ => f.constant_value().map(TrigPoly::constant),
        };
        match (self, o) {
            (E::Poly(a), E::Poly(b)) => Ok(Pair::Poly(a.clone(), b.clone())),
            (E::Trig(_), _) | (_, E::Trig(_)) => match (as_trig(self), as_trig(o)) {
                (Some(a), Some(b)) => Ok(Pair::Trig(a, b)),
                _ => Err(Error::UnsupportedField(format!("{} combined with {}", self.class_name(), o.class_name()))),
            },
            _ => Ok(Pair::Ratio(as_ratio(self).expect("not trig"), as_ratio(o).expect("not trig"))),
        }
    }

    pub fn add(&self, o: &FieldExpr) -> Result<FieldExpr> {
        Ok(match self.pair(o)? {
            Pair::Poly(a, b) => FieldExpr::Poly(a.add(&b)),
            Pair::Trig(a, b) => FieldExpr::Trig(a.add(&b)),
            Pair::Ratio((a, b), (c, d)) if b == d => FieldExpr::Ratio { num: a.add(&c), den: b },
            Pair::Ratio((a, b), (c, d)) => FieldExpr::Ratio { num: a.mul(&d).add(&c.mul(&b)), den: b.mul(&d) },
        })
    }

    pub fn sub(&self, o: &FieldExpr) -> Result<FieldExpr> {
        self.add(&o.scale(&-Rational::one()))
    }

    pub fn mul(&self, o: &FieldExpr) -> Result<FieldExpr> {
        Ok(match self.pair(o)? {
            Pair::Poly(a, b) => FieldExpr::Poly(a.mul(&b)),
            Pair::Trig(a, b) => FieldExpr::Trig(a.mul(&b)),
            Pair::Ratio((a, b), (c, d)) => FieldExpr::Ratio { num: a.mul(&c), den: b.mul(&d) },
        })
    }

    pub fn scale(&self, c: &Rational) -> FieldExpr {
        match self {
            FieldExpr::Poly(p) => FieldExpr::Poly(p.scale(c)),
            FieldExpr::Ratio { num, den } => FieldExpr::Ratio { num: num.scale(c), den: den.clone() },
            FieldExpr::Trig(t) => FieldExpr::Trig(t.scale(c)),
        }
    }

    /// Partial derivative in the chart coordinate (angle on a torus).
    pub fn derivative(&self, i: usize) -> FieldExpr {
        match self {
            FieldExpr::Poly(p) => FieldExpr::Poly(p.derivative(i)),
            FieldExpr::Ratio { num, den } => FieldExpr::Ratio {
                num: num.derivative(i).mul(den).sub(&num.mul(&den.derivative(i))),
                den: den.mul(den),
            },
            FieldExpr::Trig(t) => FieldExpr::Trig(t.derivative(i)),
        }
    }

    /// Taylor jet at the given coordinates. `label` names the field in errors.
    pub fn jet<F: Scalar>(&self, at: &Coords<F>, order: usize, label: &str) -> Result<Jet<F>> {
        match (self, at) {
            (FieldExpr::Poly(p), Coords::Cartesian(x)) => Ok(p.jet(x, order)),
            (FieldExpr::Ratio { num, den }, Coords::Cartesian(x)) => {
                let d = den.jet(x, order);
                if d.value().near_zero(1.0) {
                    return Err(Error::PoleAtPoint(label.to_string()));
                }
                let inv = d.recip().ok_or_else(|| Error::PoleAtPoint(label.to_string()))?;
                Ok(num.jet(x, order).mul(&inv))
            }
            (FieldExpr::Trig(t), Coords::Angles(cs)) => Ok(t.jet(cs, order)),
            (f, Coords::Angles(_)) if f.is_constant() => {
                let FieldExpr::Poly(p) = f else {
                    return Err(Error::UnsupportedField(format!("{label}: ratio on a torus chart")));
                };
                Ok(Jet::constant(p.eval(&[F::zero(), F::zero(), F::zero()]), order))
            }
            (f, Coords::Angles(_)) => {
                Err(Error::UnsupportedField(format!("{label}: {} field on a torus chart", f.class_name())))
            }
            (FieldExpr::Trig(_), Coords::Cartesian(_)) => {
                Err(Error::UnsupportedField(format!("{label}: trig field on a ball chart")))
            }
        }
    }

    pub fn eval<F: Scalar>(&self, at: &Coords<F>, label: &str) -> Result<F> {
        Ok(self.jet(at, 0, label)?.value().clone())
    }

    /// Plain double-precision evaluation, used by the finite-difference
    /// oracle. Torus coordinates are angles.
    pub fn eval_f64(&self, x: [f64; 3], label: &str) -> Result<f64> {
        match self {
            FieldExpr::Poly(p) => Ok(p.eval(&x)),
            FieldExpr::Ratio { num, den } => {
                let d = den.eval(&x);
                if d.abs() <= f64::EPSILON * den.terms().map(|(_, c)| c.to_f64()).fold(0.0, |m, c| m + c.abs()) {
                    return Err(Error::PoleAtPoint(label.to_string()));
                }
                Ok(num.eval(&x) / d)
            }
            FieldExpr::Trig(t) => Ok(t.eval(&x.map(|a| (a.cos(), a.sin())))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::ratio(n, d)
    }

    #[test]
    fn poly_jet_matches_hand_derivatives() {
        // f = 3 x1^2 x3 - x2
        let f = Poly::from_terms([([2, 0, 1], q(3, 1)), ([0, 1, 0], q(-1, 1))]);
        let j = f.jet(&[q(1, 2), q(2, 1), q(-1, 1)], 3);
        assert_eq!(j.value(), &q(-11, 4));
        assert_eq!(j.partial([1, 0, 0]).unwrap(), q(-3, 1));
        assert_eq!(j.partial([1, 0, 1]).unwrap(), q(3, 1));
        assert_eq!(j.partial([0, 1, 0]).unwrap(), q(-1, 1));
        assert_eq!(f.degree(), 3);
    }

    #[test]
    fn ratio_reports_poles() {
        let den = Poly::from_terms([([0, 0, 0], q(1, 1)), ([1, 0, 0], q(-1, 1))]);
        let f = FieldExpr::Ratio { num: Poly::constant(q(1, 1)), den };
        let at = Coords::Cartesian([q(1, 1), q(0, 1), q(0, 1)]);
        assert!(matches!(f.jet(&at, 2, "g11"), Err(Error::PoleAtPoint(_))));
        let at = Coords::Cartesian([q(1, 2), q(0, 1), q(0, 1)]);
        // 1/(1-x) at x = 1/2: value 2, derivative 4.
        let j = f.jet(&at, 2, "g11").unwrap();
        assert_eq!(j.partial([1, 0, 0]).unwrap(), q(4, 1));
    }

    #[test]
    fn trig_products_use_product_to_sum() {
        let c = TrigPoly::term([1, 0, 0], q(1, 1), q(0, 1));
        let s = TrigPoly::term([1, 0, 0], q(0, 1), q(1, 1));
        // cos^2 + sin^2 = 1
        assert_eq!(c.mul(&c).add(&s.mul(&s)), TrigPoly::constant(q(1, 1)));
        // 2 sin cos = sin 2x
        assert_eq!(s.mul(&c).scale(&q(2, 1)), TrigPoly::term([2, 0, 0], q(0, 1), q(1, 1)));
        assert_eq!(s.derivative(0), c);
    }

    #[test]
    fn trig_negative_frequency_is_canonicalised() {
        let a = TrigPoly::term([0, -1, 2], q(1, 1), q(1, 1));
        let b = TrigPoly::term([0, 1, -2], q(1, 1), q(-1, 1));
        assert_eq!(a, b);
    }

    #[test]
    fn exact_half_angle_evaluation() {
        // t = 1 is x = pi/2: cos(x1) = 0, sin(x1) = 1.
        let at = Coords::from_half_angles(&[q(1, 1), q(0, 1), q(0, 1)]);
        let f = FieldExpr::Trig(TrigPoly::term([1, 0, 0], q(3, 1), q(5, 1)));
        assert_eq!(f.eval(&at, "f").unwrap(), q(5, 1));
        let j = f.jet(&at, 2, "f").unwrap();
        // d/dx (3 cos x + 5 sin x) = -3 sin x + 5 cos x = -3
        assert_eq!(j.partial([1, 0, 0]).unwrap(), q(-3, 1));
        assert_eq!(j.partial([2, 0, 0]).unwrap(), q(-5, 1));
    }

    #[test]
    fn nodal_mean_matches_direct_node_sum() {
        let f = TrigPoly::term([2, 0, 0], q(1, 1), q(1, 3))
            .add(&TrigPoly::term([3, 3, 0], q(2, 1), q(0, 1)))
            .add(&TrigPoly::constant(q(1, 2)));
        for nodes in 1..6u32 {
            let mut sum = 0.0;
            let n = nodes as usize;
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        let x = [i, j, k].map(|m| 2.0 * std::f64::consts::PI * m as f64 / nodes as f64);
                        sum += FieldExpr::Trig(f.clone()).eval_f64(x, "f").unwrap();
                    }
                }
            }
            let direct = sum / (n * n * n) as f64;
            assert!((direct - f.nodal_mean(nodes).to_f64()).abs() < 1e-12, "N = {nodes}");
        }
        assert_eq!(f.nodal_mean(5), f.mean());
        assert_ne!(f.nodal_mean(3), f.mean());
    }
}
