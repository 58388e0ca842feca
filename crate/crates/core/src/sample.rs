//! Seeded random instances for identity suites.
//!
//! All generators draw from [`ChaCha8Rng`] seeded by `seed_from_u64`, so a
//! seed replays the same instances on every platform. Rationals have small
//! denominators to keep exact arithmetic cheap.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra3::{Metric3, Sym2, Vec3};
use crate::chartfield::{ChartGeometry, Dilaton, Domain, FieldExpr, Point, Poly, Sym2Field, TrigPoly};
use crate::scalar::{Rational, Scalar};

pub type SuiteRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SuiteRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `k / den` with `k` uniform in `[-max, max]`.
pub fn rational(rng: &mut SuiteRng, max: i64, den: i64) -> Rational {
    Rational::ratio(rng.gen_range(-max..=max), den)
}

/// Nonzero rational in `[lo, hi]` with the given denominator.
pub fn rational_between(rng: &mut SuiteRng, lo: i64, hi: i64, den: i64) -> Rational {
    loop {
        let k = rng.gen_range(lo * den..=hi * den);
        if k != 0 {
            return Rational::ratio(k, den);
        }
    }
}

pub fn vec3(rng: &mut SuiteRng) -> Vec3<Rational> {
    Vec3::from_fn(|_| rational(rng, 9, 4))
}

pub fn sym2(rng: &mut SuiteRng) -> Sym2<Rational> {
    Sym2::from_fn(|_, _| rational(rng, 12, 5))
}

/// `L L^T + I` for a random lower-triangular `L`.
pub fn metric(rng: &mut SuiteRng) -> Metric3<Rational> {
    let l: [[Rational; 3]; 3] =
        std::array::from_fn(|i| std::array::from_fn(|j| if j <= i { rational(rng, 6, 4) } else { Rational::from_i64(0) }));
    let g = Sym2::from_fn(|i, j| {
        let mut acc = if i == j { Rational::from_i64(1) } else { Rational::from_i64(0) };
        for k in 0..3 {
            acc += &l[i][k] * &l[j][k];
        }
        acc
    });
    Metric3::new(g).expect("L L^T + I is positive definite")
}

/// Random polynomial of total degree `<= degree`.
pub fn poly(rng: &mut SuiteRng, degree: u32, max: i64, den: i64) -> Poly {
    let mut terms = Vec::new();
    for a in 0..=degree {
        for b in 0..=degree - a {
            for c in 0..=degree - a - b {
                terms.push(([a, b, c], rational(rng, max, den)));
            }
        }
    }
    Poly::from_terms(terms)
}

/// Point with coordinates `k / 8` inside the ball of radius `1/2`.
pub fn ball_point(rng: &mut SuiteRng) -> Point {
    loop {
        let p: Point = std::array::from_fn(|_| rational(rng, 4, 8));
        let r2: Rational = p.iter().map(|c| c * c).sum();
        if r2 < Rational::ratio(1, 4) {
            return p;
        }
    }
}

/// Half-angle point on the torus.
pub fn torus_point(rng: &mut SuiteRng) -> Point {
    std::array::from_fn(|_| rational(rng, 12, 4))
}

fn one_plus_r2() -> Poly {
    Poly::from_terms([([0, 0, 0], Rational::from_i64(1)), ([2, 0, 0], Rational::from_i64(1)), ([0, 2, 0], Rational::from_i64(1)), ([0, 0, 2], Rational::from_i64(1))])
}

/// `e^{2 phi} = 2 + (small quadratic)`, positive on the ball of radius 1.
pub fn exp2phi_dilaton(rng: &mut SuiteRng) -> Dilaton {
    let p = poly(rng, 2, 1, 8).add(&Poly::constant(Rational::from_i64(2)));
    Dilaton::Exp2Phi(FieldExpr::Poly(p))
}

/// `g_ij = delta_ij + N_ij / (1 + |x|^2)` with small quadratic numerators,
/// on the unit ball. Points from [`ball_point`] keep it positive definite.
pub fn rational_function_chart(rng: &mut SuiteRng) -> ChartGeometry {
    let den = one_plus_r2();
    let comps: [FieldExpr; 6] = std::array::from_fn(|k| {
        let mut num = poly(rng, 2, 1, 16);
        if matches!(k, 0 | 3 | 5) {
            num = num.add(&den);
        }
        FieldExpr::Ratio { num, den: den.clone() }
    });
    let dilaton = exp2phi_dilaton(rng);
    ChartGeometry::new(Domain::Ball { radius: Rational::from_i64(1) }, Sym2Field(comps), dilaton)
        .expect("ball chart with rational fields")
}

/// `g = delta + P(x)` with `P` of degree `<= 2` and small coefficients.
pub fn polynomial_chart(rng: &mut SuiteRng) -> ChartGeometry {
    let comps: [FieldExpr; 6] = std::array::from_fn(|k| {
        let mut p = poly(rng, 2, 1, 16);
        if matches!(k, 0 | 3 | 5) {
            p = p.add(&Poly::constant(Rational::from_i64(1)));
        }
        FieldExpr::Poly(p)
    });
    ChartGeometry::new(Domain::Ball { radius: Rational::from_i64(1) }, Sym2Field(comps), exp2phi_dilaton(rng))
        .expect("ball chart with polynomial fields")
}

/// Symmetric polynomial field of degree `<= degree`.
pub fn poly_sym2_field(rng: &mut SuiteRng, degree: u32) -> Sym2Field {
    Sym2Field(std::array::from_fn(|_| FieldExpr::Poly(poly(rng, degree, 6, 5))))
}

/// Trigonometric polynomial with every `|n_k| <= degree`.
pub fn trig_poly(rng: &mut SuiteRng, degree: i32, terms: usize) -> TrigPoly {
    let mut t = TrigPoly::zero();
    for _ in 0..terms {
        let n = std::array::from_fn(|_| rng.gen_range(-degree..=degree));
        t = t.add(&TrigPoly::term(n, rational(rng, 6, 4), rational(rng, 6, 4)));
    }
    t
}

pub fn trig_sym2_field(rng: &mut SuiteRng, degree: i32, terms: usize) -> Sym2Field {
    Sym2Field(std::array::from_fn(|_| FieldExpr::Trig(trig_poly(rng, degree, terms))))
}

/// Positive rational coupling with denominator at most 7.
pub fn kappa(rng: &mut SuiteRng) -> Rational {
    let den = rng.gen_range(1..=7);
    Rational::ratio(rng.gen_range(1..=40), den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chartfield::geometry_packet;

    #[test]
    fn seeds_replay() {
        let a = rational_function_chart(&mut rng(11));
        let b = rational_function_chart(&mut rng(11));
        assert_eq!(a, b);
        assert_ne!(a, rational_function_chart(&mut rng(12)));
    }

    #[test]
    fn random_charts_are_positive_definite_at_sample_points() {
        let mut r = rng(5);
        for _ in 0..10 {
            let chart = rational_function_chart(&mut r);
            let p = ball_point(&mut r);
            assert!(geometry_packet::<f64>(&chart, &p).is_ok());
        }
    }
}
