//! The curvature dictionary of dimension three.
//!
//! Conventions (fixed crate-wide):
//!
//! * `R(v1, v2, v3, v4) = g(R_{v1,v2} v3, v4)` with
//!   `R_{v1,v2} = [nabla_{v1}, nabla_{v2}] - nabla_{[v1,v2]}`.
//! * `Ric(v1, v2) = sum_i R(e_i, v1, v2, e_i)` over an orthonormal frame,
//!   which is the usual Ricci tensor (positive on round spheres).
//! * The Kulkarni–Nomizu product is
//!   `(A o B)(1,2,3,4) = A13 B24 + A24 B13 - A14 B23 - A23 B14`.
//!
//! With these choices a space of constant sectional curvature `K` has
//! `R(e1, e2, e1, e2) = -K` and `R = -g o Ric + (s/4) g o g` is inverted
//! exactly by Ricci contraction.

use serde::Serialize;

use super::tensor::{pair_index, Metric3, Sym2, TwoForm, Vec3, SYM_INDEX, SYM_PAIRS, TWO_FORM_PAIRS};
use crate::scalar::Scalar;

/// Algebraic curvature tensor in dimension three, stored as the symmetric
/// matrix `C_PQ = R(e_i, e_j, e_k, e_l)` where `P = e_i ^ e_j` and
/// `Q = e_k ^ e_l` run over `{e2^e3, e3^e1, e1^e2}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Curv3<F> {
    pub(crate) c: [F; 6],
    #[serde(skip)]
    pub(crate) metric: Metric3<F>,
}

impl<F: Scalar> Curv3<F> {
    pub fn zero(metric: Metric3<F>) -> Self {
        Curv3 { c: std::array::from_fn(|_| F::zero()), metric }
    }

    /// Builds from pair-basis entries `C_PQ` given as a symmetric matrix
    /// (the lower triangle is ignored).
    pub fn from_pair_matrix(c: [[F; 3]; 3], metric: Metric3<F>) -> Self {
        Curv3 { c: SYM_PAIRS.map(|(p, q)| c[p][q].clone()), metric }
    }

    /// Reads the pair-basis entries off a full `(0,4)` array indexed `27i + 9j + 3k + l`.
    pub fn from_components(full: &[F], metric: Metric3<F>) -> Self {
        let c = SYM_PAIRS.map(|(p, q)| {
            let (i, j) = TWO_FORM_PAIRS[p];
            let (k, l) = TWO_FORM_PAIRS[q];
            full[27 * i + 9 * j + 3 * k + l].clone()
        });
        Curv3 { c, metric }
    }

    pub fn metric(&self) -> &Metric3<F> {
        &self.metric
    }

    pub fn pair_entry(&self, p: usize, q: usize) -> &F {
        &self.c[SYM_INDEX[p][q]]
    }

    /// `R(e_i, e_j, e_k, e_l)`.
    pub fn component(&self, i: usize, j: usize, k: usize, l: usize) -> F {
        match (pair_index(i, j), pair_index(k, l)) {
            (Some((p, sp)), Some((q, sq))) => {
                let v = self.pair_entry(p, q).clone();
                if sp == sq {
                    v
                } else {
                    -v
                }
            }
            _ => F::zero(),
        }
    }

    /// The full `(0,4)` array, indexed `27i + 9j + 3k + l`.
    pub fn to_components(&self) -> Vec<F> {
        let mut out = Vec::with_capacity(81);
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    for l in 0..3 {
                        out.push(self.component(i, j, k, l));
                    }
                }
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        Curv3 { c: std::array::from_fn(|k| self.c[k].clone() + other.c[k].clone()), metric: self.metric.clone() }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Curv3 { c: std::array::from_fn(|k| self.c[k].clone() - other.c[k].clone()), metric: self.metric.clone() }
    }

    pub fn scale(&self, s: &F) -> Self {
        Curv3 { c: std::array::from_fn(|k| self.c[k].clone() * s.clone()), metric: self.metric.clone() }
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(|x| x.is_zero())
    }

    pub fn max_abs(&self) -> f64 {
        self.c.iter().map(|x| x.magnitude()).fold(0.0, f64::max)
    }

    /// The 2-form `R_{v1,v2} = R(v1, v2, ., .)`.
    pub fn apply_to_bivector(&self, v1: &Vec3<F>, v2: &Vec3<F>) -> TwoForm<F> {
        let b = TwoForm::wedge(v1, v2);
        TwoForm(std::array::from_fn(|q| {
            (0..3).fold(F::zero(), |acc, p| acc + b.0[p].clone() * self.pair_entry(p, q).clone())
        }))
    }

    /// `R(w)(v1, v2, v3) = R(w#, v1, v2, v3)` for a 1-form `w`.
    pub fn contract_first(&self, w: &Vec3<F>) -> super::Tensor3<F> {
        let v = self.metric.raise(w);
        super::Tensor3::from_fn(|a, b, c| {
            (0..3).fold(F::zero(), |acc, m| acc + v[m].clone() * self.component(m, a, b, c))
        })
    }

    /// `R_0(h)(v1, v2) = sum_{i,j} R(e_i, v1, v2, e_j) h(e_i, e_j)`.
    pub fn act_on_sym(&self, h: &Sym2<F>) -> Sym2<F> {
        let inv = self.metric.inverse();
        let hr = Sym2::from_fn(|a, b| {
            let mut acc = F::zero();
            for i in 0..3 {
                for j in 0..3 {
                    acc = acc + inv.get(a, i).clone() * inv.get(b, j).clone() * h.get(i, j).clone();
                }
            }
            acc
        });
        Sym2::from_fn(|x, y| {
            let mut acc = F::zero();
            for i in 0..3 {
                for j in 0..3 {
                    acc = acc + self.component(i, x, y, j) * hr.get(i, j).clone();
                }
            }
            acc
        })
    }
}

/// Kulkarni–Nomizu product `A o B` in the pair basis.
pub fn kn_product<F: Scalar>(a: &Sym2<F>, b: &Sym2<F>, metric: &Metric3<F>) -> Curv3<F> {
    let entry = |p: usize, q: usize| {
        let (i, j) = TWO_FORM_PAIRS[p];
        let (k, l) = TWO_FORM_PAIRS[q];
        a.get(i, k).clone() * b.get(j, l).clone() + a.get(j, l).clone() * b.get(i, k).clone()
            - a.get(i, l).clone() * b.get(j, k).clone()
            - a.get(j, k).clone() * b.get(i, l).clone()
    };
    Curv3 { c: SYM_PAIRS.map(|(p, q)| entry(p, q)), metric: metric.clone() }
}

/// `R = -g o Ric + (s/4) g o g`.
pub fn riemann_from_ricci<F: Scalar>(g: &Metric3<F>, ric: &Sym2<F>, s: &F) -> Curv3<F> {
    let gg = kn_product(g.form(), g.form(), g);
    let gr = kn_product(g.form(), ric, g);
    gg.scale(&(s.clone() * F::ratio(1, 4))).sub(&gr)
}

/// `(Ric, s)` with `Ric_jk = g^{il} R_ijkl` and `s = tr_g Ric`.
pub fn ricci_contract<F: Scalar>(r: &Curv3<F>, g: &Metric3<F>) -> (Sym2<F>, F) {
    let inv = g.inverse();
    let ric = Sym2::from_fn(|j, k| {
        let mut acc = F::zero();
        for i in 0..3 {
            for l in 0..3 {
                let gil = inv.get(i, l);
                if !gil.is_zero() {
                    acc = acc + gil.clone() * r.component(i, j, k, l);
                }
            }
        }
        acc
    });
    let s = g.trace(&ric);
    (ric, s)
}

/// `R_{v1,v2} = (s/2) v1^v2 + v2^Ric(v1) + Ric(v2)^v1`, vectors lowered by `g`.
pub fn two_form_action<F: Scalar>(
    g: &Metric3<F>,
    ric: &Sym2<F>,
    s: &F,
    v1: &Vec3<F>,
    v2: &Vec3<F>,
) -> TwoForm<F> {
    let a1 = g.lower(v1);
    let a2 = g.lower(v2);
    let r1 = ric.apply(v1);
    let r2 = ric.apply(v2);
    TwoForm::wedge(&a1, &a2).scale(&(s.clone() * F::ratio(1, 2))) + TwoForm::wedge(&a2, &r1) + TwoForm::wedge(&r2, &a1)
}

/// `R o R = -Ric o Ric + s Ric + (|Ric|^2 - s^2/2) g`.
pub fn curv_square<F: Scalar>(g: &Metric3<F>, ric: &Sym2<F>, s: &F) -> Sym2<F> {
    let rr = g.square(ric);
    let coef = g.norm_sq_sym(ric) - s.square() * F::ratio(1, 2);
    ric.scale(s) - rr + g.form().scale(&coef)
}

/// `|R|^2 = |Ric|^2 - s^2/4`.
pub fn curv_norm<F: Scalar>(g: &Metric3<F>, ric: &Sym2<F>, s: &F) -> F {
    g.norm_sq_sym(ric) - s.square() * F::ratio(1, 4)
}

/// Convenience bundle for a pointwise curvature state `(g, Ric, s)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RicciData<F> {
    pub metric: Metric3<F>,
    pub ric: Sym2<F>,
    pub s: F,
}

impl<F: Scalar> RicciData<F> {
    pub fn new(metric: Metric3<F>, ric: Sym2<F>) -> Self {
        let s = metric.trace(&ric);
        RicciData { metric, ric, s }
    }

    pub fn riemann(&self) -> Curv3<F> {
        riemann_from_ricci(&self.metric, &self.ric, &self.s)
    }

    pub fn curv_square(&self) -> Sym2<F> {
        curv_square(&self.metric, &self.ric, &self.s)
    }

    pub fn curv_norm(&self) -> F {
        curv_norm(&self.metric, &self.ric, &self.s)
    }
}
