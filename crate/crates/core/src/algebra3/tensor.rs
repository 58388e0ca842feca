//! Pointwise tensors in dimension three, expressed in a fixed (not
//! necessarily orthonormal) frame `e1, e2, e3`.

use std::ops::{Add, Index, Mul, Neg, Sub};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Upper-triangle storage order of a [`Sym2`].
pub const SYM_INDEX: [[usize; 3]; 3] = [[0, 1, 2], [1, 3, 4], [2, 4, 5]];
pub const SYM_PAIRS: [(usize, usize); 6] = [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)];

/// Components of a vector or a 1-form.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Vec3<F>(pub [F; 3]);

impl<F: Scalar> Vec3<F> {
    pub fn new(x: F, y: F, z: F) -> Self {
        Vec3([x, y, z])
    }

    pub fn zero() -> Self {
        Vec3::from_fn(|_| F::zero())
    }

    pub fn basis(i: usize) -> Self {
        Vec3::from_fn(|k| if k == i { F::one() } else { F::zero() })
    }

    pub fn from_fn(mut f: impl FnMut(usize) -> F) -> Self {
        Vec3([f(0), f(1), f(2)])
    }

    pub fn scale(&self, c: &F) -> Self {
        Vec3::from_fn(|i| self.0[i].clone() * c.clone())
    }

    /// Plain coordinate pairing `sum_i a_i b^i`.
    pub fn dot(&self, other: &Self) -> F {
        (0..3).fold(F::zero(), |acc, i| acc + self.0[i].clone() * other.0[i].clone())
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|x| x.is_zero())
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|x| x.magnitude()).fold(0.0, f64::max)
    }

    pub fn map<G: Scalar>(&self, f: impl Fn(&F) -> G) -> Vec3<G> {
        Vec3::from_fn(|i| f(&self.0[i]))
    }
}

impl<F> Index<usize> for Vec3<F> {
    type Output = F;
    fn index(&self, i: usize) -> &F {
        &self.0[i]
    }
}

impl<F: Scalar> Add for Vec3<F> {
    type Output = Vec3<F>;
    fn add(self, rhs: Self) -> Self {
        Vec3::from_fn(|i| self.0[i].clone() + rhs.0[i].clone())
    }
}

impl<F: Scalar> Sub for Vec3<F> {
    type Output = Vec3<F>;
    fn sub(self, rhs: Self) -> Self {
        Vec3::from_fn(|i| self.0[i].clone() - rhs.0[i].clone())
    }
}

/// Symmetric bilinear form; only the upper triangle is stored.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Sym2<F>(pub [F; 6]);

impl<F: Scalar> Sym2<F> {
    pub fn zero() -> Self {
        Sym2::from_fn(|_, _| F::zero())
    }

    pub fn identity() -> Self {
        Sym2::diag(F::one(), F::one(), F::one())
    }

    pub fn diag(a: F, b: F, c: F) -> Self {
        Sym2([a, F::zero(), F::zero(), b, F::zero(), c])
    }

    /// Builds from `f(i, j)` evaluated on the upper triangle only.
    pub fn from_fn(mut f: impl FnMut(usize, usize) -> F) -> Self {
        let mut it = SYM_PAIRS.iter().map(|&(i, j)| f(i, j));
        Sym2(std::array::from_fn(|_| it.next().unwrap()))
    }

    /// Symmetrizes a full matrix.
    pub fn from_matrix_symmetrized(m: &[[F; 3]; 3]) -> Self {
        let half = F::ratio(1, 2);
        Sym2::from_fn(|i, j| (m[i][j].clone() + m[j][i].clone()) * half.clone())
    }

    pub fn get(&self, i: usize, j: usize) -> &F {
        &self.0[SYM_INDEX[i][j]]
    }

    pub fn to_matrix(&self) -> [[F; 3]; 3] {
        std::array::from_fn(|i| std::array::from_fn(|j| self.get(i, j).clone()))
    }

    pub fn scale(&self, c: &F) -> Self {
        Sym2(std::array::from_fn(|k| self.0[k].clone() * c.clone()))
    }

    /// `A(v)` as a 1-form: `sum_j A_ij v^j`.
    pub fn apply(&self, v: &Vec3<F>) -> Vec3<F> {
        Vec3::from_fn(|i| (0..3).fold(F::zero(), |acc, j| acc + self.get(i, j).clone() * v[j].clone()))
    }

    /// `A(u, v)`.
    pub fn eval(&self, u: &Vec3<F>, v: &Vec3<F>) -> F {
        self.apply(v).dot(u)
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|x| x.is_zero())
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|x| x.magnitude()).fold(0.0, f64::max)
    }

    pub fn map<G: Scalar>(&self, f: impl Fn(&F) -> G) -> Sym2<G> {
        Sym2(std::array::from_fn(|k| f(&self.0[k])))
    }

    /// Outer product `a (x) a`.
    pub fn outer(a: &Vec3<F>) -> Self {
        Sym2::from_fn(|i, j| a[i].clone() * a[j].clone())
    }

    /// Congruence `Q^T A Q`, i.e. the form in the frame `f_j = Q_ij e_i`.
    pub fn congruence(&self, q: &[[F; 3]; 3]) -> Self {
        Sym2::from_fn(|a, b| {
            let mut acc = F::zero();
            for i in 0..3 {
                for j in 0..3 {
                    acc = acc + q[i][a].clone() * self.get(i, j).clone() * q[j][b].clone();
                }
            }
            acc
        })
    }
}

impl<F: Scalar> Add for Sym2<F> {
    type Output = Sym2<F>;
    fn add(self, rhs: Self) -> Self {
        Sym2(std::array::from_fn(|k| self.0[k].clone() + rhs.0[k].clone()))
    }
}

impl<F: Scalar> Sub for Sym2<F> {
    type Output = Sym2<F>;
    fn sub(self, rhs: Self) -> Self {
        Sym2(std::array::from_fn(|k| self.0[k].clone() - rhs.0[k].clone()))
    }
}

impl<F: Scalar> Neg for Sym2<F> {
    type Output = Sym2<F>;
    fn neg(self) -> Self {
        Sym2(self.0.map(|x| -x))
    }
}

impl<F: Scalar> Mul<F> for Sym2<F> {
    type Output = Sym2<F>;
    fn mul(self, rhs: F) -> Self {
        self.scale(&rhs)
    }
}

/// Positive-definite metric with its inverse and determinant.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Metric3<F> {
    g: Sym2<F>,
    inv: Sym2<F>,
    det: F,
}

impl<F: Scalar> Metric3<F> {
    /// Checks all leading principal minors are positive.
    pub fn new(g: Sym2<F>) -> Result<Self> {
        let m1 = g.get(0, 0).clone();
        let m2 = m1.clone() * g.get(1, 1).clone() - g.get(0, 1).square();
        let det = det3(&g.to_matrix());
        if !(m1 > F::zero() && m2 > F::zero() && det > F::zero()) {
            return Err(Error::SingularMetric(format!(
                "leading minors ({m1}, {m2}, {det}) are not all positive"
            )));
        }
        let inv = Sym2::from_fn(|i, j| cofactor(&g, i, j) / det.clone());
        Ok(Metric3 { g, inv, det })
    }

    pub fn euclidean() -> Self {
        Metric3::new(Sym2::identity()).expect("identity is positive definite")
    }

    pub fn form(&self) -> &Sym2<F> {
        &self.g
    }

    pub fn inverse(&self) -> &Sym2<F> {
        &self.inv
    }

    pub fn det(&self) -> &F {
        &self.det
    }

    pub fn lower(&self, v: &Vec3<F>) -> Vec3<F> {
        self.g.apply(v)
    }

    pub fn raise(&self, w: &Vec3<F>) -> Vec3<F> {
        self.inv.apply(w)
    }

    /// `g(u, v)` for vectors.
    pub fn inner(&self, u: &Vec3<F>, v: &Vec3<F>) -> F {
        self.g.eval(u, v)
    }

    /// `g*(a, b)` for 1-forms.
    pub fn inner_covector(&self, a: &Vec3<F>, b: &Vec3<F>) -> F {
        self.inv.eval(a, b)
    }

    /// `tr_g A = g^{ij} A_ij`.
    pub fn trace(&self, a: &Sym2<F>) -> F {
        let mut acc = F::zero();
        for i in 0..3 {
            for j in 0..3 {
                acc = acc + self.inv.get(i, j).clone() * a.get(i, j).clone();
            }
        }
        acc
    }

    /// `A^#`, the endomorphism `g^{ik} A_kj` as a full matrix.
    pub fn raise_first(&self, a: &Sym2<F>) -> [[F; 3]; 3] {
        std::array::from_fn(|i| {
            std::array::from_fn(|j| {
                (0..3).fold(F::zero(), |acc, k| acc + self.inv.get(i, k).clone() * a.get(k, j).clone())
            })
        })
    }

    /// `(A o B)_ab = A_ai g^{ij} B_jb` as a full matrix.
    pub fn compose(&self, a: &Sym2<F>, b: &Sym2<F>) -> [[F; 3]; 3] {
        let bs = self.raise_first(b);
        std::array::from_fn(|x| {
            std::array::from_fn(|y| {
                (0..3).fold(F::zero(), |acc, i| acc + a.get(x, i).clone() * bs[i][y].clone())
            })
        })
    }

    /// `A o A`, symmetric by construction.
    pub fn square(&self, a: &Sym2<F>) -> Sym2<F> {
        let m = self.compose(a, a);
        Sym2::from_fn(|i, j| m[i][j].clone())
    }

    /// `A o B + B o A`.
    pub fn anticommutator(&self, a: &Sym2<F>, b: &Sym2<F>) -> Sym2<F> {
        let ab = self.compose(a, b);
        let ba = self.compose(b, a);
        Sym2::from_fn(|i, j| ab[i][j].clone() + ba[i][j].clone())
    }

    /// `<A, B> = A_ij B^ij`.
    pub fn inner_sym(&self, a: &Sym2<F>, b: &Sym2<F>) -> F {
        let ar = self.raise_first(a);
        let br = self.raise_first(b);
        let mut acc = F::zero();
        for i in 0..3 {
            for j in 0..3 {
                acc = acc + ar[i][j].clone() * br[j][i].clone();
            }
        }
        acc
    }

    pub fn norm_sq_sym(&self, a: &Sym2<F>) -> F {
        self.inner_sym(a, a)
    }

    pub fn map<G: Scalar>(&self, f: impl Fn(&F) -> G) -> Result<Metric3<G>> {
        Metric3::new(self.g.map(f))
    }
}

fn cofactor<F: Scalar>(g: &Sym2<F>, i: usize, j: usize) -> F {
    let (a0, a1) = others(i);
    let (b0, b1) = others(j);
    let minor = g.get(a0, b0).clone() * g.get(a1, b1).clone() - g.get(a0, b1).clone() * g.get(a1, b0).clone();
    if (i + j) % 2 == 0 {
        minor
    } else {
        -minor
    }
}

fn others(i: usize) -> (usize, usize) {
    match i {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    }
}

pub fn det3<F: Scalar>(m: &[[F; 3]; 3]) -> F {
    m[0][0].clone() * (m[1][1].clone() * m[2][2].clone() - m[1][2].clone() * m[2][1].clone())
        - m[0][1].clone() * (m[1][0].clone() * m[2][2].clone() - m[1][2].clone() * m[2][0].clone())
        + m[0][2].clone() * (m[1][0].clone() * m[2][1].clone() - m[1][1].clone() * m[2][0].clone())
}

/// Basis of 2-forms `{e2^e3, e3^e1, e1^e2}` (zero-based pairs).
pub const TWO_FORM_PAIRS: [(usize, usize); 3] = [(1, 2), (2, 0), (0, 1)];

/// Position of `e_i ^ e_j` in the 2-form basis together with its sign.
pub fn pair_index(i: usize, j: usize) -> Option<(usize, bool)> {
    match (i, j) {
        (1, 2) => Some((0, true)),
        (2, 1) => Some((0, false)),
        (2, 0) => Some((1, true)),
        (0, 2) => Some((1, false)),
        (0, 1) => Some((2, true)),
        (1, 0) => Some((2, false)),
        _ => None,
    }
}

/// A 2-form `w`, stored as `(w_23, w_31, w_12)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TwoForm<F>(pub [F; 3]);

impl<F: Scalar> TwoForm<F> {
    pub fn zero() -> Self {
        TwoForm([F::zero(), F::zero(), F::zero()])
    }

    /// `(a ^ b)(x, y) = a(x) b(y) - a(y) b(x)`.
    pub fn wedge(a: &Vec3<F>, b: &Vec3<F>) -> Self {
        TwoForm(TWO_FORM_PAIRS.map(|(i, j)| a[i].clone() * b[j].clone() - a[j].clone() * b[i].clone()))
    }

    pub fn component(&self, i: usize, j: usize) -> F {
        match pair_index(i, j) {
            Some((p, true)) => self.0[p].clone(),
            Some((p, false)) => -self.0[p].clone(),
            None => F::zero(),
        }
    }

    pub fn scale(&self, c: &F) -> Self {
        TwoForm(std::array::from_fn(|k| self.0[k].clone() * c.clone()))
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|x| x.is_zero())
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|x| x.magnitude()).fold(0.0, f64::max)
    }
}

impl<F: Scalar> Add for TwoForm<F> {
    type Output = TwoForm<F>;
    fn add(self, rhs: Self) -> Self {
        TwoForm(std::array::from_fn(|k| self.0[k].clone() + rhs.0[k].clone()))
    }
}

impl<F: Scalar> Sub for TwoForm<F> {
    type Output = TwoForm<F>;
    fn sub(self, rhs: Self) -> Self {
        TwoForm(std::array::from_fn(|k| self.0[k].clone() - rhs.0[k].clone()))
    }
}

/// Trilinear form `T(e_a, e_b, e_c)`, stored densely at `9a + 3b + c`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Tensor3<F>(pub Vec<F>);

impl<F: Scalar> Tensor3<F> {
    pub fn zero() -> Self {
        Tensor3(vec![F::zero(); 27])
    }

    pub fn from_fn(mut f: impl FnMut(usize, usize, usize) -> F) -> Self {
        let mut v = Vec::with_capacity(27);
        for a in 0..3 {
            for b in 0..3 {
                for c in 0..3 {
                    v.push(f(a, b, c));
                }
            }
        }
        Tensor3(v)
    }

    pub fn get(&self, a: usize, b: usize, c: usize) -> &F {
        &self.0[9 * a + 3 * b + c]
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|x| x.is_zero())
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|x| x.magnitude()).fold(0.0, f64::max)
    }

    pub fn sub(&self, other: &Self) -> Self {
        Tensor3::from_fn(|a, b, c| self.get(a, b, c).clone() - other.get(a, b, c).clone())
    }

    pub fn add(&self, other: &Self) -> Self {
        Tensor3::from_fn(|a, b, c| self.get(a, b, c).clone() + other.get(a, b, c).clone())
    }

    /// `g^{ab} T(e_a, e_b, .)`.
    pub fn trace_first_pair(&self, g: &Metric3<F>) -> Vec3<F> {
        Vec3::from_fn(|c| {
            let mut acc = F::zero();
            for a in 0..3 {
                for b in 0..3 {
                    acc = acc + g.inverse().get(a, b).clone() * self.get(a, b, c).clone();
                }
            }
            acc
        })
    }

    /// Norm with the 2-form normalisation on the last two slots:
    /// `(1/2) T_abc T^abc`.
    pub fn norm_sq_one_two_form(&self, g: &Metric3<F>) -> F {
        let inv = g.inverse();
        let raised = Tensor3::from_fn(|a, b, c| {
            let mut acc = F::zero();
            for x in 0..3 {
                for y in 0..3 {
                    for z in 0..3 {
                        acc = acc
                            + inv.get(a, x).clone()
                                * inv.get(b, y).clone()
                                * inv.get(c, z).clone()
                                * self.get(x, y, z).clone();
                    }
                }
            }
            acc
        });
        let full = self.0.iter().zip(&raised.0).fold(F::zero(), |acc, (x, y)| acc + x.clone() * y.clone());
        full * F::ratio(1, 2)
    }
}
