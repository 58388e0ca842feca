//! Truncated multivariate Taylor polynomials ("jets") in three variables.
//!
//! A jet of order `k` at a point `p` stores the Taylor coefficients
//! `f_m / m!` for all multi-indices `|m| <= k`. Jets form a ring under
//! truncated multiplication, differentiate exactly (losing one order), and
//! carry any [`Scalar`], so closed-form derivatives of rational functions
//! evaluate exactly in rational arithmetic.
//!
//! Monomials are kept in graded order, which makes truncation a prefix cut.

use num::Zero;
use once_cell::sync::Lazy;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const MAX_ORDER: usize = 6;

struct Layout {
    exps: Vec<[usize; 3]>,
    index: Vec<usize>,
}

const SIDE: usize = MAX_ORDER + 1;

static LAYOUT: Lazy<Layout> = Lazy::new(|| {
    let mut exps = Vec::new();
    for deg in 0..=MAX_ORDER {
        for a in (0..=deg).rev() {
            for b in (0..=deg - a).rev() {
                exps.push([a, b, deg - a - b]);
            }
        }
    }
    let mut index = vec![usize::MAX; SIDE * SIDE * SIDE];
    for (k, e) in exps.iter().enumerate() {
        index[(e[0] * SIDE + e[1]) * SIDE + e[2]] = k;
    }
    Layout { exps, index }
});

/// Number of monomials of total degree `<= order`.
pub const fn jet_len(order: usize) -> usize {
    (order + 1) * (order + 2) * (order + 3) / 6
}

fn degree(e: &[usize; 3]) -> usize {
    e[0] + e[1] + e[2]
}

/// Calls `sink(k, a_i * b_j)` for every pair of monomials whose product
/// `k` survives truncation at `order`.
fn convolve<T>(a: &[T], b: &[T], order: usize, mut sink: impl FnMut(usize, T))
where
    for<'x> &'x T: std::ops::Mul<&'x T, Output = T>,
    T: num::Zero,
{
    let exps = &LAYOUT.exps;
    let n = jet_len(order);
    for i in 0..n {
        if a[i].is_zero() {
            continue;
        }
        let di = degree(&exps[i]);
        for j in 0..n {
            if di + degree(&exps[j]) > order {
                break;
            }
            if b[j].is_zero() {
                continue;
            }
            let (e, f) = (exps[i], exps[j]);
            sink(lookup([e[0] + f[0], e[1] + f[1], e[2] + f[2]]), &a[i] * &b[j]);
        }
    }
}

fn lookup(e: [usize; 3]) -> usize {
    LAYOUT.index[(e[0] * SIDE + e[1]) * SIDE + e[2]]
}

#[derive(Clone, Debug, PartialEq)]
pub struct Jet<F> {
    order: usize,
    c: Vec<F>,
}

impl<F: Scalar> Jet<F> {
    pub fn zero(order: usize) -> Self {
        assert!(order <= MAX_ORDER, "jet order {order} exceeds {MAX_ORDER}");
        Jet { order, c: vec![F::zero(); jet_len(order)] }
    }

    pub fn constant(value: F, order: usize) -> Self {
        let mut j = Jet::zero(order);
        j.c[0] = value;
        j
    }

    /// The coordinate function `x_i = base + dx_i`.
    pub fn variable(i: usize, base: F, order: usize) -> Self {
        let mut j = Jet::constant(base, order);
        if order >= 1 {
            let mut e = [0; 3];
            e[i] = 1;
            j.c[lookup(e)] = F::one();
        }
        j
    }

    /// Linear jet `sum_i a_i dx_i` with zero value.
    pub fn linear(a: [F; 3], order: usize) -> Self {
        let mut j = Jet::zero(order);
        if order >= 1 {
            for (i, ai) in a.into_iter().enumerate() {
                let mut e = [0; 3];
                e[i] = 1;
                j.c[lookup(e)] = ai;
            }
        }
        j
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn value(&self) -> &F {
        &self.c[0]
    }

    /// Taylor coefficient of `dx^e` (that is `d^e f / e!`).
    pub fn coeff(&self, e: [usize; 3]) -> F {
        if degree(&e) > self.order {
            return F::zero();
        }
        self.c[lookup(e)].clone()
    }

    /// The partial derivative `d^e f` at the base point.
    pub fn partial(&self, e: [usize; 3]) -> Result<F> {
        if degree(&e) > self.order {
            return Err(Error::JetOrder { have: self.order, need: degree(&e) });
        }
        let fact = e.iter().fold(1i64, |acc, &k| acc * (1..=k as i64).product::<i64>());
        Ok(self.c[lookup(e)].clone() * F::from_i64(fact))
    }

    pub fn truncate(&self, order: usize) -> Self {
        if order >= self.order {
            return self.clone();
        }
        Jet { order, c: self.c[..jet_len(order)].to_vec() }
    }

    pub fn add(&self, o: &Self) -> Self {
        let order = self.order.min(o.order);
        let mut c = self.c[..jet_len(order)].to_vec();
        c.iter_mut().zip(&o.c).for_each(|(x, y)| *x += y);
        Jet { order, c }
    }

    pub fn sub(&self, o: &Self) -> Self {
        let order = self.order.min(o.order);
        let mut c = self.c[..jet_len(order)].to_vec();
        c.iter_mut().zip(&o.c).for_each(|(x, y)| *x -= y);
        Jet { order, c }
    }

    pub fn neg(&self) -> Self {
        Jet { order: self.order, c: self.c.iter().map(|x| -x.clone()).collect() }
    }

    pub fn scale(&self, s: &F) -> Self {
        let mut c = self.c.clone();
        c.iter_mut().for_each(|x| *x *= s);
        Jet { order: self.order, c }
    }

    pub fn add_scalar(&self, s: &F) -> Self {
        let mut out = self.clone();
        out.c[0] = out.c[0].clone() + s.clone();
        out
    }

    pub fn mul(&self, o: &Self) -> Self {
        let order = self.order.min(o.order);
        let n = jet_len(order);
        if let (Some((an, ad)), Some((bn, bd))) = (F::split_common(&self.c[..n]), F::split_common(&o.c[..n])) {
            let mut out = vec![num::BigInt::zero(); n];
            convolve(&an, &bn, order, |k, prod| out[k] += prod);
            return Jet { order, c: F::join_common(out, &(ad * bd)) };
        }
        let mut out = vec![F::zero(); n];
        let exps = &LAYOUT.exps;
        for i in 0..n {
            let a = &self.c[i];
            if a.is_zero() {
                continue;
            }
            let di = degree(&exps[i]);
            for j in 0..n {
                if di + degree(&exps[j]) > order {
                    // Graded order: everything after this also overflows.
                    break;
                }
                let b = &o.c[j];
                if b.is_zero() {
                    continue;
                }
                let e = exps[i];
                let f = exps[j];
                let k = lookup([e[0] + f[0], e[1] + f[1], e[2] + f[2]]);
                let mut prod = a.clone();
                prod *= b;
                out[k] += prod;
            }
        }
        Jet { order, c: out }
    }

    /// `d f / d x_i`, one order shorter.
    pub fn derivative(&self, i: usize) -> Result<Self> {
        if self.order == 0 {
            return Err(Error::JetOrder { have: 0, need: 1 });
        }
        let order = self.order - 1;
        let n = jet_len(order);
        let exps = &LAYOUT.exps;
        let c = (0..n)
            .map(|k| {
                let mut e = exps[k];
                e[i] += 1;
                self.c[lookup(e)].clone() * F::from_i64(e[i] as i64)
            })
            .collect();
        Ok(Jet { order, c })
    }

    /// `sum_n taylor[n] * (self - value)^n`: the composition `f(self)` where
    /// `taylor[n] = f^(n)(value) / n!`. Needs `taylor.len() > order`.
    pub fn compose(&self, taylor: &[F]) -> Self {
        let mut delta = self.clone();
        delta.c[0] = F::zero();
        let mut out = Jet::constant(taylor[0].clone(), self.order);
        let mut power = Jet::constant(F::one(), self.order);
        for coef in taylor.iter().take(self.order + 1).skip(1) {
            power = power.mul(&delta);
            out = out.add(&power.scale(coef));
        }
        out
    }

    /// `1 / self`; `None` when the value vanishes.
    pub fn recip(&self) -> Option<Self> {
        let a = self.value().clone();
        if a.is_zero() {
            return None;
        }
        // 1/(a + d) = sum_n (-1)^n d^n / a^(n+1)
        let inv = F::one() / a;
        let mut taylor = Vec::with_capacity(self.order + 1);
        let mut t = inv.clone();
        for _ in 0..=self.order {
            taylor.push(t.clone());
            t = -(t * inv.clone());
        }
        Some(self.compose(&taylor))
    }

    /// `log(self) - log(value)`; only derivatives of a logarithm are rational.
    pub fn log_shifted(&self) -> Option<Self> {
        let a = self.value().clone();
        if a.is_zero() {
            return None;
        }
        let inv = F::one() / a;
        let mut taylor = vec![F::zero()];
        let mut p = inv.clone();
        for n in 1..=self.order {
            // (-1)^(n+1) / (n a^n)
            let term = p.clone() / F::from_i64(n as i64);
            taylor.push(if n % 2 == 1 { term } else { -term });
            p = p * inv.clone();
        }
        Some(self.compose(&taylor))
    }

    /// `(cos self, sin self)` for a jet with zero value, given nothing else.
    pub fn cos_sin_nilpotent(&self) -> (Self, Self) {
        let mut cos_t = Vec::with_capacity(self.order + 1);
        let mut sin_t = Vec::with_capacity(self.order + 1);
        let mut fact = F::one();
        for n in 0..=self.order {
            if n > 0 {
                fact = fact * F::from_i64(n as i64);
            }
            let inv = F::one() / fact.clone();
            let (c, s) = match n % 4 {
                0 => (inv, F::zero()),
                1 => (F::zero(), inv),
                2 => (-inv, F::zero()),
                _ => (F::zero(), -inv),
            };
            cos_t.push(c);
            sin_t.push(s);
        }
        (self.compose(&cos_t), self.compose(&sin_t))
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(|x| x.is_zero())
    }

    pub fn map<G: Scalar>(&self, f: impl Fn(&F) -> G) -> Jet<G> {
        Jet { order: self.order, c: self.c.iter().map(f).collect() }
    }
}

/// Exponent list of the graded monomial order, up to `order`.
pub fn monomials(order: usize) -> &'static [[usize; 3]] {
    &LAYOUT.exps[..jet_len(order)]
}
