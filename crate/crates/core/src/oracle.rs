//! Brute-force reference routines on full index arrays.
//!
//! Nothing here touches the pair-basis storage of [`crate::algebra3::Curv3`]
//! or the closed-form identities built on it; every routine sums over all
//! indices directly. Test suites compare the optimised paths against these.

use crate::scalar::Scalar;

pub type Mat3<F> = [[F; 3]; 3];

/// Full `(0,4)` array, indexed `27i + 9j + 3k + l`.
pub type Full4<F> = Vec<F>;

#[inline]
pub fn idx4(i: usize, j: usize, k: usize, l: usize) -> usize {
    27 * i + 9 * j + 3 * k + l
}

/// `(A o B)_ijkl = A_ik B_jl + A_jl B_ik - A_il B_jk - A_jk B_il` on all 81 tuples.
pub fn kn_full<F: Scalar>(a: &Mat3<F>, b: &Mat3<F>) -> Full4<F> {
    let mut out = Vec::with_capacity(81);
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                for l in 0..3 {
                    out.push(
                        a[i][k].clone() * b[j][l].clone() + a[j][l].clone() * b[i][k].clone()
                            - a[i][l].clone() * b[j][k].clone()
                            - a[j][k].clone() * b[i][l].clone(),
                    );
                }
            }
        }
    }
    out
}

/// `Ric_jk = g^{il} R_ijkl`, `s = g^{jk} Ric_jk`.
pub fn ricci_full<F: Scalar>(r: &Full4<F>, ginv: &Mat3<F>) -> (Mat3<F>, F) {
    let ric: Mat3<F> = std::array::from_fn(|j| {
        std::array::from_fn(|k| {
            let mut acc = F::zero();
            for i in 0..3 {
                for l in 0..3 {
                    acc = acc + ginv[i][l].clone() * r[idx4(i, j, k, l)].clone();
                }
            }
            acc
        })
    });
    let mut s = F::zero();
    for j in 0..3 {
        for k in 0..3 {
            s = s + ginv[j][k].clone() * ric[j][k].clone();
        }
    }
    (ric, s)
}

fn raise_last_three<F: Scalar>(r: &Full4<F>, ginv: &Mat3<F>) -> Full4<F> {
    // R_a^{ijk}, raising one slot at a time.
    let mut cur = r.clone();
    for slot in 1..4 {
        let mut next = vec![F::zero(); 81];
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    for l in 0..3 {
                        let mut idx = [i, j, k, l];
                        let free = idx[slot];
                        let mut acc = F::zero();
                        for m in 0..3 {
                            idx[slot] = m;
                            acc = acc + ginv[free][m].clone() * cur[idx4(idx[0], idx[1], idx[2], idx[3])].clone();
                        }
                        next[idx4(i, j, k, l)] = acc;
                    }
                }
            }
        }
        cur = next;
    }
    cur
}

/// `(R o R)_ab = (1/2) R_aijk R_b^{ijk}`.
pub fn curv_square_full<F: Scalar>(r: &Full4<F>, ginv: &Mat3<F>) -> Mat3<F> {
    let up = raise_last_three(r, ginv);
    std::array::from_fn(|a| {
        std::array::from_fn(|b| {
            let mut acc = F::zero();
            for i in 0..3 {
                for j in 0..3 {
                    for k in 0..3 {
                        acc = acc + r[idx4(a, i, j, k)].clone() * up[idx4(b, i, j, k)].clone();
                    }
                }
            }
            acc * F::ratio(1, 2)
        })
    })
}

/// `|R|^2 = (1/4) R_ijkl R^ijkl`.
pub fn curv_norm_full<F: Scalar>(r: &Full4<F>, ginv: &Mat3<F>) -> F {
    let up = raise_last_three(r, ginv);
    // Raise the first slot too.
    let mut acc = F::zero();
    for i in 0..3 {
        for m in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    for l in 0..3 {
                        acc = acc + ginv[i][m].clone() * r[idx4(m, j, k, l)].clone() * up[idx4(i, j, k, l)].clone();
                    }
                }
            }
        }
    }
    acc * F::ratio(1, 4)
}

/// `w_kl = v1^i v2^j R_ijkl`.
pub fn bivector_action_full<F: Scalar>(r: &Full4<F>, v1: &[F; 3], v2: &[F; 3]) -> Mat3<F> {
    std::array::from_fn(|k| {
        std::array::from_fn(|l| {
            let mut acc = F::zero();
            for i in 0..3 {
                for j in 0..3 {
                    acc = acc + v1[i].clone() * v2[j].clone() * r[idx4(i, j, k, l)].clone();
                }
            }
            acc
        })
    })
}

/// Largest violation of `R_ijkl = -R_jikl = -R_ijlk = R_klij` and the first
/// Bianchi identity, over every index tuple.
pub fn curvature_symmetry_defect<F: Scalar>(r: &Full4<F>) -> F {
    let mut worst = F::zero();
    let mut bump = |x: F| {
        let x = x.abs();
        if x > worst {
            worst = x;
        }
    };
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                for l in 0..3 {
                    let v = r[idx4(i, j, k, l)].clone();
                    bump(v.clone() + r[idx4(j, i, k, l)].clone());
                    bump(v.clone() + r[idx4(i, j, l, k)].clone());
                    bump(v.clone() - r[idx4(k, l, i, j)].clone());
                    bump(v + r[idx4(j, k, i, l)].clone() + r[idx4(k, i, j, l)].clone());
                }
            }
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    #[test]
    fn unit_sphere_like_tensor() {
        // -(1/2) g o g has sectional curvature +1 and Ric = 2g.
        let id: Mat3<Rational> = std::array::from_fn(|i| {
            std::array::from_fn(|j| if i == j { Rational::from_i64(1) } else { Rational::from_i64(0) })
        });
        let r: Full4<Rational> = kn_full(&id, &id).into_iter().map(|x| -x / Rational::from_i64(2)).collect();
        assert_eq!(curvature_symmetry_defect(&r), Rational::from_i64(0));
        let (ric, s) = ricci_full(&r, &id);
        assert_eq!(ric[0][0], Rational::from_i64(2));
        assert_eq!(s, Rational::from_i64(6));
        assert_eq!(curv_norm_full(&r, &id), Rational::from_i64(3));
        assert_eq!(curv_square_full(&r, &id)[1][1], Rational::from_i64(2));
    }
}
