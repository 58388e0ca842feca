use nalgebra::{Matrix3, SymmetricEigen};
use serde::Serialize;

use super::tensor::{Metric3, Sym2};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Eigen-decomposition of a symmetric form relative to a metric.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EigenReport {
    /// Ascending.
    pub eigenvalues: [f64; 3],
    /// `g`-orthonormal, first nonzero component positive.
    pub eigenvectors: [[f64; 3]; 3],
}

/// Solves `A v = lambda g v` in double precision.
pub fn eigen_report<F: Scalar>(g: &Metric3<F>, a: &Sym2<F>) -> Result<EigenReport> {
    let gm = to_na(g.form());
    let am = to_na(a);
    let chol = gm
        .cholesky()
        .ok_or_else(|| Error::SingularMetric("Cholesky factorisation failed".into()))?;
    let l = chol.l();
    let l_inv = l
        .try_inverse()
        .ok_or_else(|| Error::SingularMetric("triangular factor is singular".into()))?;
    let reduced = l_inv * am * l_inv.transpose();
    let reduced = (reduced + reduced.transpose()) * 0.5;
    let eig = SymmetricEigen::new(reduced);
    let back = l_inv.transpose() * eig.eigenvectors;

    let mut order: Vec<usize> = (0..3).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));

    let mut eigenvalues = [0.0; 3];
    let mut eigenvectors = [[0.0; 3]; 3];
    for (slot, &k) in order.iter().enumerate() {
        eigenvalues[slot] = eig.eigenvalues[k];
        let mut v = [back[(0, k)], back[(1, k)], back[(2, k)]];
        let scale = v.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(1.0);
        if let Some(first) = v.iter().find(|x| x.abs() > 1e-12 * scale) {
            if *first < 0.0 {
                v.iter_mut().for_each(|x| *x = -*x);
            }
        }
        eigenvectors[slot] = v;
    }
    Ok(EigenReport { eigenvalues, eigenvectors })
}

fn to_na<F: Scalar>(a: &Sym2<F>) -> Matrix3<f64> {
    Matrix3::from_fn(|i, j| a.get(i, j).to_f64())
}

impl EigenReport {
    /// Largest deviation of the eigenvalues from `expected` (both ascending).
    pub fn deviation_from(&self, expected: [f64; 3]) -> f64 {
        self.eigenvalues.iter().zip(expected).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generalized_eigenpairs_are_sorted_and_orthonormal() {
        let g = Metric3::new(Sym2([2.0, 0.3, 0.0, 1.5, -0.2, 1.0])).unwrap();
        let a = Sym2([1.0, 0.5, -0.3, -2.0, 0.1, 0.7]);
        let rep = eigen_report(&g, &a).unwrap();
        assert!(rep.eigenvalues[0] <= rep.eigenvalues[1] && rep.eigenvalues[1] <= rep.eigenvalues[2]);
        for i in 0..3 {
            let vi = crate::algebra3::Vec3(rep.eigenvectors[i]);
            let av = a.apply(&vi);
            let gv = g.form().apply(&vi);
            for k in 0..3 {
                assert!((av[k] - rep.eigenvalues[i] * gv[k]).abs() < 1e-12);
            }
            for j in 0..3 {
                let vj = crate::algebra3::Vec3(rep.eigenvectors[j]);
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((g.inner(&vi, &vj) - expect).abs() < 1e-12);
            }
            let first = vi.0.iter().find(|x| x.abs() > 1e-12).unwrap();
            assert!(*first > 0.0);
        }
    }

    #[test]
    fn product_structure_is_recovered() {
        let g = Metric3::<f64>::euclidean();
        let rep = eigen_report(&g, &Sym2::diag(-3.0, 0.0, -3.0)).unwrap();
        assert!(rep.deviation_from([-3.0, -3.0, 0.0]) < 1e-14);
        assert!((rep.eigenvectors[2][1] - 1.0).abs() < 1e-14);
    }
}
