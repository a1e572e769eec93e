//! Dense symmetric factorizations used by the solvers.
//!
//! Desk-scale problems (n in the hundreds) fit comfortably in dense
//! storage, so the penalized solvers lean on a plain Cholesky factorization
//! that is cached across iterations and a cyclic Jacobi eigensolver for the
//! few places that need spectra (numerical rank, minimum-norm least
//! squares). No LAPACK binding is involved.

use ndarray::{Array1, Array2};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LinalgError {
    #[error("matrix is not positive definite (pivot {pivot} at index {index})")]
    NotPositiveDefinite { index: usize, pivot: f64 },
    #[error("matrix must be square, got {0}x{1}")]
    NotSquare(usize, usize),
}

/// Lower-triangular Cholesky factor of a symmetric positive-definite matrix.
///
/// The transpose is stored as well so both triangular solves walk rows.
#[derive(Debug, Clone)]
pub struct Cholesky {
    l: Array2<f64>,
    lt: Array2<f64>,
    n: usize,
}

impl Cholesky {
    pub fn factor(a: &Array2<f64>) -> Result<Self, LinalgError> {
        let (n, m) = a.dim();
        if n != m {
            return Err(LinalgError::NotSquare(n, m));
        }
        let mut l = a.clone();
        let ls = l.as_slice_mut().expect("contiguous");
        for j in 0..n {
            let mut d = ls[j * n + j];
            for k in 0..j {
                d -= ls[j * n + k] * ls[j * n + k];
            }
            if !(d > 0.0) || !d.is_finite() {
                return Err(LinalgError::NotPositiveDefinite { index: j, pivot: d });
            }
            let dj = d.sqrt();
            ls[j * n + j] = dj;
            for i in (j + 1)..n {
                let mut s = ls[i * n + j];
                for k in 0..j {
                    s -= ls[i * n + k] * ls[j * n + k];
                }
                ls[i * n + j] = s / dj;
            }
        }
        // zero the strict upper triangle so `l` really is the factor
        for i in 0..n {
            for j in (i + 1)..n {
                ls[i * n + j] = 0.0;
            }
        }
        let lt = l.t().as_standard_layout().to_owned();
        Ok(Cholesky { l, lt, n })
    }

    /// Solve A x = b given A = L L^T.
    pub fn solve(&self, b: &Array1<f64>) -> Array1<f64> {
        debug_assert_eq!(b.len(), self.n);
        let mut x = b.clone();
        self.solve_in_place(&mut x);
        x
    }

    pub fn solve_in_place(&self, x: &mut Array1<f64>) {
        self.solve_slice(x.as_slice_mut().unwrap());
    }

    pub fn solve_slice(&self, xs: &mut [f64]) {
        let n = self.n;
        let ls = self.l.as_slice().unwrap();
        let us = self.lt.as_slice().unwrap();
        for i in 0..n {
            let mut s = xs[i];
            for k in 0..i {
                s -= ls[i * n + k] * xs[k];
            }
            xs[i] = s / ls[i * n + i];
        }
        for i in (0..n).rev() {
            let mut s = xs[i];
            for k in (i + 1)..n {
                s -= us[i * n + k] * xs[k];
            }
            xs[i] = s / us[i * n + i];
        }
    }
}

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// Returns eigenvalues in ascending order with matching eigenvector columns.
pub fn jacobi_eigh(a: &Array2<f64>) -> (Array1<f64>, Array2<f64>) {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "jacobi_eigh needs a square matrix");
    let mut m = a.clone();
    let mut v: Array2<f64> = Array2::eye(n);
    if n <= 1 {
        return (m.diag().to_owned(), v);
    }
    let max_sweeps = 64;
    for _ in 0..max_sweeps {
        let mut off = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                off = off.max(m[[i, j]].abs());
            }
        }
        let scale = m.iter().fold(0.0f64, |s, x| s.max(x.abs()));
        if off <= 1e-14 * scale.max(1e-300) {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[[p, q]];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let app = m[[p, p]];
                let aqq = m[[q, q]];
                let tau = (aqq - app) / (2.0 * apq);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[[k, p]];
                    let mkq = m[[k, q]];
                    m[[k, p]] = c * mkp - s * mkq;
                    m[[k, q]] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[[p, k]];
                    let mqk = m[[q, k]];
                    m[[p, k]] = c * mpk - s * mqk;
                    m[[q, k]] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[[k, p]];
                    let vkq = v[[k, q]];
                    v[[k, p]] = c * vkp - s * vkq;
                    v[[k, q]] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| m[[i, i]]).collect();
    order.sort_by(|&i, &j| diag[i].partial_cmp(&diag[j]).unwrap());
    let eigvals = Array1::from_iter(order.iter().map(|&i| diag[i]));
    let mut eigvecs = Array2::zeros((n, n));
    for (newcol, &oldcol) in order.iter().enumerate() {
        for r in 0..n {
            eigvecs[[r, newcol]] = v[[r, oldcol]];
        }
    }
    (eigvals, eigvecs)
}

/// Largest eigenvalue of a symmetric PSD matrix by power iteration.
pub fn power_iter_sym(a: &Array2<f64>, steps: usize, tol: f64) -> f64 {
    let n = a.nrows();
    if n == 0 {
        return 0.0;
    }
    let mut x = Array1::from_elem(n, 1.0 / (n as f64).sqrt());
    // deterministic tie-break perturbation
    for (i, v) in x.iter_mut().enumerate() {
        *v += 1e-3 * ((i % 7) as f64 - 3.0) / (n as f64);
    }
    let norm = x.dot(&x).sqrt();
    x.mapv_inplace(|v| v / norm);
    let mut lambda = 0.0f64;
    for _ in 0..steps {
        let y = a.dot(&x);
        let ny = y.dot(&y).sqrt();
        if ny == 0.0 {
            return 0.0;
        }
        let next = y.dot(&x);
        x = y / ny;
        if (next - lambda).abs() <= tol * next.abs().max(1.0) {
            return next;
        }
        lambda = next;
    }
    lambda
}

/// Minimum-norm least-squares solution of X b = y (no regularization).
///
/// Goes through the eigendecomposition of the smaller Gram matrix and
/// truncates eigenvalues below `1e-12 * lambda_max`.
pub fn min_norm_least_squares(x: &Array2<f64>, y: &Array1<f64>) -> Array1<f64> {
    let (n_rows, n_cols) = x.dim();
    if n_rows <= n_cols {
        // b = X^T (X X^T)^+ y
        let g = x.dot(&x.t());
        let (vals, vecs) = jacobi_eigh(&g);
        let cutoff = vals[vals.len() - 1].max(0.0) * 1e-12;
        let mut w = Array1::zeros(n_rows);
        for k in 0..n_rows {
            if vals[k] > cutoff {
                let coef = vecs.column(k).dot(y) / vals[k];
                w = w + coef * &vecs.column(k).to_owned();
            }
        }
        x.t().dot(&w)
    } else {
        // b = (X^T X)^+ X^T y
        let g = x.t().dot(x);
        let (vals, vecs) = jacobi_eigh(&g);
        let cutoff = vals[vals.len() - 1].max(0.0) * 1e-12;
        let xty = x.t().dot(y);
        let mut b = Array1::zeros(n_cols);
        for k in 0..n_cols {
            if vals[k] > cutoff {
                let coef = vecs.column(k).dot(&xty) / vals[k];
                b = b + coef * &vecs.column(k).to_owned();
            }
        }
        b
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::CounterRng;
    use ndarray::array;

    fn random_spd(n: usize, seed: u64) -> Array2<f64> {
        let mut rng = CounterRng::new(seed, 0);
        let b = Array2::from_shape_fn((n, n), |_| rng.normal());
        b.t().dot(&b) + Array2::<f64>::eye(n) * 0.5
    }

    #[test]
    fn cholesky_solves() {
        let a = random_spd(12, 3);
        let mut rng = CounterRng::new(4, 0);
        let b = Array1::from_shape_fn(12, |_| rng.normal());
        let f = Cholesky::factor(&a).unwrap();
        let x = f.solve(&b);
        let r = &a.dot(&x) - &b;
        assert!(r.iter().all(|v| v.abs() < 1e-10));
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let a = array![[1.0, 2.0], [2.0, 1.0]];
        assert!(Cholesky::factor(&a).is_err());
    }

    #[test]
    fn jacobi_reconstructs() {
        let a = random_spd(10, 7);
        let (vals, vecs) = jacobi_eigh(&a);
        let lam = Array2::from_diag(&vals);
        let rec = vecs.dot(&lam).dot(&vecs.t());
        for (x, y) in rec.iter().zip(a.iter()) {
            assert!((x - y).abs() < 1e-9);
        }
        for k in 1..vals.len() {
            assert!(vals[k] >= vals[k - 1]);
        }
    }

    #[test]
    fn power_iteration_matches_jacobi() {
        let a = random_spd(15, 11);
        let (vals, _) = jacobi_eigh(&a);
        let top = power_iter_sym(&a, 1000, 1e-12);
        assert!((top - vals[vals.len() - 1]).abs() < 1e-6 * vals[vals.len() - 1]);
    }

    #[test]
    fn min_norm_underdetermined() {
        let mut rng = CounterRng::new(5, 0);
        let x = Array2::from_shape_fn((4, 9), |_| rng.normal());
        let y = Array1::from_shape_fn(4, |_| rng.normal());
        let b = min_norm_least_squares(&x, &y);
        let r = &x.dot(&b) - &y;
        assert!(r.iter().all(|v| v.abs() < 1e-9), "interpolates");
        // minimum-norm solution lies in the row space of X
        let g = x.dot(&x.t());
        let w = Cholesky::factor(&g).unwrap().solve(&x.dot(&b));
        let proj = x.t().dot(&w);
        for (u, v) in proj.iter().zip(b.iter()) {
            assert!((u - v).abs() < 1e-8);
        }
    }

    #[test]
    fn min_norm_overdetermined_matches_normal_eqs() {
        let mut rng = CounterRng::new(6, 0);
        let x = Array2::from_shape_fn((20, 5), |_| rng.normal());
        let y = Array1::from_shape_fn(20, |_| rng.normal());
        let b = min_norm_least_squares(&x, &y);
        let g = x.t().dot(&x);
        let f = Cholesky::factor(&g).unwrap();
        let b2 = f.solve(&x.t().dot(&y));
        for (u, v) in b.iter().zip(b2.iter()) {
            assert!((u - v).abs() < 1e-8);
        }
    }
}
