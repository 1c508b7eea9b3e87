//! Dense linear-algebra helpers shared by the measure and Fourier modules.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

/// Logarithm of a determinant, split into modulus and phase.
///
/// `log_abs` is `ln |det|`; `phase` is the unit complex number `det / |det|`,
/// accumulated from the LU pivots so that large matrices cannot overflow.
#[derive(Debug, Clone, Copy)]
pub struct LogDet {
    pub log_abs: f64,
    pub phase: Complex64,
    /// Smallest pivot modulus met during elimination.
    pub min_pivot: f64,
}

impl LogDet {
    pub fn is_singular(&self) -> bool {
        self.log_abs == f64::NEG_INFINITY
    }
}

/// LU with partial pivoting on a complex matrix, consuming it.
pub fn complex_log_det(mut a: DMatrix<Complex64>) -> LogDet {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "log-det of a non-square matrix");
    let mut log_abs = 0.0;
    let mut phase = Complex64::new(1.0, 0.0);
    let mut min_pivot = f64::INFINITY;
    for k in 0..n {
        let mut best = k;
        let mut best_norm = a[(k, k)].norm();
        for i in k + 1..n {
            let v = a[(i, k)].norm();
            if v > best_norm {
                best = i;
                best_norm = v;
            }
        }
        min_pivot = min_pivot.min(best_norm);
        if best_norm == 0.0 {
            return LogDet {
                log_abs: f64::NEG_INFINITY,
                phase: Complex64::new(0.0, 0.0),
                min_pivot: 0.0,
            };
        }
        if best != k {
            a.swap_rows(best, k);
            phase = -phase;
        }
        let pivot = a[(k, k)];
        log_abs += best_norm.ln();
        phase *= pivot / best_norm;
        let inv = pivot.inv();
        for i in k + 1..n {
            let factor = a[(i, k)] * inv;
            if factor == Complex64::new(0.0, 0.0) {
                continue;
            }
            for j in k + 1..n {
                let delta = factor * a[(k, j)];
                a[(i, j)] -= delta;
            }
        }
    }
    LogDet {
        log_abs,
        phase,
        min_pivot,
    }
}

/// Log-determinant of a real matrix via the complex routine.
pub fn real_log_det(a: &DMatrix<f64>) -> LogDet {
    complex_log_det(a.map(|x| Complex64::new(x, 0.0)))
}

/// Eigenvalues of a symmetric matrix in ascending order.
pub fn symmetric_eigenvalues(a: &DMatrix<f64>) -> Vec<f64> {
    let eig = SymmetricEigen::new(a.clone());
    let mut values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    values.sort_by(|x, y| x.total_cmp(y));
    values
}

pub fn identity_minus(p: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let n = p.nrows();
    DMatrix::from_fn(n, n, |i, j| {
        let id = if i == j { 1.0 } else { 0.0 };
        Complex64::new(id, 0.0) - p[(i, j)]
    })
}
