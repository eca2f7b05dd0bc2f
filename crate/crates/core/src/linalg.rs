//! Dense linear-algebra helpers shared by the signal model and the solvers.

use faer::{Mat, Side};
use nalgebra::{DMatrix, DVector};

// nalgebra's bidiagonal SVD returns wrong factors for many rank-deficient
// inputs, so the decompositions run on faer.

fn to_faer(a: &DMatrix<f64>) -> Mat<f64> {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)])
}

/// Eigenvalues ascending with eigenvectors as columns, for a symmetric matrix.
pub fn symmetric_eigen(a: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let n = a.nrows();
    match to_faer(a).self_adjoint_eigen(Side::Lower) {
        Ok(evd) => {
            let w = evd.S().column_vector();
            let v = evd.U();
            (
                DVector::from_fn(n, |i, _| w[i]),
                DMatrix::from_fn(n, n, |i, j| v[(i, j)]),
            )
        }
        Err(_) => (
            DVector::from_element(n, f64::NAN),
            DMatrix::from_element(n, n, f64::NAN),
        ),
    }
}

/// Eigenvalues of a symmetric matrix, ascending.
pub fn symmetric_eigenvalues(a: &DMatrix<f64>) -> DVector<f64> {
    match to_faer(a).self_adjoint_eigenvalues(Side::Lower) {
        Ok(w) => DVector::from_vec(w),
        Err(_) => DVector::from_element(a.nrows(), f64::NAN),
    }
}

/// Sorted thin SVD `A = U diag(s) V^T` with a deterministic sign convention.
#[derive(Clone, Debug)]
pub struct ThinSvd {
    pub u: DMatrix<f64>,
    pub s: DVector<f64>,
    pub v: DMatrix<f64>,
}

impl ThinSvd {
    /// Full thin SVD (`min(m, n)` triplets), singular values descending.
    ///
    /// Each left singular vector is flipped so that its first component with
    /// magnitude above `1e-12` is positive; the matching right vector is
    /// flipped with it.
    pub fn new(a: &DMatrix<f64>) -> Self {
        let k = a.nrows().min(a.ncols());
        if k == 0 {
            return ThinSvd {
                u: DMatrix::zeros(a.nrows(), 0),
                s: DVector::zeros(0),
                v: DMatrix::zeros(a.ncols(), 0),
            };
        }
        let (mut u, s, mut v) = match to_faer(a).thin_svd() {
            Ok(svd) => {
                let (fu, fs, fv) = (svd.U(), svd.S().column_vector(), svd.V());
                (
                    DMatrix::from_fn(a.nrows(), k, |i, j| fu[(i, j)]),
                    DVector::from_fn(k, |i, _| fs[i]),
                    DMatrix::from_fn(a.ncols(), k, |i, j| fv[(i, j)]),
                )
            }
            Err(_) => (
                DMatrix::from_element(a.nrows(), k, f64::NAN),
                DVector::from_element(k, f64::NAN),
                DMatrix::from_element(a.ncols(), k, f64::NAN),
            ),
        };
        for c in 0..k {
            if first_significant_is_negative(u.column(c).iter().copied()) {
                u.column_mut(c).neg_mut();
                v.column_mut(c).neg_mut();
            }
        }
        ThinSvd { u, s, v }
    }

    /// Singular values only, descending.
    pub fn values(a: &DMatrix<f64>) -> DVector<f64> {
        if a.nrows().min(a.ncols()) == 0 {
            return DVector::zeros(0);
        }
        match to_faer(a).singular_values() {
            Ok(s) => DVector::from_vec(s),
            Err(_) => DVector::from_element(a.nrows().min(a.ncols()), f64::NAN),
        }
    }

    /// `U diag(f(s)) V^T`, dropping triplets mapped to zero.
    pub fn reconstruct_with<F: Fn(usize, f64) -> f64>(&self, f: F) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.u.nrows(), self.v.nrows());
        for (i, &sigma) in self.s.iter().enumerate() {
            let shrunk = f(i, sigma);
            if shrunk > 0.0 {
                out.ger(shrunk, &self.u.column(i), &self.v.column(i), 1.0);
            }
        }
        out
    }

    /// Count of singular values above `rel_tol * s_max`.
    pub fn numerical_rank(&self, rel_tol: f64) -> usize {
        rank_of_values(self.s.as_slice(), rel_tol)
    }
}

pub(crate) fn rank_of_values(s: &[f64], rel_tol: f64) -> usize {
    let smax = s.iter().copied().fold(0.0_f64, f64::max);
    if smax <= 0.0 {
        return 0;
    }
    s.iter().filter(|&&x| x > rel_tol * smax).count()
}

pub(crate) fn first_significant_is_negative(it: impl Iterator<Item = f64>) -> bool {
    for x in it {
        if x.abs() > 1e-12 {
            return x < 0.0;
        }
    }
    false
}

/// Numerical rank at relative tolerance `rel_tol`.
pub fn numerical_rank(a: &DMatrix<f64>, rel_tol: f64) -> usize {
    rank_of_values(ThinSvd::values(a).as_slice(), rel_tol)
}

/// `max_i ||A(i, :)||_2`.
pub fn two_inf_norm(a: &DMatrix<f64>) -> f64 {
    a.row_iter().map(|r| r.norm()).fold(0.0, f64::max)
}

/// Submatrix `A(rows, cols)`.
pub fn submatrix(a: &DMatrix<f64>, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), cols.len(), |i, j| a[(rows[i], cols[j])])
}

/// Rows `A(rows, :)`.
pub fn select_rows(a: &DMatrix<f64>, rows: &[usize]) -> DMatrix<f64> {
    a.select_rows(rows.iter())
}

/// Nearest integer, ties away from zero.
pub fn round_half_away(x: f64) -> i64 {
    x.round() as i64
}

/// Root mean square of a slice; zero for an empty slice.
pub fn rms(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    (values.iter().map(|v| v * v).sum::<f64>() / values.len() as f64).sqrt()
}
