//! Dense Cholesky helpers shared by the posterior, HGP and exact-GP code.

use faer::linalg::solvers::Llt;
use faer::{Mat, Side};

use crate::error::{Error, Result};

/// Relative jitter levels tried, in order, after a plain factorization fails.
pub const JITTER_LEVELS: [f64; 3] = [1e-12, 1e-10, 1e-8];

/// Cholesky factorization of a symmetric positive-definite matrix.
///
/// On failure, `eps * mean(diag) * I` is added for each `eps` in
/// [`JITTER_LEVELS`] before giving up.
pub fn cholesky_with_jitter(a: &Mat<f64>) -> Result<Llt<f64>> {
    debug_assert_eq!(a.nrows(), a.ncols());
    if let Ok(llt) = a.llt(Side::Lower) {
        return Ok(llt);
    }
    let n = a.nrows();
    let mean_diag = (0..n).map(|i| a[(i, i)]).sum::<f64>() / n.max(1) as f64;
    let scale = if mean_diag > 0.0 { mean_diag } else { 1.0 };
    let mut jittered = a.clone();
    let mut added = 0.0;
    for eps in JITTER_LEVELS {
        let target = eps * scale;
        for i in 0..n {
            jittered[(i, i)] += target - added;
        }
        added = target;
        if let Ok(llt) = jittered.llt(Side::Lower) {
            log::debug!("cholesky of {n}x{n} needed relative jitter {eps:e}");
            return Ok(llt);
        }
    }
    Err(Error::NotPositiveDefinite { size: n })
}

/// Solves `A x = b` for a single right-hand side given `A`'s factorization.
pub fn solve_vec(llt: &Llt<f64>, b: &[f64]) -> Vec<f64> {
    use faer::linalg::solvers::Solve;
    let rhs = Mat::from_fn(b.len(), 1, |i, _| b[i]);
    let x = llt.solve(&rhs);
    (0..b.len()).map(|i| x[(i, 0)]).collect()
}

/// `AᵀA` for a tall design matrix.
pub fn gram(a: &Mat<f64>) -> Mat<f64> {
    let mut out = a.transpose() * a;
    symmetrize(&mut out);
    out
}

/// `Aᵀ b`.
pub fn transpose_times(a: &Mat<f64>, b: &[f64]) -> Vec<f64> {
    assert_eq!(a.nrows(), b.len());
    (0..a.ncols())
        .map(|j| a.col(j).iter().zip(b).map(|(x, y)| x * y).sum())
        .collect()
}

/// `A x`.
pub fn times_vec(a: &Mat<f64>, x: &[f64]) -> Vec<f64> {
    assert_eq!(a.ncols(), x.len());
    let mut out = vec![0.0; a.nrows()];
    for (j, &xj) in x.iter().enumerate() {
        if xj == 0.0 {
            continue;
        }
        for (o, v) in out.iter_mut().zip(a.col(j).iter()) {
            *o += v * xj;
        }
    }
    out
}

/// Copies the lower triangle onto the upper triangle.
pub fn symmetrize(a: &mut Mat<f64>) {
    let n = a.nrows();
    for j in 0..n {
        for i in (j + 1)..n {
            let v = 0.5 * (a[(i, j)] + a[(j, i)]);
            a[(i, j)] = v;
            a[(j, i)] = v;
        }
    }
}

/// Principal sub-matrix `A[idx, idx]`.
pub fn principal_submatrix(a: &Mat<f64>, idx: &[usize]) -> Mat<f64> {
    Mat::from_fn(idx.len(), idx.len(), |i, j| a[(idx[i], idx[j])])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jitter_rescues_semidefinite_matrix() {
        // rank one, exactly singular
        let a = Mat::from_fn(3, 3, |i, j| ((i + 1) * (j + 1)) as f64);
        let llt = cholesky_with_jitter(&a).unwrap();
        assert_eq!(llt.L().nrows(), 3);
    }

    #[test]
    fn indefinite_matrix_fails() {
        let a = Mat::from_fn(2, 2, |i, j| if i == j { -1.0 } else { 0.0 });
        assert!(matches!(
            cholesky_with_jitter(&a),
            Err(Error::NotPositiveDefinite { size: 2 })
        ));
    }

    #[test]
    fn solve_matches_hand_computation() {
        let a = Mat::from_fn(2, 2, |i, j| if i == j { 4.0 } else { 1.0 });
        let llt = cholesky_with_jitter(&a).unwrap();
        let x = solve_vec(&llt, &[1.0, 2.0]);
        // [[4,1],[1,4]]^-1 [1,2] = [2/15, 7/15]
        assert!((x[0] - 2.0 / 15.0).abs() < 1e-15);
        assert!((x[1] - 7.0 / 15.0).abs() < 1e-15);
    }
}
