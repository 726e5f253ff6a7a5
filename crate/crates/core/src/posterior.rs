//! Gaussian weight posteriors in moment form `(m, S)` and information form
//! `(α, B)`.
//!
//! Both forms describe `θ | y ~ N(m, S)` with
//! `Σ = (ΦᵀΦ + σ² Λ⁻¹)⁻¹`, `m = Σ Φᵀ y` and `S = σ² Σ`, so the prior is
//! `θ ~ N(0, Λ)`.

use faer::linalg::solvers::DenseSolveCore;
use faer::Mat;

use crate::basis::Basis;
use crate::error::{invalid, Error, Result};
use crate::linalg;

#[derive(Debug, Clone, PartialEq)]
pub struct MomentPosterior {
    pub mean: Vec<f64>,
    pub covariance: Mat<f64>,
}

impl MomentPosterior {
    pub fn len(&self) -> usize {
        self.mean.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mean.is_empty()
    }
}

/// Sufficient statistics `α = Φᵀy`, `B = ΦᵀΦ` together with the prior
/// eigenvalues and noise variance needed to turn them into a posterior.
///
/// The diagonal of `B` is also kept contiguously so that the O(L) selection
/// score does not stride through the full matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DualPosterior {
    alpha: Vec<f64>,
    b_matrix: Mat<f64>,
    b_diagonal: Vec<f64>,
    prior_eigenvalues: Vec<f64>,
    noise_variance: f64,
    count: usize,
}

fn check_prior(noise_variance: f64, prior_eigenvalues: &[f64]) -> Result<()> {
    if !(noise_variance > 0.0 && noise_variance.is_finite()) {
        return Err(invalid(
            "noise_variance",
            format!("must be positive, got {noise_variance}"),
        ));
    }
    if let Some(l) = prior_eigenvalues
        .iter()
        .find(|l| !(**l > 0.0 && l.is_finite()))
    {
        return Err(invalid(
            "prior_eigenvalues",
            format!("must be positive, got {l}"),
        ));
    }
    Ok(())
}

fn check_data(phi: &Mat<f64>, y: &[f64], prior_eigenvalues: &[f64]) -> Result<()> {
    if phi.nrows() != y.len() {
        return Err(Error::LengthMismatch {
            left: phi.nrows(),
            right: y.len(),
        });
    }
    if phi.ncols() != prior_eigenvalues.len() {
        return Err(Error::DimensionMismatch {
            expected: prior_eigenvalues.len(),
            found: phi.ncols(),
        });
    }
    Ok(())
}

/// `(B + σ² Λ⁻¹)` with `B` given explicitly.
fn precision(b: &Mat<f64>, noise_variance: f64, prior_eigenvalues: &[f64]) -> Mat<f64> {
    let mut a = b.clone();
    for (i, l) in prior_eigenvalues.iter().enumerate() {
        a[(i, i)] += noise_variance / l;
    }
    a
}

fn moments_from_precision(
    a: &Mat<f64>,
    alpha: &[f64],
    noise_variance: f64,
) -> Result<MomentPosterior> {
    if a.nrows() == 0 {
        return Ok(MomentPosterior {
            mean: Vec::new(),
            covariance: Mat::zeros(0, 0),
        });
    }
    let llt = linalg::cholesky_with_jitter(a)?;
    let mean = linalg::solve_vec(&llt, alpha);
    let mut covariance = llt.inverse();
    linalg::symmetrize(&mut covariance);
    for j in 0..covariance.ncols() {
        for i in 0..covariance.nrows() {
            covariance[(i, j)] *= noise_variance;
        }
    }
    Ok(MomentPosterior { mean, covariance })
}

/// Conjugate posterior of `y = Φθ + ε`, `ε ~ N(0, σ² I)`, `θ ~ N(0, Λ)`.
pub fn fit_moment(
    phi: &Mat<f64>,
    y: &[f64],
    noise_variance: f64,
    prior_eigenvalues: &[f64],
) -> Result<MomentPosterior> {
    check_prior(noise_variance, prior_eigenvalues)?;
    check_data(phi, y, prior_eigenvalues)?;
    let b = linalg::gram(phi);
    let alpha = linalg::transpose_times(phi, y);
    moments_from_precision(
        &precision(&b, noise_variance, prior_eigenvalues),
        &alpha,
        noise_variance,
    )
}

impl DualPosterior {
    /// Assembles a dual from its parts; `b_matrix` must be `L × L` with
    /// `L = alpha.len() = prior_eigenvalues.len()`.
    pub fn new(
        alpha: Vec<f64>,
        b_matrix: Mat<f64>,
        prior_eigenvalues: Vec<f64>,
        noise_variance: f64,
        count: usize,
    ) -> Result<Self> {
        check_prior(noise_variance, &prior_eigenvalues)?;
        let l = prior_eigenvalues.len();
        if alpha.len() != l {
            return Err(Error::DimensionMismatch {
                expected: l,
                found: alpha.len(),
            });
        }
        if b_matrix.nrows() != l || b_matrix.ncols() != l {
            return Err(Error::DimensionMismatch {
                expected: l,
                found: if b_matrix.nrows() != l {
                    b_matrix.nrows()
                } else {
                    b_matrix.ncols()
                },
            });
        }
        let b_diagonal = (0..l).map(|i| b_matrix[(i, i)]).collect();
        Ok(Self {
            alpha,
            b_matrix,
            b_diagonal,
            prior_eigenvalues,
            noise_variance,
            count,
        })
    }

    /// The dual with no observations absorbed.
    pub fn empty(noise_variance: f64, prior_eigenvalues: Vec<f64>) -> Result<Self> {
        let l = prior_eigenvalues.len();
        Self::new(
            vec![0.0; l],
            Mat::zeros(l, l),
            prior_eigenvalues,
            noise_variance,
            0,
        )
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn b_matrix(&self) -> &Mat<f64> {
        &self.b_matrix
    }

    /// `diag(B)`.
    pub fn b_diagonal(&self) -> &[f64] {
        &self.b_diagonal
    }

    pub fn prior_eigenvalues(&self) -> &[f64] {
        &self.prior_eigenvalues
    }

    pub fn noise_variance(&self) -> f64 {
        self.noise_variance
    }

    /// Number of absorbed observations.
    pub fn count(&self) -> usize {
        self.count
    }

    pub fn len(&self) -> usize {
        self.alpha.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alpha.is_empty()
    }

    /// Absorbs one observation in place: `α += φ y`, `B += φ φᵀ`.
    pub fn absorb(&mut self, features: &[f64], y: f64) -> Result<()> {
        if features.len() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                found: features.len(),
            });
        }
        for (j, &fj) in features.iter().enumerate() {
            self.alpha[j] += fj * y;
            if fj == 0.0 {
                continue;
            }
            for (i, &fi) in features.iter().enumerate() {
                self.b_matrix[(i, j)] += fi * fj;
            }
            self.b_diagonal[j] = self.b_matrix[(j, j)];
        }
        self.count += 1;
        Ok(())
    }

    /// Approximate memory held by `α`, `B`, `diag(B)` and `Λ`, in bytes.
    pub fn footprint_bytes(&self) -> usize {
        let l = self.len();
        std::mem::size_of::<f64>() * (3 * l + l * l)
    }
}

/// `α = Φᵀy`, `B = ΦᵀΦ` from a batch of observations.
pub fn dual_from_batch(
    phi: &Mat<f64>,
    y: &[f64],
    noise_variance: f64,
    prior_eigenvalues: &[f64],
) -> Result<DualPosterior> {
    check_prior(noise_variance, prior_eigenvalues)?;
    check_data(phi, y, prior_eigenvalues)?;
    DualPosterior::new(
        linalg::transpose_times(phi, y),
        linalg::gram(phi),
        prior_eigenvalues.to_vec(),
        noise_variance,
        y.len(),
    )
}

/// Functional form of [`DualPosterior::absorb`].
pub fn dual_accumulate(dual: &DualPosterior, features: &[f64], y: f64) -> Result<DualPosterior> {
    let mut next = dual.clone();
    next.absorb(features, y)?;
    Ok(next)
}

/// Streams the rows of a design matrix through [`DualPosterior::absorb`].
pub fn dual_from_stream<B: Basis + ?Sized>(
    basis: &B,
    points: &[Vec<f64>],
    y: &[f64],
    noise_variance: f64,
    prior_eigenvalues: Vec<f64>,
) -> Result<DualPosterior> {
    if points.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: points.len(),
            right: y.len(),
        });
    }
    let mut dual = DualPosterior::empty(noise_variance, prior_eigenvalues)?;
    let all: Vec<usize> = (0..basis.len()).collect();
    let mut row = vec![0.0; basis.len()];
    for (p, &yn) in points.iter().zip(y) {
        if p.len() != basis.dim() {
            return Err(Error::DimensionMismatch {
                expected: basis.dim(),
                found: p.len(),
            });
        }
        basis.fill_values(p, &all, &mut row);
        dual.absorb(&row, yn)?;
    }
    Ok(dual)
}

/// The `O(L³)` conversion `Σ = (B + σ²Λ⁻¹)⁻¹`, `m = Σα`, `S = σ²Σ`.
pub fn dual_to_moment(dual: &DualPosterior) -> Result<MomentPosterior> {
    let a = precision(&dual.b_matrix, dual.noise_variance, &dual.prior_eigenvalues);
    moments_from_precision(&a, &dual.alpha, dual.noise_variance)
}

/// `Σ_ii ≈ 1 / (B_ii + σ²/λ_i)`, reading only the diagonal of `B`.
pub fn dual_diag_sigma(dual: &DualPosterior) -> Vec<f64> {
    dual.prior_eigenvalues
        .iter()
        .zip(&dual.b_diagonal)
        .map(|(l, b)| 1.0 / (b + dual.noise_variance / l))
        .collect()
}
