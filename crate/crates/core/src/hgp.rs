//! Hilbert-space reduced-rank GP on a box.
//!
//! The squared-exponential kernel is approximated by `ΦΛΦᵀ` where `Φ` holds
//! Dirichlet Laplacian eigenfunctions of the box and `λ_i` is the kernel's
//! spectral density at the eigenfunction's frequency. Fitting reduces to the
//! dual statistics `α = Φᵀy`, `B = ΦᵀΦ`.

use std::f64::consts::PI;
use std::time::Instant;

use faer::linalg::solvers::Solve;
use faer::Mat;
use serde::Serialize;

use crate::basis::{design_matrix, feature_columns, Basis, BoxDomain, HilbertBasis};
use crate::error::{invalid, Error, Result};
use crate::linalg;
use crate::posterior::{dual_from_batch, DualPosterior};
use crate::predictive::PredictiveDistribution;
use crate::selection::{reduce_dual, SelectionResult};

/// Spectral density of the squared-exponential kernel in `dim` dimensions:
/// `σ_f² (2π l²)^{d/2} exp(-l² ω² / 2)`.
pub fn se_spectral_density(omega: f64, kernel_variance: f64, lengthscale: f64, dim: usize) -> f64 {
    let l2 = lengthscale * lengthscale;
    kernel_variance * (2.0 * PI * l2).powf(0.5 * dim as f64) * (-0.5 * l2 * omega * omega).exp()
}

/// `sqrt(Σ_d (π i_d / width_d)²)`, the frequency of the eigenfunction with
/// multi-index `index`.
pub fn laplacian_frequency(index: &[usize], domain: &BoxDomain) -> f64 {
    index
        .iter()
        .enumerate()
        .map(|(k, &m)| (PI * m as f64 / domain.width(k)).powi(2))
        .sum::<f64>()
        .sqrt()
}

#[derive(Debug, Clone, Serialize)]
pub struct HgpModel {
    pub basis: HilbertBasis,
    pub prior_eigenvalues: Vec<f64>,
    pub kernel_variance: f64,
    pub lengthscale: f64,
    pub noise_variance: f64,
}

impl HgpModel {
    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    fn check_inside(&self, points: &[Vec<f64>]) -> Result<()> {
        let domain = self.basis.domain();
        for (index, p) in points.iter().enumerate() {
            if p.len() != domain.dim() {
                return Err(Error::DimensionMismatch {
                    expected: domain.dim(),
                    found: p.len(),
                });
            }
            if !domain.contains_point(p) {
                return Err(Error::PointOutsideDomain { index });
            }
        }
        Ok(())
    }
}

/// Builds the model with `per_dim_count[k]` modes along axis `k`.
pub fn build_hgp(
    domain: BoxDomain,
    per_dim_count: &[usize],
    kernel_variance: f64,
    lengthscale: f64,
    noise_variance: f64,
) -> Result<HgpModel> {
    for (name, v) in [
        ("kernel_variance", kernel_variance),
        ("lengthscale", lengthscale),
        ("noise_variance", noise_variance),
    ] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(invalid(name, format!("must be positive, got {v}")));
        }
    }
    let basis = HilbertBasis::grid(domain, per_dim_count)?;
    let dim = basis.dim();
    let prior_eigenvalues: Vec<f64> = basis
        .indices()
        .iter()
        .map(|idx| {
            let w = laplacian_frequency(idx, basis.domain());
            se_spectral_density(w, kernel_variance, lengthscale, dim)
        })
        .collect();
    if let Some(l) = prior_eigenvalues.iter().find(|l| !(**l > 0.0)) {
        return Err(invalid(
            "lengthscale",
            format!("spectral density underflows to {l} at the highest modes"),
        ));
    }
    Ok(HgpModel {
        basis,
        prior_eigenvalues,
        kernel_variance,
        lengthscale,
        noise_variance,
    })
}

/// Dual statistics of the training data under the model's sine basis.
pub fn hgp_fit(model: &HgpModel, inputs: &[Vec<f64>], outputs: &[f64]) -> Result<DualPosterior> {
    model.check_inside(inputs)?;
    let phi = design_matrix(&model.basis, inputs)?;
    dual_from_batch(
        &phi,
        outputs,
        model.noise_variance,
        &model.prior_eigenvalues,
    )
}

/// Latent predictive `μ* = φ*ᵀ Σ α`, `v* = σ² φ*ᵀ Σ φ*` with
/// `Σ = (B + σ²Λ⁻¹)⁻¹`.
///
/// With a selection only the kept functions take part: the solve uses the
/// principal sub-block `B_JJ` and the test features are evaluated for `J`
/// only. The recorded latency covers the reduction, the factorization and
/// the per-point work, not the training design matrix.
pub fn hgp_predict(
    model: &HgpModel,
    dual: &DualPosterior,
    test_points: &[Vec<f64>],
    selection: Option<&SelectionResult>,
) -> Result<PredictiveDistribution> {
    if dual.len() != model.len() {
        return Err(Error::DimensionMismatch {
            expected: model.len(),
            found: dual.len(),
        });
    }
    model.check_inside(test_points)?;

    let start = Instant::now();
    let reduced;
    let (dual, indices): (&DualPosterior, Vec<usize>) = match selection {
        Some(sel) => {
            reduced = reduce_dual(dual, sel)?;
            (&reduced, sel.kept.clone())
        }
        None => (dual, (0..model.len()).collect()),
    };
    let mut out = predict_from_dual(&model.basis, &indices, dual, test_points)?;
    out.latency_seconds = Some(start.elapsed().as_secs_f64());
    Ok(out)
}

/// Prediction from a dual whose coordinates correspond to `indices` of `basis`.
pub(crate) fn predict_from_dual<B: Basis + ?Sized>(
    basis: &B,
    indices: &[usize],
    dual: &DualPosterior,
    test_points: &[Vec<f64>],
) -> Result<PredictiveDistribution> {
    let n_test = test_points.len();
    if indices.is_empty() {
        return Ok(PredictiveDistribution {
            means: vec![0.0; n_test],
            variances: vec![0.0; n_test],
            latency_seconds: None,
        });
    }
    let mut precision = dual.b_matrix().clone();
    for (i, l) in dual.prior_eigenvalues().iter().enumerate() {
        precision[(i, i)] += dual.noise_variance() / l;
    }
    let llt = linalg::cholesky_with_jitter(&precision)?;
    let alpha = Mat::from_fn(dual.len(), 1, |i, _| dual.alpha()[i]);
    let weights = llt.solve(&alpha);

    // column t of `features` is φ_J(x*_t); overwritten by L⁻¹ φ_J(x*_t)
    let mut features = feature_columns(basis, indices, test_points)?;
    let means: Vec<f64> = (0..n_test)
        .map(|t| {
            features
                .col(t)
                .iter()
                .zip(weights.col(0).iter())
                .map(|(a, b)| a * b)
                .sum()
        })
        .collect();
    llt.L().solve_lower_triangular_in_place(features.as_mut());
    let variances = (0..n_test)
        .map(|t| dual.noise_variance() * features.col(t).iter().map(|v| v * v).sum::<f64>())
        .collect();

    let mut out = PredictiveDistribution {
        means,
        variances,
        latency_seconds: None,
    };
    out.clamp_variances();
    Ok(out)
}
