//! Exact squared-exponential GP regression and prior sampling.

use faer::linalg::solvers::Solve;
use faer::Mat;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg;
use crate::predictive::PredictiveDistribution;

/// Largest point set [`sample_gp_prior`] will factorize.
pub const MAX_PRIOR_POINTS: usize = 5000;

/// `κ(x, x') = σ_f² exp(-‖x - x'‖² / (2 l²))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeKernel {
    kernel_variance: f64,
    lengthscale: f64,
}

impl SeKernel {
    pub fn new(kernel_variance: f64, lengthscale: f64) -> Result<Self> {
        if !(kernel_variance > 0.0 && kernel_variance.is_finite()) {
            return Err(invalid(
                "kernel_variance",
                format!("must be positive, got {kernel_variance}"),
            ));
        }
        if !(lengthscale > 0.0 && lengthscale.is_finite()) {
            return Err(invalid(
                "lengthscale",
                format!("must be positive, got {lengthscale}"),
            ));
        }
        Ok(Self {
            kernel_variance,
            lengthscale,
        })
    }

    pub fn kernel_variance(&self) -> f64 {
        self.kernel_variance
    }

    pub fn lengthscale(&self) -> f64 {
        self.lengthscale
    }

    pub fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        let r2: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum();
        self.kernel_variance * (-0.5 * r2 / (self.lengthscale * self.lengthscale)).exp()
    }
}

fn check_dims(a: &[Vec<f64>], b: &[Vec<f64>]) -> Result<()> {
    let Some(d) = a.first().or(b.first()).map(Vec::len) else {
        return Ok(());
    };
    if let Some(p) = a.iter().chain(b).find(|p| p.len() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: p.len(),
        });
    }
    Ok(())
}

/// `K[i, j] = κ(a_i, b_j)`.
pub fn kernel_matrix(kernel: &SeKernel, a: &[Vec<f64>], b: &[Vec<f64>]) -> Result<Mat<f64>> {
    check_dims(a, b)?;
    Ok(Mat::from_fn(a.len(), b.len(), |i, j| {
        kernel.eval(&a[i], &b[j])
    }))
}

/// Latent posterior predictive with the prior term included:
/// `μ* = K_*f (K_ff + σ²I)⁻¹ y`, `v* = κ(x*, x*) - k_*fᵀ (K_ff + σ²I)⁻¹ k_f*`.
pub fn gp_predict(
    kernel: &SeKernel,
    inputs: &[Vec<f64>],
    outputs: &[f64],
    noise_variance: f64,
    test_points: &[Vec<f64>],
) -> Result<PredictiveDistribution> {
    if !(noise_variance > 0.0 && noise_variance.is_finite()) {
        return Err(invalid(
            "noise_variance",
            format!("must be positive, got {noise_variance}"),
        ));
    }
    if inputs.len() != outputs.len() {
        return Err(Error::LengthMismatch {
            left: inputs.len(),
            right: outputs.len(),
        });
    }
    check_dims(inputs, test_points)?;
    let n_test = test_points.len();
    if inputs.is_empty() {
        return Ok(PredictiveDistribution {
            means: vec![0.0; n_test],
            variances: vec![kernel.kernel_variance; n_test],
            latency_seconds: None,
        });
    }

    let mut kff = kernel_matrix(kernel, inputs, inputs)?;
    for i in 0..inputs.len() {
        kff[(i, i)] += noise_variance;
    }
    let llt = linalg::cholesky_with_jitter(&kff)?;
    let y = Mat::from_fn(outputs.len(), 1, |i, _| outputs[i]);
    let weights = llt.solve(&y);

    // columns are k_f*(x*_t), overwritten by L⁻¹ k_f*
    let mut cross = kernel_matrix(kernel, inputs, test_points)?;
    let means = (0..n_test)
        .map(|t| {
            cross
                .col(t)
                .iter()
                .zip(weights.col(0).iter())
                .map(|(a, b)| a * b)
                .sum()
        })
        .collect();
    llt.L().solve_lower_triangular_in_place(cross.as_mut());
    let variances = (0..n_test)
        .map(|t| kernel.kernel_variance - cross.col(t).iter().map(|v| v * v).sum::<f64>())
        .collect();

    let mut out = PredictiveDistribution {
        means,
        variances,
        latency_seconds: None,
    };
    out.clamp_variances();
    Ok(out)
}

/// A draw `f = L z` from the zero-mean prior at `points`, with `L Lᵀ = K`
/// (plus escalating jitter if needed) and `z` from a ChaCha8 stream seeded
/// with `seed`.
pub fn sample_gp_prior(kernel: &SeKernel, points: &[Vec<f64>], seed: u64) -> Result<Vec<f64>> {
    if points.len() > MAX_PRIOR_POINTS {
        return Err(invalid(
            "points",
            format!(
                "{} points exceed the dense budget of {MAX_PRIOR_POINTS}",
                points.len()
            ),
        ));
    }
    if points.is_empty() {
        return Ok(Vec::new());
    }
    let k = kernel_matrix(kernel, points, points)?;
    let llt = linalg::cholesky_with_jitter(&k)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let z: Vec<f64> = (0..points.len())
        .map(|_| StandardNormal.sample(&mut rng))
        .collect();
    let l = llt.L();
    let n = points.len();
    let mut f = vec![0.0; n];
    for (j, zj) in z.iter().enumerate() {
        for (i, fi) in f.iter_mut().enumerate().skip(j) {
            *fi += l[(i, j)] * zj;
        }
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, DVector};
    use rand::Rng;

    fn random_points(seed: u64, n: usize, d: usize) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| (0..d).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect()
    }

    #[test]
    fn kernel_examples() {
        let k = SeKernel::new(0.05, 0.1).unwrap();
        assert_eq!(k.eval(&[0.3, 0.1], &[0.3, 0.1]), 0.05);
        let d = 0.1 * 2f64.sqrt();
        assert!((k.eval(&[0.0], &[d]) - 0.05 * (-1.0f64).exp()).abs() < 1e-16);
        assert!(SeKernel::new(0.0, 1.0).is_err());
        assert!(SeKernel::new(1.0, -1.0).is_err());
    }

    #[test]
    fn kernel_matrix_transpose_symmetry() {
        let k = SeKernel::new(1.3, 0.4).unwrap();
        let a = random_points(1, 7, 3);
        let b = random_points(2, 5, 3);
        let kab = kernel_matrix(&k, &a, &b).unwrap();
        let kba = kernel_matrix(&k, &b, &a).unwrap();
        for i in 0..7 {
            for j in 0..5 {
                assert_eq!(kab[(i, j)], kba[(j, i)]);
            }
        }
        let kaa = kernel_matrix(&k, &a, &a).unwrap();
        for i in 0..7 {
            assert_eq!(kaa[(i, i)], 1.3);
        }
        assert!(kernel_matrix(&k, &a, &[vec![0.0]]).is_err());
    }

    #[test]
    fn predict_examples() {
        let k = SeKernel::new(0.05, 0.1).unwrap();
        let p = gp_predict(&k, &[vec![0.2]], &[1.0], 0.01, &[vec![0.2]]).unwrap();
        assert!((p.means[0] - 0.05 / 0.06).abs() < 1e-14);
        let prior = gp_predict(&k, &[], &[], 0.01, &[vec![0.2], vec![-0.4]]).unwrap();
        assert_eq!(prior.means, vec![0.0, 0.0]);
        assert_eq!(prior.variances, vec![0.05, 0.05]);
        assert!(gp_predict(&k, &[vec![0.0]], &[1.0], 0.0, &[vec![0.0]]).is_err());
    }

    #[test]
    fn predict_matches_dense_solve() {
        let k = SeKernel::new(0.8, 0.5).unwrap();
        let x = random_points(3, 25, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let y: Vec<f64> = (0..25).map(|_| rng.random_range(-1.0..1.0)).collect();
        let xs = random_points(5, 10, 2);
        let pred = gp_predict(&k, &x, &y, 0.05, &xs).unwrap();

        let kff = DMatrix::from_fn(25, 25, |i, j| {
            k.eval(&x[i], &x[j]) + if i == j { 0.05 } else { 0.0 }
        });
        let ksf = DMatrix::from_fn(10, 25, |t, i| k.eval(&xs[t], &x[i]));
        let inv = kff.lu().try_inverse().unwrap();
        let mu = &ksf * &inv * DVector::from_column_slice(&y);
        let v = &ksf * &inv * ksf.transpose();
        for t in 0..10 {
            assert!((pred.means[t] - mu[t]).abs() < 1e-10);
            assert!((pred.variances[t] - (0.8 - v[(t, t)])).abs() < 1e-10);
        }
    }

    #[test]
    fn near_noiseless_interpolates() {
        let k = SeKernel::new(1.0, 0.3).unwrap();
        let x: Vec<Vec<f64>> = (0..8).map(|i| vec![-1.0 + 0.28 * i as f64]).collect();
        let y: Vec<f64> = x.iter().map(|p| (2.0 * p[0]).sin()).collect();
        let pred = gp_predict(&k, &x, &y, 1e-8, &x).unwrap();
        for (m, t) in pred.means.iter().zip(&y) {
            assert!((m - t).abs() <= 1e-3);
        }
    }

    #[test]
    fn noisy_kernel_matrix_factorizes() {
        let k = SeKernel::new(0.05, 0.1).unwrap();
        let x = random_points(6, 300, 3);
        let mut kff = kernel_matrix(&k, &x, &x).unwrap();
        for i in 0..300 {
            kff[(i, i)] += 1e-6;
        }
        assert!(kff.llt(faer::Side::Lower).is_ok());
    }

    #[test]
    fn prior_draws_are_deterministic() {
        let k = SeKernel::new(0.05, 0.1).unwrap();
        let x = random_points(7, 50, 3);
        let a = sample_gp_prior(&k, &x, 42).unwrap();
        let b = sample_gp_prior(&k, &x, 42).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, sample_gp_prior(&k, &x, 43).unwrap());
    }

    #[test]
    fn prior_draw_moments() {
        let k = SeKernel::new(0.05, 0.2).unwrap();
        let x = vec![vec![0.0, 0.0], vec![0.2, 0.0], vec![-0.7, 0.5]];
        let draws: Vec<Vec<f64>> = (0..200)
            .map(|s| sample_gp_prior(&k, &x, s).unwrap())
            .collect();
        let n = draws.len() as f64;
        let var0 = draws.iter().map(|d| d[0] * d[0]).sum::<f64>() / n;
        // var of the sample second moment is 2σ⁴/n
        let band = 3.0 * (2.0f64).sqrt() * 0.05 / n.sqrt();
        assert!((var0 - 0.05).abs() < band, "{var0}");

        let var1 = draws.iter().map(|d| d[1] * d[1]).sum::<f64>() / n;
        let cov = draws.iter().map(|d| d[0] * d[1]).sum::<f64>() / n;
        let corr = cov / (var0 * var1).sqrt();
        let target = (-0.5f64).exp();
        // Fisher-z band for a correlation estimate
        let band_z = 3.0 / (n - 3.0).sqrt();
        assert!((corr.atanh() - target.atanh()).abs() < band_z, "{corr}");
    }

    #[test]
    fn prior_budget_enforced() {
        let k = SeKernel::new(1.0, 1.0).unwrap();
        let x = vec![vec![0.0]; MAX_PRIOR_POINTS + 1];
        assert!(sample_gp_prior(&k, &x, 0).is_err());
    }
}
