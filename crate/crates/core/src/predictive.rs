//! Pointwise predictive distributions and moment-form prediction.

use faer::Mat;
use serde::Serialize;

use crate::basis::{feature_columns, Basis};
use crate::error::{Error, Result};
use crate::posterior::MomentPosterior;

/// Marginal predictive `N(μ*_t, v*_t)` at each test point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PredictiveDistribution {
    pub means: Vec<f64>,
    pub variances: Vec<f64>,
    pub latency_seconds: Option<f64>,
}

impl PredictiveDistribution {
    pub fn len(&self) -> usize {
        self.means.len()
    }

    pub fn is_empty(&self) -> bool {
        self.means.is_empty()
    }

    pub fn std_devs(&self) -> Vec<f64> {
        self.variances.iter().map(|v| v.sqrt()).collect()
    }

    /// Clamps negative variances (round-off from the solves) to zero.
    pub(crate) fn clamp_variances(&mut self) {
        let mut clamped = 0usize;
        let mut worst = 0.0f64;
        for v in &mut self.variances {
            if *v < 0.0 {
                clamped += 1;
                worst = worst.min(*v);
                *v = 0.0;
            }
        }
        if clamped > 0 {
            log::warn!("clamped {clamped} negative predictive variances (most negative {worst:e})");
        }
    }
}

/// `μ*_t = φ_tᵀ m`, `v*_t = φ_tᵀ S φ_t` using the basis functions listed in
/// `indices`, which must line up with the posterior's coordinates.
pub fn predict_moment<B: Basis + ?Sized>(
    basis: &B,
    indices: &[usize],
    posterior: &MomentPosterior,
    points: &[Vec<f64>],
) -> Result<PredictiveDistribution> {
    if indices.len() != posterior.len() {
        return Err(Error::DimensionMismatch {
            expected: posterior.len(),
            found: indices.len(),
        });
    }
    let features = feature_columns(basis, indices, points)?;
    let projected: Mat<f64> = &posterior.covariance * &features;
    let mut means = Vec::with_capacity(points.len());
    let mut variances = Vec::with_capacity(points.len());
    for t in 0..points.len() {
        let phi = features.col(t);
        let sphi = projected.col(t);
        means.push(phi.iter().zip(&posterior.mean).map(|(a, b)| a * b).sum());
        variances.push(phi.iter().zip(sphi.iter()).map(|(a, b)| a * b).sum());
    }
    let mut out = PredictiveDistribution {
        means,
        variances,
        latency_seconds: None,
    };
    out.clamp_variances();
    Ok(out)
}
