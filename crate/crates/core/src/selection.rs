//! Importance scores for basis functions and the index sets built from them.
//!
//! Dropping the functions outside `J` costs
//! `ℒ = ∫_Ω |Σ_{j∉J} φ_j(x) θ_j|² dx ≤ Σ_{j∉J} (∫_Ω φ_j²) θ_j²`, so each
//! function gets the score `(∫_Ω φ_j²) m_j²` and the functions with the
//! largest scores are kept. Scores only depend on the posterior mean.

use std::cmp::Ordering;

use faer::Mat;
use itertools::Itertools;
use serde::Serialize;

use crate::basis::{sq_norm_integral, Basis, BoxDomain};
use crate::error::{invalid, Error, Result};
use crate::linalg::principal_submatrix;
use crate::posterior::{DualPosterior, MomentPosterior};
use crate::quadrature::{for_each_node, integrate_box};

/// Largest number of subsets [`oracle_best_subset`] will enumerate.
pub const ORACLE_BUDGET: u128 = 1_000_000;

/// Retained indices (0-based, ascending), the score of every basis function
/// and the sum of the scores that were discarded.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelectionResult {
    pub kept: Vec<usize>,
    pub scores: Vec<f64>,
    pub residual_bound: f64,
}

impl SelectionResult {
    /// Keeps every basis function.
    pub fn full(num_bfs: usize) -> Self {
        Self {
            kept: (0..num_bfs).collect(),
            scores: vec![0.0; num_bfs],
            residual_bound: 0.0,
        }
    }

    pub fn len(&self) -> usize {
        self.kept.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kept.is_empty()
    }

    /// Fraction of basis functions retained.
    pub fn rho(&self) -> f64 {
        if self.scores.is_empty() {
            return 1.0;
        }
        self.kept.len() as f64 / self.scores.len() as f64
    }

    /// Indices not in `kept`, ascending.
    pub fn discarded(&self) -> Vec<usize> {
        let mut keep = vec![false; self.scores.len()];
        for &k in &self.kept {
            keep[k] = true;
        }
        (0..self.scores.len()).filter(|&i| !keep[i]).collect()
    }

    fn check_against(&self, num_bfs: usize) -> Result<()> {
        if let Some(&bad) = self.kept.iter().find(|&&k| k >= num_bfs) {
            return Err(Error::IndexOutOfRange {
                index: bad,
                len: num_bfs,
            });
        }
        Ok(())
    }
}

/// `(∫_Ω φ_j²) m_j²` for every basis function.
pub fn integral_scores<B: Basis + ?Sized>(
    mean: &[f64],
    basis: &B,
    omega: &BoxDomain,
) -> Result<Vec<f64>> {
    if mean.len() != basis.len() {
        return Err(Error::DimensionMismatch {
            expected: basis.len(),
            found: mean.len(),
        });
    }
    mean.iter()
        .enumerate()
        .map(|(j, m)| Ok(sq_norm_integral(basis, j, omega)? * m * m))
        .collect()
}

/// `m_j²`: the integral scores up to the common factor `C`, valid when every
/// basis function has the same squared norm on Ω.
pub fn simplified_scores(mean: &[f64]) -> Vec<f64> {
    mean.iter().map(|m| m * m).collect()
}

/// `(Σ_jj α_j)²` with the diagonal approximation of `Σ`. Linear in `L`.
///
/// Evaluated as `(α_j λ_j / (B_jj λ_j + σ²))²`, one division per entry.
pub fn dual_scores(dual: &DualPosterior) -> Vec<f64> {
    let noise = dual.noise_variance();
    dual.alpha()
        .iter()
        .zip(dual.b_diagonal())
        .zip(dual.prior_eigenvalues())
        .map(|((a, b), l)| {
            let r = a * l / (b * l + noise);
            r * r
        })
        .collect()
}

fn complement_sum(scores: &[f64], kept: &[usize]) -> f64 {
    let mut keep = vec![false; scores.len()];
    for &k in kept {
        keep[k] = true;
    }
    scores
        .iter()
        .zip(&keep)
        .filter(|(_, k)| !**k)
        .fold(0.0, |acc, (s, _)| acc + s)
}

fn check_scores(scores: &[f64]) -> Result<()> {
    if let Some(s) = scores.iter().find(|s| !(**s >= 0.0 && s.is_finite())) {
        return Err(invalid(
            "scores",
            format!("must be finite and non-negative, got {s}"),
        ));
    }
    Ok(())
}

/// Keeps the `n_j` largest scores, ties going to the smaller index.
pub fn select_top_k(scores: &[f64], n_j: usize) -> Result<SelectionResult> {
    check_scores(scores)?;
    if n_j > scores.len() {
        return Err(invalid(
            "n_j",
            format!("cannot keep {n_j} of {} basis functions", scores.len()),
        ));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| {
        scores[b]
            .partial_cmp(&scores[a])
            .unwrap_or(Ordering::Equal)
            .then(a.cmp(&b))
    });
    let mut kept: Vec<usize> = order[..n_j].to_vec();
    kept.sort_unstable();
    let residual_bound = complement_sum(scores, &kept);
    Ok(SelectionResult {
        kept,
        scores: scores.to_vec(),
        residual_bound,
    })
}

/// Discards the longest run of smallest scores whose sum stays within
/// `epsilon`; everything else is kept.
pub fn select_by_threshold(scores: &[f64], epsilon: f64) -> Result<SelectionResult> {
    check_scores(scores)?;
    if !(epsilon >= 0.0) {
        return Err(invalid(
            "epsilon",
            format!("must be non-negative, got {epsilon}"),
        ));
    }
    // ascending; among equal scores the larger index goes first so that the
    // smaller index survives, as in select_top_k
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| {
        scores[a]
            .partial_cmp(&scores[b])
            .unwrap_or(Ordering::Equal)
            .then(b.cmp(&a))
    });
    let mut residual_bound = 0.0;
    let mut cut = 0;
    for &i in &order {
        let next = residual_bound + scores[i];
        if next > epsilon {
            break;
        }
        residual_bound = next;
        cut += 1;
    }
    let mut kept: Vec<usize> = order[cut..].to_vec();
    kept.sort_unstable();
    Ok(SelectionResult {
        kept,
        scores: scores.to_vec(),
        residual_bound,
    })
}

/// Marginal `(m_J, S_JJ)`.
pub fn reduce_moment(
    posterior: &MomentPosterior,
    selection: &SelectionResult,
) -> Result<MomentPosterior> {
    selection.check_against(posterior.len())?;
    Ok(MomentPosterior {
        mean: selection.kept.iter().map(|&k| posterior.mean[k]).collect(),
        covariance: principal_submatrix(&posterior.covariance, &selection.kept),
    })
}

/// `(α_J, B_JJ, λ_J)`. The full sub-block of `B` is kept, not its diagonal.
pub fn reduce_dual(dual: &DualPosterior, selection: &SelectionResult) -> Result<DualPosterior> {
    selection.check_against(dual.len())?;
    let kept = &selection.kept;
    DualPosterior::new(
        kept.iter().map(|&k| dual.alpha()[k]).collect(),
        principal_submatrix(dual.b_matrix(), kept),
        kept.iter().map(|&k| dual.prior_eigenvalues()[k]).collect(),
        dual.noise_variance(),
        dual.count(),
    )
}

/// Quadrature value of `∫_Ω |Σ_{j∉J} φ_j(x) m_j|² dx`.
pub fn exact_loss<B: Basis + ?Sized>(
    full_mean: &[f64],
    selection: &SelectionResult,
    basis: &B,
    omega: &BoxDomain,
    points_per_dim: usize,
) -> Result<f64> {
    if points_per_dim < 2 {
        return Err(invalid("points_per_dim", "need at least 2 nodes"));
    }
    if full_mean.len() != basis.len() {
        return Err(Error::DimensionMismatch {
            expected: basis.len(),
            found: full_mean.len(),
        });
    }
    if omega.dim() != basis.dim() {
        return Err(Error::DimensionMismatch {
            expected: basis.dim(),
            found: omega.dim(),
        });
    }
    selection.check_against(basis.len())?;
    let dropped: Vec<usize> = {
        let mut keep = vec![false; basis.len()];
        for &k in &selection.kept {
            keep[k] = true;
        }
        (0..basis.len()).filter(|&j| !keep[j]).collect()
    };
    let weights: Vec<f64> = dropped.iter().map(|&j| full_mean[j]).collect();
    let mut values = vec![0.0; dropped.len()];
    Ok(integrate_box(omega, points_per_dim, |x| {
        basis.fill_values(x, &dropped, &mut values);
        let r: f64 = values.iter().zip(&weights).map(|(v, w)| v * w).sum();
        r * r
    }))
}

fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i as u128 + 1))
}

/// Exhaustive minimizer of [`exact_loss`] over all index sets of size `n_j`.
/// Ties go to the lexicographically smallest set.
pub fn oracle_best_subset<B: Basis + ?Sized>(
    full_mean: &[f64],
    basis: &B,
    omega: &BoxDomain,
    n_j: usize,
    points_per_dim: usize,
) -> Result<Vec<usize>> {
    let l = basis.len();
    if n_j > l {
        return Err(invalid(
            "n_j",
            format!("cannot keep {n_j} of {l} basis functions"),
        ));
    }
    if full_mean.len() != l {
        return Err(Error::DimensionMismatch {
            expected: l,
            found: full_mean.len(),
        });
    }
    if points_per_dim < 2 {
        return Err(invalid("points_per_dim", "need at least 2 nodes"));
    }
    let count = binomial(l, n_j);
    if count > ORACLE_BUDGET {
        return Err(Error::CombinatorialBudget {
            count,
            budget: ORACLE_BUDGET,
        });
    }

    // weighted Gram matrix G_jk = m_j m_k ∫_Ω φ_j φ_k; the loss of a subset is
    // the sum of G over the complement
    let all: Vec<usize> = (0..l).collect();
    let mut values = vec![0.0; l];
    let mut gram = Mat::<f64>::zeros(l, l);
    for_each_node(omega, points_per_dim, |x, w| {
        basis.fill_values(x, &all, &mut values);
        for k in 0..l {
            let vk = w * values[k] * full_mean[k];
            for j in 0..l {
                gram[(j, k)] += vk * values[j] * full_mean[j];
            }
        }
    });

    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut dropped = vec![true; l];
    for subset in (0..l).combinations(n_j) {
        dropped.iter_mut().for_each(|d| *d = true);
        for &k in &subset {
            dropped[k] = false;
        }
        let mut loss = 0.0;
        for j in 0..l {
            if !dropped[j] {
                continue;
            }
            for k in 0..l {
                if dropped[k] {
                    loss += gram[(j, k)];
                }
            }
        }
        if best.as_ref().is_none_or(|(b, _)| loss < *b) {
            best = Some((loss, subset));
        }
    }
    Ok(best.map(|(_, s)| s).unwrap_or_default())
}
