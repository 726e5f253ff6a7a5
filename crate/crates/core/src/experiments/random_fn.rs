use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::Serialize;

use super::config::{NlpdTarget, RandomFnConfig};
use crate::basis::BoxDomain;
use crate::error::{Error, Result};
use crate::gp_exact::{gp_predict, sample_gp_prior, SeKernel};
use crate::hgp::{build_hgp, hgp_fit, hgp_predict, HgpModel};
use crate::metrics::{mean_kl, nlpd, relative_metric, rmse, time_predict};
use crate::posterior::DualPosterior;
use crate::predictive::PredictiveDistribution;
use crate::selection::{dual_scores, select_top_k, SelectionResult};

const DIM: usize = 3;

/// Training data, test grid and the sampled function at the test grid.
#[derive(Debug, Clone)]
pub struct RandomFnInstance {
    pub train_x: Vec<Vec<f64>>,
    pub train_y: Vec<f64>,
    pub test_x: Vec<Vec<f64>>,
    pub test_f: Vec<f64>,
}

/// Equispaced `n³` grid over `[-w, w]³`, last coordinate fastest.
pub fn test_grid(n_per_dim: usize, half_width: f64) -> Vec<Vec<f64>> {
    let axis: Vec<f64> = if n_per_dim == 1 {
        vec![0.0]
    } else {
        let step = 2.0 * half_width / (n_per_dim - 1) as f64;
        (0..n_per_dim)
            .map(|k| -half_width + step * k as f64)
            .collect()
    };
    let mut out = Vec::with_capacity(n_per_dim.pow(DIM as u32));
    for &a in &axis {
        for &b in &axis {
            for &c in &axis {
                out.push(vec![a, b, c]);
            }
        }
    }
    out
}

/// Uniform training inputs, a joint prior draw over training and test
/// inputs, and noisy training outputs.
pub fn generate_instance(config: &RandomFnConfig) -> Result<RandomFnInstance> {
    config.validate()?;
    let w = config.data_half_width;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let train_x: Vec<Vec<f64>> = (0..config.n_train)
        .map(|_| (0..DIM).map(|_| rng.random_range(-w..=w)).collect())
        .collect();
    let test_x = test_grid(config.n_test_per_dim, w);

    let kernel = SeKernel::new(config.kernel_var, config.lengthscale)?;
    let joint: Vec<Vec<f64>> = train_x.iter().chain(&test_x).cloned().collect();
    let f = sample_gp_prior(&kernel, &joint, config.seed.wrapping_add(1))?;
    let noise = Normal::new(0.0, config.noise_var.sqrt()).expect("validated noise variance");
    let train_y = f[..config.n_train]
        .iter()
        .map(|v| v + noise.sample(&mut rng))
        .collect();
    let test_f = f[config.n_train..].to_vec();
    Ok(RandomFnInstance {
        train_x,
        train_y,
        test_x,
        test_f,
    })
}

/// One `(L, ρ)` cell of the sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub num_bfs: usize,
    pub rho: f64,
    pub n_selected: usize,
    pub residual_bound: f64,
    pub rel_kl: Option<f64>,
    pub rel_nlpd: Option<f64>,
    pub rel_rmse: Option<f64>,
    pub rel_time: Option<f64>,
    pub abs_time_full_s: f64,
    pub abs_time_reduced_s: f64,
    pub kl_full: f64,
    pub kl_reduced: f64,
    pub nlpd_full: f64,
    pub nlpd_reduced: f64,
    pub rmse_full: f64,
    pub rmse_reduced: f64,
}

/// Scores of one model size, kept for the scores log.
#[derive(Debug, Clone)]
pub struct ScoreLog {
    pub model: HgpModel,
    pub scores: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct RandomFnOutput {
    pub rows: Vec<ResultRow>,
    pub scores: Vec<ScoreLog>,
}

/// `max(1, round(ρ L))`.
pub fn retained_count(rho: f64, num_bfs: usize) -> usize {
    ((rho * num_bfs as f64).round() as usize).clamp(1, num_bfs)
}

/// Rough peak working set of fitting and predicting with `num_bfs` functions.
pub fn estimated_bytes(num_bfs: usize, n_train: usize, n_test: usize) -> u64 {
    let l = num_bfs as u64;
    // B, the precision matrix, its factor and a reduced copy; both design
    // matrices
    8 * (4 * l * l + (n_train as u64 + n_test as u64) * l)
}

fn check_memory(config: &RandomFnConfig) -> Result<()> {
    for &ld in &config.ld_list {
        let num_bfs = ld.pow(DIM as u32);
        let required = estimated_bytes(num_bfs, config.n_train, config.n_test());
        let required_mb = required.div_ceil(1 << 20);
        if required_mb > config.memory_budget_mb {
            return Err(Error::MemoryBudget {
                num_bfs,
                required_mb,
                budget_mb: config.memory_budget_mb,
            });
        }
    }
    Ok(())
}

/// Dual-score selection of `n_j` functions followed by the reduced
/// prediction; this is the unit whose latency is compared to the full model.
pub fn select_and_predict(
    model: &HgpModel,
    dual: &DualPosterior,
    test_x: &[Vec<f64>],
    n_j: usize,
) -> Result<(SelectionResult, PredictiveDistribution)> {
    let selection = select_top_k(&dual_scores(dual), n_j)?;
    let pred = hgp_predict(model, dual, test_x, Some(&selection))?;
    Ok((selection, pred))
}

/// Full sweep over `ld_list × rho_list`.
pub fn run_random_fn(config: &RandomFnConfig) -> Result<RandomFnOutput> {
    config.validate()?;
    check_memory(config)?;
    let instance = generate_instance(config)?;
    let kernel = SeKernel::new(config.kernel_var, config.lengthscale)?;
    let exact = gp_predict(
        &kernel,
        &instance.train_x,
        &instance.train_y,
        config.noise_var,
        &instance.test_x,
    )?;
    let target: &[f64] = match config.nlpd_target {
        NlpdTarget::GpMean => &exact.means,
        NlpdTarget::TrueF => &instance.test_f,
    };
    let domain = BoxDomain::cube(-config.model_half_width, config.model_half_width, DIM)?;

    let mut rows = Vec::new();
    let mut scores = Vec::new();
    for &ld in &config.ld_list {
        let model = build_hgp(
            domain.clone(),
            &[ld; DIM],
            config.kernel_var,
            config.lengthscale,
            config.noise_var,
        )?;
        let dual = hgp_fit(&model, &instance.train_x, &instance.train_y)?;
        let num_bfs = model.len();
        log::info!("L = {num_bfs}: timing the full model");

        let (time_full, full) = time_predict(config.repetitions, || {
            hgp_predict(&model, &dual, &instance.test_x, None)
        });
        let full = full?;
        let kl_full = mean_kl(&full, &exact)?;
        let nlpd_full = nlpd(&full, target)?;
        let rmse_full = rmse(&full.means, target)?;

        for &rho in &config.rho_list {
            let n_j = retained_count(rho, num_bfs);
            let (time_reduced, reduced) = time_predict(config.repetitions, || {
                select_and_predict(&model, &dual, &instance.test_x, n_j)
            });
            let (selection, reduced) = reduced?;
            let kl_reduced = mean_kl(&reduced, &exact)?;
            let nlpd_reduced = nlpd(&reduced, target)?;
            let rmse_reduced = rmse(&reduced.means, target)?;
            log::info!(
                "L = {num_bfs}, rho = {rho}: n_J = {n_j}, {time_reduced:.4}s vs {time_full:.4}s"
            );
            rows.push(ResultRow {
                num_bfs,
                rho,
                n_selected: n_j,
                residual_bound: selection.residual_bound,
                rel_kl: relative_metric(kl_reduced, kl_full),
                rel_nlpd: relative_metric(nlpd_reduced, nlpd_full),
                rel_rmse: relative_metric(rmse_reduced, rmse_full),
                rel_time: relative_metric(time_reduced, time_full),
                abs_time_full_s: time_full,
                abs_time_reduced_s: time_reduced,
                kl_full,
                kl_reduced,
                nlpd_full,
                nlpd_reduced,
                rmse_full,
                rmse_reduced,
            });
        }
        scores.push(ScoreLog {
            scores: dual_scores(&dual),
            model,
        });
    }
    Ok(RandomFnOutput { rows, scores })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_config() -> RandomFnConfig {
        RandomFnConfig {
            n_train: 150,
            lengthscale: 0.4,
            kernel_var: 0.05,
            ld_list: vec![2, 4],
            rho_list: vec![0.3, 1.0],
            n_test_per_dim: 5,
            repetitions: 1,
            ..Default::default()
        }
    }

    #[test]
    fn grid_layout() {
        let g = test_grid(15, 1.0);
        assert_eq!(g.len(), 3375);
        assert_eq!(g[0], vec![-1.0, -1.0, -1.0]);
        assert_eq!(g[3374], vec![1.0, 1.0, 1.0]);
        assert!((g[1][2] - (-1.0 + 2.0 / 14.0)).abs() < 1e-15);
    }

    #[test]
    fn retained_count_rounds_and_clamps() {
        assert_eq!(retained_count(0.05, 8), 1);
        assert_eq!(retained_count(0.3, 1728), 518);
        assert_eq!(retained_count(1.0, 512), 512);
        assert_eq!(retained_count(0.01, 8), 1);
    }

    #[test]
    fn memory_budget_fails_fast() {
        let cfg = RandomFnConfig {
            ld_list: vec![2, 20],
            memory_budget_mb: 512,
            ..Default::default()
        };
        match run_random_fn(&cfg) {
            Err(Error::MemoryBudget { num_bfs, .. }) => assert_eq!(num_bfs, 8000),
            other => panic!("expected a memory budget error, got {other:?}"),
        }
    }

    #[test]
    fn full_retention_rows_are_unity() {
        let out = run_random_fn(&small_config()).unwrap();
        assert_eq!(out.rows.len(), 4);
        for row in out.rows.iter().filter(|r| r.rho == 1.0) {
            for v in [row.rel_kl, row.rel_nlpd, row.rel_rmse] {
                assert!((v.unwrap() - 1.0).abs() < 1e-9, "{row:?}");
            }
            assert_eq!(row.residual_bound, 0.0);
        }
        assert_eq!(out.scores.len(), 2);
        assert_eq!(out.scores[1].scores.len(), 64);
    }

    #[test]
    fn instance_is_deterministic() {
        let cfg = small_config();
        let a = generate_instance(&cfg).unwrap();
        let b = generate_instance(&cfg).unwrap();
        assert_eq!(a.train_y, b.train_y);
        assert_eq!(a.test_f, b.test_f);
        assert_eq!(a.test_x.len(), 125);
    }
}
