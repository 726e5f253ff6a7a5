use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::config::RbfDemoConfig;
use crate::basis::{design_matrix, BoxDomain, RbfBasis};
use crate::error::Result;
use crate::gp_exact::{sample_gp_prior, SeKernel};
use crate::posterior::{fit_moment, MomentPosterior};
use crate::predictive::{predict_moment, PredictiveDistribution};
use crate::selection::{
    integral_scores, reduce_moment, select_top_k, simplified_scores, SelectionResult,
};

/// How a reduced model's basis functions were chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelectionMethod {
    Integral,
    Simplified,
}

impl SelectionMethod {
    pub fn label(self) -> &'static str {
        match self {
            Self::Integral => "integral",
            Self::Simplified => "simplified",
        }
    }
}

#[derive(Debug, Clone)]
pub struct RbfDemoOutput {
    pub basis: RbfBasis,
    pub omega: BoxDomain,
    pub train_x: Vec<f64>,
    pub train_y: Vec<f64>,
    pub posterior: MomentPosterior,
    pub grid: Vec<f64>,
    /// Full-model predictive on the grid.
    pub full: PredictiveDistribution,
    /// Reduced predictive with the simplified-bound selection.
    pub standard: PredictiveDistribution,
    /// Reduced predictive with the integral-bound selection.
    pub integral: PredictiveDistribution,
    pub integral_selection: SelectionResult,
    pub simplified_selection: SelectionResult,
}

impl RbfDemoOutput {
    pub fn selection(&self, method: SelectionMethod) -> &SelectionResult {
        match method {
            SelectionMethod::Integral => &self.integral_selection,
            SelectionMethod::Simplified => &self.simplified_selection,
        }
    }

    pub fn selected_centers(&self, method: SelectionMethod) -> Vec<f64> {
        self.selection(method)
            .kept
            .iter()
            .map(|&k| self.basis.centers()[k][0])
            .collect()
    }
}

/// Fits `num_bfs` equidistant RBFs on `[-1, 1]` to noisy samples of a
/// GP-drawn function, then keeps `n_select` of them for prediction on Ω by
/// the integral bound and by the simplified bound.
pub fn run_rbf_demo(config: &RbfDemoConfig) -> Result<RbfDemoOutput> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let train_x: Vec<f64> = (0..config.n_train)
        .map(|_| rng.random_range(-1.0..=1.0))
        .collect();
    let step = 2.0 / (config.n_grid - 1) as f64;
    let grid: Vec<f64> = (0..config.n_grid).map(|k| -1.0 + step * k as f64).collect();

    let truth_kernel = SeKernel::new(config.truth_kernel_var, config.truth_lengthscale)?;
    let points: Vec<Vec<f64>> = train_x.iter().map(|x| vec![*x]).collect();
    let truth = sample_gp_prior(&truth_kernel, &points, config.seed.wrapping_add(1))?;
    let noise = Normal::new(0.0, config.noise_var.sqrt()).expect("validated noise variance");
    let train_y: Vec<f64> = truth.iter().map(|f| f + noise.sample(&mut rng)).collect();

    let basis = RbfBasis::equidistant_1d(-1.0, 1.0, config.num_bfs, config.rbf_lengthscale)?;
    let phi = design_matrix(&basis, &points)?;
    let prior = vec![config.prior_variance; config.num_bfs];
    let posterior = fit_moment(&phi, &train_y, config.noise_var, &prior)?;

    let omega = BoxDomain::new(vec![config.omega[0]], vec![config.omega[1]])?;
    let integral_selection = select_top_k(
        &integral_scores(&posterior.mean, &basis, &omega)?,
        config.n_select,
    )?;
    let simplified_selection = select_top_k(&simplified_scores(&posterior.mean), config.n_select)?;

    let grid_points: Vec<Vec<f64>> = grid.iter().map(|x| vec![*x]).collect();
    let all: Vec<usize> = (0..config.num_bfs).collect();
    let full = predict_moment(&basis, &all, &posterior, &grid_points)?;
    let reduced = |sel: &SelectionResult| -> Result<PredictiveDistribution> {
        let post = reduce_moment(&posterior, sel)?;
        predict_moment(&basis, &sel.kept, &post, &grid_points)
    };
    let integral = reduced(&integral_selection)?;
    let standard = reduced(&simplified_selection)?;

    Ok(RbfDemoOutput {
        basis,
        omega,
        train_x,
        train_y,
        posterior,
        grid,
        full,
        standard,
        integral,
        integral_selection,
        simplified_selection,
    })
}
