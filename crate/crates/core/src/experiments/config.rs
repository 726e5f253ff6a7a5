use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// What the NLPD, RMSE and KL of the random-function experiment are
/// measured against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NlpdTarget {
    /// Posterior means of the exact GP fit to the same data.
    #[default]
    GpMean,
    /// Noiseless values of the sampled function at the test points.
    TrueF,
}

impl std::str::FromStr for NlpdTarget {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "gp-mean" => Ok(Self::GpMean),
            "true-f" => Ok(Self::TrueF),
            other => Err(format!(
                "unknown NLPD target `{other}` (expected gp-mean or true-f)"
            )),
        }
    }
}

impl std::fmt::Display for NlpdTarget {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::GpMean => "gp-mean",
            Self::TrueF => "true-f",
        })
    }
}

/// One-dimensional RBF selection demo.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RbfDemoConfig {
    pub seed: u64,
    pub num_bfs: usize,
    pub n_select: usize,
    pub omega: [f64; 2],
    pub rbf_lengthscale: f64,
    /// Isotropic prior variance of the weights.
    pub prior_variance: f64,
    pub n_train: usize,
    pub noise_var: f64,
    /// Hyperparameters of the GP the ground-truth function is drawn from.
    pub truth_lengthscale: f64,
    pub truth_kernel_var: f64,
    pub n_grid: usize,
}

impl Default for RbfDemoConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            num_bfs: 10,
            n_select: 2,
            omega: [-0.5, 0.0],
            rbf_lengthscale: 0.2,
            prior_variance: 1.0,
            n_train: 50,
            noise_var: 0.01,
            truth_lengthscale: 0.25,
            truth_kernel_var: 0.5,
            n_grid: 201,
        }
    }
}

impl RbfDemoConfig {
    pub fn validate(&self) -> Result<()> {
        positive("rbf_lengthscale", self.rbf_lengthscale)?;
        positive("prior_variance", self.prior_variance)?;
        positive("noise_var", self.noise_var)?;
        positive("truth_lengthscale", self.truth_lengthscale)?;
        positive("truth_kernel_var", self.truth_kernel_var)?;
        if self.num_bfs == 0 {
            return Err(invalid("num_bfs", "need at least one basis function"));
        }
        if self.n_select == 0 || self.n_select > self.num_bfs {
            return Err(invalid(
                "n_select",
                format!("must be in 1..={}, got {}", self.num_bfs, self.n_select),
            ));
        }
        let [lo, hi] = self.omega;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(invalid(
                "omega",
                format!("need lower < upper, got [{lo}, {hi}]"),
            ));
        }
        if self.n_train == 0 {
            return Err(invalid("n_train", "need at least one training point"));
        }
        if self.n_grid < 2 {
            return Err(invalid("n_grid", "need at least two grid points"));
        }
        Ok(())
    }
}

/// Random-function sweep over HGP sizes and retained fractions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RandomFnConfig {
    pub seed: u64,
    pub n_train: usize,
    pub lengthscale: f64,
    pub kernel_var: f64,
    pub noise_var: f64,
    /// Modes per dimension; the model has `ld³` basis functions.
    pub ld_list: Vec<usize>,
    pub rho_list: Vec<f64>,
    pub nlpd_target: NlpdTarget,
    /// Test grid points per dimension; 15 gives the 3375-point grid.
    pub n_test_per_dim: usize,
    /// Half-width of the HGP box `[-w, w]³`.
    pub model_half_width: f64,
    /// Half-width of the cube the data and test grid live in.
    pub data_half_width: f64,
    pub repetitions: usize,
    pub memory_budget_mb: u64,
}

pub const DEFAULT_LD_LIST: [usize; 6] = [2, 4, 6, 8, 10, 12];
pub const EXTENDED_LD_LIST: [usize; 10] = [2, 4, 6, 8, 10, 12, 14, 16, 18, 20];
pub const DEFAULT_RHO_LIST: [f64; 6] = [0.05, 0.1, 0.2, 0.3, 0.5, 1.0];

impl Default for RandomFnConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            n_train: 1000,
            lengthscale: 0.1,
            kernel_var: 0.05,
            noise_var: 0.01,
            ld_list: DEFAULT_LD_LIST.to_vec(),
            rho_list: DEFAULT_RHO_LIST.to_vec(),
            nlpd_target: NlpdTarget::GpMean,
            n_test_per_dim: 15,
            model_half_width: 2.0,
            data_half_width: 1.0,
            repetitions: 5,
            memory_budget_mb: 4096,
        }
    }
}

impl RandomFnConfig {
    pub fn validate(&self) -> Result<()> {
        positive("lengthscale", self.lengthscale)?;
        positive("kernel_var", self.kernel_var)?;
        positive("noise_var", self.noise_var)?;
        positive("model_half_width", self.model_half_width)?;
        positive("data_half_width", self.data_half_width)?;
        if self.data_half_width > self.model_half_width {
            return Err(invalid(
                "data_half_width",
                "data must lie inside the model box",
            ));
        }
        if self.n_train == 0 {
            return Err(invalid("n_train", "need at least one training point"));
        }
        if self.n_test_per_dim == 0 {
            return Err(invalid(
                "n_test_per_dim",
                "need at least one test point per dimension",
            ));
        }
        if self.ld_list.is_empty() || self.ld_list.contains(&0) {
            return Err(invalid(
                "ld_list",
                "need a non-empty list of positive mode counts",
            ));
        }
        if self.rho_list.is_empty() {
            return Err(invalid("rho_list", "need at least one fraction"));
        }
        if let Some(r) = self.rho_list.iter().find(|r| !(**r > 0.0 && **r <= 1.0)) {
            return Err(invalid(
                "rho_list",
                format!("fractions must lie in (0, 1], got {r}"),
            ));
        }
        if self.repetitions == 0 {
            return Err(invalid("repetitions", "need at least one timed repetition"));
        }
        Ok(())
    }

    pub fn n_test(&self) -> usize {
        self.n_test_per_dim.pow(3)
    }
}

fn positive(name: &'static str, v: f64) -> Result<()> {
    if !(v > 0.0 && v.is_finite()) {
        return Err(invalid(name, format!("must be positive, got {v}")));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "experiment", rename_all = "kebab-case")]
pub enum ExperimentConfig {
    RbfDemo(RbfDemoConfig),
    RandomFn(RandomFnConfig),
}

impl ExperimentConfig {
    pub fn seed(&self) -> u64 {
        match self {
            Self::RbfDemo(c) => c.seed,
            Self::RandomFn(c) => c.seed,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::RbfDemo(_) => "rbf-demo",
            Self::RandomFn(_) => "random-fn",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::RbfDemo(c) => c.validate(),
            Self::RandomFn(c) => c.validate(),
        }
    }

    /// The resolved configuration as TOML, readable back with
    /// [`load_rbf_demo`] / [`load_random_fn`].
    pub fn to_toml(&self) -> String {
        let body = match self {
            Self::RbfDemo(c) => toml::to_string(c),
            Self::RandomFn(c) => toml::to_string(c),
        };
        body.expect("experiment configs always serialize")
    }
}

fn read(path: &Path) -> Result<String> {
    Ok(std::fs::read_to_string(path)?)
}

pub fn parse_rbf_demo(text: &str) -> Result<RbfDemoConfig> {
    toml::from_str(text).map_err(|e| invalid("config", e.message().to_string()))
}

pub fn parse_random_fn(text: &str) -> Result<RandomFnConfig> {
    toml::from_str(text).map_err(|e| invalid("config", e.message().to_string()))
}

pub fn load_rbf_demo(path: &Path) -> Result<RbfDemoConfig> {
    parse_rbf_demo(&read(path)?)
}

pub fn load_random_fn(path: &Path) -> Result<RandomFnConfig> {
    parse_random_fn(&read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        RbfDemoConfig::default().validate().unwrap();
        let rf = RandomFnConfig::default();
        rf.validate().unwrap();
        assert_eq!(rf.n_test(), 3375);
        assert_eq!(rf.ld_list.first().map(|l| l.pow(3)), Some(8));
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(parse_random_fn("seed = 3\nbogus = 1\n").is_err());
        assert!(parse_rbf_demo("num_bfs = 'ten'\n").is_err());
        let c = parse_random_fn("seed = 3\nnlpd_target = 'true-f'\n").unwrap();
        assert_eq!(c.seed, 3);
        assert_eq!(c.nlpd_target, NlpdTarget::TrueF);
        assert_eq!(c.n_train, 1000);
    }

    #[test]
    fn range_checks() {
        let c = RandomFnConfig {
            rho_list: vec![0.5, 1.5],
            ..Default::default()
        };
        assert!(c.validate().is_err());
        let c = RbfDemoConfig {
            n_select: 11,
            ..Default::default()
        };
        assert!(c.validate().is_err());
        let c = RbfDemoConfig {
            omega: [0.0, -0.5],
            ..Default::default()
        };
        assert!(c.validate().is_err());
    }

    #[test]
    fn toml_round_trip() {
        let c = RandomFnConfig {
            seed: 7,
            ld_list: vec![3, 5],
            ..Default::default()
        };
        let text = ExperimentConfig::RandomFn(c.clone()).to_toml();
        assert_eq!(parse_random_fn(&text).unwrap(), c);
        let r = RbfDemoConfig::default();
        assert_eq!(
            parse_rbf_demo(&ExperimentConfig::RbfDemo(r.clone()).to_toml()).unwrap(),
            r
        );
    }
}
