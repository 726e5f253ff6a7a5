//! Seeded synthetic experiments and their file outputs.

pub mod config;
pub mod output;
pub mod random_fn;
pub mod rbf_demo;

pub use config::{ExperimentConfig, NlpdTarget, RandomFnConfig, RbfDemoConfig};
pub use random_fn::{run_random_fn, RandomFnOutput, ResultRow};
pub use rbf_demo::{run_rbf_demo, RbfDemoOutput, SelectionMethod};
