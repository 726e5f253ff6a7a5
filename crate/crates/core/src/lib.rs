//! Adaptive basis function selection for basis-expansion regression.
//!
//! A fitted weight posterior is pruned to the basis functions that matter
//! for prediction on a subdomain Ω, ranked by a bound on the squared L2
//! error over Ω. Hilbert-space GP approximations are supported through a
//! streaming dual (information) form whose selection score costs O(L).

pub mod basis;
pub mod error;
pub mod experiments;
pub mod gp_exact;
pub mod hgp;
pub mod linalg;
pub mod metrics;
pub mod posterior;
pub mod predictive;
pub mod quadrature;
pub mod selection;

pub use basis::{Basis, BoxDomain, HilbertBasis, RbfBasis};
pub use error::{Error, Result};
pub use posterior::{DualPosterior, MomentPosterior};
pub use predictive::PredictiveDistribution;
pub use selection::SelectionResult;
