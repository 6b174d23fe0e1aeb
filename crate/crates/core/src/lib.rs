//! Cache-enabled two-tier small-cell networks: successful content delivery
//! probability for a sub-6 GHz tier and a mmWave tier, probabilistic
//! placement optimizers, and a Monte Carlo oracle.

// `!(x > 0.0)` is used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cceo;
pub mod config;
pub mod experiment;
pub mod error;
pub mod mc;
pub mod model;
pub mod quad;
pub mod scdp_mm;
pub mod scdp_mu;
pub mod specfun;
pub mod table;
pub mod twostair;

pub use error::{Error, Result};
pub use model::{ContentLibrary, DeliveryRequirement, MmTierConfig, MuTierConfig, PlacementVector};
pub use scdp_mm::MmCoverageContext;
pub use scdp_mu::{MuCoverageContext, MuScdpEvaluator};
