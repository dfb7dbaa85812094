//! Nyström landmark optimisation by descent on the squared-kernel
//! discrepancy (SKD).
//!
//! The SKD `R(S)` of a landmark set `S` upper-bounds (up to constants) the
//! trace, Frobenius and spectral errors of the Nyström approximation built on
//! `S`, is smooth in the landmark coordinates, and admits cheap unbiased
//! stochastic gradients. This crate provides the objective, its gradient and
//! Hessian, mini-batch estimators, the descent driver, and dense Nyström
//! evaluation.

pub mod data;
pub mod descent;
pub mod error;
pub mod estimator;
pub mod kernel;
pub mod linalg;
pub mod nystrom;
pub mod rng;
pub mod skd;

pub use data::{bigaussian_generate, sample_initial, BiGaussian, Dataset, NystromSample};
pub use descent::{run_descent, run_descent_with, BatchSampling, DescentConfig, DescentOutcome, TraceLog, TraceRecord};
pub use error::{Error, Result};
pub use estimator::{Batch, EstimatorKind};
pub use kernel::{GaussianKernel, Kernel, SquaredKernelBounds};
pub use nystrom::{
    approximation_factors, nystrom_matrix, optimal_rank_n, residual_norms, ApproximationReport, MetricSet,
    MetricValues, NystromEvaluator, ResidualNorms,
};
pub use rng::{rng_from_seed, SkdRng};
pub use skd::{lipschitz_bounds, skd_gradient, skd_value, LipschitzBounds, SkdGradient, SkdObjective};
