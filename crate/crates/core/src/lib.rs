//! Accelerated parallel proximal coordinate descent for composite problems
//!
//! ```text
//! min_x  F(x) = Σ_j φ_j(e_jᵀ A x) + Σ_i ψ_i(x^(i))
//! ```
//!
//! where `A` is sparse, the coordinates are split into `n` blocks, each
//! `φ_j` has a Lipschitz derivative and each `ψ_i` has a closed-form
//! proximal step. Every iteration updates a random subset of `τ` blocks
//! with stepsizes that account for how the rows of `A` couple the blocks.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod blocks;
pub mod error;
pub mod eso;
pub mod io;
pub mod losses;
pub mod problem;
pub mod prox;
pub mod sampling;
pub mod solver;
pub mod sparse;

pub use blocks::{weighted_inner, weighted_norm_sq, BlockPartition, WeightVector};
pub use error::{Error, Result};
pub use eso::{beta, stepsizes, LipschitzTable, StepsizeKind, StepsizeVector};
pub use losses::{ResidualPair, ScalarLoss};
pub use problem::CompositeProblem;
pub use prox::Regularizer;
pub use sampling::{BlockSampler, SamplingKind, SamplingScheme};
pub use solver::{run, Engine, Mode, RunLog, RunResult, SolverConfig};
pub use sparse::SparseMatrix;
