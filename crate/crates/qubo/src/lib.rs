//! Quadratic unconstrained binary optimization.
//!
//! [`QuboMatrix`] holds the upper-triangular coefficient matrix compiled
//! from a trained factorization machine (the constant bias travels as an
//! `offset` next to the matrix; it cannot move the argmin but keeps reported
//! energies on the original scale). Solvers: exhaustive enumeration as the
//! ground-truth oracle and single-flip Metropolis annealing as the scalable
//! classical baseline.

mod matrix;
mod solution;
mod solvers;

pub use matrix::{energy, from_fm, random_qubo, QuboMatrix};
pub use solution::{accuracy, Accuracy, AccuracyMode, Solution};
pub use solvers::{
    anneal_best_of, brute_force, simulated_annealing, simulated_annealing_traced, AnnealConfig,
    BRUTE_FORCE_MAX_BITS,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum QuboError {
    #[error("dimension error: {0}")]
    Dimension(String),
    #[error("exhaustive search over {n} bits exceeds the {max}-bit capacity cap")]
    Capacity { n: usize, max: usize },
    #[error("config error: {0}")]
    Config(String),
    #[error("schema error: {0}")]
    Schema(String),
}

pub type Result<T> = std::result::Result<T, QuboError>;
