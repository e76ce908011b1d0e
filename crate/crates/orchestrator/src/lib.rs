//! The active-learning loop and its surroundings.
//!
//! Each iteration trains the factorization-machine surrogate on the dataset
//! so far, compiles it to a QUBO, minimizes with the configured solver,
//! evaluates the proposed structure with the transfer-matrix engine, and
//! appends the new (bits, figure-of-merit) pair. The benchmark harness
//! measures solver accuracy and sweep/training scaling at desk scale and
//! emits plain CSV.

pub mod bench;
pub mod config;
pub mod engine;

pub use config::{BuiltConfig, GridSpec, MaterialSpec, RunConfig, SolverSpec};
pub use engine::{
    evaluate_bits, run, run_logged, IterationRecord, RunLog, SolverReport, Timings,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum OrchestratorError {
    #[error(transparent)]
    Material(#[from] materials::MaterialError),
    #[error(transparent)]
    Tmm(#[from] tmm::TmmError),
    #[error(transparent)]
    Fm(#[from] fm::FmError),
    #[error(transparent)]
    Qubo(#[from] qubo::QuboError),
    #[error(transparent)]
    Qaoa(#[from] qaoa::QaoaError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("config error: {0}")]
    Config(String),
    #[error("iteration {iteration}: {source}")]
    Iteration {
        iteration: usize,
        #[source]
        source: Box<OrchestratorError>,
    },
    /// Every perturbation and fresh-random attempt landed on a known row.
    #[error(
        "proposal space saturated: no novel bit vector after {flip_attempts} single-bit flips \
         and {random_attempts} fresh random draws"
    )]
    Saturated {
        flip_attempts: usize,
        random_attempts: usize,
    },
}

impl OrchestratorError {
    fn at_iteration(self, iteration: usize) -> Self {
        OrchestratorError::Iteration {
            iteration,
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, OrchestratorError>;
