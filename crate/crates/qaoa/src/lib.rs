//! From-scratch statevector simulation of the quantum approximate
//! optimization algorithm over Ising-encoded QUBOs.
//!
//! The cost unitary is applied as a single diagonal pass over the amplitude
//! array (mathematically identical to the gate-by-gate phase decomposition
//! and far cheaper); the explicit gate decomposition survives only in
//! [`circuit_metrics`], which accounts for ansatz size. The transverse
//! mixer is a per-qubit 2x2 butterfly. A derivative-free simplex optimizer
//! drives the (gamma, beta) parameters against the state's energy
//! expectation.

mod ising;
mod run;
mod simplex;
mod state;

pub use ising::{qubo_to_ising, BasisEnergies, IsingModel};
pub use run::{circuit_metrics, run_qaoa, DepthReport, QaoaConfig, QaoaParams, QaoaResult};
pub use simplex::nelder_mead;
pub use state::{
    apply_cost_layer, apply_mixer_layer, expectation, sample, uniform_state, Statevector,
};

use thiserror::Error;

/// Statevector capacity cap: 2^24 double-precision amplitudes is 256 MiB,
/// about where exact local simulation stops being a desk-scale tool.
pub const MAX_QUBITS: usize = 24;

#[derive(Debug, Error)]
pub enum QaoaError {
    #[error("{n} qubits exceeds the {max}-qubit statevector capacity")]
    Capacity { n: usize, max: usize },
    #[error("dimension error: {0}")]
    Dimension(String),
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Qubo(#[from] qubo::QuboError),
}

pub type Result<T> = std::result::Result<T, QaoaError>;
