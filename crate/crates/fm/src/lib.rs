//! Factorization-machine surrogate model.
//!
//! The model scores a binary vector with a global bias, per-bit linear
//! weights, and pairwise interactions factorized through k-dimensional
//! latent vectors. The factored form evaluates in O(n k) rather than
//! O(k n^2). Training is plain mini-batch gradient descent under mean
//! squared error, with per-batch gradients computed by sharding rows across
//! worker threads and reducing partials in fixed order so results do not
//! depend on the worker count.

mod dataset;
mod model;
mod train;

pub use dataset::{Dataset, Provenance};
pub use model::{gradients, loss, predict, predict_counted, FmModel, Gradients};
pub use train::{train, TrainConfig, Trained};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum FmError {
    #[error("dimension error: {0}")]
    Dimension(String),
    #[error("training diverged at epoch {epoch} (loss = {loss})")]
    Divergence { epoch: usize, loss: f64 },
    #[error("duplicate row rejected: {0}")]
    Duplicate(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("schema error: {0}")]
    Schema(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, FmError>;
