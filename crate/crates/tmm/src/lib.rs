//! Transfer-matrix optics for multilayer stacks.
//!
//! Per wavelength the stack is reduced to a single 2x2 complex matrix by
//! cascading interface and propagation factors; reflectance, transmittance,
//! and absorptance follow from its entries. [`sweep`] runs the per-condition,
//! per-wavelength work grid on a fixed number of worker threads with a
//! deterministic merge, and [`evaluate_fom`] folds a sweep into the scalar
//! figure of merit the optimization loop consumes.
//!
//! Orientation convention: the system matrix advances amplitude pairs
//! (forward, backward) from the ambient side to the substrate side. With
//! that orientation the reflection and transmission amplitudes are
//! `r = -m21/m22` and `t = det(M)/m22`.

mod fom;
mod matrix;
mod optics;
mod sweep;

pub use fom::{evaluate_fom, FomBand, FomSpec, Quantity};
pub use matrix::Matrix2c;
pub use optics::{
    interface_matrix, propagation_matrix, rt_from_matrix, spectrum, system_matrix,
    SpectralResponse, SpectrumPoint,
};
pub use sweep::{sweep, SweepResult};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum TmmError {
    #[error(transparent)]
    Material(#[from] materials::MaterialError),
    /// Fresnel transmission amplitude vanished; the interface matrix does
    /// not exist.
    #[error("singular interface: zero transmission between n={n_left} and n={n_right} at {wavelength_um} um")]
    SingularInterface {
        n_left: String,
        n_right: String,
        wavelength_um: f64,
    },
    /// System matrix has m22 = 0; amplitudes cannot be extracted.
    #[error("singular system matrix (m22 = 0) at {wavelength_um} um")]
    SingularSystem { wavelength_um: f64 },
    /// Overflow or invalid arithmetic produced a non-finite matrix entry.
    #[error("non-finite matrix entry: {0}")]
    NonFinite(String),
    #[error("figure-of-merit band [{lo_um}, {hi_um}] um outside the swept grid [{grid_lo_um}, {grid_hi_um}] um")]
    BandOutsideGrid {
        lo_um: f64,
        hi_um: f64,
        grid_lo_um: f64,
        grid_hi_um: f64,
    },
    #[error("config error: {0}")]
    Config(String),
    #[error("sweep worker failed: {0}")]
    Worker(String),
}

pub type Result<T> = std::result::Result<T, TmmError>;
