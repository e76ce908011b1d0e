//! Material optical data, the multilayer stack model, and the binary
//! encoding that turns solver bit vectors into physical structures.
//!
//! Wavelengths are micrometers throughout; layer thicknesses are nanometers.

mod dispersion;
mod encoding;
mod stack;

pub use dispersion::{load_dispersion, serialize_dispersion, DispersionRow, Material};
pub use encoding::{decode, BinaryEncoding};
pub use stack::{IncidenceCondition, Layer, LayerStack, Polarization, SpectralGrid};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum MaterialError {
    /// Malformed dispersion data: bad header, bad row, or ordering violation.
    #[error("schema error: {0}")]
    Schema(String),
    /// Values that are syntactically fine but physically impossible.
    #[error("physics error: {0}")]
    Physics(String),
    /// Wavelength lookup outside the tabulated range; no extrapolation.
    #[error("wavelength {wavelength_um} um outside table range [{min_um}, {max_um}] um for material '{name}'")]
    Range {
        name: String,
        wavelength_um: f64,
        min_um: f64,
        max_um: f64,
    },
    /// Bit vector incompatible with the encoding.
    #[error("encoding error: {0}")]
    Encoding(String),
}

pub type Result<T> = std::result::Result<T, MaterialError>;
