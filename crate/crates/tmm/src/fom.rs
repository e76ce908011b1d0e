use serde::{Deserialize, Serialize};

use crate::{Result, SweepResult, TmmError};

/// Which response quantity a band scores.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Quantity {
    T,
    R,
    A,
}

/// One scored wavelength band.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FomBand {
    pub lo_um: f64,
    pub hi_um: f64,
    pub quantity: Quantity,
    pub weight: f64,
}

/// Weighted band-average figure of merit.
///
/// Each band contributes the plain mean of its quantity over the grid points
/// inside [lo, hi], averaged over all swept conditions; the figure of merit
/// is the weight-normalized sum, so it lies in [0, 1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<FomBand>", into = "Vec<FomBand>")]
pub struct FomSpec {
    bands: Vec<FomBand>,
}

impl FomSpec {
    pub fn new(bands: Vec<FomBand>) -> Result<Self> {
        if bands.is_empty() {
            return Err(TmmError::Config("figure of merit needs at least one band".into()));
        }
        let mut weight_sum = 0.0;
        for band in &bands {
            if !(band.lo_um.is_finite() && band.hi_um.is_finite() && band.lo_um < band.hi_um) {
                return Err(TmmError::Config(format!(
                    "band [{}, {}] um must satisfy lo < hi",
                    band.lo_um, band.hi_um
                )));
            }
            if !(band.weight.is_finite() && band.weight >= 0.0) {
                return Err(TmmError::Config(format!(
                    "band weight {} must be non-negative",
                    band.weight
                )));
            }
            weight_sum += band.weight;
        }
        if weight_sum <= 0.0 {
            return Err(TmmError::Config("band weights must sum to a positive value".into()));
        }
        Ok(FomSpec { bands })
    }

    /// Transparent-radiative-cooler scoring: transmit the visible, reflect
    /// UV and near infrared, emit through the 8-13 um atmospheric window.
    pub fn default_trc() -> Self {
        FomSpec::new(vec![
            FomBand {
                lo_um: 0.4,
                hi_um: 0.8,
                quantity: Quantity::T,
                weight: 1.0,
            },
            FomBand {
                lo_um: 0.3,
                hi_um: 0.4,
                quantity: Quantity::R,
                weight: 1.0,
            },
            FomBand {
                lo_um: 0.8,
                hi_um: 2.5,
                quantity: Quantity::R,
                weight: 1.0,
            },
            FomBand {
                lo_um: 8.0,
                hi_um: 13.0,
                quantity: Quantity::A,
                weight: 1.0,
            },
        ])
        .expect("built-in band list is valid")
    }

    pub fn bands(&self) -> &[FomBand] {
        &self.bands
    }
}

impl TryFrom<Vec<FomBand>> for FomSpec {
    type Error = TmmError;
    fn try_from(bands: Vec<FomBand>) -> Result<Self> {
        FomSpec::new(bands)
    }
}

impl From<FomSpec> for Vec<FomBand> {
    fn from(spec: FomSpec) -> Vec<FomBand> {
        spec.bands
    }
}

/// Folds a sweep into the scalar figure of merit.
pub fn evaluate_fom(result: &SweepResult, spec: &FomSpec) -> Result<f64> {
    let first = result
        .responses
        .first()
        .ok_or_else(|| TmmError::Config("sweep result has no conditions".into()))?;
    let grid_lo = first.points.first().map(|p| p.wavelength_um).unwrap_or(0.0);
    let grid_hi = first.points.last().map(|p| p.wavelength_um).unwrap_or(0.0);

    let mut weighted = 0.0;
    let mut weight_sum = 0.0;
    for band in spec.bands() {
        if band.lo_um < grid_lo || band.hi_um > grid_hi {
            return Err(TmmError::BandOutsideGrid {
                lo_um: band.lo_um,
                hi_um: band.hi_um,
                grid_lo_um: grid_lo,
                grid_hi_um: grid_hi,
            });
        }
        let mut condition_sum = 0.0;
        for resp in &result.responses {
            let mut acc = 0.0;
            let mut count = 0usize;
            for p in &resp.points {
                if p.wavelength_um >= band.lo_um && p.wavelength_um <= band.hi_um {
                    acc += match band.quantity {
                        Quantity::T => p.t,
                        Quantity::R => p.r,
                        Quantity::A => p.a,
                    };
                    count += 1;
                }
            }
            if count == 0 {
                return Err(TmmError::BandOutsideGrid {
                    lo_um: band.lo_um,
                    hi_um: band.hi_um,
                    grid_lo_um: grid_lo,
                    grid_hi_um: grid_hi,
                });
            }
            condition_sum += acc / count as f64;
        }
        weighted += band.weight * condition_sum / result.responses.len() as f64;
        weight_sum += band.weight;
    }
    Ok(weighted / weight_sum)
}
