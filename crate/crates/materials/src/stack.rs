use serde::{Deserialize, Serialize};

use crate::{Material, MaterialError, Result};

/// One physical layer: a material reference and a thickness in nanometers.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub material: Material,
    pub thickness_nm: f64,
}

impl Layer {
    pub fn new(material: Material, thickness_nm: f64) -> Result<Self> {
        if !(thickness_nm.is_finite() && thickness_nm > 0.0) {
            return Err(MaterialError::Physics(format!(
                "layer thickness {thickness_nm} nm must be positive and finite"
            )));
        }
        Ok(Layer {
            material,
            thickness_nm,
        })
    }
}

/// A multilayer: semi-infinite ambient, N >= 0 finite layers front-to-back,
/// semi-infinite substrate. The ambient must be lossless so incidence angles
/// stay real.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerStack {
    pub ambient: Material,
    pub layers: Vec<Layer>,
    pub substrate: Material,
}

impl LayerStack {
    pub fn new(ambient: Material, layers: Vec<Layer>, substrate: Material) -> Result<Self> {
        if !ambient.is_lossless() {
            return Err(MaterialError::Physics(format!(
                "ambient material '{}' must be lossless (k = 0 at all wavelengths)",
                ambient.name()
            )));
        }
        Ok(LayerStack {
            ambient,
            layers,
            substrate,
        })
    }

    /// Bare interface (or identity when ambient equals substrate).
    pub fn bare(ambient: Material, substrate: Material) -> Result<Self> {
        LayerStack::new(ambient, Vec::new(), substrate)
    }

    pub fn layer_count(&self) -> usize {
        self.layers.len()
    }

    /// True if every medium in the stack has k = 0.
    pub fn is_lossless(&self) -> bool {
        self.ambient.is_lossless()
            && self.substrate.is_lossless()
            && self.layers.iter().all(|l| l.material.is_lossless())
    }

    /// Same stack with the finite layers in reverse order.
    pub fn reversed_layers(&self) -> Self {
        let mut layers = self.layers.clone();
        layers.reverse();
        LayerStack {
            ambient: self.ambient.clone(),
            layers,
            substrate: self.substrate.clone(),
        }
    }
}

/// Strictly increasing, non-empty list of wavelengths in micrometers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct SpectralGrid {
    wavelengths_um: Vec<f64>,
}

impl SpectralGrid {
    pub fn new(wavelengths_um: Vec<f64>) -> Result<Self> {
        if wavelengths_um.is_empty() {
            return Err(MaterialError::Schema("spectral grid is empty".into()));
        }
        for w in &wavelengths_um {
            if !(w.is_finite() && *w > 0.0) {
                return Err(MaterialError::Schema(format!(
                    "grid wavelength {w} um is not positive and finite"
                )));
            }
        }
        for pair in wavelengths_um.windows(2) {
            if pair[1] <= pair[0] {
                return Err(MaterialError::Schema(format!(
                    "grid wavelengths not strictly increasing ({} then {})",
                    pair[0], pair[1]
                )));
            }
        }
        Ok(SpectralGrid { wavelengths_um })
    }

    /// `points` equally spaced wavelengths covering [min, max].
    pub fn linspace(min_um: f64, max_um: f64, points: usize) -> Result<Self> {
        if points < 2 || !(max_um > min_um) {
            return Err(MaterialError::Schema(format!(
                "bad linspace grid: [{min_um}, {max_um}] with {points} points"
            )));
        }
        let step = (max_um - min_um) / (points - 1) as f64;
        SpectralGrid::new((0..points).map(|i| min_um + step * i as f64).collect())
    }

    pub fn wavelengths(&self) -> &[f64] {
        &self.wavelengths_um
    }

    pub fn len(&self) -> usize {
        self.wavelengths_um.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn min_um(&self) -> f64 {
        self.wavelengths_um[0]
    }

    pub fn max_um(&self) -> f64 {
        self.wavelengths_um[self.wavelengths_um.len() - 1]
    }
}

impl TryFrom<Vec<f64>> for SpectralGrid {
    type Error = MaterialError;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        SpectralGrid::new(v)
    }
}

impl From<SpectralGrid> for Vec<f64> {
    fn from(g: SpectralGrid) -> Vec<f64> {
        g.wavelengths_um
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarization {
    S,
    P,
    Unpolarized,
}

impl std::fmt::Display for Polarization {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Polarization::S => write!(f, "s"),
            Polarization::P => write!(f, "p"),
            Polarization::Unpolarized => write!(f, "unpolarized"),
        }
    }
}

/// One simulation condition: incidence angle (degrees, 0..=89) and
/// polarization state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IncidenceCondition {
    pub angle_deg: f64,
    pub polarization: Polarization,
}

impl IncidenceCondition {
    pub fn new(angle_deg: f64, polarization: Polarization) -> Result<Self> {
        if !(angle_deg.is_finite() && (0.0..=89.0).contains(&angle_deg)) {
            return Err(MaterialError::Physics(format!(
                "incidence angle {angle_deg} deg outside [0, 89]"
            )));
        }
        Ok(IncidenceCondition {
            angle_deg,
            polarization,
        })
    }

    pub fn normal(polarization: Polarization) -> Self {
        IncidenceCondition {
            angle_deg: 0.0,
            polarization,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ambient_must_be_lossless() {
        let lossy = Material::constant("metal", 1.0, 2.0).unwrap();
        let err = LayerStack::bare(lossy, Material::air()).unwrap_err();
        assert!(matches!(err, MaterialError::Physics(_)));
    }

    #[test]
    fn empty_stack_is_legal() {
        let s = LayerStack::bare(Material::air(), Material::air()).unwrap();
        assert_eq!(s.layer_count(), 0);
        assert!(s.is_lossless());
    }

    #[test]
    fn layer_thickness_must_be_positive() {
        assert!(Layer::new(Material::air(), 0.0).is_err());
        assert!(Layer::new(Material::air(), -5.0).is_err());
        assert!(Layer::new(Material::air(), f64::NAN).is_err());
    }

    #[test]
    fn grid_validation() {
        assert!(SpectralGrid::new(vec![]).is_err());
        assert!(SpectralGrid::new(vec![0.5, 0.5]).is_err());
        assert!(SpectralGrid::new(vec![0.5, 0.4]).is_err());
        let g = SpectralGrid::linspace(0.4, 0.8, 5).unwrap();
        assert_eq!(g.len(), 5);
        for (got, want) in g.wavelengths().iter().zip([0.4, 0.5, 0.6, 0.7, 0.8]) {
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
    }

    #[test]
    fn angle_bounds() {
        assert!(IncidenceCondition::new(89.0, Polarization::S).is_ok());
        assert!(IncidenceCondition::new(89.1, Polarization::S).is_err());
        assert!(IncidenceCondition::new(-0.1, Polarization::S).is_err());
    }
}
