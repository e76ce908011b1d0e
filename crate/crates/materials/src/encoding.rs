use bitstring::BitString;

use crate::{Layer, LayerStack, Material, MaterialError, Result};

/// Maps solver bit vectors onto physical stacks.
///
/// Each layer is selected by a group of `bits_per_layer` consecutive bits
/// (most significant bit first within the group) indexing into a palette of
/// exactly `2^bits_per_layer` materials. Total bit-string length is
/// `bits_per_layer * layer_count`.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryEncoding {
    bits_per_layer: usize,
    layer_count: usize,
    palette: Vec<Material>,
    thickness_nm: Vec<f64>,
    ambient: Material,
    substrate: Material,
}

impl BinaryEncoding {
    pub fn new(
        bits_per_layer: usize,
        layer_count: usize,
        palette: Vec<Material>,
        thickness_nm: Vec<f64>,
        ambient: Material,
        substrate: Material,
    ) -> Result<Self> {
        if bits_per_layer == 0 || layer_count == 0 {
            return Err(MaterialError::Encoding(
                "bits_per_layer and layer_count must be positive".into(),
            ));
        }
        if bits_per_layer > 16 {
            return Err(MaterialError::Encoding(format!(
                "bits_per_layer = {bits_per_layer} would need a palette of 2^{bits_per_layer} materials"
            )));
        }
        let expected = 1usize << bits_per_layer;
        if palette.len() != expected {
            return Err(MaterialError::Encoding(format!(
                "palette has {} materials, need exactly {expected} for {bits_per_layer} bit(s) per layer",
                palette.len()
            )));
        }
        if thickness_nm.len() != layer_count {
            return Err(MaterialError::Encoding(format!(
                "{} thicknesses given for {layer_count} layers",
                thickness_nm.len()
            )));
        }
        for &t in &thickness_nm {
            if !(t.is_finite() && t > 0.0) {
                return Err(MaterialError::Physics(format!(
                    "layer thickness {t} nm must be positive and finite"
                )));
            }
        }
        if !ambient.is_lossless() {
            return Err(MaterialError::Physics(format!(
                "ambient material '{}' must be lossless",
                ambient.name()
            )));
        }
        Ok(BinaryEncoding {
            bits_per_layer,
            layer_count,
            palette,
            thickness_nm,
            ambient,
            substrate,
        })
    }

    /// The common case: every layer has the same thickness, ambient and
    /// substrate default to air.
    pub fn uniform(
        bits_per_layer: usize,
        layer_count: usize,
        palette: Vec<Material>,
        thickness_nm: f64,
    ) -> Result<Self> {
        BinaryEncoding::new(
            bits_per_layer,
            layer_count,
            palette,
            vec![thickness_nm; layer_count],
            Material::air(),
            Material::air(),
        )
    }

    pub fn with_ambient(mut self, ambient: Material) -> Result<Self> {
        if !ambient.is_lossless() {
            return Err(MaterialError::Physics(format!(
                "ambient material '{}' must be lossless",
                ambient.name()
            )));
        }
        self.ambient = ambient;
        Ok(self)
    }

    pub fn with_substrate(mut self, substrate: Material) -> Self {
        self.substrate = substrate;
        self
    }

    pub fn bits_per_layer(&self) -> usize {
        self.bits_per_layer
    }

    pub fn layer_count(&self) -> usize {
        self.layer_count
    }

    /// Total bit-string length this encoding consumes.
    pub fn total_bits(&self) -> usize {
        self.bits_per_layer * self.layer_count
    }

    pub fn palette(&self) -> &[Material] {
        &self.palette
    }

    pub fn ambient(&self) -> &Material {
        &self.ambient
    }

    pub fn substrate(&self) -> &Material {
        &self.substrate
    }
}

/// Decodes a bit vector into a stack: bit group `j` selects the material of
/// layer `j`. Deterministic and injective for a fixed encoding.
pub fn decode(bits: &BitString, encoding: &BinaryEncoding) -> Result<LayerStack> {
    if bits.len() != encoding.total_bits() {
        return Err(MaterialError::Encoding(format!(
            "bit string length {} does not match encoding length {} ({} layer(s) x {} bit(s))",
            bits.len(),
            encoding.total_bits(),
            encoding.layer_count,
            encoding.bits_per_layer
        )));
    }
    let mut layers = Vec::with_capacity(encoding.layer_count);
    for j in 0..encoding.layer_count {
        let mut index = 0usize;
        for b in 0..encoding.bits_per_layer {
            index = (index << 1) | bits.get(j * encoding.bits_per_layer + b) as usize;
        }
        layers.push(Layer {
            material: encoding.palette[index].clone(),
            thickness_nm: encoding.thickness_nm[j],
        });
    }
    LayerStack::new(
        encoding.ambient.clone(),
        layers,
        encoding.substrate.clone(),
    )
}
