use std::io::{BufRead, BufReader, Read};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{MaterialError, Result};

/// One tabulated dispersion point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DispersionRow {
    pub wavelength_um: f64,
    pub n: f64,
    pub k: f64,
}

/// A material with a tabulated complex refractive index.
///
/// The table is strictly increasing in wavelength. A single-row table is a
/// constant-index material: it returns the same index at every wavelength
/// instead of erroring out of range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Material {
    name: String,
    rows: Vec<DispersionRow>,
}

impl Material {
    /// Builds a material from dispersion rows, validating the table.
    pub fn new(name: impl Into<String>, rows: Vec<DispersionRow>) -> Result<Self> {
        let name = name.into();
        if rows.is_empty() {
            return Err(MaterialError::Schema(format!(
                "material '{name}': dispersion table is empty"
            )));
        }
        for row in &rows {
            if !row.wavelength_um.is_finite() || row.wavelength_um <= 0.0 {
                return Err(MaterialError::Schema(format!(
                    "material '{name}': wavelength {} um is not positive and finite",
                    row.wavelength_um
                )));
            }
            if !(row.n.is_finite() && row.n > 0.0) {
                return Err(MaterialError::Physics(format!(
                    "material '{name}': n = {} at {} um (need n > 0)",
                    row.n, row.wavelength_um
                )));
            }
            if !(row.k.is_finite() && row.k >= 0.0) {
                return Err(MaterialError::Physics(format!(
                    "material '{name}': k = {} at {} um (need k >= 0)",
                    row.k, row.wavelength_um
                )));
            }
        }
        for pair in rows.windows(2) {
            if pair[1].wavelength_um <= pair[0].wavelength_um {
                return Err(MaterialError::Schema(format!(
                    "material '{name}': wavelengths not strictly increasing ({} um then {} um)",
                    pair[0].wavelength_um, pair[1].wavelength_um
                )));
            }
        }
        Ok(Material { name, rows })
    }

    /// A wavelength-independent material with index `n + ik`.
    pub fn constant(name: impl Into<String>, n: f64, k: f64) -> Result<Self> {
        Material::new(
            name,
            vec![DispersionRow {
                wavelength_um: 1.0,
                n,
                k,
            }],
        )
    }

    /// Non-dispersive vacuum/air, n = 1.
    pub fn air() -> Self {
        Material::constant("air", 1.0, 0.0).expect("air is a valid material")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn rows(&self) -> &[DispersionRow] {
        &self.rows
    }

    /// Single-row tables extend their value to every wavelength.
    pub fn is_constant_index(&self) -> bool {
        self.rows.len() == 1
    }

    /// True if k = 0 at every tabulated wavelength.
    pub fn is_lossless(&self) -> bool {
        self.rows.iter().all(|r| r.k == 0.0)
    }

    /// Complex refractive index n + ik at `wavelength_um`, linearly
    /// interpolating n and k separately between bracketing rows. Exact at
    /// grid points; out-of-range lookups are an error, never extrapolated.
    pub fn refractive_index_at(&self, wavelength_um: f64) -> Result<Complex64> {
        if self.is_constant_index() {
            let r = self.rows[0];
            return Ok(Complex64::new(r.n, r.k));
        }
        let (min, max) = (
            self.rows[0].wavelength_um,
            self.rows[self.rows.len() - 1].wavelength_um,
        );
        if !(wavelength_um >= min && wavelength_um <= max) {
            return Err(MaterialError::Range {
                name: self.name.clone(),
                wavelength_um,
                min_um: min,
                max_um: max,
            });
        }
        // partition_point gives the first row with wavelength > target, so
        // idx-1 and idx bracket it; grid points hit the exact-row fast path.
        let idx = self
            .rows
            .partition_point(|r| r.wavelength_um <= wavelength_um);
        if idx > 0 && self.rows[idx - 1].wavelength_um == wavelength_um {
            let r = self.rows[idx - 1];
            return Ok(Complex64::new(r.n, r.k));
        }
        let lo = self.rows[idx - 1];
        let hi = self.rows[idx];
        let t = (wavelength_um - lo.wavelength_um) / (hi.wavelength_um - lo.wavelength_um);
        Ok(Complex64::new(
            lo.n + t * (hi.n - lo.n),
            lo.k + t * (hi.k - lo.k),
        ))
    }
}

const CSV_HEADER: &str = "wavelength_um,n,k";

/// Loads a dispersion table from CSV (`wavelength_um,n,k`, one header line).
pub fn load_dispersion(name: impl Into<String>, source: impl Read) -> Result<Material> {
    let name = name.into();
    let reader = BufReader::new(source);
    let mut lines = reader.lines().enumerate();

    let header = match lines.next() {
        Some((_, Ok(line))) => line,
        Some((_, Err(e))) => return Err(MaterialError::Schema(format!("read failure: {e}"))),
        None => return Err(MaterialError::Schema("empty dispersion file".into())),
    };
    if header.trim() != CSV_HEADER {
        return Err(MaterialError::Schema(format!(
            "bad header '{}' (expected '{CSV_HEADER}')",
            header.trim()
        )));
    }

    let mut rows = Vec::new();
    for (lineno, line) in lines {
        let line = line.map_err(|e| MaterialError::Schema(format!("read failure: {e}")))?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let fields: Vec<&str> = trimmed.split(',').map(str::trim).collect();
        if fields.len() != 3 {
            return Err(MaterialError::Schema(format!(
                "line {}: expected 3 comma-separated fields, got {}",
                lineno + 1,
                fields.len()
            )));
        }
        let parse = |field: &str, what: &str| -> Result<f64> {
            field.parse::<f64>().map_err(|_| {
                MaterialError::Schema(format!(
                    "line {}: cannot parse {what} from '{field}'",
                    lineno + 1
                ))
            })
        };
        rows.push(DispersionRow {
            wavelength_um: parse(fields[0], "wavelength")?,
            n: parse(fields[1], "n")?,
            k: parse(fields[2], "k")?,
        });
    }
    if rows.is_empty() {
        return Err(MaterialError::Schema("dispersion file has no data rows".into()));
    }
    Material::new(name, rows)
}

/// Writes the table back out in the load format. Floats use the shortest
/// representation that parses back to the identical bits, so a
/// serialize/load cycle reproduces the table exactly.
pub fn serialize_dispersion(material: &Material) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for row in material.rows() {
        out.push_str(&format!("{},{},{}\n", row.wavelength_um, row.n, row.k));
    }
    out
}
