use std::collections::HashSet;
use std::io::{BufRead, BufReader, Read, Write};

use bitstring::BitString;
use serde::{Deserialize, Serialize};

use crate::{FmError, Result};

/// Where a dataset row came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    /// Initial random seeding of the loop.
    Seed,
    /// Proposed by the configured solver.
    Solver,
    /// Solver proposal was already known; replaced by a perturbed or fresh
    /// random vector.
    Perturbation,
}

/// Training rows: binary vectors of a fixed length n with real-valued
/// targets. Duplicate rows are rejected at append time.
///
/// Targets are what the model fits. The optimization loop stores the
/// negated figure of merit so that minimizing the surrogate maximizes the
/// figure of merit; the CSV form (`bits,fom`) carries the positive figure
/// of merit and the sign flips at the file boundary.
#[derive(Debug, Clone)]
pub struct Dataset {
    n: usize,
    rows: Vec<BitString>,
    targets: Vec<f64>,
    tags: Vec<Provenance>,
    seen: HashSet<BitString>,
}

impl Dataset {
    pub fn new(n: usize) -> Self {
        Dataset {
            n,
            rows: Vec::new(),
            targets: Vec::new(),
            tags: Vec::new(),
            seen: HashSet::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn contains(&self, bits: &BitString) -> bool {
        self.seen.contains(bits)
    }

    pub fn append(&mut self, bits: BitString, target: f64, tag: Provenance) -> Result<()> {
        if bits.len() != self.n {
            return Err(FmError::Dimension(format!(
                "row length {} does not match dataset n = {}",
                bits.len(),
                self.n
            )));
        }
        if !target.is_finite() {
            return Err(FmError::Dimension(format!("non-finite target {target}")));
        }
        if self.seen.contains(&bits) {
            return Err(FmError::Duplicate(bits.to_string()));
        }
        self.seen.insert(bits.clone());
        self.rows.push(bits);
        self.targets.push(target);
        self.tags.push(tag);
        Ok(())
    }

    pub fn rows(&self) -> &[BitString] {
        &self.rows
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    pub fn tags(&self) -> &[Provenance] {
        &self.tags
    }

    pub fn iter(&self) -> impl Iterator<Item = (&BitString, f64)> {
        self.rows.iter().zip(self.targets.iter().copied())
    }

    /// Reads `bits,fom` CSV; targets become the negated fom column.
    pub fn read_csv(source: impl Read) -> Result<Self> {
        let reader = BufReader::new(source);
        let mut lines = reader.lines().enumerate();
        match lines.next() {
            Some((_, Ok(header))) if header.trim() == "bits,fom" => {}
            Some((_, Ok(header))) => {
                return Err(FmError::Schema(format!(
                    "bad header '{}' (expected 'bits,fom')",
                    header.trim()
                )))
            }
            Some((_, Err(e))) => return Err(e.into()),
            None => return Err(FmError::Schema("empty dataset file".into())),
        }
        let mut dataset: Option<Dataset> = None;
        for (lineno, line) in lines {
            let line = line?;
            let trimmed = line.trim();
            if trimmed.is_empty() {
                continue;
            }
            let (bits_text, fom_text) = trimmed.split_once(',').ok_or_else(|| {
                FmError::Schema(format!("line {}: expected 'bits,fom'", lineno + 1))
            })?;
            let bits: BitString = bits_text
                .trim()
                .parse()
                .map_err(|e| FmError::Schema(format!("line {}: {e}", lineno + 1)))?;
            let fom: f64 = fom_text.trim().parse().map_err(|_| {
                FmError::Schema(format!(
                    "line {}: cannot parse fom from '{fom_text}'",
                    lineno + 1
                ))
            })?;
            let ds = dataset.get_or_insert_with(|| Dataset::new(bits.len()));
            ds.append(bits, -fom, Provenance::Seed)?;
        }
        dataset.ok_or_else(|| FmError::Schema("dataset file has no data rows".into()))
    }

    /// Writes `bits,fom` CSV; the fom column is the negated target.
    pub fn write_csv(&self, mut sink: impl Write) -> Result<()> {
        writeln!(sink, "bits,fom")?;
        for (bits, target) in self.iter() {
            writeln!(sink, "{bits},{}", -target)?;
        }
        Ok(())
    }
}
