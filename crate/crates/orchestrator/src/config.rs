use std::fs;
use std::path::{Path, PathBuf};

use fm::TrainConfig;
use materials::{
    load_dispersion, BinaryEncoding, IncidenceCondition, Material, Polarization, SpectralGrid,
};
use serde::{Deserialize, Serialize};
use tmm::FomSpec;

use crate::{OrchestratorError, Result};

/// A material in the run config: inline constant index or a dispersion CSV.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MaterialSpec {
    Constant {
        name: String,
        n: f64,
        #[serde(default)]
        k: f64,
    },
    File {
        csv: PathBuf,
        #[serde(default)]
        name: Option<String>,
    },
}

impl MaterialSpec {
    /// Loads the material; relative CSV paths resolve against `base`.
    pub fn load(&self, base: Option<&Path>) -> Result<Material> {
        match self {
            MaterialSpec::Constant { name, n, k } => Ok(Material::constant(name.clone(), *n, *k)?),
            MaterialSpec::File { csv, name } => {
                let path = match base {
                    Some(dir) if csv.is_relative() => dir.join(csv),
                    _ => csv.clone(),
                };
                let label = name.clone().unwrap_or_else(|| {
                    path.file_stem()
                        .map(|s| s.to_string_lossy().into_owned())
                        .unwrap_or_else(|| "material".into())
                });
                let file = fs::File::open(&path).map_err(|e| {
                    OrchestratorError::Config(format!("cannot open {}: {e}", path.display()))
                })?;
                Ok(load_dispersion(label, file)?)
            }
        }
    }
}

/// Wavelength grid: evenly spaced or explicit.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridSpec {
    Linspace {
        min_um: f64,
        max_um: f64,
        points: usize,
    },
    Explicit {
        wavelengths_um: Vec<f64>,
    },
}

impl GridSpec {
    pub fn build(&self) -> Result<SpectralGrid> {
        Ok(match self {
            GridSpec::Linspace {
                min_um,
                max_um,
                points,
            } => SpectralGrid::linspace(*min_um, *max_um, *points)?,
            GridSpec::Explicit { wavelengths_um } => SpectralGrid::new(wavelengths_um.clone())?,
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EncodingSpec {
    pub bits_per_layer: usize,
    pub layer_count: usize,
    pub palette: Vec<MaterialSpec>,
    pub thickness_nm: f64,
    #[serde(default)]
    pub ambient: Option<MaterialSpec>,
    #[serde(default)]
    pub substrate: Option<MaterialSpec>,
}

impl EncodingSpec {
    pub fn build(&self, base: Option<&Path>) -> Result<BinaryEncoding> {
        let palette: Result<Vec<Material>> = self.palette.iter().map(|m| m.load(base)).collect();
        let mut encoding = BinaryEncoding::uniform(
            self.bits_per_layer,
            self.layer_count,
            palette?,
            self.thickness_nm,
        )?;
        if let Some(ambient) = &self.ambient {
            encoding = encoding.with_ambient(ambient.load(base)?)?;
        }
        if let Some(substrate) = &self.substrate {
            encoding = encoding.with_substrate(substrate.load(base)?);
        }
        Ok(encoding)
    }
}

/// Which minimizer attacks the compiled QUBO each iteration.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum SolverSpec {
    /// Exact enumeration; needs <= 26 bits.
    Exhaustive {},
    Annealing {
        #[serde(default = "default_sweeps")]
        sweeps: usize,
        /// Absent temperatures scale automatically to the instance.
        #[serde(default)]
        t_hot: Option<f64>,
        #[serde(default)]
        t_cold: Option<f64>,
        #[serde(default = "default_sa_restarts")]
        restarts: usize,
    },
    /// Statevector QAOA; needs <= 24 bits.
    Qaoa {
        #[serde(default = "default_p")]
        p: usize,
        #[serde(default = "default_shots")]
        shots: u64,
        #[serde(default = "default_qaoa_restarts")]
        restarts: usize,
        /// 0 means 250 * p.
        #[serde(default)]
        outer_budget: usize,
    },
    /// Pure random proposals: the no-surrogate baseline the loop is
    /// measured against.
    Random {},
}

fn default_sweeps() -> usize {
    200
}
fn default_sa_restarts() -> usize {
    10
}
fn default_p() -> usize {
    1
}
fn default_shots() -> u64 {
    1024
}
fn default_qaoa_restarts() -> usize {
    5
}

impl SolverSpec {
    pub fn label(&self) -> &'static str {
        match self {
            SolverSpec::Exhaustive {} => "exhaustive",
            SolverSpec::Annealing { .. } => "annealing",
            SolverSpec::Qaoa { .. } => "qaoa",
            SolverSpec::Random {} => "random",
        }
    }
}

fn default_initial_points() -> usize {
    20
}
fn default_max_iterations() -> usize {
    100
}
fn default_workers() -> usize {
    1
}

/// The run-config document. Unknown keys are rejected.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub encoding: EncodingSpec,
    /// Figure-of-merit bands; defaults to the transparent-radiative-cooler
    /// scoring when absent.
    #[serde(default)]
    pub fom: Option<FomSpec>,
    pub grid: GridSpec,
    pub conditions: Vec<IncidenceCondition>,
    pub solver: SolverSpec,
    #[serde(default)]
    pub fm: TrainConfig,
    #[serde(default = "default_initial_points")]
    pub initial_points: usize,
    #[serde(default = "default_max_iterations")]
    pub max_iterations: usize,
    /// Stop after this many consecutive iterations without a new best
    /// figure of merit; absent disables the patience stop.
    #[serde(default)]
    pub stop_patience: Option<usize>,
    #[serde(default = "default_workers")]
    pub workers: usize,
    #[serde(default)]
    pub seed: u64,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text)
            .map_err(|e| OrchestratorError::Config(format!("run config: {e}")))
    }

    /// Parses a config file; material CSV paths resolve against its parent
    /// directory.
    pub fn from_path(path: &Path) -> Result<(Self, Option<PathBuf>)> {
        let text = fs::read_to_string(path).map_err(|e| {
            OrchestratorError::Config(format!("cannot read {}: {e}", path.display()))
        })?;
        let config = RunConfig::from_json(&text)?;
        Ok((config, path.parent().map(Path::to_path_buf)))
    }

    /// Materializes and validates everything the loop needs.
    pub fn build(&self, base: Option<&Path>) -> Result<BuiltConfig> {
        if self.initial_points < 2 {
            return Err(OrchestratorError::Config(format!(
                "initial_points = {} but the surrogate needs at least 2 seed rows",
                self.initial_points
            )));
        }
        if self.max_iterations == 0 {
            return Err(OrchestratorError::Config("max_iterations must be >= 1".into()));
        }
        if self.workers == 0 {
            return Err(OrchestratorError::Config("workers must be >= 1".into()));
        }
        let encoding = self.encoding.build(base)?;
        let total_bits = encoding.total_bits();
        match &self.solver {
            SolverSpec::Exhaustive {} if total_bits > qubo::BRUTE_FORCE_MAX_BITS => {
                return Err(OrchestratorError::Config(format!(
                    "exhaustive solver cannot handle {total_bits} bits (cap {})",
                    qubo::BRUTE_FORCE_MAX_BITS
                )));
            }
            SolverSpec::Qaoa { .. } if total_bits > qaoa::MAX_QUBITS => {
                return Err(OrchestratorError::Config(format!(
                    "qaoa solver cannot handle {total_bits} bits (cap {})",
                    qaoa::MAX_QUBITS
                )));
            }
            _ => {}
        }
        if total_bits < 63 {
            let space = 1u64 << total_bits;
            if self.initial_points as u64 > space {
                return Err(OrchestratorError::Config(format!(
                    "initial_points = {} exceeds the {space}-state space of {total_bits} bits",
                    self.initial_points
                )));
            }
        }
        let grid = self.grid.build()?;
        if self.conditions.is_empty() {
            return Err(OrchestratorError::Config("conditions must not be empty".into()));
        }
        for cond in &self.conditions {
            IncidenceCondition::new(cond.angle_deg, cond.polarization)?;
        }
        let fom = self.fom.clone().unwrap_or_else(FomSpec::default_trc);
        Ok(BuiltConfig {
            encoding,
            grid,
            conditions: self.conditions.clone(),
            fom,
            solver: self.solver.clone(),
            fm: self.fm.clone(),
            initial_points: self.initial_points,
            max_iterations: self.max_iterations,
            stop_patience: self.stop_patience,
            workers: self.workers,
            seed: self.seed,
        })
    }
}

/// Validated, materialized run configuration.
#[derive(Debug, Clone)]
pub struct BuiltConfig {
    pub encoding: BinaryEncoding,
    pub grid: SpectralGrid,
    pub conditions: Vec<IncidenceCondition>,
    pub fom: FomSpec,
    pub solver: SolverSpec,
    pub fm: TrainConfig,
    pub initial_points: usize,
    pub max_iterations: usize,
    pub stop_patience: Option<usize>,
    pub workers: usize,
    pub seed: u64,
}

impl BuiltConfig {
    pub fn total_bits(&self) -> usize {
        self.encoding.total_bits()
    }
}

/// Conditions helper for the CLI and benches: `count` angles evenly spread
/// over [0, 89] with the given polarization.
pub fn spread_conditions(count: usize, polarization: Polarization) -> Vec<IncidenceCondition> {
    (0..count)
        .map(|i| {
            let angle = if count <= 1 {
                0.0
            } else {
                89.0 * i as f64 / (count - 1) as f64
            };
            IncidenceCondition::new(angle, polarization).expect("angle stays in [0, 89]")
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal_config_json() -> String {
        r#"{
            "encoding": {
                "bits_per_layer": 1,
                "layer_count": 8,
                "palette": [
                    {"name": "low", "n": 1.5},
                    {"name": "high", "n": 2.5}
                ],
                "thickness_nm": 100.0,
                "substrate": {"name": "glass", "n": 1.52}
            },
            "fom": [
                {"lo_um": 0.45, "hi_um": 0.75, "quantity": "R", "weight": 1.0}
            ],
            "grid": {"min_um": 0.4, "max_um": 0.8, "points": 16},
            "conditions": [{"angle_deg": 0.0, "polarization": "s"}],
            "solver": {"kind": "annealing", "sweeps": 100, "restarts": 4},
            "fm": {"epochs": 50, "learning_rate": 0.05},
            "initial_points": 10,
            "max_iterations": 20,
            "workers": 2,
            "seed": 7
        }"#
        .to_string()
    }

    #[test]
    fn parses_and_builds_a_full_config() {
        let config = RunConfig::from_json(&minimal_config_json()).unwrap();
        let built = config.build(None).unwrap();
        assert_eq!(built.total_bits(), 8);
        assert_eq!(built.conditions.len(), 1);
        assert_eq!(built.fm.epochs, 50);
        assert_eq!(built.solver.label(), "annealing");
        assert_eq!(built.grid.len(), 16);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let bad = minimal_config_json().replace("\"seed\": 7", "\"seed\": 7, \"wat\": 1");
        assert!(matches!(
            RunConfig::from_json(&bad),
            Err(OrchestratorError::Config(_))
        ));
    }

    #[test]
    fn solver_capacity_is_validated() {
        let config = minimal_config_json()
            .replace("\"layer_count\": 8", "\"layer_count\": 30")
            .replace(
                "{\"kind\": \"annealing\", \"sweeps\": 100, \"restarts\": 4}",
                "{\"kind\": \"qaoa\"}",
            );
        let parsed = RunConfig::from_json(&config).unwrap();
        assert!(matches!(
            parsed.build(None),
            Err(OrchestratorError::Config(_))
        ));
    }

    #[test]
    fn default_fom_is_the_trc_scoring() {
        let text = r#"{
            "encoding": {
                "bits_per_layer": 1,
                "layer_count": 8,
                "palette": [{"name": "a", "n": 1.5}, {"name": "b", "n": 2.0}],
                "thickness_nm": 90.0
            },
            "grid": {"min_um": 0.3, "max_um": 13.0, "points": 32},
            "conditions": [{"angle_deg": 0.0, "polarization": "unpolarized"}],
            "solver": {"kind": "exhaustive"}
        }"#;
        let built = RunConfig::from_json(text).unwrap().build(None).unwrap();
        assert_eq!(built.fom.bands().len(), 4);
    }

    #[test]
    fn material_csv_paths_resolve_against_base() {
        let dir = std::env::temp_dir().join(format!("cfg-test-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        std::fs::write(
            dir.join("mat.csv"),
            "wavelength_um,n,k\n0.3,1.5,0.0\n14.0,1.4,0.0\n",
        )
        .unwrap();
        let spec = MaterialSpec::File {
            csv: PathBuf::from("mat.csv"),
            name: None,
        };
        let m = spec.load(Some(&dir)).unwrap();
        assert_eq!(m.name(), "mat");
        assert_eq!(m.rows().len(), 2);
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn spread_conditions_cover_the_angle_range() {
        let conds = spread_conditions(5, Polarization::S);
        assert_eq!(conds.len(), 5);
        assert_eq!(conds[0].angle_deg, 0.0);
        assert_eq!(conds[4].angle_deg, 89.0);
    }
}
