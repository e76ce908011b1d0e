//! Scaling and accuracy benchmarks, emitted as plain CSV.
//!
//! Absolute wall-clock numbers are machine-bound; the tables therefore
//! always carry a serial baseline and speedup columns so the interesting
//! quantity is relative.

use std::fmt::Write as _;
use std::time::Instant;

use bitstring::BitString;
use fm::{Dataset, Provenance, TrainConfig};
use materials::{BinaryEncoding, Material, Polarization, SpectralGrid};
use qubo::{anneal_best_of, brute_force, random_qubo, AnnealConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tmm::sweep;

use crate::config::spread_conditions;
use crate::{OrchestratorError, Result};

/// Sweep wall-clock across (condition count, worker count) cells.
///
/// Builds an alternating two-material stack with `layers` layers, sweeps a
/// fixed wavelength grid under each condition count, and reports elapsed
/// seconds plus speedup against the single-worker baseline of the same
/// row block.
pub fn bench_tmm(
    layers: usize,
    grid_points: usize,
    condition_counts: &[usize],
    workers_list: &[usize],
) -> Result<String> {
    if condition_counts.is_empty() || workers_list.is_empty() {
        return Err(OrchestratorError::Config(
            "bench-tmm needs conditions and workers lists".into(),
        ));
    }
    let low = Material::constant("low", 1.5, 0.0)?;
    let high = Material::constant("high", 2.3, 0.0)?;
    let encoding = BinaryEncoding::uniform(1, layers, vec![low, high], 100.0)?;
    let bits = BitString::from_fn(layers, |i| i % 2 == 1);
    let stack = materials::decode(&bits, &encoding)?;
    let grid = SpectralGrid::linspace(0.4, 2.4, grid_points)?;

    let mut csv = String::from("conditions,workers,elapsed_s,matrix_ops,speedup_vs_serial\n");
    for &count in condition_counts {
        let conditions = spread_conditions(count, Polarization::S);
        let serial = sweep(&stack, &grid, &conditions, 1)?;
        let serial_elapsed = serial.duration.as_secs_f64();
        writeln!(
            csv,
            "{count},1,{serial_elapsed:.6},{},1.000",
            serial.matrix_ops
        )
        .expect("writing to a String cannot fail");
        for &workers in workers_list {
            if workers == 1 {
                continue;
            }
            let result = sweep(&stack, &grid, &conditions, workers)?;
            let elapsed = result.duration.as_secs_f64();
            writeln!(
                csv,
                "{count},{workers},{elapsed:.6},{},{:.3}",
                result.matrix_ops,
                serial_elapsed / elapsed
            )
            .expect("writing to a String cannot fail");
        }
    }
    Ok(csv)
}

/// Synthetic training set of `rows` distinct random bit vectors with
/// uniform targets.
fn synthetic_dataset(bits: usize, rows: usize, rng: &mut ChaCha8Rng) -> Result<Dataset> {
    let mut ds = Dataset::new(bits);
    while ds.len() < rows {
        let x = BitString::random(bits, rng);
        if ds.contains(&x) {
            continue;
        }
        ds.append(x, -rng.random::<f64>(), Provenance::Seed)?;
    }
    Ok(ds)
}

/// Training wall-clock across (dataset shape, worker count) cells. Shapes
/// are (decision variables, row count) pairs.
pub fn bench_fm(
    shapes: &[(usize, usize)],
    workers_list: &[usize],
    epochs: usize,
    seed: u64,
) -> Result<String> {
    if shapes.is_empty() || workers_list.is_empty() {
        return Err(OrchestratorError::Config(
            "bench-fm needs shapes and workers lists".into(),
        ));
    }
    let mut csv = String::from("n_d,n_t,workers,epochs,elapsed_s,speedup_vs_serial\n");
    for &(n_d, n_t) in shapes {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dataset = synthetic_dataset(n_d, n_t, &mut rng)?;
        let mut serial_elapsed = None;
        for workers in std::iter::once(&1usize).chain(workers_list.iter().filter(|&&w| w != 1)) {
            let config = TrainConfig {
                epochs,
                workers: *workers,
                seed,
                ..TrainConfig::default()
            };
            let started = Instant::now();
            let trained = fm::train(&dataset, &config)?;
            let elapsed = started.elapsed().as_secs_f64();
            assert!(trained.best_loss.is_finite());
            let baseline = *serial_elapsed.get_or_insert(elapsed);
            writeln!(
                csv,
                "{n_d},{n_t},{workers},{epochs},{elapsed:.6},{:.3}",
                baseline / elapsed
            )
            .expect("writing to a String cannot fail");
        }
    }
    Ok(csv)
}

/// Solver accuracy and time-to-solution per problem size: exhaustive
/// enumeration as ground truth, annealing, and QAOA.
pub fn bench_qaoa(
    sizes: &[usize],
    qaoa_config: &qaoa::QaoaConfig,
    sa_sweeps: usize,
    sa_restarts: usize,
    seed: u64,
) -> Result<String> {
    if sizes.is_empty() {
        return Err(OrchestratorError::Config("bench-qaoa needs a sizes list".into()));
    }
    let mut csv =
        String::from("n,solver,energy,optimum,accuracy,accuracy_mode,elapsed_s,evaluations\n");
    for &n in sizes {
        if n > qaoa::MAX_QUBITS {
            return Err(OrchestratorError::Config(format!(
                "bench-qaoa size {n} exceeds the {}-qubit statevector capacity",
                qaoa::MAX_QUBITS
            )));
        }
        let q = random_qubo(n, seed.wrapping_add(n as u64))?;
        let exact = brute_force(&q)?;
        let mut emit = |solver: &str, energy: f64, elapsed: f64, evaluations: u64| {
            let acc = qubo::accuracy(energy, exact.energy);
            let mode = match acc.mode {
                qubo::AccuracyMode::Ratio => "ratio",
                qubo::AccuracyMode::Gap => "gap",
            };
            writeln!(
                csv,
                "{n},{solver},{energy:.12e},{:.12e},{:.6},{mode},{elapsed:.6},{evaluations}",
                exact.energy, acc.value
            )
            .expect("writing to a String cannot fail");
        };
        emit("exhaustive", exact.energy, exact.elapsed_s, exact.evaluations);

        let sa_config = AnnealConfig {
            sweeps: sa_sweeps,
            ..AnnealConfig::scaled_to(&q)
        };
        let sa = anneal_best_of(&q, &sa_config, sa_restarts, seed)?;
        emit("annealing", sa.energy, sa.elapsed_s, sa.evaluations);

        let mut config = *qaoa_config;
        config.seed = seed.wrapping_add(n as u64);
        let result = qaoa::run_qaoa(&q, &config)?;
        emit(
            "qaoa",
            result.best_energy,
            result.elapsed_s,
            result.evaluations,
        );
    }
    Ok(csv)
}
