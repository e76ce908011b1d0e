use std::io::Write;
use std::path::Path;
use std::time::Instant;

use bitstring::BitString;
use fm::{Dataset, Provenance};
use materials::decode;
use qubo::{anneal_best_of, brute_force, from_fm, AnnealConfig, QuboMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use tmm::{evaluate_fom, sweep};

use crate::{BuiltConfig, OrchestratorError, Result, RunConfig, SolverSpec};

/// Wall-clock seconds per loop component, monotonic-clock measured.
#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
pub struct Timings {
    pub train_s: f64,
    pub solve_s: f64,
    pub simulate_s: f64,
}

/// Solver diagnostics carried in the iteration record.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolverReport {
    pub solver: String,
    /// Surrogate energy of the proposal (offset excluded).
    pub energy: f64,
    pub evaluations: u64,
    pub elapsed_s: f64,
}

/// One closed loop: proposal, simulation, dataset append.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub bits: BitString,
    /// `solver` when the raw proposal was novel, `perturbation` when it had
    /// to be flipped away from a known row or replaced by a fresh draw.
    pub source: Provenance,
    pub fom: f64,
    /// Full-dataset loss of the surrogate used this iteration; absent for
    /// the random baseline, which trains nothing.
    pub fm_loss: Option<f64>,
    pub solver_report: Option<SolverReport>,
    pub timings: Timings,
}

/// Complete run: config echo, iteration records, and best-so-far bookkeeping.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunLog {
    pub config: RunConfig,
    pub records: Vec<IterationRecord>,
    /// Best figure of merit among iteration proposals after each iteration;
    /// non-decreasing.
    pub best_trace: Vec<f64>,
    pub best_bits: BitString,
    /// Best figure of merit over every evaluated structure, seeds included.
    pub best_fom: f64,
}

/// Decode, sweep, score: the simulation arm of the loop. Pure given the
/// config, which is what makes logged iterations replayable.
pub fn evaluate_bits(built: &BuiltConfig, bits: &BitString) -> Result<f64> {
    let stack = decode(bits, &built.encoding)?;
    let result = sweep(&stack, &built.grid, &built.conditions, built.workers)?;
    Ok(evaluate_fom(&result, &built.fom)?)
}

/// Draws `initial_points` distinct random structures and evaluates each.
/// Targets are stored negated so the surrogate minimum is the best
/// structure.
pub fn seed_dataset(built: &BuiltConfig, rng: &mut ChaCha8Rng) -> Result<Dataset> {
    let n = built.total_bits();
    let mut dataset = Dataset::new(n);
    while dataset.len() < built.initial_points {
        let bits = BitString::random(n, rng);
        if dataset.contains(&bits) {
            continue;
        }
        let fom = evaluate_bits(built, &bits)?;
        dataset.append(bits, -fom, Provenance::Seed)?;
    }
    Ok(dataset)
}

struct Proposal {
    bits: BitString,
    source: Provenance,
    report: Option<SolverReport>,
    fm_loss: Option<f64>,
    train_s: f64,
    solve_s: f64,
}

/// Minimizes the surrogate QUBO with the configured solver.
fn solver_bits(
    q: &QuboMatrix,
    solver: &SolverSpec,
    rng: &mut ChaCha8Rng,
) -> Result<(BitString, SolverReport)> {
    match solver {
        SolverSpec::Exhaustive {} => {
            let s = brute_force(q)?;
            Ok((
                s.bits.clone(),
                SolverReport {
                    solver: s.solver,
                    energy: s.energy,
                    evaluations: s.evaluations,
                    elapsed_s: s.elapsed_s,
                },
            ))
        }
        SolverSpec::Annealing {
            sweeps,
            t_hot,
            t_cold,
            restarts,
        } => {
            let scaled = AnnealConfig::scaled_to(q);
            let config = AnnealConfig {
                sweeps: *sweeps,
                t_hot: t_hot.unwrap_or(scaled.t_hot),
                t_cold: t_cold.unwrap_or(scaled.t_cold),
            };
            let s = anneal_best_of(q, &config, *restarts, rng.random())?;
            Ok((
                s.bits.clone(),
                SolverReport {
                    solver: s.solver,
                    energy: s.energy,
                    evaluations: s.evaluations,
                    elapsed_s: s.elapsed_s,
                },
            ))
        }
        SolverSpec::Qaoa {
            p,
            shots,
            restarts,
            outer_budget,
        } => {
            let result = qaoa::run_qaoa(
                q,
                &qaoa::QaoaConfig {
                    layers: *p,
                    shots: *shots,
                    restarts: *restarts,
                    outer_budget: *outer_budget,
                    seed: rng.random(),
                },
            )?;
            Ok((
                result.best_bits.clone(),
                SolverReport {
                    solver: "qaoa".into(),
                    energy: result.best_energy,
                    evaluations: result.evaluations,
                    elapsed_s: result.elapsed_s,
                },
            ))
        }
        SolverSpec::Random {} => unreachable!(),
    }
}

/// Ensures the proposal is not already in the dataset: up to n single-bit
/// flips of the candidate, then up to n fresh random draws. Exhausting both
/// means the reachable space is saturated.
fn ensure_novel(
    dataset: &Dataset,
    mut bits: BitString,
    rng: &mut ChaCha8Rng,
) -> Result<(BitString, Provenance)> {
    if !dataset.contains(&bits) {
        return Ok((bits, Provenance::Solver));
    }
    let n = bits.len();
    for _ in 0..n {
        bits.flip(rng.random_range(0..n));
        if !dataset.contains(&bits) {
            return Ok((bits, Provenance::Perturbation));
        }
    }
    for _ in 0..n {
        let fresh = BitString::random(n, rng);
        if !dataset.contains(&fresh) {
            return Ok((fresh, Provenance::Perturbation));
        }
    }
    Err(OrchestratorError::Saturated {
        flip_attempts: n,
        random_attempts: n,
    })
}

fn propose(
    dataset: &Dataset,
    built: &BuiltConfig,
    rng: &mut ChaCha8Rng,
) -> Result<Proposal> {
    if matches!(built.solver, SolverSpec::Random {}) {
        let n = built.total_bits();
        let started = Instant::now();
        let (bits, _) = ensure_novel(dataset, BitString::random(n, rng), rng)?;
        return Ok(Proposal {
            bits,
            source: Provenance::Solver,
            report: Some(SolverReport {
                solver: "random".into(),
                energy: f64::NAN,
                evaluations: 1,
                elapsed_s: started.elapsed().as_secs_f64(),
            }),
            fm_loss: None,
            train_s: 0.0,
            solve_s: started.elapsed().as_secs_f64(),
        });
    }

    let train_started = Instant::now();
    let mut fm_config = built.fm.clone();
    fm_config.workers = built.workers;
    fm_config.seed = rng.random();
    let trained = fm::train(dataset, &fm_config)?;
    let train_s = train_started.elapsed().as_secs_f64();

    let solve_started = Instant::now();
    let q = from_fm(&trained.model);
    let (bits, report) = solver_bits(&q, &built.solver, rng)?;
    let solve_s = solve_started.elapsed().as_secs_f64();

    let (bits, source) = ensure_novel(dataset, bits, rng)?;
    Ok(Proposal {
        bits,
        source,
        report: Some(report),
        fm_loss: Some(trained.best_loss),
        train_s,
        solve_s,
    })
}

/// One loop iteration: train, solve, (de-duplicate), simulate, append.
pub fn iterate(
    dataset: &mut Dataset,
    built: &BuiltConfig,
    rng: &mut ChaCha8Rng,
    iteration: usize,
) -> Result<IterationRecord> {
    let step = |dataset: &mut Dataset, rng: &mut ChaCha8Rng| -> Result<IterationRecord> {
        let proposal = propose(dataset, built, rng)?;
        let simulate_started = Instant::now();
        let fom = evaluate_bits(built, &proposal.bits)?;
        let simulate_s = simulate_started.elapsed().as_secs_f64();
        dataset.append(proposal.bits.clone(), -fom, proposal.source)?;
        Ok(IterationRecord {
            iteration,
            bits: proposal.bits,
            source: proposal.source,
            fom,
            fm_loss: proposal.fm_loss,
            solver_report: proposal.report,
            timings: Timings {
                train_s: proposal.train_s,
                solve_s: proposal.solve_s,
                simulate_s,
            },
        })
    };
    step(dataset, rng).map_err(|e| e.at_iteration(iteration))
}

/// Runs the loop to completion entirely in memory.
pub fn run(config: &RunConfig) -> Result<RunLog> {
    run_with_sink(config, None, |_| Ok(()))
}

/// Runs the loop, appending the config echo plus one JSON line per
/// iteration to `path` as they happen; each line is flushed so a crash
/// loses at most the in-flight iteration.
pub fn run_logged(config: &RunConfig, path: &Path, base: Option<&Path>) -> Result<RunLog> {
    let mut file = std::fs::File::create(path)?;
    let echo = serde_json::json!({ "config": config });
    writeln!(file, "{echo}")?;
    file.flush()?;
    run_with_sink(config, base, move |record| {
        writeln!(file, "{}", serde_json::to_string(record).expect("record serializes"))?;
        file.flush()?;
        Ok(())
    })
}

fn run_with_sink(
    config: &RunConfig,
    base: Option<&Path>,
    mut sink: impl FnMut(&IterationRecord) -> Result<()>,
) -> Result<RunLog> {
    let built = config.build(base)?;
    let mut rng = ChaCha8Rng::seed_from_u64(built.seed);
    let mut dataset = seed_dataset(&built, &mut rng)?;

    let mut records = Vec::new();
    let mut best_trace = Vec::new();
    let mut iteration_best = f64::NEG_INFINITY;
    let mut stagnant = 0usize;

    for iteration in 1..=built.max_iterations {
        let record = iterate(&mut dataset, &built, &mut rng, iteration)?;
        if record.fom > iteration_best {
            iteration_best = record.fom;
            stagnant = 0;
        } else {
            stagnant += 1;
        }
        best_trace.push(iteration_best);
        sink(&record)?;
        records.push(record);
        if let Some(patience) = built.stop_patience {
            if stagnant >= patience {
                break;
            }
        }
    }

    // Best over everything evaluated, seed rows included (targets hold the
    // negated figure of merit).
    let (best_bits, best_fom) = dataset
        .iter()
        .map(|(bits, target)| (bits.clone(), -target))
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .expect("seeding guarantees a non-empty dataset");

    Ok(RunLog {
        config: config.clone(),
        records,
        best_trace,
        best_bits,
        best_fom,
    })
}
