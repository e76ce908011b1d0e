use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use bitstring::BitString;
use clap::{Args, Parser, Subcommand, ValueEnum};
use orchestrator::{bench, RunConfig};

/// Active-learning optimizer for multilayer photonic stacks: surrogate
/// training, QUBO solvers, transfer-matrix simulation, and scaling benches.
#[derive(Parser)]
#[command(name = "metaopt", version, about)]
struct Cli {
    /// Worker threads for sweeps and surrogate training; overrides the
    /// config value.
    #[arg(long, global = true)]
    workers: Option<usize>,

    /// Random seed; overrides the config value.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Run-config JSON document.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep one structure over the configured grid and conditions, writing
    /// spectra CSV.
    Simulate(SimulateArgs),
    /// Train the surrogate on a dataset CSV and write the model JSON.
    Train(TrainArgs),
    /// Minimize a QUBO JSON file with the chosen solver.
    Solve(SolveArgs),
    /// Run the closed train-solve-simulate-append loop.
    Optimize(OptimizeArgs),
    /// Sweep wall-clock scaling across condition and worker counts.
    BenchTmm(BenchTmmArgs),
    /// Surrogate training wall-clock across dataset shapes and workers.
    BenchFm(BenchFmArgs),
    /// Solver accuracy and time-to-solution across problem sizes.
    BenchQaoa(BenchQaoaArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// Structure to simulate as a 0/1 string matching the encoding length;
    /// all zeros when omitted.
    #[arg(long)]
    bits: Option<String>,
    /// Output CSV path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TrainArgs {
    /// Dataset CSV (`bits,fom`).
    #[arg(long)]
    dataset: PathBuf,
    /// Model JSON output path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Copy, Clone, ValueEnum)]
enum SolverKind {
    Exhaustive,
    Annealing,
    Qaoa,
}

#[derive(Args)]
struct SolveArgs {
    /// QUBO JSON file ({n, offset, entries}).
    #[arg(long)]
    qubo: PathBuf,
    #[arg(long, value_enum, default_value = "annealing")]
    solver: SolverKind,
    /// Ansatz layers (qaoa).
    #[arg(long, default_value_t = 1)]
    p: usize,
    /// Measurement shots (qaoa).
    #[arg(long, default_value_t = 1024)]
    shots: u64,
    /// Restarts (annealing and qaoa).
    #[arg(long, default_value_t = 5)]
    restarts: usize,
    /// Objective-evaluation budget per restart (qaoa); 0 means 250*p.
    #[arg(long, default_value_t = 0)]
    outer_budget: usize,
    /// Metropolis sweeps (annealing).
    #[arg(long, default_value_t = 200)]
    sweeps: usize,
    /// Starting temperature (annealing); scales to the instance when
    /// omitted.
    #[arg(long)]
    t_hot: Option<f64>,
    /// Final temperature (annealing); scales to the instance when omitted.
    #[arg(long)]
    t_cold: Option<f64>,
    /// Output JSON path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct OptimizeArgs {
    /// Run-log output (JSON lines: config echo, then one record per
    /// iteration).
    #[arg(long, default_value = "runlog.jsonl")]
    out: PathBuf,
}

#[derive(Args)]
struct BenchTmmArgs {
    #[arg(long, default_value_t = 1000)]
    layers: usize,
    #[arg(long, default_value_t = 64)]
    grid_points: usize,
    /// Condition counts to sweep.
    #[arg(long, value_delimiter = ',', default_value = "50,150,350")]
    conditions: Vec<usize>,
    /// Worker counts to compare against the serial baseline.
    #[arg(long, value_delimiter = ',', default_value = "1,2,4,8")]
    workers_list: Vec<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchFmArgs {
    /// Dataset shapes as n_d x n_t pairs.
    #[arg(long, value_delimiter = ',', default_value = "120x1000,120x10000,240x1000,240x10000")]
    sizes: Vec<String>,
    #[arg(long, value_delimiter = ',', default_value = "1,2,4,8")]
    workers_list: Vec<usize>,
    #[arg(long, default_value_t = 20)]
    epochs: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchQaoaArgs {
    /// Problem sizes (decision variables).
    #[arg(long, value_delimiter = ',', default_value = "4,8,12,16,20,24")]
    sizes: Vec<usize>,
    #[arg(long, default_value_t = 1)]
    p: usize,
    #[arg(long, default_value_t = 1024)]
    shots: u64,
    #[arg(long, default_value_t = 2)]
    restarts: usize,
    /// 0 means 250*p.
    #[arg(long, default_value_t = 150)]
    outer_budget: usize,
    #[arg(long, default_value_t = 200)]
    sa_sweeps: usize,
    #[arg(long, default_value_t = 10)]
    sa_restarts: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match &cli.command {
        Command::Simulate(args) => simulate(&cli, args),
        Command::Train(args) => train(&cli, args),
        Command::Solve(args) => solve(&cli, args),
        Command::Optimize(args) => optimize(&cli, args),
        Command::BenchTmm(args) => {
            let csv = bench::bench_tmm(
                args.layers,
                args.grid_points,
                &args.conditions,
                &args.workers_list,
            )?;
            emit(&csv, args.out.as_deref())
        }
        Command::BenchFm(args) => {
            let shapes = parse_shapes(&args.sizes)?;
            let csv = bench::bench_fm(
                &shapes,
                &args.workers_list,
                args.epochs,
                cli.seed.unwrap_or(0),
            )?;
            emit(&csv, args.out.as_deref())
        }
        Command::BenchQaoa(args) => {
            let qaoa_config = qaoa::QaoaConfig {
                layers: args.p,
                shots: args.shots,
                restarts: args.restarts,
                outer_budget: args.outer_budget,
                seed: cli.seed.unwrap_or(0),
            };
            let csv = bench::bench_qaoa(
                &args.sizes,
                &qaoa_config,
                args.sa_sweeps,
                args.sa_restarts,
                cli.seed.unwrap_or(0),
            )?;
            emit(&csv, args.out.as_deref())
        }
    }
}

fn load_config(cli: &Cli) -> Result<(RunConfig, Option<PathBuf>)> {
    let path = cli
        .config
        .as_deref()
        .context("this command needs --config <run-config.json>")?;
    let (mut config, base) = RunConfig::from_path(path)?;
    if let Some(workers) = cli.workers {
        config.workers = workers;
    }
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    Ok((config, base))
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => {
            fs::write(path, text).with_context(|| format!("writing {}", path.display()))?
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn simulate(cli: &Cli, args: &SimulateArgs) -> Result<()> {
    let (config, base) = load_config(cli)?;
    let built = config.build(base.as_deref())?;
    let bits = match &args.bits {
        Some(text) => text.parse::<BitString>()?,
        None => BitString::zeros(built.total_bits()),
    };
    if bits.len() != built.total_bits() {
        bail!(
            "--bits has {} bits but the encoding needs {}",
            bits.len(),
            built.total_bits()
        );
    }
    let stack = materials::decode(&bits, &built.encoding)?;
    let result = tmm::sweep(&stack, &built.grid, &built.conditions, built.workers)?;
    eprintln!(
        "swept {} conditions x {} wavelengths with {} workers in {:.3} s ({} matrix ops)",
        built.conditions.len(),
        built.grid.len(),
        result.workers,
        result.duration.as_secs_f64(),
        result.matrix_ops
    );
    emit(&result.to_csv(), args.out.as_deref())
}

fn train(cli: &Cli, args: &TrainArgs) -> Result<()> {
    let file = fs::File::open(&args.dataset)
        .with_context(|| format!("opening {}", args.dataset.display()))?;
    let dataset = fm::Dataset::read_csv(file)?;
    let mut fm_config = match &cli.config {
        Some(path) => RunConfig::from_path(path)?.0.fm,
        None => fm::TrainConfig::default(),
    };
    if let Some(workers) = cli.workers {
        fm_config.workers = workers;
    }
    if let Some(seed) = cli.seed {
        fm_config.seed = seed;
    }
    let trained = fm::train(&dataset, &fm_config)?;
    fs::write(&args.out, trained.model.to_json())
        .with_context(|| format!("writing {}", args.out.display()))?;
    eprintln!(
        "trained on {} rows of {} bits: loss {:.3e} -> {:.3e} (best {:.3e})",
        dataset.len(),
        dataset.n(),
        trained.loss_trace.first().copied().unwrap_or(f64::NAN),
        trained.loss_trace.last().copied().unwrap_or(f64::NAN),
        trained.best_loss
    );
    Ok(())
}

fn solve(cli: &Cli, args: &SolveArgs) -> Result<()> {
    let text = fs::read_to_string(&args.qubo)
        .with_context(|| format!("reading {}", args.qubo.display()))?;
    let q = qubo::QuboMatrix::from_json(&text)?;
    let seed = cli.seed.unwrap_or(0);

    let report = match args.solver {
        SolverKind::Exhaustive => {
            let s = qubo::brute_force(&q)?;
            solve_report(&q, s, None)
        }
        SolverKind::Annealing => {
            let scaled = qubo::AnnealConfig::scaled_to(&q);
            let config = qubo::AnnealConfig {
                sweeps: args.sweeps,
                t_hot: args.t_hot.unwrap_or(scaled.t_hot),
                t_cold: args.t_cold.unwrap_or(scaled.t_cold),
            };
            let s = qubo::anneal_best_of(&q, &config, args.restarts, seed)?;
            solve_report(&q, s, None)
        }
        SolverKind::Qaoa => {
            let result = qaoa::run_qaoa(
                &q,
                &qaoa::QaoaConfig {
                    layers: args.p,
                    shots: args.shots,
                    restarts: args.restarts,
                    outer_budget: args.outer_budget,
                    seed,
                },
            )?;
            serde_json::json!({
                "bits": result.best_bits,
                "energy": result.best_energy,
                "accuracy": result.accuracy.value,
                "accuracy_mode": result.accuracy.mode,
                "solver": "qaoa",
                "elapsed_s": result.elapsed_s,
                "evaluations": result.evaluations,
                "reference": result.reference,
                "reference_energy": result.reference_energy,
                "depth_report": result.depth_report,
                "expectation_trace": result.expectation_trace,
                "shots_histogram": result.shots_histogram,
            })
        }
    };
    let text = serde_json::to_string_pretty(&report)?;
    emit(&format!("{text}\n"), args.out.as_deref())
}

/// Report for the classical solvers; accuracy against exhaustive search
/// when the instance is small enough to enumerate.
fn solve_report(
    q: &qubo::QuboMatrix,
    s: qubo::Solution,
    reference: Option<qubo::Solution>,
) -> serde_json::Value {
    let reference = reference.or_else(|| {
        (q.n() <= qubo::BRUTE_FORCE_MAX_BITS && s.solver != "exhaustive")
            .then(|| qubo::brute_force(q).ok())
            .flatten()
    });
    match reference {
        Some(r) => {
            let acc = qubo::accuracy(s.energy, r.energy);
            serde_json::json!({
                "bits": s.bits,
                "energy": s.energy,
                "accuracy": acc.value,
                "accuracy_mode": acc.mode,
                "solver": s.solver,
                "elapsed_s": s.elapsed_s,
                "evaluations": s.evaluations,
                "reference": "exhaustive",
                "reference_energy": r.energy,
            })
        }
        None if s.solver == "exhaustive" => serde_json::json!({
            "bits": s.bits,
            "energy": s.energy,
            "accuracy": 1.0,
            "accuracy_mode": "ratio",
            "solver": s.solver,
            "elapsed_s": s.elapsed_s,
            "evaluations": s.evaluations,
        }),
        None => serde_json::json!({
            "bits": s.bits,
            "energy": s.energy,
            "accuracy": null,
            "accuracy_mode": null,
            "solver": s.solver,
            "elapsed_s": s.elapsed_s,
            "evaluations": s.evaluations,
        }),
    }
}

fn optimize(cli: &Cli, args: &OptimizeArgs) -> Result<()> {
    let (config, base) = load_config(cli)?;
    let log = orchestrator::run_logged(&config, &args.out, base.as_deref())?;
    let mut stderr = std::io::stderr().lock();
    for record in &log.records {
        writeln!(
            stderr,
            "iter {:>4}  fom {:.6}  source {:?}  train {:.2}s solve {:.2}s simulate {:.2}s",
            record.iteration,
            record.fom,
            record.source,
            record.timings.train_s,
            record.timings.solve_s,
            record.timings.simulate_s
        )?;
    }
    writeln!(
        stderr,
        "best fom {:.6} from bits {} ({} iterations, log at {})",
        log.best_fom,
        log.best_bits,
        log.records.len(),
        args.out.display()
    )?;
    Ok(())
}

fn parse_shapes(texts: &[String]) -> Result<Vec<(usize, usize)>> {
    texts
        .iter()
        .map(|t| {
            let (a, b) = t
                .split_once(['x', 'X'])
                .with_context(|| format!("shape '{t}' is not of the form 120x1000"))?;
            Ok((a.trim().parse()?, b.trim().parse()?))
        })
        .collect()
}
