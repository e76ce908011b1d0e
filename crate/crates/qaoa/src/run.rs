use std::collections::BTreeMap;
use std::time::Instant;

use bitstring::BitString;
use qubo::{accuracy, energy, Accuracy, QuboMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::simplex::nelder_mead;
use crate::state::{expectation_cached, sample, uniform_state};
use crate::{qubo_to_ising, BasisEnergies, QaoaError, Result};

/// Variational angles: `gammas[l]` phases the cost layer l, `betas[l]` the
/// mixer layer l.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QaoaParams {
    pub gammas: Vec<f64>,
    pub betas: Vec<f64>,
}

impl QaoaParams {
    pub fn new(gammas: Vec<f64>, betas: Vec<f64>) -> Result<Self> {
        if gammas.is_empty() || gammas.len() != betas.len() {
            return Err(QaoaError::Dimension(format!(
                "need equal, non-zero layer counts; got {} gammas and {} betas",
                gammas.len(),
                betas.len()
            )));
        }
        Ok(QaoaParams { gammas, betas })
    }

    pub fn layers(&self) -> usize {
        self.gammas.len()
    }

    fn from_flat(flat: &[f64]) -> Self {
        let p = flat.len() / 2;
        QaoaParams {
            gammas: flat[..p].to_vec(),
            betas: flat[p..].to_vec(),
        }
    }
}

/// Tunable knobs of [`run_qaoa`].
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QaoaConfig {
    /// Ansatz layer count p.
    pub layers: usize,
    pub shots: u64,
    /// Objective-evaluation budget per restart; 0 means 250 * layers.
    pub outer_budget: usize,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for QaoaConfig {
    fn default() -> Self {
        QaoaConfig {
            layers: 1,
            shots: 1024,
            outer_budget: 0,
            restarts: 5,
            seed: 0,
        }
    }
}

impl QaoaConfig {
    fn effective_budget(&self) -> usize {
        if self.outer_budget == 0 {
            250 * self.layers
        } else {
            self.outer_budget
        }
    }
}

/// Ansatz size accounting for a dense n-variable instance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DepthReport {
    pub qubits: usize,
    pub layers: usize,
    pub two_qubit_gates: u64,
    pub single_qubit_gates: u64,
    /// Layering of disjoint gates: one state-prep layer, then per ansatz
    /// layer a field layer, the round-robin coupling layers, and a mixer
    /// layer.
    pub computed_depth: u64,
    /// Depth of the same ansatz in a hardware CX basis as reported by
    /// common transpilation pipelines; follows 9n - 3 for dense instances
    /// and is echoed for cross-tool comparison only.
    pub reference_depth: u64,
}

/// Gate and depth accounting for one explicit decomposition of a dense
/// p-layer ansatz on n qubits: per cost layer one two-qubit phase
/// interaction per coupling and one single-qubit phase per field, per mixer
/// layer one rotation per qubit.
pub fn circuit_metrics(n: usize, p: usize) -> DepthReport {
    let pair_count = (n * n.saturating_sub(1) / 2) as u64;

    // Disjoint-gate layering of the complete interaction graph by
    // round-robin pairing: n-1 layers for even n, n for odd n, each layer a
    // set of non-overlapping pairs. This is the minimum possible.
    let coupling_layers = match n {
        0 | 1 => 0,
        _ if n % 2 == 0 => (n - 1) as u64,
        _ => n as u64,
    };

    let per_layer_depth = coupling_layers + if n > 0 { 2 } else { 0 }; // fields + mixer
    DepthReport {
        qubits: n,
        layers: p,
        two_qubit_gates: pair_count * p as u64,
        single_qubit_gates: (2 * n * p) as u64,
        computed_depth: 1 + per_layer_depth * p as u64,
        reference_depth: (9 * n).saturating_sub(3) as u64,
    }
}

/// Full QAOA solve of a QUBO instance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QaoaResult {
    pub best_bits: BitString,
    /// QUBO energy of `best_bits` (offset excluded), so it is directly
    /// comparable with the classical solvers.
    pub best_energy: f64,
    pub accuracy: Accuracy,
    /// Energy the accuracy is measured against and how it was obtained.
    pub reference_energy: f64,
    pub reference: String,
    pub best_params: QaoaParams,
    /// Objective value of every outer-loop evaluation of the winning
    /// restart, in order.
    pub expectation_trace: Vec<f64>,
    pub shots_histogram: BTreeMap<BitString, u64>,
    pub depth_report: DepthReport,
    pub elapsed_s: f64,
    /// Total objective evaluations across restarts.
    pub evaluations: u64,
}

struct Restart {
    params: QaoaParams,
    expectation: f64,
    trace: Vec<f64>,
    bits: BitString,
    energy: f64,
    histogram: BTreeMap<BitString, u64>,
}

/// Runs QAOA: for each restart, seed the angles uniformly in (0, pi),
/// minimize the state's energy expectation with the simplex optimizer, then
/// sample the optimized state and extract the most frequent bit vector.
/// The best restart (lowest sampled-solution energy, earliest index on
/// ties) is reported, with accuracy measured against exhaustive search.
pub fn run_qaoa(q: &QuboMatrix, config: &QaoaConfig) -> Result<QaoaResult> {
    let n = q.n();
    if n > crate::MAX_QUBITS {
        return Err(QaoaError::Capacity {
            n,
            max: crate::MAX_QUBITS,
        });
    }
    if config.layers == 0 {
        return Err(QaoaError::Config("layer count p must be positive".into()));
    }
    if config.shots == 0 {
        return Err(QaoaError::Config(
            "shots must be positive: the solution is the most frequent sample".into(),
        ));
    }
    if config.restarts == 0 {
        return Err(QaoaError::Config("restarts must be positive".into()));
    }

    let started = Instant::now();
    let p = config.layers;
    let budget = config.effective_budget();
    let ising = qubo_to_ising(q);
    let energies = BasisEnergies::new(&ising);

    let evaluate = |flat: &[f64]| -> f64 {
        let mut state = uniform_state(n).expect("capacity checked above");
        for layer in 0..p {
            state.apply_cost_in_place(&energies, flat[layer]);
            state.apply_mixer_in_place(flat[p + layer]);
        }
        expectation_cached(&state, &energies)
    };
    // The identity point (all angles zero) is the unmixed uniform state; it
    // is always kept as a candidate so the optimized expectation never ends
    // up above the uniform-state expectation.
    let zero_point = vec![0.0; 2 * p];
    let uniform_expectation = evaluate(&zero_point);

    let mut evaluations = 0u64;
    let mut best: Option<Restart> = None;
    for restart in 0..config.restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(restart as u64));
        let start: Vec<f64> = (0..2 * p)
            .map(|_| rng.random::<f64>() * std::f64::consts::PI)
            .collect();
        let (mut flat, mut value, trace) = nelder_mead(&evaluate, &start, 0.4, budget);
        evaluations += trace.len() as u64 + 1;
        if uniform_expectation < value {
            flat = zero_point.clone();
            value = uniform_expectation;
        }

        let params = QaoaParams::from_flat(&flat);
        let mut state = uniform_state(n)?;
        for layer in 0..p {
            state.apply_cost_in_place(&energies, params.gammas[layer]);
            state.apply_mixer_in_place(params.betas[layer]);
        }
        let histogram = sample(
            &state,
            config.shots,
            config.seed.wrapping_add(0x5151_0000 + restart as u64),
        );
        let bits = most_frequent(&histogram).expect("shots >= 1 fills the histogram");
        let bits_energy = energy(q, &bits)?;

        let replace = match &best {
            None => true,
            Some(current) => bits_energy < current.energy,
        };
        if replace {
            best = Some(Restart {
                params,
                expectation: value,
                trace,
                bits,
                energy: bits_energy,
                histogram,
            });
        }
    }
    let best = best.expect("restarts >= 1");
    debug_assert!(best.expectation <= uniform_expectation + 1e-9);

    let reference = qubo::brute_force(q)?;
    let accuracy = accuracy(best.energy, reference.energy);

    Ok(QaoaResult {
        best_bits: best.bits,
        best_energy: best.energy,
        accuracy,
        reference_energy: reference.energy,
        reference: reference.solver,
        best_params: best.params,
        expectation_trace: best.trace,
        shots_histogram: best.histogram,
        depth_report: circuit_metrics(n, p),
        elapsed_s: started.elapsed().as_secs_f64(),
        evaluations,
    })
}

/// Most frequent outcome; ties break toward the smallest bit vector, which
/// the ordered map gives for free.
fn most_frequent(histogram: &BTreeMap<BitString, u64>) -> Option<BitString> {
    let mut best: Option<(&BitString, u64)> = None;
    for (bits, &count) in histogram {
        match best {
            Some((_, best_count)) if count <= best_count => {}
            _ => best = Some((bits, count)),
        }
    }
    best.map(|(bits, _)| bits.clone())
}
