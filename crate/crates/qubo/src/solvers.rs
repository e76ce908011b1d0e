use std::time::Instant;

use bitstring::BitString;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{energy, QuboError, QuboMatrix, Result, Solution};

/// Exhaustive search above this width would take minutes; refuse instead.
pub const BRUTE_FORCE_MAX_BITS: usize = 26;

/// Global minimizer by full enumeration; ties break toward the
/// lexicographically smallest bit vector.
///
/// States are visited in Gray-code order so each step costs O(n); the
/// running energy is re-anchored against an exact evaluation periodically
/// and candidate optima are always re-evaluated exactly before they are
/// accepted.
pub fn brute_force(q: &QuboMatrix) -> Result<Solution> {
    let n = q.n();
    if n > BRUTE_FORCE_MAX_BITS {
        return Err(QuboError::Capacity {
            n,
            max: BRUTE_FORCE_MAX_BITS,
        });
    }
    let started = Instant::now();
    let total: u64 = 1u64 << n;

    let mut x = BitString::zeros(n);
    let mut running = 0.0;
    let mut best_bits = x.clone();
    let mut best_energy = 0.0;
    let guard = 1e-9;

    for step in 1..total {
        let flip = step.trailing_zeros() as usize;
        running += q.flip_delta(&x, flip);
        x.flip(flip);
        if step % 4096 == 0 {
            running = energy(q, &x)?;
        }
        if running <= best_energy + guard {
            let exact = energy(q, &x)?;
            if exact < best_energy || (exact == best_energy && x < best_bits) {
                best_energy = exact;
                best_bits = x.clone();
            }
            running = exact;
        }
    }

    Ok(Solution {
        bits: best_bits,
        energy: best_energy,
        solver: "exhaustive".into(),
        elapsed_s: started.elapsed().as_secs_f64(),
        evaluations: total,
    })
}

/// Annealing schedule: `sweeps` full single-flip Metropolis passes with a
/// geometric temperature ramp from `t_hot` down to `t_cold`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct AnnealConfig {
    pub sweeps: usize,
    pub t_hot: f64,
    pub t_cold: f64,
}

impl Default for AnnealConfig {
    fn default() -> Self {
        AnnealConfig {
            sweeps: 200,
            t_hot: 2.0,
            t_cold: 1e-3,
        }
    }
}

impl AnnealConfig {
    /// Default schedule rescaled to the coefficient magnitude of an
    /// instance, so acceptance probabilities are meaningful regardless of
    /// the energy scale.
    pub fn scaled_to(q: &QuboMatrix) -> Self {
        let scale = q.max_abs_entry().max(1e-12);
        AnnealConfig {
            sweeps: 200,
            t_hot: 2.0 * scale,
            t_cold: 1e-3 * scale,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.sweeps == 0 {
            return Err(QuboError::Config("annealing needs at least one sweep".into()));
        }
        if !(self.t_cold > 0.0 && self.t_cold <= self.t_hot && self.t_hot.is_finite()) {
            return Err(QuboError::Config(format!(
                "temperatures must satisfy 0 < t_cold <= t_hot, got t_hot = {}, t_cold = {}",
                self.t_hot, self.t_cold
            )));
        }
        Ok(())
    }

    fn temperature(&self, sweep: usize) -> f64 {
        if self.sweeps <= 1 {
            return self.t_hot;
        }
        let frac = sweep as f64 / (self.sweeps - 1) as f64;
        self.t_hot * (self.t_cold / self.t_hot).powf(frac)
    }
}

/// Single-flip Metropolis annealing. Deterministic under a fixed seed;
/// returns the best state ever visited.
pub fn simulated_annealing(
    q: &QuboMatrix,
    sweeps: usize,
    t_hot: f64,
    t_cold: f64,
    seed: u64,
) -> Result<Solution> {
    let config = AnnealConfig {
        sweeps,
        t_hot,
        t_cold,
    };
    simulated_annealing_traced(q, &config, seed).map(|(solution, _)| solution)
}

/// [`simulated_annealing`] also returning the per-sweep best-energy trace.
pub fn simulated_annealing_traced(
    q: &QuboMatrix,
    config: &AnnealConfig,
    seed: u64,
) -> Result<(Solution, Vec<f64>)> {
    config.validate()?;
    let started = Instant::now();
    let n = q.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut x = BitString::random(n, &mut rng);
    let mut current = energy(q, &x)?;
    let mut best_bits = x.clone();
    let mut best_energy = current;
    let mut evaluations = 0u64;
    let mut trace = Vec::with_capacity(config.sweeps);

    for sweep in 0..config.sweeps {
        let temperature = config.temperature(sweep);
        for site in 0..n {
            let delta = q.flip_delta(&x, site);
            evaluations += 1;
            let accept = delta <= 0.0 || rng.random::<f64>() < (-delta / temperature).exp();
            if accept {
                x.flip(site);
                current += delta;
                if current < best_energy {
                    best_energy = current;
                    best_bits = x.clone();
                }
            }
        }
        current = energy(q, &x)?;
        trace.push(best_energy);
    }

    best_energy = energy(q, &best_bits)?;
    Ok((
        Solution {
            bits: best_bits,
            energy: best_energy,
            solver: "annealing".into(),
            elapsed_s: started.elapsed().as_secs_f64(),
            evaluations,
        },
        trace,
    ))
}

/// Best of `restarts` independent annealing runs seeded `seed`, `seed+1`,
/// ... Ties keep the earliest restart.
pub fn anneal_best_of(
    q: &QuboMatrix,
    config: &AnnealConfig,
    restarts: usize,
    seed: u64,
) -> Result<Solution> {
    if restarts == 0 {
        return Err(QuboError::Config("restarts must be positive".into()));
    }
    let started = Instant::now();
    let mut best: Option<Solution> = None;
    let mut evaluations = 0;
    for r in 0..restarts {
        let (candidate, _) = simulated_annealing_traced(q, config, seed.wrapping_add(r as u64))?;
        evaluations += candidate.evaluations;
        let replace = match &best {
            None => true,
            Some(b) => candidate.energy < b.energy,
        };
        if replace {
            best = Some(candidate);
        }
    }
    let mut solution = best.expect("restarts >= 1");
    solution.evaluations = evaluations;
    solution.elapsed_s = started.elapsed().as_secs_f64();
    Ok(solution)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random_qubo;

    #[test]
    fn one_bit_instances_solve_by_inspection() {
        let negative = QuboMatrix::from_entries(1, 0.0, &[(0, 0, -1.0)]).unwrap();
        let s = brute_force(&negative).unwrap();
        assert_eq!(s.bits.to_string(), "1");
        assert_eq!(s.energy, -1.0);

        let positive = QuboMatrix::from_entries(1, 0.0, &[(0, 0, 1.0)]).unwrap();
        let s = brute_force(&positive).unwrap();
        assert_eq!(s.bits.to_string(), "0");
        assert_eq!(s.energy, 0.0);
    }

    #[test]
    fn brute_force_matches_independent_enumeration() {
        // Second route: direct per-state evaluation, no incremental deltas.
        for seed in 0..10 {
            let q = random_qubo(10, seed).unwrap();
            let s = brute_force(&q).unwrap();
            let mut expected = f64::INFINITY;
            let mut expected_bits = BitString::zeros(10);
            for idx in 0..1024u64 {
                let x = BitString::from_index(idx, 10);
                let e = energy(&q, &x).unwrap();
                if e < expected || (e == expected && x < expected_bits) {
                    expected = e;
                    expected_bits = x;
                }
            }
            assert_eq!(s.energy, expected, "seed {seed}");
            assert_eq!(s.bits, expected_bits, "seed {seed}");
            assert_eq!(s.evaluations, 1024);
        }
    }

    #[test]
    fn brute_force_tie_break_is_lexicographic() {
        // Two degenerate minimizers: 100 and 010 both have energy -1.
        let q = QuboMatrix::from_entries(3, 0.0, &[(0, 0, -1.0), (1, 1, -1.0), (0, 1, 1.0)])
            .unwrap();
        let s = brute_force(&q).unwrap();
        assert_eq!(s.energy, -1.0);
        assert_eq!(s.bits.to_string(), "010");
    }

    #[test]
    fn capacity_cap_is_enforced() {
        let q = QuboMatrix::zeros(27).unwrap();
        assert!(matches!(brute_force(&q), Err(QuboError::Capacity { .. })));
    }

    #[test]
    fn diagonal_instances_anneal_to_the_closed_form() {
        // Without couplings the optimum sets bit i iff Q_ii < 0.
        let diag = [-0.8, 0.3, -0.1, 0.9, -0.5, 0.2, 0.7, -0.4];
        let entries: Vec<(usize, usize, f64)> =
            diag.iter().enumerate().map(|(i, &v)| (i, i, v)).collect();
        let q = QuboMatrix::from_entries(8, 0.0, &entries).unwrap();
        let s = simulated_annealing(&q, 200, 2.0, 1e-3, 7).unwrap();
        let expected = BitString::from_fn(8, |i| diag[i] < 0.0);
        assert_eq!(s.bits, expected);
        let expected_energy: f64 = diag.iter().filter(|v| **v < 0.0).sum();
        assert!((s.energy - expected_energy).abs() < 1e-12);
    }

    #[test]
    fn annealing_is_seed_deterministic() {
        let q = random_qubo(12, 5).unwrap();
        let a = simulated_annealing(&q, 100, 2.0, 1e-3, 42).unwrap();
        let b = simulated_annealing(&q, 100, 2.0, 1e-3, 42).unwrap();
        // Everything except wall-clock must match exactly.
        assert_eq!(a.bits, b.bits);
        assert_eq!(a.energy, b.energy);
        assert_eq!(a.evaluations, b.evaluations);
    }

    #[test]
    fn annealing_best_trace_is_non_increasing() {
        let q = random_qubo(14, 8).unwrap();
        let (_, trace) = simulated_annealing_traced(&q, &AnnealConfig::default(), 3).unwrap();
        for pair in trace.windows(2) {
            assert!(pair[1] <= pair[0]);
        }
    }

    #[test]
    fn annealing_with_restarts_finds_small_optima() {
        let mut hits = 0;
        for seed in 0..30 {
            let q = random_qubo(12, 1000 + seed).unwrap();
            let reference = brute_force(&q).unwrap();
            let config = AnnealConfig::scaled_to(&q);
            let found = anneal_best_of(&q, &config, 10, seed).unwrap();
            assert!(found.energy >= reference.energy - 1e-9);
            if (found.energy - reference.energy).abs() <= 1e-9 {
                hits += 1;
            }
        }
        assert!(hits >= 28, "annealing matched brute force on {hits}/30");
    }

    #[test]
    fn bad_temperatures_are_config_errors() {
        let q = random_qubo(6, 1).unwrap();
        assert!(matches!(
            simulated_annealing(&q, 10, 1.0, 0.0, 0),
            Err(QuboError::Config(_))
        ));
        assert!(matches!(
            simulated_annealing(&q, 10, 1.0, 2.0, 0),
            Err(QuboError::Config(_))
        ));
    }

    #[test]
    fn solution_energy_is_consistent_with_its_bits() {
        let q = random_qubo(10, 77).unwrap();
        for solution in [
            brute_force(&q).unwrap(),
            simulated_annealing(&q, 50, 2.0, 0.01, 9).unwrap(),
        ] {
            let recomputed = energy(&q, &solution.bits).unwrap();
            assert!((solution.energy - recomputed).abs() <= 1e-9);
        }
    }

    #[test]
    fn brute_force_lower_bounds_random_states() {
        use rand::{Rng, SeedableRng};
        let q = random_qubo(12, 3).unwrap();
        let opt = brute_force(&q).unwrap().energy;
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..10_000 {
            let x = BitString::random(12, &mut rng);
            assert!(energy(&q, &x).unwrap() >= opt - 1e-12);
        }
    }
}
