use std::collections::BTreeMap;

use bitstring::BitString;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{BasisEnergies, IsingModel, QaoaError, Result, MAX_QUBITS};

/// All 2^n complex amplitudes of an n-qubit register; qubit i is bit i of
/// the array index.
#[derive(Debug, Clone, PartialEq)]
pub struct Statevector {
    n: usize,
    amps: Vec<Complex64>,
}

impl Statevector {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Basis state |index>.
    pub fn basis(n: usize, index: usize) -> Result<Self> {
        check_capacity(n)?;
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
        amps[index] = Complex64::new(1.0, 0.0);
        Ok(Statevector { n, amps })
    }

    /// Multiplies amplitude i by e^{-i gamma E_i}; a diagonal unitary, so
    /// magnitudes are untouched.
    pub fn apply_cost_in_place(&mut self, energies: &BasisEnergies, gamma: f64) {
        debug_assert_eq!(energies.len(), self.amps.len());
        for (a, &e) in self.amps.iter_mut().zip(energies.as_slice()) {
            let (sin, cos) = (-gamma * e).sin_cos();
            *a *= Complex64::new(cos, sin);
        }
    }

    /// Applies the 2x2 rotation [[cos b, -i sin b], [-i sin b, cos b]] to
    /// every qubit (the transverse-field mixer e^{-i beta X} per qubit).
    pub fn apply_mixer_in_place(&mut self, beta: f64) {
        let (sin, cos) = beta.sin_cos();
        let off = Complex64::new(0.0, -sin);
        for qubit in 0..self.n {
            let bit = 1usize << qubit;
            let stride = bit << 1;
            let mut base = 0;
            while base < self.amps.len() {
                for low in base..base + bit {
                    let high = low | bit;
                    let a0 = self.amps[low];
                    let a1 = self.amps[high];
                    self.amps[low] = cos * a0 + off * a1;
                    self.amps[high] = off * a0 + cos * a1;
                }
                base += stride;
            }
        }
    }
}

fn check_capacity(n: usize) -> Result<()> {
    if n > MAX_QUBITS {
        return Err(QaoaError::Capacity { n, max: MAX_QUBITS });
    }
    Ok(())
}

/// The uniform superposition: every amplitude 2^{-n/2}.
pub fn uniform_state(n: usize) -> Result<Statevector> {
    check_capacity(n)?;
    let size = 1usize << n;
    let amp = Complex64::new((size as f64).sqrt().recip(), 0.0);
    Ok(Statevector {
        n,
        amps: vec![amp; size],
    })
}

/// Cost layer as a value-returning operation; the engine uses the in-place
/// form with a shared energy table.
pub fn apply_cost_layer(state: &Statevector, ising: &IsingModel, gamma: f64) -> Statevector {
    let mut out = state.clone();
    out.apply_cost_in_place(&BasisEnergies::new(ising), gamma);
    out
}

/// Mixer layer as a value-returning operation.
pub fn apply_mixer_layer(state: &Statevector, beta: f64) -> Statevector {
    let mut out = state.clone();
    out.apply_mixer_in_place(beta);
    out
}

/// Energy expectation sum_i |a_i|^2 E_i, constant term included.
pub fn expectation(state: &Statevector, ising: &IsingModel) -> f64 {
    expectation_cached(state, &BasisEnergies::new(ising))
}

pub fn expectation_cached(state: &Statevector, energies: &BasisEnergies) -> f64 {
    state
        .amps
        .iter()
        .zip(energies.as_slice())
        .map(|(a, &e)| a.norm_sqr() * e)
        .sum()
}

/// Multinomial sample of measurement outcomes: `shots` draws from the
/// probability distribution |a_i|^2, deterministic under the seed.
pub fn sample(state: &Statevector, shots: u64, seed: u64) -> BTreeMap<BitString, u64> {
    let mut histogram = BTreeMap::new();
    if shots == 0 {
        return histogram;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draws: Vec<f64> = (0..shots).map(|_| rng.random::<f64>()).collect();
    draws.sort_by(|a, b| a.partial_cmp(b).expect("uniform draws are finite"));

    // One pass over the cumulative distribution; leftover draws beyond the
    // accumulated mass (roundoff) land on the last state.
    let mut cumulative = 0.0;
    let mut draw_idx = 0;
    for (index, a) in state.amps.iter().enumerate() {
        cumulative += a.norm_sqr();
        let mut count = 0u64;
        while draw_idx < draws.len() && draws[draw_idx] < cumulative {
            count += 1;
            draw_idx += 1;
        }
        if index == state.amps.len() - 1 {
            count += (draws.len() - draw_idx) as u64;
            draw_idx = draws.len();
        }
        if count > 0 {
            *histogram
                .entry(BitString::from_index(index as u64, state.n))
                .or_insert(0) += count;
        }
    }
    histogram
}
