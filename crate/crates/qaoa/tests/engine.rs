//! Engine-level invariants at realistic sizes.

use qaoa::{
    expectation, qubo_to_ising, run_qaoa, uniform_state, BasisEnergies, QaoaConfig, Statevector,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn norm_survives_long_random_layer_sequences() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let q = qubo::random_qubo(12, 5).unwrap();
    let ising = qubo_to_ising(&q);
    let energies = BasisEnergies::new(&ising);
    let mut state = uniform_state(12).unwrap();
    for _ in 0..50 {
        state.apply_cost_in_place(&energies, rng.random::<f64>() * 4.0 - 2.0);
        state.apply_mixer_in_place(rng.random::<f64>() * 4.0 - 2.0);
        let drift = (state.norm_sqr() - 1.0).abs();
        assert!(drift <= 1e-10, "norm drift {drift}");
    }
}

#[test]
fn basis_states_keep_exact_energies_through_expectation() {
    let q = qubo::random_qubo(10, 21).unwrap();
    let ising = qubo_to_ising(&q);
    for idx in [0usize, 1, 512, 1023] {
        let state = Statevector::basis(10, idx).unwrap();
        let e = expectation(&state, &ising);
        let direct = ising.basis_energy(idx as u64);
        assert!((e - direct).abs() <= 1e-12, "{e} vs {direct}");
    }
}

#[test]
fn optimization_amplifies_the_ground_state() {
    // The optimized sampling distribution should put well more weight on
    // the true optimum than the uniform baseline 2^-8 does.
    let mut amplified = 0;
    let total = 6;
    for seed in 0..total {
        let q = qubo::random_qubo(8, 4000 + seed).unwrap();
        let reference = qubo::brute_force(&q).unwrap();
        let result = run_qaoa(
            &q,
            &QaoaConfig {
                layers: 3,
                shots: 4096,
                restarts: 3,
                seed,
                ..QaoaConfig::default()
            },
        )
        .unwrap();
        let hits = result
            .shots_histogram
            .get(&reference.bits)
            .copied()
            .unwrap_or(0);
        let frequency = hits as f64 / 4096.0;
        if frequency > 1.0 / 256.0 {
            amplified += 1;
        }
    }
    assert!(
        amplified >= total - 1,
        "ground state amplified in only {amplified}/{total} instances"
    );
}

#[test]
fn qaoa_result_serializes_to_json() {
    let q = qubo::random_qubo(5, 77).unwrap();
    let result = run_qaoa(
        &q,
        &QaoaConfig {
            layers: 1,
            shots: 256,
            restarts: 2,
            seed: 3,
            ..QaoaConfig::default()
        },
    )
    .unwrap();
    let text = serde_json::to_string(&result).unwrap();
    assert!(text.contains("expectation_trace"));
    assert!(text.contains("shots_histogram"));
    assert!(text.contains("reference_depth"));
    let back: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(back["depth_report"]["qubits"], 5);
}
