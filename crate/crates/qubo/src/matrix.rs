use bitstring::BitString;
use fm::FmModel;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{QuboError, Result};

/// Upper-triangular QUBO coefficients with a scalar offset.
///
/// The objective is `sum_{i<=j} Q_ij x_i x_j` over x in {0,1}^n; `offset` is
/// the constant dropped from the matrix form (the surrogate's global bias).
#[derive(Debug, Clone, PartialEq)]
pub struct QuboMatrix {
    n: usize,
    /// Dense row-major n x n storage; entries below the diagonal stay zero.
    q: Vec<f64>,
    pub offset: f64,
}

impl QuboMatrix {
    pub fn zeros(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(QuboError::Dimension("QUBO needs n >= 1".into()));
        }
        Ok(QuboMatrix {
            n,
            q: vec![0.0; n * n],
            offset: 0.0,
        })
    }

    /// Builds from explicit upper-triangle entries `(i, j, value)` with
    /// i <= j; duplicates and lower-triangle coordinates are rejected.
    pub fn from_entries(n: usize, offset: f64, entries: &[(usize, usize, f64)]) -> Result<Self> {
        let mut m = QuboMatrix::zeros(n)?;
        m.offset = offset;
        let mut seen = std::collections::HashSet::new();
        for &(i, j, value) in entries {
            if i > j || j >= n {
                return Err(QuboError::Schema(format!(
                    "entry ({i}, {j}) outside the upper triangle of an {n}x{n} matrix"
                )));
            }
            if !value.is_finite() {
                return Err(QuboError::Schema(format!("entry ({i}, {j}) is not finite")));
            }
            if !seen.insert((i, j)) {
                return Err(QuboError::Schema(format!("duplicate entry ({i}, {j})")));
            }
            m.q[i * n + j] = value;
        }
        Ok(m)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        debug_assert!(i <= j && j < self.n);
        self.q[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: f64) -> Result<()> {
        if i > j || j >= self.n {
            return Err(QuboError::Dimension(format!(
                "({i}, {j}) outside the upper triangle"
            )));
        }
        self.q[i * self.n + j] = value;
        Ok(())
    }

    /// Nonzero upper-triangle entries as `(i, j, value)`.
    pub fn entries(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for i in 0..self.n {
            for j in i..self.n {
                let v = self.q[i * self.n + j];
                if v != 0.0 {
                    out.push((i, j, v));
                }
            }
        }
        out
    }

    /// Largest absolute coefficient; used to scale annealing temperatures.
    pub fn max_abs_entry(&self) -> f64 {
        self.q.iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
    }

    /// Energy change of flipping bit `flip` of `x`, in O(n).
    pub(crate) fn flip_delta(&self, x: &BitString, flip: usize) -> f64 {
        let mut coupling = self.get(flip, flip);
        for j in 0..self.n {
            if j != flip && x.is_set(j) {
                let (a, b) = if j < flip { (j, flip) } else { (flip, j) };
                coupling += self.get(a, b);
            }
        }
        if x.is_set(flip) {
            -coupling
        } else {
            coupling
        }
    }

    pub fn to_json(&self) -> String {
        let file = QuboFile {
            n: self.n,
            offset: self.offset,
            entries: self.entries(),
        };
        serde_json::to_string_pretty(&file).expect("QUBO serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: QuboFile =
            serde_json::from_str(text).map_err(|e| QuboError::Schema(format!("QUBO JSON: {e}")))?;
        QuboMatrix::from_entries(file.n, file.offset, &file.entries)
    }
}

/// File form: {n, offset, entries: [[i, j, value], ...]} with 0-based i <= j.
#[derive(Serialize, Deserialize)]
struct QuboFile {
    n: usize,
    offset: f64,
    entries: Vec<(usize, usize, f64)>,
}

/// QUBO objective `sum_{i<=j} Q_ij x_i x_j`, offset excluded.
pub fn energy(q: &QuboMatrix, x: &BitString) -> Result<f64> {
    if x.len() != q.n {
        return Err(QuboError::Dimension(format!(
            "bit string length {} does not match QUBO n = {}",
            x.len(),
            q.n
        )));
    }
    let ones: Vec<usize> = x.ones().collect();
    let mut e = 0.0;
    for (a, &i) in ones.iter().enumerate() {
        e += q.get(i, i);
        for &j in &ones[a + 1..] {
            e += q.get(i, j);
        }
    }
    Ok(e)
}

/// Compiles a trained factorization machine into QUBO form: Q_ii = w_i,
/// Q_ij = <v_i, v_j> for i < j, offset = w0. Uses x_i^2 = x_i for binary
/// variables, so model predictions equal `energy + offset` exactly.
pub fn from_fm(model: &FmModel) -> QuboMatrix {
    let n = model.n();
    let mut q = QuboMatrix::zeros(n).expect("model guarantees n >= 1");
    q.offset = model.w0;
    for i in 0..n {
        q.q[i * n + i] = model.w[i];
        for j in (i + 1)..n {
            q.q[i * n + j] = model.interaction(i, j);
        }
    }
    q
}

/// Random instance with every upper-triangle coefficient (diagonal
/// included) drawn uniformly from [-1, 1]. Problem sizes follow the 4..=32
/// decision-variable sweep the benchmarks exercise.
pub fn random_qubo(n: usize, seed: u64) -> Result<QuboMatrix> {
    if !(4..=32).contains(&n) {
        return Err(QuboError::Config(format!(
            "random instances cover n in 4..=32, got {n}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut q = QuboMatrix::zeros(n)?;
    for i in 0..n {
        for j in i..n {
            q.q[i * n + j] = rng.random::<f64>() * 2.0 - 1.0;
        }
    }
    Ok(q)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn energy_of_zero_vector_is_zero() {
        let q = random_qubo(6, 1).unwrap();
        assert_eq!(energy(&q, &BitString::zeros(6)).unwrap(), 0.0);
    }

    #[test]
    fn energy_of_unit_vector_is_the_diagonal() {
        let q = random_qubo(6, 2).unwrap();
        for i in 0..6 {
            let x = BitString::from_fn(6, |j| j == i);
            assert_eq!(energy(&q, &x).unwrap(), q.get(i, i));
        }
    }

    #[test]
    fn energy_of_all_ones_sums_the_upper_triangle() {
        let q = QuboMatrix::from_entries(
            3,
            0.0,
            &[
                (0, 0, 1.0),
                (0, 1, -2.0),
                (0, 2, 0.5),
                (1, 1, 3.0),
                (1, 2, 0.25),
                (2, 2, -1.0),
            ],
        )
        .unwrap();
        let x = BitString::from_fn(3, |_| true);
        assert_eq!(energy(&q, &x).unwrap(), 1.0 - 2.0 + 0.5 + 3.0 + 0.25 - 1.0);
    }

    #[test]
    fn length_mismatch_is_a_dimension_error() {
        let q = random_qubo(6, 3).unwrap();
        assert!(matches!(
            energy(&q, &BitString::zeros(5)),
            Err(QuboError::Dimension(_))
        ));
    }

    #[test]
    fn zero_model_compiles_to_zero_matrix() {
        let model = FmModel::zeros(5, 3).unwrap();
        let q = from_fm(&model);
        assert!(q.entries().is_empty());
        assert_eq!(q.offset, 0.0);
    }

    #[test]
    fn hand_expanded_two_bit_model() {
        // w = (1, -2), v_0 . v_1 = 0.5 gives Q = [[1, 0.5], [0, -2]].
        let model = FmModel::new(2, 1, 0.3, vec![1.0, -2.0], vec![1.0, 0.5]).unwrap();
        let q = from_fm(&model);
        assert_eq!(q.get(0, 0), 1.0);
        assert_eq!(q.get(0, 1), 0.5);
        assert_eq!(q.get(1, 1), -2.0);
        assert_eq!(q.offset, 0.3);
    }

    #[test]
    fn compiled_qubo_reproduces_every_model_prediction() {
        use rand::{Rng, SeedableRng};
        let mut rng = ChaCha8Rng::seed_from_u64(44);
        for _ in 0..20 {
            let n = rng.random_range(2..=10);
            let k = rng.random_range(1..=4);
            let model = FmModel::new(
                n,
                k,
                rng.random::<f64>() - 0.5,
                (0..n).map(|_| rng.random::<f64>() - 0.5).collect(),
                (0..n * k).map(|_| rng.random::<f64>() - 0.5).collect(),
            )
            .unwrap();
            let q = from_fm(&model);
            for idx in 0..(1u64 << n) {
                let x = BitString::from_index(idx, n);
                let lhs = fm::predict(&model, &x).unwrap();
                let rhs = energy(&q, &x).unwrap() + q.offset;
                assert!(
                    (lhs - rhs).abs() <= 1e-9,
                    "n = {n}, x = {x}: predict {lhs} vs energy+offset {rhs}"
                );
            }
        }
    }

    #[test]
    fn flip_delta_matches_direct_recomputation() {
        use rand::{Rng, SeedableRng};
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let q = random_qubo(10, 123).unwrap();
        for _ in 0..200 {
            let x = BitString::random(10, &mut rng);
            let flip = rng.random_range(0..10);
            let before = energy(&q, &x).unwrap();
            let after = energy(&q, &x.with_flipped(flip)).unwrap();
            let delta = q.flip_delta(&x, flip);
            assert!(
                (after - before - delta).abs() < 1e-12,
                "delta {delta} vs {}",
                after - before
            );
        }
    }

    #[test]
    fn random_instances_are_seeded_and_bounded() {
        let a = random_qubo(8, 99).unwrap();
        let b = random_qubo(8, 99).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, random_qubo(8, 100).unwrap());

        // n = 4: 4 diagonal + 6 off-diagonal eligible coefficients.
        let q4 = random_qubo(4, 5).unwrap();
        assert_eq!(q4.entries().len(), 10);

        for seed in 0..100 {
            let q = random_qubo(10, seed).unwrap();
            for (_, _, v) in q.entries() {
                assert!((-1.0..=1.0).contains(&v));
            }
        }

        assert!(random_qubo(3, 0).is_err());
        assert!(random_qubo(33, 0).is_err());
    }

    #[test]
    fn json_round_trip_preserves_the_matrix() {
        let q = random_qubo(7, 21).unwrap();
        let text = q.to_json();
        let back = QuboMatrix::from_json(&text).unwrap();
        assert_eq!(q, back);
    }

    #[test]
    fn json_rejects_lower_triangle_and_duplicates() {
        assert!(QuboMatrix::from_json(r#"{"n":3,"offset":0.0,"entries":[[2,1,0.5]]}"#).is_err());
        assert!(QuboMatrix::from_json(
            r#"{"n":3,"offset":0.0,"entries":[[0,1,0.5],[0,1,0.25]]}"#
        )
        .is_err());
    }
}
