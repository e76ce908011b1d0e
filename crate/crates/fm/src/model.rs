use bitstring::BitString;
use serde::{Deserialize, Serialize};

use crate::{Dataset, FmError, Result};

/// Factorization-machine parameters: global bias `w0`, linear weights `w`
/// (length n), and latent factors `v` stored row-major as an n x k matrix.
///
/// Score of a binary vector x:
///
/// ```text
/// w0 + sum_i w_i x_i + 1/2 sum_f [ (sum_i v_if x_i)^2 - sum_i v_if^2 x_i^2 ]
/// ```
#[derive(Debug, Clone, PartialEq)]
pub struct FmModel {
    n: usize,
    k: usize,
    pub w0: f64,
    pub w: Vec<f64>,
    v: Vec<f64>,
}

impl FmModel {
    pub fn new(n: usize, k: usize, w0: f64, w: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        if n == 0 || k == 0 {
            return Err(FmError::Dimension(format!(
                "model needs n >= 1 and k >= 1, got n = {n}, k = {k}"
            )));
        }
        if w.len() != n || v.len() != n * k {
            return Err(FmError::Dimension(format!(
                "weight shapes mismatch: |w| = {} (need {n}), |v| = {} (need {})",
                w.len(),
                v.len(),
                n * k
            )));
        }
        if !(w0.is_finite() && w.iter().all(|x| x.is_finite()) && v.iter().all(|x| x.is_finite()))
        {
            return Err(FmError::Dimension("model parameters must be finite".into()));
        }
        Ok(FmModel { n, k, w0, w, v })
    }

    pub fn zeros(n: usize, k: usize) -> Result<Self> {
        FmModel::new(n, k, 0.0, vec![0.0; n], vec![0.0; n * k])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    #[inline]
    pub fn v(&self, i: usize, f: usize) -> f64 {
        self.v[i * self.k + f]
    }

    #[inline]
    pub(crate) fn v_mut(&mut self, i: usize, f: usize) -> &mut f64 {
        &mut self.v[i * self.k + f]
    }

    /// Latent row v_i.
    pub fn latent_row(&self, i: usize) -> &[f64] {
        &self.v[i * self.k..(i + 1) * self.k]
    }

    /// Inner product of latent rows i and j: the model's pairwise
    /// interaction coefficient.
    pub fn interaction(&self, i: usize, j: usize) -> f64 {
        self.latent_row(i)
            .iter()
            .zip(self.latent_row(j))
            .map(|(a, b)| a * b)
            .sum()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&Snapshot::from(self)).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let snap: Snapshot =
            serde_json::from_str(text).map_err(|e| FmError::Schema(format!("model JSON: {e}")))?;
        snap.try_into()
    }
}

/// On-disk model shape: {n, k, w0, w[], V[][]} with V as rows v_i.
#[derive(Serialize, Deserialize)]
struct Snapshot {
    n: usize,
    k: usize,
    w0: f64,
    w: Vec<f64>,
    #[serde(rename = "V")]
    v: Vec<Vec<f64>>,
}

impl From<&FmModel> for Snapshot {
    fn from(m: &FmModel) -> Self {
        Snapshot {
            n: m.n,
            k: m.k,
            w0: m.w0,
            w: m.w.clone(),
            v: (0..m.n).map(|i| m.latent_row(i).to_vec()).collect(),
        }
    }
}

impl TryFrom<Snapshot> for FmModel {
    type Error = FmError;
    fn try_from(s: Snapshot) -> Result<Self> {
        if s.v.len() != s.n || s.v.iter().any(|row| row.len() != s.k) {
            return Err(FmError::Dimension(format!(
                "model JSON: V must be {} rows of length {}",
                s.n, s.k
            )));
        }
        FmModel::new(s.n, s.k, s.w0, s.w, s.v.into_iter().flatten().collect())
    }
}

fn check_len(model: &FmModel, x: &BitString) -> Result<()> {
    if x.len() != model.n {
        return Err(FmError::Dimension(format!(
            "input length {} does not match model n = {}",
            x.len(),
            model.n
        )));
    }
    Ok(())
}

/// Model score of a binary vector, evaluated through the factored form.
pub fn predict(model: &FmModel, x: &BitString) -> Result<f64> {
    predict_counted(model, x).map(|(y, _)| y)
}

/// [`predict`] plus a count of inner-loop operations, used to check the
/// O(n k) cost scaling.
pub fn predict_counted(model: &FmModel, x: &BitString) -> Result<(f64, u64)> {
    check_len(model, x)?;
    let mut ops = 0u64;
    let mut y = model.w0;
    for i in x.ones() {
        y += model.w[i];
        ops += 1;
    }
    for f in 0..model.k {
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for i in x.ones() {
            let v = model.v(i, f);
            sum += v;
            sum_sq += v * v;
            ops += 2;
        }
        y += 0.5 * (sum * sum - sum_sq);
        ops += 1;
    }
    Ok((y, ops))
}

/// Mean squared error of the model over a dataset.
pub fn loss(model: &FmModel, dataset: &Dataset) -> Result<f64> {
    if dataset.is_empty() {
        return Err(FmError::Dimension("loss of an empty dataset is undefined".into()));
    }
    let mut acc = 0.0;
    for (x, y) in dataset.iter() {
        let e = predict(model, x)? - y;
        acc += e * e;
    }
    Ok(acc / dataset.len() as f64)
}

/// Gradient of the batch MSE with respect to every model parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub w0: f64,
    pub w: Vec<f64>,
    pub v: Vec<f64>,
}

impl Gradients {
    pub fn zeros(n: usize, k: usize) -> Self {
        Gradients {
            w0: 0.0,
            w: vec![0.0; n],
            v: vec![0.0; n * k],
        }
    }

    pub(crate) fn add_assign(&mut self, other: &Gradients) {
        self.w0 += other.w0;
        for (a, b) in self.w.iter_mut().zip(&other.w) {
            *a += b;
        }
        for (a, b) in self.v.iter_mut().zip(&other.v) {
            *a += b;
        }
    }

    pub(crate) fn scale(&mut self, s: f64) {
        self.w0 *= s;
        self.w.iter_mut().for_each(|x| *x *= s);
        self.v.iter_mut().for_each(|x| *x *= s);
    }
}

/// Unnormalized sum of per-sample MSE gradients over `rows`; the caller
/// divides by the batch size. d(e^2)/d theta = 2 e * d(pred)/d theta with
/// d(pred)/d v_if = x_i (sum_j v_jf x_j) - v_if x_i.
pub(crate) fn gradient_sum(
    model: &FmModel,
    rows: &[BitString],
    targets: &[f64],
) -> Result<Gradients> {
    let k = model.k;
    let mut g = Gradients::zeros(model.n, k);
    let mut factor_sums = vec![0.0; k];
    for (x, &y) in rows.iter().zip(targets) {
        let residual = 2.0 * (predict(model, x)? - y);
        g.w0 += residual;
        for f in 0..k {
            let mut sum = 0.0;
            for i in x.ones() {
                sum += model.v(i, f);
            }
            factor_sums[f] = sum;
        }
        for i in x.ones() {
            g.w[i] += residual;
            for f in 0..k {
                g.v[i * k + f] += residual * (factor_sums[f] - model.v(i, f));
            }
        }
    }
    Ok(g)
}

/// Batch-averaged analytic gradients of the MSE.
pub fn gradients(model: &FmModel, rows: &[BitString], targets: &[f64]) -> Result<Gradients> {
    if rows.is_empty() {
        return Err(FmError::Dimension("gradient of an empty batch is undefined".into()));
    }
    if rows.len() != targets.len() {
        return Err(FmError::Dimension(format!(
            "{} rows but {} targets",
            rows.len(),
            targets.len()
        )));
    }
    for x in rows {
        check_len(model, x)?;
    }
    let mut g = gradient_sum(model, rows, targets)?;
    g.scale(1.0 / rows.len() as f64);
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy_model() -> FmModel {
        // n = 4, k = 2
        FmModel::new(
            4,
            2,
            0.7,
            vec![0.1, -0.2, 0.3, 0.05],
            vec![
                0.5, -0.1, // v_0
                0.2, 0.4, // v_1
                -0.3, 0.6, // v_2
                0.1, 0.1, // v_3
            ],
        )
        .unwrap()
    }

    #[test]
    fn all_zero_input_scores_the_bias() {
        let m = toy_model();
        assert_eq!(predict(&m, &BitString::zeros(4)).unwrap(), 0.7);
    }

    #[test]
    fn single_bit_adds_only_the_linear_weight() {
        // The factored quadratic term cancels self-interactions exactly.
        let m = toy_model();
        for i in 0..4 {
            let x = BitString::from_fn(4, |j| j == i);
            let y = predict(&m, &x).unwrap();
            assert!(
                (y - (m.w0 + m.w[i])).abs() < 1e-15,
                "bit {i}: {y} vs {}",
                m.w0 + m.w[i]
            );
        }
    }

    #[test]
    fn two_bits_add_the_latent_inner_product() {
        let m = toy_model();
        let x = BitString::from_fn(4, |j| j == 1 || j == 2);
        let expected = m.w0 + m.w[1] + m.w[2] + (0.2 * -0.3 + 0.4 * 0.6);
        let y = predict(&m, &x).unwrap();
        assert!((y - expected).abs() < 1e-15, "{y} vs {expected}");
        assert!((m.interaction(1, 2) - (0.2 * -0.3 + 0.4 * 0.6)).abs() < 1e-15);
    }

    #[test]
    fn factored_form_matches_explicit_pair_sum() {
        let m = toy_model();
        for idx in 0..16u64 {
            let x = BitString::from_index(idx, 4);
            let mut explicit = m.w0;
            for i in x.ones() {
                explicit += m.w[i];
            }
            for i in x.ones() {
                for j in x.ones() {
                    if i < j {
                        explicit += m.interaction(i, j);
                    }
                }
            }
            let y = predict(&m, &x).unwrap();
            assert!((y - explicit).abs() < 1e-12, "x = {x}: {y} vs {explicit}");
        }
    }

    #[test]
    fn length_mismatch_is_a_dimension_error() {
        let m = toy_model();
        assert!(matches!(
            predict(&m, &BitString::zeros(5)),
            Err(FmError::Dimension(_))
        ));
    }

    #[test]
    fn zero_residual_batch_has_zero_gradients() {
        let m = toy_model();
        let rows: Vec<BitString> = (0..8).map(|i| BitString::from_index(i, 4)).collect();
        let targets: Vec<f64> = rows.iter().map(|x| predict(&m, x).unwrap()).collect();
        let g = gradients(&m, &rows, &targets).unwrap();
        assert_eq!(g.w0, 0.0);
        assert!(g.w.iter().all(|&x| x == 0.0));
        assert!(g.v.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn all_zero_sample_moves_only_the_bias() {
        let m = toy_model();
        let rows = vec![BitString::zeros(4)];
        let targets = vec![1.5];
        let g = gradients(&m, &rows, &targets).unwrap();
        // d/dw0 of (w0 - y)^2 = 2 (w0 - y).
        assert!((g.w0 - 2.0 * (0.7 - 1.5)).abs() < 1e-15);
        assert!(g.w.iter().all(|&x| x == 0.0));
        assert!(g.v.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn analytic_gradient_matches_central_differences() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..25 {
            let (n, k) = (rng.random_range(2..10), rng.random_range(1..5));
            let m = random_model(&mut rng, n, k);
            let rows: Vec<BitString> =
                (0..rng.random_range(1..6)).map(|_| BitString::random(n, &mut rng)).collect();
            let targets: Vec<f64> = rows.iter().map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
            check_against_fd(&m, &rows, &targets);
        }
    }

    fn random_model(rng: &mut impl rand::Rng, n: usize, k: usize) -> FmModel {
        FmModel::new(
            n,
            k,
            rng.random::<f64>() - 0.5,
            (0..n).map(|_| rng.random::<f64>() - 0.5).collect(),
            (0..n * k).map(|_| rng.random::<f64>() - 0.5).collect(),
        )
        .unwrap()
    }

    fn batch_mse(m: &FmModel, rows: &[BitString], targets: &[f64]) -> f64 {
        rows.iter()
            .zip(targets)
            .map(|(x, y)| {
                let e = predict(m, x).unwrap() - y;
                e * e
            })
            .sum::<f64>()
            / rows.len() as f64
    }

    fn check_against_fd(m: &FmModel, rows: &[BitString], targets: &[f64]) {
        let g = gradients(m, rows, targets).unwrap();
        let h = 1e-6;
        let rel = |a: f64, b: f64| (a - b).abs() / a.abs().max(b.abs()).max(1.0);

        let mut plus = m.clone();
        let mut minus = m.clone();
        plus.w0 += h;
        minus.w0 -= h;
        let fd = (batch_mse(&plus, rows, targets) - batch_mse(&minus, rows, targets)) / (2.0 * h);
        assert!(rel(g.w0, fd) <= 1e-5, "w0: {} vs {fd}", g.w0);

        for i in 0..m.n() {
            let mut plus = m.clone();
            let mut minus = m.clone();
            plus.w[i] += h;
            minus.w[i] -= h;
            let fd =
                (batch_mse(&plus, rows, targets) - batch_mse(&minus, rows, targets)) / (2.0 * h);
            assert!(rel(g.w[i], fd) <= 1e-5, "w[{i}]: {} vs {fd}", g.w[i]);
            for f in 0..m.k() {
                let mut plus = m.clone();
                let mut minus = m.clone();
                *plus.v_mut(i, f) += h;
                *minus.v_mut(i, f) -= h;
                let fd = (batch_mse(&plus, rows, targets) - batch_mse(&minus, rows, targets))
                    / (2.0 * h);
                let a = g.v[i * m.k() + f];
                assert!(rel(a, fd) <= 1e-5, "v[{i},{f}]: {a} vs {fd}");
            }
        }
    }

    #[test]
    fn prediction_cost_scales_linearly_in_n() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let k = 6;
        let count_for = |n: usize, rng: &mut rand_chacha::ChaCha8Rng| -> u64 {
            let m = random_model(rng, n, k);
            let x = BitString::from_fn(n, |_| true);
            predict_counted(&m, &x).unwrap().1
        };
        let small = count_for(40, &mut rng);
        let large = count_for(80, &mut rng);
        let ratio = large as f64 / small as f64;
        assert!(ratio <= 2.5, "doubling n multiplied op count by {ratio}");
    }

    #[test]
    fn json_snapshot_round_trips() {
        let m = toy_model();
        let text = m.to_json();
        let back = FmModel::from_json(&text).unwrap();
        assert_eq!(m, back);
        assert!(text.contains("\"V\""));
    }
}
