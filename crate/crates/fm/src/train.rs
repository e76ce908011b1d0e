use bitstring::BitString;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::model::{gradient_sum, Gradients};
use crate::{loss, FmError, FmModel, Result};

/// Mini-batch gradient-descent settings.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    /// Clamped to the dataset size at train time.
    pub batch_size: usize,
    /// Standard deviation of the latent-factor initialization.
    pub init_scale: f64,
    /// Latent dimension k of the trained model.
    pub latent_dim: usize,
    pub seed: u64,
    pub workers: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 0.01,
            epochs: 300,
            batch_size: 64,
            init_scale: 0.01,
            latent_dim: 8,
            seed: 0,
            workers: 1,
        }
    }
}

impl TrainConfig {
    fn validate(&self) -> Result<()> {
        if !(self.learning_rate.is_finite() && self.learning_rate >= 0.0) {
            return Err(FmError::Config(format!(
                "learning_rate {} must be finite and non-negative",
                self.learning_rate
            )));
        }
        if self.epochs == 0 || self.batch_size == 0 || self.latent_dim == 0 || self.workers == 0 {
            return Err(FmError::Config(
                "epochs, batch_size, latent_dim, and workers must be positive".into(),
            ));
        }
        if !(self.init_scale.is_finite() && self.init_scale > 0.0) {
            return Err(FmError::Config(format!(
                "init_scale {} must be positive",
                self.init_scale
            )));
        }
        Ok(())
    }
}

/// Training outcome: the best model seen (by full-dataset loss) and the
/// loss trace, one entry per epoch after the initial value.
#[derive(Debug, Clone)]
pub struct Trained {
    pub model: FmModel,
    pub best_loss: f64,
    /// loss_trace[0] is the loss at initialization.
    pub loss_trace: Vec<f64>,
}

/// Batch gradient, rows sharded across `workers` threads; partial sums are
/// reduced left-to-right so the result is independent of scheduling.
fn batch_gradient(
    model: &FmModel,
    rows: &[BitString],
    targets: &[f64],
    workers: usize,
) -> Result<Gradients> {
    let shard = rows.len().div_ceil(workers);
    let mut total = Gradients::zeros(model.n(), model.k());
    if workers == 1 || shard == rows.len() {
        total = gradient_sum(model, rows, targets)?;
    } else {
        let partials: Vec<Result<Gradients>> = std::thread::scope(|scope| {
            let handles: Vec<_> = rows
                .chunks(shard)
                .zip(targets.chunks(shard))
                .map(|(r, t)| scope.spawn(move || gradient_sum(model, r, t)))
                .collect();
            handles
                .into_iter()
                .map(|h| {
                    h.join()
                        .unwrap_or_else(|_| Err(FmError::Config("gradient worker panicked".into())))
                })
                .collect()
        });
        for partial in partials {
            total.add_assign(&partial?);
        }
    }
    total.scale(1.0 / rows.len() as f64);
    Ok(total)
}

/// Trains a factorization machine on the dataset.
///
/// Initialization: w0 = 0, w = 0, latent factors ~ Normal(0, init_scale)
/// from the seeded generator. Every epoch reshuffles the row order with the
/// same generator and takes one descent step per mini-batch. Returns the
/// model with the lowest full-dataset loss observed.
pub fn train(dataset: &crate::Dataset, config: &TrainConfig) -> Result<Trained> {
    config.validate()?;
    if dataset.is_empty() {
        return Err(FmError::Dimension("cannot train on an empty dataset".into()));
    }
    let n = dataset.n();
    let k = config.latent_dim;
    let batch_size = config.batch_size.min(dataset.len());

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let normal = Normal::new(0.0, config.init_scale)
        .map_err(|e| FmError::Config(format!("init_scale: {e}")))?;
    let v: Vec<f64> = (0..n * k).map(|_| normal.sample(&mut rng)).collect();
    let mut model = FmModel::new(n, k, 0.0, vec![0.0; n], v)?;

    let initial_loss = loss(&model, dataset)?;
    let mut best_model = model.clone();
    let mut best_loss = initial_loss;
    let mut loss_trace = vec![initial_loss];

    let mut order: Vec<usize> = (0..dataset.len()).collect();
    let rows = dataset.rows();
    let targets = dataset.targets();
    let mut batch_rows: Vec<BitString> = Vec::with_capacity(batch_size);
    let mut batch_targets: Vec<f64> = Vec::with_capacity(batch_size);

    for epoch in 1..=config.epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(batch_size) {
            batch_rows.clear();
            batch_targets.clear();
            for &idx in batch {
                batch_rows.push(rows[idx].clone());
                batch_targets.push(targets[idx]);
            }
            let g = batch_gradient(&model, &batch_rows, &batch_targets, config.workers)?;
            model.w0 -= config.learning_rate * g.w0;
            for i in 0..n {
                model.w[i] -= config.learning_rate * g.w[i];
                for f in 0..k {
                    *model.v_mut(i, f) -= config.learning_rate * g.v[i * k + f];
                }
            }
        }
        let epoch_loss = loss(&model, dataset)?;
        if !epoch_loss.is_finite() {
            return Err(FmError::Divergence {
                epoch,
                loss: epoch_loss,
            });
        }
        loss_trace.push(epoch_loss);
        if epoch_loss < best_loss {
            best_loss = epoch_loss;
            best_model = model.clone();
        }
    }

    Ok(Trained {
        model: best_model,
        best_loss,
        loss_trace,
    })
}
