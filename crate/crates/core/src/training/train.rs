use std::path::Path;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::loss::{backward, soft_masked_loss, LossConfig};
use super::optim::{cosine_lr, Adam, AdamConfig};
use crate::encoding::{Encoder, SelectionRule};
use crate::error::{invalid, Error, Result};
use crate::scalar::Scalar;
use crate::transform::{Checkpoint, CheckpointMetadata, TransformModel};

/// Optimizer and schedule settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainConfig {
    pub loss: LossConfig,
    #[serde(default = "default_epochs")]
    pub epochs: usize,
    #[serde(default = "default_batch")]
    pub batch_size: usize,
    #[serde(default = "default_lr_max")]
    pub lr_max: f64,
    #[serde(default = "default_lr_min")]
    pub lr_min: f64,
    #[serde(default)]
    pub adam: AdamConfig,
    /// Shuffle seed.
    #[serde(default)]
    pub seed: u64,
}

fn default_epochs() -> usize {
    150
}

fn default_batch() -> usize {
    128
}

fn default_lr_max() -> f64 {
    1e-3
}

fn default_lr_min() -> f64 {
    1e-5
}

impl TrainConfig {
    pub fn new(loss: LossConfig) -> Self {
        Self {
            loss,
            epochs: default_epochs(),
            batch_size: default_batch(),
            lr_max: default_lr_max(),
            lr_min: default_lr_min(),
            adam: AdamConfig::default(),
            seed: 0,
        }
    }

    pub fn validate(&self, len: usize) -> Result<()> {
        self.loss.validate(len)?;
        if self.batch_size == 0 {
            return Err(invalid("batch_size must be at least 1"));
        }
        let lr_ok = |v: f64| v.is_finite() && v >= 0.0;
        if !lr_ok(self.lr_max) || !lr_ok(self.lr_min) || self.lr_min > self.lr_max {
            return Err(invalid(format!("need 0 <= lr_min <= lr_max, got {} and {}", self.lr_min, self.lr_max)));
        }
        let a = &self.adam;
        if !(0.0..1.0).contains(&a.beta1) || !(0.0..1.0).contains(&a.beta2) || !(a.eps > 0.0) {
            return Err(invalid("adam needs beta1, beta2 in [0, 1) and eps > 0"));
        }
        Ok(())
    }
}

/// Training-set metrics after an epoch. Row 0 describes the initial model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistoryRow {
    pub epoch: usize,
    /// Learning rate used during this epoch, 0 for row 0.
    pub lr: f64,
    pub hard_tail_loss: f64,
    pub soft_loss: f64,
    /// `lambda * H(m)`.
    pub entropy_term: f64,
    pub mean_imag_norm: f64,
    pub mean_real_norm: f64,
    pub wall_time_s: f64,
}

pub struct TrainOutcome<T> {
    pub model: TransformModel<T>,
    pub history: Vec<HistoryRow>,
}

/// Hard tail, soft loss, entropy and reconstruction residual norms over
/// the whole set, plain top-k rule.
pub fn epoch_metrics<T: Scalar, S: AsRef<[T]> + Sync>(
    samples: &[S],
    model: &TransformModel<T>,
    cfg: &LossConfig,
) -> Result<HistoryRow> {
    let loss = soft_masked_loss(samples, model, cfg)?;
    let eval = Encoder::new(model).evaluate_dataset(samples, SelectionRule::PlainTopk, cfg.k)?;
    Ok(HistoryRow {
        epoch: 0,
        lr: 0.0,
        hard_tail_loss: loss.hard_tail,
        soft_loss: loss.soft_tail,
        entropy_term: cfg.lambda * loss.entropy,
        mean_imag_norm: eval.mean_imag_norm,
        mean_real_norm: eval.mean_real_norm,
        wall_time_s: 0.0,
    })
}

/// Minibatch Adam on the soft surrogate. See [`train_with`].
pub fn train<T: Scalar, S: AsRef<[T]> + Sync>(
    samples: &[S],
    init: TransformModel<T>,
    cfg: &TrainConfig,
) -> Result<TrainOutcome<T>> {
    train_with(samples, init, cfg, |_, _| Ok(()))
}

/// Runs `cfg.epochs` epochs of shuffled minibatch Adam and records a
/// [`HistoryRow`] before training and after every epoch. `on_epoch` sees
/// each row with the model it describes.
///
/// A non-finite loss, gradient or parameter aborts with
/// [`Error::TrainingFailure`] carrying the parameters at the start of the
/// failing epoch.
pub fn train_with<T: Scalar, S: AsRef<[T]> + Sync>(
    samples: &[S],
    init: TransformModel<T>,
    cfg: &TrainConfig,
    mut on_epoch: impl FnMut(&HistoryRow, &TransformModel<T>) -> Result<()>,
) -> Result<TrainOutcome<T>> {
    if samples.is_empty() {
        return Err(invalid("training set is empty"));
    }
    cfg.validate(init.dim())?;
    let start = Instant::now();
    let mut model = init;
    let mut history = Vec::with_capacity(cfg.epochs + 1);
    let row0 = epoch_metrics(samples, &model, &cfg.loss)?;
    on_epoch(&row0, &model)?;
    history.push(row0);

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut opt = Adam::new(model.param_count(), &cfg.adam);
    let mut order: Vec<usize> = (0..samples.len()).collect();
    let mut flat = model.flatten();
    for epoch in 0..cfg.epochs {
        let lr = cosine_lr(epoch, cfg.epochs, cfg.lr_max, cfg.lr_min);
        let last_good = model.clone();
        let fail = |detail: String| Error::TrainingFailure {
            epoch: epoch + 1,
            detail,
            last_good: Box::new(Checkpoint::from_model(
                &last_good,
                CheckpointMetadata { seed: cfg.seed, epoch, loss: Some(history[epoch].hard_tail_loss) },
            )),
        };
        order.shuffle(&mut rng);
        for chunk in order.chunks(cfg.batch_size) {
            let batch: Vec<&[T]> = chunk.iter().map(|&i| samples[i].as_ref()).collect();
            let (value, grad) = match backward(&batch, &model, &cfg.loss) {
                Ok(v) => v,
                Err(Error::NumericFailure { index, detail }) => {
                    return Err(fail(format!("parameter {index}: {detail}")))
                }
                Err(e) => return Err(e),
            };
            if !value.objective.is_finite() {
                return Err(fail("loss is not finite".into()));
            }
            opt.update(&mut flat, &grad, lr);
            if let Err(e) = model.assign_flat(&flat) {
                return Err(fail(e.to_string()));
            }
        }
        let mut row = epoch_metrics(samples, &model, &cfg.loss)?;
        if !row.hard_tail_loss.is_finite() || !row.soft_loss.is_finite() {
            return Err(fail("epoch metrics are not finite".into()));
        }
        row.epoch = epoch + 1;
        row.lr = lr;
        row.wall_time_s = start.elapsed().as_secs_f64();
        log::info!(
            "epoch {:>4} lr {:.3e} tail {:.6e} soft {:.6e} imag {:.3e}",
            row.epoch,
            row.lr,
            row.hard_tail_loss,
            row.soft_loss,
            row.mean_imag_norm
        );
        on_epoch(&row, &model)?;
        history.push(row);
    }
    Ok(TrainOutcome { model, history })
}

/// Writes the history rows as CSV.
pub fn write_history_csv(path: &Path, rows: &[HistoryRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    crate::io::write_atomic(path, &bytes)
}
