//! Tail-loss training of transform models.
//!
//! The objective per sample is the soft-mask surrogate
//! `S = sum_j (1 - sigmoid((m_j - t_k) / tau)) m_j` plus `lambda H(m)`, where
//! `t_k` is the sample's `k`-th largest energy, held constant when
//! differentiating. Reported losses use the hard top-k mask instead.
//! With `k = N` the surrogate is defined as 0.

mod loss;
mod optim;
mod train;

pub use loss::{
    backward, fd_gradient_oracle, soft_masked_loss, tail_loss, LossConfig, LossValue, FD_MAX_DEPTH, FD_MAX_QUBITS,
};
pub use optim::{cosine_lr, Adam, AdamConfig};
pub use train::{epoch_metrics, train, train_with, write_history_csv, HistoryRow, TrainConfig, TrainOutcome};
