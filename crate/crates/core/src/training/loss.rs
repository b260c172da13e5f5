use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::encoding::{exact_state, validate_budget, SelectionRule};
use crate::error::{invalid, Error, Result};
use crate::scalar::{norm_sqr, Scalar};
use crate::transform::{check_len, param_count, BlockKernel, ModelKernel, TransformModel};

/// Sparsity budget and soft-mask hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LossConfig {
    pub k: usize,
    /// Soft-mask temperature.
    #[serde(default = "default_tau")]
    pub tau: f64,
    /// Entropy weight.
    #[serde(default = "default_lambda")]
    pub lambda: f64,
}

fn default_tau() -> f64 {
    1e-2
}

fn default_lambda() -> f64 {
    1e-4
}

impl LossConfig {
    pub fn new(k: usize) -> Self {
        Self { k, tau: default_tau(), lambda: default_lambda() }
    }

    pub fn validate(&self, len: usize) -> Result<()> {
        if !(self.tau > 0.0) || !self.tau.is_finite() {
            return Err(invalid(format!("tau must be positive, got {}", self.tau)));
        }
        if !(self.lambda >= 0.0) || !self.lambda.is_finite() {
            return Err(invalid(format!("lambda must be nonnegative, got {}", self.lambda)));
        }
        validate_budget(SelectionRule::PlainTopk, self.k, len)
    }
}

/// Batch means of the loss terms.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LossValue {
    /// Energy outside the hard top-k set.
    pub hard_tail: f64,
    /// Soft-mask surrogate of the tail.
    pub soft_tail: f64,
    /// Entropy `H(m) = -sum m ln m`, without the weight.
    pub entropy: f64,
    /// `soft_tail + lambda * entropy`, the differentiated objective.
    pub objective: f64,
    /// `hard_tail + lambda * entropy`, the straight-through forward value.
    pub reported: f64,
}

#[derive(Debug, Clone, Copy)]
struct SampleTerms<T> {
    hard: T,
    soft: T,
    entropy: T,
}

/// The `k`-th largest entry of `m`.
fn kth_largest<T: Scalar>(m: &[T], k: usize) -> T {
    let mut v = m.to_vec();
    let idx = k - 1;
    v.select_nth_unstable_by(idx, |a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    v[idx]
}

fn sigmoid<T: Scalar>(z: T) -> T {
    if z >= T::zero() {
        T::one() / (T::one() + (-z).exp())
    } else {
        let e = z.exp();
        e / (T::one() + e)
    }
}

/// Loss terms of one energy profile and, if `dm` is given, the derivative
/// of `soft + lambda * entropy` with respect to each `m_j` with the
/// threshold held fixed.
fn terms<T: Scalar>(m: &[T], cfg: &LossConfig, threshold: T, dm: Option<&mut [T]>) -> SampleTerms<T> {
    let len = m.len();
    let tau = T::lit(cfg.tau);
    let lambda = T::lit(cfg.lambda);
    let full = cfg.k >= len;
    let mut soft = T::zero();
    let mut entropy = T::zero();
    let mut dm = dm;
    for (j, &mj) in m.iter().enumerate() {
        let (s, ds) = if full {
            (T::zero(), T::zero())
        } else {
            let g = sigmoid((mj - threshold) / tau);
            ((T::one() - g) * mj, (T::one() - g) - mj * g * (T::one() - g) / tau)
        };
        soft = soft + s;
        let (h, dh) = if mj > T::zero() {
            (-mj * mj.ln(), -(mj.ln() + T::one()))
        } else {
            (T::zero(), T::zero())
        };
        entropy = entropy + h;
        if let Some(d) = dm.as_deref_mut() {
            d[j] = ds + lambda * dh;
        }
    }
    let hard = if full {
        T::zero()
    } else {
        let mut order: Vec<usize> = (0..len).collect();
        order.sort_by(|&a, &b| m[b].partial_cmp(&m[a]).unwrap_or(std::cmp::Ordering::Equal));
        order[cfg.k..].iter().map(|&j| m[j]).sum()
    };
    SampleTerms { hard, soft, entropy }
}

fn energies_of<T: Scalar>(y: &[Complex<T>]) -> Result<(Vec<T>, T)> {
    let e = norm_sqr(y);
    if !(e > T::zero()) || !e.is_finite() {
        return Err(Error::DegenerateInput("transformed sample has zero or non-finite energy".into()));
    }
    Ok((y.iter().map(|z| z.norm_sqr() / e).collect(), e))
}

fn check_batch<T: Scalar, S: AsRef<[T]>>(batch: &[S], model: &TransformModel<T>, cfg: &LossConfig) -> Result<()> {
    if batch.is_empty() {
        return Err(invalid("batch is empty"));
    }
    cfg.validate(model.dim())?;
    for x in batch {
        check_len(x.as_ref().len(), model.n())?;
    }
    Ok(())
}

fn mean_value<T: Scalar>(parts: &[SampleTerms<T>], lambda: f64) -> LossValue {
    let count = parts.len() as f64;
    let hard = parts.iter().map(|p| p.hard.as_f64()).sum::<f64>() / count;
    let soft = parts.iter().map(|p| p.soft.as_f64()).sum::<f64>() / count;
    let entropy = parts.iter().map(|p| p.entropy.as_f64()).sum::<f64>() / count;
    LossValue {
        hard_tail: hard,
        soft_tail: soft,
        entropy,
        objective: soft + lambda * entropy,
        reported: hard + lambda * entropy,
    }
}

/// Loss terms with the threshold of every sample either recomputed or
/// taken from `frozen`.
fn evaluate_terms<T: Scalar, S: AsRef<[T]> + Sync>(
    batch: &[S],
    kernel: &ModelKernel<T>,
    cfg: &LossConfig,
    frozen: Option<&[T]>,
) -> Result<Vec<SampleTerms<T>>> {
    batch
        .par_iter()
        .enumerate()
        .map(|(i, x)| {
            let mut y = exact_state(x.as_ref())?;
            kernel.apply(&mut y);
            let (m, _) = energies_of(&y)?;
            let t = match frozen {
                Some(f) => f[i],
                None => kth_largest(&m, cfg.k.min(m.len())),
            };
            Ok(terms(&m, cfg, t, None))
        })
        .collect()
}

/// Mean hard tail energy outside the top-k set.
pub fn tail_loss<T: Scalar, S: AsRef<[T]> + Sync>(batch: &[S], model: &TransformModel<T>, cfg: &LossConfig) -> Result<f64> {
    Ok(soft_masked_loss(batch, model, cfg)?.hard_tail)
}

/// All loss terms of a batch.
pub fn soft_masked_loss<T: Scalar, S: AsRef<[T]> + Sync>(
    batch: &[S],
    model: &TransformModel<T>,
    cfg: &LossConfig,
) -> Result<LossValue> {
    check_batch(batch, model, cfg)?;
    let parts = evaluate_terms(batch, &ModelKernel::new(model), cfg, None)?;
    Ok(mean_value(&parts, cfg.lambda))
}

/// Loss terms and one sample's contribution to the gradient.
fn sample_gradient<T: Scalar>(
    kernels: &[BlockKernel<T>],
    x: &[T],
    cfg: &LossConfig,
) -> Result<(SampleTerms<T>, Vec<T>)> {
    let n = kernels[0].n();
    let per = param_count(n);
    let mut y = exact_state(x)?;
    let mut tape = Vec::with_capacity(kernels.len() * n);
    for k in kernels {
        k.apply_taped(&mut y, &mut tape);
    }
    let (m, e) = energies_of(&y)?;
    let t = kth_largest(&m, cfg.k.min(m.len()));
    let mut dm = vec![T::zero(); m.len()];
    let parts = terms(&m, cfg, t, Some(&mut dm));
    let dot: T = m.iter().zip(&dm).map(|(a, b)| *a * *b).sum();
    let two = T::lit(2.0);
    let mut adj: Vec<Complex<T>> = y.iter().zip(&dm).map(|(yj, d)| *yj * (two * (*d - dot) / e)).collect();
    let mut grad = vec![T::zero(); per * kernels.len()];
    for (d, k) in kernels.iter().enumerate().rev() {
        k.backward(&tape[d * n..(d + 1) * n], &mut adj, &mut grad[d * per..(d + 1) * per]);
    }
    Ok((parts, grad))
}

/// Loss terms and the exact gradient of the batch-mean objective
/// `soft_tail + lambda * entropy`, laid out as [`TransformModel::flatten`].
///
/// The top-k threshold of every sample is treated as a constant. Per-sample
/// gradients are computed in parallel and summed in sample order, so the
/// result is the same for any pool size.
pub fn backward<T: Scalar, S: AsRef<[T]> + Sync>(
    batch: &[S],
    model: &TransformModel<T>,
    cfg: &LossConfig,
) -> Result<(LossValue, Vec<T>)> {
    check_batch(batch, model, cfg)?;
    let kernels: Vec<BlockKernel<T>> = model.blocks().iter().map(BlockKernel::new).collect();
    let per_sample: Vec<(SampleTerms<T>, Vec<T>)> = batch
        .par_iter()
        .map(|x| sample_gradient(&kernels, x.as_ref(), cfg))
        .collect::<Result<_>>()?;
    let mut grad = vec![T::zero(); model.param_count()];
    for (_, g) in &per_sample {
        for (acc, v) in grad.iter_mut().zip(g) {
            *acc = *acc + *v;
        }
    }
    let scale = T::one() / T::from_usize_lossy(batch.len());
    for (i, g) in grad.iter_mut().enumerate() {
        *g = *g * scale;
        if !g.is_finite() {
            return Err(Error::NumericFailure { index: i, detail: "gradient entry is not finite".into() });
        }
    }
    let parts: Vec<SampleTerms<T>> = per_sample.iter().map(|(p, _)| *p).collect();
    Ok((mean_value(&parts, cfg.lambda), grad))
}

/// Largest model the finite-difference oracle accepts.
pub const FD_MAX_QUBITS: usize = 6;
pub const FD_MAX_DEPTH: usize = 3;

/// Central differences of the batch-mean objective, one coordinate at a
/// time, with every sample's top-k threshold frozen at its value for the
/// unperturbed model.
pub fn fd_gradient_oracle<T: Scalar, S: AsRef<[T]> + Sync>(
    batch: &[S],
    model: &TransformModel<T>,
    cfg: &LossConfig,
    step: T,
) -> Result<Vec<T>> {
    if model.n() > FD_MAX_QUBITS || model.depth() > FD_MAX_DEPTH {
        return Err(Error::ResourceLimit(format!(
            "finite differences limited to n <= {FD_MAX_QUBITS}, depth <= {FD_MAX_DEPTH}"
        )));
    }
    if !(step > T::zero()) {
        return Err(invalid("finite-difference step must be positive"));
    }
    check_batch(batch, model, cfg)?;
    let base = ModelKernel::new(model);
    let thresholds: Vec<T> = batch
        .iter()
        .map(|x| {
            let mut y = exact_state(x.as_ref())?;
            base.apply(&mut y);
            let (m, _) = energies_of(&y)?;
            Ok(kth_largest(&m, cfg.k.min(m.len())))
        })
        .collect::<Result<_>>()?;
    let objective = |flat: &[T]| -> Result<T> {
        let mut m = model.clone();
        m.assign_flat(flat)?;
        let parts = evaluate_terms(batch, &ModelKernel::new(&m), cfg, Some(&thresholds))?;
        let count = T::from_usize_lossy(parts.len());
        let lambda = T::lit(cfg.lambda);
        Ok(parts.iter().map(|p| p.soft + lambda * p.entropy).sum::<T>() / count)
    };
    let flat = model.flatten();
    let mut out = Vec::with_capacity(flat.len());
    for i in 0..flat.len() {
        let mut plus = flat.clone();
        plus[i] = plus[i] + step;
        let mut minus = flat.clone();
        minus[i] = minus[i] - step;
        out.push((objective(&plus)? - objective(&minus)?) / (step + step));
    }
    Ok(out)
}
