use num_complex::Complex;
use rayon::prelude::*;

use super::select::{energies, select, EnergyProfile, SelectionMask, SelectionRule};
use crate::error::{invalid, Error, Result};
use crate::scalar::{inner, norm, to_complex, Scalar};
use crate::transform::{check_len, ModelKernel, TransformModel};

/// `x / ||x||_2` as a complex state.
pub fn exact_state<T: Scalar>(x: &[T]) -> Result<Vec<Complex<T>>> {
    if x.iter().any(|v| !v.is_finite()) {
        return Err(invalid("sample has non-finite entries"));
    }
    let nrm = x.iter().map(|v| *v * *v).sum::<T>().sqrt();
    if !(nrm > T::zero()) {
        return Err(Error::DegenerateInput("sample has zero norm".into()));
    }
    Ok(to_complex(&x.iter().map(|v| *v / nrm).collect::<Vec<_>>()))
}

/// Keeps the entries in `mask`, zeroes the rest and renormalizes.
pub fn truncate_normalize<T: Scalar>(y: &[Complex<T>], mask: &SelectionMask) -> Result<Vec<Complex<T>>> {
    let zero = Complex::new(T::zero(), T::zero());
    let mut phi = vec![zero; y.len()];
    for &j in mask.kept() {
        if j >= y.len() {
            return Err(invalid(format!("mask index {j} outside vector of length {}", y.len())));
        }
        phi[j] = y[j];
    }
    let nrm = norm(&phi);
    if !(nrm > T::zero()) {
        return Err(Error::DegenerateInput("all kept coefficients are zero".into()));
    }
    for z in &mut phi {
        *z = *z / nrm;
    }
    Ok(phi)
}

const STATE_NORM_TOL: f64 = 1e-9;

/// `U^{-1} phi` for a unit-norm `phi`.
pub fn reconstruct<T: Scalar>(phi: &[Complex<T>], model: &TransformModel<T>) -> Result<Vec<Complex<T>>> {
    check_len(phi.len(), model.n())?;
    check_unit(phi)?;
    let mut v = phi.to_vec();
    ModelKernel::new(model).apply_inverse(&mut v);
    Ok(v)
}

fn check_unit<T: Scalar>(phi: &[Complex<T>]) -> Result<()> {
    let dev = (norm(phi) - T::one()).abs().as_f64();
    if dev.is_finite() && dev <= STATE_NORM_TOL {
        Ok(())
    } else {
        Err(invalid(format!("state norm deviates from 1 by {dev:e}")))
    }
}

/// Reconstruction quality of one sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReconstructionReport<T> {
    /// `sqrt(mean_j |psi~_j - psi_j|^2)`, no phase alignment.
    pub crmse: T,
    /// `|<psi|psi~>|^2`.
    pub fidelity: T,
    /// `||Im psi~||_2`.
    pub imag_norm: T,
    /// `||Re psi~||_2`.
    pub real_norm: T,
}

/// Metrics between an exact state and its reconstruction.
pub fn compare_states<T: Scalar>(psi: &[Complex<T>], psi_tilde: &[Complex<T>]) -> ReconstructionReport<T> {
    assert_eq!(psi.len(), psi_tilde.len());
    let len = T::from_usize_lossy(psi.len());
    let sq: T = psi.iter().zip(psi_tilde).map(|(a, b)| (b - a).norm_sqr()).sum();
    ReconstructionReport {
        crmse: (sq / len).sqrt(),
        fidelity: inner(psi, psi_tilde).norm_sqr(),
        imag_norm: psi_tilde.iter().map(|z| z.im * z.im).sum::<T>().sqrt(),
        real_norm: psi_tilde.iter().map(|z| z.re * z.re).sum::<T>().sqrt(),
    }
}

/// Every intermediate of the encoding pipeline for one sample.
#[derive(Debug, Clone)]
pub struct Encoded<T> {
    pub psi: Vec<Complex<T>>,
    pub coefficients: Vec<Complex<T>>,
    pub energies: EnergyProfile<T>,
    pub mask: SelectionMask,
    pub phi: Vec<Complex<T>>,
    pub reconstruction: Vec<Complex<T>>,
}

impl<T: Scalar> Encoded<T> {
    pub fn report(&self) -> ReconstructionReport<T> {
        compare_states(&self.psi, &self.reconstruction)
    }

    /// Energy outside the kept set.
    pub fn tail(&self) -> T {
        self.energies.tail(&self.mask)
    }
}

/// A model with its gates precomputed, for running the pipeline on many
/// samples. Shareable across threads.
pub struct Encoder<T> {
    kernel: ModelKernel<T>,
}

impl<T: Scalar> Encoder<T> {
    pub fn new(model: &TransformModel<T>) -> Self {
        Self { kernel: ModelKernel::new(model) }
    }

    pub fn n(&self) -> usize {
        self.kernel.n()
    }

    pub fn depth(&self) -> usize {
        self.kernel.depth()
    }

    /// Exact state and its transform coefficients.
    pub fn coefficients(&self, x: &[T]) -> Result<(Vec<Complex<T>>, Vec<Complex<T>>)> {
        check_len(x.len(), self.n())?;
        let psi = exact_state(x)?;
        let mut y = psi.clone();
        self.kernel.apply(&mut y);
        Ok((psi, y))
    }

    pub fn energies(&self, x: &[T]) -> Result<EnergyProfile<T>> {
        energies(&self.coefficients(x)?.1)
    }

    pub fn encode(&self, x: &[T], rule: SelectionRule, k: usize) -> Result<Encoded<T>> {
        let (psi, y) = self.coefficients(x)?;
        let m = energies(&y)?;
        let mask = select(&m, rule, k)?;
        let phi = truncate_normalize(&y, &mask)?;
        check_unit(&phi)?;
        let mut rec = phi.clone();
        self.kernel.apply_inverse(&mut rec);
        Ok(Encoded { psi, coefficients: y, energies: m, mask, phi, reconstruction: rec })
    }

    pub fn evaluate(&self, x: &[T], rule: SelectionRule, k: usize) -> Result<ReconstructionReport<T>> {
        Ok(self.encode(x, rule, k)?.report())
    }

    /// Pipeline means over a dataset. Samples are processed in parallel on
    /// the current rayon pool and reduced serially in sample order, so the
    /// result does not depend on the number of workers.
    pub fn evaluate_dataset<S: AsRef<[T]> + Sync>(
        &self,
        samples: &[S],
        rule: SelectionRule,
        k: usize,
    ) -> Result<DatasetMetrics> {
        if samples.is_empty() {
            return Err(invalid("dataset is empty"));
        }
        let per: Vec<(ReconstructionReport<T>, T, usize)> = samples
            .par_iter()
            .map(|x| {
                let e = self.encode(x.as_ref(), rule, k)?;
                Ok((e.report(), e.tail(), e.mask.len()))
            })
            .collect::<Result<_>>()?;
        let count = per.len() as f64;
        let mean = |f: &dyn Fn(&(ReconstructionReport<T>, T, usize)) -> T| {
            per.iter().map(|r| f(r).as_f64()).sum::<f64>() / count
        };
        Ok(DatasetMetrics {
            n_samples: per.len(),
            kept: per[0].2,
            mean_crmse: mean(&|r| r.0.crmse),
            mean_fidelity: mean(&|r| r.0.fidelity),
            mean_imag_norm: mean(&|r| r.0.imag_norm),
            mean_real_norm: mean(&|r| r.0.real_norm),
            mean_tail: mean(&|r| r.1),
        })
    }

    /// Mean and population standard deviation of the sorted energies per
    /// rank.
    pub fn rank_profile<S: AsRef<[T]> + Sync>(&self, samples: &[S]) -> Result<Vec<RankStat>> {
        if samples.is_empty() {
            return Err(invalid("dataset is empty"));
        }
        let sorted: Vec<Vec<T>> =
            samples.par_iter().map(|x| Ok(self.energies(x.as_ref())?.sorted())).collect::<Result<_>>()?;
        let count = sorted.len() as f64;
        Ok((0..sorted[0].len())
            .map(|r| {
                let mean = sorted.iter().map(|s| s[r].as_f64()).sum::<f64>() / count;
                let var = sorted.iter().map(|s| (s[r].as_f64() - mean).powi(2)).sum::<f64>() / count;
                RankStat { rank: r, mean_m: mean, std_m: var.sqrt() }
            })
            .collect())
    }
}

/// Unweighted means over the samples of a dataset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DatasetMetrics {
    pub n_samples: usize,
    /// `|K|` per sample.
    pub kept: usize,
    pub mean_crmse: f64,
    pub mean_fidelity: f64,
    pub mean_imag_norm: f64,
    pub mean_real_norm: f64,
    /// Mean energy outside the kept set.
    pub mean_tail: f64,
}

/// One row of a rank profile. Ranks are 0-based.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct RankStat {
    pub rank: usize,
    pub mean_m: f64,
    pub std_m: f64,
}

/// Single-sample pipeline with the given model.
pub fn evaluate<T: Scalar>(
    x: &[T],
    model: &TransformModel<T>,
    rule: SelectionRule,
    k: usize,
) -> Result<ReconstructionReport<T>> {
    Encoder::new(model).evaluate(x, rule, k)
}

pub fn evaluate_dataset<T: Scalar, S: AsRef<[T]> + Sync>(
    samples: &[S],
    model: &TransformModel<T>,
    rule: SelectionRule,
    k: usize,
) -> Result<DatasetMetrics> {
    Encoder::new(model).evaluate_dataset(samples, rule, k)
}

pub fn rank_profile<T: Scalar, S: AsRef<[T]> + Sync>(
    samples: &[S],
    model: &TransformModel<T>,
) -> Result<Vec<RankStat>> {
    Encoder::new(model).rank_profile(samples)
}
