//! Radix-2 decimation-in-frequency butterfly with trainable twiddles.
//!
//! Stage `q` (`q = 0..n`) works on contiguous chunks of length `2h` with
//! `h = N >> (q + 1)`. Inside each chunk the pair `(v[t], v[t + h])` is mixed
//! by the stage's U3 gate and the second output is then multiplied by
//! `e^{i phi_q(t)}`, where `phi_q(t) = sum_b theta_b * bit_b(t)` over the
//! angles of ladder level `L = n - 1 - q`. The outputs of the last stage are
//! in bit-reversed order and are permuted back, so the Fourier point gives
//! the unitary DFT in natural order.
//!
//! Gate for gate this is the circuit emitted by [`crate::circuit::Circuit`]:
//! U3 on qubit `q`, then the controlled phases between `q` and every later
//! qubit, then the final swap network.

use num_complex::Complex;

use super::gate::{adjoint, u3, u3_partials, Mat2};
use super::params::{level_offset, ParameterSet, TransformModel};
use crate::scalar::{cis, Scalar};

pub(crate) struct Stage<T> {
    mixer: Mat2<T>,
    mixer_adj: Mat2<T>,
    partials: [Mat2<T>; 3],
    /// `e^{i phi_q(t)}` for `t = 0..h`.
    twiddle: Vec<Complex<T>>,
}

/// Precomputed gates of one block. Cheap to share across threads.
pub struct BlockKernel<T> {
    n: usize,
    stages: Vec<Stage<T>>,
}

impl<T: Scalar> BlockKernel<T> {
    pub fn new(p: &ParameterSet<T>) -> Self {
        let n = p.n();
        let stages = (0..n)
            .map(|q| {
                let [a, b, g] = p.mixers()[q];
                let mixer = u3(a, b, g);
                Stage {
                    mixer,
                    mixer_adj: adjoint(&mixer),
                    partials: u3_partials(a, b, g),
                    twiddle: twiddles(p.level(n - 1 - q)),
                }
            })
            .collect();
        Self { n, stages }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    /// In-place `v <- U v`. `v.len()` must equal [`Self::dim`].
    pub fn apply(&self, v: &mut [Complex<T>]) {
        assert_eq!(v.len(), self.dim(), "vector length does not match block");
        for (q, stage) in self.stages.iter().enumerate() {
            stage_forward(stage, self.half(q), v);
        }
        bit_reverse_permute(v);
    }

    /// In-place `v <- U^dagger v`, stages in reverse with adjoint gates.
    pub fn apply_inverse(&self, v: &mut [Complex<T>]) {
        assert_eq!(v.len(), self.dim(), "vector length does not match block");
        bit_reverse_permute(v);
        for (q, stage) in self.stages.iter().enumerate().rev() {
            stage_inverse(stage, self.half(q), v);
        }
    }

    /// Forward pass that records the input of every stage, for [`Self::backward`].
    pub(crate) fn apply_taped(&self, v: &mut [Complex<T>], tape: &mut Vec<Vec<Complex<T>>>) {
        assert_eq!(v.len(), self.dim(), "vector length does not match block");
        for (q, stage) in self.stages.iter().enumerate() {
            tape.push(v.to_vec());
            stage_forward(stage, self.half(q), v);
        }
        bit_reverse_permute(v);
    }

    /// Reverse-mode pass through the block.
    ///
    /// `adj` holds the output cotangent `dL/dy` in the convention
    /// `dL = Re sum conj(adj_j) dy_j`; on return it holds the cotangent of
    /// the block input. `tape` is the slice recorded by
    /// [`Self::apply_taped`] for this block. Angle gradients are added into
    /// `grad`, laid out as [`ParameterSet::flatten`].
    pub(crate) fn backward(&self, tape: &[Vec<Complex<T>>], adj: &mut [Complex<T>], grad: &mut [T]) {
        let n = self.n;
        debug_assert_eq!(tape.len(), n);
        debug_assert_eq!(grad.len(), super::params::param_count(n));
        let i = Complex::new(T::zero(), T::one());
        bit_reverse_permute(adj);
        for q in (0..n).rev() {
            let stage = &self.stages[q];
            let half = self.half(q);
            let m = &stage.mixer;
            let d = &stage.partials;
            let mut mixer_grad = [T::zero(); 3];
            let mut twiddle_grad = vec![T::zero(); half];
            for (input, cot) in tape[q].chunks_exact(2 * half).zip(adj.chunks_exact_mut(2 * half)) {
                let (in_lo, in_hi) = input.split_at(half);
                let (adj_lo, adj_hi) = cot.split_at_mut(half);
                for t in 0..half {
                    let (u, w) = (in_lo[t], in_hi[t]);
                    let tw = stage.twiddle[t];
                    let a_bar = adj_lo[t];
                    let b_bar = adj_hi[t];
                    let c_bar = b_bar * tw.conj();
                    for (k, dk) in d.iter().enumerate() {
                        let da = dk[0][0] * u + dk[0][1] * w;
                        let dc = dk[1][0] * u + dk[1][1] * w;
                        mixer_grad[k] = mixer_grad[k] + (a_bar.conj() * da).re + (c_bar.conj() * dc).re;
                    }
                    let b_out = (m[1][0] * u + m[1][1] * w) * tw;
                    twiddle_grad[t] = twiddle_grad[t] + (b_bar.conj() * i * b_out).re;
                    adj_lo[t] = m[0][0].conj() * a_bar + m[1][0].conj() * c_bar;
                    adj_hi[t] = m[0][1].conj() * a_bar + m[1][1].conj() * c_bar;
                }
            }
            for k in 0..3 {
                grad[3 * q + k] = grad[3 * q + k] + mixer_grad[k];
            }
            let level = n - 1 - q;
            let base = 3 * n + level_offset(level);
            for b in 0..level {
                let s: T = twiddle_grad
                    .iter()
                    .enumerate()
                    .filter(|(t, _)| t & (1 << b) != 0)
                    .map(|(_, g)| *g)
                    .sum();
                grad[base + b] = grad[base + b] + s;
            }
        }
    }

    fn half(&self, q: usize) -> usize {
        self.dim() >> (q + 1)
    }
}

/// `e^{i sum_b theta_b bit_b(t)}` for `t = 0..2^level`.
fn twiddles<T: Scalar>(theta: &[T]) -> Vec<Complex<T>> {
    let mut angle = Vec::with_capacity(1 << theta.len());
    angle.push(T::zero());
    for &th in theta {
        let len = angle.len();
        for t in 0..len {
            angle.push(angle[t] + th);
        }
    }
    angle.into_iter().map(cis).collect()
}

fn stage_forward<T: Scalar>(stage: &Stage<T>, half: usize, v: &mut [Complex<T>]) {
    let m = &stage.mixer;
    for chunk in v.chunks_exact_mut(2 * half) {
        let (lo, hi) = chunk.split_at_mut(half);
        for ((a, b), tw) in lo.iter_mut().zip(hi.iter_mut()).zip(&stage.twiddle) {
            let (u, w) = (*a, *b);
            *a = m[0][0] * u + m[0][1] * w;
            *b = (m[1][0] * u + m[1][1] * w) * tw;
        }
    }
}

fn stage_inverse<T: Scalar>(stage: &Stage<T>, half: usize, v: &mut [Complex<T>]) {
    let m = &stage.mixer_adj;
    for chunk in v.chunks_exact_mut(2 * half) {
        let (lo, hi) = chunk.split_at_mut(half);
        for ((a, b), tw) in lo.iter_mut().zip(hi.iter_mut()).zip(&stage.twiddle) {
            let u = *a;
            let w = *b * tw.conj();
            *a = m[0][0] * u + m[0][1] * w;
            *b = m[1][0] * u + m[1][1] * w;
        }
    }
}

/// Reverses the index bits of a power-of-two length slice, in place.
pub fn bit_reverse_permute<V>(v: &mut [V]) {
    let len = v.len();
    if len <= 2 {
        return;
    }
    let shift = usize::BITS - len.trailing_zeros();
    for i in 0..len {
        let j = i.reverse_bits() >> shift;
        if i < j {
            v.swap(i, j);
        }
    }
}

/// Kernels for every block of a model, applied block 0 first.
pub struct ModelKernel<T> {
    blocks: Vec<BlockKernel<T>>,
}

impl<T: Scalar> ModelKernel<T> {
    pub fn new(model: &TransformModel<T>) -> Self {
        Self { blocks: model.blocks().iter().map(BlockKernel::new).collect() }
    }

    pub fn n(&self) -> usize {
        self.blocks[0].n()
    }

    pub fn dim(&self) -> usize {
        self.blocks[0].dim()
    }

    pub fn depth(&self) -> usize {
        self.blocks.len()
    }

    pub fn blocks(&self) -> &[BlockKernel<T>] {
        &self.blocks
    }

    pub fn apply(&self, v: &mut [Complex<T>]) {
        for b in &self.blocks {
            b.apply(v);
        }
    }

    pub fn apply_inverse(&self, v: &mut [Complex<T>]) {
        for b in self.blocks.iter().rev() {
            b.apply_inverse(v);
        }
    }
}
