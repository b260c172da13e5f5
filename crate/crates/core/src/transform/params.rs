use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Result};
use crate::scalar::Scalar;

/// Largest qubit count accepted anywhere in the crate. `2^30` complex
/// amplitudes is already far past what the butterfly is meant for.
pub const MAX_QUBITS: usize = 30;

/// Trainable angles of one transform block on `n` qubits.
///
/// * `mixers[q] = (alpha, beta, gamma)` is the U3 gate acting on qubit `q`
///   (qubit 0 is the most significant bit of the amplitude index) and mixes
///   the two branches of butterfly stage `q`.
/// * `phases` packs the controlled-phase ladder level by level, `L = 1..n-1`,
///   level `L` holding `L` angles. Level `L` belongs to qubit `n - 1 - L`;
///   entry `b` of that level couples the qubit with qubit `n - 1 - b`.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterSet<T> {
    n: usize,
    mixers: Vec<[T; 3]>,
    phases: Vec<T>,
}

impl<T: Scalar> ParameterSet<T> {
    pub fn new(n: usize, mixers: Vec<[T; 3]>, phases: Vec<T>) -> Result<Self> {
        check_qubits(n)?;
        if mixers.len() != n {
            return Err(invalid(format!("expected {n} mixer triples, got {}", mixers.len())));
        }
        if phases.len() != phase_count(n) {
            return Err(invalid(format!(
                "expected {} ladder angles for n={n}, got {}",
                phase_count(n),
                phases.len()
            )));
        }
        let p = Self { n, mixers, phases };
        if let Some(i) = p.flatten().iter().position(|v| !v.is_finite()) {
            return Err(invalid(format!("angle {i} is not finite")));
        }
        Ok(p)
    }

    /// Parameters reproducing the unitary DFT: every mixer is the Hadamard
    /// `U3(pi/2, 0, pi)` and level `L` holds `(-pi/2^L, ..., -pi/2)`.
    pub fn fourier(n: usize) -> Result<Self> {
        check_qubits(n)?;
        let pi = T::PI();
        let hadamard = [pi / T::lit(2.0), T::zero(), pi];
        let mut phases = Vec::with_capacity(phase_count(n));
        for level in 1..n {
            for b in 0..level {
                phases.push(-pi / T::lit(2f64.powi((level - b) as i32)));
            }
        }
        Ok(Self { n, mixers: vec![hadamard; n], phases })
    }

    /// All angles zero. Every gate is the identity, so the block reduces to
    /// its fixed output swap network: `U x` is `x` with the index bits
    /// reversed, see [`super::bit_reverse_permute`]. This is the identity
    /// only for `n = 1`, and two such blocks in a row cancel.
    pub fn identity(n: usize) -> Result<Self> {
        check_qubits(n)?;
        Ok(Self {
            n,
            mixers: vec![[T::zero(); 3]; n],
            phases: vec![T::zero(); phase_count(n)],
        })
    }

    /// Angles drawn uniformly from `[-pi, pi)`.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Self> {
        check_qubits(n)?;
        let pi = std::f64::consts::PI;
        let flat: Vec<T> = (0..param_count(n))
            .map(|_| T::lit(rng.gen_range(-pi..pi)))
            .collect();
        Self::from_flat(n, &flat)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Vector length `N = 2^n`.
    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn mixers(&self) -> &[[T; 3]] {
        &self.mixers
    }

    pub fn phases(&self) -> &[T] {
        &self.phases
    }

    /// Angles of ladder level `level` (`1 <= level < n`); empty for level 0.
    pub fn level(&self, level: usize) -> &[T] {
        let start = level_offset(level);
        &self.phases[start..start + level]
    }

    pub fn param_count(&self) -> usize {
        param_count(self.n)
    }

    /// Flattened angles: mixer triples in qubit order, then the packed ladder.
    pub fn flatten(&self) -> Vec<T> {
        let mut out = Vec::with_capacity(self.param_count());
        self.write_flat(&mut out);
        out
    }

    pub(crate) fn write_flat(&self, out: &mut Vec<T>) {
        for m in &self.mixers {
            out.extend_from_slice(m);
        }
        out.extend_from_slice(&self.phases);
    }

    pub fn from_flat(n: usize, flat: &[T]) -> Result<Self> {
        check_qubits(n)?;
        if flat.len() != param_count(n) {
            return Err(invalid(format!(
                "expected {} angles for n={n}, got {}",
                param_count(n),
                flat.len()
            )));
        }
        let mixers = flat[..3 * n].chunks(3).map(|c| [c[0], c[1], c[2]]).collect();
        Self::new(n, mixers, flat[3 * n..].to_vec())
    }

    /// Overwrites the angles in place from a flat slice of the right length.
    pub(crate) fn assign_flat(&mut self, flat: &[T]) {
        debug_assert_eq!(flat.len(), self.param_count());
        for (q, m) in self.mixers.iter_mut().enumerate() {
            m.copy_from_slice(&flat[3 * q..3 * q + 3]);
        }
        self.phases.copy_from_slice(&flat[3 * self.n..]);
    }

    pub(crate) fn mixers_mut(&mut self) -> &mut [[T; 3]] {
        &mut self.mixers
    }
}

/// `n(n-1)/2` ladder angles.
pub fn phase_count(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// `3n + n(n-1)/2` angles per block.
pub fn param_count(n: usize) -> usize {
    3 * n + phase_count(n)
}

/// Start of ladder level `level` inside the packed phase vector.
pub fn level_offset(level: usize) -> usize {
    level * level.saturating_sub(1) / 2
}

fn check_qubits(n: usize) -> Result<()> {
    if n < 1 {
        return Err(invalid("qubit count must be at least 1"));
    }
    if n > MAX_QUBITS {
        return Err(invalid(format!("qubit count {n} exceeds {MAX_QUBITS}")));
    }
    Ok(())
}

pub fn fourier_init<T: Scalar>(n: usize) -> Result<ParameterSet<T>> {
    ParameterSet::fourier(n)
}

pub fn identity_init<T: Scalar>(n: usize) -> Result<ParameterSet<T>> {
    ParameterSet::identity(n)
}

/// Ordered stack of blocks sharing one qubit count; block 0 acts first.
#[derive(Debug, Clone, PartialEq)]
pub struct TransformModel<T> {
    n: usize,
    blocks: Vec<ParameterSet<T>>,
}

/// Half-width of the uniform noise added to the deep-model identity blocks.
pub const DEEP_INIT_NOISE: f64 = 1e-2;

impl<T: Scalar> TransformModel<T> {
    pub fn new(blocks: Vec<ParameterSet<T>>) -> Result<Self> {
        let first = blocks.first().ok_or_else(|| invalid("model needs at least one block"))?;
        let n = first.n();
        if let Some(d) = blocks.iter().position(|b| b.n() != n) {
            return Err(invalid(format!(
                "block {d} has n={} but block 0 has n={n}",
                blocks[d].n()
            )));
        }
        Ok(Self { n, blocks })
    }

    pub fn single(block: ParameterSet<T>) -> Self {
        Self { n: block.n(), blocks: vec![block] }
    }

    /// The fixed Fourier transform as a depth-1 model.
    pub fn fourier(n: usize) -> Result<Self> {
        Ok(Self::single(ParameterSet::fourier(n)?))
    }

    /// Block 0 at the Fourier point, blocks `1..depth` at the zero-angle
    /// point of [`ParameterSet::identity`].
    ///
    /// The later blocks carry seeded noise of half-width
    /// [`DEEP_INIT_NOISE`] on `beta` and `-noise` on `gamma` of every mixer.
    /// With `alpha = 0` the U3 gate is `diag(1, e^{i(beta + gamma)})`, so
    /// every gate of these blocks is still exactly the identity. The model
    /// starts at the DFT followed by `depth - 1` bit reversals, which has the
    /// same energies up to a fixed relabeling and the same reconstructions
    /// as the single Fourier block.
    pub fn deep_init(n: usize, depth: usize, seed: u64) -> Result<Self> {
        if depth < 1 {
            return Err(invalid("depth must be at least 1"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut blocks = vec![ParameterSet::fourier(n)?];
        for _ in 1..depth {
            let mut block = ParameterSet::identity(n)?;
            for m in block.mixers_mut() {
                let eps = T::lit(rng.gen_range(-DEEP_INIT_NOISE..=DEEP_INIT_NOISE));
                m[1] = eps;
                m[2] = -eps;
            }
            blocks.push(block);
        }
        Self::new(blocks)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn depth(&self) -> usize {
        self.blocks.len()
    }

    pub fn blocks(&self) -> &[ParameterSet<T>] {
        &self.blocks
    }

    pub fn param_count(&self) -> usize {
        self.blocks.len() * param_count(self.n)
    }

    /// Concatenation of each block's [`ParameterSet::flatten`], block 0 first.
    pub fn flatten(&self) -> Vec<T> {
        let mut out = Vec::with_capacity(self.param_count());
        for b in &self.blocks {
            b.write_flat(&mut out);
        }
        out
    }

    /// Replaces every angle from a flat vector in [`Self::flatten`] order.
    pub fn assign_flat(&mut self, flat: &[T]) -> Result<()> {
        if flat.len() != self.param_count() {
            return Err(invalid(format!(
                "expected {} angles, got {}",
                self.param_count(),
                flat.len()
            )));
        }
        if let Some(i) = flat.iter().position(|v| !v.is_finite()) {
            return Err(invalid(format!("angle {i} is not finite")));
        }
        let per = param_count(self.n);
        for (b, chunk) in self.blocks.iter_mut().zip(flat.chunks(per)) {
            b.assign_flat(chunk);
        }
        Ok(())
    }

    pub fn cast<U: Scalar>(&self) -> TransformModel<U> {
        TransformModel {
            n: self.n,
            blocks: self
                .blocks
                .iter()
                .map(|b| ParameterSet {
                    n: b.n,
                    mixers: b
                        .mixers
                        .iter()
                        .map(|m| m.map(|v| U::lit(v.as_f64())))
                        .collect(),
                    phases: b.phases.iter().map(|v| U::lit(v.as_f64())).collect(),
                })
                .collect(),
        }
    }
}
