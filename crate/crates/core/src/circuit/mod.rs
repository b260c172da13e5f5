//! Gate-level description of the transform and a plain statevector
//! simulator for it.
//!
//! Qubit `q` addresses bit `n - 1 - q` of the amplitude index, so qubit 0 is
//! the most significant bit. The simulator shares no code with the
//! butterfly and serves as its independent oracle.

mod qasm;

pub use qasm::{parse_qasm, to_qasm, verify_qasm};

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::scalar::{cis, Scalar};
use crate::transform::gate::u3;
use crate::transform::{ParameterSet, TransformModel};

/// Largest register for which a dense unitary is built.
pub const DENSE_MAX_QUBITS: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gate<T> {
    U3 { qubit: usize, alpha: T, beta: T, gamma: T },
    /// `diag(1, 1, 1, e^{i theta})` on the pair; symmetric in its qubits.
    CPhase { control: usize, target: usize, theta: T },
    Swap { a: usize, b: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Circuit<T> {
    n: usize,
    gates: Vec<Gate<T>>,
}

/// Gate tallies of a circuit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
pub struct GateCounts {
    pub single_qubit: usize,
    pub controlled_phase: usize,
    pub swap: usize,
}

impl<T: Scalar> Circuit<T> {
    pub fn new(n: usize) -> Self {
        Self { n, gates: Vec::new() }
    }

    /// Appends a gate after checking its qubit indices.
    pub fn push(&mut self, gate: Gate<T>) -> Result<()> {
        let ok = |q: usize| q < self.n;
        let valid = match gate {
            Gate::U3 { qubit, .. } => ok(qubit),
            Gate::CPhase { control, target, .. } => ok(control) && ok(target) && control != target,
            Gate::Swap { a, b } => ok(a) && ok(b) && a != b,
        };
        if !valid {
            return Err(Error::InvalidArgument(format!("gate {gate:?} invalid on {} qubits", self.n)));
        }
        self.gates.push(gate);
        Ok(())
    }

    /// The gate sequence of one block: for each qubit `q` a U3, then the
    /// controlled phases coupling `q` with every later qubit, then the swap
    /// network reversing qubit order.
    pub fn from_params(p: &ParameterSet<T>) -> Self {
        let mut c = Self::new(p.n());
        c.append_block(p);
        c
    }

    /// Blocks of the model in application order.
    pub fn from_model(m: &TransformModel<T>) -> Self {
        let mut c = Self::new(m.n());
        for b in m.blocks() {
            c.append_block(b);
        }
        c
    }

    fn append_block(&mut self, p: &ParameterSet<T>) {
        let n = p.n();
        for q in 0..n {
            let [alpha, beta, gamma] = p.mixers()[q];
            self.gates.push(Gate::U3 { qubit: q, alpha, beta, gamma });
            let level = p.level(n - 1 - q);
            for partner in q + 1..n {
                self.gates.push(Gate::CPhase { control: partner, target: q, theta: level[n - 1 - partner] });
            }
        }
        for q in 0..n / 2 {
            self.gates.push(Gate::Swap { a: q, b: n - 1 - q });
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn gates(&self) -> &[Gate<T>] {
        &self.gates
    }

    pub fn counts(&self) -> GateCounts {
        let mut c = GateCounts::default();
        for g in &self.gates {
            match g {
                Gate::U3 { .. } => c.single_qubit += 1,
                Gate::CPhase { .. } => c.controlled_phase += 1,
                Gate::Swap { .. } => c.swap += 1,
            }
        }
        c
    }

    /// Runs every gate on `state` in order.
    pub fn apply(&self, state: &mut [Complex<T>]) {
        assert_eq!(state.len(), 1 << self.n, "state length does not match register");
        for g in &self.gates {
            match *g {
                Gate::U3 { qubit, alpha, beta, gamma } => {
                    let m = u3(alpha, beta, gamma);
                    let bit = self.bit(qubit);
                    for i in 0..state.len() {
                        if i & bit == 0 {
                            let (a, b) = (state[i], state[i | bit]);
                            state[i] = m[0][0] * a + m[0][1] * b;
                            state[i | bit] = m[1][0] * a + m[1][1] * b;
                        }
                    }
                }
                Gate::CPhase { control, target, theta } => {
                    let mask = self.bit(control) | self.bit(target);
                    let phase = cis(theta);
                    for (i, amp) in state.iter_mut().enumerate() {
                        if i & mask == mask {
                            *amp = *amp * phase;
                        }
                    }
                }
                Gate::Swap { a, b } => {
                    let (ba, bb) = (self.bit(a), self.bit(b));
                    for i in 0..state.len() {
                        if i & ba != 0 && i & bb == 0 {
                            state.swap(i, (i & !ba) | bb);
                        }
                    }
                }
            }
        }
    }

    /// Dense unitary, built column by column from basis states.
    pub fn unitary(&self) -> Result<DenseMatrix<T>> {
        if self.n > DENSE_MAX_QUBITS {
            return Err(Error::ResourceLimit(format!(
                "dense unitary limited to {DENSE_MAX_QUBITS} qubits, got {}",
                self.n
            )));
        }
        let dim = 1 << self.n;
        Ok(DenseMatrix::from_columns(dim, |c| {
            let mut e = vec![Complex::new(T::zero(), T::zero()); dim];
            e[c] = Complex::new(T::one(), T::zero());
            self.apply(&mut e);
            e
        }))
    }

    fn bit(&self, qubit: usize) -> usize {
        1 << (self.n - 1 - qubit)
    }
}
