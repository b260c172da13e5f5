use std::path::Path;

use serde::{Deserialize, Serialize};

use super::pipeline::{DatasetMetrics, RankStat};
use super::select::SelectionRule;
use crate::error::{invalid, Result};

/// Machine-readable evaluation of one (method, k, split) combination.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub k: usize,
    pub rule: SelectionRule,
    pub depth: usize,
    pub split: String,
    pub mean_crmse: f64,
    pub mean_fidelity: f64,
    pub mean_imag_norm: f64,
    pub mean_real_norm: f64,
    pub n_samples: usize,
    /// `|K|` per sample: `k` for plain top-k, `k + 2` for the
    /// conjugate-symmetric rule.
    pub kept: usize,
}

impl EvaluationReport {
    pub fn new(k: usize, rule: SelectionRule, depth: usize, split: &str, m: &DatasetMetrics) -> Self {
        Self {
            k,
            rule,
            depth,
            split: split.to_string(),
            mean_crmse: m.mean_crmse,
            mean_fidelity: m.mean_fidelity,
            mean_imag_norm: m.mean_imag_norm,
            mean_real_norm: m.mean_real_norm,
            n_samples: m.n_samples,
            kept: m.kept,
        }
    }
}

/// Writes `rank,mean_m,std_m` rows.
pub fn write_rank_profile_csv(path: &Path, profile: &[RankStat]) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in profile {
        w.serialize(row)?;
    }
    let bytes = w.into_inner().map_err(|e| crate::Error::Io(e.into_error()))?;
    crate::io::write_atomic(path, &bytes)
}

/// Order-of-magnitude gate counts for one sparse encoding.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PrepCost {
    pub n: usize,
    pub k: usize,
    pub depth: usize,
    /// `n k / log2(n) + n`, unit constants.
    pub prep_estimate: f64,
    /// `n + n^2`, unit constants.
    pub inverse_estimate: f64,
    /// Exact U3 plus controlled-phase count of one block, `n + n(n-1)/2`.
    pub gates_per_block: usize,
    /// `depth * gates_per_block`.
    pub circuit_gates: usize,
}

/// Gate-count estimate for preparing a `k`-sparse state on `n` qubits and
/// applying the inverse transform. Swap gates are not counted.
pub fn sparse_prep_cost(n: usize, k: usize, depth: usize) -> Result<PrepCost> {
    if n < 2 {
        return Err(invalid("cost model needs n >= 2"));
    }
    if k < 1 || n >= usize::BITS as usize || k > 1 << n {
        return Err(invalid(format!("k={k} outside 1..=2^{n}")));
    }
    if depth < 1 {
        return Err(invalid("depth must be at least 1"));
    }
    let nf = n as f64;
    let gates_per_block = n + n * (n - 1) / 2;
    Ok(PrepCost {
        n,
        k,
        depth,
        prep_estimate: nf * k as f64 / nf.log2() + nf,
        inverse_estimate: nf + nf * nf,
        gates_per_block,
        circuit_gates: depth * gates_per_block,
    })
}
