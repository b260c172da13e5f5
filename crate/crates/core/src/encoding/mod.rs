//! Sparse approximate amplitude encoding around any transform model:
//! energies, coefficient selection, truncation, reconstruction and
//! reconstruction metrics.

mod pipeline;
mod report;
mod select;

pub use pipeline::{
    compare_states, evaluate, evaluate_dataset, exact_state, rank_profile, reconstruct, truncate_normalize,
    DatasetMetrics, Encoded, Encoder, RankStat, ReconstructionReport,
};
pub use report::{sparse_prep_cost, write_rank_profile_csv, EvaluationReport, PrepCost};
pub use select::{
    energies, select, select_conjugate_symmetric, select_topk, validate_budget, EnergyProfile, SelectionMask,
    SelectionRule,
};
