//! Experiment plumbing behind the `aiqt` command line tool: JSON configs,
//! evaluation tables, power-law fits, per-sample artifacts and circuit
//! export. Every file is written atomically.

mod artifacts;
mod config;
mod powerlaw;
mod run;
mod table;

pub use artifacts::{denormalize, write_pgm, write_ppm, write_reconstruction_csv, Column};
pub use config::{DatasetSpec, ExperimentConfig, KSpec, LossParams, Method, MethodRules, OptimizerParams};
pub use powerlaw::{fit_power_law, write_fit_csv, PowerLawFit};
pub use run::{
    evaluate_models, export_qasm, fit_methods, initial_model, load_models, read_eval_rows, run_eval, run_powerlaw,
    run_rank_profile, run_reconstruct, run_train, MethodFit, QasmExport, ReconstructSummary, SampleResult,
    SampleSelector, TrainArtifacts, CHECKPOINT_FILE, EVAL_JSON_FILE, EVAL_TEXT_FILE, HISTORY_FILE, POWERLAW_FILE,
    QASM_TOLERANCE,
};
pub use table::{format_crmse, format_significant, render_table, EvalRow};
