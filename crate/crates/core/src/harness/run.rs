use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::artifacts::{denormalize, write_pgm, write_ppm, write_reconstruction_csv, Column};
use super::config::{ExperimentConfig, Method};
use super::powerlaw::{fit_power_law, write_fit_csv, PowerLawFit};
use super::table::{render_table, EvalRow};
use crate::circuit::{to_qasm, verify_qasm, Circuit, GateCounts};
use crate::data::{SampleSet, Split};
use crate::encoding::{validate_budget, write_rank_profile_csv, Encoder, EvaluationReport};
use crate::error::{invalid, Error, Result};
use crate::io::write_atomic;
use crate::training::{train_with, write_history_csv, HistoryRow};
use crate::transform::{Checkpoint, CheckpointMetadata, TransformModel};

/// Round-trip tolerance of exported circuits.
pub const QASM_TOLERANCE: f64 = 1e-9;

pub const CHECKPOINT_FILE: &str = "checkpoint.json";
pub const HISTORY_FILE: &str = "history.csv";
pub const EVAL_JSON_FILE: &str = "eval.json";
pub const EVAL_TEXT_FILE: &str = "eval.txt";
pub const POWERLAW_FILE: &str = "powerlaw.json";

/// Fourier start for one block, near-identity blocks after it.
pub fn initial_model(n: usize, depth: usize, seed: u64) -> Result<TransformModel<f64>> {
    TransformModel::deep_init(n, depth, seed)
}

fn create_dir(out: &Path) -> Result<()> {
    std::fs::create_dir_all(out)?;
    Ok(())
}

fn write_json<V: Serialize + ?Sized>(path: &Path, value: &V) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

#[derive(Debug, Clone)]
pub struct TrainArtifacts {
    pub checkpoint: PathBuf,
    pub history: PathBuf,
    pub rows: Vec<HistoryRow>,
}

/// Trains on the training split and writes `checkpoint.json`,
/// `history.csv`, the resolved `config.json` and, when configured,
/// `checkpoint-epoch-NNNN.json` every `checkpoint_every` epochs. If training
/// diverges the last finite parameters are saved as
/// `checkpoint-last-good.json` before the error is returned.
pub fn run_train(cfg: &ExperimentConfig, out: &Path) -> Result<TrainArtifacts> {
    let n = cfg.validate()?;
    let set = cfg.load_dataset()?;
    let train_set = set.split(Split::Train);
    if train_set.is_empty() {
        return Err(invalid("the training split is empty"));
    }
    let tcfg = cfg.train_config()?;
    create_dir(out)?;
    write_json(&out.join("config.json"), cfg)?;
    let init = initial_model(n, cfg.depth, cfg.seed)?;
    log::info!(
        "training n={n} depth={} k={} on {} samples for {} epochs",
        cfg.depth,
        tcfg.loss.k,
        train_set.len(),
        tcfg.epochs
    );
    let every = cfg.checkpoint_every;
    let result = train_with(&train_set, init, &tcfg, |row, model| {
        if let Some(c) = every {
            if row.epoch > 0 && row.epoch % c == 0 {
                let meta = CheckpointMetadata { seed: cfg.seed, epoch: row.epoch, loss: Some(row.hard_tail_loss) };
                Checkpoint::from_model(model, meta).save(&out.join(format!("checkpoint-epoch-{:04}.json", row.epoch)))?;
            }
        }
        Ok(())
    });
    let outcome = match result {
        Ok(o) => o,
        Err(Error::TrainingFailure { epoch, detail, last_good }) => {
            let path = out.join("checkpoint-last-good.json");
            last_good.save(&path)?;
            log::error!("training failed at epoch {epoch}; last good parameters in {}", path.display());
            return Err(Error::TrainingFailure { epoch, detail, last_good });
        }
        Err(e) => return Err(e),
    };
    let last = *outcome.history.last().expect("history has row 0");
    let meta = CheckpointMetadata { seed: cfg.seed, epoch: last.epoch, loss: Some(last.hard_tail_loss) };
    let checkpoint = out.join(CHECKPOINT_FILE);
    Checkpoint::from_model(&outcome.model, meta).save(&checkpoint)?;
    let history = out.join(HISTORY_FILE);
    write_history_csv(&history, &outcome.history)?;
    Ok(TrainArtifacts { checkpoint, history, rows: outcome.history })
}

/// Transforms for the requested methods: the Fourier transform for FSL and
/// the checkpointed model for AIQT.
pub fn load_models(
    n: usize,
    methods: &[Method],
    checkpoint: Option<&Path>,
) -> Result<Vec<(Method, TransformModel<f64>)>> {
    let mut seen = Vec::new();
    let mut models = Vec::new();
    for &m in methods {
        if seen.contains(&m) {
            continue;
        }
        seen.push(m);
        let model = match m {
            Method::Fsl => TransformModel::fourier(n)?,
            Method::Aiqt => {
                let path = checkpoint.ok_or_else(|| invalid("method aiqt needs a checkpoint"))?;
                let model: TransformModel<f64> = Checkpoint::load(path)?.to_model()?;
                if model.n() != n {
                    return Err(invalid(format!(
                        "checkpoint {} has N = {} but the dataset has N = {}",
                        path.display(),
                        model.dim(),
                        1usize << n
                    )));
                }
                model
            }
        };
        models.push((m, model));
    }
    if models.is_empty() {
        return Err(invalid("no method selected"));
    }
    Ok(models)
}

fn splits_for(cfg: &ExperimentConfig, m: Method) -> &'static [Split] {
    match m {
        Method::Fsl if cfg.fsl_validation_only => &[Split::Validation],
        _ => &[Split::Train, Split::Validation],
    }
}

/// Evaluates every (method, k, split) combination on an already loaded
/// dataset. Empty splits are skipped.
pub fn evaluate_models(
    cfg: &ExperimentConfig,
    set: &SampleSet,
    models: &[(Method, TransformModel<f64>)],
    ks: &[usize],
) -> Result<Vec<EvalRow>> {
    let mut rows = Vec::new();
    for (method, model) in models {
        let rule = cfg.rules.rule(*method);
        for &k in ks {
            validate_budget(rule, k, model.dim())?;
        }
        let enc = Encoder::new(model);
        for &k in ks {
            for &split in splits_for(cfg, *method) {
                let samples = set.split(split);
                if samples.is_empty() {
                    continue;
                }
                let m = enc.evaluate_dataset(&samples, rule, k)?;
                let report = EvaluationReport::new(k, rule, model.depth(), &split.to_string(), &m);
                rows.push(EvalRow { method: *method, report });
            }
        }
    }
    Ok(rows)
}

/// Evaluation table for the configured budgets, written as `eval.json`
/// and `eval.txt`. FSL needs no checkpoint and never updates parameters.
pub fn run_eval(cfg: &ExperimentConfig, methods: &[Method], checkpoint: Option<&Path>, out: &Path) -> Result<Vec<EvalRow>> {
    let n = cfg.validate()?;
    let models = load_models(n, methods, checkpoint)?;
    let set = cfg.load_dataset()?;
    let rows = evaluate_models(cfg, &set, &models, &cfg.k_values())?;
    create_dir(out)?;
    write_json(&out.join(EVAL_JSON_FILE), &rows)?;
    write_atomic(&out.join(EVAL_TEXT_FILE), render_table(&rows).as_bytes())?;
    Ok(rows)
}

pub fn read_eval_rows(path: &Path) -> Result<Vec<EvalRow>> {
    Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
}

/// Power-law fit of one method over a budget sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodFit {
    pub method: Method,
    pub split: String,
    #[serde(flatten)]
    pub fit: PowerLawFit,
    /// Nominal budgets on the fit axis.
    pub k: Vec<usize>,
    /// Coefficients actually kept at each budget.
    pub kept: Vec<usize>,
    pub crmse: Vec<f64>,
}

/// Fits `cRMSE = a k^b` per method over the rows of `split`.
pub fn fit_methods(rows: &[EvalRow], split: &str) -> Result<Vec<MethodFit>> {
    let mut by_method: BTreeMap<Method, Vec<&EvalRow>> = BTreeMap::new();
    for r in rows.iter().filter(|r| r.report.split == split) {
        by_method.entry(r.method).or_default().push(r);
    }
    if by_method.is_empty() {
        return Err(Error::FitRefused(format!("no rows for split {split:?}")));
    }
    by_method
        .into_iter()
        .map(|(method, mut rs)| {
            rs.sort_by_key(|r| r.report.k);
            let pts: Vec<(f64, f64)> = rs.iter().map(|r| (r.report.k as f64, r.report.mean_crmse)).collect();
            let fit = fit_power_law(&pts).map_err(|e| match e {
                Error::FitRefused(m) => Error::FitRefused(format!("{method}: {m}")),
                other => other,
            })?;
            Ok(MethodFit {
                method,
                split: split.to_string(),
                fit,
                k: rs.iter().map(|r| r.report.k).collect(),
                kept: rs.iter().map(|r| r.report.kept).collect(),
                crmse: rs.iter().map(|r| r.report.mean_crmse).collect(),
            })
        })
        .collect()
}

/// [`fit_methods`] plus `powerlaw.json` and `powerlaw-<method>.csv`.
pub fn run_powerlaw(rows: &[EvalRow], split: &str, out: &Path) -> Result<Vec<MethodFit>> {
    let fits = fit_methods(rows, split)?;
    create_dir(out)?;
    for f in &fits {
        let pts: Vec<(f64, f64)> = f.k.iter().zip(&f.crmse).map(|(&k, &e)| (k as f64, e)).collect();
        write_fit_csv(&out.join(format!("powerlaw-{}.csv", f.method)), &pts, &f.fit)?;
    }
    write_json(&out.join(POWERLAW_FILE), &fits)?;
    Ok(fits)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QasmExport {
    pub counts: GateCounts,
    /// Largest entry of the difference between the rebuilt and the
    /// reference unitary.
    pub max_error: f64,
}

/// Emits the circuit of a checkpoint, rebuilds its unitary from the text
/// and writes the file only if the two agree within [`QASM_TOLERANCE`].
pub fn export_qasm(checkpoint: &Path, out: &Path) -> Result<QasmExport> {
    let model: TransformModel<f64> = Checkpoint::load(checkpoint)?.to_model()?;
    let text = to_qasm(&model);
    let max_error = verify_qasm(&text, &model, QASM_TOLERANCE)?;
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        create_dir(dir)?;
    }
    write_atomic(out, text.as_bytes())?;
    Ok(QasmExport { counts: Circuit::from_model(&model).counts(), max_error })
}

/// Metrics of one method on one sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleResult {
    pub method: Method,
    pub kept: usize,
    pub crmse: f64,
    pub fidelity: f64,
    pub imag_norm: f64,
    pub real_norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconstructSummary {
    pub split: Split,
    pub index: usize,
    pub record: usize,
    pub k: usize,
    pub results: Vec<SampleResult>,
    pub files: Vec<PathBuf>,
}

/// Which sample to reconstruct: position `index` within `split`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SampleSelector {
    pub split: Split,
    pub index: usize,
}

/// Reconstructs one sample with every method and writes
/// `reconstruct-<split>-<index>-k<k>.csv` plus a JSON summary. Image
/// samples also get PGM files (PPM for per-channel color samples) of the
/// original and each reconstruction.
pub fn run_reconstruct(
    cfg: &ExperimentConfig,
    methods: &[Method],
    checkpoint: Option<&Path>,
    sel: SampleSelector,
    k: usize,
    out: &Path,
) -> Result<ReconstructSummary> {
    let n = cfg.validate()?;
    let models = load_models(n, methods, checkpoint)?;
    for (m, model) in &models {
        validate_budget(cfg.rules.rule(*m), k, model.dim())?;
    }
    let set = cfg.load_dataset()?;
    let idx = set.split_indices(sel.split);
    let &pos = idx.get(sel.index).ok_or_else(|| {
        invalid(format!("sample index {} out of range: split {} has {} samples", sel.index, sel.split, idx.len()))
    })?;
    let tag = set.tags()[pos];
    let x = &set.samples()[pos];
    let stem = format!("reconstruct-{}-{}-k{}", sel.split, sel.index, k);
    create_dir(out)?;

    let mut results = Vec::new();
    let mut recs = Vec::new();
    let mut psi = Vec::new();
    for (m, model) in &models {
        let e = Encoder::new(model).encode(x, cfg.rules.rule(*m), k)?;
        let r = e.report();
        results.push(SampleResult {
            method: *m,
            kept: e.mask.len(),
            crmse: r.crmse,
            fidelity: r.fidelity,
            imag_norm: r.imag_norm,
            real_norm: r.real_norm,
        });
        psi = e.psi;
        recs.push((*m, e.reconstruction));
    }
    let original: Vec<f64> = psi.iter().map(|z| z.re).collect();
    let names: Vec<String> = recs.iter().map(|(m, _)| m.to_string()).collect();
    let columns: Vec<Column<'_>> =
        recs.iter().zip(&names).map(|((_, v), name)| Column { name, values: v }).collect();
    let mut files = vec![out.join(format!("{stem}.csv"))];
    write_reconstruction_csv(&files[0], &original, &columns)?;

    if cfg.dataset.is_image() {
        files.extend(write_images(cfg, &set, &models, pos, k, out, &stem)?);
    }
    let summary = ReconstructSummary { split: sel.split, index: sel.index, record: tag.record, k, results, files };
    write_json(&out.join(format!("{stem}.json")), &summary)?;
    Ok(summary)
}

fn write_images(
    cfg: &ExperimentConfig,
    set: &SampleSet,
    models: &[(Method, TransformModel<f64>)],
    pos: usize,
    k: usize,
    out: &Path,
    stem: &str,
) -> Result<Vec<PathBuf>> {
    let tag = set.tags()[pos];
    let dim = set.dim();
    // planes[0] is the original, planes[1 + i] the reconstruction of model i
    let plane_count = 1 + models.len();
    let render = |x: &[f64]| -> Result<Vec<Vec<f64>>> {
        let scale = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let mut planes = vec![x.to_vec()];
        for (m, model) in models {
            let e = Encoder::new(model).encode(x, cfg.rules.rule(*m), k)?;
            planes.push(denormalize(&e.reconstruction, scale));
        }
        Ok(planes)
    };
    let mut files = Vec::new();
    let label = |i: usize| if i == 0 { "original".to_string() } else { models[i - 1].0.to_string() };
    if tag.channel.is_none() {
        for (i, plane) in render(&set.samples()[pos])?.iter().enumerate() {
            let path = out.join(format!("{stem}-{}.pgm", label(i)));
            write_pgm(&path, plane)?;
            files.push(path);
        }
        return Ok(files);
    }
    // color planes of the same image; rejected all-zero planes stay black
    let mut rgb = vec![vec![vec![0.0; dim]; 3]; plane_count];
    for (j, t) in set.tags().iter().enumerate() {
        if t.record == tag.record && t.split == tag.split {
            if let Some(c) = t.channel {
                for (i, plane) in render(&set.samples()[j])?.into_iter().enumerate() {
                    rgb[i][c as usize] = plane;
                }
            }
        }
    }
    for (i, planes) in rgb.iter().enumerate() {
        let path = out.join(format!("{stem}-{}.ppm", label(i)));
        write_ppm(&path, [&planes[0], &planes[1], &planes[2]])?;
        files.push(path);
    }
    Ok(files)
}

/// Writes `rank-profile-<method>-<split>.csv` for each method.
pub fn run_rank_profile(
    cfg: &ExperimentConfig,
    methods: &[Method],
    checkpoint: Option<&Path>,
    split: Split,
    out: &Path,
) -> Result<Vec<PathBuf>> {
    let n = cfg.validate()?;
    let models = load_models(n, methods, checkpoint)?;
    let set = cfg.load_dataset()?;
    let samples = set.split(split);
    if samples.is_empty() {
        return Err(invalid(format!("split {split} is empty")));
    }
    create_dir(out)?;
    let mut files = Vec::new();
    for (m, model) in &models {
        let profile = Encoder::new(model).rank_profile(&samples)?;
        let path = out.join(format!("rank-profile-{m}-{split}.csv"));
        write_rank_profile_csv(&path, &profile)?;
        files.push(path);
    }
    Ok(files)
}
