use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::data::{
    load_cifar, load_csv_series, load_mnist, read_cache, read_cache_header, synthetic_corpus, timeseries_set,
    CifarMode, ImageOptions, Resize, SampleSet, SyntheticKind, IMAGE_SIDE, MAX_SYNTHETIC_QUBITS,
};
use crate::encoding::{validate_budget, SelectionRule};
use crate::error::{invalid, Result};
use crate::scalar::log2_exact;
use crate::training::{AdamConfig, LossConfig, TrainConfig};

/// Which transform an evaluation uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Trained model loaded from a checkpoint.
    Aiqt,
    /// Fixed Fourier transform.
    Fsl,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::Aiqt => "aiqt",
            Method::Fsl => "fsl",
        })
    }
}

impl std::str::FromStr for Method {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "aiqt" => Ok(Method::Aiqt),
            "fsl" => Ok(Method::Fsl),
            other => Err(invalid(format!("unknown method {other:?}"))),
        }
    }
}

/// Where samples come from. Relative paths are resolved against the
/// directory of the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DatasetSpec {
    Synthetic {
        kind: SyntheticKind,
        n: usize,
        count: usize,
        #[serde(default)]
        seed: u64,
    },
    /// Long-format price CSV cut into windows.
    Csv {
        path: PathBuf,
        #[serde(default = "default_column")]
        column: String,
        window: usize,
        stride: usize,
    },
    /// IDX image file, optionally gzipped.
    Mnist {
        path: PathBuf,
        #[serde(default)]
        resize: Resize,
        #[serde(default)]
        split_seed: u64,
        #[serde(default)]
        limit: Option<usize>,
    },
    /// CIFAR-10 binary batch.
    Cifar {
        path: PathBuf,
        mode: CifarMode,
        #[serde(default)]
        split_seed: u64,
        #[serde(default)]
        limit: Option<usize>,
    },
    /// Sample cache written by an earlier run.
    Cache { path: PathBuf },
}

fn default_column() -> String {
    "close".into()
}

impl DatasetSpec {
    pub fn path(&self) -> Option<&Path> {
        match self {
            DatasetSpec::Synthetic { .. } => None,
            DatasetSpec::Csv { path, .. }
            | DatasetSpec::Mnist { path, .. }
            | DatasetSpec::Cifar { path, .. }
            | DatasetSpec::Cache { path } => Some(path),
        }
    }

    fn path_mut(&mut self) -> Option<&mut PathBuf> {
        match self {
            DatasetSpec::Synthetic { .. } => None,
            DatasetSpec::Csv { path, .. }
            | DatasetSpec::Mnist { path, .. }
            | DatasetSpec::Cifar { path, .. }
            | DatasetSpec::Cache { path } => Some(path),
        }
    }

    pub fn is_image(&self) -> bool {
        matches!(self, DatasetSpec::Mnist { .. } | DatasetSpec::Cifar { .. })
    }

    /// Qubit count of the samples, determined without loading them.
    pub fn qubits(&self) -> Result<usize> {
        match self {
            DatasetSpec::Synthetic { n, .. } => {
                if *n < 1 || *n > MAX_SYNTHETIC_QUBITS {
                    return Err(invalid(format!("synthetic n must be in 1..={MAX_SYNTHETIC_QUBITS}, got {n}")));
                }
                Ok(*n)
            }
            DatasetSpec::Csv { window, .. } => log2_exact(*window)
                .filter(|&n| n >= 1)
                .ok_or_else(|| invalid(format!("window {window} is not a power of two >= 2"))),
            DatasetSpec::Mnist { .. } | DatasetSpec::Cifar { .. } => {
                Ok(log2_exact(IMAGE_SIDE * IMAGE_SIDE).expect("image size is a power of two"))
            }
            DatasetSpec::Cache { path } => {
                let (dim, _) = read_cache_header(path)?;
                log2_exact(dim).ok_or_else(|| invalid(format!("{}: sample length {dim}", path.display())))
            }
        }
    }

    pub fn load(&self) -> Result<SampleSet> {
        match self {
            DatasetSpec::Synthetic { kind, n, count, seed } => synthetic_corpus(*kind, *n, *count, *seed),
            DatasetSpec::Csv { path, column, window, stride } => {
                let series = load_csv_series(path, column)?;
                timeseries_set(&series, *window, *stride, &path.display().to_string())
            }
            DatasetSpec::Mnist { path, resize, split_seed, limit } => {
                load_mnist(path, &ImageOptions { resize: *resize, split_seed: *split_seed, limit: *limit })
            }
            DatasetSpec::Cifar { path, mode, split_seed, limit } => load_cifar(
                path,
                *mode,
                &ImageOptions { resize: Resize::ZeroPad, split_seed: *split_seed, limit: *limit },
            ),
            DatasetSpec::Cache { path } => read_cache(path),
        }
    }
}

/// A single budget or a sweep; `"k": 64` and `"k": [16, 32]` both parse.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum KSpec {
    One(usize),
    Many(Vec<usize>),
}

impl KSpec {
    pub fn values(&self) -> Vec<usize> {
        match self {
            KSpec::One(k) => vec![*k],
            KSpec::Many(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LossParams {
    #[serde(default = "default_tau")]
    pub tau: f64,
    #[serde(default = "default_lambda")]
    pub lambda: f64,
}

impl Default for LossParams {
    fn default() -> Self {
        let l = LossConfig::new(1);
        Self { tau: l.tau, lambda: l.lambda }
    }
}

fn default_tau() -> f64 {
    LossParams::default().tau
}

fn default_lambda() -> f64 {
    LossParams::default().lambda
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptimizerParams {
    pub epochs: usize,
    pub batch_size: usize,
    pub lr_max: f64,
    pub lr_min: f64,
    pub adam: AdamConfig,
}

impl Default for OptimizerParams {
    fn default() -> Self {
        let t = TrainConfig::new(LossConfig::new(1));
        Self { epochs: t.epochs, batch_size: t.batch_size, lr_max: t.lr_max, lr_min: t.lr_min, adam: t.adam }
    }
}

/// Selection rule used by each method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MethodRules {
    pub aiqt: SelectionRule,
    pub fsl: SelectionRule,
}

impl Default for MethodRules {
    fn default() -> Self {
        Self { aiqt: SelectionRule::PlainTopk, fsl: SelectionRule::ConjugateSymmetric }
    }
}

impl MethodRules {
    pub fn rule(&self, m: Method) -> SelectionRule {
        match m {
            Method::Aiqt => self.aiqt,
            Method::Fsl => self.fsl,
        }
    }
}

/// One experiment, read from JSON. Unknown keys are rejected.
///
/// ```json
/// {
///   "dataset": { "source": "synthetic", "kind": "piecewise", "n": 8, "count": 2000, "seed": 1 },
///   "k": [16, 32, 64, 128],
///   "train_k": 64,
///   "depth": 1,
///   "loss": { "tau": 0.01, "lambda": 0.0001 },
///   "optimizer": { "epochs": 50, "batch_size": 128, "lr_max": 0.05, "lr_min": 1e-5 },
///   "seed": 1,
///   "out_dir": "runs/piecewise",
///   "rules": { "aiqt": "plain-topk", "fsl": "conjugate-symmetric" },
///   "checkpoint_every": 10
/// }
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dataset: DatasetSpec,
    /// Expected qubit count; checked against the dataset when present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    /// Evaluation budgets.
    pub k: KSpec,
    /// Training budget, defaults to the first entry of `k`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub train_k: Option<usize>,
    #[serde(default = "default_depth")]
    pub depth: usize,
    #[serde(default)]
    pub loss: LossParams,
    #[serde(default)]
    pub optimizer: OptimizerParams,
    /// Seeds the near-identity noise of deep models and the minibatch order.
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_out")]
    pub out_dir: PathBuf,
    #[serde(default)]
    pub rules: MethodRules,
    /// Write an intermediate checkpoint every this many epochs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub checkpoint_every: Option<usize>,
    /// Report FSL rows for the validation split only.
    #[serde(default = "yes")]
    pub fsl_validation_only: bool,
    /// Keep at most this many samples of each split.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_samples_per_split: Option<usize>,
}

fn default_depth() -> usize {
    1
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

fn yes() -> bool {
    true
}

impl ExperimentConfig {
    /// Config with defaults for everything but the dataset and budget.
    pub fn new(dataset: DatasetSpec, k: Vec<usize>) -> Self {
        Self {
            dataset,
            n: None,
            k: KSpec::Many(k),
            train_k: None,
            depth: default_depth(),
            loss: LossParams::default(),
            optimizer: OptimizerParams::default(),
            seed: 0,
            out_dir: default_out(),
            rules: MethodRules::default(),
            checkpoint_every: None,
            fsl_validation_only: true,
            max_samples_per_split: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Reads a config file and resolves relative dataset paths against its
    /// directory.
    pub fn load(path: &Path) -> Result<Self> {
        let mut cfg = Self::from_json(&std::fs::read_to_string(path)?)?;
        let base = path.parent().unwrap_or(Path::new(""));
        if let Some(p) = cfg.dataset.path_mut() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn k_values(&self) -> Vec<usize> {
        self.k.values()
    }

    pub fn training_k(&self) -> Result<usize> {
        match self.train_k {
            Some(k) => Ok(k),
            None => self.k_values().first().copied().ok_or_else(|| invalid("k list is empty")),
        }
    }

    pub fn train_config(&self) -> Result<TrainConfig> {
        let o = &self.optimizer;
        Ok(TrainConfig {
            loss: LossConfig { k: self.training_k()?, tau: self.loss.tau, lambda: self.loss.lambda },
            epochs: o.epochs,
            batch_size: o.batch_size,
            lr_max: o.lr_max,
            lr_min: o.lr_min,
            adam: o.adam,
            seed: self.seed,
        })
    }

    /// Checks everything that can be checked without loading samples and
    /// returns the qubit count.
    pub fn validate(&self) -> Result<usize> {
        if let Some(p) = self.dataset.path() {
            if !p.exists() {
                return Err(invalid(format!("dataset path {} does not exist", p.display())));
            }
        }
        let n = self.dataset.qubits()?;
        if let Some(want) = self.n {
            if want != n {
                return Err(invalid(format!("config says n = {want} but the dataset has n = {n}")));
            }
        }
        let dim = 1usize << n;
        let ks = self.k_values();
        if ks.is_empty() {
            return Err(invalid("k list is empty"));
        }
        for &k in &ks {
            validate_budget(self.rules.aiqt, k, dim)?;
            validate_budget(self.rules.fsl, k, dim)?;
        }
        if self.depth < 1 {
            return Err(invalid("depth must be at least 1"));
        }
        if self.checkpoint_every == Some(0) {
            return Err(invalid("checkpoint_every must be at least 1"));
        }
        if self.max_samples_per_split == Some(0) {
            return Err(invalid("max_samples_per_split must be at least 1"));
        }
        self.train_config()?.validate(dim)?;
        Ok(n)
    }

    /// Validates, then loads and truncates the dataset.
    pub fn load_dataset(&self) -> Result<SampleSet> {
        let n = self.validate()?;
        let mut set = self.dataset.load()?;
        if set.n() != n {
            return Err(invalid(format!("dataset has n = {} but n = {n} was expected", set.n())));
        }
        if let Some(limit) = self.max_samples_per_split {
            set.truncate_per_split(limit);
        }
        log::info!("loaded {} samples of length {} from {}", set.len(), set.dim(), set.provenance.source);
        Ok(set)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic() -> &'static str {
        r#"{"dataset": {"source": "synthetic", "kind": "piecewise", "n": 5, "count": 20}, "k": 8}"#
    }

    #[test]
    fn minimal_config_takes_defaults() {
        let c = ExperimentConfig::from_json(synthetic()).unwrap();
        assert_eq!(c.depth, 1);
        assert_eq!(c.k_values(), vec![8]);
        assert_eq!(c.training_k().unwrap(), 8);
        assert_eq!(c.optimizer.epochs, 150);
        assert_eq!(c.rules.fsl, SelectionRule::ConjugateSymmetric);
        assert!(c.fsl_validation_only);
        assert_eq!(c.validate().unwrap(), 5);
    }

    #[test]
    fn typos_are_rejected() {
        let bad = [
            r#"{"dataset": {"source": "synthetic", "kind": "piecewise", "n": 5, "count": 20}, "k": 8, "depht": 2}"#,
            r#"{"dataset": {"source": "synthetic", "kind": "piecewise", "n": 5, "count": 20, "sed": 1}, "k": 8}"#,
            r#"{"dataset": {"source": "synthetic", "kind": "piecewise", "n": 5, "count": 20}, "k": 8, "optimizer": {"lr": 1}}"#,
            r#"{"dataset": {"source": "synthetic", "kind": "piecewise", "n": 5, "count": 20}, "k": 8, "rules": {"fsl": "topk"}}"#,
        ];
        for b in bad {
            assert!(ExperimentConfig::from_json(b).is_err(), "{b}");
        }
    }

    #[test]
    fn budget_checked_against_dimension() {
        let mut c = ExperimentConfig::from_json(synthetic()).unwrap();
        c.k = KSpec::Many(vec![4, 33]);
        assert!(c.validate().is_err());
        c.k = KSpec::Many(vec![31]);
        assert!(c.validate().is_err(), "conjugate-symmetric needs k + 2 <= N");
        c.k = KSpec::Many(vec![30]);
        c.n = Some(6);
        assert!(c.validate().is_err());
    }

    #[test]
    fn missing_path_fails_validation() {
        let text = r#"{"dataset": {"source": "mnist", "path": "/nonexistent/images.idx"}, "k": 52}"#;
        let c = ExperimentConfig::from_json(text).unwrap();
        assert!(c.validate().is_err());
    }

    #[test]
    fn json_round_trip() {
        let mut c = ExperimentConfig::from_json(synthetic()).unwrap();
        c.checkpoint_every = Some(3);
        let back = ExperimentConfig::from_json(&c.to_json().unwrap()).unwrap();
        assert_eq!(back, c);
    }
}
