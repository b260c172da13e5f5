//! Dataset construction: windowed time series, MNIST and CIFAR-10 images,
//! synthetic corpora and a binary cache format.

mod cache;
mod images;
mod series;
mod synthetic;

pub use cache::{read_cache, read_cache_header, write_cache, CACHE_MAGIC, CACHE_VERSION};
pub use synthetic::MAX_SYNTHETIC_QUBITS;
pub use images::{load_cifar, load_mnist, read_idx_images, CifarMode, ImageOptions, Resize, IMAGE_SIDE};
pub use series::{load_csv_series, timeseries_set, window_timeseries, Series, Windows};
pub use synthetic::{synthetic_corpus, SyntheticKind};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::scalar::log2_exact;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Validation,
}

impl std::str::FromStr for Split {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(Split::Train),
            "validation" | "val" => Ok(Split::Validation),
            other => Err(invalid(format!("unknown split {other:?}"))),
        }
    }
}

impl std::fmt::Display for Split {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Split::Train => "train",
            Split::Validation => "validation",
        })
    }
}

/// Where a sample set came from and what was filtered out on the way.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub source: String,
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stride: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub channel: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Candidates dropped because their norm was zero.
    #[serde(default)]
    pub rejected_zero_norm: usize,
    /// Free-form warnings, e.g. skipped short series.
    #[serde(default)]
    pub notes: Vec<String>,
}

/// Split and origin of one sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleTag {
    pub split: Split,
    /// Index of the source record: image number, window number or
    /// generated sample number.
    pub record: usize,
    /// Color plane (0 = R, 1 = G, 2 = B) for per-channel image samples.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub channel: Option<u8>,
}

/// Real samples of a common power-of-two length with split tags.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    n: usize,
    samples: Vec<Vec<f64>>,
    tags: Vec<SampleTag>,
    pub provenance: Provenance,
}

impl SampleSet {
    pub fn new(n: usize, provenance: Provenance) -> Self {
        Self { n, samples: Vec::new(), tags: Vec::new(), provenance }
    }

    /// Adds a sample whose record index is its position in the set.
    pub fn push(&mut self, sample: Vec<f64>, split: Split) -> Result<()> {
        let record = self.samples.len();
        self.push_tagged(sample, SampleTag { split, record, channel: None })
    }

    /// Adds a sample after checking length and finiteness. Zero-norm
    /// samples are rejected with [`Error::DegenerateInput`].
    pub fn push_tagged(&mut self, sample: Vec<f64>, tag: SampleTag) -> Result<()> {
        if sample.len() != 1 << self.n {
            return Err(invalid(format!("sample length {} but set has N = 2^{}", sample.len(), self.n)));
        }
        if sample.iter().any(|v| !v.is_finite()) {
            return Err(invalid("sample has non-finite entries"));
        }
        if sample.iter().all(|v| *v == 0.0) {
            return Err(Error::DegenerateInput("sample has zero norm".into()));
        }
        self.samples.push(sample);
        self.tags.push(tag);
        Ok(())
    }

    /// [`Self::push_tagged`] that counts zero-norm samples instead of failing.
    pub(crate) fn push_or_reject(&mut self, sample: Vec<f64>, tag: SampleTag) -> Result<bool> {
        match self.push_tagged(sample, tag) {
            Ok(()) => Ok(true),
            Err(Error::DegenerateInput(_)) => {
                self.provenance.rejected_zero_norm += 1;
                Ok(false)
            }
            Err(e) => Err(e),
        }
    }

    pub fn from_parts(n: usize, samples: Vec<Vec<f64>>, tags: Vec<SampleTag>, provenance: Provenance) -> Result<Self> {
        if samples.len() != tags.len() {
            return Err(invalid("one tag per sample required"));
        }
        let mut set = Self::new(n, provenance);
        for (s, t) in samples.into_iter().zip(tags) {
            set.push_tagged(s, t)?;
        }
        Ok(set)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[Vec<f64>] {
        &self.samples
    }

    pub fn tags(&self) -> &[SampleTag] {
        &self.tags
    }

    /// Samples tagged with `split`, in set order.
    pub fn split(&self, split: Split) -> Vec<&[f64]> {
        self.split_indices(split).into_iter().map(|i| self.samples[i].as_slice()).collect()
    }

    /// Positions in the set of the samples tagged with `split`.
    pub fn split_indices(&self, split: Split) -> Vec<usize> {
        (0..self.samples.len()).filter(|&i| self.tags[i].split == split).collect()
    }

    pub fn count(&self, split: Split) -> usize {
        self.tags.iter().filter(|t| t.split == split).count()
    }

    /// Keeps the first `limit` samples of each split.
    pub fn truncate_per_split(&mut self, limit: usize) {
        let mut seen = [0usize; 2];
        let mut keep = Vec::with_capacity(self.samples.len());
        for t in &self.tags {
            let slot = &mut seen[(t.split == Split::Validation) as usize];
            keep.push(*slot < limit);
            *slot += 1;
        }
        let mut it = keep.iter();
        self.samples.retain(|_| *it.next().unwrap_or(&false));
        let mut it = keep.iter();
        self.tags.retain(|_| *it.next().unwrap_or(&false));
    }
}

pub(crate) fn qubits_for(len: usize) -> Result<usize> {
    log2_exact(len).ok_or_else(|| invalid(format!("window length {len} is not a power of two")))
}

/// Train/validation assignment for `count` items: a seeded shuffle whose
/// first `floor(0.8 count)` entries go to training.
pub fn random_split(count: usize, seed: u64) -> Vec<Split> {
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    let mut idx: Vec<usize> = (0..count).collect();
    idx.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
    let cut = count * 4 / 5;
    let mut out = vec![Split::Validation; count];
    for &i in &idx[..cut] {
        out[i] = Split::Train;
    }
    out
}
