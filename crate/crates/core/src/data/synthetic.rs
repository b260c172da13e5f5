use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};
use serde::{Deserialize, Serialize};

use super::{Provenance, SampleSet, SampleTag, Split};
use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SyntheticKind {
    /// A DC offset plus one to four integer-frequency cosines. Exactly
    /// sparse in the Fourier basis.
    Bandlimited,
    /// Random-height steps on a grid of 4 samples with lengths 4 to 64,
    /// occasional spikes and weak noise.
    Piecewise,
    /// Random combinations of a few fixed patterns plus weak noise. Each
    /// pattern is a sum of three Walsh functions.
    LowRankMixture,
}

impl std::str::FromStr for SyntheticKind {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bandlimited" => Ok(Self::Bandlimited),
            "piecewise" => Ok(Self::Piecewise),
            "low-rank-mixture" => Ok(Self::LowRankMixture),
            other => Err(invalid(format!("unknown synthetic corpus {other:?}"))),
        }
    }
}

impl std::fmt::Display for SyntheticKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Bandlimited => "bandlimited",
            Self::Piecewise => "piecewise",
            Self::LowRankMixture => "low-rank-mixture",
        })
    }
}

pub const MAX_SYNTHETIC_QUBITS: usize = 12;
const SPIKE_RATE: f64 = 0.3;
const PIECEWISE_NOISE: f64 = 0.003;
const MIXTURE_RANK: usize = 4;
const MIXTURE_NOISE: f64 = 0.01;

/// `count` samples of length `2^n`, deterministic in `seed`. The first
/// `floor(0.8 count)` samples are tagged as training data.
pub fn synthetic_corpus(kind: SyntheticKind, n: usize, count: usize, seed: u64) -> Result<SampleSet> {
    if n < 1 || n > MAX_SYNTHETIC_QUBITS {
        return Err(invalid(format!("synthetic corpora support 1 <= n <= {MAX_SYNTHETIC_QUBITS}, got {n}")));
    }
    if count < 1 {
        return Err(invalid("count must be at least 1"));
    }
    let len = 1usize << n;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut set = SampleSet::new(
        n,
        Provenance { source: "synthetic".into(), kind: kind.to_string(), seed: Some(seed), ..Default::default() },
    );
    let patterns = match kind {
        SyntheticKind::LowRankMixture => mixture_patterns(&mut rng, len),
        _ => Vec::new(),
    };
    let cut = count * 4 / 5;
    let mut made = 0;
    let mut record = 0;
    while made < count {
        let x = match kind {
            SyntheticKind::Bandlimited => bandlimited(&mut rng, len),
            SyntheticKind::Piecewise => piecewise(&mut rng, len),
            SyntheticKind::LowRankMixture => mixture(&mut rng, &patterns),
        };
        let split = if made < cut { Split::Train } else { Split::Validation };
        if set.push_or_reject(x, SampleTag { split, record, channel: None })? {
            made += 1;
        }
        record += 1;
    }
    Ok(set)
}

fn bandlimited(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    let tau = std::f64::consts::TAU;
    let mut x = vec![rng.gen_range(0.1..1.0); len];
    let pairs = (len / 2).saturating_sub(1);
    if pairs == 0 {
        return x;
    }
    let tones = rng.gen_range(1..=pairs.min(4));
    let freqs = rand::seq::index::sample(rng, pairs, tones);
    for f in freqs.iter().map(|f| f + 1) {
        let amp = rng.gen_range(0.2..1.0);
        let phase = rng.gen_range(0.0..tau);
        for (t, v) in x.iter_mut().enumerate() {
            *v += amp * (tau * (f * t) as f64 / len as f64 + phase).cos();
        }
    }
    x
}

fn piecewise(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    let mut x = vec![0.0; len];
    let mut pos = 0;
    while pos < len {
        let seg = (4usize << rng.gen_range(0..5)).min(len - pos);
        let level = rng.gen_range(0.05..1.0);
        x[pos..pos + seg].iter_mut().for_each(|v| *v = level);
        pos += seg;
    }
    let spikes = Poisson::new(SPIKE_RATE).expect("positive rate").sample(rng) as usize;
    let spike = Normal::new(0.0, 0.3).expect("finite scale");
    for _ in 0..spikes {
        let at = rng.gen_range(0..len);
        x[at] += spike.sample(rng);
    }
    let noise = Normal::new(0.0, PIECEWISE_NOISE).expect("finite scale");
    x.iter_mut().for_each(|v| *v += noise.sample(rng));
    x
}

fn walsh(j: usize, t: usize) -> f64 {
    if (j & t).count_ones() % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

fn mixture_patterns(rng: &mut ChaCha8Rng, len: usize) -> Vec<Vec<f64>> {
    let unit = Normal::new(0.0, 1.0).expect("finite scale");
    (0..MIXTURE_RANK)
        .map(|_| {
            let mut p = vec![0.0; len];
            for _ in 0..3 {
                let j = rng.gen_range(0..len);
                let a = unit.sample(rng);
                for (t, v) in p.iter_mut().enumerate() {
                    *v += a * walsh(j, t);
                }
            }
            p
        })
        .collect()
}

fn mixture(rng: &mut ChaCha8Rng, patterns: &[Vec<f64>]) -> Vec<f64> {
    let unit = Normal::new(0.0, 1.0).expect("finite scale");
    let len = patterns[0].len();
    let mut x: Vec<f64> = (0..len).map(|_| MIXTURE_NOISE * unit.sample(rng)).collect();
    for p in patterns {
        let c = unit.sample(rng);
        for (v, b) in x.iter_mut().zip(p) {
            *v += c * b;
        }
    }
    x
}
