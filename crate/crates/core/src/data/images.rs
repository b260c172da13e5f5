use std::fs::File;
use std::io::{BufReader, Read};
use std::path::Path;

use flate2::read::GzDecoder;
use serde::{Deserialize, Serialize};

use super::{random_split, Provenance, SampleSet, SampleTag};
use crate::error::{invalid, Error, Result};

/// Images are brought to `IMAGE_SIDE x IMAGE_SIDE`, i.e. N = 1024.
pub const IMAGE_SIDE: usize = 32;
const IMAGE_QUBITS: usize = 10;

const IDX_IMAGES_MAGIC: u32 = 0x0000_0803;
const CIFAR_RECORD: usize = 1 + 3 * 1024;

/// How MNIST's 28x28 digits become 32x32.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Resize {
    /// Centered in a zero border; pixel values unchanged.
    #[default]
    ZeroPad,
    /// Bilinear interpolation with pixel-center alignment.
    Bilinear,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CifarMode {
    /// Luma `0.299 R + 0.587 G + 0.114 B`.
    Bw,
    /// Each color channel as its own sample.
    Rgb,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImageOptions {
    #[serde(default)]
    pub resize: Resize,
    /// Seed of the 80/20 image split.
    #[serde(default)]
    pub split_seed: u64,
    /// Read at most this many images.
    #[serde(default)]
    pub limit: Option<usize>,
}

impl Default for ImageOptions {
    fn default() -> Self {
        Self { resize: Resize::ZeroPad, split_seed: 0, limit: None }
    }
}

/// Opens a file, transparently gunzipping it when it starts with the gzip
/// magic bytes.
fn read_all(path: &Path) -> Result<Vec<u8>> {
    let mut raw = Vec::new();
    BufReader::new(File::open(path)?).read_to_end(&mut raw)?;
    if raw.starts_with(&[0x1f, 0x8b]) {
        let mut out = Vec::new();
        GzDecoder::new(raw.as_slice()).read_to_end(&mut out)?;
        Ok(out)
    } else {
        Ok(raw)
    }
}

/// Parses an IDX image file. Returns `(rows, cols, images)` with pixels
/// scaled to `[0, 1]`.
pub fn read_idx_images(path: &Path, limit: Option<usize>) -> Result<(usize, usize, Vec<Vec<f64>>)> {
    let bytes = read_all(path)?;
    let be = |o: usize| -> Result<u32> {
        bytes
            .get(o..o + 4)
            .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
            .ok_or_else(|| Error::Format(format!("{}: truncated IDX header", path.display())))
    };
    let magic = be(0)?;
    if magic != IDX_IMAGES_MAGIC {
        return Err(Error::Format(format!(
            "{}: IDX magic {magic:#010x}, expected {IDX_IMAGES_MAGIC:#010x}",
            path.display()
        )));
    }
    let (count, rows, cols) = (be(4)? as usize, be(8)? as usize, be(12)? as usize);
    let size = rows * cols;
    let body = &bytes[16..];
    if body.len() < count * size {
        return Err(Error::Format(format!(
            "{}: truncated IDX payload, {} of {} bytes",
            path.display(),
            body.len(),
            count * size
        )));
    }
    let take = limit.map_or(count, |l| l.min(count));
    let images = body
        .chunks_exact(size)
        .take(take)
        .map(|img| img.iter().map(|&p| p as f64 / 255.0).collect())
        .collect();
    Ok((rows, cols, images))
}

fn zero_pad(img: &[f64], rows: usize, cols: usize) -> Result<Vec<f64>> {
    if rows > IMAGE_SIDE || cols > IMAGE_SIDE {
        return Err(invalid(format!("{rows}x{cols} image does not fit a {IMAGE_SIDE}x{IMAGE_SIDE} zero pad")));
    }
    let (top, left) = ((IMAGE_SIDE - rows) / 2, (IMAGE_SIDE - cols) / 2);
    let mut out = vec![0.0; IMAGE_SIDE * IMAGE_SIDE];
    for r in 0..rows {
        out[(top + r) * IMAGE_SIDE + left..][..cols].copy_from_slice(&img[r * cols..][..cols]);
    }
    Ok(out)
}

/// Bilinear resampling with pixel centers at half-integer coordinates and
/// edge clamping.
fn bilinear(img: &[f64], rows: usize, cols: usize) -> Vec<f64> {
    let coord = |dst: usize, src_len: usize| {
        let s = (dst as f64 + 0.5) * src_len as f64 / IMAGE_SIDE as f64 - 0.5;
        let s = s.clamp(0.0, (src_len - 1) as f64);
        let i0 = s.floor() as usize;
        let i1 = (i0 + 1).min(src_len - 1);
        (i0, i1, s - i0 as f64)
    };
    let mut out = vec![0.0; IMAGE_SIDE * IMAGE_SIDE];
    for r in 0..IMAGE_SIDE {
        let (r0, r1, fr) = coord(r, rows);
        for c in 0..IMAGE_SIDE {
            let (c0, c1, fc) = coord(c, cols);
            let top = img[r0 * cols + c0] * (1.0 - fc) + img[r0 * cols + c1] * fc;
            let bot = img[r1 * cols + c0] * (1.0 - fc) + img[r1 * cols + c1] * fc;
            out[r * IMAGE_SIDE + c] = top * (1.0 - fr) + bot * fr;
        }
    }
    out
}

/// MNIST images as length-1024 samples with a seeded 80/20 split.
/// All-black images are dropped and counted in the provenance.
pub fn load_mnist(path: &Path, opts: &ImageOptions) -> Result<SampleSet> {
    let (rows, cols, images) = read_idx_images(path, opts.limit)?;
    let splits = random_split(images.len(), opts.split_seed);
    let mut set = SampleSet::new(
        IMAGE_QUBITS,
        Provenance {
            source: path.display().to_string(),
            kind: format!(
                "mnist/{}",
                match opts.resize {
                    Resize::ZeroPad => "zero-pad",
                    Resize::Bilinear => "bilinear",
                }
            ),
            seed: Some(opts.split_seed),
            ..Default::default()
        },
    );
    for (record, (img, split)) in images.iter().zip(splits).enumerate() {
        let x = match opts.resize {
            Resize::ZeroPad => zero_pad(img, rows, cols)?,
            Resize::Bilinear => bilinear(img, rows, cols),
        };
        set.push_or_reject(x, SampleTag { split, record, channel: None })?;
    }
    Ok(set)
}

/// A CIFAR-10 binary batch (3073-byte records: label, then 1024 bytes per
/// R, G and B plane in row-major order). The label is ignored. In RGB mode
/// the three channels of an image share its split.
pub fn load_cifar(path: &Path, mode: CifarMode, opts: &ImageOptions) -> Result<SampleSet> {
    let bytes = read_all(path)?;
    if bytes.is_empty() || bytes.len() % CIFAR_RECORD != 0 {
        return Err(Error::Format(format!(
            "{}: {} bytes is not a whole number of {CIFAR_RECORD}-byte records",
            path.display(),
            bytes.len()
        )));
    }
    let count = opts.limit.map_or(bytes.len() / CIFAR_RECORD, |l| l.min(bytes.len() / CIFAR_RECORD));
    let splits = random_split(count, opts.split_seed);
    let mut set = SampleSet::new(
        IMAGE_QUBITS,
        Provenance {
            source: path.display().to_string(),
            kind: "cifar10".into(),
            channel: Some(match mode {
                CifarMode::Bw => "luma".into(),
                CifarMode::Rgb => "r,g,b".into(),
            }),
            seed: Some(opts.split_seed),
            ..Default::default()
        },
    );
    for (record, (rec, split)) in bytes.chunks_exact(CIFAR_RECORD).take(count).zip(splits).enumerate() {
        let plane = |c: usize| rec[1 + c * 1024..1 + (c + 1) * 1024].iter().map(|&p| p as f64 / 255.0);
        match mode {
            CifarMode::Bw => {
                let x = plane(0)
                    .zip(plane(1))
                    .zip(plane(2))
                    .map(|((r, g), b)| 0.299 * r + 0.587 * g + 0.114 * b)
                    .collect();
                set.push_or_reject(x, SampleTag { split, record, channel: None })?;
            }
            CifarMode::Rgb => {
                for c in 0..3 {
                    set.push_or_reject(plane(c).collect(), SampleTag { split, record, channel: Some(c as u8) })?;
                }
            }
        }
    }
    Ok(set)
}
