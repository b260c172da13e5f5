use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{Provenance, SampleSet, SampleTag};
use crate::error::{Error, Result};

pub const CACHE_MAGIC: [u8; 8] = *b"AIQTSMPL";
pub const CACHE_VERSION: u32 = 1;
const HEADER_LEN: usize = 8 + 4 + 8 + 8;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Sidecar {
    n: usize,
    count: usize,
    tags: Vec<SampleTag>,
    provenance: Provenance,
}

fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

/// Writes the binary container (magic, version `u32`, N `u64`, count
/// `u64`, then little-endian `f64` samples back to back) and a JSON
/// sidecar with sample tags and provenance at `<path>.json`.
pub fn write_cache(path: &Path, set: &SampleSet) -> Result<()> {
    let dim = set.dim();
    let mut buf = Vec::with_capacity(HEADER_LEN + 8 * dim * set.len());
    buf.extend_from_slice(&CACHE_MAGIC);
    buf.extend_from_slice(&CACHE_VERSION.to_le_bytes());
    buf.extend_from_slice(&(dim as u64).to_le_bytes());
    buf.extend_from_slice(&(set.len() as u64).to_le_bytes());
    for s in set.samples() {
        for v in s {
            buf.extend_from_slice(&v.to_le_bytes());
        }
    }
    let side = Sidecar { n: set.n(), count: set.len(), tags: set.tags().to_vec(), provenance: set.provenance.clone() };
    crate::io::write_atomic(path, &buf)?;
    crate::io::write_atomic(&sidecar_path(path), serde_json::to_string_pretty(&side)?.as_bytes())
}

/// Sample length and count from the container header, without reading
/// the payload.
pub fn read_cache_header(path: &Path) -> Result<(usize, usize)> {
    use std::io::Read;
    let mut head = [0u8; HEADER_LEN];
    std::fs::File::open(path)?
        .read_exact(&mut head)
        .map_err(|_| Error::Format(format!("{}: not a sample cache", path.display())))?;
    if head[..8] != CACHE_MAGIC {
        return Err(Error::Format(format!("{}: not a sample cache", path.display())));
    }
    let dim = u64::from_le_bytes(head[12..20].try_into().expect("8 bytes")) as usize;
    let count = u64::from_le_bytes(head[20..28].try_into().expect("8 bytes")) as usize;
    Ok((dim, count))
}

pub fn read_cache(path: &Path) -> Result<SampleSet> {
    let bytes = std::fs::read(path)?;
    let bad = |m: &str| Error::Format(format!("{}: {m}", path.display()));
    if bytes.len() < HEADER_LEN || bytes[..8] != CACHE_MAGIC {
        return Err(bad("not a sample cache"));
    }
    let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().expect("4 bytes"));
    let u64_at = |o: usize| u64::from_le_bytes(bytes[o..o + 8].try_into().expect("8 bytes"));
    let version = u32_at(8);
    if version != CACHE_VERSION {
        return Err(bad(&format!("unsupported cache version {version}")));
    }
    let (dim, count) = (u64_at(12) as usize, u64_at(20) as usize);
    let payload = &bytes[HEADER_LEN..];
    if dim == 0 || payload.len() != dim.saturating_mul(count).saturating_mul(8) {
        return Err(bad("payload size does not match header"));
    }
    let side: Sidecar = serde_json::from_str(&std::fs::read_to_string(sidecar_path(path))?)?;
    if side.count != count || 1usize.checked_shl(side.n as u32) != Some(dim) || side.tags.len() != count {
        return Err(bad("sidecar disagrees with container header"));
    }
    let samples = payload
        .chunks_exact(8 * dim)
        .map(|s| s.chunks_exact(8).map(|b| f64::from_le_bytes(b.try_into().expect("8 bytes"))).collect())
        .collect();
    SampleSet::from_parts(side.n, samples, side.tags, side.provenance)
}
