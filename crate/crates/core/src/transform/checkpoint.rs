use std::path::Path;

use serde::{Deserialize, Serialize};

use super::params::{ParameterSet, TransformModel};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const CHECKPOINT_FORMAT_VERSION: u32 = 1;

/// JSON form of a [`TransformModel`]. Angles are stored as `f64` using the
/// shortest representation that parses back to the same value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Checkpoint {
    pub format_version: u32,
    pub n: usize,
    pub depth: usize,
    pub blocks: Vec<CheckpointBlock>,
    pub metadata: CheckpointMetadata,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckpointBlock {
    pub mixers: Vec<[f64; 3]>,
    pub phases: Vec<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CheckpointMetadata {
    pub seed: u64,
    pub epoch: usize,
    /// Hard tail loss at `epoch`, if known.
    pub loss: Option<f64>,
}

impl Checkpoint {
    pub fn from_model<T: Scalar>(model: &TransformModel<T>, metadata: CheckpointMetadata) -> Self {
        Self {
            format_version: CHECKPOINT_FORMAT_VERSION,
            n: model.n(),
            depth: model.depth(),
            blocks: model
                .blocks()
                .iter()
                .map(|b| CheckpointBlock {
                    mixers: b.mixers().iter().map(|m| m.map(Scalar::as_f64)).collect(),
                    phases: b.phases().iter().map(|v| v.as_f64()).collect(),
                })
                .collect(),
            metadata,
        }
    }

    /// Validates and converts back into a model.
    pub fn to_model<T: Scalar>(&self) -> Result<TransformModel<T>> {
        if self.format_version != CHECKPOINT_FORMAT_VERSION {
            return Err(Error::Format(format!(
                "unsupported checkpoint format_version {}",
                self.format_version
            )));
        }
        if self.depth != self.blocks.len() {
            return Err(Error::Format(format!(
                "depth {} but {} blocks stored",
                self.depth,
                self.blocks.len()
            )));
        }
        let blocks = self
            .blocks
            .iter()
            .map(|b| {
                ParameterSet::new(
                    self.n,
                    b.mixers.iter().map(|m| m.map(T::lit)).collect(),
                    b.phases.iter().map(|&v| T::lit(v)).collect(),
                )
            })
            .collect::<Result<Vec<_>>>()?;
        TransformModel::new(blocks)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        crate::io::write_atomic(path, self.to_json()?.as_bytes())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip_is_exact() {
        let model = TransformModel::<f64>::deep_init(4, 3, 11).unwrap();
        let ck = Checkpoint::from_model(&model, CheckpointMetadata { seed: 11, epoch: 2, loss: Some(0.125) });
        let back = Checkpoint::from_json(&ck.to_json().unwrap()).unwrap();
        assert_eq!(back, ck);
        assert_eq!(back.to_model::<f64>().unwrap(), model);
    }

    #[test]
    fn rejects_inconsistent_documents() {
        let model = TransformModel::<f64>::fourier(3).unwrap();
        let mut ck = Checkpoint::from_model(&model, CheckpointMetadata::default());
        ck.depth = 2;
        assert!(ck.to_model::<f64>().is_err());
        ck.depth = 1;
        ck.blocks[0].phases.pop();
        assert!(ck.to_model::<f64>().is_err());
        ck.format_version = 9;
        assert!(ck.to_model::<f64>().is_err());
    }
}
