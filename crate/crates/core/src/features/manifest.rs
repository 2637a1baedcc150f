use std::fmt;

use serde::{Deserialize, Serialize};

pub const FORMAT_VERSION: u32 = 1;
pub const LAYERS_PER_NETWORK: usize = 6;
/// Stage-3 blocks tapped at each third of its 36 residual blocks.
pub const STAGE3_BLOCKS: [u32; 3] = [12, 24, 36];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Network {
    Memorability,
    ImagenetBaseline,
}

impl Network {
    pub const ALL: [Network; 2] = [Network::Memorability, Network::ImagenetBaseline];

    pub fn as_str(self) -> &'static str {
        match self {
            Network::Memorability => "memorability",
            Network::ImagenetBaseline => "imagenet_baseline",
        }
    }
}

impl fmt::Display for Network {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// The six tapped stages, in model order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Stage1,
    Stage2,
    Stage3Early,
    Stage3Middle,
    Stage3Late,
    Stage4,
}

impl Stage {
    pub const ALL: [Stage; 6] =
        [Stage::Stage1, Stage::Stage2, Stage::Stage3Early, Stage::Stage3Middle, Stage::Stage3Late, Stage::Stage4];

    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Stage1 => "stage1",
            Stage::Stage2 => "stage2",
            Stage::Stage3Early => "stage3_early",
            Stage::Stage3Middle => "stage3_middle",
            Stage::Stage3Late => "stage3_late",
            Stage::Stage4 => "stage4",
        }
    }

    /// Required block index for the stage-3 taps; other stages use their last block.
    pub fn required_block(self) -> Option<u32> {
        match self {
            Stage::Stage3Early => Some(STAGE3_BLOCKS[0]),
            Stage::Stage3Middle => Some(STAGE3_BLOCKS[1]),
            Stage::Stage3Late => Some(STAGE3_BLOCKS[2]),
            _ => None,
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayerSpec {
    pub network: Network,
    pub stage: Stage,
    pub block_index: u32,
    pub flattened_length: u64,
    /// Payload file name, relative to the container directory.
    pub file: String,
}

impl LayerSpec {
    pub fn default_file_name(network: Network, stage: Stage) -> String {
        format!("{network}__{stage}.f32")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Label {
    pub label: String,
    pub confidence: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelStatus {
    #[default]
    Ok,
    /// The label provider failed; the image has no usable labels.
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImageEntry {
    pub image_hash: String,
    pub memorability: f64,
    #[serde(default)]
    pub labels: Vec<Label>,
    #[serde(default)]
    pub label_status: LabelStatus,
}

impl ImageEntry {
    pub fn label_strings(&self) -> Option<Vec<&str>> {
        (self.label_status == LabelStatus::Ok && !self.labels.is_empty())
            .then(|| self.labels.iter().map(|l| l.label.as_str()).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub format_version: u32,
    /// Model name → version string.
    pub model_versions: std::collections::BTreeMap<String, String>,
    /// Where activations were tapped, e.g. `post_activation_block_output`.
    pub hook_point: String,
    pub layers: Vec<LayerSpec>,
    /// Row order of every payload file.
    pub images: Vec<ImageEntry>,
}
