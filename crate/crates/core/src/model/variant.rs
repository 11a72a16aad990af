use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which fusion representation feeds the detection head.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelVariant {
    /// Head on the video embedding.
    VideoOnly,
    /// Head on the audio embedding.
    AudioOnly,
    /// Head on the concatenated raw features, no embedding networks.
    EarlyFusionNoEmbed,
    /// Head on `concat(z_v, z_a)`.
    EarlyFusion,
    /// Two unimodal pipelines whose probabilities are averaged.
    LateFusion,
    /// Head on `concat(z_v, z_a, 1)`: the fusion tensor without its bimodal block.
    TfUnimodalOnly,
    /// Head on the flattened bimodal block `z_v ⊗ z_a`.
    TfBimodalOnly,
    /// Head on the flattened `[z_v; 1] ⊗ [z_a; 1]`.
    TfComplete,
}

impl ModelVariant {
    /// Every variant, in ablation-table row order.
    pub const ALL: [ModelVariant; 8] = [
        ModelVariant::VideoOnly,
        ModelVariant::AudioOnly,
        ModelVariant::EarlyFusionNoEmbed,
        ModelVariant::EarlyFusion,
        ModelVariant::LateFusion,
        ModelVariant::TfUnimodalOnly,
        ModelVariant::TfBimodalOnly,
        ModelVariant::TfComplete,
    ];

    pub fn tag(self) -> u8 {
        match self {
            ModelVariant::VideoOnly => 0,
            ModelVariant::AudioOnly => 1,
            ModelVariant::EarlyFusionNoEmbed => 2,
            ModelVariant::EarlyFusion => 3,
            ModelVariant::LateFusion => 4,
            ModelVariant::TfUnimodalOnly => 5,
            ModelVariant::TfBimodalOnly => 6,
            ModelVariant::TfComplete => 7,
        }
    }

    pub fn from_tag(tag: u8) -> Option<Self> {
        Self::ALL.get(tag as usize).copied()
    }

    /// Command-line name, e.g. `tf-complete`.
    pub fn name(self) -> &'static str {
        match self {
            ModelVariant::VideoOnly => "video-only",
            ModelVariant::AudioOnly => "audio-only",
            ModelVariant::EarlyFusionNoEmbed => "early-fusion-no-embed",
            ModelVariant::EarlyFusion => "early-fusion",
            ModelVariant::LateFusion => "late-fusion",
            ModelVariant::TfUnimodalOnly => "tf-unimodal-only",
            ModelVariant::TfBimodalOnly => "tf-bimodal-only",
            ModelVariant::TfComplete => "tf-complete",
        }
    }

    /// Human-readable row label.
    pub fn label(self) -> &'static str {
        match self {
            ModelVariant::VideoOnly => "Video Only",
            ModelVariant::AudioOnly => "Audio Only",
            ModelVariant::EarlyFusionNoEmbed => "Early Fusion without Embed.",
            ModelVariant::EarlyFusion => "Early Fusion",
            ModelVariant::LateFusion => "Late Fusion",
            ModelVariant::TfUnimodalOnly => "TF - Unimodal Only",
            ModelVariant::TfBimodalOnly => "TF - Bimodal Only",
            ModelVariant::TfComplete => "Complete TF",
        }
    }

    pub fn uses_video_embed(self) -> bool {
        !matches!(
            self,
            ModelVariant::AudioOnly | ModelVariant::EarlyFusionNoEmbed
        )
    }

    pub fn uses_audio_embed(self) -> bool {
        !matches!(
            self,
            ModelVariant::VideoOnly | ModelVariant::EarlyFusionNoEmbed
        )
    }

    /// Input width of the detection head(s). Late fusion has two heads.
    pub fn head_inputs(self, dims: &Dims) -> Vec<usize> {
        let (v, a) = (dims.video_out, dims.audio_out);
        match self {
            ModelVariant::VideoOnly => vec![v],
            ModelVariant::AudioOnly => vec![a],
            ModelVariant::EarlyFusionNoEmbed => vec![2 * dims.input],
            ModelVariant::EarlyFusion => vec![v + a],
            ModelVariant::LateFusion => vec![v, a],
            ModelVariant::TfUnimodalOnly => vec![v + a + 1],
            ModelVariant::TfBimodalOnly => vec![v * a],
            ModelVariant::TfComplete => vec![(v + 1) * (a + 1)],
        }
    }
}

impl fmt::Display for ModelVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .iter()
            .copied()
            .find(|v| v.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Self::ALL.iter().map(|v| v.name()).collect();
                Error::Configuration(format!(
                    "unknown variant '{s}'; expected one of: {}",
                    names.join(", ")
                ))
            })
    }
}

/// Layer widths shared by all variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dims {
    /// Length of each modality's feature vector.
    pub input: usize,
    pub embed_hidden: usize,
    pub video_out: usize,
    pub audio_out: usize,
    pub head_hidden: usize,
}

impl Dims {
    /// 768 → 128 → 64 / 32 embeddings, 128-wide head.
    pub const FULL: Dims = Dims {
        input: 768,
        embed_hidden: 128,
        video_out: 64,
        audio_out: 32,
        head_hidden: 128,
    };

    /// Every width of [`Dims::FULL`] divided by `factor`.
    pub fn scaled(factor: usize) -> Dims {
        let f = factor.max(1);
        let d = Dims::FULL;
        Dims {
            input: d.input / f,
            embed_hidden: d.embed_hidden / f,
            video_out: d.video_out / f,
            audio_out: d.audio_out / f,
            head_hidden: d.head_hidden / f,
        }
    }
}

impl Default for Dims {
    fn default() -> Self {
        Dims::FULL
    }
}
