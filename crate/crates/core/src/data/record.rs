use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkit::Vector;

/// Feature length produced by the upstream video and audio encoders.
pub const FEATURE_DIM: usize = 768;

/// Class label. Fraud is the positive class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Label {
    Legit,
    Fraud,
}

impl Label {
    pub fn as_f64(self) -> f64 {
        match self {
            Label::Legit => 0.0,
            Label::Fraud => 1.0,
        }
    }

    pub fn is_fraud(self) -> bool {
        self == Label::Fraud
    }

    pub fn name(self) -> &'static str {
        match self {
            Label::Legit => "legit",
            Label::Fraud => "fraud",
        }
    }
}

impl From<Label> for u8 {
    fn from(l: Label) -> u8 {
        l as u8
    }
}

impl TryFrom<u8> for Label {
    type Error = String;

    fn try_from(v: u8) -> std::result::Result<Self, String> {
        match v {
            0 => Ok(Label::Legit),
            1 => Ok(Label::Fraud),
            other => Err(format!("label must be 0 or 1, got {other}")),
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One labelled (video features, audio features) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRecord {
    pub id: String,
    pub video: Vector<f64>,
    pub audio: Vector<f64>,
    pub label: Label,
}

impl FeatureRecord {
    pub fn validate(&self, dim: usize) -> Result<()> {
        if self.video.len() != dim || self.audio.len() != dim {
            return Err(Error::dim(format!(
                "record '{}' has {} video and {} audio features, expected {dim}",
                self.id,
                self.video.len(),
                self.audio.len()
            )));
        }
        if !self.video.is_finite() || !self.audio.is_finite() {
            return Err(Error::Input(format!(
                "record '{}' has non-finite features",
                self.id
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Dataset {
    pub records: Vec<FeatureRecord>,
    pub provenance: String,
}

impl Dataset {
    pub fn new(records: Vec<FeatureRecord>, provenance: impl Into<String>) -> Result<Self> {
        let ds = Self {
            records,
            provenance: provenance.into(),
        };
        ds.validate()?;
        Ok(ds)
    }

    /// Unique ids and one feature length across all records.
    pub fn validate(&self) -> Result<()> {
        let dim = self.feature_dim();
        let mut seen = HashSet::with_capacity(self.records.len());
        for r in &self.records {
            r.validate(dim)?;
            if !seen.insert(r.id.as_str()) {
                return Err(Error::Input(format!("duplicate record id '{}'", r.id)));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Feature length of the first record, or [`FEATURE_DIM`] when empty.
    pub fn feature_dim(&self) -> usize {
        self.records.first().map_or(FEATURE_DIM, |r| r.video.len())
    }

    pub fn labels(&self) -> Vec<Label> {
        self.records.iter().map(|r| r.label).collect()
    }

    pub fn count(&self, label: Label) -> usize {
        self.records.iter().filter(|r| r.label == label).count()
    }

    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            records: indices.iter().map(|&i| self.records[i].clone()).collect(),
            provenance: self.provenance.clone(),
        }
    }
}
