//! Value types shared across the toolkit.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Lowest and highest score on the ACR scale.
pub const ACR_MIN: f64 = 1.0;
pub const ACR_MAX: f64 = 5.0;

/// Mono audio with identity and provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct Clip {
    pub clip_id: String,
    pub dataset: String,
    pub sample_rate: u32,
    pub samples: Vec<f64>,
}

impl Clip {
    pub fn new(
        clip_id: impl Into<String>,
        dataset: impl Into<String>,
        sample_rate: u32,
        samples: Vec<f64>,
    ) -> Result<Self> {
        if sample_rate == 0 {
            return Err(Error::Invalid("sample rate must be positive".into()));
        }
        if let Some(i) = samples.iter().position(|s| !s.is_finite()) {
            return Err(Error::Invalid(format!("sample {i} is not finite")));
        }
        Ok(Clip {
            clip_id: clip_id.into(),
            dataset: dataset.into(),
            sample_rate,
            samples,
        })
    }

    /// Returns a copy of `self` carrying new samples.
    pub fn with_samples(&self, samples: Vec<f64>) -> Clip {
        Clip {
            clip_id: self.clip_id.clone(),
            dataset: self.dataset.clone(),
            sample_rate: self.sample_rate,
            samples,
        }
    }

    pub fn duration_secs(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }

    pub fn power(&self) -> f64 {
        mean_square(&self.samples)
    }

    pub fn peak(&self) -> f64 {
        self.samples.iter().fold(0.0f64, |m, s| m.max(s.abs()))
    }

    pub(crate) fn require_non_empty(&self) -> Result<()> {
        if self.samples.is_empty() {
            Err(Error::Invalid(format!(
                "clip `{}` has no samples",
                self.clip_id
            )))
        } else {
            Ok(())
        }
    }
}

pub(crate) fn mean_square(x: &[f64]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64
}

/// One listener's vote for one clip.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatingRecord {
    pub clip_id: String,
    pub rater_id: String,
    pub rating: f64,
}

impl RatingRecord {
    pub fn validate(&self) -> Result<()> {
        if !(ACR_MIN..=ACR_MAX).contains(&self.rating) {
            return Err(Error::OutOfRange(format!(
                "rating {} for clip `{}` by `{}` is outside [1, 5]",
                self.rating, self.clip_id, self.rater_id
            )));
        }
        Ok(())
    }
}

/// Ground truth for one clip: the mean vote and the half-width of its 95%
/// confidence interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MosLabel {
    pub clip_id: String,
    pub mos: f64,
    pub ci95: f64,
    pub n_ratings: u32,
}

impl MosLabel {
    pub fn validate(&self) -> Result<()> {
        if !(ACR_MIN..=ACR_MAX).contains(&self.mos) {
            return Err(Error::OutOfRange(format!(
                "mos {} for clip `{}` is outside [1, 5]",
                self.mos, self.clip_id
            )));
        }
        if !(self.ci95 >= 0.0 && self.ci95.is_finite()) {
            return Err(Error::OutOfRange(format!(
                "ci95 {} for clip `{}` must be finite and non-negative",
                self.ci95, self.clip_id
            )));
        }
        if self.n_ratings == 0 {
            return Err(Error::OutOfRange(format!(
                "clip `{}` has zero ratings",
                self.clip_id
            )));
        }
        Ok(())
    }
}

/// A model's scores for clips of one dataset.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PredictionSet {
    pub model_id: String,
    pub entries: BTreeMap<String, f64>,
}

impl PredictionSet {
    pub fn new(model_id: impl Into<String>) -> Self {
        PredictionSet {
            model_id: model_id.into(),
            entries: BTreeMap::new(),
        }
    }

    /// Inserts a score, rejecting duplicates and non-finite values.
    pub fn insert(&mut self, clip_id: impl Into<String>, score: f64) -> Result<()> {
        let clip_id = clip_id.into();
        if !score.is_finite() {
            return Err(Error::Invalid(format!(
                "prediction for `{clip_id}` is not finite"
            )));
        }
        if self.entries.insert(clip_id.clone(), score).is_some() {
            return Err(Error::DuplicateClipIds(vec![clip_id]));
        }
        Ok(())
    }
}

/// Coefficients of `a + b·y + c·y² + d·y³` and the prediction interval on
/// which non-decreasing behaviour was enforced.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MappingCoefficients {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub range_lo: f64,
    pub range_hi: f64,
}

impl MappingCoefficients {
    pub fn identity(range_lo: f64, range_hi: f64) -> Self {
        MappingCoefficients {
            a: 0.0,
            b: 1.0,
            c: 0.0,
            d: 0.0,
            range_lo,
            range_hi,
        }
    }

    pub fn eval(&self, y: f64) -> f64 {
        self.a + y * (self.b + y * (self.c + y * self.d))
    }

    pub fn derivative(&self, y: f64) -> f64 {
        self.b + y * (2.0 * self.c + 3.0 * y * self.d)
    }

    pub fn coefficients(&self) -> [f64; 4] {
        [self.a, self.b, self.c, self.d]
    }
}

/// One manifest line. The label is absent for corpora that have not been
/// rated yet (e.g. freshly synthesized ones).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestRow {
    pub clip_id: String,
    pub audio_path: Option<String>,
    pub label: Option<MosLabel>,
    pub condition: Option<String>,
}

impl ManifestRow {
    pub fn mos(&self) -> Option<f64> {
        self.label.as_ref().map(|l| l.mos)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub dataset: String,
    pub rows: Vec<ManifestRow>,
}

impl DatasetManifest {
    pub fn new(dataset: impl Into<String>, rows: Vec<ManifestRow>) -> Result<Self> {
        let m = DatasetManifest {
            dataset: dataset.into(),
            rows,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn from_labels(dataset: impl Into<String>, labels: Vec<MosLabel>) -> Result<Self> {
        let rows = labels
            .into_iter()
            .map(|l| ManifestRow {
                clip_id: l.clip_id.clone(),
                audio_path: None,
                label: Some(l),
                condition: None,
            })
            .collect();
        Self::new(dataset, rows)
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = BTreeSet::new();
        let mut dups = BTreeSet::new();
        for row in &self.rows {
            if !seen.insert(row.clip_id.as_str()) {
                dups.insert(row.clip_id.clone());
            }
            if let Some(label) = &row.label {
                if label.clip_id != row.clip_id {
                    return Err(Error::Invalid(format!(
                        "label for `{}` attached to row `{}`",
                        label.clip_id, row.clip_id
                    )));
                }
                label.validate()?;
            }
        }
        if !dups.is_empty() {
            return Err(Error::DuplicateClipIds(dups.into_iter().collect()));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// All labels, failing if any row is unrated.
    pub fn labels(&self) -> Result<Vec<&MosLabel>> {
        self.rows
            .iter()
            .map(|r| {
                r.label.as_ref().ok_or_else(|| {
                    Error::Invalid(format!(
                        "clip `{}` in `{}` has no MOS label",
                        r.clip_id, self.dataset
                    ))
                })
            })
            .collect()
    }
}
