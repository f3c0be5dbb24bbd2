//! Turning crowdsourced votes into MOS labels, describing rated datasets
//! and splitting them into train/eval portions.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};
use crate::model::{DatasetManifest, ManifestRow, MosLabel, RatingRecord, ACR_MAX, ACR_MIN};
use crate::seed::derive_seed;

pub const DEFAULT_MOS_BINS: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Exclusion {
    pub clip_id: String,
    pub reason: String,
    pub n_ratings: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Aggregation {
    /// Sorted by clip id.
    pub labels: Vec<MosLabel>,
    pub excluded: Vec<Exclusion>,
    pub duplicates_removed: usize,
    /// `(clip_id, rater_id)` pairs that voted more than once with different
    /// ratings. They are kept, only flagged.
    pub conflicting_votes: Vec<(String, String)>,
}

/// Two-sided 95% Student-t half-width for `n` votes with sample standard
/// deviation `sd`.
pub fn ci95_half_width(sd: f64, n: usize) -> f64 {
    if n < 2 || sd == 0.0 {
        return 0.0;
    }
    let df = (n - 1) as f64;
    let t = StudentsT::new(0.0, 1.0, df)
        .expect("positive degrees of freedom")
        .inverse_cdf(0.975);
    t * sd / (n as f64).sqrt()
}

fn label_from_votes(clip_id: &str, votes: &mut [f64]) -> MosLabel {
    votes.sort_by(f64::total_cmp);
    let n = votes.len();
    let (mos, ci95) = if votes[0] == votes[n - 1] {
        (votes[0], 0.0)
    } else {
        let mean = votes.iter().sum::<f64>() / n as f64;
        let var = votes.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        (mean.clamp(ACR_MIN, ACR_MAX), ci95_half_width(var.sqrt(), n))
    };
    MosLabel {
        clip_id: clip_id.to_string(),
        mos,
        ci95,
        n_ratings: n as u32,
    }
}

/// Averages votes per clip, dropping exact duplicate rows and clips with
/// fewer than `min_votes` votes.
pub fn aggregate_ratings(records: &[RatingRecord], min_votes: usize) -> Result<Aggregation> {
    if records.is_empty() {
        return Err(Error::Invalid("no rating records".into()));
    }
    if min_votes == 0 {
        return Err(Error::Invalid("min_votes must be at least 1".into()));
    }
    for r in records {
        r.validate()?;
    }

    // clip -> rater -> ratings (deduplicated by exact value)
    let mut by_clip: BTreeMap<&str, BTreeMap<&str, Vec<f64>>> = BTreeMap::new();
    let mut duplicates_removed = 0;
    for r in records {
        let votes = by_clip
            .entry(&r.clip_id)
            .or_default()
            .entry(&r.rater_id)
            .or_default();
        if votes.contains(&r.rating) {
            duplicates_removed += 1;
        } else {
            votes.push(r.rating);
        }
    }

    let mut out = Aggregation {
        duplicates_removed,
        ..Default::default()
    };
    for (clip, raters) in by_clip {
        let mut votes = Vec::new();
        for (rater, ratings) in raters {
            if ratings.len() > 1 {
                out.conflicting_votes
                    .push((clip.to_string(), rater.to_string()));
            }
            votes.extend(ratings);
        }
        if votes.len() < min_votes {
            out.excluded.push(Exclusion {
                clip_id: clip.to_string(),
                reason: format!("fewer than {min_votes} votes"),
                n_ratings: votes.len(),
            });
            continue;
        }
        out.labels.push(label_from_votes(clip, &mut votes));
    }
    if out.labels.is_empty() {
        return Err(Error::EmptyAggregation {
            min_votes,
            excluded: out.excluded.len(),
        });
    }
    Ok(out)
}

/// The columns of a per-dataset summary of subjective ratings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DescriptiveStats {
    pub dataset: String,
    pub avg_ratings_per_clip: f64,
    pub avg_ci95: f64,
    pub mos_min: f64,
    pub mos_max: f64,
    pub clip_count: usize,
}

impl DescriptiveStats {
    pub const HEADER: [&'static str; 5] = [
        "dataset",
        "avg_ratings_per_clip",
        "avg_ci95",
        "mos_min",
        "mos_max",
    ];

    /// Display row: integer vote count, two decimals elsewhere.
    pub fn table_row(&self) -> Vec<String> {
        vec![
            self.dataset.clone(),
            format!("{:.0}", self.avg_ratings_per_clip),
            format!("{:.2}", self.avg_ci95),
            format!("{:.2}", self.mos_min),
            format!("{:.2}", self.mos_max),
        ]
    }
}

pub fn describe(dataset: &str, labels: &[MosLabel]) -> Result<DescriptiveStats> {
    if labels.is_empty() {
        return Err(Error::Invalid(format!("dataset `{dataset}` has no labels")));
    }
    let n = labels.len() as f64;
    Ok(DescriptiveStats {
        dataset: dataset.to_string(),
        avg_ratings_per_clip: labels.iter().map(|l| l.n_ratings as f64).sum::<f64>() / n,
        avg_ci95: labels.iter().map(|l| l.ci95).sum::<f64>() / n,
        mos_min: labels.iter().map(|l| l.mos).fold(f64::INFINITY, f64::min),
        mos_max: labels
            .iter()
            .map(|l| l.mos)
            .fold(f64::NEG_INFINITY, f64::max),
        clip_count: labels.len(),
    })
}

/// One row per manifest, in input order.
pub fn descriptive_stats(manifests: &[DatasetManifest]) -> Result<Vec<DescriptiveStats>> {
    manifests
        .iter()
        .map(|m| {
            let labels: Vec<MosLabel> = m.labels()?.into_iter().cloned().collect();
            describe(&m.dataset, &labels)
        })
        .collect()
}

/// Stratum of a row: condition tag and MOS bin (`None` for unrated rows).
type StratumKey = (String, Option<usize>);

fn mos_bin(mos: f64, bins: usize) -> usize {
    let pos = (mos - ACR_MIN) / (ACR_MAX - ACR_MIN) * bins as f64;
    (pos.floor().max(0.0) as usize).min(bins - 1)
}

/// Integer quotas proportional to `exact`, summing to `total`, each within
/// one of its exact share. Ties go to the earlier entry.
pub(crate) fn largest_remainder(exact: &[f64], total: usize) -> Vec<usize> {
    let mut counts: Vec<usize> = exact.iter().map(|e| e.floor() as usize).collect();
    let assigned: usize = counts.iter().sum();
    let mut order: Vec<usize> = (0..exact.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = exact[a] - exact[a].floor();
        let rb = exact[b] - exact[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    for &i in order.iter().take(total.saturating_sub(assigned)) {
        counts[i] += 1;
    }
    counts
}

fn round_half_even(x: f64) -> usize {
    let r = x.round_ties_even();
    r.max(0.0) as usize
}

/// Splits a manifest into (train, eval) so that every stratum of
/// (condition × MOS bin) contributes its share of `train_fraction`.
pub fn stratified_split(
    manifest: &DatasetManifest,
    train_fraction: f64,
    mos_bins: usize,
    seed: u64,
) -> Result<(DatasetManifest, DatasetManifest)> {
    if manifest.len() < 2 {
        return Err(Error::TooFew {
            needed: 2,
            got: manifest.len(),
        });
    }
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::OutOfRange(format!(
            "train fraction {train_fraction} must lie in (0, 1)"
        )));
    }
    if mos_bins == 0 {
        return Err(Error::Invalid("mos_bins must be positive".into()));
    }

    let mut strata: BTreeMap<StratumKey, Vec<&ManifestRow>> = BTreeMap::new();
    for row in &manifest.rows {
        let key = (
            row.condition.clone().unwrap_or_default(),
            row.mos().map(|m| mos_bin(m, mos_bins)),
        );
        strata.entry(key).or_default().push(row);
    }

    let exact: Vec<f64> = strata
        .values()
        .map(|rows| train_fraction * rows.len() as f64)
        .collect();
    let target = round_half_even(train_fraction * manifest.len() as f64);
    let quotas = largest_remainder(&exact, target);

    let mut train_ids = BTreeSet::new();
    for ((key, rows), quota) in strata.iter().zip(quotas) {
        let mut ids: Vec<&str> = rows.iter().map(|r| r.clip_id.as_str()).collect();
        ids.sort_unstable();
        let label = format!("{}|{:?}", key.0, key.1);
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &label));
        ids.shuffle(&mut rng);
        train_ids.extend(ids.into_iter().take(quota));
    }

    let (train, eval): (Vec<ManifestRow>, Vec<ManifestRow>) = manifest
        .rows
        .iter()
        .cloned()
        .partition(|r| train_ids.contains(r.clip_id.as_str()));
    Ok((
        DatasetManifest::new(manifest.dataset.clone(), train)?,
        DatasetManifest::new(manifest.dataset.clone(), eval)?,
    ))
}
