//! Condition planning: which clip receives which two-stage degradation
//! chain, with concrete parameters.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ratings::largest_remainder;
use crate::seed::derive_seed;

use super::filter::FilterKind;

/// Rows of the first-step impairment table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Impairment {
    #[serde(rename = "white_noise")]
    WhiteNoise,
    #[serde(rename = "background_noise")]
    BackgroundNoise,
    #[serde(rename = "filter")]
    Filter,
    #[serde(rename = "clipping")]
    Clipping,
    #[serde(rename = "codec")]
    Codec,
    #[serde(rename = "noise+codec")]
    NoiseCodec,
    #[serde(rename = "white+codec")]
    WhiteCodec,
    #[serde(rename = "filter+codec")]
    FilterCodec,
    #[serde(rename = "clipping+background")]
    ClippingBackground,
}

impl Impairment {
    pub const ALL: [Impairment; 9] = [
        Impairment::WhiteNoise,
        Impairment::BackgroundNoise,
        Impairment::Filter,
        Impairment::Clipping,
        Impairment::Codec,
        Impairment::NoiseCodec,
        Impairment::WhiteCodec,
        Impairment::FilterCodec,
        Impairment::ClippingBackground,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Impairment::WhiteNoise => "white_noise",
            Impairment::BackgroundNoise => "background_noise",
            Impairment::Filter => "filter",
            Impairment::Clipping => "clipping",
            Impairment::Codec => "codec",
            Impairment::NoiseCodec => "noise+codec",
            Impairment::WhiteCodec => "white+codec",
            Impairment::FilterCodec => "filter+codec",
            Impairment::ClippingBackground => "clipping+background",
        }
    }
}

/// Rows of the second-step processing table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Processing {
    #[serde(rename = "first_only")]
    FirstOnly,
    #[serde(rename = "first+ns")]
    FirstNs,
    #[serde(rename = "first+ns+plc")]
    FirstNsPlc,
    #[serde(rename = "clean")]
    Clean,
    #[serde(rename = "clean+plc")]
    CleanPlc,
}

impl Processing {
    pub const ALL: [Processing; 5] = [
        Processing::FirstOnly,
        Processing::FirstNs,
        Processing::FirstNsPlc,
        Processing::Clean,
        Processing::CleanPlc,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Processing::FirstOnly => "first_only",
            Processing::FirstNs => "first+ns",
            Processing::FirstNsPlc => "first+ns+plc",
            Processing::Clean => "clean",
            Processing::CleanPlc => "clean+plc",
        }
    }

    fn impairs(self) -> bool {
        matches!(
            self,
            Processing::FirstOnly | Processing::FirstNs | Processing::FirstNsPlc
        )
    }

    fn second_stage(self) -> SecondStage {
        match self {
            Processing::FirstOnly | Processing::Clean => SecondStage::None,
            Processing::FirstNs => SecondStage::NoiseSuppression,
            Processing::FirstNsPlc => SecondStage::NoiseSuppressionPlc,
            Processing::CleanPlc => SecondStage::Plc,
        }
    }
}

pub trait TableRow: Copy + Ord + fmt::Debug + 'static {
    const ROWS: &'static [Self];
    fn row_tag(self) -> &'static str;
}

impl TableRow for Impairment {
    const ROWS: &'static [Self] = &Impairment::ALL;
    fn row_tag(self) -> &'static str {
        self.tag()
    }
}

impl TableRow for Processing {
    const ROWS: &'static [Self] = &Processing::ALL;
    fn row_tag(self) -> &'static str {
        self.tag()
    }
}

/// Non-negative weights per table row, in table order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightTable<K: TableRow> {
    pub rows: Vec<(K, f64)>,
}

impl<K: TableRow> WeightTable<K> {
    pub fn new(rows: Vec<(K, f64)>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for (k, w) in &rows {
            if !seen.insert(*k) {
                return Err(Error::Invalid(format!(
                    "weight for `{}` given twice",
                    k.row_tag()
                )));
            }
            if !(w.is_finite() && *w >= 0.0) {
                return Err(Error::OutOfRange(format!(
                    "weight {w} for `{}` must be finite and non-negative",
                    k.row_tag()
                )));
            }
        }
        if !rows.iter().any(|(_, w)| *w > 0.0) {
            return Err(Error::Invalid("all weights are zero".into()));
        }
        Ok(WeightTable { rows })
    }

    /// Builds a table from `tag → weight`; rows not mentioned get weight 0.
    pub fn from_tags(map: &BTreeMap<String, f64>) -> Result<Self> {
        for tag in map.keys() {
            if !K::ROWS.iter().any(|k| k.row_tag() == tag) {
                let known: Vec<_> = K::ROWS.iter().map(|k| k.row_tag()).collect();
                return Err(Error::Invalid(format!(
                    "unknown table row `{tag}` (expected one of {})",
                    known.join(", ")
                )));
            }
        }
        Self::new(
            K::ROWS
                .iter()
                .map(|k| (*k, map.get(k.row_tag()).copied().unwrap_or(0.0)))
                .collect(),
        )
    }

    pub fn total(&self) -> f64 {
        self.rows.iter().map(|(_, w)| w).sum()
    }

    pub fn normalized(&self) -> WeightTable<K> {
        let t = self.total();
        WeightTable {
            rows: self.rows.iter().map(|(k, w)| (*k, w / t)).collect(),
        }
    }

    /// Largest-remainder counts of `n` items over the normalized weights.
    pub fn apportion(&self, n: usize) -> Vec<(K, usize)> {
        let norm = self.normalized();
        let exact: Vec<f64> = norm.rows.iter().map(|(_, w)| w * n as f64).collect();
        norm.rows
            .iter()
            .map(|(k, _)| *k)
            .zip(largest_remainder(&exact, n))
            .collect()
    }
}

/// First-step impairment percentages of the Tencent corpus.
pub fn tencent_first_step() -> WeightTable<Impairment> {
    WeightTable {
        rows: Impairment::ALL
            .iter()
            .copied()
            .zip([10.0, 60.0, 3.75, 1.25, 5.0, 5.0, 5.0, 5.0, 5.0])
            .collect(),
    }
}

/// Second-step processing percentages of the Tencent corpus.
/// They sum to 76.25 and are renormalized when apportioned.
pub fn tencent_second_step() -> WeightTable<Processing> {
    WeightTable {
        rows: Processing::ALL
            .iter()
            .copied()
            .zip([60.0, 10.0, 1.25, 3.75, 1.25])
            .collect(),
    }
}

/// Every clip goes through the first step only.
pub fn first_step_only() -> WeightTable<Processing> {
    WeightTable {
        rows: vec![(Processing::FirstOnly, 1.0)],
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CodecKind {
    Amr,
    Opus,
}

impl CodecKind {
    pub fn tag(self) -> &'static str {
        match self {
            CodecKind::Amr => "amr",
            CodecKind::Opus => "opus",
        }
    }
}

/// First stage of a concrete chain; the filter row is resolved to its
/// high- or low-pass variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FirstStage {
    #[serde(rename = "white_noise")]
    WhiteNoise,
    #[serde(rename = "background_noise")]
    BackgroundNoise,
    #[serde(rename = "highpass")]
    Highpass,
    #[serde(rename = "lowpass")]
    Lowpass,
    #[serde(rename = "clipping")]
    Clipping,
    #[serde(rename = "codec")]
    Codec,
    #[serde(rename = "noise+codec")]
    NoiseCodec,
    #[serde(rename = "white+codec")]
    WhiteCodec,
    #[serde(rename = "filter+codec")]
    FilterCodec,
    #[serde(rename = "clipping+background")]
    ClippingBackground,
    #[serde(rename = "clean")]
    Clean,
}

impl FirstStage {
    pub fn tag(self) -> &'static str {
        match self {
            FirstStage::WhiteNoise => "white_noise",
            FirstStage::BackgroundNoise => "background_noise",
            FirstStage::Highpass => "highpass",
            FirstStage::Lowpass => "lowpass",
            FirstStage::Clipping => "clipping",
            FirstStage::Codec => "codec",
            FirstStage::NoiseCodec => "noise+codec",
            FirstStage::WhiteCodec => "white+codec",
            FirstStage::FilterCodec => "filter+codec",
            FirstStage::ClippingBackground => "clipping+background",
            FirstStage::Clean => "clean",
        }
    }

    pub fn needs_snr(self) -> bool {
        matches!(
            self,
            FirstStage::WhiteNoise
                | FirstStage::BackgroundNoise
                | FirstStage::NoiseCodec
                | FirstStage::WhiteCodec
                | FirstStage::ClippingBackground
        )
    }

    pub fn needs_filter(self) -> bool {
        matches!(
            self,
            FirstStage::Highpass | FirstStage::Lowpass | FirstStage::FilterCodec
        )
    }

    pub fn needs_clip_threshold(self) -> bool {
        matches!(self, FirstStage::Clipping | FirstStage::ClippingBackground)
    }

    pub fn needs_codec(self) -> bool {
        matches!(
            self,
            FirstStage::Codec
                | FirstStage::NoiseCodec
                | FirstStage::WhiteCodec
                | FirstStage::FilterCodec
        )
    }

    pub fn needs_background(self) -> bool {
        matches!(
            self,
            FirstStage::BackgroundNoise | FirstStage::NoiseCodec | FirstStage::ClippingBackground
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SecondStage {
    #[serde(rename = "none")]
    None,
    #[serde(rename = "ns")]
    NoiseSuppression,
    #[serde(rename = "ns+plc")]
    NoiseSuppressionPlc,
    #[serde(rename = "plc")]
    Plc,
}

impl SecondStage {
    pub fn tag(self) -> &'static str {
        match self {
            SecondStage::None => "none",
            SecondStage::NoiseSuppression => "ns",
            SecondStage::NoiseSuppressionPlc => "ns+plc",
            SecondStage::Plc => "plc",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterParams {
    pub kind: FilterKind,
    pub cutoff_hz: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ConditionParams {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub snr_db: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub filter: Option<FilterParams>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub clip_threshold: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub codec: Option<CodecKind>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConditionSpec {
    pub first_stage: FirstStage,
    pub second_stage: SecondStage,
    pub params: ConditionParams,
    pub seed: u64,
}

impl ConditionSpec {
    /// Tag used in file names and manifests, e.g. `white+codec` or
    /// `lowpass+ns`.
    pub fn condition_tag(&self) -> String {
        match self.second_stage {
            SecondStage::None => self.first_stage.tag().to_string(),
            s => format!("{}+{}", self.first_stage.tag(), s.tag()),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fs = self.first_stage;
        let p = &self.params;
        let check = |needed: bool, present: bool, what: &str| -> Result<()> {
            if needed != present {
                return Err(Error::Invalid(format!(
                    "condition `{}`: {what} {}",
                    self.condition_tag(),
                    if needed { "missing" } else { "not expected" }
                )));
            }
            Ok(())
        };
        check(fs.needs_snr(), p.snr_db.is_some(), "snr_db")?;
        check(fs.needs_filter(), p.filter.is_some(), "filter")?;
        check(
            fs.needs_clip_threshold(),
            p.clip_threshold.is_some(),
            "clip_threshold",
        )?;
        check(fs.needs_codec(), p.codec.is_some(), "codec")?;
        if let Some(snr) = p.snr_db {
            if !snr.is_finite() {
                return Err(Error::Invalid("snr_db must be finite".into()));
            }
        }
        if let Some(t) = p.clip_threshold {
            if !(t > 0.0 && t <= 1.0) {
                return Err(Error::OutOfRange(format!(
                    "clip threshold {t} outside (0, 1]"
                )));
            }
        }
        if let Some(f) = p.filter {
            if !(f.cutoff_hz > 0.0 && f.cutoff_hz.is_finite()) {
                return Err(Error::OutOfRange(format!("cutoff {} Hz", f.cutoff_hz)));
            }
            let kind_matches = match fs {
                FirstStage::Highpass => f.kind == FilterKind::Highpass,
                FirstStage::Lowpass => f.kind == FilterKind::Lowpass,
                _ => true,
            };
            if !kind_matches {
                return Err(Error::Invalid(format!(
                    "condition `{}` carries a {:?} filter",
                    fs.tag(),
                    f.kind
                )));
            }
        }
        Ok(())
    }
}

/// Ranges from which per-clip parameters are drawn.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamRanges {
    pub snr_db: [f64; 2],
    pub lowpass_hz: f64,
    pub highpass_hz: f64,
    pub clip_threshold: [f64; 2],
}

impl Default for ParamRanges {
    fn default() -> Self {
        ParamRanges {
            snr_db: [0.0, 40.0],
            lowpass_hz: 3500.0,
            highpass_hz: 300.0,
            clip_threshold: [0.1, 0.5],
        }
    }
}

impl ParamRanges {
    pub fn validate(&self) -> Result<()> {
        let [lo, hi] = self.snr_db;
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(Error::Invalid(format!("bad SNR range [{lo}, {hi}]")));
        }
        let [lo, hi] = self.clip_threshold;
        if !(lo > 0.0 && hi <= 1.0 && lo <= hi) {
            return Err(Error::Invalid(format!(
                "bad clip threshold range [{lo}, {hi}]"
            )));
        }
        if !(self.lowpass_hz > 0.0 && self.highpass_hz > 0.0) {
            return Err(Error::Invalid("filter cutoffs must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assignment {
    pub clip_id: String,
    pub spec: ConditionSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionPlan {
    /// Sorted by clip id.
    pub assignments: Vec<Assignment>,
    pub first_step_weights: WeightTable<Impairment>,
    pub second_step_weights: WeightTable<Processing>,
    pub first_step_counts: Vec<(Impairment, usize)>,
    pub second_step_counts: Vec<(Processing, usize)>,
    pub master_seed: u64,
}

impl ConditionPlan {
    pub fn assignment(&self, clip_id: &str) -> Option<&Assignment> {
        self.assignments
            .binary_search_by(|a| a.clip_id.as_str().cmp(clip_id))
            .ok()
            .map(|i| &self.assignments[i])
    }

    /// Number of clips per condition tag.
    pub fn condition_counts(&self) -> BTreeMap<String, usize> {
        let mut out = BTreeMap::new();
        for a in &self.assignments {
            *out.entry(a.spec.condition_tag()).or_insert(0) += 1;
        }
        out
    }
}

fn draw_params(seed: u64, ranges: &ParamRanges) -> (f64, FilterParams, f64, CodecKind) {
    // Always draw in the same order so a clip's values do not depend on
    // which of them its condition uses.
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let [s_lo, s_hi] = ranges.snr_db;
    let snr = s_lo + (s_hi - s_lo) * rng.random::<f64>();
    let filter = if rng.random::<bool>() {
        FilterParams {
            kind: FilterKind::Lowpass,
            cutoff_hz: ranges.lowpass_hz,
        }
    } else {
        FilterParams {
            kind: FilterKind::Highpass,
            cutoff_hz: ranges.highpass_hz,
        }
    };
    let [c_lo, c_hi] = ranges.clip_threshold;
    let threshold = c_lo + (c_hi - c_lo) * rng.random::<f64>();
    let codec = if rng.random::<bool>() {
        CodecKind::Amr
    } else {
        CodecKind::Opus
    };
    (snr, filter, threshold, codec)
}

fn build_spec(
    impairment: Option<Impairment>,
    processing: Processing,
    seed: u64,
    ranges: &ParamRanges,
) -> ConditionSpec {
    let (snr, filter, threshold, codec) = draw_params(seed, ranges);
    let first_stage = match impairment {
        None => FirstStage::Clean,
        Some(Impairment::WhiteNoise) => FirstStage::WhiteNoise,
        Some(Impairment::BackgroundNoise) => FirstStage::BackgroundNoise,
        Some(Impairment::Filter) => match filter.kind {
            FilterKind::Lowpass => FirstStage::Lowpass,
            FilterKind::Highpass => FirstStage::Highpass,
        },
        Some(Impairment::Clipping) => FirstStage::Clipping,
        Some(Impairment::Codec) => FirstStage::Codec,
        Some(Impairment::NoiseCodec) => FirstStage::NoiseCodec,
        Some(Impairment::WhiteCodec) => FirstStage::WhiteCodec,
        Some(Impairment::FilterCodec) => FirstStage::FilterCodec,
        Some(Impairment::ClippingBackground) => FirstStage::ClippingBackground,
    };
    let params = ConditionParams {
        snr_db: first_stage.needs_snr().then_some(snr),
        filter: first_stage.needs_filter().then_some(filter),
        clip_threshold: first_stage.needs_clip_threshold().then_some(threshold),
        codec: first_stage.needs_codec().then_some(codec),
    };
    ConditionSpec {
        first_stage,
        second_stage: processing.second_stage(),
        params,
        seed,
    }
}

/// Apportions second-step rows over all clips and first-step rows over the
/// clips that receive a first-step impairment, then draws per-clip
/// parameters. The result depends only on the set of clip ids, the weights
/// and `master_seed`.
pub fn sample_plan(
    clip_ids: &[String],
    first_step: &WeightTable<Impairment>,
    second_step: &WeightTable<Processing>,
    master_seed: u64,
    ranges: &ParamRanges,
) -> Result<ConditionPlan> {
    if clip_ids.is_empty() {
        return Err(Error::Invalid("no clips to plan".into()));
    }
    let first_step = WeightTable::new(first_step.rows.clone())?;
    let second_step = WeightTable::new(second_step.rows.clone())?;
    ranges.validate()?;

    let mut ids: Vec<&str> = clip_ids.iter().map(String::as_str).collect();
    ids.sort_unstable();
    if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
        return Err(Error::DuplicateClipIds(vec![w[0].to_string()]));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(master_seed, "second-step"));
    ids.shuffle(&mut rng);
    let second_counts = second_step.apportion(ids.len());
    let mut processing: BTreeMap<&str, Processing> = BTreeMap::new();
    let mut cursor = 0;
    for (row, count) in &second_counts {
        for id in &ids[cursor..cursor + count] {
            processing.insert(id, *row);
        }
        cursor += count;
    }

    let mut impaired: Vec<&str> = processing
        .iter()
        .filter(|(_, p)| p.impairs())
        .map(|(id, _)| *id)
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(master_seed, "first-step"));
    impaired.shuffle(&mut rng);
    let first_counts = first_step.apportion(impaired.len());
    let mut impairment: BTreeMap<&str, Impairment> = BTreeMap::new();
    let mut cursor = 0;
    for (row, count) in &first_counts {
        for id in &impaired[cursor..cursor + count] {
            impairment.insert(id, *row);
        }
        cursor += count;
    }

    let assignments = processing
        .iter()
        .map(|(id, proc_row)| Assignment {
            clip_id: id.to_string(),
            spec: build_spec(
                impairment.get(id).copied(),
                *proc_row,
                derive_seed(master_seed, id),
                ranges,
            ),
        })
        .collect();

    Ok(ConditionPlan {
        assignments,
        first_step_weights: first_step,
        second_step_weights: second_step,
        first_step_counts: first_counts,
        second_step_counts: second_counts,
        master_seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("clip{i:05}")).collect()
    }

    fn count(plan: &ConditionPlan, row: Impairment) -> usize {
        plan.first_step_counts
            .iter()
            .find(|(k, _)| *k == row)
            .unwrap()
            .1
    }

    #[test]
    fn table_one_counts() {
        let r = ParamRanges::default();
        let plan = sample_plan(&ids(80), &tencent_first_step(), &first_step_only(), 1, &r).unwrap();
        assert_eq!(count(&plan, Impairment::WhiteNoise), 8);
        let plan =
            sample_plan(&ids(320), &tencent_first_step(), &first_step_only(), 1, &r).unwrap();
        assert_eq!(count(&plan, Impairment::Clipping), 4);
    }

    #[test]
    fn table_two_renormalized() {
        let counts = tencent_second_step().apportion(160);
        assert_eq!(counts[0], (Processing::FirstOnly, 126));
        assert_eq!(counts.iter().map(|c| c.1).sum::<usize>(), 160);
        let t = tencent_second_step();
        assert!((t.total() - 76.25).abs() < 1e-12);
    }

    #[test]
    fn plan_is_order_independent() {
        let r = ParamRanges::default();
        let a = ids(57);
        let mut b = a.clone();
        b.reverse();
        let p1 = sample_plan(&a, &tencent_first_step(), &tencent_second_step(), 9, &r).unwrap();
        let p2 = sample_plan(&b, &tencent_first_step(), &tencent_second_step(), 9, &r).unwrap();
        assert_eq!(p1, p2);
        for a in &p1.assignments {
            a.spec.validate().unwrap();
        }
        let p3 = sample_plan(&a, &tencent_first_step(), &tencent_second_step(), 10, &r).unwrap();
        assert_ne!(p1.assignments, p3.assignments);
    }

    #[test]
    fn realized_counts_match_apportionment() {
        let r = ParamRanges::default();
        let plan = sample_plan(
            &ids(400),
            &tencent_first_step(),
            &tencent_second_step(),
            3,
            &r,
        )
        .unwrap();
        let clean = plan
            .assignments
            .iter()
            .filter(|a| a.spec.first_stage == FirstStage::Clean)
            .count();
        let expected_clean: usize = plan
            .second_step_counts
            .iter()
            .filter(|(k, _)| !k.impairs())
            .map(|(_, c)| c)
            .sum();
        assert_eq!(clean, expected_clean);
        let clipping = plan
            .assignments
            .iter()
            .filter(|a| a.spec.first_stage == FirstStage::Clipping)
            .count();
        assert_eq!(clipping, count(&plan, Impairment::Clipping));
        let snrs: Vec<f64> = plan
            .assignments
            .iter()
            .filter_map(|a| a.spec.params.snr_db)
            .collect();
        assert!(!snrs.is_empty());
        assert!(snrs.iter().all(|s| (0.0..=40.0).contains(s)));
    }

    #[test]
    fn weight_errors() {
        let r = ParamRanges::default();
        assert!(sample_plan(&[], &tencent_first_step(), &first_step_only(), 1, &r).is_err());
        let zero = WeightTable {
            rows: vec![(Impairment::WhiteNoise, 0.0)],
        };
        assert!(sample_plan(&ids(3), &zero, &first_step_only(), 1, &r).is_err());
        let neg = WeightTable {
            rows: vec![(Impairment::WhiteNoise, -1.0), (Impairment::Codec, 2.0)],
        };
        assert!(matches!(
            sample_plan(&ids(3), &neg, &first_step_only(), 1, &r),
            Err(Error::OutOfRange(_))
        ));
        let mut map = BTreeMap::new();
        map.insert("bogus".to_string(), 1.0);
        assert!(WeightTable::<Impairment>::from_tags(&map).is_err());
    }
}
