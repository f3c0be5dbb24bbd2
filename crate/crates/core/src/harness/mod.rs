//! Evaluation of prediction sets against labelled datasets, ranking and
//! reporting.

pub mod cli;
pub mod report;
pub mod svg;

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mapping::{apply_mapping, rmse_map_with, DEFAULT_GRID_POINTS};
use crate::metrics::{outlier_ratio_raw, pcc, rmse_with, MetricReport, RmseDenominator};
use crate::model::{DatasetManifest, PredictionSet};

pub use report::{mos_histogram, render_report};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EvalOptions {
    pub grid_points: usize,
    pub denominator: RmseDenominator,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            grid_points: DEFAULT_GRID_POINTS,
            denominator: RmseDenominator::NMinusOne,
        }
    }
}

/// Scores one dataset. PCC and RMSE use the raw predictions; RMSE_MAP and
/// the outlier ratio use predictions mapped by a cubic fitted on this
/// dataset alone.
pub fn evaluate_dataset(
    manifest: &DatasetManifest,
    predictions: &PredictionSet,
    opts: EvalOptions,
) -> Result<MetricReport> {
    let labels = manifest.labels()?;
    let missing: Vec<String> = labels
        .iter()
        .filter(|l| !predictions.entries.contains_key(&l.clip_id))
        .map(|l| l.clip_id.clone())
        .collect();
    if !missing.is_empty() {
        return Err(Error::Coverage {
            model_id: predictions.model_id.clone(),
            dataset: manifest.dataset.clone(),
            missing,
        });
    }
    if predictions.entries.len() != labels.len() {
        let known: BTreeSet<&str> = labels.iter().map(|l| l.clip_id.as_str()).collect();
        let extra: Vec<&str> = predictions
            .entries
            .keys()
            .map(String::as_str)
            .filter(|id| !known.contains(id))
            .collect();
        return Err(Error::Invalid(format!(
            "model `{}` scores clips not in dataset `{}`: {}",
            predictions.model_id,
            manifest.dataset,
            extra.join(", ")
        )));
    }

    let mos: Vec<f64> = labels.iter().map(|l| l.mos).collect();
    let ci: Vec<f64> = labels.iter().map(|l| l.ci95).collect();
    let preds: Vec<f64> = labels
        .iter()
        .map(|l| predictions.entries[&l.clip_id])
        .collect();

    let (rmse_map, fit) = rmse_map_with(&mos, &preds, opts.grid_points, opts.denominator)?;
    let mapped = apply_mapping(&fit.coefficients, &preds);
    Ok(MetricReport {
        dataset: manifest.dataset.clone(),
        model_id: predictions.model_id.clone(),
        pcc: pcc(&mos, &preds)?,
        rmse: rmse_with(&mos, &preds, opts.denominator)?,
        rmse_map,
        outlier_ratio: outlier_ratio_raw(&mos, &ci, &mapped)?,
        n: mos.len(),
        mapping: fit.coefficients,
        mapping_order: fit.order,
    })
}

/// Evaluates one model on every manifest. `predictions` is keyed by dataset
/// name and must cover every manifest.
pub fn evaluate_model(
    predictions: &BTreeMap<String, PredictionSet>,
    manifests: &[DatasetManifest],
    opts: EvalOptions,
) -> Result<Vec<MetricReport>> {
    let mut seen = BTreeSet::new();
    for m in manifests {
        if !seen.insert(m.dataset.as_str()) {
            return Err(Error::Invalid(format!(
                "dataset `{}` given twice",
                m.dataset
            )));
        }
        if !predictions.contains_key(&m.dataset) {
            return Err(Error::Invalid(format!(
                "no predictions for dataset `{}`",
                m.dataset
            )));
        }
    }
    if let Some(extra) = predictions.keys().find(|d| !seen.contains(d.as_str())) {
        return Err(Error::Invalid(format!(
            "predictions for unknown dataset `{extra}`"
        )));
    }
    manifests
        .par_iter()
        .map(|m| evaluate_dataset(m, &predictions[&m.dataset], opts))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatasetWeighting {
    /// Every dataset counts once.
    #[default]
    Unweighted,
    /// Datasets count in proportion to their clip count.
    ByClipCount,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeaderboardRow {
    pub rank: usize,
    pub model_id: String,
    pub mean_rmse_map: f64,
    pub mean_rmse: f64,
    pub mean_pcc: f64,
    pub mean_or: f64,
    /// Sorted by dataset name.
    pub reports: Vec<MetricReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Leaderboard {
    pub weighting: DatasetWeighting,
    /// Ascending by `mean_rmse_map`.
    pub rows: Vec<LeaderboardRow>,
}

impl Leaderboard {
    pub fn datasets(&self) -> Vec<String> {
        self.rows
            .first()
            .map(|r| r.reports.iter().map(|m| m.dataset.clone()).collect())
            .unwrap_or_default()
    }
}

fn weighted_mean(
    reports: &[MetricReport],
    weighting: DatasetWeighting,
    f: impl Fn(&MetricReport) -> f64,
) -> f64 {
    match weighting {
        DatasetWeighting::Unweighted => reports.iter().map(&f).sum::<f64>() / reports.len() as f64,
        DatasetWeighting::ByClipCount => {
            let total: usize = reports.iter().map(|r| r.n).sum();
            reports.iter().map(|r| f(r) * r.n as f64).sum::<f64>() / total as f64
        }
    }
}

/// Averages each model's per-dataset metrics and sorts ascending by mean
/// RMSE_MAP. Ties fall back to lower mean RMSE, then higher mean PCC, then
/// model id.
pub fn rank_models(reports: &[MetricReport], weighting: DatasetWeighting) -> Result<Leaderboard> {
    if reports.is_empty() {
        return Err(Error::Invalid("no reports to rank".into()));
    }
    let mut by_model: BTreeMap<&str, BTreeMap<&str, &MetricReport>> = BTreeMap::new();
    for r in reports {
        if by_model
            .entry(r.model_id.as_str())
            .or_default()
            .insert(r.dataset.as_str(), r)
            .is_some()
        {
            return Err(Error::Invalid(format!(
                "model `{}` has two reports for dataset `{}`",
                r.model_id, r.dataset
            )));
        }
    }
    let mut models = by_model.iter();
    let (first_id, first) = models.next().expect("non-empty");
    let datasets: Vec<&str> = first.keys().copied().collect();
    for (id, m) in models {
        let these: Vec<&str> = m.keys().copied().collect();
        if these != datasets {
            return Err(Error::Invalid(format!(
                "models cover different datasets: `{first_id}` has [{}], `{id}` has [{}]",
                datasets.join(", "),
                these.join(", ")
            )));
        }
    }

    let mut rows: Vec<LeaderboardRow> = by_model
        .iter()
        .map(|(id, m)| {
            let reports: Vec<MetricReport> = m.values().map(|r| (*r).clone()).collect();
            LeaderboardRow {
                rank: 0,
                model_id: id.to_string(),
                mean_rmse_map: weighted_mean(&reports, weighting, |r| r.rmse_map),
                mean_rmse: weighted_mean(&reports, weighting, |r| r.rmse),
                mean_pcc: weighted_mean(&reports, weighting, |r| r.pcc),
                mean_or: weighted_mean(&reports, weighting, |r| r.outlier_ratio),
                reports,
            }
        })
        .collect();
    rows.sort_by(|a, b| {
        a.mean_rmse_map
            .total_cmp(&b.mean_rmse_map)
            .then(a.mean_rmse.total_cmp(&b.mean_rmse))
            .then(b.mean_pcc.total_cmp(&a.mean_pcc))
            .then_with(|| a.model_id.cmp(&b.model_id))
    });
    for (i, r) in rows.iter_mut().enumerate() {
        r.rank = i + 1;
    }
    Ok(Leaderboard { weighting, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{MappingCoefficients, MosLabel};

    fn manifest(name: &str, mos: &[f64]) -> DatasetManifest {
        let labels = mos
            .iter()
            .enumerate()
            .map(|(i, m)| MosLabel {
                clip_id: format!("{name}{i}"),
                mos: *m,
                ci95: 0.1,
                n_ratings: 20,
            })
            .collect();
        DatasetManifest::from_labels(name, labels).unwrap()
    }

    fn preds(model: &str, m: &DatasetManifest, f: impl Fn(f64) -> f64) -> PredictionSet {
        let mut p = PredictionSet::new(model);
        for r in &m.rows {
            p.insert(r.clip_id.clone(), f(r.mos().unwrap())).unwrap();
        }
        p
    }

    fn report(model: &str, dataset: &str, rmse_map: f64, rmse: f64, pcc: f64) -> MetricReport {
        MetricReport {
            dataset: dataset.into(),
            model_id: model.into(),
            pcc,
            rmse,
            rmse_map,
            outlier_ratio: 0.0,
            n: 10,
            mapping: MappingCoefficients::identity(1.0, 5.0),
            mapping_order: 3,
        }
    }

    const MOS: [f64; 8] = [1.2, 2.0, 2.7, 3.1, 3.3, 3.9, 4.4, 4.8];

    #[test]
    fn perfect_model() {
        let m = manifest("a", &MOS);
        let mut p = BTreeMap::new();
        p.insert("a".to_string(), preds("m", &m, |x| x));
        let r = &evaluate_model(&p, &[m], EvalOptions::default()).unwrap()[0];
        assert!((r.pcc - 1.0).abs() < 1e-12);
        assert!(r.rmse < 1e-12 && r.rmse_map < 1e-9 && r.outlier_ratio == 0.0);
    }

    #[test]
    fn affine_distortion_absorbed() {
        let m = manifest("a", &MOS);
        let r = evaluate_dataset(
            &m,
            &preds("m", &m, |x| 2.0 * x - 3.0),
            EvalOptions::default(),
        )
        .unwrap();
        assert!(r.rmse > 0.5);
        assert!(r.rmse_map < 1e-6, "{}", r.rmse_map);
        assert_eq!(r.outlier_ratio, 0.0);
    }

    #[test]
    fn missing_clip_named() {
        let m = manifest("a", &MOS);
        let mut p = preds("m", &m, |x| x);
        p.entries.remove("a3");
        match evaluate_dataset(&m, &p, EvalOptions::default()).unwrap_err() {
            Error::Coverage { missing, .. } => assert_eq!(missing, vec!["a3".to_string()]),
            e => panic!("{e}"),
        }
        let mut p = preds("m", &m, |x| x);
        p.insert("zzz", 3.0).unwrap();
        assert!(evaluate_dataset(&m, &p, EvalOptions::default()).is_err());
    }

    #[test]
    fn ranking_order_and_ties() {
        let reports = vec![
            report("b", "x", 0.5, 0.6, 0.9),
            report("a", "x", 0.3, 0.4, 0.9),
        ];
        let lb = rank_models(&reports, DatasetWeighting::Unweighted).unwrap();
        assert_eq!(lb.rows[0].model_id, "a");
        assert_eq!((lb.rows[0].rank, lb.rows[1].rank), (1, 2));

        // Equal mean RMSE_MAP; lower RMSE wins.
        let reports = vec![
            report("A", "d1", 0.2, 0.5, 0.9),
            report("A", "d2", 0.4, 0.5, 0.9),
            report("B", "d1", 0.3, 0.4, 0.9),
            report("B", "d2", 0.3, 0.4, 0.9),
        ];
        let lb = rank_models(&reports, DatasetWeighting::Unweighted).unwrap();
        assert!((lb.rows[0].mean_rmse_map - lb.rows[1].mean_rmse_map).abs() < 1e-15);
        assert_eq!(lb.rows[0].model_id, "B");

        let single = rank_models(&reports[..1], DatasetWeighting::Unweighted).unwrap();
        assert_eq!(single.rows[0].rank, 1);
    }

    #[test]
    fn pcc_then_id_break_ties() {
        let reports = vec![
            report("b", "x", 0.3, 0.4, 0.9),
            report("c", "x", 0.3, 0.4, 0.95),
            report("a", "x", 0.3, 0.4, 0.9),
        ];
        let lb = rank_models(&reports, DatasetWeighting::Unweighted).unwrap();
        let ids: Vec<_> = lb.rows.iter().map(|r| r.model_id.as_str()).collect();
        assert_eq!(ids, ["c", "a", "b"]);
    }

    #[test]
    fn coverage_must_match() {
        let reports = vec![
            report("a", "x", 0.3, 0.4, 0.9),
            report("b", "y", 0.3, 0.4, 0.9),
        ];
        assert!(rank_models(&reports, DatasetWeighting::Unweighted).is_err());
    }

    #[test]
    fn clip_weighting() {
        let mut r1 = report("a", "x", 0.2, 0.2, 0.9);
        r1.n = 30;
        let r2 = report("a", "y", 0.6, 0.6, 0.9);
        let lb = rank_models(&[r1.clone(), r2.clone()], DatasetWeighting::ByClipCount).unwrap();
        assert!((lb.rows[0].mean_rmse_map - 0.3).abs() < 1e-12);
        let lb = rank_models(&[r1, r2], DatasetWeighting::Unweighted).unwrap();
        assert!((lb.rows[0].mean_rmse_map - 0.4).abs() < 1e-12);
    }
}
