//! Leaderboard tables, descriptive statistics and SVG plots on disk.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::io::{atomic_write, write_csv_rows};
use crate::model::{DatasetManifest, ACR_MIN};
use crate::ratings::DescriptiveStats;

use super::svg;
use super::Leaderboard;

pub const HISTOGRAM_BIN_WIDTH: f64 = 0.25;
pub const HISTOGRAM_BINS: usize = 16;

pub const LEADERBOARD_HEADER: [&str; 6] = [
    "rank",
    "model_id",
    "mean_rmse_map",
    "mean_rmse",
    "mean_pcc",
    "mean_or",
];

pub const DETAIL_HEADER: [&str; 15] = [
    "model_id",
    "dataset",
    "n",
    "pcc",
    "rmse",
    "rmse_map",
    "outlier_ratio",
    "a",
    "b",
    "c",
    "d",
    "range_lo",
    "range_hi",
    "mapping_order",
    "rank",
];

/// Counts per 0.25-wide bin over [1, 5]. Bins are closed on the left; the
/// last one also holds 5.0.
pub fn mos_histogram(mos: &[f64]) -> [usize; HISTOGRAM_BINS] {
    let mut counts = [0; HISTOGRAM_BINS];
    for &m in mos {
        let bin = ((m - ACR_MIN) / HISTOGRAM_BIN_WIDTH).floor();
        let bin = (bin.max(0.0) as usize).min(HISTOGRAM_BINS - 1);
        counts[bin] += 1;
    }
    counts
}

/// Turns a dataset name into something safe for a file name.
fn file_stem(name: &str) -> String {
    name.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

pub fn leaderboard_rows(lb: &Leaderboard) -> Vec<Vec<String>> {
    lb.rows
        .iter()
        .map(|r| {
            vec![
                r.rank.to_string(),
                r.model_id.clone(),
                format!("{:.6}", r.mean_rmse_map),
                format!("{:.6}", r.mean_rmse),
                format!("{:.6}", r.mean_pcc),
                format!("{:.6}", r.mean_or),
            ]
        })
        .collect()
}

fn detail_rows(lb: &Leaderboard) -> Vec<Vec<String>> {
    let mut rows = Vec::new();
    for r in &lb.rows {
        for m in &r.reports {
            let c = &m.mapping;
            rows.push(vec![
                r.model_id.clone(),
                m.dataset.clone(),
                m.n.to_string(),
                m.pcc.to_string(),
                m.rmse.to_string(),
                m.rmse_map.to_string(),
                m.outlier_ratio.to_string(),
                c.a.to_string(),
                c.b.to_string(),
                c.c.to_string(),
                c.d.to_string(),
                c.range_lo.to_string(),
                c.range_hi.to_string(),
                m.mapping_order.to_string(),
                r.rank.to_string(),
            ]);
        }
    }
    rows
}

/// Writes into `out_dir`:
///
/// * `leaderboard.csv`, `leaderboard.json` and `leaderboard_detail.csv`
///   (per model and dataset, with mapping coefficients)
/// * `stats.csv`
/// * `mos_hist_<dataset>.svg` for every manifest with labels
/// * `metrics_<dataset>.svg` for every dataset on the leaderboard
pub fn render_report(
    leaderboard: &Leaderboard,
    stats: &[DescriptiveStats],
    manifests: &[DatasetManifest],
    out_dir: &Path,
) -> Result<()> {
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;

    write_csv_rows(
        &out_dir.join("leaderboard.csv"),
        &LEADERBOARD_HEADER,
        &leaderboard_rows(leaderboard),
    )?;
    write_csv_rows(
        &out_dir.join("leaderboard_detail.csv"),
        &DETAIL_HEADER,
        &detail_rows(leaderboard),
    )?;
    let json = serde_json::to_vec_pretty(leaderboard)?;
    atomic_write(&out_dir.join("leaderboard.json"), &json)?;

    let stat_rows: Vec<Vec<String>> = stats.iter().map(DescriptiveStats::table_row).collect();
    write_csv_rows(
        &out_dir.join("stats.csv"),
        &DescriptiveStats::HEADER,
        &stat_rows,
    )?;

    for m in manifests {
        let mos: Vec<f64> = m.labels()?.iter().map(|l| l.mos).collect();
        let svg = svg::histogram(
            &format!("MOS distribution: {} ({} clips)", m.dataset, mos.len()),
            ACR_MIN,
            HISTOGRAM_BIN_WIDTH,
            &mos_histogram(&mos),
        );
        let path = out_dir.join(format!("mos_hist_{}.svg", file_stem(&m.dataset)));
        atomic_write(&path, svg.as_bytes())?;
    }

    let models: Vec<String> = leaderboard
        .rows
        .iter()
        .map(|r| r.model_id.clone())
        .collect();
    for (d, dataset) in leaderboard.datasets().iter().enumerate() {
        let values: Vec<Vec<f64>> = leaderboard
            .rows
            .iter()
            .map(|r| {
                let m = &r.reports[d];
                vec![m.pcc, m.rmse, m.rmse_map, m.outlier_ratio]
            })
            .collect();
        let svg = svg::grouped_bars(
            &format!("Results on {dataset}"),
            &["PCC", "RMSE", "RMSE_MAP", "OR"],
            &models,
            &values,
        );
        let path = out_dir.join(format!("metrics_{}.svg", file_stem(dataset)));
        atomic_write(&path, svg.as_bytes())?;
    }
    Ok(())
}
