//! `mosbench` command line.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::config::Config;
use crate::degradation::execute::{execute_plan, ExecuteOptions};
use crate::degradation::plan::{sample_plan, ConditionPlan};
use crate::degradation::vad::segment_speech;
use crate::error::{Error, Result};
use crate::io::{
    atomic_write, load_audio, load_manifest, load_predictions, load_ratings, save_audio,
    save_manifest, write_csv_rows,
};
use crate::metrics::MetricReport;
use crate::model::{DatasetManifest, ManifestRow};
use crate::ratings::{aggregate_ratings, descriptive_stats, stratified_split, DescriptiveStats};

use super::report::{leaderboard_rows, LEADERBOARD_HEADER};
use super::{
    evaluate_model, rank_models, render_report, DatasetWeighting, EvalOptions, Leaderboard,
};

#[derive(Debug, Parser)]
#[command(name = "mosbench", version, about = "Speech quality benchmark toolkit")]
pub struct Cli {
    /// JSON configuration file.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Master seed; overrides the config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Average raw votes into MOS labels.
    Aggregate(AggregateArgs),
    /// Per-dataset descriptive statistics of the labels.
    Stats(StatsArgs),
    /// Stratified train/eval split of a manifest.
    Split(SplitArgs),
    /// Assign degradation conditions to the clips of a manifest.
    Plan(PlanArgs),
    /// Render a degraded corpus from a plan.
    Degrade(DegradeArgs),
    /// Cut long recordings into fixed-length active-speech clips.
    Segment(SegmentArgs),
    /// Score one model's predictions against labelled datasets.
    Evaluate(EvaluateArgs),
    /// Rank models from their evaluation reports.
    Rank(RankArgs),
    /// Write tables and plots for a leaderboard.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct AggregateArgs {
    #[arg(long)]
    pub ratings: PathBuf,
    /// Output manifest with labels.
    #[arg(long)]
    pub out: PathBuf,
    /// Existing manifest whose rows receive the labels.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Dataset name when no manifest is given.
    #[arg(long, default_value = "dataset")]
    pub dataset: String,
    #[arg(long)]
    pub min_votes: Option<usize>,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[arg(long = "manifest", required = true)]
    pub manifests: Vec<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SplitArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long, default_value_t = 0.8)]
    pub train_fraction: f64,
    #[arg(long)]
    pub train_out: PathBuf,
    #[arg(long)]
    pub eval_out: PathBuf,
}

#[derive(Debug, Args)]
pub struct PlanArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Plan JSON to write.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct DegradeArgs {
    /// Source manifest; audio paths are relative to its directory.
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Plan JSON from `plan`; sampled from the config when omitted.
    #[arg(long)]
    pub plan: Option<PathBuf>,
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SegmentArgs {
    #[arg(long = "input", required = true)]
    pub inputs: Vec<PathBuf>,
    #[arg(long)]
    pub out_dir: PathBuf,
    #[arg(long, default_value = "segments")]
    pub dataset: String,
    #[arg(long, default_value_t = 10.0)]
    pub seconds: f64,
    #[arg(long, default_value_t = 0.5)]
    pub min_activity: f64,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Labelled manifest; repeat for several datasets.
    #[arg(long = "labels", required = true)]
    pub labels: Vec<PathBuf>,
    /// Predictions CSV, one per `--labels` in the same order.
    #[arg(long = "preds", required = true)]
    pub preds: Vec<PathBuf>,
    /// Defaults to the stem of the first predictions file.
    #[arg(long)]
    pub model_id: Option<String>,
    /// Write the reports as JSON for `rank`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RankArgs {
    /// Reports JSON from `evaluate`; repeat per model.
    #[arg(long = "reports", required = true)]
    pub reports: Vec<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Weight datasets by clip count instead of equally.
    #[arg(long)]
    pub weight_by_clip_count: bool,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[arg(long)]
    pub leaderboard: PathBuf,
    /// Labelled manifests for histograms and the statistics table.
    #[arg(long = "manifest")]
    pub manifests: Vec<PathBuf>,
    #[arg(long)]
    pub out_dir: PathBuf,
}

struct Context {
    config: Config,
    seed: u64,
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    atomic_write(path, &bytes)
}

fn aggregate(ctx: &Context, a: &AggregateArgs) -> Result<()> {
    let records = load_ratings(&a.ratings)?;
    let agg = aggregate_ratings(&records, a.min_votes.unwrap_or(ctx.config.min_votes))?;
    for e in &agg.excluded {
        eprintln!(
            "excluded {} ({}, {} votes)",
            e.clip_id, e.reason, e.n_ratings
        );
    }
    if agg.duplicates_removed > 0 {
        eprintln!("removed {} duplicate votes", agg.duplicates_removed);
    }
    for (clip, rater) in &agg.conflicting_votes {
        eprintln!("rater {rater} gave conflicting votes for {clip}");
    }
    let manifest = match &a.manifest {
        None => DatasetManifest::from_labels(a.dataset.clone(), agg.labels.clone())?,
        Some(path) => {
            let source = load_manifest(path)?;
            let mut by_id: BTreeMap<&str, _> =
                agg.labels.iter().map(|l| (l.clip_id.as_str(), l)).collect();
            let mut rows = Vec::new();
            for row in &source.rows {
                match by_id.remove(row.clip_id.as_str()) {
                    Some(l) => rows.push(ManifestRow {
                        label: Some(l.clone()),
                        ..row.clone()
                    }),
                    None => eprintln!("no label for {}; dropped", row.clip_id),
                }
            }
            if !by_id.is_empty() {
                let ids: Vec<&str> = by_id.keys().copied().collect();
                return Err(Error::Invalid(format!(
                    "ratings for clips not in the manifest: {}",
                    ids.join(", ")
                )));
            }
            DatasetManifest::new(source.dataset, rows)?
        }
    };
    save_manifest(&manifest, &a.out)?;
    println!(
        "labels={} excluded={} dataset={}",
        manifest.len(),
        agg.excluded.len(),
        manifest.dataset
    );
    Ok(())
}

fn stats(a: &StatsArgs) -> Result<()> {
    let manifests = a
        .manifests
        .iter()
        .map(|p| load_manifest(p))
        .collect::<Result<Vec<_>>>()?;
    let stats = descriptive_stats(&manifests)?;
    let rows: Vec<Vec<String>> = stats.iter().map(DescriptiveStats::table_row).collect();
    println!("{}", DescriptiveStats::HEADER.join(", "));
    for r in &rows {
        println!("{}", r.join(", "));
    }
    if let Some(out) = &a.out {
        write_csv_rows(out, &DescriptiveStats::HEADER, &rows)?;
    }
    Ok(())
}

fn split(ctx: &Context, a: &SplitArgs) -> Result<()> {
    let m = load_manifest(&a.manifest)?;
    let (train, eval) = stratified_split(&m, a.train_fraction, ctx.config.mos_bins, ctx.seed)?;
    save_manifest(&train, &a.train_out)?;
    save_manifest(&eval, &a.eval_out)?;
    println!("train={} eval={}", train.len(), eval.len());
    Ok(())
}

fn make_plan(ctx: &Context, manifest: &DatasetManifest) -> Result<ConditionPlan> {
    let ids: Vec<String> = manifest.rows.iter().map(|r| r.clip_id.clone()).collect();
    sample_plan(
        &ids,
        &ctx.config.first_step_weights()?,
        &ctx.config.second_step_weights()?,
        ctx.seed,
        &ctx.config.param_ranges(),
    )
}

fn plan(ctx: &Context, a: &PlanArgs) -> Result<()> {
    let plan = make_plan(ctx, &load_manifest(&a.manifest)?)?;
    write_json(&a.out, &plan)?;
    for (tag, n) in plan.condition_counts() {
        println!("{tag}={n}");
    }
    Ok(())
}

fn degrade(ctx: &Context, a: &DegradeArgs) -> Result<usize> {
    let source = load_manifest(&a.manifest)?;
    let plan = match &a.plan {
        Some(p) => read_json(p)?,
        None => make_plan(ctx, &source)?,
    };
    let noise_pool = ctx
        .config
        .noise_files
        .iter()
        .map(|p| load_audio(p))
        .collect::<Result<Vec<_>>>()?;
    let opts = ExecuteOptions {
        adapters: ctx.config.adapter_set()?,
        noise_pool,
        workers: a.workers.or(ctx.config.workers),
    };
    let root = a.manifest.parent().unwrap_or(Path::new(""));
    let outcome = execute_plan(&plan, &source, root, &a.out_dir, &opts)?;
    save_manifest(&outcome.manifest, &a.out_dir.join("manifest.csv"))?;
    if !outcome.skipped.is_empty() {
        let rows: Vec<Vec<String>> = outcome
            .skipped
            .iter()
            .map(|s| vec![s.clip_id.clone(), s.condition.clone(), s.reason.clone()])
            .collect();
        write_csv_rows(
            &a.out_dir.join("skipped.csv"),
            &["clip_id", "condition", "reason"],
            &rows,
        )?;
        for s in &outcome.skipped {
            eprintln!("skipped {} ({}): {}", s.clip_id, s.condition, s.reason);
        }
    }
    println!(
        "written={} skipped={}",
        outcome.manifest.len(),
        outcome.skipped.len()
    );
    Ok(outcome.skipped.len())
}

fn segment(a: &SegmentArgs) -> Result<()> {
    fs::create_dir_all(&a.out_dir).map_err(|e| Error::io(&a.out_dir, e))?;
    let mut rows = Vec::new();
    for input in &a.inputs {
        let clip = load_audio(input)?;
        for seg in segment_speech(&clip, a.seconds, a.min_activity) {
            let name = format!("{}.wav", seg.clip_id);
            save_audio(&seg, &a.out_dir.join(&name))?;
            rows.push(ManifestRow {
                clip_id: seg.clip_id,
                audio_path: Some(name),
                label: None,
                condition: None,
            });
        }
    }
    if rows.is_empty() {
        return Err(Error::Invalid(
            "no segment met the activity threshold".into(),
        ));
    }
    let n = rows.len();
    save_manifest(
        &DatasetManifest::new(a.dataset.clone(), rows)?,
        &a.out_dir.join("manifest.csv"),
    )?;
    println!("segments={n}");
    Ok(())
}

fn evaluate(ctx: &Context, a: &EvaluateArgs) -> Result<()> {
    if a.labels.len() != a.preds.len() {
        return Err(Error::Invalid(format!(
            "{} --labels but {} --preds",
            a.labels.len(),
            a.preds.len()
        )));
    }
    let model_id = a.model_id.clone().unwrap_or_else(|| {
        a.preds[0]
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "model".into())
    });
    let mut manifests = Vec::new();
    let mut predictions = BTreeMap::new();
    for (l, p) in a.labels.iter().zip(&a.preds) {
        let m = load_manifest(l)?;
        let set = load_predictions(p, Some(&model_id))?;
        if predictions.insert(m.dataset.clone(), set).is_some() {
            return Err(Error::Invalid(format!(
                "dataset `{}` given twice",
                m.dataset
            )));
        }
        manifests.push(m);
    }
    let opts = EvalOptions {
        grid_points: ctx.config.grid_points,
        denominator: ctx.config.rmse_denominator,
    };
    let reports = evaluate_model(&predictions, &manifests, opts)?;
    for r in &reports {
        println!(
            "dataset={} model={} n={} pcc={:.3} rmse={:.3} rmse_map={:.3} or={:.3}",
            r.dataset, r.model_id, r.n, r.pcc, r.rmse, r.rmse_map, r.outlier_ratio
        );
    }
    if let Some(out) = &a.out {
        write_json(out, &reports)?;
    }
    Ok(())
}

fn rank(ctx: &Context, a: &RankArgs) -> Result<()> {
    let mut reports: Vec<MetricReport> = Vec::new();
    for p in &a.reports {
        reports.extend(read_json::<Vec<MetricReport>>(p)?);
    }
    let weighting = if a.weight_by_clip_count || ctx.config.weight_by_clip_count {
        DatasetWeighting::ByClipCount
    } else {
        DatasetWeighting::Unweighted
    };
    let lb = rank_models(&reports, weighting)?;
    println!("{}", LEADERBOARD_HEADER.join(","));
    for row in leaderboard_rows(&lb) {
        println!("{}", row.join(","));
    }
    if let Some(out) = &a.out {
        write_json(out, &lb)?;
    }
    Ok(())
}

fn report(a: &ReportArgs) -> Result<()> {
    let lb: Leaderboard = read_json(&a.leaderboard)?;
    let manifests = a
        .manifests
        .iter()
        .map(|p| load_manifest(p))
        .collect::<Result<Vec<_>>>()?;
    let stats = descriptive_stats(&manifests)?;
    render_report(&lb, &stats, &manifests, &a.out_dir)?;
    println!("report written to {}", a.out_dir.display());
    Ok(())
}

fn exit_code(e: &Error) -> i32 {
    if e.is_environmental() {
        2
    } else {
        1
    }
}

fn dispatch(cli: &Cli) -> Result<i32> {
    let config = match &cli.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    let seed = cli.seed.unwrap_or(config.seed);
    let ctx = Context { config, seed };
    match &cli.command {
        Command::Aggregate(a) => aggregate(&ctx, a)?,
        Command::Stats(a) => stats(a)?,
        Command::Split(a) => split(&ctx, a)?,
        Command::Plan(a) => plan(&ctx, a)?,
        Command::Degrade(a) => {
            // Partial output is kept, but a run with skipped clips is not
            // a success.
            if degrade(&ctx, a)? > 0 {
                return Ok(2);
            }
        }
        Command::Segment(a) => segment(a)?,
        Command::Evaluate(a) => evaluate(&ctx, a)?,
        Command::Rank(a) => rank(&ctx, a)?,
        Command::Report(a) => report(a)?,
    }
    Ok(0)
}

/// Parses `argv` (including the program name), runs the subcommand and
/// returns the process exit code: 0 on success, 1 for invalid input or
/// usage, 2 for I/O and adapter failures.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match dispatch(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
