//! Running a condition plan over a source corpus.

use std::fs;
use std::path::Path;

use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{load_audio, save_audio};
use crate::model::{Clip, DatasetManifest, ManifestRow};
use crate::seed::derive_seed;

use super::adapter::{run_external_adapter, AdapterCommand};
use super::dsp::{add_white_noise, clip_amplitude, mix_background_noise};
use super::filter::apply_filter;
use super::plan::{Assignment, CodecKind, ConditionPlan, ConditionSpec, FirstStage, SecondStage};

#[derive(Debug, Clone, Default)]
pub struct AdapterSet {
    pub amr: Option<AdapterCommand>,
    pub opus: Option<AdapterCommand>,
    pub ns: Option<AdapterCommand>,
    pub plc: Option<AdapterCommand>,
}

impl AdapterSet {
    fn get(&self, name: &str) -> Result<&AdapterCommand> {
        let slot = match name {
            "amr" => &self.amr,
            "opus" => &self.opus,
            "ns" => &self.ns,
            "plc" => &self.plc,
            _ => &None,
        };
        slot.as_ref().ok_or_else(|| Error::Adapter {
            command: String::new(),
            reason: format!("no `{name}` adapter configured"),
            diagnostics: String::new(),
        })
    }
}

#[derive(Debug, Clone, Default)]
pub struct ExecuteOptions {
    pub adapters: AdapterSet,
    /// Background noise recordings; each clip picks one by its seed.
    pub noise_pool: Vec<Clip>,
    /// Worker threads; `None` uses the global pool.
    pub workers: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedClip {
    pub clip_id: String,
    pub condition: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExecutionOutcome {
    pub manifest: DatasetManifest,
    pub skipped: Vec<SkippedClip>,
}

pub fn output_file_name(clip_id: &str, spec: &ConditionSpec) -> String {
    format!("{clip_id}__{}.wav", spec.condition_tag())
}

fn background<'a>(spec: &ConditionSpec, pool: &'a [Clip]) -> Result<&'a Clip> {
    if pool.is_empty() {
        return Err(Error::Invalid(
            "condition needs background noise but the noise pool is empty".into(),
        ));
    }
    let idx = derive_seed(spec.seed, "noise-file") % pool.len() as u64;
    Ok(&pool[idx as usize])
}

/// Applies the first- and second-stage chain of `spec` to `clip`.
pub fn apply_condition(clip: &Clip, spec: &ConditionSpec, opts: &ExecuteOptions) -> Result<Clip> {
    spec.validate()?;
    let p = &spec.params;
    let snr = || p.snr_db.expect("validated");
    let white = |c: &Clip| -> Result<Clip> {
        Ok(add_white_noise(c, snr(), derive_seed(spec.seed, "white"))?.clip)
    };
    let noise = |c: &Clip| -> Result<Clip> {
        let n = background(spec, &opts.noise_pool)?;
        Ok(mix_background_noise(c, n, snr(), derive_seed(spec.seed, "background"))?.clip)
    };
    let filter = |c: &Clip| -> Result<Clip> {
        let f = p.filter.expect("validated");
        apply_filter(c, f.kind, f.cutoff_hz)
    };
    let codec = |c: &Clip| -> Result<Clip> {
        let name = p.codec.map(CodecKind::tag).expect("validated");
        run_external_adapter(c, opts.adapters.get(name)?)
    };
    let clipping = |c: &Clip| clip_amplitude(c, p.clip_threshold.expect("validated"));

    let first = match spec.first_stage {
        FirstStage::Clean => clip.clone(),
        FirstStage::WhiteNoise => white(clip)?,
        FirstStage::BackgroundNoise => noise(clip)?,
        FirstStage::Highpass | FirstStage::Lowpass => filter(clip)?,
        FirstStage::Clipping => clipping(clip)?,
        FirstStage::Codec => codec(clip)?,
        FirstStage::NoiseCodec => codec(&noise(clip)?)?,
        FirstStage::WhiteCodec => codec(&white(clip)?)?,
        FirstStage::FilterCodec => codec(&filter(clip)?)?,
        FirstStage::ClippingBackground => noise(&clipping(clip)?)?,
    };
    match spec.second_stage {
        SecondStage::None => Ok(first),
        SecondStage::NoiseSuppression => run_external_adapter(&first, opts.adapters.get("ns")?),
        SecondStage::NoiseSuppressionPlc => {
            let ns = run_external_adapter(&first, opts.adapters.get("ns")?)?;
            run_external_adapter(&ns, opts.adapters.get("plc")?)
        }
        SecondStage::Plc => run_external_adapter(&first, opts.adapters.get("plc")?),
    }
}

fn check_writable(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    Ok(())
}

fn process_one(
    a: &Assignment,
    row: &ManifestRow,
    dataset: &str,
    source_root: &Path,
    out_dir: &Path,
    opts: &ExecuteOptions,
) -> Result<ManifestRow> {
    let rel = row
        .audio_path
        .as_deref()
        .ok_or_else(|| Error::Invalid(format!("clip `{}` has no audio path", a.clip_id)))?;
    let mut clip = load_audio(&source_root.join(rel))?;
    clip.clip_id = a.clip_id.clone();
    clip.dataset = dataset.to_string();
    let out = apply_condition(&clip, &a.spec, opts)?;
    let name = output_file_name(&a.clip_id, &a.spec);
    save_audio(&out, &out_dir.join(&name))?;
    Ok(ManifestRow {
        clip_id: a.clip_id.clone(),
        audio_path: Some(name),
        label: None,
        condition: Some(a.spec.condition_tag()),
    })
}

/// Processes every planned clip and writes `{clip_id}__{condition}.wav`
/// files into `out_dir`. Clips that fail are reported in
/// [`ExecutionOutcome::skipped`]. Output bytes do not depend on the worker
/// count.
pub fn execute_plan(
    plan: &ConditionPlan,
    source: &DatasetManifest,
    source_root: &Path,
    out_dir: &Path,
    opts: &ExecuteOptions,
) -> Result<ExecutionOutcome> {
    check_writable(out_dir)?;
    let rows: Vec<(&Assignment, &ManifestRow)> = plan
        .assignments
        .iter()
        .map(|a| {
            source
                .rows
                .iter()
                .find(|r| r.clip_id == a.clip_id)
                .map(|r| (a, r))
                .ok_or_else(|| {
                    Error::Invalid(format!(
                        "planned clip `{}` is not in the source manifest",
                        a.clip_id
                    ))
                })
        })
        .collect::<Result<_>>()?;

    let run = || -> Vec<Result<ManifestRow>> {
        rows.par_iter()
            .map(|(a, r)| process_one(a, r, &source.dataset, source_root, out_dir, opts))
            .collect()
    };
    let results = match opts.workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| Error::Invalid(format!("worker pool: {e}")))?
            .install(run),
        None => run(),
    };

    let mut out_rows = Vec::new();
    let mut skipped = Vec::new();
    for ((a, _), res) in rows.iter().zip(results) {
        match res {
            Ok(row) => out_rows.push(row),
            Err(e) => {
                warn!("skipping `{}` ({}): {e}", a.clip_id, a.spec.condition_tag());
                skipped.push(SkippedClip {
                    clip_id: a.clip_id.clone(),
                    condition: a.spec.condition_tag(),
                    reason: e.to_string(),
                });
            }
        }
    }
    info!(
        "processed {} clips, skipped {}",
        out_rows.len(),
        skipped.len()
    );
    Ok(ExecutionOutcome {
        manifest: DatasetManifest::new(source.dataset.clone(), out_rows)?,
        skipped,
    })
}
