#![allow(dead_code)]

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use mosbench::io::{save_audio, save_manifest};
use mosbench::model::{Clip, DatasetManifest, ManifestRow};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// Speech-like test signal: a few harmonics with a slow amplitude envelope
/// and a little noise.
pub fn tone_clip(id: &str, sample_rate: u32, secs: f64, seed: u64) -> Clip {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let f0 = rng.random_range(110.0..260.0);
    let level = rng.random_range(0.2..0.6);
    let n = (secs * sample_rate as f64) as usize;
    let samples = (0..n)
        .map(|i| {
            let t = i as f64 / sample_rate as f64;
            let env = 0.6 + 0.4 * (2.0 * PI * 3.0 * t).sin();
            let voiced: f64 = (1..=4)
                .map(|h| (2.0 * PI * f0 * h as f64 * t).sin() / h as f64)
                .sum();
            level * env * voiced / 2.0 + 0.005 * (rng.random::<f64>() - 0.5)
        })
        .collect();
    Clip::new(id, "synthetic", sample_rate, samples).unwrap()
}

pub fn noise_clip(id: &str, sample_rate: u32, secs: f64, seed: u64) -> Clip {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = (secs * sample_rate as f64) as usize;
    // Brown-ish noise: leaky integration of white noise.
    let mut state = 0.0;
    let samples = (0..n)
        .map(|_| {
            state = 0.97 * state + 0.05 * (rng.random::<f64>() - 0.5);
            state
        })
        .collect();
    Clip::new(id, "noise", sample_rate, samples).unwrap()
}

/// Writes `n` tone clips and their manifest into `dir`; returns the
/// manifest path.
pub fn write_corpus(dir: &Path, dataset: &str, n: usize, sample_rate: u32, secs: f64) -> PathBuf {
    fs::create_dir_all(dir.join("audio")).unwrap();
    let mut rows = Vec::new();
    for i in 0..n {
        let id = format!("c{i:03}");
        let rel = format!("audio/{id}.wav");
        save_audio(
            &tone_clip(&id, sample_rate, secs, i as u64 + 1),
            &dir.join(&rel),
        )
        .unwrap();
        rows.push(ManifestRow {
            clip_id: id,
            audio_path: Some(rel),
            label: None,
            condition: None,
        });
    }
    let path = dir.join("manifest.csv");
    save_manifest(&DatasetManifest::new(dataset, rows).unwrap(), &path).unwrap();
    path
}

/// SHA-256 of every `.wav` file in `dir`, keyed by file name.
pub fn wav_hashes(dir: &Path) -> BTreeMap<String, String> {
    let mut out = BTreeMap::new();
    for entry in fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "wav") {
            let digest = Sha256::digest(fs::read(&path).unwrap());
            let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
            out.insert(
                path.file_name().unwrap().to_string_lossy().into_owned(),
                hex,
            );
        }
    }
    out
}

pub fn mosbench_bin() -> &'static str {
    env!("CARGO_BIN_EXE_mosbench")
}
