//! File formats: manifest, ratings and prediction CSVs, 16-bit PCM WAV.
//!
//! Every writer goes through [`atomic_write`] (temporary file in the target
//! directory, then rename) so readers never observe a half-written file.

use std::fs::File;
use std::io::{BufReader, Write};
use std::path::Path;

use hound::{SampleFormat, WavReader, WavSpec, WavWriter};
use tempfile::NamedTempFile;

use crate::error::{Error, Result};
use crate::model::{Clip, DatasetManifest, ManifestRow, MosLabel, PredictionSet, RatingRecord};

pub const MANIFEST_HEADER: [&str; 7] = [
    "clip_id",
    "dataset",
    "audio_path",
    "mos",
    "ci95",
    "n_ratings",
    "condition",
];
pub const RATINGS_HEADER: [&str; 3] = ["clip_id", "rater_id", "rating"];
pub const PREDICTIONS_HEADER: [&str; 2] = ["clip_id", "score"];

/// Largest amplitude representable in 16-bit PCM, `1 - 2^-15`.
pub const PCM16_MAX: f64 = 1.0 - 1.0 / 32768.0;

fn temp_in(path: &Path) -> Result<NamedTempFile> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))
}

fn persist(tmp: NamedTempFile, path: &Path) -> Result<()> {
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut tmp = temp_in(path)?;
    tmp.write_all(bytes).map_err(|e| Error::io(path, e))?;
    tmp.flush().map_err(|e| Error::io(path, e))?;
    persist(tmp, path)
}

fn open_csv(path: &Path) -> Result<csv::Reader<File>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(file))
}

/// Maps header names to column indices, requiring every name in `expected`.
fn header_index(
    reader: &mut csv::Reader<File>,
    path: &Path,
    expected: &[&str],
) -> Result<Vec<usize>> {
    let headers = reader.headers()?.clone();
    expected
        .iter()
        .map(|name| {
            headers
                .iter()
                .position(|h| h == *name)
                .ok_or_else(|| Error::Parse {
                    path: path.to_path_buf(),
                    line: 1,
                    column: (*name).to_string(),
                    message: "missing from header".into(),
                })
        })
        .collect()
}

struct Cells<'a> {
    record: &'a csv::StringRecord,
    index: &'a [usize],
    names: &'a [&'a str],
    path: &'a Path,
    line: u64,
}

impl Cells<'_> {
    fn raw(&self, col: usize) -> &str {
        self.record.get(self.index[col]).unwrap_or("")
    }

    fn err(&self, col: usize, message: impl Into<String>) -> Error {
        Error::Parse {
            path: self.path.to_path_buf(),
            line: self.line,
            column: self.names[col].to_string(),
            message: message.into(),
        }
    }

    fn text(&self, col: usize) -> Result<String> {
        let s = self.raw(col);
        if s.is_empty() {
            Err(self.err(col, "empty value"))
        } else {
            Ok(s.to_string())
        }
    }

    fn optional(&self, col: usize) -> Option<String> {
        let s = self.raw(col);
        (!s.is_empty()).then(|| s.to_string())
    }

    fn real(&self, col: usize) -> Result<f64> {
        let s = self.raw(col);
        let v: f64 = s
            .parse()
            .map_err(|_| self.err(col, format!("`{s}` is not a number")))?;
        if !v.is_finite() {
            return Err(self.err(col, format!("`{s}` is not finite")));
        }
        Ok(v)
    }
}

fn for_each_row(
    path: &Path,
    names: &[&str],
    mut f: impl FnMut(&Cells<'_>) -> Result<()>,
) -> Result<()> {
    let mut reader = open_csv(path)?;
    let index = header_index(&mut reader, path, names)?;
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: i as u64 + 2,
            column: String::new(),
            message: e.to_string(),
        })?;
        let cells = Cells {
            record: &record,
            index: &index,
            names,
            path,
            line: record.position().map(|p| p.line()).unwrap_or(i as u64 + 2),
        };
        f(&cells)?;
    }
    Ok(())
}

/// Reads and validates a manifest. All rows must name the same dataset.
pub fn load_manifest(path: &Path) -> Result<DatasetManifest> {
    let mut dataset: Option<String> = None;
    let mut rows = Vec::new();
    for_each_row(path, &MANIFEST_HEADER, |c| {
        let clip_id = c.text(0)?;
        let ds = c.text(1)?;
        match &dataset {
            None => dataset = Some(ds),
            Some(d) if *d != ds => {
                return Err(c.err(1, format!("dataset `{ds}` differs from `{d}`")));
            }
            _ => {}
        }
        let present = [3, 4, 5].map(|col| !c.raw(col).is_empty());
        let label = if present.iter().all(|p| *p) {
            let mos = c.real(3)?;
            if !(1.0..=5.0).contains(&mos) {
                return Err(c.err(3, format!("mos {mos} outside [1, 5]")));
            }
            let ci95 = c.real(4)?;
            if ci95 < 0.0 {
                return Err(c.err(4, format!("ci95 {ci95} is negative")));
            }
            let n = c.raw(5);
            let n_ratings: u32 = n
                .parse()
                .ok()
                .filter(|n| *n > 0)
                .ok_or_else(|| c.err(5, format!("`{n}` is not a positive integer")))?;
            Some(MosLabel {
                clip_id: clip_id.clone(),
                mos,
                ci95,
                n_ratings,
            })
        } else if present.iter().any(|p| *p) {
            let col = [3, 4, 5][present.iter().position(|p| !*p).unwrap()];
            return Err(c.err(col, "mos, ci95 and n_ratings must be given together"));
        } else {
            None
        };
        rows.push(ManifestRow {
            clip_id,
            audio_path: c.optional(2),
            label,
            condition: c.optional(6),
        });
        Ok(())
    })?;
    let dataset = dataset.ok_or_else(|| Error::Invalid(format!("{}: no rows", path.display())))?;
    DatasetManifest::new(dataset, rows)
}

pub fn manifest_to_csv(manifest: &DatasetManifest) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(MANIFEST_HEADER)?;
    for row in &manifest.rows {
        let (mos, ci, n) = match &row.label {
            Some(l) => (
                l.mos.to_string(),
                l.ci95.to_string(),
                l.n_ratings.to_string(),
            ),
            None => Default::default(),
        };
        w.write_record([
            row.clip_id.as_str(),
            manifest.dataset.as_str(),
            row.audio_path.as_deref().unwrap_or(""),
            &mos,
            &ci,
            &n,
            row.condition.as_deref().unwrap_or(""),
        ])?;
    }
    w.into_inner()
        .map_err(|e| Error::io("<manifest buffer>", e.into_error()))
}

pub fn save_manifest(manifest: &DatasetManifest, path: &Path) -> Result<()> {
    manifest.validate()?;
    atomic_write(path, &manifest_to_csv(manifest)?)
}

pub fn load_ratings(path: &Path) -> Result<Vec<RatingRecord>> {
    let mut out = Vec::new();
    for_each_row(path, &RATINGS_HEADER, |c| {
        let rec = RatingRecord {
            clip_id: c.text(0)?,
            rater_id: c.text(1)?,
            rating: c.real(2)?,
        };
        rec.validate().map_err(|e| c.err(2, e.to_string()))?;
        out.push(rec);
        Ok(())
    })?;
    Ok(out)
}

pub fn save_ratings(records: &[RatingRecord], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(RATINGS_HEADER)?;
    for r in records {
        w.write_record([
            r.clip_id.as_str(),
            r.rater_id.as_str(),
            &r.rating.to_string(),
        ])?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::io(path, e.into_error()))?;
    atomic_write(path, &bytes)
}

/// Reads a `clip_id,score` file. Without an explicit `model_id` the file
/// stem is used.
pub fn load_predictions(path: &Path, model_id: Option<&str>) -> Result<PredictionSet> {
    let model_id = match model_id {
        Some(m) => m.to_string(),
        None => path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "model".into()),
    };
    let mut set = PredictionSet::new(model_id);
    for_each_row(path, &PREDICTIONS_HEADER, |c| {
        let clip_id = c.text(0)?;
        let score = c.real(1)?;
        set.insert(clip_id, score)
            .map_err(|e| c.err(0, e.to_string()))
    })?;
    Ok(set)
}

pub fn save_predictions(set: &PredictionSet, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(PREDICTIONS_HEADER)?;
    for (id, score) in &set.entries {
        w.write_record([id.as_str(), &score.to_string()])?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::io(path, e.into_error()))?;
    atomic_write(path, &bytes)
}

/// Writes rows of a simple CSV table atomically.
pub fn write_csv_rows(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::io(path, e.into_error()))?;
    atomic_write(path, &bytes)
}

fn wav_err(path: &Path, e: hound::Error) -> Error {
    match e {
        hound::Error::IoError(io) if io.kind() == std::io::ErrorKind::UnexpectedEof => {
            Error::Invalid(format!("{}: truncated WAV file", path.display()))
        }
        hound::Error::IoError(io) if io.kind() == std::io::ErrorKind::NotFound => {
            Error::io(path, io)
        }
        hound::Error::Unsupported => {
            Error::UnsupportedEncoding(format!("{}: unsupported WAV layout", path.display()))
        }
        source => Error::Wav {
            path: path.to_path_buf(),
            source,
        },
    }
}

/// Decodes a 16-bit integer PCM WAV (mono or stereo) into a mono clip whose
/// id is the file stem. Stereo frames are averaged.
pub fn load_audio(path: &Path) -> Result<Clip> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = WavReader::new(BufReader::new(file)).map_err(|e| wav_err(path, e))?;
    let spec = reader.spec();
    if spec.sample_format != SampleFormat::Int || spec.bits_per_sample != 16 {
        let kind = match spec.sample_format {
            SampleFormat::Int => "integer PCM",
            SampleFormat::Float => "float",
        };
        return Err(Error::UnsupportedEncoding(format!(
            "{}: {}-bit {kind} (only 16-bit integer PCM is accepted)",
            path.display(),
            spec.bits_per_sample
        )));
    }
    if !(1..=2).contains(&spec.channels) {
        return Err(Error::UnsupportedEncoding(format!(
            "{}: {} channels",
            path.display(),
            spec.channels
        )));
    }
    let expected = reader.len() as usize;
    let raw: Vec<i16> = reader
        .into_samples::<i16>()
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| wav_err(path, e))?;
    if raw.len() != expected || !raw.len().is_multiple_of(spec.channels as usize) {
        return Err(Error::Invalid(format!(
            "{}: truncated WAV file",
            path.display()
        )));
    }
    let samples = if spec.channels == 1 {
        raw.iter().map(|&s| s as f64 / 32768.0).collect()
    } else {
        raw.chunks_exact(2)
            .map(|f| (f[0] as f64 + f[1] as f64) / 2.0 / 32768.0)
            .collect()
    };
    let clip_id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    Clip::new(clip_id, "", spec.sample_rate, samples)
}

/// Clamps to `[-1, 1 - 2^-15]` and rounds to the nearest 16-bit code.
pub fn quantize(x: f64) -> i16 {
    (x.clamp(-1.0, PCM16_MAX) * 32768.0).round() as i16
}

pub fn encode_wav(clip: &Clip) -> Result<Vec<u8>> {
    clip.require_non_empty()?;
    if let Some(i) = clip.samples.iter().position(|s| !s.is_finite()) {
        return Err(Error::Invalid(format!(
            "clip `{}`: sample {i} is not finite",
            clip.clip_id
        )));
    }
    let spec = WavSpec {
        channels: 1,
        sample_rate: clip.sample_rate,
        bits_per_sample: 16,
        sample_format: SampleFormat::Int,
    };
    let mut buf = std::io::Cursor::new(Vec::with_capacity(44 + 2 * clip.samples.len()));
    {
        let mut w =
            WavWriter::new(&mut buf, spec).map_err(|e| wav_err(Path::new("<buffer>"), e))?;
        let mut w16 = w.get_i16_writer(clip.samples.len() as u32);
        for &s in &clip.samples {
            w16.write_sample(quantize(s));
        }
        w16.flush().map_err(|e| wav_err(Path::new("<buffer>"), e))?;
        w.finalize()
            .map_err(|e| wav_err(Path::new("<buffer>"), e))?;
    }
    Ok(buf.into_inner())
}

pub fn save_audio(clip: &Clip, path: &Path) -> Result<()> {
    atomic_write(path, &encode_wav(clip)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::fs;

    fn write_raw_wav(path: &Path, channels: u16, bits: u16, samples: &[i32]) {
        let spec = WavSpec {
            channels,
            sample_rate: 16000,
            bits_per_sample: bits,
            sample_format: SampleFormat::Int,
        };
        let mut w = WavWriter::create(path, spec).unwrap();
        for &s in samples {
            w.write_sample(s).unwrap();
        }
        w.finalize().unwrap();
    }

    #[test]
    fn mono_scaling() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.wav");
        write_raw_wav(&p, 1, 16, &[0, 16384, -32768]);
        let clip = load_audio(&p).unwrap();
        assert_eq!(clip.samples, vec![0.0, 0.5, -1.0]);
        assert_eq!(clip.clip_id, "m");
    }

    #[test]
    fn stereo_is_averaged() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.wav");
        // 32767 is the closest code to 1.0; the average is then 32767/65536.
        write_raw_wav(&p, 2, 16, &[32767, 0, -16384, -16384]);
        let clip = load_audio(&p).unwrap();
        assert_eq!(clip.samples.len(), 2);
        assert!((clip.samples[0] - 0.5).abs() <= 1.0 / 32768.0);
        assert_eq!(clip.samples[1], -0.5);
    }

    #[test]
    fn rejects_24_bit() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("deep.wav");
        write_raw_wav(&p, 1, 24, &[0, 1, 2]);
        let err = load_audio(&p).unwrap_err();
        match err {
            Error::UnsupportedEncoding(msg) => assert!(msg.contains("24-bit"), "{msg}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_truncated() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.wav");
        write_raw_wav(&p, 1, 16, &[1; 100]);
        let bytes = fs::read(&p).unwrap();
        fs::write(&p, &bytes[..bytes.len() - 51]).unwrap();
        assert!(load_audio(&p).is_err());
    }

    #[test]
    fn save_clamps_and_rejects_empty() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.wav");
        let clip = Clip::new("c", "d", 8000, vec![0.0, 0.5, 1.5, -3.0]).unwrap();
        save_audio(&clip, &p).unwrap();
        let back = load_audio(&p).unwrap();
        assert_eq!(back.samples, vec![0.0, 0.5, PCM16_MAX, -1.0]);

        let empty = Clip::new("e", "d", 8000, vec![]).unwrap();
        assert!(save_audio(&empty, &dir.path().join("e.wav")).is_err());
    }

    #[test]
    fn manifest_errors_name_line_and_column() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.csv");
        fs::write(
            &p,
            "clip_id,dataset,audio_path,mos,ci95,n_ratings,condition\n\
             c1,d,,3.0,0.1,5,\n\
             c2,d,,abc,0.1,5,\n",
        )
        .unwrap();
        match load_manifest(&p).unwrap_err() {
            Error::Parse { line, column, .. } => {
                assert_eq!(line, 3);
                assert_eq!(column, "mos");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn manifest_checks() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.csv");
        fs::write(
            &p,
            "clip_id,dataset,audio_path,mos,ci95,n_ratings,condition\n\
             c1,d,a.wav,3.0,0.1,5,clean\n\
             c2,d,,4.5,0.2,7,\n\
             c3,d,,,,,\n",
        )
        .unwrap();
        let m = load_manifest(&p).unwrap();
        assert_eq!(m.len(), 3);
        assert_eq!(m.rows[0].condition.as_deref(), Some("clean"));
        assert!(m.rows[2].label.is_none());

        fs::write(
            &p,
            "clip_id,dataset,audio_path,mos,ci95,n_ratings,condition\n\
             c1,d,,3.0,0.1,5,\nc1,d,,3.0,0.1,5,\n",
        )
        .unwrap();
        assert!(matches!(load_manifest(&p), Err(Error::DuplicateClipIds(ids)) if ids == ["c1"]));

        fs::write(
            &p,
            "clip_id,dataset,audio_path,mos,ci95,n_ratings,condition\nc1,d,,5.7,0.1,5,\n",
        )
        .unwrap();
        assert!(matches!(load_manifest(&p), Err(Error::Parse { column, .. }) if column == "mos"));
    }
}
