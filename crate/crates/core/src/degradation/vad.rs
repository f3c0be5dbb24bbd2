//! Energy-based activity detection and fixed-length segmentation of long
//! recordings.

use crate::model::Clip;

pub const FRAME_SECONDS: f64 = 0.010;
/// A frame is active when its RMS exceeds this fraction of the segment's
/// 95th-percentile frame RMS.
pub const RELATIVE_THRESHOLD: f64 = 0.05;

fn frame_rms(samples: &[f64], frame_len: usize) -> Vec<f64> {
    samples
        .chunks_exact(frame_len)
        .map(|f| (f.iter().map(|v| v * v).sum::<f64>() / frame_len as f64).sqrt())
        .collect()
}

/// Nearest-rank percentile of an unsorted slice.
fn percentile(values: &[f64], p: f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let rank = ((p / 100.0) * v.len() as f64).ceil() as usize;
    v[rank.clamp(1, v.len()) - 1]
}

/// Fraction of 10 ms frames classified as active.
pub fn speech_activity(samples: &[f64], sample_rate: u32) -> f64 {
    let frame_len = ((FRAME_SECONDS * sample_rate as f64).round() as usize).max(1);
    let rms = frame_rms(samples, frame_len);
    if rms.is_empty() {
        return 0.0;
    }
    let threshold = RELATIVE_THRESHOLD * percentile(&rms, 95.0);
    rms.iter().filter(|r| **r > threshold).count() as f64 / rms.len() as f64
}

/// Cuts `audio` into consecutive segments of `segment_seconds` (dropping
/// the remainder) and keeps those whose activity is at least
/// `min_activity`. Kept segments are named `{clip_id}_{index:04}` after
/// their position in the recording.
#[allow(clippy::neg_cmp_op_on_partial_ord)]
pub fn segment_speech(audio: &Clip, segment_seconds: f64, min_activity: f64) -> Vec<Clip> {
    if !(segment_seconds > 0.0) {
        return Vec::new();
    }
    let seg_len = (segment_seconds * audio.sample_rate as f64).round() as usize;
    if seg_len == 0 {
        return Vec::new();
    }
    audio
        .samples
        .chunks_exact(seg_len)
        .enumerate()
        .filter(|(_, seg)| speech_activity(seg, audio.sample_rate) >= min_activity)
        .map(|(i, seg)| Clip {
            clip_id: format!("{}_{i:04}", audio.clip_id),
            dataset: audio.dataset.clone(),
            sample_rate: audio.sample_rate,
            samples: seg.to_vec(),
        })
        .collect()
}
