//! Sixth-order Butterworth high/low-pass filters as three cascaded biquads
//! (bilinear transform with cutoff pre-warping).

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Clip;

use super::limit_peak;

pub const BUTTERWORTH_ORDER: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FilterKind {
    Highpass,
    Lowpass,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Biquad {
    pub b: [f64; 3],
    /// Feedback coefficients `a1, a2` (with `a0` normalized to 1).
    pub a: [f64; 2],
}

impl Biquad {
    fn design(kind: FilterKind, cutoff_hz: f64, sample_rate: f64, q: f64) -> Biquad {
        let w0 = 2.0 * PI * cutoff_hz / sample_rate;
        let (sin, cos) = w0.sin_cos();
        let alpha = sin / (2.0 * q);
        let a0 = 1.0 + alpha;
        let b = match kind {
            FilterKind::Lowpass => [(1.0 - cos) / 2.0, 1.0 - cos, (1.0 - cos) / 2.0],
            FilterKind::Highpass => [(1.0 + cos) / 2.0, -(1.0 + cos), (1.0 + cos) / 2.0],
        };
        Biquad {
            b: b.map(|v| v / a0),
            a: [-2.0 * cos / a0, (1.0 - alpha) / a0],
        }
    }

    /// Transposed direct form II over a whole buffer.
    fn run(&self, x: &mut [f64]) {
        let (mut s1, mut s2) = (0.0, 0.0);
        for v in x.iter_mut() {
            let input = *v;
            let out = self.b[0] * input + s1;
            s1 = self.b[1] * input - self.a[0] * out + s2;
            s2 = self.b[2] * input - self.a[1] * out;
            *v = out;
        }
    }

    fn magnitude(&self, w: f64) -> f64 {
        // |B(e^{jw})| / |A(e^{jw})|
        let (c1, s1) = (w.cos(), w.sin());
        let (c2, s2) = ((2.0 * w).cos(), (2.0 * w).sin());
        let nr = self.b[0] + self.b[1] * c1 + self.b[2] * c2;
        let ni = -(self.b[1] * s1 + self.b[2] * s2);
        let dr = 1.0 + self.a[0] * c1 + self.a[1] * c2;
        let di = -(self.a[0] * s1 + self.a[1] * s2);
        ((nr * nr + ni * ni) / (dr * dr + di * di)).sqrt()
    }
}

/// Second-order sections of the Butterworth filter.
pub fn butterworth_sections(
    kind: FilterKind,
    cutoff_hz: f64,
    sample_rate: u32,
) -> Result<Vec<Biquad>> {
    let nyquist = sample_rate as f64 / 2.0;
    if !(cutoff_hz > 0.0 && cutoff_hz < nyquist) {
        return Err(Error::OutOfRange(format!(
            "cutoff {cutoff_hz} Hz must lie in (0, {nyquist}) Hz"
        )));
    }
    let n = BUTTERWORTH_ORDER;
    Ok((1..=n / 2)
        .map(|k| {
            let theta = (2 * k - 1) as f64 * PI / (2 * n) as f64;
            let q = 1.0 / (2.0 * theta.cos());
            Biquad::design(kind, cutoff_hz, sample_rate as f64, q)
        })
        .collect())
}

/// Magnitude response of the cascade at `freq_hz`, in dB.
pub fn magnitude_db(
    kind: FilterKind,
    cutoff_hz: f64,
    sample_rate: u32,
    freq_hz: f64,
) -> Result<f64> {
    let w = 2.0 * PI * freq_hz / sample_rate as f64;
    let mag: f64 = butterworth_sections(kind, cutoff_hz, sample_rate)?
        .iter()
        .map(|s| s.magnitude(w))
        .product();
    Ok(20.0 * mag.max(1e-300).log10())
}

/// Filters the clip; the output is scaled down only if it would exceed
/// full scale.
pub fn apply_filter(clip: &Clip, kind: FilterKind, cutoff_hz: f64) -> Result<Clip> {
    let sections = butterworth_sections(kind, cutoff_hz, clip.sample_rate)?;
    let mut x = clip.samples.clone();
    for s in &sections {
        s.run(&mut x);
    }
    limit_peak(&mut x);
    Ok(clip.with_samples(x))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tone(freq: f64, amp: f64, secs: f64, sr: u32) -> Clip {
        let n = (secs * sr as f64) as usize;
        let s = (0..n)
            .map(|i| amp * (2.0 * PI * freq * i as f64 / sr as f64).sin())
            .collect();
        Clip::new("t", "d", sr, s).unwrap()
    }

    fn rms(x: &[f64]) -> f64 {
        (x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64).sqrt()
    }

    #[test]
    fn passband_tone_preserved() {
        let x = tone(1000.0, 0.5, 1.0, 16000);
        let y = apply_filter(&x, FilterKind::Lowpass, 3500.0).unwrap();
        // Skip the first 50 ms of transient.
        let db = 20.0 * (rms(&y.samples[800..]) / rms(&x.samples[800..])).log10();
        assert!(db.abs() < 1.0, "{db}");
    }

    #[test]
    fn stopband_tone_attenuated() {
        let x = tone(7000.0, 0.5, 1.0, 16000);
        let y = apply_filter(&x, FilterKind::Lowpass, 3500.0).unwrap();
        let db = 20.0 * (rms(&y.samples[800..]) / rms(&x.samples[800..])).log10();
        assert!(db <= -30.0, "{db}");
    }

    #[test]
    fn highpass_removes_dc() {
        let x = Clip::new("dc", "d", 16000, vec![0.5; 16000]).unwrap();
        let y = apply_filter(&x, FilterKind::Highpass, 300.0).unwrap();
        let tail = &y.samples[1600..];
        let mean_abs = tail.iter().map(|v| v.abs()).sum::<f64>() / tail.len() as f64;
        assert!(mean_abs < 0.01, "{mean_abs}");
    }

    #[test]
    fn cutoff_is_minus_three_db() {
        for kind in [FilterKind::Lowpass, FilterKind::Highpass] {
            let db = magnitude_db(kind, 1000.0, 16000, 1000.0).unwrap();
            assert!((db + 3.0103).abs() < 1e-3, "{kind:?} {db}");
        }
    }

    #[test]
    fn cutoff_range_checked() {
        let x = tone(100.0, 0.1, 0.1, 8000);
        assert!(apply_filter(&x, FilterKind::Lowpass, 4000.0).is_err());
        assert!(apply_filter(&x, FilterKind::Lowpass, 0.0).is_err());
    }
}
