//! Additive noise, clipping and reverberation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::model::{mean_square, Clip};

use super::limit_peak;

/// Output of a mixing operation.
#[derive(Debug, Clone, PartialEq)]
pub struct Mixed {
    pub clip: Clip,
    /// Factor applied to the noise before adding it.
    pub noise_gain: f64,
    /// Factor applied to the sum to keep it within full scale (1.0 when no
    /// rescaling was needed).
    pub output_gain: f64,
}

/// Mixes `noise` (same length as `clip`) so the full-clip SNR equals
/// `snr_db`, then limits the peak.
fn mix_at_snr(clip: &Clip, noise: &[f64], snr_db: f64) -> Result<Mixed> {
    if !snr_db.is_finite() {
        return Err(Error::Invalid(format!("SNR {snr_db} dB is not finite")));
    }
    let p_signal = clip.power();
    if p_signal == 0.0 {
        return Err(Error::ZeroPower(format!("clip `{}`", clip.clip_id)));
    }
    let p_noise = mean_square(noise);
    if p_noise == 0.0 {
        return Err(Error::ZeroPower("noise".into()));
    }
    let noise_gain = (p_signal / (p_noise * 10f64.powf(snr_db / 10.0))).sqrt();
    let mut out: Vec<f64> = clip
        .samples
        .iter()
        .zip(noise)
        .map(|(s, n)| s + noise_gain * n)
        .collect();
    let output_gain = limit_peak(&mut out);
    Ok(Mixed {
        clip: clip.with_samples(out),
        noise_gain,
        output_gain,
    })
}

/// Adds seeded Gaussian noise at the requested full-clip SNR.
pub fn add_white_noise(clip: &Clip, snr_db: f64, seed: u64) -> Result<Mixed> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise: Vec<f64> = (0..clip.samples.len())
        .map(|_| rng.sample(StandardNormal))
        .collect();
    mix_at_snr(clip, &noise, snr_db)
}

/// Takes `len` samples of `noise` starting at a seeded offset. Noise longer
/// than `len` is read without wrapping; shorter noise is looped.
pub fn noise_excerpt(noise: &[f64], len: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let offset = if noise.len() > len {
        rng.random_range(0..=noise.len() - len)
    } else {
        rng.random_range(0..noise.len())
    };
    (0..len)
        .map(|i| noise[(offset + i) % noise.len()])
        .collect()
}

/// Mixes a background recording into the clip at the requested SNR.
pub fn mix_background_noise(clip: &Clip, noise: &Clip, snr_db: f64, seed: u64) -> Result<Mixed> {
    if clip.sample_rate != noise.sample_rate {
        return Err(Error::Invalid(format!(
            "noise `{}` is {} Hz but clip `{}` is {} Hz",
            noise.clip_id, noise.sample_rate, clip.clip_id, clip.sample_rate
        )));
    }
    clip.require_non_empty()?;
    if noise.samples.is_empty() {
        return Err(Error::ZeroPower(format!(
            "noise `{}` is empty",
            noise.clip_id
        )));
    }
    let excerpt = noise_excerpt(&noise.samples, clip.samples.len(), seed);
    mix_at_snr(clip, &excerpt, snr_db)
}

/// Hard-clips at `threshold_frac` of the clip's peak magnitude.
pub fn clip_amplitude(clip: &Clip, threshold_frac: f64) -> Result<Clip> {
    clip.require_non_empty()?;
    if !(threshold_frac > 0.0 && threshold_frac <= 1.0) {
        return Err(Error::OutOfRange(format!(
            "clipping threshold {threshold_frac} outside (0, 1]"
        )));
    }
    let limit = threshold_frac * clip.peak();
    let mut out: Vec<f64> = clip
        .samples
        .iter()
        .map(|s| s.clamp(-limit, limit))
        .collect();
    limit_peak(&mut out);
    Ok(clip.with_samples(out))
}

fn convolve_direct(x: &[f64], h: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut y = vec![0.0; n];
    for (k, &hk) in h.iter().enumerate().take(n) {
        if hk == 0.0 {
            continue;
        }
        for i in k..n {
            y[i] += hk * x[i - k];
        }
    }
    y
}

fn convolve_fft(x: &[f64], h: &[f64]) -> Vec<f64> {
    let full = x.len() + h.len() - 1;
    let size = full.next_power_of_two();
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(size);
    let inv = planner.plan_fft_inverse(size);
    let pad = |v: &[f64]| -> Vec<Complex<f64>> {
        let mut out: Vec<Complex<f64>> = v.iter().map(|&r| Complex::new(r, 0.0)).collect();
        out.resize(size, Complex::new(0.0, 0.0));
        out
    };
    let mut a = pad(x);
    let mut b = pad(h);
    fwd.process(&mut a);
    fwd.process(&mut b);
    for (ai, bi) in a.iter_mut().zip(&b) {
        *ai *= bi;
    }
    inv.process(&mut a);
    let scale = 1.0 / size as f64;
    a.iter().take(x.len()).map(|c| c.re * scale).collect()
}

/// Convolves with a room impulse response, truncates to the input length
/// and restores the input's peak level.
pub fn convolve_rir(clip: &Clip, rir: &Clip) -> Result<Clip> {
    if rir.samples.is_empty() {
        return Err(Error::Invalid("empty impulse response".into()));
    }
    if clip.sample_rate != rir.sample_rate {
        return Err(Error::Invalid(format!(
            "impulse response is {} Hz but clip is {} Hz",
            rir.sample_rate, clip.sample_rate
        )));
    }
    clip.require_non_empty()?;
    let x = &clip.samples;
    let h = &rir.samples;
    let mut y = if (x.len() as u64) * (h.len() as u64) <= 4_000_000 {
        convolve_direct(x, h)
    } else {
        convolve_fft(x, h)
    };
    let in_peak = clip.peak();
    let out_peak = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if out_peak > 0.0 {
        let g = in_peak / out_peak;
        y.iter_mut().for_each(|v| *v *= g);
    }
    limit_peak(&mut y);
    Ok(clip.with_samples(y))
}

/// Exponentially decaying Gaussian noise with a unit direct path, decaying
/// by 60 dB after `rt60_secs`. Length is `1.2 · rt60`.
pub fn synthetic_rir(sample_rate: u32, rt60_secs: f64, seed: u64) -> Result<Clip> {
    if !(rt60_secs > 0.0 && rt60_secs.is_finite()) {
        return Err(Error::OutOfRange(format!("RT60 {rt60_secs} s")));
    }
    let fs = sample_rate as f64;
    let len = ((1.2 * rt60_secs * fs).ceil() as usize).max(1);
    let decay = (1e-3f64).ln() / (rt60_secs * fs);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut h: Vec<f64> = (0..len)
        .map(|n| {
            let g: f64 = rng.sample(StandardNormal);
            0.3 * g * (decay * n as f64).exp()
        })
        .collect();
    h[0] = 1.0;
    Clip::new(format!("rir_{seed}"), "", sample_rate, h)
}
