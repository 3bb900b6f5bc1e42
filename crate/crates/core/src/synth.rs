//! Deterministic test signals.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::{num_complex::Complex, FftPlanner};

use crate::audio::AudioClip;
use crate::error::{Error, Result};

pub fn dbfs_to_amplitude(db: f64) -> f64 {
    10f64.powf(db / 20.0)
}

/// Sine with peak level `peak_dbfs`.
pub fn sine(sample_rate: u32, freq: f64, peak_dbfs: f64, secs: f64) -> Result<AudioClip> {
    let amp = dbfs_to_amplitude(peak_dbfs);
    let n = (secs * sample_rate as f64).round() as usize;
    let w = 2.0 * PI * freq / sample_rate as f64;
    AudioClip::new(sample_rate, (0..n).map(|i| amp * (w * i as f64).sin()).collect())
}

/// Noise with a flat spectrum between `lo_hz` and `hi_hz` and RMS level
/// `rms_dbfs`. Built by inverse FFT of random phases, so it loops cleanly.
pub fn band_noise(sample_rate: u32, lo_hz: f64, hi_hz: f64, rms_dbfs: f64, secs: f64, seed: u64) -> Result<AudioClip> {
    let nyquist = sample_rate as f64 / 2.0;
    if !(0.0 <= lo_hz && lo_hz < hi_hz && hi_hz <= nyquist) {
        return Err(Error::InvalidConfig(format!("noise band [{lo_hz}, {hi_hz}] Hz")));
    }
    let n = (secs * sample_rate as f64).round() as usize;
    if n == 0 {
        return AudioClip::new(sample_rate, Vec::new());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut spec = vec![Complex::new(0.0, 0.0); n];
    let df = sample_rate as f64 / n as f64;
    for k in 1..n.div_ceil(2) {
        let f = k as f64 * df;
        let phase = rng.gen::<f64>() * 2.0 * PI;
        if f >= lo_hz && f <= hi_hz {
            spec[k] = Complex::from_polar(1.0, phase);
            spec[n - k] = spec[k].conj();
        }
    }
    FftPlanner::new().plan_fft_inverse(n).process(&mut spec);
    let raw: Vec<f64> = spec.iter().map(|c| c.re).collect();
    let rms = (raw.iter().map(|x| x * x).sum::<f64>() / n as f64).sqrt();
    if rms == 0.0 {
        return Err(Error::InvalidConfig(format!("noise band [{lo_hz}, {hi_hz}] Hz holds no FFT bins")));
    }
    let g = dbfs_to_amplitude(rms_dbfs) / rms;
    AudioClip::new(sample_rate, raw.into_iter().map(|x| x * g).collect())
}

/// Uniform white noise in `[-amp, amp]`.
pub fn white_noise(sample_rate: u32, amp: f64, secs: f64, seed: u64) -> Result<AudioClip> {
    let n = (secs * sample_rate as f64).round() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    AudioClip::new(sample_rate, (0..n).map(|_| amp * (2.0 * rng.gen::<f64>() - 1.0)).collect())
}
