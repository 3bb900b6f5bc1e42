//! ITU-R BS.1770-2 integrated loudness for mono clips.
//!
//! The K-weighting filters are designed from their analog prototypes via the
//! bilinear transform, so the same code yields the tabulated 48 kHz
//! coefficients and matching 44.1 kHz ones.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::audio::{check_rate, AudioClip};
use crate::biquad::BiquadCoefficients;
use crate::error::{Error, Result};

const ABSOLUTE_GATE_LKFS: f64 = -70.0;
const RELATIVE_GATE_LU: f64 = -10.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LoudnessReading {
    /// Gated loudness; `-inf` when every block is gated out.
    pub integrated_lufs: f64,
    pub gated_block_count: usize,
    pub ungated_lufs: f64,
}

impl LoudnessReading {
    pub fn is_silent(&self) -> bool {
        self.integrated_lufs == f64::NEG_INFINITY
    }
}

/// Stage 1: high shelf modelling the acoustic effect of the head.
pub fn pre_filter(sample_rate: f64) -> BiquadCoefficients {
    let gain_db = 3.999_843_853_973_347;
    let q = 0.707_175_236_955_419_3;
    let fc = 1_681.974_450_955_531_9;
    let k = (PI * fc / sample_rate).tan();
    let vh = 10f64.powf(gain_db / 20.0);
    let vb = vh.powf(0.499_666_774_154_541_6);
    let a0 = 1.0 + k / q + k * k;
    BiquadCoefficients {
        b0: (vh + vb * k / q + k * k) / a0,
        b1: 2.0 * (k * k - vh) / a0,
        b2: (vh - vb * k / q + k * k) / a0,
        a1: 2.0 * (k * k - 1.0) / a0,
        a2: (1.0 - k / q + k * k) / a0,
    }
}

/// Stage 2: the revised low-frequency B-curve high-pass.
pub fn rlb_filter(sample_rate: f64) -> BiquadCoefficients {
    let q = 0.500_327_037_323_877_3;
    let fc = 38.135_470_876_024_44;
    let k = (PI * fc / sample_rate).tan();
    let a0 = 1.0 + k / q + k * k;
    BiquadCoefficients {
        b0: 1.0,
        b1: -2.0,
        b2: 1.0,
        a1: 2.0 * (k * k - 1.0) / a0,
        a2: (1.0 - k / q + k * k) / a0,
    }
}

pub fn k_weight(clip: &AudioClip) -> Result<AudioClip> {
    check_rate(clip.sample_rate())?;
    let fs = clip.sample_rate() as f64;
    let mut samples = clip.samples().to_vec();
    pre_filter(fs).process_in_place(&mut samples);
    rlb_filter(fs).process_in_place(&mut samples);
    Ok(AudioClip::from_parts(clip.sample_rate(), samples))
}

fn power_to_lkfs(power: f64) -> f64 {
    if power > 0.0 {
        -0.691 + 10.0 * power.log10()
    } else {
        f64::NEG_INFINITY
    }
}

/// Mean-square power of each 400 ms gating block (75 % overlap).
fn block_powers(clip: &AudioClip) -> Result<Vec<f64>> {
    let rate = clip.sample_rate() as usize;
    let step = rate / 10;
    let block = 4 * step;
    if clip.len() < block {
        return Err(Error::ClipTooShort {
            samples: clip.len(),
        });
    }
    let weighted = k_weight(clip)?;
    let windows: Vec<f64> = weighted
        .samples()
        .chunks_exact(step)
        .map(|w| w.iter().map(|x| x * x).sum())
        .collect();
    Ok(windows
        .windows(4)
        .map(|w| w.iter().sum::<f64>() / block as f64)
        .collect())
}

pub fn integrated_loudness(clip: &AudioClip) -> Result<LoudnessReading> {
    let blocks = block_powers(clip)?;
    let ungated = blocks.iter().sum::<f64>() / blocks.len() as f64;

    let above_abs: Vec<f64> = blocks
        .iter()
        .copied()
        .filter(|&p| power_to_lkfs(p) > ABSOLUTE_GATE_LKFS)
        .collect();
    if above_abs.is_empty() {
        return Ok(LoudnessReading {
            integrated_lufs: f64::NEG_INFINITY,
            gated_block_count: 0,
            ungated_lufs: power_to_lkfs(ungated),
        });
    }
    let mean_abs = above_abs.iter().sum::<f64>() / above_abs.len() as f64;
    let relative_gate = power_to_lkfs(mean_abs) + RELATIVE_GATE_LU;
    let gated: Vec<f64> = above_abs
        .into_iter()
        .filter(|&p| power_to_lkfs(p) > relative_gate)
        .collect();
    let mean = gated.iter().sum::<f64>() / gated.len() as f64;
    Ok(LoudnessReading {
        integrated_lufs: power_to_lkfs(mean),
        gated_block_count: gated.len(),
        ungated_lufs: power_to_lkfs(ungated),
    })
}

/// Integrated loudness, or `None` for silence and clips under one block.
pub fn try_loudness(clip: &AudioClip) -> Option<f64> {
    integrated_loudness(clip)
        .ok()
        .map(|r| r.integrated_lufs)
        .filter(|l| l.is_finite())
}

/// Applies one static gain so the clip measures `target_lufs`.
pub fn normalize_to(clip: &AudioClip, target_lufs: f64) -> Result<(AudioClip, f64)> {
    let reading = integrated_loudness(clip)?;
    if reading.is_silent() {
        return Err(Error::CannotNormalizeSilence);
    }
    let gain_db = target_lufs - reading.integrated_lufs;
    Ok((clip.scaled(db_to_gain(gain_db)), gain_db))
}

pub fn db_to_gain(db: f64) -> f64 {
    10f64.powf(db / 20.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sine(freq: f64, amp: f64, secs: f64, rate: u32) -> AudioClip {
        let n = (secs * rate as f64) as usize;
        AudioClip::new(
            rate,
            (0..n)
                .map(|i| amp * (2.0 * PI * freq * i as f64 / rate as f64).sin())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn coefficients_at_48k_match_tabulated_values() {
        let pre = pre_filter(48_000.0);
        let tab = [
            1.535_124_859_586_97,
            -2.691_696_189_406_38,
            1.198_392_810_852_85,
            -1.690_659_293_182_41,
            0.732_480_774_215_85,
        ];
        for (got, want) in [pre.b0, pre.b1, pre.b2, pre.a1, pre.a2].iter().zip(tab) {
            assert!((got - want).abs() < 1e-8, "{got} vs {want}");
        }
        let rlb = rlb_filter(48_000.0);
        assert!((rlb.a1 - -1.990_047_454_833_98).abs() < 1e-8);
        assert!((rlb.a2 - 0.990_072_250_366_21).abs() < 1e-8);
    }

    #[test]
    fn dc_is_removed_and_silence_passes() {
        let dc = AudioClip::new(44_100, vec![0.5; 44_100]).unwrap();
        let out = k_weight(&dc).unwrap();
        let tail = &out.samples()[40_000..];
        assert!(tail.iter().all(|x| x.abs() < 1e-3), "{}", tail[0]);

        let silence = AudioClip::silence(48_000, 1000).unwrap();
        assert!(k_weight(&silence).unwrap().is_silent());
    }

    #[test]
    fn sine_997_response_matches_designed_filters() {
        for rate in [44_100, 48_000] {
            let fs = rate as f64;
            let expected = pre_filter(fs).magnitude_db(997.0, fs) + rlb_filter(fs).magnitude_db(997.0, fs);
            let x = sine(997.0, 0.5, 2.0, rate);
            let y = k_weight(&x).unwrap();
            let settle = rate as usize;
            let rms = |s: &[f64]| (s.iter().map(|v| v * v).sum::<f64>() / s.len() as f64).sqrt();
            let measured = 20.0 * (rms(&y.samples()[settle..]) / rms(&x.samples()[settle..])).log10();
            assert!((measured - expected).abs() < 0.05, "{rate}: {measured} vs {expected}");
            // The -0.691 offset cancels the K-weighting gain at 997 Hz.
            assert!((expected - 0.691).abs() < 0.05, "{expected}");
        }
    }

    #[test]
    fn too_short_and_silent() {
        let short = sine(997.0, 1.0, 0.3, 44_100);
        assert!(matches!(
            integrated_loudness(&short),
            Err(Error::ClipTooShort { .. })
        ));
        let silence = AudioClip::silence(44_100, 5 * 44_100).unwrap();
        let r = integrated_loudness(&silence).unwrap();
        assert!(r.is_silent());
        assert_eq!(r.gated_block_count, 0);
        assert!(matches!(
            normalize_to(&silence, -24.0),
            Err(Error::CannotNormalizeSilence)
        ));
    }

    #[test]
    fn normalization_gain_is_target_minus_measured() {
        let x = sine(440.0, 0.05, 3.0, 44_100);
        let measured = integrated_loudness(&x).unwrap().integrated_lufs;
        let (y, gain) = normalize_to(&x, measured + 6.0).unwrap();
        assert!((gain - 6.0).abs() < 1e-12);
        let again = integrated_loudness(&y).unwrap().integrated_lufs;
        assert!((again - (measured + 6.0)).abs() < 0.01);

        let (_, second) = normalize_to(&y, measured + 6.0).unwrap();
        assert!(second.abs() < 0.2);
    }

    #[test]
    fn vocal_target() {
        let x = sine(300.0, 0.3, 4.0, 48_000);
        let (y, _) = normalize_to(&x, -18.0).unwrap();
        let l = integrated_loudness(&y).unwrap().integrated_lufs;
        assert!((-18.2..=-17.8).contains(&l), "{l}");
    }
}
