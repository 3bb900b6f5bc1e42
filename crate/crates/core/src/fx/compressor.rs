//! Feed-forward compressor: hard-knee gain computer in the log domain followed
//! by a smoothed branching peak detector on the gain-reduction signal.

use crate::audio::AudioClip;

use super::params::DrcParams;

const LN10_OVER_20: f64 = std::f64::consts::LN_10 / 20.0;

/// One-pole smoothing coefficient for time constant `tau` seconds.
pub fn smoothing_coefficient(tau: f64, sample_rate: f64) -> f64 {
    (-1.0 / (tau * sample_rate)).exp()
}

/// Static curve: gain reduction in dB (<= 0) for an input level in dBFS.
pub fn static_gain_db(level_db: f64, threshold_db: f64, ratio: f64) -> f64 {
    if level_db > threshold_db {
        (level_db - threshold_db) * (1.0 / ratio - 1.0)
    } else {
        0.0
    }
}

/// Per-sample gain reduction in dB (>= 0), after smoothing.
pub fn gain_reduction_db(samples: &[f64], drc: &DrcParams, sample_rate: f64) -> Vec<f64> {
    let alpha_a = smoothing_coefficient(drc.attack_s, sample_rate);
    let alpha_r = smoothing_coefficient(drc.release_s, sample_rate);
    let threshold_lin = 10f64.powf(drc.threshold_db / 20.0);
    let slope = 1.0 - 1.0 / drc.ratio;
    let mut y = 0.0;
    samples
        .iter()
        .map(|&x| {
            let mag = x.abs();
            let target = if mag > threshold_lin {
                (20.0 * mag.log10() - drc.threshold_db) * slope
            } else {
                0.0
            };
            let alpha = if target > y { alpha_a } else { alpha_r };
            y = alpha * y + (1.0 - alpha) * target;
            y
        })
        .collect()
}

/// Compresses with unity makeup gain. `ratio == 1` is an exact pass-through.
pub fn compress(clip: &AudioClip, drc: &DrcParams) -> AudioClip {
    if drc.ratio == 1.0 {
        return clip.clone();
    }
    let gr = gain_reduction_db(clip.samples(), drc, clip.sample_rate() as f64);
    let samples = clip
        .samples()
        .iter()
        .zip(gr)
        .map(|(&x, g)| if g > 0.0 { x * (-g * LN10_OVER_20).exp() } else { x })
        .collect();
    AudioClip::from_parts(clip.sample_rate(), samples)
}
