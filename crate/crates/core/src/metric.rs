//! Cross-adaptive multitrack masking metric and the optimisation objective.
//!
//! Track `n` is the maskee; the masker is the sum of every other track. In
//! each scale-factor band where the masker's threshold exceeds the maskee's
//! energy, the masker-to-signal ratio (clamped to `[0, t_max]` dB) is added
//! as `MSR / t_max`. Per-frame sums are averaged over the frames where the
//! maskee is active.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::audio::{copy_frame, exact_sum, subtract, sum_tracks, AudioClip};
use crate::error::{Error, Result};
use crate::psycho::PsychoModel;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricConfig {
    /// Masking distance (dB) that counts as a fully masked band.
    pub t_max: f64,
    /// Frames whose RMS is at or below this level (dBFS) are ignored.
    pub activity_gate_db: f64,
    /// Band energies at or below this are treated as empty.
    pub energy_floor: f64,
}

impl Default for MetricConfig {
    fn default() -> Self {
        MetricConfig {
            t_max: 20.0,
            activity_gate_db: -70.0,
            energy_floor: 1e-12,
        }
    }
}

impl MetricConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.t_max > 0.0) || !self.activity_gate_db.is_finite() || !(self.energy_floor >= 0.0) {
            return Err(Error::InvalidConfig(format!("metric config {self:?}")));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaskingResult {
    pub per_track_m: Vec<f64>,
    pub m_total: f64,
    pub m_diff: f64,
    pub objective: f64,
    pub active_frame_counts: Vec<usize>,
}

impl MaskingResult {
    /// Combines per-track masking into `M_T = Σ M_i²`, `M_d = max |M_i - M_j|`
    /// and `f = M_T + M_d`.
    pub fn from_per_track(per_track_m: Vec<f64>, active_frame_counts: Vec<usize>) -> MaskingResult {
        let m_total = exact_sum(per_track_m.iter().map(|m| m * m));
        let m_diff = if per_track_m.len() < 2 {
            0.0
        } else {
            let max = per_track_m.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let min = per_track_m.iter().copied().fold(f64::INFINITY, f64::min);
            max - min
        };
        MaskingResult {
            objective: m_total + m_diff,
            per_track_m,
            m_total,
            m_diff,
            active_frame_counts,
        }
    }

    pub fn mean_m(&self) -> f64 {
        if self.per_track_m.is_empty() {
            0.0
        } else {
            self.per_track_m.iter().sum::<f64>() / self.per_track_m.len() as f64
        }
    }
}

/// Band energies and frame activity of one maskee.
#[derive(Clone, Debug, PartialEq)]
pub struct MaskeeAnalysis {
    pub esb: Vec<Vec<f64>>,
    pub active: Vec<bool>,
}

impl MaskeeAnalysis {
    pub fn new(model: &PsychoModel, clip: &AudioClip, cfg: &MetricConfig) -> Result<MaskeeAnalysis> {
        let esb = model.band_energies(clip)?;
        let n = model.config().fft_size;
        let hop = model.config().hop;
        let mut buf = vec![0.0; n];
        let active = (0..esb.len())
            .map(|k| {
                copy_frame(clip.samples(), k, hop, &mut buf);
                let ms = buf.iter().map(|x| x * x).sum::<f64>() / n as f64;
                ms > 0.0 && 10.0 * ms.log10() > cfg.activity_gate_db
            })
            .collect();
        Ok(MaskeeAnalysis { esb, active })
    }
}

/// Masking thresholds `T'_n` imposed on track `n` by the sum of the others.
pub fn cross_threshold(model: &PsychoModel, track_index: usize, clips: &[AudioClip]) -> Result<Vec<Vec<f64>>> {
    let target = clips.get(track_index).ok_or_else(|| {
        Error::InvalidConfig(format!("track index {track_index} out of range"))
    })?;
    let mix = sum_tracks(clips)?;
    accompaniment_thresholds(model, &mix, target)
}

fn accompaniment_thresholds(model: &PsychoModel, mix: &AudioClip, track: &AudioClip) -> Result<Vec<Vec<f64>>> {
    let accompaniment = subtract(mix, track);
    Ok(model.analyze(&accompaniment)?.into_iter().map(|f| f.thr).collect())
}

/// Masking `M_n` of one maskee, and the number of active frames it was
/// averaged over.
pub fn track_masking(
    maskee: &MaskeeAnalysis,
    tprime: &[Vec<f64>],
    quiet: &[f64],
    cfg: &MetricConfig,
) -> Result<(f64, usize)> {
    if maskee.esb.len() != tprime.len() {
        return Err(Error::InvalidConfig(format!(
            "frame count mismatch: {} maskee vs {} masker frames",
            maskee.esb.len(),
            tprime.len()
        )));
    }
    let mut total = 0.0;
    let mut active = 0;
    for ((esb, thr), &is_active) in maskee.esb.iter().zip(tprime).zip(&maskee.active) {
        if !is_active {
            continue;
        }
        active += 1;
        total += frame_masking(esb, thr, quiet, cfg);
    }
    Ok(if active == 0 {
        (0.0, 0)
    } else {
        (total / active as f64, active)
    })
}

/// Sum over bands of the clamped masker-to-signal ratio divided by `t_max`.
///
/// Bands where the maskee is below the energy floor or below the threshold
/// in quiet are inaudible on their own and contribute nothing.
pub fn frame_masking(esb: &[f64], thr: &[f64], quiet: &[f64], cfg: &MetricConfig) -> f64 {
    esb.iter()
        .zip(thr)
        .enumerate()
        .filter(|&(sb, (&e, &t))| {
            let floor = quiet.get(sb).copied().unwrap_or(0.0).max(cfg.energy_floor);
            e > floor && t > e
        })
        .map(|(_, (&e, &t))| (10.0 * (t / e).log10()).clamp(0.0, cfg.t_max) / cfg.t_max)
        .sum()
}

/// Evaluates the masking objective for a set of (processed) tracks.
pub fn objective(model: &PsychoModel, clips: &[AudioClip], cfg: &MetricConfig) -> Result<MaskingResult> {
    if clips.is_empty() {
        return Err(Error::InvalidConfig("objective needs at least one track".into()));
    }
    let len = clips.iter().map(AudioClip::len).max().unwrap_or(0);
    let padded: Vec<AudioClip> = clips.iter().map(|c| c.padded_to(len)).collect();
    let mix = sum_tracks(&padded)?;
    let per_track: Vec<(f64, usize)> = padded
        .par_iter()
        .map(|clip| {
            let maskee = MaskeeAnalysis::new(model, clip, cfg)?;
            let tprime = accompaniment_thresholds(model, &mix, clip)?;
            track_masking(&maskee, &tprime, model.quiet_thresholds(), cfg)
        })
        .collect::<Result<_>>()?;
    let (m, active): (Vec<f64>, Vec<usize>) = per_track.into_iter().unzip();
    Ok(MaskingResult::from_per_track(m, active))
}
