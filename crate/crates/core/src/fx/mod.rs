//! Per-track channel strip: six-band EQ, compressor and loudness-matched
//! makeup gain.

mod compressor;
mod eq;
mod params;

pub use compressor::{compress, gain_reduction_db, smoothing_coefficient, static_gain_db};
pub use eq::{apply_eq, design_peaking_filter, eq_sections, EQ_BANDS};
pub use params::{
    decode_params, decode_values, encode_params, vector_bounds, Decoded, DrcParams, EqParams,
    ParamBounds, ParamVector, TrackParams, PARAMS_PER_TRACK,
};

use crate::audio::AudioClip;
use crate::error::{Error, Result};
use crate::loudness::{db_to_gain, integrated_loudness, try_loudness};

/// Loudness difference `L(before) - L(after)` in dB.
pub fn makeup_gain(before: &AudioClip, after: &AudioClip) -> Result<f64> {
    let measure = |c: &AudioClip| -> Result<f64> {
        let r = integrated_loudness(c)?;
        if r.is_silent() {
            Err(Error::SilentSignal)
        } else {
            Ok(r.integrated_lufs)
        }
    };
    Ok(measure(before)? - measure(after)?)
}

/// EQ, then compression, then makeup gain restoring the post-EQ loudness.
///
/// When either side of the compressor is unmeasurable (silence, or shorter
/// than one gating block) no makeup gain is applied.
pub fn process_track(clip: &AudioClip, p: &TrackParams) -> Result<AudioClip> {
    let equalised = apply_eq(clip, &p.eq)?;
    if p.drc.ratio == 1.0 {
        return Ok(equalised);
    }
    let compressed = compress(&equalised, &p.drc);
    match (try_loudness(&equalised), try_loudness(&compressed)) {
        (Some(before), Some(after)) => Ok(compressed.scaled(db_to_gain(before - after))),
        _ => Ok(compressed),
    }
}
