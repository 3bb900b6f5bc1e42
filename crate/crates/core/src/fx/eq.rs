use std::f64::consts::PI;

use crate::audio::AudioClip;
use crate::biquad::BiquadCoefficients;
use crate::error::{Error, Result};

use super::params::EqParams;

/// Centre frequency (Hz) and Q of each equaliser band, in processing order.
pub const EQ_BANDS: [(f64, f64); 6] = [
    (75.0, 1.0),
    (100.0, 0.6),
    (250.0, 0.3),
    (750.0, 0.3),
    (2500.0, 0.2),
    (7500.0, 1.0),
];

/// RBJ cookbook peaking section with `A = 10^(gain/40)`.
pub fn design_peaking_filter(fc: f64, q: f64, gain_db: f64, fs: f64) -> Result<BiquadCoefficients> {
    if !(fc > 0.0) || fc >= fs / 2.0 {
        return Err(Error::AboveNyquist {
            fc,
            nyquist: fs / 2.0,
        });
    }
    if !(q > 0.0) || !gain_db.is_finite() {
        return Err(Error::InvalidFilter(format!("q={q}, gain={gain_db} dB")));
    }
    if gain_db == 0.0 {
        return Ok(BiquadCoefficients::IDENTITY);
    }
    let a = 10f64.powf(gain_db / 40.0);
    let w0 = 2.0 * PI * fc / fs;
    let (sin, cos) = w0.sin_cos();
    let alpha = sin / (2.0 * q);
    let a0 = 1.0 + alpha / a;
    Ok(BiquadCoefficients {
        b0: (1.0 + alpha * a) / a0,
        b1: -2.0 * cos / a0,
        b2: (1.0 - alpha * a) / a0,
        a1: -2.0 * cos / a0,
        a2: (1.0 - alpha / a) / a0,
    })
}

pub fn eq_sections(eq: &EqParams, fs: f64) -> Result<Vec<BiquadCoefficients>> {
    EQ_BANDS
        .iter()
        .zip(eq.gains_db)
        .map(|(&(fc, q), g)| design_peaking_filter(fc, q, g, fs))
        .collect()
}

/// Runs the six-band cascade, band 1 first.
pub fn apply_eq(clip: &AudioClip, eq: &EqParams) -> Result<AudioClip> {
    let sections = eq_sections(eq, clip.sample_rate() as f64)?;
    let mut samples = clip.samples().to_vec();
    for s in &sections {
        s.process_in_place(&mut samples);
    }
    Ok(AudioClip::from_parts(clip.sample_rate(), samples))
}
