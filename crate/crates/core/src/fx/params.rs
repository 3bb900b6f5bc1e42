//! Control parameters and their flat-vector encoding for the optimiser.
//!
//! Each track contributes ten consecutive values in the order
//! `g1..g6, threshold, ratio, attack, release`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const PARAMS_PER_TRACK: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EqParams {
    pub gains_db: [f64; 6],
}

impl EqParams {
    pub fn flat() -> EqParams {
        EqParams { gains_db: [0.0; 6] }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DrcParams {
    pub threshold_db: f64,
    pub ratio: f64,
    pub attack_s: f64,
    pub release_s: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrackParams {
    pub eq: EqParams,
    pub drc: DrcParams,
}

impl TrackParams {
    /// Flat EQ, ratio 1, threshold 0 dB, attack/release at mid-range.
    pub fn identity(bounds: &ParamBounds) -> TrackParams {
        let mid = |(lo, hi): (f64, f64)| 0.5 * (lo + hi);
        TrackParams {
            eq: EqParams::flat(),
            drc: DrcParams {
                threshold_db: 0.0,
                ratio: 1.0,
                attack_s: mid(bounds.attack_s),
                release_s: mid(bounds.release_s),
            },
        }
    }

    pub fn to_array(&self) -> [f64; PARAMS_PER_TRACK] {
        let g = self.eq.gains_db;
        let d = &self.drc;
        [
            g[0],
            g[1],
            g[2],
            g[3],
            g[4],
            g[5],
            d.threshold_db,
            d.ratio,
            d.attack_s,
            d.release_s,
        ]
    }

    pub fn from_slice(v: &[f64]) -> TrackParams {
        TrackParams {
            eq: EqParams {
                gains_db: [v[0], v[1], v[2], v[3], v[4], v[5]],
            },
            drc: DrcParams {
                threshold_db: v[6],
                ratio: v[7],
                attack_s: v[8],
                release_s: v[9],
            },
        }
    }
}

/// Box bounds for one track's ten parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamBounds {
    pub eq_gain_db: (f64, f64),
    pub threshold_db: (f64, f64),
    pub ratio: (f64, f64),
    pub attack_s: (f64, f64),
    pub release_s: (f64, f64),
}

impl ParamBounds {
    /// Limits for individual instrument tracks.
    pub fn instrument() -> ParamBounds {
        ParamBounds {
            eq_gain_db: (-6.0, 6.0),
            threshold_db: (-30.0, 0.0),
            ratio: (1.0, 6.0),
            attack_s: (0.005, 0.25),
            release_s: (0.005, 3.0),
        }
    }

    /// Limits when mixing rendered subgroup stems.
    pub fn subgroup() -> ParamBounds {
        ParamBounds {
            eq_gain_db: (-3.0, 3.0),
            ..ParamBounds::instrument()
        }
    }

    pub fn per_dimension(&self) -> [(f64, f64); PARAMS_PER_TRACK] {
        let g = self.eq_gain_db;
        [
            g,
            g,
            g,
            g,
            g,
            g,
            self.threshold_db,
            self.ratio,
            self.attack_s,
            self.release_s,
        ]
    }

    pub fn contains(&self, p: &TrackParams) -> bool {
        p.to_array()
            .iter()
            .zip(self.per_dimension())
            .all(|(v, (lo, hi))| (lo..=hi).contains(v))
    }

    pub fn validate(&self) -> Result<()> {
        for (lo, hi) in self.per_dimension() {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::InvalidBounds(format!("[{lo}, {hi}]")));
            }
        }
        if self.ratio.0 < 1.0 || self.attack_s.0 <= 0.0 || self.release_s.0 <= 0.0 {
            return Err(Error::InvalidBounds(
                "ratio must be >= 1 and time constants positive".into(),
            ));
        }
        Ok(())
    }
}

/// The optimiser's view of every track's parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct ParamVector {
    pub values: Vec<f64>,
    pub bounds: Vec<(f64, f64)>,
}

impl ParamVector {
    pub fn track_count(&self) -> usize {
        self.values.len() / PARAMS_PER_TRACK
    }

    pub fn in_bounds(&self) -> bool {
        self.values
            .iter()
            .zip(&self.bounds)
            .all(|(v, &(lo, hi))| (lo..=hi).contains(v))
    }
}

pub fn vector_bounds(bounds: &ParamBounds, tracks: usize) -> Vec<(f64, f64)> {
    (0..tracks).flat_map(|_| bounds.per_dimension()).collect()
}

pub fn encode_params(params: &[TrackParams], bounds: &ParamBounds) -> ParamVector {
    ParamVector {
        values: params.iter().flat_map(|p| p.to_array()).collect(),
        bounds: vector_bounds(bounds, params.len()),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Decoded {
    pub params: Vec<TrackParams>,
    /// Values that were outside their bounds and got clamped.
    pub clamped: usize,
}

pub fn decode_params(v: &ParamVector, tracks: usize) -> Result<Decoded> {
    decode_values(&v.values, &v.bounds, tracks)
}

pub fn decode_values(values: &[f64], bounds: &[(f64, f64)], tracks: usize) -> Result<Decoded> {
    let expected = tracks * PARAMS_PER_TRACK;
    if values.len() != expected || bounds.len() != expected {
        return Err(Error::LengthMismatch {
            len: values.len(),
            expected,
        });
    }
    let mut clamped = 0;
    let fixed: Vec<f64> = values
        .iter()
        .zip(bounds)
        .map(|(&v, &(lo, hi))| {
            let c = if v.is_nan() { lo } else { v.clamp(lo, hi) };
            if c != v {
                clamped += 1;
            }
            c
        })
        .collect();
    Ok(Decoded {
        params: fixed
            .chunks_exact(PARAMS_PER_TRACK)
            .map(TrackParams::from_slice)
            .collect(),
        clamped,
    })
}
