#![allow(dead_code)]

use automix::synth::band_noise;
use automix::{AudioClip, EngineConfig, InstrumentClass, Session, SubgroupSpec, Track};

pub const RATE: u32 = 44_100;

/// Eight stationary noise tracks whose bands overlap heavily.
pub fn overlap_tracks(secs: f64) -> Vec<Track> {
    let spec: [(&str, InstrumentClass, f64, f64, f64); 8] = [
        ("kick", InstrumentClass::Drums, 40.0, 200.0, -14.0),
        ("snare", InstrumentClass::Drums, 150.0, 3000.0, -18.0),
        ("hats", InstrumentClass::Drums, 3000.0, 15000.0, -24.0),
        ("bass", InstrumentClass::Bass, 50.0, 500.0, -16.0),
        ("keys", InstrumentClass::Keys, 200.0, 2500.0, -20.0),
        ("guitar", InstrumentClass::Guitars, 300.0, 5000.0, -20.0),
        ("pad", InstrumentClass::Other, 100.0, 8000.0, -22.0),
        ("vox", InstrumentClass::Vox, 250.0, 4000.0, -16.0),
    ];
    spec.iter()
        .enumerate()
        .map(|(i, &(id, class, lo, hi, level))| {
            Track::new(id, band_noise(RATE, lo, hi, level, secs, 100 + i as u64).unwrap(), class)
        })
        .collect()
}

pub fn overlap_subgroups() -> Vec<SubgroupSpec> {
    vec![
        SubgroupSpec::new("Drums", &["kick", "snare", "hats"], false),
        SubgroupSpec::new("Bass", &["bass"], false),
        SubgroupSpec::new("Music", &["keys", "guitar", "pad"], false),
        SubgroupSpec::new("Vocals", &["vox"], true),
    ]
}

pub fn overlap_session(secs: f64, cfg: EngineConfig) -> Session {
    Session::new(overlap_tracks(secs), overlap_subgroups(), cfg).unwrap()
}

/// Masker and maskee of the two-track de-masking scenario.
pub fn masker_maskee(secs: f64) -> (AudioClip, AudioClip) {
    (
        band_noise(RATE, 150.0, 350.0, -6.0, secs, 1).unwrap(),
        band_noise(RATE, 200.0, 300.0, -30.0, secs, 2).unwrap(),
    )
}

pub fn rms_diff(a: &AudioClip, b: &AudioClip) -> f64 {
    assert_eq!(a.len(), b.len());
    let s: f64 = a.samples().iter().zip(b.samples()).map(|(x, y)| (x - y).powi(2)).sum();
    (s / a.len().max(1) as f64).sqrt()
}
