//! Session model: tracks, subgroup assignments and engine settings.

use std::collections::HashSet;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::audio::AudioClip;
use crate::error::{Error, Result};
use crate::fx::ParamBounds;
use crate::metric::MetricConfig;
use crate::pso::PsoConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InstrumentClass {
    Drums,
    Vox,
    Bass,
    Keys,
    Guitars,
    Other,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Track {
    pub id: String,
    pub name: String,
    pub clip: AudioClip,
    pub instrument_class: InstrumentClass,
    pub is_vocal: bool,
    /// File the clip was read from, if any.
    pub source: Option<PathBuf>,
}

impl Track {
    pub fn new(id: impl Into<String>, clip: AudioClip, class: InstrumentClass) -> Track {
        let id = id.into();
        Track {
            name: id.clone(),
            id,
            clip,
            instrument_class: class,
            is_vocal: class == InstrumentClass::Vox,
            source: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubgroupSpec {
    pub name: String,
    pub member_ids: Vec<String>,
    pub is_vocal_group: bool,
}

impl SubgroupSpec {
    pub fn new(name: impl Into<String>, members: &[&str], is_vocal_group: bool) -> SubgroupSpec {
        SubgroupSpec {
            name: name.into(),
            member_ids: members.iter().map(|s| s.to_string()).collect(),
            is_vocal_group,
        }
    }
}

/// Part of each clip the optimiser evaluates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisWindow {
    pub start_s: f64,
    pub length_s: f64,
}

impl AnalysisWindow {
    pub fn validate(&self) -> Result<()> {
        if !(self.start_s >= 0.0 && self.start_s.is_finite() && self.length_s > 0.0 && self.length_s.is_finite()) {
            return Err(Error::InvalidConfig(format!("analysis window {self:?}")));
        }
        Ok(())
    }

    /// `(start, len)` in samples.
    pub fn to_samples(&self, sample_rate: u32) -> (usize, usize) {
        let fs = sample_rate as f64;
        ((self.start_s * fs).round() as usize, (self.length_s * fs).round() as usize)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EngineConfig {
    pub metric: MetricConfig,
    pub pso: PsoConfig,
    pub analysis_window: Option<AnalysisWindow>,
    pub instrument_bounds: ParamBounds,
    pub subgroup_bounds: ParamBounds,
    pub track_target_lufs: f64,
    pub vocal_target_lufs: f64,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            metric: MetricConfig::default(),
            pso: PsoConfig::default(),
            analysis_window: None,
            instrument_bounds: ParamBounds::instrument(),
            subgroup_bounds: ParamBounds::subgroup(),
            track_target_lufs: -24.0,
            vocal_target_lufs: -18.0,
        }
    }
}

impl EngineConfig {
    pub fn validate(&self) -> Result<()> {
        self.metric.validate()?;
        self.pso.validate()?;
        self.instrument_bounds.validate()?;
        self.subgroup_bounds.validate()?;
        if let Some(w) = &self.analysis_window {
            w.validate()?;
        }
        if !(self.track_target_lufs.is_finite() && self.vocal_target_lufs.is_finite()) {
            return Err(Error::InvalidConfig("loudness targets must be finite".into()));
        }
        Ok(())
    }

    pub fn target_lufs(&self, vocal: bool) -> f64 {
        if vocal {
            self.vocal_target_lufs
        } else {
            self.track_target_lufs
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Session {
    pub tracks: Vec<Track>,
    pub subgroups: Vec<SubgroupSpec>,
    pub engine_config: EngineConfig,
}

impl Session {
    pub fn new(tracks: Vec<Track>, subgroups: Vec<SubgroupSpec>, engine_config: EngineConfig) -> Result<Session> {
        let s = Session {
            tracks,
            subgroups,
            engine_config,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidSession(m));
        if self.tracks.is_empty() {
            return bad("session has no tracks".into());
        }
        let rate = self.tracks[0].clip.sample_rate();
        let mut ids = HashSet::new();
        for t in &self.tracks {
            if !ids.insert(t.id.as_str()) {
                return bad(format!("duplicate track id {:?}", t.id));
            }
            if t.is_vocal != (t.instrument_class == InstrumentClass::Vox) {
                return bad(format!("track {:?}: vocal flag must match class vox", t.id));
            }
            if t.clip.sample_rate() != rate {
                return bad(format!(
                    "track {:?} is {} Hz, session is {} Hz",
                    t.id,
                    t.clip.sample_rate(),
                    rate
                ));
            }
        }
        if !self.subgroups.is_empty() {
            let mut seen = HashSet::new();
            for g in &self.subgroups {
                if g.member_ids.is_empty() {
                    return bad(format!("subgroup {:?} has no members", g.name));
                }
                for m in &g.member_ids {
                    if !ids.contains(m.as_str()) {
                        return bad(format!("subgroup {:?}: unknown track {:?}", g.name, m));
                    }
                    if !seen.insert(m.as_str()) {
                        return bad(format!("track {m:?} is in more than one subgroup"));
                    }
                }
            }
            if let Some(t) = self.tracks.iter().find(|t| !seen.contains(t.id.as_str())) {
                return bad(format!("track {:?} is in no subgroup", t.id));
            }
        }
        self.engine_config.validate()
    }

    pub fn sample_rate(&self) -> u32 {
        self.tracks[0].clip.sample_rate()
    }

    pub fn track(&self, id: &str) -> Option<&Track> {
        self.tracks.iter().find(|t| t.id == id)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn clip() -> AudioClip {
        AudioClip::new(44_100, vec![0.1; 100]).unwrap()
    }

    fn tracks() -> Vec<Track> {
        vec![
            Track::new("kick", clip(), InstrumentClass::Drums),
            Track::new("snare", clip(), InstrumentClass::Drums),
            Track::new("vox", clip(), InstrumentClass::Vox),
        ]
    }

    #[test]
    fn vocal_flag_follows_class() {
        let t = tracks();
        assert!(t[2].is_vocal && !t[0].is_vocal);
    }

    #[test]
    fn valid_sessions() {
        assert!(Session::new(tracks(), vec![], EngineConfig::default()).is_ok());
        let groups = vec![
            SubgroupSpec::new("Drums", &["kick", "snare"], false),
            SubgroupSpec::new("Vocals", &["vox"], true),
        ];
        assert!(Session::new(tracks(), groups, EngineConfig::default()).is_ok());
    }

    #[test]
    fn invalid_sessions() {
        let cfg = EngineConfig::default;
        assert!(Session::new(vec![], vec![], cfg()).is_err());

        let mut dup = tracks();
        dup[1].id = "kick".into();
        assert!(Session::new(dup, vec![], cfg()).is_err());

        let mut mixed = tracks();
        mixed[0].clip = AudioClip::new(48_000, vec![0.0; 10]).unwrap();
        assert!(Session::new(mixed, vec![], cfg()).is_err());

        let mut flag = tracks();
        flag[0].is_vocal = true;
        assert!(Session::new(flag, vec![], cfg()).is_err());

        let missing = vec![SubgroupSpec::new("Drums", &["kick", "snare"], false)];
        assert!(Session::new(tracks(), missing, cfg()).is_err());

        let twice = vec![
            SubgroupSpec::new("A", &["kick", "snare"], false),
            SubgroupSpec::new("B", &["snare", "vox"], false),
        ];
        assert!(Session::new(tracks(), twice, cfg()).is_err());

        let empty = vec![
            SubgroupSpec::new("A", &["kick", "snare", "vox"], false),
            SubgroupSpec::new("B", &[], false),
        ];
        assert!(Session::new(tracks(), empty, cfg()).is_err());

        let unknown = vec![SubgroupSpec::new("A", &["kick", "snare", "vox", "bass"], false)];
        assert!(Session::new(tracks(), unknown, cfg()).is_err());
    }
}
