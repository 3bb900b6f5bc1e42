//! Session manifests, summary tables, JSON reports and CSV traces.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::audio::read_wav;
use crate::error::{Error, Result};
use crate::metric::{MaskingResult, MetricConfig};
use crate::pipeline::{MixMode, MixResult, NormalizationNote, ParamAssignment, StageReport};
use crate::pso::{PsoConfig, PsoTrace};
use crate::psycho::PsychoFrame;
use crate::session::{AnalysisWindow, EngineConfig, InstrumentClass, Session, SubgroupSpec, Track};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestTrack {
    pub path: PathBuf,
    pub name: String,
    pub class: InstrumentClass,
    /// Optional; must agree with `class` when given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vocal: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestSubgroup {
    pub name: String,
    pub members: Vec<String>,
    #[serde(default)]
    pub vocal: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ManifestMetric {
    pub t_max: f64,
    pub gate_db: f64,
}

impl Default for ManifestMetric {
    fn default() -> Self {
        let m = MetricConfig::default();
        ManifestMetric {
            t_max: m.t_max,
            gate_db: m.activity_gate_db,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ManifestPso {
    pub swarm: usize,
    pub max_iters: usize,
    pub tolerance: f64,
    pub seed: u64,
}

impl Default for ManifestPso {
    fn default() -> Self {
        let p = PsoConfig::default();
        ManifestPso {
            swarm: p.swarm_size,
            max_iters: p.max_iterations,
            tolerance: p.stall_tolerance,
            seed: p.rng_seed,
        }
    }
}

/// On-disk description of a session. Track paths are relative to the
/// manifest's directory; track names double as ids.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SessionManifest {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_rate_expected: Option<u32>,
    pub tracks: Vec<ManifestTrack>,
    #[serde(default)]
    pub subgroups: Vec<ManifestSubgroup>,
    #[serde(default)]
    pub metric: ManifestMetric,
    #[serde(default)]
    pub pso: ManifestPso,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub analysis_window: Option<AnalysisWindow>,
}

impl SessionManifest {
    pub fn parse(text: &str, origin: &Path) -> Result<SessionManifest> {
        serde_json::from_str(text).map_err(|e| Error::Manifest {
            path: origin.to_path_buf(),
            message: e.to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<SessionManifest> {
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        SessionManifest::parse(&text, path)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn engine_config(&self) -> EngineConfig {
        let mut cfg = EngineConfig::default();
        cfg.metric.t_max = self.metric.t_max;
        cfg.metric.activity_gate_db = self.metric.gate_db;
        cfg.pso.swarm_size = self.pso.swarm;
        cfg.pso.max_iterations = self.pso.max_iters;
        cfg.pso.stall_tolerance = self.pso.tolerance;
        cfg.pso.rng_seed = self.pso.seed;
        cfg.analysis_window = self.analysis_window;
        cfg
    }

    /// Reads every track (paths resolved against `base_dir`) and builds a
    /// validated session.
    pub fn into_session(&self, base_dir: &Path, origin: &Path) -> Result<Session> {
        let manifest_err = |message: String| Error::Manifest {
            path: origin.to_path_buf(),
            message,
        };
        let mut tracks = Vec::with_capacity(self.tracks.len());
        for (i, t) in self.tracks.iter().enumerate() {
            let vocal = t.class == InstrumentClass::Vox;
            if t.vocal.is_some_and(|v| v != vocal) {
                return Err(manifest_err(format!(
                    "tracks[{i}] ({}): vocal flag must be true exactly for class vox",
                    t.name
                )));
            }
            let path = base_dir.join(&t.path);
            let clip = read_wav(&path)?;
            if let Some(rate) = self.sample_rate_expected {
                if clip.sample_rate() != rate {
                    return Err(manifest_err(format!(
                        "tracks[{i}] ({}): {} Hz, manifest expects {rate} Hz",
                        t.name,
                        clip.sample_rate()
                    )));
                }
            }
            let mut track = Track::new(t.name.clone(), clip, t.class);
            track.source = Some(path);
            tracks.push(track);
        }
        let subgroups = self
            .subgroups
            .iter()
            .map(|g| SubgroupSpec {
                name: g.name.clone(),
                member_ids: g.members.clone(),
                is_vocal_group: g.vocal,
            })
            .collect();
        Session::new(tracks, subgroups, self.engine_config()).map_err(|e| manifest_err(e.to_string()))
    }

    /// Manifest describing `session`. Tracks without a source path are an
    /// error since the manifest cannot reference them.
    pub fn from_session(session: &Session) -> Result<SessionManifest> {
        let cfg = &session.engine_config;
        let tracks = session
            .tracks
            .iter()
            .map(|t| {
                let path = t
                    .source
                    .clone()
                    .ok_or_else(|| Error::InvalidSession(format!("track {:?} has no source file", t.id)))?;
                Ok(ManifestTrack {
                    path,
                    name: t.id.clone(),
                    class: t.instrument_class,
                    vocal: Some(t.is_vocal),
                })
            })
            .collect::<Result<_>>()?;
        Ok(SessionManifest {
            sample_rate_expected: Some(session.sample_rate()),
            tracks,
            subgroups: session
                .subgroups
                .iter()
                .map(|g| ManifestSubgroup {
                    name: g.name.clone(),
                    members: g.member_ids.clone(),
                    vocal: g.is_vocal_group,
                })
                .collect(),
            metric: ManifestMetric {
                t_max: cfg.metric.t_max,
                gate_db: cfg.metric.activity_gate_db,
            },
            pso: ManifestPso {
                swarm: cfg.pso.swarm_size,
                max_iters: cfg.pso.max_iterations,
                tolerance: cfg.pso.stall_tolerance,
                seed: cfg.pso.rng_seed,
            },
            analysis_window: cfg.analysis_window,
        })
    }
}

/// Parses a manifest file and loads its session.
pub fn load_session(path: &Path) -> Result<Session> {
    let manifest = SessionManifest::load(path)?;
    let base = path.parent().unwrap_or(Path::new("."));
    manifest.into_session(base, path)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub stage: String,
    pub iterations: usize,
    pub delta_m: f64,
    pub mean_m: f64,
    pub track_count: usize,
}

impl SummaryRow {
    pub fn from_stage(r: &StageReport) -> SummaryRow {
        SummaryRow {
            stage: r.name.clone(),
            iterations: r.iterations,
            delta_m: r.delta_m(),
            mean_m: r.mean_m_before(),
            track_count: r.track_count(),
        }
    }

    pub fn render(&self) -> String {
        format!(
            "{}  {}  {:.2}  {:.2} ({})",
            self.stage, self.iterations, self.delta_m, self.mean_m, self.track_count
        )
    }
}

pub const SUMMARY_HEADER: &str = "# stage  iterations  delta_m  mean_m_before (tracks)";

pub fn summary_rows(result: &MixResult) -> Vec<SummaryRow> {
    result.stage_reports.iter().map(SummaryRow::from_stage).collect()
}

pub fn write_summary<W: Write>(rows: &[SummaryRow], mut out: W) -> std::io::Result<()> {
    writeln!(out, "{SUMMARY_HEADER}")?;
    for r in rows {
        writeln!(out, "{}", r.render())?;
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageJson {
    #[serde(flatten)]
    pub report: StageReport,
    pub delta_m: f64,
    pub mean_m_before: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixReport {
    pub schema: u32,
    pub mode: MixMode,
    pub seed: u64,
    pub sample_rate: u32,
    pub mix_samples: usize,
    pub clipped_samples: usize,
    pub summary: Vec<SummaryRow>,
    pub stages: Vec<StageJson>,
    pub final_params: Vec<ParamAssignment>,
    pub normalization: Vec<NormalizationNote>,
}

impl MixReport {
    pub fn new(result: &MixResult, seed: u64, clipped_samples: usize) -> MixReport {
        MixReport {
            schema: SCHEMA_VERSION,
            mode: result.mode,
            seed,
            sample_rate: result.final_mix.sample_rate(),
            mix_samples: result.final_mix.len(),
            clipped_samples,
            summary: summary_rows(result),
            stages: result
                .stage_reports
                .iter()
                .map(|r| StageJson {
                    report: r.clone(),
                    delta_m: r.delta_m(),
                    mean_m_before: r.mean_m_before(),
                })
                .collect(),
            final_params: result.final_params.clone(),
            normalization: result.normalization.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrackMasking {
    pub id: String,
    #[serde(rename = "M_n")]
    pub m_n: f64,
    pub active_frames: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaskingReport {
    pub schema: u32,
    pub tracks: Vec<TrackMasking>,
    #[serde(rename = "M_T")]
    pub m_total: f64,
    #[serde(rename = "M_d")]
    pub m_diff: f64,
    pub f: f64,
}

impl MaskingReport {
    pub fn new(ids: &[String], r: &MaskingResult) -> MaskingReport {
        MaskingReport {
            schema: SCHEMA_VERSION,
            tracks: ids
                .iter()
                .zip(&r.per_track_m)
                .zip(&r.active_frame_counts)
                .map(|((id, &m_n), &active_frames)| TrackMasking {
                    id: id.clone(),
                    m_n,
                    active_frames,
                })
                .collect(),
            m_total: r.m_total,
            m_diff: r.m_diff,
            f: r.objective,
        }
    }
}

pub fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n").map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Columns: `iteration,f,m_total,m_diff,evaluations`.
pub fn write_trace_csv<W: Write>(trace: &PsoTrace, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in &trace.rows {
        w.serialize(row)?;
    }
    w.flush().map_err(|source| Error::Io {
        path: PathBuf::from("<trace>"),
        source,
    })
}

pub fn read_trace_csv(path: &Path) -> Result<Vec<crate::pso::TraceRow>> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

/// File-system friendly stage name.
pub fn slug(name: &str) -> String {
    let s: String = name
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() { c.to_ascii_lowercase() } else { '_' })
        .collect();
    s.trim_matches('_').to_string()
}

/// Writes one `trace_NN_<stage>.csv` per optimised stage and returns the
/// paths.
pub fn write_traces(result: &MixResult, dir: &Path) -> Result<Vec<PathBuf>> {
    let mkdir = |source| Error::Io {
        path: dir.to_path_buf(),
        source,
    };
    fs::create_dir_all(dir).map_err(mkdir)?;
    let mut paths = Vec::new();
    for (k, stage) in result.stage_reports.iter().enumerate() {
        let Some(trace) = &stage.trace else { continue };
        let path = dir.join(format!("trace_{:02}_{}.csv", k, slug(&stage.name)));
        let file = fs::File::create(&path).map_err(|source| Error::Io {
            path: path.clone(),
            source,
        })?;
        write_trace_csv(trace, file)?;
        paths.push(path);
    }
    Ok(paths)
}

/// Per-frame band dump: `frame,sb,esb,thr`.
pub fn write_psycho_csv<W: Write>(frames: &[PsychoFrame], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["frame", "sb", "esb", "thr"])?;
    for (k, f) in frames.iter().enumerate() {
        for (sb, (e, t)) in f.esb.iter().zip(&f.thr).enumerate() {
            w.write_record([k.to_string(), sb.to_string(), e.to_string(), t.to_string()])?;
        }
    }
    w.flush().map_err(|source| Error::Io {
        path: PathBuf::from("<psycho dump>"),
        source,
    })
}
