//! End-to-end mixing: loudness normalisation, per-stage optimisation and
//! rendering, either flat or through subgroup stems.

use std::sync::Arc;

use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::audio::{sum_tracks, AudioClip};
use crate::error::{Error, Result};
use crate::fx::{decode_values, encode_params, process_track, vector_bounds, ParamBounds, TrackParams};
use crate::loudness::normalize_to;
use crate::metric::{objective, MaskingResult, MetricConfig};
use crate::pso::{optimize_seeded, Evaluation, PsoTrace, StopReason};
use crate::psycho::PsychoModel;
use crate::session::{AnalysisWindow, EngineConfig, Session};

/// Scores parameter sets for one stage on the analysis segment of its
/// input clips.
pub struct StageEvaluator {
    model: Arc<PsychoModel>,
    clips: Vec<AudioClip>,
    bounds: ParamBounds,
    metric: MetricConfig,
}

impl StageEvaluator {
    pub fn new(
        clips: &[AudioClip],
        window: Option<AnalysisWindow>,
        bounds: ParamBounds,
        metric: MetricConfig,
    ) -> Result<StageEvaluator> {
        let first = clips
            .first()
            .ok_or_else(|| Error::InvalidConfig("stage has no tracks".into()))?;
        let rate = first.sample_rate();
        bounds.validate()?;
        metric.validate()?;
        let len = clips.iter().map(AudioClip::len).max().unwrap_or(0);
        let segments = clips
            .iter()
            .map(|c| {
                if c.sample_rate() != rate {
                    return Err(Error::SampleRateMismatch {
                        expected: rate,
                        found: c.sample_rate(),
                    });
                }
                let padded = c.padded_to(len);
                Ok(match window {
                    Some(w) => {
                        let (start, n) = w.to_samples(rate);
                        padded.segment(start, n)
                    }
                    None => padded,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(StageEvaluator {
            model: PsychoModel::shared(rate)?,
            clips: segments,
            bounds,
            metric,
        })
    }

    pub fn track_count(&self) -> usize {
        self.clips.len()
    }

    pub fn dimension(&self) -> usize {
        self.clips.len() * crate::fx::PARAMS_PER_TRACK
    }

    pub fn segments(&self) -> &[AudioClip] {
        &self.clips
    }

    pub fn bounds(&self) -> &ParamBounds {
        &self.bounds
    }

    pub fn vector_bounds(&self) -> Vec<(f64, f64)> {
        vector_bounds(&self.bounds, self.clips.len())
    }

    pub fn identity_params(&self) -> Vec<TrackParams> {
        vec![TrackParams::identity(&self.bounds); self.clips.len()]
    }

    pub fn process(&self, params: &[TrackParams]) -> Result<Vec<AudioClip>> {
        if params.len() != self.clips.len() {
            return Err(Error::LengthMismatch {
                len: params.len(),
                expected: self.clips.len(),
            });
        }
        self.clips
            .par_iter()
            .zip(params)
            .map(|(c, p)| process_track(c, p))
            .collect()
    }

    pub fn evaluate(&self, params: &[TrackParams]) -> Result<MaskingResult> {
        let processed = self.process(params)?;
        objective(&self.model, &processed, &self.metric)
    }

    /// Objective of a flat parameter vector; any failure scores NaN.
    pub fn evaluate_values(&self, values: &[f64]) -> Evaluation {
        let scored = decode_values(values, &self.vector_bounds(), self.clips.len())
            .and_then(|d| self.evaluate(&d.params));
        match scored {
            Ok(r) => Evaluation {
                f: r.objective,
                m_total: r.m_total,
                m_diff: r.m_diff,
            },
            Err(e) => {
                warn!("candidate evaluation failed: {e}");
                Evaluation {
                    f: f64::NAN,
                    m_total: f64::NAN,
                    m_diff: f64::NAN,
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageReport {
    pub name: String,
    pub track_ids: Vec<String>,
    pub dimension: usize,
    pub iterations: usize,
    pub seed: u64,
    /// Objective of the unprocessed (identity) parameters.
    pub identity_f: f64,
    /// Best objective after the first iteration.
    pub initial_f: f64,
    pub final_f: f64,
    pub m_before: Vec<f64>,
    pub m_after: Vec<f64>,
    pub stop_reason: Option<StopReason>,
    /// Set when the stage ran no optimisation.
    pub skipped: Option<String>,
    pub nan_evaluations: usize,
    pub bound_violations: usize,
    #[serde(skip)]
    pub trace: Option<PsoTrace>,
}

impl StageReport {
    pub fn track_count(&self) -> usize {
        self.track_ids.len()
    }

    pub fn delta_m(&self) -> f64 {
        self.initial_f - self.final_f
    }

    /// Mean per-track masking before optimisation.
    pub fn mean_m_before(&self) -> f64 {
        if self.m_before.is_empty() {
            0.0
        } else {
            self.m_before.iter().sum::<f64>() / self.m_before.len() as f64
        }
    }
}

#[derive(Clone, Debug)]
pub struct StageOutcome {
    pub params: Vec<TrackParams>,
    pub report: StageReport,
}

/// Optimises one stage. Stages with fewer than two tracks are not optimised.
pub fn optimize_stage(
    name: &str,
    ids: &[String],
    clips: &[AudioClip],
    bounds: ParamBounds,
    cfg: &EngineConfig,
    seed: u64,
) -> Result<StageOutcome> {
    let eval = StageEvaluator::new(clips, cfg.analysis_window, bounds, cfg.metric)?;
    let identity = eval.identity_params();
    let before = eval.evaluate(&identity)?;
    let mut report = StageReport {
        name: name.to_string(),
        track_ids: ids.to_vec(),
        dimension: eval.dimension(),
        iterations: 0,
        seed,
        identity_f: before.objective,
        initial_f: before.objective,
        final_f: before.objective,
        m_before: before.per_track_m.clone(),
        m_after: before.per_track_m.clone(),
        stop_reason: None,
        skipped: None,
        nan_evaluations: 0,
        bound_violations: 0,
        trace: None,
    };
    if clips.len() < 2 {
        info!("stage {name}: single track, optimisation skipped");
        report.skipped = Some("single track".into());
        return Ok(StageOutcome {
            params: identity,
            report,
        });
    }

    let pso = crate::pso::PsoConfig {
        rng_seed: seed,
        ..cfg.pso
    };
    let start = encode_params(&identity, &bounds).values;
    let outcome = optimize_seeded(|x| eval.evaluate_values(x), &eval.vector_bounds(), &pso, Some(&start))?;
    let params = decode_values(&outcome.best, &eval.vector_bounds(), clips.len())?.params;
    let after = eval.evaluate(&params)?;
    let trace = outcome.trace;
    info!(
        "stage {name}: {} iterations, f {:.4} -> {:.4} ({})",
        trace.iterations(),
        before.objective,
        trace.final_f(),
        trace.stop_reason
    );
    report.iterations = trace.iterations();
    report.initial_f = trace.initial_f();
    report.final_f = trace.final_f();
    report.m_after = after.per_track_m;
    report.stop_reason = Some(trace.stop_reason);
    report.nan_evaluations = trace.nan_evaluations;
    report.bound_violations = trace.bound_violations;
    report.trace = Some(trace);
    Ok(StageOutcome { params, report })
}

/// Processes each clip with its parameters and sums the results.
pub fn render(clips: &[AudioClip], params: &[TrackParams]) -> Result<AudioClip> {
    if clips.len() != params.len() {
        return Err(Error::LengthMismatch {
            len: params.len(),
            expected: clips.len(),
        });
    }
    let processed: Vec<AudioClip> = clips
        .par_iter()
        .zip(params)
        .map(|(c, p)| process_track(c, p))
        .collect::<Result<_>>()?;
    sum_tracks(&processed)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalizationNote {
    pub id: String,
    pub target_lufs: f64,
    /// `None` when the clip could not be measured and was left as-is.
    pub gain_db: Option<f64>,
}

/// Normalises a clip to `target`, leaving silent or too-short clips unchanged.
pub fn normalize_or_keep(id: &str, clip: &AudioClip, target: f64) -> Result<(AudioClip, NormalizationNote)> {
    let note = |gain_db| NormalizationNote {
        id: id.to_string(),
        target_lufs: target,
        gain_db,
    };
    match normalize_to(clip, target) {
        Ok((c, g)) => Ok((c, note(Some(g)))),
        Err(e @ (Error::CannotNormalizeSilence | Error::ClipTooShort { .. })) => {
            warn!("{id}: {e}; left unnormalised");
            Ok((clip.clone(), note(None)))
        }
        Err(e) => Err(e),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MixMode {
    Flat,
    Subgrouped,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamAssignment {
    /// Track id, or subgroup name for stems.
    pub id: String,
    pub stage: String,
    pub params: TrackParams,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MixResult {
    pub mode: MixMode,
    pub final_mix: AudioClip,
    pub stage_reports: Vec<StageReport>,
    pub final_params: Vec<ParamAssignment>,
    /// Normalised subgroup stems, in subgroup order.
    pub stems: Vec<(String, AudioClip)>,
    pub normalization: Vec<NormalizationNote>,
}

fn normalize_session(session: &Session) -> Result<(Vec<AudioClip>, Vec<NormalizationNote>)> {
    let cfg = &session.engine_config;
    let results: Vec<(AudioClip, NormalizationNote)> = session
        .tracks
        .par_iter()
        .map(|t| normalize_or_keep(&t.id, &t.clip, cfg.target_lufs(t.is_vocal)))
        .collect::<Result<_>>()?;
    Ok(results.into_iter().unzip())
}

pub const FLAT_STAGE: &str = "All Tracks";
pub const FINAL_STAGE: &str = "Final Mix";

/// Optimises all tracks together in one stage.
pub fn mix_flat(session: &Session) -> Result<MixResult> {
    session.validate()?;
    let cfg = &session.engine_config;
    let (clips, normalization) = normalize_session(session)?;
    let ids: Vec<String> = session.tracks.iter().map(|t| t.id.clone()).collect();
    let stage = optimize_stage(FLAT_STAGE, &ids, &clips, cfg.instrument_bounds, cfg, cfg.pso.rng_seed)?;
    let final_mix = render(&clips, &stage.params)?;
    Ok(MixResult {
        mode: MixMode::Flat,
        final_mix,
        final_params: ids
            .into_iter()
            .zip(&stage.params)
            .map(|(id, p)| ParamAssignment {
                id,
                stage: FLAT_STAGE.into(),
                params: *p,
            })
            .collect(),
        stage_reports: vec![stage.report],
        stems: Vec::new(),
        normalization,
    })
}

/// Mixes each subgroup into a normalised stem, then optimises across stems.
pub fn mix_subgrouped(session: &Session) -> Result<MixResult> {
    session.validate()?;
    if session.subgroups.is_empty() {
        return Err(Error::InvalidSession("no subgroups declared".into()));
    }
    let cfg = &session.engine_config;
    let (clips, mut normalization) = normalize_session(session)?;
    let index_of = |id: &str| session.tracks.iter().position(|t| t.id == id).expect("validated member id");

    let mut reports = Vec::new();
    let mut final_params = Vec::new();
    let mut stems = Vec::new();
    for (k, group) in session.subgroups.iter().enumerate() {
        let members: Vec<AudioClip> = group.member_ids.iter().map(|id| clips[index_of(id)].clone()).collect();
        let seed = cfg.pso.rng_seed.wrapping_add(k as u64);
        let stage = optimize_stage(&group.name, &group.member_ids, &members, cfg.instrument_bounds, cfg, seed)?;
        let stem = render(&members, &stage.params)?;
        let (stem, note) = normalize_or_keep(&group.name, &stem, cfg.target_lufs(group.is_vocal_group))?;
        normalization.push(note);
        final_params.extend(group.member_ids.iter().zip(&stage.params).map(|(id, p)| ParamAssignment {
            id: id.clone(),
            stage: group.name.clone(),
            params: *p,
        }));
        reports.push(stage.report);
        stems.push((group.name.clone(), stem));
    }

    let names: Vec<String> = stems.iter().map(|(n, _)| n.clone()).collect();
    let stem_clips: Vec<AudioClip> = stems.iter().map(|(_, c)| c.clone()).collect();
    let seed = cfg.pso.rng_seed.wrapping_add(session.subgroups.len() as u64);
    let stage = optimize_stage(FINAL_STAGE, &names, &stem_clips, cfg.subgroup_bounds, cfg, seed)?;
    let final_mix = render(&stem_clips, &stage.params)?;
    final_params.extend(names.iter().zip(&stage.params).map(|(n, p)| ParamAssignment {
        id: n.clone(),
        stage: FINAL_STAGE.into(),
        params: *p,
    }));
    reports.push(stage.report);
    Ok(MixResult {
        mode: MixMode::Subgrouped,
        final_mix,
        stage_reports: reports,
        final_params,
        stems,
        normalization,
    })
}

/// Subgrouped when the session declares subgroups and `use_subgroups` is set,
/// flat otherwise.
pub fn mix(session: &Session, use_subgroups: bool) -> Result<MixResult> {
    if use_subgroups && !session.subgroups.is_empty() {
        mix_subgrouped(session)
    } else {
        mix_flat(session)
    }
}

/// Masking of the normalised, unprocessed tracks.
pub fn analyze_session(session: &Session) -> Result<MaskingResult> {
    session.validate()?;
    let cfg = &session.engine_config;
    let (clips, _) = normalize_session(session)?;
    let eval = StageEvaluator::new(&clips, cfg.analysis_window, cfg.instrument_bounds, cfg.metric)?;
    eval.evaluate(&eval.identity_params())
}

/// Loudness-normalised copies of every track, with the applied gains.
pub fn normalize_tracks(session: &Session) -> Result<(Vec<AudioClip>, Vec<NormalizationNote>)> {
    session.validate()?;
    normalize_session(session)
}
