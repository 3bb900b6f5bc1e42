mod common;

use automix::fx::process_track;
use automix::loudness::integrated_loudness;
use automix::pipeline::{mix_flat, mix_subgrouped, render, StageEvaluator, FINAL_STAGE, FLAT_STAGE};
use automix::report::SessionManifest;
use automix::{EngineConfig, MetricConfig, ParamBounds, Session, SubgroupSpec, TrackParams};

use common::{overlap_tracks, rms_diff};

fn quick_config() -> EngineConfig {
    let mut cfg = EngineConfig::default();
    cfg.pso.swarm_size = 6;
    cfg.pso.max_iterations = 4;
    cfg.pso.rng_seed = 3;
    cfg
}

#[test]
fn dimension_is_ten_per_track() {
    let clips: Vec<_> = overlap_tracks(0.5).into_iter().map(|t| t.clip).collect();
    let ev = StageEvaluator::new(&clips, None, ParamBounds::instrument(), MetricConfig::default()).unwrap();
    assert_eq!(ev.dimension(), 80);
    assert_eq!(ev.vector_bounds().len(), 80);
}

#[test]
fn render_identity_is_plain_sum_and_order_free() {
    let clips: Vec<_> = overlap_tracks(1.0).into_iter().map(|t| t.clip).collect();
    let bounds = ParamBounds::instrument();
    let id = vec![TrackParams::identity(&bounds); clips.len()];
    let mixed = render(&clips, &id).unwrap();
    let plain = automix::audio::sum_tracks(&clips).unwrap();
    assert!(rms_diff(&mixed, &plain) < 1e-12);

    let mut p = id.clone();
    p[2].eq.gains_db = [3.0, -2.0, 1.0, 0.0, -4.0, 2.0];
    p[5].drc.ratio = 3.0;
    p[5].drc.threshold_db = -30.0;
    let fwd = render(&clips, &p).unwrap();
    let rev_clips: Vec<_> = clips.iter().rev().cloned().collect();
    let rev_p: Vec<_> = p.iter().rev().copied().collect();
    let rev = render(&rev_clips, &rev_p).unwrap();
    assert_eq!(fwd, rev);

    let one = render(&clips[5..6], &p[5..6]).unwrap();
    assert_eq!(one, process_track(&clips[5], &p[5]).unwrap());
}

#[test]
fn flat_mix_has_single_stage_and_improves() {
    let session = Session::new(overlap_tracks(1.0)[..3].to_vec(), Vec::new(), quick_config()).unwrap();
    let r = mix_flat(&session).unwrap();
    assert_eq!(r.stage_reports.len(), 1);
    let st = &r.stage_reports[0];
    assert_eq!(st.name, FLAT_STAGE);
    assert!(st.final_f <= st.initial_f);
    assert!(st.final_f <= st.identity_f);
    assert!(st.iterations >= 1 && st.iterations <= 4);
    assert_eq!(r.final_params.len(), 3);
    assert_eq!(r.final_mix.len(), session.tracks[0].clip.len());
}

#[test]
fn subgroup_stages_stems_and_bounds() {
    let tracks = overlap_tracks(1.0);
    let groups = vec![
        SubgroupSpec::new("Drums", &["kick", "snare"], false),
        SubgroupSpec::new("Hats", &["hats"], false),
        SubgroupSpec::new("Low", &["bass"], false),
        SubgroupSpec::new("Music", &["keys", "guitar", "pad"], false),
        SubgroupSpec::new("Vocals", &["vox"], true),
    ];
    let session = Session::new(tracks, groups, quick_config()).unwrap();
    let r = mix_subgrouped(&session).unwrap();
    assert_eq!(r.stage_reports.len(), 6);
    assert_eq!(r.stage_reports[5].name, FINAL_STAGE);
    for k in [1, 2, 4] {
        assert!(r.stage_reports[k].skipped.is_some());
        assert_eq!(r.stage_reports[k].delta_m(), 0.0);
    }
    for (k, st) in r.stage_reports.iter().enumerate() {
        assert_eq!(st.seed, 3 + k as u64);
    }

    assert_eq!(r.stems.len(), 5);
    for (name, stem) in &r.stems {
        let target = if name == "Vocals" { -18.0 } else { -24.0 };
        let l = integrated_loudness(stem).unwrap().integrated_lufs;
        assert!((l - target).abs() <= 0.2, "{name}: {l}");
    }

    let sub = ParamBounds::subgroup();
    let fin: Vec<_> = r.final_params.iter().filter(|a| a.stage == FINAL_STAGE).collect();
    assert_eq!(fin.len(), 5);
    for a in fin {
        assert!(sub.contains(&a.params));
        assert!(a.params.eq.gains_db.iter().all(|g| g.abs() <= 3.0));
    }
}

#[test]
fn mixes_are_deterministic() {
    let session = Session::new(overlap_tracks(0.8)[..3].to_vec(), Vec::new(), quick_config()).unwrap();
    let a = mix_flat(&session).unwrap();
    let b = mix_flat(&session).unwrap();
    assert_eq!(a.final_mix, b.final_mix);
    assert_eq!(a.final_params, b.final_params);
}

#[test]
fn manifest_round_trip_preserves_session() {
    let dir = tempfile::tempdir().unwrap();
    let mut tracks = overlap_tracks(0.5);
    for t in &mut tracks {
        let path = dir.path().join(format!("{}.wav", t.id));
        automix::audio::write_wav(&t.clip, &path, automix::audio::BitDepth::Float32).unwrap();
        t.source = Some(path);
    }
    let session = Session::new(tracks, common::overlap_subgroups(), quick_config()).unwrap();
    let manifest = SessionManifest::from_session(&session).unwrap();
    let text = manifest.to_json().unwrap();
    let origin = dir.path().join("session.json");
    let again = SessionManifest::parse(&text, &origin).unwrap();
    assert_eq!(manifest, again);
    let back = again.into_session(dir.path(), &origin).unwrap();
    assert_eq!(back.tracks.len(), session.tracks.len());
    for (a, b) in back.tracks.iter().zip(&session.tracks) {
        assert_eq!(a.id, b.id);
        assert_eq!(a.instrument_class, b.instrument_class);
        assert_eq!(a.is_vocal, b.is_vocal);
        assert!(rms_diff(&a.clip, &b.clip) < 1e-7);
    }
    assert_eq!(back.subgroups, session.subgroups);
    assert_eq!(back.engine_config.pso.swarm_size, 6);
    assert_eq!(back.engine_config.pso.rng_seed, 3);
}
