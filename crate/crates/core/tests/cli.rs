mod common;

use std::fs;
use std::path::Path;

use automix::audio::{read_wav, write_wav, BitDepth};
use automix::cli::{run, EXIT_IO, EXIT_MANIFEST, EXIT_OK};
use automix::loudness::integrated_loudness;
use automix::report::{read_trace_csv, MaskingReport, MixReport, SUMMARY_HEADER};
use automix::synth::band_noise;
use serde_json::json;

use common::RATE;

fn automix(args: &[&str]) -> i32 {
    run(std::iter::once("automix").chain(args.iter().copied()))
}

fn write_tracks(dir: &Path, names: &[&str], secs: f64) {
    for (i, name) in names.iter().enumerate() {
        let lo = 100.0 + 150.0 * i as f64;
        let clip = band_noise(RATE, lo, lo * 8.0, -20.0, secs, i as u64).unwrap();
        write_wav(&clip, dir.join(format!("{name}.wav")), BitDepth::Float32).unwrap();
    }
}

fn manifest(dir: &Path, value: serde_json::Value) -> String {
    let path = dir.join("session.json");
    fs::write(&path, value.to_string()).unwrap();
    path.display().to_string()
}

fn track_list(names: &[&str]) -> serde_json::Value {
    json!(names
        .iter()
        .map(|n| json!({"path": format!("{n}.wav"), "name": n, "class": if *n == "vox" { "vox" } else { "other" }}))
        .collect::<Vec<_>>())
}

const SMALL_PSO: &str = r#"{"swarm": 6, "max_iters": 4, "tolerance": 0.05, "seed": 1}"#;

fn small_pso() -> serde_json::Value {
    serde_json::from_str(SMALL_PSO).unwrap()
}

#[test]
fn analyze_single_track_reports_zero() {
    let dir = tempfile::tempdir().unwrap();
    write_tracks(dir.path(), &["solo"], 2.0);
    let s = manifest(dir.path(), json!({"tracks": track_list(&["solo"])}));
    let report = dir.path().join("r.json");
    assert_eq!(automix(&["analyze", "--session", &s, "--report", report.to_str().unwrap()]), EXIT_OK);
    let r: MaskingReport = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(r.schema, 1);
    assert_eq!(r.tracks.len(), 1);
    assert_eq!(r.tracks[0].m_n, 0.0);
    assert_eq!(r.f, 0.0);
    let raw: serde_json::Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert!(raw["tracks"][0]["M_n"].is_number() && raw["M_T"].is_number() && raw["M_d"].is_number());
}

#[test]
fn psycho_dump_has_band_rows() {
    let dir = tempfile::tempdir().unwrap();
    write_tracks(dir.path(), &["a", "b"], 1.0);
    let s = manifest(dir.path(), json!({"tracks": track_list(&["a", "b"])}));
    let dump = dir.path().join("dump");
    let report = dir.path().join("r.json");
    assert_eq!(
        automix(&[
            "analyze",
            "--session",
            &s,
            "--report",
            report.to_str().unwrap(),
            "--psycho-dump",
            dump.to_str().unwrap()
        ]),
        EXIT_OK
    );
    let text = fs::read_to_string(dump.join("a.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("frame,sb,esb,thr"));
    assert_eq!(lines.next().unwrap().split(',').take(2).collect::<Vec<_>>(), ["0", "0"]);
    assert_eq!(text.lines().count(), 1 + 87 * 21);
}

#[test]
fn no_subgroups_gives_one_summary_row() {
    let dir = tempfile::tempdir().unwrap();
    let names = ["a", "b", "c"];
    write_tracks(dir.path(), &names, 1.0);
    let s = manifest(
        dir.path(),
        json!({
            "tracks": track_list(&names),
            "subgroups": [{"name": "AB", "members": ["a", "b"]}, {"name": "C", "members": ["c"]}],
            "pso": small_pso()
        }),
    );
    let out = dir.path().join("m.wav");
    let summary = dir.path().join("summary.txt");
    let args = [
        "mix",
        "--session",
        &s,
        "--out",
        out.to_str().unwrap(),
        "--no-subgroups",
        "--summary",
        summary.to_str().unwrap(),
    ];
    assert_eq!(automix(&args), EXIT_OK);
    let text = fs::read_to_string(&summary).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows[0], SUMMARY_HEADER);
    assert_eq!(rows.len(), 2);
    assert!(rows[1].starts_with("All Tracks  "), "{}", rows[1]);
    assert!(rows[1].ends_with(" (3)"));
}

#[test]
fn five_subgroups_give_six_rows_recomputable_from_traces() {
    let dir = tempfile::tempdir().unwrap();
    let names = ["k", "s", "b", "g1", "g2", "p", "vox"];
    write_tracks(dir.path(), &names, 1.0);
    let s = manifest(
        dir.path(),
        json!({
            "sample_rate_expected": RATE,
            "tracks": track_list(&names),
            "subgroups": [
                {"name": "Drums", "members": ["k", "s"]},
                {"name": "Bass", "members": ["b"]},
                {"name": "Guitars", "members": ["g1", "g2"]},
                {"name": "Keys", "members": ["p"]},
                {"name": "Vocals", "members": ["vox"], "vocal": true}
            ],
            "pso": small_pso()
        }),
    );
    let out = dir.path().join("m.wav");
    let traces = dir.path().join("traces");
    let stems = dir.path().join("stems");
    let report = dir.path().join("mix.json");
    let summary = dir.path().join("summary.txt");
    let args = [
        "mix",
        "--session",
        &s,
        "--out",
        out.to_str().unwrap(),
        "--trace-dir",
        traces.to_str().unwrap(),
        "--stems-dir",
        stems.to_str().unwrap(),
        "--report",
        report.to_str().unwrap(),
        "--summary",
        summary.to_str().unwrap(),
        "--bit-depth",
        "16",
    ];
    assert_eq!(automix(&args), EXIT_OK);
    let text = fs::read_to_string(&summary).unwrap();
    assert_eq!(text.lines().count(), 1 + 6);

    let r: MixReport = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(r.schema, 1);
    assert_eq!(r.stages.len(), 6);
    assert_eq!(r.stages.last().unwrap().report.name, "Final Mix");
    for (k, st) in r.stages.iter().enumerate() {
        let trace = traces.join(format!("trace_{k:02}_{}.csv", automix::report::slug(&st.report.name)));
        if st.report.skipped.is_some() {
            assert!(!trace.exists());
            assert_eq!(st.delta_m, 0.0);
            continue;
        }
        let rows = read_trace_csv(&trace).unwrap();
        assert_eq!(rows.len(), st.report.iterations);
        let recomputed = rows[0].f - rows.last().unwrap().f;
        assert!((recomputed - st.delta_m).abs() <= 1e-6);
    }
    for stem in ["drums", "bass", "guitars", "keys", "vocals"] {
        assert!(stems.join(format!("{stem}.wav")).exists());
    }
    let mix = read_wav(&out).unwrap();
    assert_eq!(mix.len(), RATE as usize);
}

#[test]
fn normalize_writes_tracks_at_target() {
    let dir = tempfile::tempdir().unwrap();
    let names = ["a", "vox"];
    write_tracks(dir.path(), &names, 2.0);
    let s = manifest(dir.path(), json!({"tracks": track_list(&names)}));
    let out = dir.path().join("norm");
    assert_eq!(
        automix(&["normalize", "--session", &s, "--out-dir", out.to_str().unwrap(), "--bit-depth", "32f"]),
        EXIT_OK
    );
    let a = integrated_loudness(&read_wav(out.join("a.wav")).unwrap()).unwrap().integrated_lufs;
    let v = integrated_loudness(&read_wav(out.join("vox.wav")).unwrap()).unwrap().integrated_lufs;
    assert!((a + 24.0).abs() < 0.2, "{a}");
    assert!((v + 18.0).abs() < 0.2, "{v}");
}

#[test]
fn manifest_and_io_errors_have_distinct_codes() {
    let dir = tempfile::tempdir().unwrap();
    write_tracks(dir.path(), &["a"], 1.0);
    let report = dir.path().join("r.json");
    let r = report.to_str().unwrap();

    let unknown = manifest(dir.path(), json!({"tracks": track_list(&["a"]), "extra": 1}));
    assert_eq!(automix(&["analyze", "--session", &unknown, "--report", r]), EXIT_MANIFEST);

    let bad_vocal = manifest(
        dir.path(),
        json!({"tracks": [{"path": "a.wav", "name": "a", "class": "bass", "vocal": true}]}),
    );
    assert_eq!(automix(&["analyze", "--session", &bad_vocal, "--report", r]), EXIT_MANIFEST);

    let bad_group = manifest(
        dir.path(),
        json!({"tracks": track_list(&["a"]), "subgroups": [{"name": "G", "members": ["zzz"]}]}),
    );
    assert_eq!(automix(&["analyze", "--session", &bad_group, "--report", r]), EXIT_MANIFEST);

    let wrong_rate = manifest(dir.path(), json!({"sample_rate_expected": 48000, "tracks": track_list(&["a"])}));
    assert_eq!(automix(&["analyze", "--session", &wrong_rate, "--report", r]), EXIT_MANIFEST);

    let missing = manifest(dir.path(), json!({"tracks": track_list(&["nope"])}));
    assert_eq!(automix(&["analyze", "--session", &missing, "--report", r]), EXIT_IO);

    fs::write(dir.path().join("junk.wav"), b"not a wav").unwrap();
    let junk = manifest(dir.path(), json!({"tracks": [{"path": "junk.wav", "name": "j", "class": "keys"}]}));
    assert_eq!(automix(&["analyze", "--session", &junk, "--report", r]), EXIT_IO);
}
