//! Writes a synthetic session (WAV files plus JSON manifest) and drives the
//! `automix` command line on it: analyze, normalize and mix.
//!
//!     cargo run --release --example session_manifest -- work_dir

use std::fs;
use std::path::PathBuf;

use automix::audio::{write_wav, BitDepth};
use automix::cli;
use automix::synth::band_noise;

fn main() -> automix::Result<()> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "session_demo".into()));
    fs::create_dir_all(&dir).map_err(|source| automix::Error::Io { path: dir.clone(), source })?;
    let specs = [("bass", 50.0, 500.0), ("keys", 200.0, 2500.0), ("vox", 250.0, 4000.0)];
    for (i, (name, lo, hi)) in specs.iter().enumerate() {
        let clip = band_noise(44_100, *lo, *hi, -20.0, 1.5, i as u64)?;
        write_wav(&clip, dir.join(format!("{name}.wav")), BitDepth::Pcm24)?;
    }
    let manifest = r#"{
  "sample_rate_expected": 44100,
  "tracks": [
    {"path": "bass.wav", "name": "bass", "class": "bass"},
    {"path": "keys.wav", "name": "keys", "class": "keys"},
    {"path": "vox.wav", "name": "vox", "class": "vox", "vocal": true}
  ],
  "subgroups": [
    {"name": "Band", "members": ["bass", "keys"]},
    {"name": "Vocals", "members": ["vox"], "vocal": true}
  ],
  "metric": {"t_max": 20, "gate_db": -70},
  "pso": {"swarm": 20, "max_iters": 40, "tolerance": 0.05, "seed": 5}
}
"#;
    let session = dir.join("session.json");
    fs::write(&session, manifest).map_err(|source| automix::Error::Io { path: session.clone(), source })?;

    let s = session.display().to_string();
    let d = |f: &str| dir.join(f).display().to_string();
    let runs: [Vec<String>; 3] = [
        vec!["analyze".into(), "--session".into(), s.clone(), "--report".into(), d("masking.json")],
        vec!["normalize".into(), "--session".into(), s.clone(), "--out-dir".into(), d("normalized")],
        vec![
            "mix".into(),
            "--session".into(),
            s.clone(),
            "--out".into(),
            d("mix.wav"),
            "--trace-dir".into(),
            d("traces"),
            "--stems-dir".into(),
            d("stems"),
            "--report".into(),
            d("mix.json"),
        ],
    ];
    for args in runs {
        println!("$ automix {}", args.join(" "));
        let code = cli::run(std::iter::once("automix".to_string()).chain(args));
        println!("exit {code}\n");
    }
    println!("{}", fs::read_to_string(dir.join("masking.json")).unwrap_or_default());
    Ok(())
}
