//! Subgrouped mix: drums and music are mixed into stems first, then the
//! stems are mixed with the narrower subgroup EQ range.
//!
//!     cargo run --release --example subgroup_mix -- stems_dir

use std::path::PathBuf;

use automix::audio::{write_wav, BitDepth};
use automix::loudness::integrated_loudness;
use automix::pipeline::mix_subgrouped;
use automix::report::{slug, summary_rows, write_summary};
use automix::synth::band_noise;
use automix::{EngineConfig, InstrumentClass, Session, SubgroupSpec, Track};

fn main() -> automix::Result<()> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "stems".into()));
    let n = |lo, hi, db, seed| band_noise(44_100, lo, hi, db, 1.5, seed);
    let tracks = vec![
        Track::new("kick", n(40.0, 200.0, -14.0, 1)?, InstrumentClass::Drums),
        Track::new("snare", n(150.0, 3000.0, -18.0, 2)?, InstrumentClass::Drums),
        Track::new("bass", n(50.0, 500.0, -16.0, 3)?, InstrumentClass::Bass),
        Track::new("keys", n(200.0, 2500.0, -20.0, 4)?, InstrumentClass::Keys),
        Track::new("guitar", n(300.0, 5000.0, -20.0, 5)?, InstrumentClass::Guitars),
        Track::new("vox", n(250.0, 4000.0, -16.0, 6)?, InstrumentClass::Vox),
    ];
    let groups = vec![
        SubgroupSpec::new("Drums", &["kick", "snare"], false),
        SubgroupSpec::new("Bass", &["bass"], false),
        SubgroupSpec::new("Music", &["keys", "guitar"], false),
        SubgroupSpec::new("Vocals", &["vox"], true),
    ];
    let session = Session::new(tracks, groups, EngineConfig::default())?;
    let result = mix_subgrouped(&session)?;

    write_summary(&summary_rows(&result), std::io::stdout().lock()).expect("stdout");
    std::fs::create_dir_all(&dir).map_err(|source| automix::Error::Io { path: dir.clone(), source })?;
    for (name, stem) in &result.stems {
        let lufs = integrated_loudness(stem)?.integrated_lufs;
        println!("stem {name:<7} {lufs:.2} LUFS");
        write_wav(stem, dir.join(format!("{}.wav", slug(name))), BitDepth::Float32)?;
    }
    write_wav(&result.final_mix, dir.join("mix.wav"), BitDepth::Pcm24)?;
    println!("wrote stems and mix.wav to {}", dir.display());
    Ok(())
}
