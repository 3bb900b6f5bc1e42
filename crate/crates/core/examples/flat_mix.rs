//! Flat automatic mix of a small synthetic session, written to a WAV file.
//!
//!     cargo run --release --example flat_mix -- out.wav

use automix::audio::{write_wav, BitDepth};
use automix::pipeline::mix_flat;
use automix::report::{summary_rows, write_summary};
use automix::synth::band_noise;
use automix::{EngineConfig, InstrumentClass, Session, Track};

fn main() -> automix::Result<()> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "flat_mix.wav".into());
    let tracks = vec![
        Track::new("bass", band_noise(44_100, 50.0, 600.0, -14.0, 2.0, 1)?, InstrumentClass::Bass),
        Track::new("keys", band_noise(44_100, 200.0, 3000.0, -18.0, 2.0, 2)?, InstrumentClass::Keys),
        Track::new("guitar", band_noise(44_100, 300.0, 5000.0, -18.0, 2.0, 3)?, InstrumentClass::Guitars),
        Track::new("vox", band_noise(44_100, 250.0, 4000.0, -16.0, 2.0, 4)?, InstrumentClass::Vox),
    ];
    let mut cfg = EngineConfig::default();
    cfg.pso.rng_seed = 1;
    let session = Session::new(tracks, vec![], cfg)?;

    let result = mix_flat(&session)?;
    let stage = &result.stage_reports[0];
    println!(
        "f(unprocessed) {:.3}, best f {:.3}, {} iterations ({:?})",
        stage.identity_f, stage.final_f, stage.iterations, stage.stop_reason
    );
    for (id, (before, after)) in stage.track_ids.iter().zip(stage.m_before.iter().zip(&stage.m_after)) {
        println!("  {id:<8} M {before:.3} -> {after:.3}");
    }
    for p in &result.final_params {
        println!("  {:<8} EQ {:?} dB, {:.1}:1 above {:.1} dB", p.id, p.params.eq.gains_db.map(|g| (g * 10.0).round() / 10.0), p.params.drc.ratio, p.params.drc.threshold_db);
    }
    write_summary(&summary_rows(&result), std::io::stdout().lock()).expect("stdout");
    let w = write_wav(&result.final_mix, &out, BitDepth::Pcm24)?;
    println!("wrote {out} ({} clipped samples)", w.clipped);
    Ok(())
}
