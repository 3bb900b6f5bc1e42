//! Integrated loudness of WAV files given on the command line, or of the
//! reference sines when none are given; also normalises to -24 LUFS.
//!
//!     cargo run --example loudness_meter -- a.wav b.wav

use automix::audio::read_wav;
use automix::loudness::{integrated_loudness, normalize_to};
use automix::synth::sine;
use automix::AudioClip;

fn show(label: &str, clip: &AudioClip) -> automix::Result<()> {
    let r = integrated_loudness(clip)?;
    if r.is_silent() {
        println!("{label:<28} silent");
        return Ok(());
    }
    let (_, gain) = normalize_to(clip, -24.0)?;
    println!(
        "{label:<28} {:>7.2} LUFS  ({} gated blocks)  {:+.2} dB to -24",
        r.integrated_lufs, r.gated_block_count, gain
    );
    Ok(())
}

fn main() -> automix::Result<()> {
    let paths: Vec<String> = std::env::args().skip(1).collect();
    if paths.is_empty() {
        for rate in [44_100, 48_000] {
            for level in [0.0, -20.0] {
                show(&format!("997 Hz {level} dBFS @ {rate}"), &sine(rate, 997.0, level, 5.0)?)?;
            }
        }
        return Ok(());
    }
    for p in &paths {
        show(p, &read_wav(p)?)?;
    }
    Ok(())
}
