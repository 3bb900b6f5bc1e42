//! Six-band EQ, compressor and makeup gain on a noise track.

use automix::fx::{apply_eq, compress, design_peaking_filter, process_track, static_gain_db, EQ_BANDS};
use automix::loudness::integrated_loudness;
use automix::synth::{sine, white_noise};
use automix::{DrcParams, EqParams, TrackParams};

fn main() -> automix::Result<()> {
    println!("band  fc      Q    |H(fc)| at +6 dB");
    for (i, &(fc, q)) in EQ_BANDS.iter().enumerate() {
        let c = design_peaking_filter(fc, q, 6.0, 44_100.0)?;
        println!("{:>4}  {:>6}  {:.1}  {:+.2} dB", i + 1, fc, q, c.magnitude_db(fc, 44_100.0));
    }

    let drc = DrcParams {
        threshold_db: -30.0,
        ratio: 4.0,
        attack_s: 0.01,
        release_s: 1.0,
    };
    println!("\nstatic curve (T -30 dB, R 4): input -> measured gain / closed form");
    for level in [-40.0, -30.0, -20.0, -10.0, 0.0] {
        let s = sine(44_100, 500.0, level, 2.0)?;
        let y = compress(&s, &drc);
        let half = s.len() / 2;
        let g = 20.0 * (y.segment(half, half).rms() / s.segment(half, half).rms()).log10();
        println!("  {level:>5.0} dBFS  {g:+6.2} dB  {:+6.2} dB", static_gain_db(level, -30.0, 4.0));
    }

    let x = white_noise(44_100, 0.4, 3.0, 1)?;
    let p = TrackParams {
        eq: EqParams {
            gains_db: [2.0, -3.0, 0.0, 4.0, -6.0, 1.0],
        },
        drc,
    };
    let eq = apply_eq(&x, &p.eq)?;
    let out = process_track(&x, &p)?;
    println!(
        "\nloudness: input {:.2}, after EQ {:.2}, after EQ+DRC+makeup {:.2} LUFS",
        integrated_loudness(&x)?.integrated_lufs,
        integrated_loudness(&eq)?.integrated_lufs,
        integrated_loudness(&out)?.integrated_lufs
    );
    Ok(())
}
