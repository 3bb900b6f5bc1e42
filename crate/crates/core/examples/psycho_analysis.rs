//! Psychoacoustic model: band energies and masking thresholds of a tone and
//! of noise, plus per-partition tonality.

use automix::psycho::{sfb_edges_hz, PsychoModel};
use automix::synth::{sine, white_noise};

fn main() -> automix::Result<()> {
    let model = PsychoModel::shared(44_100)?;
    let tone = sine(44_100, 1000.0, -6.0, 0.5)?;
    let noise = white_noise(44_100, 0.5, 0.5, 4)?;
    let (ft, fnz) = (model.analyze(&tone)?, model.analyze(&noise)?);
    let k = 1000.0;
    let b = model.partition_of(k);
    println!(
        "tonality of the partition holding 1 kHz (frame 5): tone {:.3}, noise {:.3}",
        ft[5].tonality[b], fnz[5].tonality[b]
    );

    let edges = sfb_edges_hz(44_100);
    println!("\nsb   band (Hz)          tone esb / thr (dB)   noise esb / thr (dB)");
    let db = |x: f64| 10.0 * x.max(1e-30).log10();
    for sb in 0..model.band_count() {
        println!(
            "{sb:>2}  {:>7.0}-{:<7.0}   {:>7.1} / {:>7.1}       {:>7.1} / {:>7.1}",
            edges[sb],
            edges[sb + 1],
            db(ft[5].esb[sb]),
            db(ft[5].thr[sb]),
            db(fnz[5].esb[sb]),
            db(fnz[5].thr[sb])
        );
    }
    Ok(())
}
