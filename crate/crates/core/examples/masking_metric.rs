//! Cross-adaptive masking between a loud low-mid masker and a quiet maskee,
//! with the masker at three levels.

use automix::loudness::db_to_gain;
use automix::metric::{objective, MetricConfig};
use automix::psycho::PsychoModel;
use automix::synth::band_noise;

fn main() -> automix::Result<()> {
    let masker = band_noise(44_100, 150.0, 350.0, -6.0, 3.0, 1)?;
    let maskee = band_noise(44_100, 200.0, 300.0, -30.0, 3.0, 2)?;
    let model = PsychoModel::shared(44_100)?;
    println!("masker gain   M_masker  M_maskee   M_T      M_d      f");
    for g in [-12.0, -6.0, 0.0, 6.0, 12.0] {
        let r = objective(&model, &[masker.scaled(db_to_gain(g)), maskee.clone()], &MetricConfig::default())?;
        println!(
            "{g:>+8.0} dB  {:>8.3}  {:>8.3}  {:>7.3}  {:>7.3}  {:>7.3}",
            r.per_track_m[0], r.per_track_m[1], r.m_total, r.m_diff, r.objective
        );
    }
    Ok(())
}
