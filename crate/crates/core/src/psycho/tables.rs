//! Frequency tables: threshold partitions, scale-factor bands, minval and the
//! threshold in quiet.

use super::bark;

/// MPEG-1 Layer III long-block scale-factor band edges, in 576-line MDCT
/// units. Only the 21 bands carrying scale factors are used.
const SFB_EDGES_44K: [usize; 22] = [
    0, 4, 8, 12, 16, 20, 24, 30, 36, 44, 52, 62, 74, 90, 110, 134, 162, 196, 238, 288, 342, 418,
];
const SFB_EDGES_48K: [usize; 22] = [
    0, 4, 8, 12, 16, 20, 24, 30, 36, 42, 50, 60, 72, 88, 106, 128, 156, 190, 230, 276, 330, 384,
];

pub const SCALE_FACTOR_BANDS: usize = 21;

/// Scale-factor band edges in Hz (22 values).
pub fn sfb_edges_hz(sample_rate: u32) -> Vec<f64> {
    let edges: &[usize] = if sample_rate == 48_000 {
        &SFB_EDGES_48K
    } else {
        &SFB_EDGES_44K
    };
    let line_hz = sample_rate as f64 / (2.0 * 576.0);
    edges.iter().map(|&e| e as f64 * line_hz).collect()
}

/// Minimum SNR (dB) for a partition centred at `z` bark. Piecewise fit to the
/// long-block minval column of the model-2 tables.
pub fn minval_db(z: f64) -> f64 {
    match z {
        z if z < 1.9 => 24.5,
        z if z < 4.3 => 20.0,
        z if z < 5.4 => 18.0,
        z if z < 5.8 => 12.0,
        z if z < 6.8 => 6.0,
        z if z < 10.5 => 3.0,
        _ => 0.0,
    }
}

/// Threshold in quiet (dB), Terhardt's approximation. Frequencies below
/// 20 Hz are evaluated at 20 Hz.
pub fn ath_db(freq: f64) -> f64 {
    let khz = freq.max(20.0) / 1000.0;
    3.64 * khz.powf(-0.8) - 6.5 * (-0.6 * (khz - 3.3).powi(2)).exp() + 1e-3 * khz.powi(4)
}

/// The threshold in quiet is read as line energy in dB on a 16-bit integer
/// sample scale, where full scale is this value.
pub const SAMPLE_SCALE: f64 = 32768.0;

/// Threshold in quiet of one FFT line as energy on the unit sample scale.
pub fn ath_line_energy(freq: f64) -> f64 {
    10f64.powf(ath_db(freq) / 10.0) / (SAMPLE_SCALE * SAMPLE_SCALE)
}

#[derive(Clone, Debug)]
pub struct Partition {
    pub lo: usize,
    /// Exclusive.
    pub hi: usize,
    pub bval: f64,
    pub minval_db: f64,
    /// Threshold in quiet as partition energy.
    pub qthr: f64,
}

impl Partition {
    pub fn lines(&self) -> usize {
        self.hi - self.lo
    }
}

/// Splits FFT lines `0..=fft_size/2` into contiguous partitions about
/// `width_bark` wide.
pub fn build_partitions(sample_rate: u32, fft_size: usize, width_bark: f64) -> Vec<Partition> {
    let lines = fft_size / 2 + 1;
    let line_hz = sample_rate as f64 / fft_size as f64;
    let ath_energy = |w: usize| ath_line_energy(w as f64 * line_hz);

    let mut parts = Vec::new();
    let mut lo = 0;
    while lo < lines {
        let z0 = bark(lo as f64 * line_hz);
        let mut hi = lo + 1;
        while hi < lines && bark(hi as f64 * line_hz) - z0 < width_bark {
            hi += 1;
        }
        let bval = bark(0.5 * (lo + hi - 1) as f64 * line_hz);
        let min_ath = (lo..hi).map(ath_energy).fold(f64::INFINITY, f64::min);
        parts.push(Partition {
            lo,
            hi,
            bval,
            minval_db: minval_db(bval),
            qthr: min_ath * (hi - lo) as f64,
        });
        lo = hi;
    }
    parts
}

/// For each scale-factor band, the FFT lines it overlaps and the fraction of
/// each line's bandwidth that falls inside the band.
pub fn sfb_line_weights(sample_rate: u32, fft_size: usize) -> Vec<Vec<(usize, f64)>> {
    let lines = fft_size / 2 + 1;
    let line_hz = sample_rate as f64 / fft_size as f64;
    let nyquist = sample_rate as f64 / 2.0;
    let edges = sfb_edges_hz(sample_rate);
    edges
        .windows(2)
        .map(|band| {
            let (f0, f1) = (band[0], band[1]);
            (0..lines)
                .filter_map(|w| {
                    let centre = w as f64 * line_hz;
                    let lo = (centre - 0.5 * line_hz).max(0.0);
                    let hi = (centre + 0.5 * line_hz).min(nyquist);
                    let overlap = hi.min(f1) - lo.max(f0);
                    (overlap > 0.0).then(|| (w, overlap / (hi - lo)))
                })
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partitions_cover_all_lines_contiguously() {
        for rate in [44_100, 48_000] {
            let parts = build_partitions(rate, 1024, 1.0 / 3.0);
            assert_eq!(parts.len(), 63);
            assert_eq!(parts[0].lo, 0);
            assert_eq!(parts.last().unwrap().hi, 513);
            for w in parts.windows(2) {
                assert_eq!(w[0].hi, w[1].lo);
                assert!(w[1].bval >= w[0].bval);
            }
            assert!(parts.iter().all(|p| p.qthr > 0.0));
        }
    }

    #[test]
    fn sfb_edges_end_near_16k() {
        let e = sfb_edges_hz(44_100);
        assert_eq!(e.len(), SCALE_FACTOR_BANDS + 1);
        assert!((e[21] - 16_001.56).abs() < 0.01);
        let w = sfb_line_weights(44_100, 1024);
        assert_eq!(w.len(), SCALE_FACTOR_BANDS);
        // Weights of one line across adjacent bands sum to one.
        let total: f64 = w.iter().flatten().filter(|(l, _)| *l == 10).map(|(_, f)| f).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ath_dips_near_3k() {
        assert!(ath_db(3300.0) < 0.0);
        assert!(ath_db(100.0) > 20.0);
        assert_eq!(ath_db(0.0), ath_db(20.0));
        // a full-scale sine's peak line sits about 138 dB above unit energy
        let full_scale_line = (1024.0f64 / 4.0).powi(2);
        let margin = 10.0 * (full_scale_line / ath_line_energy(1000.0)).log10();
        assert!((margin - (138.5 - ath_db(1000.0))).abs() < 0.1, "{margin}");
    }
}
