//! MPEG-1 psychoacoustic model 2 (long blocks) producing per-frame
//! scale-factor-band energies and masking thresholds.
//!
//! Per frame: Hann-windowed FFT, unpredictability from linear extrapolation
//! of the two previous spectra, partition energies, spreading, tonality,
//! SNR offset, pre-echo guard and threshold in quiet, then mapping of the
//! partition thresholds onto the 21 long-block scale-factor bands.

mod tables;

use std::sync::{Arc, OnceLock};

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::audio::{check_rate, copy_frame, frame_count, AudioClip};
use crate::error::{Error, Result};

pub use tables::{
    ath_db, ath_line_energy, build_partitions, minval_db, sfb_edges_hz, sfb_line_weights, Partition,
    SAMPLE_SCALE, SCALE_FACTOR_BANDS,
};

/// Tone-masking-noise offset in dB.
pub const TMN_DB: f64 = 29.0;
/// Noise-masking-tone offset in dB.
pub const NMT_DB: f64 = 6.0;

/// `(TMN, NMT)` in dB.
pub fn tmn_nmt_offsets() -> (f64, f64) {
    (TMN_DB, NMT_DB)
}

/// Critical-band rate in bark for a frequency in Hz.
pub fn bark(freq: f64) -> f64 {
    13.0 * (0.00076 * freq).atan() + 3.5 * (freq / 7500.0).powi(2).atan()
}

/// Model-2 spreading function for a maskee `dz` bark above the masker.
pub fn spreading(dz: f64) -> f64 {
    let tmpx = 1.05 * dz;
    let u = tmpx - 0.5;
    let x = 8.0 * (u * u - 2.0 * u).min(0.0);
    let t = tmpx + 0.474;
    let tmpy = 15.811389 + 7.5 * t - 17.5 * (1.0 + t * t).sqrt();
    if tmpy < -100.0 {
        0.0
    } else {
        10f64.powf((x + tmpy) / 10.0)
    }
}

/// Tonality-weighted SNR in dB, floored at `minval`.
pub fn snr_offset_db(tonality: f64, minval: f64) -> f64 {
    minval.max(tonality * TMN_DB + (1.0 - tonality) * NMT_DB)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PsychoConfig {
    pub fft_size: usize,
    pub hop: usize,
    pub partition_width_bark: f64,
}

impl Default for PsychoConfig {
    fn default() -> Self {
        PsychoConfig {
            fft_size: 1024,
            hop: 512,
            partition_width_bark: 1.0 / 3.0,
        }
    }
}

/// Analysis output for one frame.
#[derive(Clone, Debug, PartialEq)]
pub struct PsychoFrame {
    /// Scale-factor-band energies (linear power).
    pub esb: Vec<f64>,
    /// Scale-factor-band masking thresholds (linear power).
    pub thr: Vec<f64>,
    /// Per-partition tonality in `[0, 1]`.
    pub tonality: Vec<f64>,
}

struct SpreadRow {
    first: usize,
    weights: Vec<f64>,
}

/// Immutable tables for one sample rate and configuration.
pub struct PsychoModel {
    sample_rate: u32,
    cfg: PsychoConfig,
    window: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
    partitions: Vec<Partition>,
    line_partition: Vec<usize>,
    /// Row `b` holds the spreading from every masker partition onto maskee `b`.
    spread: Vec<SpreadRow>,
    rnorm: Vec<f64>,
    sfb_weights: Vec<Vec<(usize, f64)>>,
    quiet_sb: Vec<f64>,
}

impl std::fmt::Debug for PsychoModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PsychoModel")
            .field("sample_rate", &self.sample_rate)
            .field("cfg", &self.cfg)
            .field("partitions", &self.partitions.len())
            .finish()
    }
}

impl PsychoModel {
    pub fn new(sample_rate: u32, cfg: PsychoConfig) -> Result<PsychoModel> {
        check_rate(sample_rate)?;
        if cfg.fft_size < 64 || !cfg.fft_size.is_power_of_two() || cfg.hop == 0 || cfg.hop > cfg.fft_size {
            return Err(Error::InvalidConfig(format!(
                "fft_size {} / hop {}",
                cfg.fft_size, cfg.hop
            )));
        }
        if !(cfg.partition_width_bark > 0.0) {
            return Err(Error::InvalidConfig("partition width must be positive".into()));
        }
        let n = cfg.fft_size;
        let window = (0..n)
            .map(|i| 0.5 - 0.5 * (2.0 * std::f64::consts::PI * i as f64 / n as f64).cos())
            .collect();
        let fft = FftPlanner::new().plan_fft_forward(n);
        let partitions = build_partitions(sample_rate, n, cfg.partition_width_bark);

        let mut line_partition = vec![0; n / 2 + 1];
        for (b, p) in partitions.iter().enumerate() {
            line_partition[p.lo..p.hi].iter_mut().for_each(|x| *x = b);
        }

        let spread: Vec<SpreadRow> = partitions
            .iter()
            .map(|maskee| {
                let full: Vec<f64> = partitions
                    .iter()
                    .map(|masker| spreading(maskee.bval - masker.bval))
                    .collect();
                let first = full.iter().position(|&s| s > 0.0).unwrap_or(0);
                let last = full.iter().rposition(|&s| s > 0.0).map_or(0, |i| i + 1);
                SpreadRow {
                    first,
                    weights: full[first..last.max(first)].to_vec(),
                }
            })
            .collect();
        let rnorm = spread
            .iter()
            .map(|row| 1.0 / row.weights.iter().sum::<f64>())
            .collect();

        let sfb_weights = sfb_line_weights(sample_rate, n);
        let quiet_line: Vec<f64> = line_partition
            .iter()
            .map(|&b| partitions[b].qthr / partitions[b].lines() as f64)
            .collect();
        let quiet_sb = sfb_weights
            .iter()
            .map(|band| band.iter().map(|&(w, f)| f * quiet_line[w]).sum())
            .collect();

        Ok(PsychoModel {
            sample_rate,
            cfg,
            window,
            fft,
            partitions,
            line_partition,
            spread,
            rnorm,
            sfb_weights,
            quiet_sb,
        })
    }

    /// Default-configured model, built once per sample rate.
    pub fn shared(sample_rate: u32) -> Result<Arc<PsychoModel>> {
        static M44: OnceLock<Arc<PsychoModel>> = OnceLock::new();
        static M48: OnceLock<Arc<PsychoModel>> = OnceLock::new();
        let cell = match sample_rate {
            44_100 => &M44,
            48_000 => &M48,
            other => return Err(Error::UnsupportedSampleRate(other)),
        };
        Ok(cell
            .get_or_init(|| {
                Arc::new(PsychoModel::new(sample_rate, PsychoConfig::default()).expect("default model"))
            })
            .clone())
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn config(&self) -> &PsychoConfig {
        &self.cfg
    }

    pub fn partitions(&self) -> &[Partition] {
        &self.partitions
    }

    pub fn band_count(&self) -> usize {
        self.sfb_weights.len()
    }

    /// Threshold in quiet mapped onto the scale-factor bands.
    pub fn quiet_thresholds(&self) -> &[f64] {
        &self.quiet_sb
    }

    /// Index of the partition containing the FFT line nearest `freq`.
    pub fn partition_of(&self, freq: f64) -> usize {
        let line = (freq * self.cfg.fft_size as f64 / self.sample_rate as f64).round() as usize;
        self.line_partition[line.min(self.line_partition.len() - 1)]
    }

    /// Spreading weight from masker partition `masker` onto maskee `maskee`.
    pub fn spreading_weight(&self, maskee: usize, masker: usize) -> f64 {
        let row = &self.spread[maskee];
        masker
            .checked_sub(row.first)
            .and_then(|i| row.weights.get(i))
            .copied()
            .unwrap_or(0.0)
    }

    /// Sums per-line power into partition energies.
    pub fn partition_energies(&self, power: &[f64]) -> Vec<f64> {
        self.partitions
            .iter()
            .map(|p| power[p.lo..p.hi].iter().sum())
            .collect()
    }

    pub fn frame_count(&self, len: usize) -> usize {
        frame_count(len, self.cfg.hop).max(1)
    }

    pub fn analyzer(&self) -> Analyzer<'_> {
        Analyzer::new(self)
    }

    /// Runs the model over a whole clip. Clips shorter than one frame yield
    /// a single zero-padded frame.
    pub fn analyze(&self, clip: &AudioClip) -> Result<Vec<PsychoFrame>> {
        if clip.sample_rate() != self.sample_rate {
            return Err(Error::SampleRateMismatch {
                expected: self.sample_rate,
                found: clip.sample_rate(),
            });
        }
        let mut analyzer = self.analyzer();
        let mut frame = vec![0.0; self.cfg.fft_size];
        Ok((0..self.frame_count(clip.len()))
            .map(|k| {
                copy_frame(clip.samples(), k, self.cfg.hop, &mut frame);
                analyzer.push(&frame)
            })
            .collect())
    }

    /// Scale-factor band energies per frame: the `esb` part of
    /// [`PsychoModel::analyze`] without the threshold computation.
    pub fn band_energies(&self, clip: &AudioClip) -> Result<Vec<Vec<f64>>> {
        if clip.sample_rate() != self.sample_rate {
            return Err(Error::SampleRateMismatch {
                expected: self.sample_rate,
                found: clip.sample_rate(),
            });
        }
        let n = self.cfg.fft_size;
        let lines = n / 2 + 1;
        let mut frame = vec![0.0; n];
        let mut buf = vec![Complex::new(0.0, 0.0); n];
        let mut scratch = vec![Complex::new(0.0, 0.0); self.fft.get_inplace_scratch_len()];
        let mut power = vec![0.0; lines];
        Ok((0..self.frame_count(clip.len()))
            .map(|k| {
                copy_frame(clip.samples(), k, self.cfg.hop, &mut frame);
                for ((b, &x), &w) in buf.iter_mut().zip(&frame).zip(&self.window) {
                    *b = Complex::new(x * w, 0.0);
                }
                self.fft.process_with_scratch(&mut buf, &mut scratch);
                for (p, x) in power.iter_mut().zip(&buf) {
                    *p = x.norm_sqr();
                }
                self.sfb_weights
                    .iter()
                    .map(|band| band.iter().fold(0.0, |es, &(w, f)| es + f * power[w]))
                    .collect()
            })
            .collect())
    }
}


/// Analyses one clip with the default model for its sample rate.
pub fn analyze_track(clip: &AudioClip) -> Result<Vec<PsychoFrame>> {
    PsychoModel::shared(clip.sample_rate())?.analyze(clip)
}

/// Sequential per-track state: the two previous spectra and partition
/// thresholds.
pub struct Analyzer<'m> {
    model: &'m PsychoModel,
    buf: Vec<Complex<f64>>,
    scratch: Vec<Complex<f64>>,
    /// Magnitude and unit phasor of the previous two spectra.
    prev1: Vec<(f64, Complex<f64>)>,
    prev2: Vec<(f64, Complex<f64>)>,
    power: Vec<f64>,
    nb_prev1: Vec<f64>,
    nb_prev2: Vec<f64>,
}

impl<'m> Analyzer<'m> {
    fn new(model: &'m PsychoModel) -> Analyzer<'m> {
        let n = model.cfg.fft_size;
        let lines = n / 2 + 1;
        let parts = model.partitions.len();
        Analyzer {
            model,
            buf: vec![Complex::new(0.0, 0.0); n],
            scratch: vec![Complex::new(0.0, 0.0); model.fft.get_inplace_scratch_len()],
            prev1: vec![(0.0, Complex::new(1.0, 0.0)); lines],
            prev2: vec![(0.0, Complex::new(1.0, 0.0)); lines],
            power: vec![0.0; lines],
            nb_prev1: vec![f64::INFINITY; parts],
            nb_prev2: vec![f64::INFINITY; parts],
        }
    }

    /// Analyses the next `fft_size` samples.
    pub fn push(&mut self, frame: &[f64]) -> PsychoFrame {
        let m = self.model;
        let lines = m.cfg.fft_size / 2 + 1;
        for ((b, &x), &w) in self.buf.iter_mut().zip(frame).zip(&m.window) {
            *b = Complex::new(x * w, 0.0);
        }
        m.fft.process_with_scratch(&mut self.buf, &mut self.scratch);

        let parts = m.partitions.len();
        let mut e = vec![0.0; parts];
        let mut cw = vec![0.0; parts];
        // prev2 <- frame t-1; prev1's slots (t-2) are overwritten with frame t
        std::mem::swap(&mut self.prev2, &mut self.prev1);
        for w in 0..lines {
            let x = self.buf[w];
            let p = x.norm_sqr();
            let r = p.sqrt();
            let u = if r > 0.0 { x / r } else { Complex::new(1.0, 0.0) };
            let (r1, u1) = self.prev2[w];
            let (r2, u2) = std::mem::replace(&mut self.prev1[w], (r, u));
            let r_pred = 2.0 * r1 - r2;
            let predicted = u1 * u1 * u2.conj() * r_pred;
            let denom = r + r_pred.abs();
            let c = if denom > 0.0 {
                (x - predicted).norm_sqr().sqrt() / denom
            } else {
                1.0
            };
            self.power[w] = p;
            let b = m.line_partition[w];
            e[b] += p;
            cw[b] += p * c;
        }

        let mut tonality = vec![0.0; parts];
        let mut thr_part = vec![0.0; parts];
        for b in 0..parts {
            let row = &m.spread[b];
            let (mut ecb, mut ct) = (0.0, 0.0);
            for (i, s) in row.weights.iter().enumerate() {
                ecb += s * e[row.first + i];
                ct += s * cw[row.first + i];
            }
            let cb = if ecb > 0.0 { ct / ecb } else { 1.0 };
            let t = (-0.299 - 0.43 * cb.ln()).clamp(0.0, 1.0);
            tonality[b] = t;
            let snr = snr_offset_db(t, m.partitions[b].minval_db);
            let nb = ecb * m.rnorm[b] * 10f64.powf(-snr / 10.0);
            let guarded = nb.min(2.0 * self.nb_prev1[b]).min(16.0 * self.nb_prev2[b]);
            thr_part[b] = m.partitions[b].qthr.max(guarded);
            self.nb_prev2[b] = self.nb_prev1[b];
            self.nb_prev1[b] = nb;
        }

        let mut esb = Vec::with_capacity(m.sfb_weights.len());
        let mut thr = Vec::with_capacity(m.sfb_weights.len());
        for band in &m.sfb_weights {
            let (mut es, mut th) = (0.0, 0.0);
            for &(w, f) in band {
                let b = m.line_partition[w];
                es += f * self.power[w];
                th += f * thr_part[b] / m.partitions[b].lines() as f64;
            }
            esb.push(es);
            thr.push(th);
        }
        PsychoFrame { esb, thr, tonality }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn band_energies_match_full_analysis() {
        let model = PsychoModel::shared(48_000).unwrap();
        let clip = AudioClip::new(
            48_000,
            (0..20_000).map(|i| (i as f64 * 0.031).sin() * 0.4 + (i as f64 * 0.0007).cos() * 0.1).collect(),
        )
        .unwrap();
        let full: Vec<Vec<f64>> = model.analyze(&clip).unwrap().into_iter().map(|f| f.esb).collect();
        assert_eq!(model.band_energies(&clip).unwrap(), full);
    }

    #[test]
    fn bark_values() {
        assert_eq!(bark(0.0), 0.0);
        assert!((bark(1000.0) - 8.51).abs() < 0.01);
        let mut last = -1.0;
        for f in (0..22_000).step_by(50) {
            let z = bark(f as f64);
            assert!(z > last);
            last = z;
        }
    }

    #[test]
    fn spreading_shape() {
        assert!((spreading(0.0) - 1.0).abs() < 1e-3);
        assert!(spreading(-3.0) < spreading(3.0));
        assert_eq!(spreading(-20.0), 0.0);
        for dz in [-8.0, -1.0, 0.5, 4.0, 12.0] {
            assert!(spreading(dz) >= 0.0);
        }
    }

    #[test]
    fn offsets() {
        assert_eq!(tmn_nmt_offsets(), (29.0, 6.0));
        assert_eq!(snr_offset_db(1.0, 3.0), 29.0);
        assert_eq!(snr_offset_db(0.0, 3.0), 6.0);
        assert_eq!(snr_offset_db(0.0, 24.5), 24.5);
    }

    #[test]
    fn silence_gives_quiet_thresholds() {
        let model = PsychoModel::shared(44_100).unwrap();
        let clip = AudioClip::silence(44_100, 4096).unwrap();
        let frames = model.analyze(&clip).unwrap();
        assert_eq!(frames.len(), 8);
        for f in &frames {
            assert!(f.esb.iter().all(|&e| e == 0.0));
            assert_eq!(f.thr, model.quiet_thresholds());
        }
    }

    #[test]
    fn short_clip_gives_one_frame() {
        let model = PsychoModel::shared(48_000).unwrap();
        let clip = AudioClip::new(48_000, vec![0.1; 100]).unwrap();
        assert_eq!(model.analyze(&clip).unwrap().len(), 1);
        let empty = AudioClip::new(48_000, vec![]).unwrap();
        assert_eq!(model.analyze(&empty).unwrap().len(), 1);
    }

    #[test]
    fn partition_energy_is_conserved() {
        let model = PsychoModel::shared(44_100).unwrap();
        let power: Vec<f64> = (0..513).map(|w| 1.0 + (w as f64 * 0.7).sin().abs() * 1e3).collect();
        let e = model.partition_energies(&power);
        let (a, b) = (e.iter().sum::<f64>(), power.iter().sum::<f64>());
        assert!(((a - b) / b).abs() < 1e-12);
    }

    #[test]
    fn spreading_rows_nonnegative_with_unit_diagonal() {
        let model = PsychoModel::shared(44_100).unwrap();
        let n = model.partitions().len();
        for b in 0..n {
            assert!((model.spreading_weight(b, b) - 1.0).abs() < 1e-3);
            for k in 0..n {
                assert!(model.spreading_weight(b, k) >= 0.0);
            }
        }
    }

    #[test]
    fn thresholds_never_below_quiet() {
        let model = PsychoModel::shared(44_100).unwrap();
        let clip = AudioClip::new(
            44_100,
            (0..20_000).map(|i| 0.3 * (2.0 * PI * 440.0 * i as f64 / 44_100.0).sin()).collect(),
        )
        .unwrap();
        for f in model.analyze(&clip).unwrap() {
            for (t, q) in f.thr.iter().zip(model.quiet_thresholds()) {
                assert!(t >= q);
            }
            assert!(f.tonality.iter().all(|t| (0.0..=1.0).contains(t)));
        }
    }

    #[test]
    fn rejects_mismatched_rate() {
        let model = PsychoModel::shared(44_100).unwrap();
        let clip = AudioClip::silence(48_000, 10).unwrap();
        assert!(model.analyze(&clip).is_err());
    }
}
