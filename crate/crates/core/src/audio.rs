//! Mono PCM clips, WAV I/O, framing and exact summation.
//!
//! Everything downstream works on [`AudioClip`]: a mono `f64` sample
//! buffer at 44.1 or 48 kHz with full scale at ±1.0.

use std::path::Path;

use hound::{SampleFormat, WavReader, WavSpec, WavWriter};

use crate::error::{Error, Result};

pub const SUPPORTED_RATES: [u32; 2] = [44_100, 48_000];

/// An immutable mono signal.
#[derive(Clone, Debug, PartialEq)]
pub struct AudioClip {
    sample_rate: u32,
    samples: Vec<f64>,
}

impl AudioClip {
    pub fn new(sample_rate: u32, samples: Vec<f64>) -> Result<AudioClip> {
        check_rate(sample_rate)?;
        if let Some(index) = samples.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(AudioClip {
            sample_rate,
            samples,
        })
    }

    /// Builds a clip from samples produced by this crate's own DSP, which
    /// never yields non-finite values for finite input.
    pub(crate) fn from_parts(sample_rate: u32, samples: Vec<f64>) -> AudioClip {
        debug_assert!(samples.iter().all(|x| x.is_finite()));
        AudioClip {
            sample_rate,
            samples,
        }
    }

    pub fn silence(sample_rate: u32, len: usize) -> Result<AudioClip> {
        AudioClip::new(sample_rate, vec![0.0; len])
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }

    pub fn is_silent(&self) -> bool {
        self.samples.iter().all(|&x| x == 0.0)
    }

    pub fn peak(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn rms(&self) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        (self.samples.iter().map(|x| x * x).sum::<f64>() / self.samples.len() as f64).sqrt()
    }

    /// Returns a copy with every sample multiplied by `gain`.
    pub fn scaled(&self, gain: f64) -> AudioClip {
        AudioClip::from_parts(
            self.sample_rate,
            self.samples.iter().map(|x| x * gain).collect(),
        )
    }

    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> AudioClip {
        AudioClip::from_parts(self.sample_rate, self.samples.iter().map(|&x| f(x)).collect())
    }

    /// Copy of `[start, start + len)`, clipped to the available samples.
    pub fn segment(&self, start: usize, len: usize) -> AudioClip {
        let start = start.min(self.samples.len());
        let end = start.saturating_add(len).min(self.samples.len());
        AudioClip::from_parts(self.sample_rate, self.samples[start..end].to_vec())
    }

    /// Zero-pads (never truncates) to `len` samples.
    pub fn padded_to(&self, len: usize) -> AudioClip {
        let mut samples = self.samples.clone();
        if samples.len() < len {
            samples.resize(len, 0.0);
        }
        AudioClip::from_parts(self.sample_rate, samples)
    }
}

pub fn check_rate(rate: u32) -> Result<()> {
    if SUPPORTED_RATES.contains(&rate) {
        Ok(())
    } else {
        Err(Error::UnsupportedSampleRate(rate))
    }
}

/// Reads a RIFF/WAVE file and averages its channels down to mono.
pub fn read_wav<P: AsRef<Path>>(path: P) -> Result<AudioClip> {
    let path = path.as_ref();
    let reader = WavReader::open(path).map_err(|e| match e {
        hound::Error::IoError(_) => Error::Unreadable {
            path: path.to_path_buf(),
            source: e,
        },
        other => Error::UnsupportedEncoding {
            path: path.to_path_buf(),
            reason: other.to_string(),
        },
    })?;
    let spec = reader.spec();
    let unsupported = |reason: String| Error::UnsupportedEncoding {
        path: path.to_path_buf(),
        reason,
    };
    if !(1..=2).contains(&spec.channels) {
        return Err(unsupported(format!("{} channels", spec.channels)));
    }
    if !SUPPORTED_RATES.contains(&spec.sample_rate) {
        return Err(Error::UnsupportedSampleRateFile {
            path: path.to_path_buf(),
            rate: spec.sample_rate,
        });
    }

    let interleaved: Vec<f64> = match (spec.sample_format, spec.bits_per_sample) {
        (SampleFormat::Int, bits @ (16 | 24)) => {
            let scale = 1.0 / (1u32 << (bits - 1)) as f64;
            reader
                .into_samples::<i32>()
                .map(|s| s.map(|v| v as f64 * scale))
                .collect::<std::result::Result<_, _>>()
        }
        (SampleFormat::Float, 32) => reader
            .into_samples::<f32>()
            .map(|s| s.map(|v| v as f64))
            .collect::<std::result::Result<_, _>>(),
        (format, bits) => {
            return Err(unsupported(format!("{bits}-bit {format:?} samples")));
        }
    }
    .map_err(|e| Error::Unreadable {
        path: path.to_path_buf(),
        source: e,
    })?;

    let channels = spec.channels as usize;
    let samples = if channels == 1 {
        interleaved
    } else {
        interleaved
            .chunks_exact(channels)
            .map(|frame| frame.iter().sum::<f64>() / channels as f64)
            .collect()
    };
    AudioClip::new(spec.sample_rate, samples).map_err(|_| unsupported("non-finite sample".into()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BitDepth {
    Pcm16,
    Pcm24,
    Float32,
}

impl BitDepth {
    pub fn parse(s: &str) -> Option<BitDepth> {
        match s {
            "16" => Some(BitDepth::Pcm16),
            "24" => Some(BitDepth::Pcm24),
            "32f" | "float32" | "float" => Some(BitDepth::Float32),
            _ => None,
        }
    }
}

/// Outcome of a WAV export.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct WriteReport {
    /// Samples saturated to full scale (PCM depths only).
    pub clipped: usize,
}

/// Writes a mono WAV. PCM depths saturate out-of-range samples.
pub fn write_wav<P: AsRef<Path>>(clip: &AudioClip, path: P, depth: BitDepth) -> Result<WriteReport> {
    let path = path.as_ref();
    let unwritable = |source: hound::Error| Error::Unwritable {
        path: path.to_path_buf(),
        source,
    };
    let (bits, format) = match depth {
        BitDepth::Pcm16 => (16, SampleFormat::Int),
        BitDepth::Pcm24 => (24, SampleFormat::Int),
        BitDepth::Float32 => (32, SampleFormat::Float),
    };
    let spec = WavSpec {
        channels: 1,
        sample_rate: clip.sample_rate,
        bits_per_sample: bits,
        sample_format: format,
    };
    let mut writer = WavWriter::create(path, spec).map_err(unwritable)?;
    let mut report = WriteReport::default();
    match depth {
        BitDepth::Float32 => {
            for &x in &clip.samples {
                writer.write_sample(x as f32).map_err(unwritable)?;
            }
        }
        BitDepth::Pcm16 | BitDepth::Pcm24 => {
            let full = (1i64 << (bits - 1)) as f64;
            let (lo, hi) = (-full, full - 1.0);
            for &x in &clip.samples {
                let q = (x * full).round();
                if q < lo || q > hi {
                    report.clipped += 1;
                }
                let v = q.clamp(lo, hi) as i32;
                if bits == 16 {
                    writer.write_sample(v as i16).map_err(unwritable)?;
                } else {
                    writer.write_sample(v).map_err(unwritable)?;
                }
            }
        }
    }
    writer.finalize().map_err(unwritable)?;
    Ok(report)
}

/// Number of frames `frame_signal` produces for a signal of `len` samples.
pub fn frame_count(len: usize, hop: usize) -> usize {
    len.div_ceil(hop)
}

/// Copies frame `k` into `out` (length `frame_len`), zero-padding past the end.
pub fn copy_frame(samples: &[f64], k: usize, hop: usize, out: &mut [f64]) {
    let start = k * hop;
    let avail = samples.len().saturating_sub(start).min(out.len());
    out[..avail].copy_from_slice(&samples[start..start + avail]);
    out[avail..].iter_mut().for_each(|x| *x = 0.0);
}

/// Splits a clip into frames `[k*hop, k*hop + frame_len)`, zero-padded at the tail.
pub fn frame_signal(clip: &AudioClip, frame_len: usize, hop: usize) -> Result<Vec<Vec<f64>>> {
    if hop == 0 || frame_len < hop {
        return Err(Error::InvalidConfig(format!(
            "frame_len ({frame_len}) must be >= hop ({hop}) >= 1"
        )));
    }
    Ok((0..frame_count(clip.len(), hop))
        .map(|k| {
            let mut frame = vec![0.0; frame_len];
            copy_frame(&clip.samples, k, hop, &mut frame);
            frame
        })
        .collect())
}

/// Elementwise sum with zero-padding to the longest clip.
///
/// Each output sample is the correctly rounded sum of its inputs, so the
/// result does not depend on the order of `clips`.
pub fn sum_tracks(clips: &[AudioClip]) -> Result<AudioClip> {
    let first = clips
        .first()
        .ok_or_else(|| Error::InvalidConfig("sum_tracks needs at least one clip".into()))?;
    let rate = first.sample_rate;
    for c in clips {
        if c.sample_rate != rate {
            return Err(Error::SampleRateMismatch {
                expected: rate,
                found: c.sample_rate,
            });
        }
    }
    let len = clips.iter().map(AudioClip::len).max().unwrap_or(0);
    let mut acc = ExactSum::new();
    let samples = (0..len)
        .map(|i| {
            acc.clear();
            for c in clips {
                if let Some(&x) = c.samples.get(i) {
                    acc.add(x);
                }
            }
            acc.value()
        })
        .collect();
    Ok(AudioClip::from_parts(rate, samples))
}

/// `a - b` elementwise, zero-padded to the longer input.
pub fn subtract(a: &AudioClip, b: &AudioClip) -> AudioClip {
    let len = a.len().max(b.len());
    let samples = (0..len)
        .map(|i| a.samples.get(i).copied().unwrap_or(0.0) - b.samples.get(i).copied().unwrap_or(0.0))
        .collect();
    AudioClip::from_parts(a.sample_rate, samples)
}

/// Shewchuk's exact floating-point summation (as in Python's `math.fsum`).
#[derive(Clone, Debug, Default)]
pub struct ExactSum {
    partials: Vec<f64>,
}

impl ExactSum {
    pub fn new() -> ExactSum {
        ExactSum::default()
    }

    pub fn clear(&mut self) {
        self.partials.clear();
    }

    pub fn add(&mut self, mut x: f64) {
        let mut i = 0;
        for j in 0..self.partials.len() {
            let mut y = self.partials[j];
            if x.abs() < y.abs() {
                std::mem::swap(&mut x, &mut y);
            }
            let hi = x + y;
            let lo = y - (hi - x);
            if lo != 0.0 {
                self.partials[i] = lo;
                i += 1;
            }
            x = hi;
        }
        self.partials.truncate(i);
        self.partials.push(x);
    }

    /// The correctly rounded value of the accumulated sum.
    pub fn value(&self) -> f64 {
        let p = &self.partials;
        let Some(mut n) = p.len().checked_sub(1) else {
            return 0.0;
        };
        let mut hi = p[n];
        let mut lo = 0.0;
        while n > 0 {
            let x = hi;
            n -= 1;
            let y = p[n];
            hi = x + y;
            let yr = hi - x;
            lo = y - yr;
            if lo != 0.0 {
                break;
            }
        }
        // Half-way cases: make the rounding agree with the remaining partials.
        if n > 0 && ((lo < 0.0 && p[n - 1] < 0.0) || (lo > 0.0 && p[n - 1] > 0.0)) {
            let y = lo * 2.0;
            let x = hi + y;
            let yr = x - hi;
            if y == yr {
                hi = x;
            }
        }
        hi
    }
}

pub fn exact_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut acc = ExactSum::new();
    values.into_iter().for_each(|x| acc.add(x));
    acc.value()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn clip(samples: Vec<f64>) -> AudioClip {
        AudioClip::new(44_100, samples).unwrap()
    }

    #[test]
    fn rejects_unsupported_rate_and_nan() {
        assert!(matches!(
            AudioClip::new(8_000, vec![0.0]),
            Err(Error::UnsupportedSampleRate(8_000))
        ));
        assert!(matches!(
            AudioClip::new(44_100, vec![0.0, f64::NAN]),
            Err(Error::NonFinite { index: 1 })
        ));
    }

    #[test]
    fn frame_counts() {
        let c = clip(vec![0.5; 2048]);
        assert_eq!(frame_signal(&c, 1024, 512).unwrap().len(), 4);

        let c = clip((0..1000).map(|i| i as f64 * 1e-3).collect());
        let frames = frame_signal(&c, 1024, 512).unwrap();
        assert_eq!(frames.len(), 2);
        assert_eq!(frames[0][999], 0.999);
        assert!(frames[0][1000..].iter().all(|&x| x == 0.0));
        assert!(frames[1][488..].iter().all(|&x| x == 0.0));
        assert_eq!(frames[1][0], 0.512);

        let empty = clip(vec![]);
        assert!(frame_signal(&empty, 1024, 512).unwrap().is_empty());
        assert!(frame_signal(&empty, 256, 512).is_err());
        assert!(frame_signal(&empty, 256, 0).is_err());
    }

    #[test]
    fn overlap_add_with_hop_equal_frame_reconstructs() {
        let samples: Vec<f64> = (0..1500).map(|i| (i as f64 * 0.37).sin()).collect();
        let c = clip(samples.clone());
        let frames = frame_signal(&c, 256, 256).unwrap();
        let mut out = vec![0.0; frames.len() * 256];
        for (k, f) in frames.iter().enumerate() {
            for (i, x) in f.iter().enumerate() {
                out[k * 256 + i] += x;
            }
        }
        assert_eq!(&out[..1500], &samples[..]);
        assert!(out[1500..].iter().all(|&x| x == 0.0));
    }

    #[test]
    fn sum_cancellation_identity_and_padding() {
        let a = clip((0..100).map(|i| (i as f64 * 0.1).sin()).collect());
        let neg = a.scaled(-1.0);
        assert!(sum_tracks(&[a.clone(), neg]).unwrap().is_silent());
        assert_eq!(sum_tracks(&[a.clone()]).unwrap(), a);

        let b = clip((0..150).map(|i| (i as f64 * 0.3).cos()).collect());
        let s = sum_tracks(&[a, b.clone()]).unwrap();
        assert_eq!(s.len(), 150);
        assert_eq!(&s.samples()[100..], &b.samples()[100..]);
    }

    #[test]
    fn sum_rejects_mixed_rates() {
        let a = clip(vec![0.0; 4]);
        let b = AudioClip::new(48_000, vec![0.0; 4]).unwrap();
        assert!(matches!(
            sum_tracks(&[a, b]),
            Err(Error::SampleRateMismatch { .. })
        ));
    }

    #[test]
    fn exact_sum_is_order_independent() {
        let v = [1e16, 1.0, -1e16, 3.0, 1e-3, -7.5e15, 7.5e15];
        assert_eq!(exact_sum(v), 4.0 + 1e-3);
        let mut r = v;
        r.reverse();
        assert_eq!(exact_sum(r), exact_sum(v));
        assert_eq!(exact_sum([0.1; 10]), 1.0);
        assert_eq!(exact_sum(std::iter::empty()), 0.0);
    }
}
