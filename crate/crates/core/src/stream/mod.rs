//! Log-periodograms of PCM audio and classifier traces over time.

mod wav;

use std::io::Write;
use std::sync::Arc;

use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::classifier::{discriminant_values, PairClassifier};
use crate::error::{Error, Result};
use crate::spectra::{Spectrum, Split};

pub use wav::{decode as decode_wav, encode as encode_wav, read_pcm, write_pcm};

/// Label given to spectra cut from audio.
pub const FRAME_LABEL: &str = "?";
pub const LOG_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct AudioClip {
    pub samples: Vec<f64>,
    pub sample_rate: f64,
}

impl AudioClip {
    pub fn new(samples: Vec<f64>, sample_rate: f64) -> Result<Self> {
        if !(sample_rate > 0.0 && sample_rate.is_finite()) {
            return Err(Error::Wav(format!("sample rate {sample_rate} must be positive")));
        }
        if samples.is_empty() {
            return Err(Error::Wav("clip has no samples".into()));
        }
        Ok(AudioClip {
            samples,
            sample_rate,
        })
    }

    pub fn scaled(&self, a: f64) -> AudioClip {
        AudioClip {
            samples: self.samples.iter().map(|x| x * a).collect(),
            sample_rate: self.sample_rate,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Window {
    Rectangular,
    Hamming,
}

impl Window {
    fn coefficients(self, n: usize) -> Vec<f64> {
        match self {
            Window::Rectangular => vec![1.0; n],
            Window::Hamming => (0..n)
                .map(|t| {
                    0.54 - 0.46 * (2.0 * std::f64::consts::PI * t as f64 / (n - 1) as f64).cos()
                })
                .collect(),
        }
    }
}

impl std::str::FromStr for Window {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rect" | "rectangular" => Ok(Window::Rectangular),
            "hamming" => Ok(Window::Hamming),
            _ => Err(Error::Config(format!("unknown window {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameSpec {
    frame_len: usize,
    hop: usize,
    window: Window,
}

impl FrameSpec {
    pub fn new(frame_len: usize, hop: usize, window: Window) -> Result<Self> {
        if frame_len < 2 || !frame_len.is_power_of_two() {
            return Err(Error::Config(format!(
                "frame length {frame_len} must be a power of two, at least 2"
            )));
        }
        if hop == 0 || hop > frame_len {
            return Err(Error::Config(format!("hop {hop} must be in 1..={frame_len}")));
        }
        Ok(FrameSpec {
            frame_len,
            hop,
            window,
        })
    }

    pub fn frame_len(&self) -> usize {
        self.frame_len
    }

    pub fn hop(&self) -> usize {
        self.hop
    }

    pub fn window(&self) -> Window {
        self.window
    }

    /// Number of whole frames in `n_samples`.
    pub fn frame_count(&self, n_samples: usize) -> usize {
        if n_samples < self.frame_len {
            0
        } else {
            (n_samples - self.frame_len) / self.hop + 1
        }
    }
}

impl Default for FrameSpec {
    fn default() -> Self {
        FrameSpec {
            frame_len: 512,
            hop: 256,
            window: Window::Hamming,
        }
    }
}

pub const DEFAULT_N_OUT: usize = 256;

struct Periodogram {
    fft: Arc<dyn Fft<f64>>,
    window: Vec<f64>,
    n_out: usize,
    spec: FrameSpec,
}

impl Periodogram {
    fn new(spec: FrameSpec, n_out: usize) -> Result<Self> {
        if n_out == 0 || n_out > spec.frame_len / 2 {
            return Err(Error::Config(format!(
                "n_out {n_out} must be in 1..={} for frame length {}",
                spec.frame_len / 2,
                spec.frame_len
            )));
        }
        Ok(Periodogram {
            fft: FftPlanner::new().plan_fft_forward(spec.frame_len),
            window: spec.window.coefficients(spec.frame_len),
            n_out,
            spec,
        })
    }

    fn frame(&self, samples: &[f64], index: usize) -> Vec<f64> {
        let start = index * self.spec.hop;
        let mut buf: Vec<Complex<f64>> = samples[start..start + self.spec.frame_len]
            .iter()
            .zip(&self.window)
            .map(|(x, w)| Complex::new(x * w, 0.0))
            .collect();
        self.fft.process(&mut buf);
        buf[..self.n_out]
            .iter()
            .map(|z| z.norm_sqr().max(LOG_FLOOR).log10())
            .collect()
    }
}

/// One spectrum per frame: windowed DFT, `log10(max(|X_i|^2, 1e-12))` for
/// bins `0..n_out`. A clip shorter than a frame yields no spectra.
pub fn frame_log_periodogram(clip: &AudioClip, spec: FrameSpec, n_out: usize) -> Result<Vec<Spectrum>> {
    let p = Periodogram::new(spec, n_out)?;
    let n = spec.frame_count(clip.samples.len());
    Ok((0..n)
        .into_par_iter()
        .map(|i| {
            Spectrum::new(p.frame(&clip.samples, i), FRAME_LABEL, Split::Test)
                .with_id(format!("frame{i}"))
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub theta: f64,
}

impl Trace {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Discriminant value of `c` for every frame, stamped at frame centres.
pub fn scan(clip: &AudioClip, spec: FrameSpec, n_out: usize, c: &PairClassifier) -> Result<Trace> {
    if c.max_index() > n_out {
        return Err(Error::Config(format!(
            "classifier reads bin {} but frames have {n_out}",
            c.max_index()
        )));
    }
    let p = Periodogram::new(spec, n_out)?;
    let n = spec.frame_count(clip.samples.len());
    let values = (0..n)
        .into_par_iter()
        .map(|i| discriminant_values(c, &p.frame(&clip.samples, i)))
        .collect::<Result<Vec<f64>>>()?;
    let half = spec.frame_len as f64 / 2.0;
    let times = (0..n)
        .map(|i| ((i * spec.hop) as f64 + half) / clip.sample_rate)
        .collect();
    Ok(Trace {
        times,
        values,
        theta: c.theta(),
    })
}

pub fn write_trace_tsv<W: Write>(mut out: W, t: &Trace) -> std::io::Result<()> {
    writeln!(out, "time_s\tf_value\ttheta")?;
    for (time, v) in t.times.iter().zip(&t.values) {
        writeln!(out, "{time}\t{v}\t{}", t.theta)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frame_spec_validation() {
        assert!(FrameSpec::new(1, 1, Window::Hamming).is_err());
        assert!(FrameSpec::new(12, 4, Window::Hamming).is_err());
        assert!(FrameSpec::new(16, 0, Window::Hamming).is_err());
        assert!(FrameSpec::new(16, 17, Window::Hamming).is_err());
        assert!(FrameSpec::new(16, 16, Window::Rectangular).is_ok());
        let d = FrameSpec::default();
        assert_eq!((d.frame_len(), d.hop(), d.window()), (512, 256, Window::Hamming));
    }

    #[test]
    fn frame_counts() {
        let s = FrameSpec::new(8, 3, Window::Rectangular).unwrap();
        assert_eq!(s.frame_count(7), 0);
        assert_eq!(s.frame_count(8), 1);
        assert_eq!(s.frame_count(10), 1);
        assert_eq!(s.frame_count(11), 2);
    }

    #[test]
    fn n_out_must_fit_half_frame() {
        let clip = AudioClip::new(vec![0.0; 64], 8000.0).unwrap();
        let s = FrameSpec::new(16, 8, Window::Rectangular).unwrap();
        assert!(frame_log_periodogram(&clip, s, 9).is_err());
        assert_eq!(frame_log_periodogram(&clip, s, 8).unwrap().len(), 7);
    }

    #[test]
    fn silence_hits_the_floor() {
        let clip = AudioClip::new(vec![0.0; 32], 8000.0).unwrap();
        let s = FrameSpec::new(16, 16, Window::Hamming).unwrap();
        let frames = frame_log_periodogram(&clip, s, 4).unwrap();
        assert_eq!(frames.len(), 2);
        assert!(frames.iter().all(|f| f.values == vec![-12.0; 4] && f.label == FRAME_LABEL));
    }

    #[test]
    fn hamming_endpoints() {
        let w = Window::Hamming.coefficients(8);
        assert!((w[0] - 0.08).abs() < 1e-15 && (w[7] - 0.08).abs() < 1e-15);
    }
}
