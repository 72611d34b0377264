use std::f64::consts::PI;
use std::io::Write;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use super::EngineError;

/// Magnitude STFT, one row per analysis frame, `window / 2 + 1` bins per row.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrogram {
    pub window: usize,
    pub hop: usize,
    pub rows: Vec<Vec<f64>>,
}

impl Spectrogram {
    /// Centre frequency of `bin` at the given sample rate.
    pub fn bin_hz(&self, bin: usize, sample_rate_hz: f64) -> f64 {
        bin as f64 * sample_rate_hz / self.window as f64
    }

    /// Comma-separated magnitudes, one line per time frame.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for row in &self.rows {
            let mut first = true;
            for v in row {
                if !first {
                    w.write_all(b",")?;
                }
                first = false;
                write!(w, "{v}")?;
            }
            w.write_all(b"\n")?;
        }
        w.flush()
    }
}

fn hann(window: usize) -> Vec<f64> {
    (0..window)
        .map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / window as f64).cos())
        .collect()
}

/// Hann-windowed magnitude STFT with `floor((len - window) / hop) + 1` rows.
pub fn spectrogram_export(
    audio: &[f64],
    window: usize,
    hop: usize,
) -> Result<Spectrogram, EngineError> {
    if !window.is_power_of_two() || hop == 0 || hop > window {
        return Err(EngineError::InvalidWindow { window, hop });
    }
    if audio.len() < window {
        return Err(EngineError::AudioTooShort {
            len: audio.len(),
            window,
        });
    }
    let taper = hann(window);
    let fft = FftPlanner::<f64>::new().plan_fft_forward(window);
    let frames = (audio.len() - window) / hop + 1;
    let mut buf = vec![Complex::new(0.0, 0.0); window];
    let mut rows = Vec::with_capacity(frames);
    for f in 0..frames {
        let seg = &audio[f * hop..f * hop + window];
        for ((b, &s), &t) in buf.iter_mut().zip(seg).zip(&taper) {
            *b = Complex::new(s * t, 0.0);
        }
        fft.process(&mut buf);
        rows.push(buf[..=window / 2].iter().map(|c| c.norm()).collect());
    }
    Ok(Spectrogram { window, hop, rows })
}

/// Geometric over arithmetic mean of a magnitude spectrum, DC excluded.
/// Near 1 for noise, near 0 for a pure tone; an all-zero row gives 0.
pub fn spectral_flatness(row: &[f64]) -> f64 {
    let bins = row.get(1..).unwrap_or(&[]);
    if bins.is_empty() {
        return 0.0;
    }
    let n = bins.len() as f64;
    let mean = bins.iter().sum::<f64>() / n;
    if mean <= 0.0 {
        return 0.0;
    }
    let floor = mean * 1e-12;
    let log_mean = bins.iter().map(|&m| m.max(floor).ln()).sum::<f64>() / n;
    log_mean.exp() / mean
}

pub fn rms(samples: &[f64]) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    (samples.iter().map(|s| s * s).sum::<f64>() / samples.len() as f64).sqrt()
}
