use std::io::{Cursor, Seek, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::EngineError;

/// Sample encoding for mono WAV output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WavFormat {
    #[default]
    Pcm16,
    Float32,
}

fn write_to<W: Write + Seek>(
    w: W,
    samples: &[f64],
    sample_rate_hz: u32,
    format: WavFormat,
) -> Result<(), EngineError> {
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate: sample_rate_hz,
        bits_per_sample: match format {
            WavFormat::Pcm16 => 16,
            WavFormat::Float32 => 32,
        },
        sample_format: match format {
            WavFormat::Pcm16 => hound::SampleFormat::Int,
            WavFormat::Float32 => hound::SampleFormat::Float,
        },
    };
    let mut writer = hound::WavWriter::new(w, spec)?;
    match format {
        WavFormat::Pcm16 => {
            let mut iw = writer.get_i16_writer(samples.len() as u32);
            for &s in samples {
                iw.write_sample((s.clamp(-1.0, 1.0) * i16::MAX as f64).round() as i16);
            }
            iw.flush()?;
        }
        WavFormat::Float32 => {
            for &s in samples {
                writer.write_sample(s as f32)?;
            }
        }
    }
    writer.finalize()?;
    Ok(())
}

/// RIFF/WAVE bytes for mono audio.
pub fn encode_wav(
    samples: &[f64],
    sample_rate_hz: u32,
    format: WavFormat,
) -> Result<Vec<u8>, EngineError> {
    let mut cur = Cursor::new(Vec::new());
    write_to(&mut cur, samples, sample_rate_hz, format)?;
    Ok(cur.into_inner())
}

pub fn write_wav(
    path: impl AsRef<Path>,
    samples: &[f64],
    sample_rate_hz: u32,
    format: WavFormat,
) -> Result<(), EngineError> {
    let bytes = encode_wav(samples, sample_rate_hz, format)?;
    std::fs::write(path, bytes)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pcm16_header_and_samples() {
        let bytes = encode_wav(&[0.0, 1.0, -1.0, 0.5], 48_000, WavFormat::Pcm16).unwrap();
        assert_eq!(&bytes[..4], b"RIFF");
        assert_eq!(&bytes[8..12], b"WAVE");
        let mut r = hound::WavReader::new(bytes.as_slice()).unwrap();
        assert_eq!(r.spec().sample_rate, 48_000);
        assert_eq!(r.spec().channels, 1);
        let s: Vec<i16> = r.samples::<i16>().map(Result::unwrap).collect();
        assert_eq!(s, vec![0, 32767, -32767, 16384]);
    }

    #[test]
    fn float32_is_lossless_for_f32_values() {
        let input = [0.25, -0.125, 0.1f32 as f64];
        let bytes = encode_wav(&input, 44_100, WavFormat::Float32).unwrap();
        let mut r = hound::WavReader::new(bytes.as_slice()).unwrap();
        let s: Vec<f32> = r.samples::<f32>().map(Result::unwrap).collect();
        assert_eq!(s, vec![0.25, -0.125, 0.1]);
    }
}
