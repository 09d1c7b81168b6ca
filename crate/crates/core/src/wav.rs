//! Mono 16-bit PCM in RIFF/WAVE form.

use std::io::Cursor;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WavError {
    #[error("malformed WAV: {0}")]
    Malformed(String),
    #[error(
        "unsupported WAV format: {channels} channel(s), {bits}-bit {format}; need mono 16-bit PCM"
    )]
    Unsupported {
        channels: u16,
        bits: u16,
        format: &'static str,
    },
    #[error("WAV data chunk claims {claimed} bytes but only {available} are present")]
    Truncated { claimed: u64, available: u64 },
}

/// Signed 16-bit mono samples at a fixed rate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PcmBuffer {
    pub samples: Vec<i16>,
    pub sample_rate: u32,
}

impl PcmBuffer {
    pub fn new(samples: Vec<i16>, sample_rate: u32) -> Self {
        Self {
            samples,
            sample_rate,
        }
    }

    pub fn silence(frames: usize, sample_rate: u32) -> Self {
        Self::new(vec![0; frames], sample_rate)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// `frames` frames of a sine at `freq` Hz with peak `amplitude`.
    pub fn sine(freq: f64, sample_rate: u32, frames: usize, amplitude: i16) -> Self {
        let step = 2.0 * std::f64::consts::PI * freq / f64::from(sample_rate);
        let samples = (0..frames)
            .map(|i| ((i as f64 * step).sin() * f64::from(amplitude)).round() as i16)
            .collect();
        Self::new(samples, sample_rate)
    }

    pub fn to_wav_bytes(&self) -> Vec<u8> {
        let spec = hound::WavSpec {
            channels: 1,
            sample_rate: self.sample_rate,
            bits_per_sample: 16,
            sample_format: hound::SampleFormat::Int,
        };
        let mut out = Cursor::new(Vec::with_capacity(44 + 2 * self.samples.len()));
        {
            let mut writer = hound::WavWriter::new(&mut out, spec).expect("in-memory writer");
            let mut i16_writer = writer.get_i16_writer(self.samples.len() as u32);
            for s in &self.samples {
                i16_writer.write_sample(*s);
            }
            i16_writer.flush().expect("in-memory writer");
            writer.finalize().expect("in-memory writer");
        }
        out.into_inner()
    }

    pub fn from_wav_bytes(bytes: &[u8]) -> Result<Self, WavError> {
        let reader = open(bytes)?;
        let sample_rate = reader.spec().sample_rate;
        let samples = reader
            .into_samples::<i16>()
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| WavError::Malformed(e.to_string()))?;
        Ok(Self::new(samples, sample_rate))
    }
}

/// Sample rate of a mono 16-bit PCM payload, after checking its header.
pub fn probe(bytes: &[u8]) -> Result<u32, WavError> {
    Ok(open(bytes)?.spec().sample_rate)
}

fn open(bytes: &[u8]) -> Result<hound::WavReader<Cursor<&[u8]>>, WavError> {
    let reader = hound::WavReader::new(Cursor::new(bytes))
        .map_err(|e| WavError::Malformed(e.to_string()))?;
    let spec = reader.spec();
    if spec.channels != 1
        || spec.bits_per_sample != 16
        || spec.sample_format != hound::SampleFormat::Int
    {
        return Err(WavError::Unsupported {
            channels: spec.channels,
            bits: spec.bits_per_sample,
            format: match spec.sample_format {
                hound::SampleFormat::Int => "integer",
                hound::SampleFormat::Float => "float",
            },
        });
    }
    // The sample iterator preallocates from the header's claim.
    let claimed = u64::from(reader.len()) * 2;
    let available = bytes.len() as u64;
    if claimed > available {
        return Err(WavError::Truncated { claimed, available });
    }
    Ok(reader)
}
