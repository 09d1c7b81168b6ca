//! The `.slax` container: one manifest plus one WAV payload per track.
//!
//! ```text
//! "SLAX" | version u16 | manifest_len u32 | manifest | track_count u16
//!        | { payload_len u32 | payload } * track_count
//! ```
//!
//! All integers little-endian. The manifest is the canonical JSON encoding
//! of the [`Piece`]; payload `i` is the audio of track `i`.

use thiserror::Error;

use crate::canonical;
use crate::model::Piece;
use crate::validate::{validate_piece, ValidationReport};
use crate::wav::{self, PcmBuffer, WavError};

pub const MAGIC: [u8; 4] = *b"SLAX";
pub const VERSION: u16 = 1;
pub const EXTENSION: &str = "slax";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ContainerError {
    #[error("not a slax container (magic {0:02x?})")]
    BadMagic([u8; 4]),
    #[error("unsupported container version {0}")]
    UnsupportedVersion(u16),
    #[error("truncated file: {field} needs {needed} bytes, {remaining} remain")]
    TruncatedFile {
        field: &'static str,
        needed: u64,
        remaining: u64,
    },
    #[error("{0} unexpected bytes after the last payload")]
    TrailingBytes(usize),
    #[error("manifest is not valid: {0}")]
    ManifestSyntax(String),
    #[error("manifest describes an invalid piece:\n{0}")]
    ManifestInvalid(ValidationReport),
    #[error("piece is invalid:\n{0}")]
    PieceInvalid(ValidationReport),
    #[error("{found} payloads for {expected} tracks")]
    PayloadCountMismatch { expected: usize, found: usize },
    #[error("payload {index}: {reason}")]
    PayloadFormatMismatch { index: usize, reason: String },
    #[error("{0} tracks exceed the format limit of 65535")]
    TooManyTracks(usize),
}

impl ContainerError {
    pub fn code(&self) -> &'static str {
        match self {
            Self::BadMagic(_) => "BadMagic",
            Self::UnsupportedVersion(_) => "UnsupportedVersion",
            Self::TruncatedFile { .. } => "TruncatedFile",
            Self::TrailingBytes(_) => "TrailingBytes",
            Self::ManifestSyntax(_) => "ManifestSyntax",
            Self::ManifestInvalid(_) => "ManifestInvalid",
            Self::PieceInvalid(_) => "PieceInvalid",
            Self::PayloadCountMismatch { .. } => "PayloadCountMismatch",
            Self::PayloadFormatMismatch { .. } => "PayloadFormatMismatch",
            Self::TooManyTracks(_) => "TooManyTracks",
        }
    }
}

/// Canonical manifest bytes for `piece`.
pub fn manifest_bytes(piece: &Piece) -> Vec<u8> {
    canonical::to_vec(piece).expect("pieces hold only strings, integers and booleans")
}

/// Parses and validates a manifest.
pub fn parse_manifest(bytes: &[u8]) -> Result<Piece, ContainerError> {
    let text =
        std::str::from_utf8(bytes).map_err(|e| ContainerError::ManifestSyntax(e.to_string()))?;
    let piece: Piece =
        serde_json::from_str(text).map_err(|e| ContainerError::ManifestSyntax(e.to_string()))?;
    let report = validate_piece(&piece);
    if !report.is_ok() {
        return Err(ContainerError::ManifestInvalid(report));
    }
    Ok(piece)
}

fn check_payload(index: usize, bytes: &[u8], sample_rate: u32) -> Result<(), ContainerError> {
    let mismatch = |reason: String| ContainerError::PayloadFormatMismatch { index, reason };
    let rate = wav::probe(bytes).map_err(|e: WavError| mismatch(e.to_string()))?;
    if rate != sample_rate {
        return Err(mismatch(format!(
            "sample rate {rate} Hz, piece declares {sample_rate} Hz"
        )));
    }
    PcmBuffer::from_wav_bytes(bytes).map_err(|e| mismatch(e.to_string()))?;
    Ok(())
}

/// Serialises `piece` with one WAV payload per track.
pub fn encode(piece: &Piece, audio: &[Vec<u8>]) -> Result<Vec<u8>, ContainerError> {
    let report = validate_piece(piece);
    if !report.is_ok() {
        return Err(ContainerError::PieceInvalid(report));
    }
    if audio.len() != piece.tracks.len() {
        return Err(ContainerError::PayloadCountMismatch {
            expected: piece.tracks.len(),
            found: audio.len(),
        });
    }
    let track_count =
        u16::try_from(audio.len()).map_err(|_| ContainerError::TooManyTracks(audio.len()))?;
    for (i, payload) in audio.iter().enumerate() {
        check_payload(i, payload, piece.sample_rate)?;
    }

    let manifest = manifest_bytes(piece);
    let total = 4 + 2 + 4 + manifest.len() + 2 + audio.iter().map(|a| 4 + a.len()).sum::<usize>();
    let mut out = Vec::with_capacity(total);
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(manifest.len() as u32).to_le_bytes());
    out.extend_from_slice(&manifest);
    out.extend_from_slice(&track_count.to_le_bytes());
    for payload in audio {
        out.extend_from_slice(&(payload.len() as u32).to_le_bytes());
        out.extend_from_slice(payload);
    }
    Ok(out)
}

/// [`encode`] from decoded PCM.
pub fn encode_pcm(piece: &Piece, audio: &[PcmBuffer]) -> Result<Vec<u8>, ContainerError> {
    let payloads: Vec<Vec<u8>> = audio.iter().map(PcmBuffer::to_wav_bytes).collect();
    encode(piece, &payloads)
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn remaining(&self) -> usize {
        self.bytes.len() - self.pos
    }

    fn take(&mut self, n: usize, field: &'static str) -> Result<&'a [u8], ContainerError> {
        if n > self.remaining() {
            return Err(ContainerError::TruncatedFile {
                field,
                needed: n as u64,
                remaining: self.remaining() as u64,
            });
        }
        let slice = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(slice)
    }

    fn u16(&mut self, field: &'static str) -> Result<u16, ContainerError> {
        let b = self.take(2, field)?;
        Ok(u16::from_le_bytes([b[0], b[1]]))
    }

    fn u32(&mut self, field: &'static str) -> Result<u32, ContainerError> {
        let b = self.take(4, field)?;
        Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
    }
}

/// Parses a container, validating the piece and every payload.
pub fn decode(bytes: &[u8]) -> Result<(Piece, Vec<Vec<u8>>), ContainerError> {
    let mut r = Reader { bytes, pos: 0 };
    let magic = r.take(4, "magic")?;
    if magic != MAGIC {
        return Err(ContainerError::BadMagic(magic.try_into().expect("4 bytes")));
    }
    let version = r.u16("version")?;
    if version != VERSION {
        return Err(ContainerError::UnsupportedVersion(version));
    }
    let manifest_len = r.u32("manifest length")? as usize;
    let manifest = r.take(manifest_len, "manifest")?;
    let piece = parse_manifest(manifest)?;
    let count = usize::from(r.u16("track count")?);
    if count != piece.tracks.len() {
        return Err(ContainerError::PayloadCountMismatch {
            expected: piece.tracks.len(),
            found: count,
        });
    }
    let mut payloads = Vec::with_capacity(count);
    for i in 0..count {
        let len = r.u32("payload length")? as usize;
        let payload = r.take(len, "payload")?;
        check_payload(i, payload, piece.sample_rate)?;
        payloads.push(payload.to_vec());
    }
    if r.remaining() > 0 {
        return Err(ContainerError::TrailingBytes(r.remaining()));
    }
    Ok((piece, payloads))
}
