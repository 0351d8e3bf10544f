//! Minimal RIFF/WAVE reader and writer for 16-bit PCM.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

use super::AudioClip;

const PCM: u16 = 0x0001;
const EXTENSIBLE: u16 = 0xFFFE;
// first two bytes of KSDATAFORMAT_SUBTYPE_PCM
const PCM_SUBFORMAT: [u8; 2] = [0x01, 0x00];

fn u16_at(b: &[u8], at: usize) -> u16 {
    u16::from_le_bytes([b[at], b[at + 1]])
}

fn u32_at(b: &[u8], at: usize) -> u32 {
    u32::from_le_bytes([b[at], b[at + 1], b[at + 2], b[at + 3]])
}

struct Format {
    channels: u16,
    sample_rate: u32,
    bits: u16,
}

fn parse_fmt(body: &[u8]) -> Result<Format> {
    if body.len() < 16 {
        return Err(Error::Wav(format!("fmt chunk is {} bytes, need 16", body.len())));
    }
    let mut tag = u16_at(body, 0);
    if tag == EXTENSIBLE {
        if body.len() < 40 {
            return Err(Error::Wav("truncated WAVE_FORMAT_EXTENSIBLE header".into()));
        }
        let sub = u16_at(body, 24);
        if body[24..26] != PCM_SUBFORMAT {
            return Err(Error::WavFormatTag { tag: sub });
        }
        tag = PCM;
    }
    if tag != PCM {
        return Err(Error::WavFormatTag { tag });
    }
    Ok(Format {
        channels: u16_at(body, 2),
        sample_rate: u32_at(body, 4),
        bits: u16_at(body, 14),
    })
}

/// Decodes a WAV byte buffer; channels are averaged into one.
pub fn decode(bytes: &[u8]) -> Result<AudioClip> {
    if bytes.len() < 12 || &bytes[0..4] != b"RIFF" || &bytes[8..12] != b"WAVE" {
        return Err(Error::Wav("not a RIFF/WAVE file".into()));
    }
    let mut fmt = None;
    let mut data = None;
    let mut at = 12;
    while at + 8 <= bytes.len() {
        let id = &bytes[at..at + 4];
        let len = u32_at(bytes, at + 4) as usize;
        let body_start = at + 8;
        let body_end = body_start.saturating_add(len).min(bytes.len());
        let body = &bytes[body_start..body_end];
        match id {
            b"fmt " => fmt = Some(parse_fmt(body)?),
            b"data" => data = Some(body),
            _ => {}
        }
        // chunks are padded to even length
        at = body_start.saturating_add(len).saturating_add(len & 1);
    }
    let fmt = fmt.ok_or_else(|| Error::Wav("missing fmt chunk".into()))?;
    let data = data.ok_or_else(|| Error::Wav("missing data chunk".into()))?;
    if fmt.bits != 16 {
        return Err(Error::Wav(format!("{}-bit PCM is not supported, need 16", fmt.bits)));
    }
    if fmt.channels == 0 {
        return Err(Error::Wav("zero channels".into()));
    }
    let ch = fmt.channels as usize;
    let frame_bytes = 2 * ch;
    let samples: Vec<f64> = data
        .chunks_exact(frame_bytes)
        .map(|frame| {
            let sum: f64 = frame
                .chunks_exact(2)
                .map(|b| i16::from_le_bytes([b[0], b[1]]) as f64 / 32768.0)
                .sum();
            sum / ch as f64
        })
        .collect();
    AudioClip::new(samples, fmt.sample_rate as f64)
}

pub fn read_pcm(path: impl AsRef<Path>) -> Result<AudioClip> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode(&bytes)
}

fn quantize(x: f64) -> i16 {
    (x * 32768.0).round().clamp(-32768.0, 32767.0) as i16
}

/// 16-bit mono encoding; samples are rounded and clamped.
pub fn encode(clip: &AudioClip) -> Vec<u8> {
    let data_len = 2 * clip.samples.len() as u32;
    let rate = clip.sample_rate.round() as u32;
    let mut out = Vec::with_capacity(44 + data_len as usize);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&(36 + data_len).to_le_bytes());
    out.extend_from_slice(b"WAVE");
    out.extend_from_slice(b"fmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&PCM.to_le_bytes());
    out.extend_from_slice(&1u16.to_le_bytes());
    out.extend_from_slice(&rate.to_le_bytes());
    out.extend_from_slice(&(2 * rate).to_le_bytes());
    out.extend_from_slice(&2u16.to_le_bytes());
    out.extend_from_slice(&16u16.to_le_bytes());
    out.extend_from_slice(b"data");
    out.extend_from_slice(&data_len.to_le_bytes());
    for &x in &clip.samples {
        out.extend_from_slice(&quantize(x).to_le_bytes());
    }
    out
}

pub fn write_pcm(clip: &AudioClip, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode(clip)).map_err(|e| Error::io(path, e))
}
