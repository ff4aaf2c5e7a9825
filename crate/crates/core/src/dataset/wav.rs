//! RIFF/WAVE decoding: PCM-16, mono or stereo.

use crate::error::FormatError;
use crate::tensor::Tensor;

fn malformed(message: impl Into<String>) -> FormatError {
    FormatError::Malformed {
        format: "wav",
        message: message.into(),
    }
}

fn truncated(what: &'static str) -> FormatError {
    FormatError::Truncated {
        format: "wav",
        what,
    }
}

/// Decodes a PCM-16 WAV into (mono waveform in [-1, 1), sample rate).
/// Samples scale by 1/32768; stereo averages the two channels per frame.
pub fn decode_wav(bytes: &[u8]) -> Result<(Tensor, u32), FormatError> {
    if bytes.len() < 12 || &bytes[..4] != b"RIFF" || &bytes[8..12] != b"WAVE" {
        return Err(FormatError::BadMagic { format: "wav" });
    }

    let mut pos = 12usize;
    let mut fmt: Option<(u16, u32)> = None; // (channels, sample_rate)
    let mut data: Option<&[u8]> = None;
    while pos < bytes.len() {
        if bytes.len() - pos < 8 {
            return Err(truncated("chunk header"));
        }
        let id = &bytes[pos..pos + 4];
        let size = u32::from_le_bytes(bytes[pos + 4..pos + 8].try_into().unwrap()) as usize;
        let body_start = pos + 8;
        let body_end = body_start
            .checked_add(size)
            .ok_or_else(|| malformed("chunk size overflows"))?;
        if body_end > bytes.len() {
            return Err(truncated("chunk data"));
        }
        let body = &bytes[body_start..body_end];
        match id {
            b"fmt " => {
                if body.len() < 16 {
                    return Err(truncated("fmt chunk"));
                }
                let format_code = u16::from_le_bytes(body[0..2].try_into().unwrap());
                if format_code != 1 {
                    return Err(FormatError::Unsupported {
                        format: "wav",
                        field: "format code",
                        value: format_code.to_string(),
                    });
                }
                let channels = u16::from_le_bytes(body[2..4].try_into().unwrap());
                if !(1..=2).contains(&channels) {
                    return Err(FormatError::Unsupported {
                        format: "wav",
                        field: "channels",
                        value: channels.to_string(),
                    });
                }
                let sample_rate = u32::from_le_bytes(body[4..8].try_into().unwrap());
                if sample_rate == 0 {
                    return Err(malformed("zero sample rate"));
                }
                let bits = u16::from_le_bytes(body[14..16].try_into().unwrap());
                if bits != 16 {
                    return Err(FormatError::Unsupported {
                        format: "wav",
                        field: "bits per sample",
                        value: bits.to_string(),
                    });
                }
                fmt = Some((channels, sample_rate));
            }
            b"data" => {
                data = Some(body);
                // fmt may legally follow data in odd writers; keep scanning.
            }
            _ => {} // LIST, fact, cue: skipped
        }
        pos = body_end + (size & 1); // chunks are word aligned
    }

    let (channels, sample_rate) = fmt.ok_or_else(|| malformed("missing fmt chunk"))?;
    let data = data.ok_or_else(|| malformed("missing data chunk"))?;
    let frame_bytes = 2 * channels as usize;
    if data.len() % frame_bytes != 0 {
        return Err(truncated("sample data"));
    }
    let frames = data.len() / frame_bytes;
    let mut wave = Vec::with_capacity(frames);
    match channels {
        1 => {
            for chunk in data.chunks_exact(2) {
                let s = i16::from_le_bytes([chunk[0], chunk[1]]);
                wave.push((s as f64 / 32768.0) as f32);
            }
        }
        _ => {
            // Average in f64 per frame, then scale.
            for chunk in data.chunks_exact(4) {
                let l = i16::from_le_bytes([chunk[0], chunk[1]]) as f64;
                let r = i16::from_le_bytes([chunk[2], chunk[3]]) as f64;
                wave.push(((l + r) / 2.0 / 32768.0) as f32);
            }
        }
    }
    Ok((Tensor::from_vec(wave), sample_rate))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn wav(channels: u16, rate: u32, bits: u16, samples: &[i16]) -> Vec<u8> {
        let mut data = Vec::with_capacity(samples.len() * 2);
        for s in samples {
            data.extend_from_slice(&s.to_le_bytes());
        }
        wav_raw(1, channels, rate, bits, &data)
    }

    fn wav_raw(format_code: u16, channels: u16, rate: u32, bits: u16, data: &[u8]) -> Vec<u8> {
        let mut fmt = Vec::new();
        fmt.extend_from_slice(&format_code.to_le_bytes());
        fmt.extend_from_slice(&channels.to_le_bytes());
        fmt.extend_from_slice(&rate.to_le_bytes());
        let byte_rate = rate * channels as u32 * (bits as u32 / 8);
        fmt.extend_from_slice(&byte_rate.to_le_bytes());
        fmt.extend_from_slice(&(channels * bits / 8).to_le_bytes());
        fmt.extend_from_slice(&bits.to_le_bytes());

        let mut out = Vec::new();
        out.extend_from_slice(b"RIFF");
        let riff_size = 4 + 8 + fmt.len() + 8 + data.len();
        out.extend_from_slice(&(riff_size as u32).to_le_bytes());
        out.extend_from_slice(b"WAVE");
        out.extend_from_slice(b"fmt ");
        out.extend_from_slice(&(fmt.len() as u32).to_le_bytes());
        out.extend_from_slice(&fmt);
        out.extend_from_slice(b"data");
        out.extend_from_slice(&(data.len() as u32).to_le_bytes());
        out.extend_from_slice(data);
        out
    }

    #[test]
    fn decodes_mono_scaling_by_32768() {
        let (t, rate) = decode_wav(&wav(1, 8000, 16, &[0, 16384, -32768, 32767])).unwrap();
        assert_eq!(rate, 8000);
        assert_eq!(t.shape(), &[4]);
        assert_eq!(t.data(), &[0.0, 0.5, -1.0, 32767.0 / 32768.0]);
    }

    #[test]
    fn stereo_averages_per_frame() {
        let (t, _) = decode_wav(&wav(2, 44100, 16, &[100, 200, -300, 100])).unwrap();
        assert_eq!(t.shape(), &[2]);
        assert_eq!(t.data(), &[150.0 / 32768.0, -100.0 / 32768.0]);
    }

    #[test]
    fn empty_data_chunk_gives_empty_wave() {
        let (t, rate) = decode_wav(&wav(1, 22050, 16, &[])).unwrap();
        assert!(t.is_empty());
        assert_eq!(rate, 22050);
    }

    #[test]
    fn skips_unknown_chunks() {
        let base = wav(1, 8000, 16, &[5]);
        // Insert a LIST chunk right after the WAVE tag.
        let mut bytes = base[..12].to_vec();
        bytes.extend_from_slice(b"LIST");
        bytes.extend_from_slice(&3u32.to_le_bytes());
        bytes.extend_from_slice(&[1, 2, 3, 0]); // padded to word boundary
        bytes.extend_from_slice(&base[12..]);
        let (t, _) = decode_wav(&bytes).unwrap();
        assert_eq!(t.data(), &[5.0 / 32768.0]);
    }

    #[test]
    fn rejects_bad_magic() {
        assert!(matches!(
            decode_wav(b"RIFXaaaaWAVE"),
            Err(FormatError::BadMagic { format: "wav" })
        ));
        assert!(matches!(
            decode_wav(b"RIFF\x00\x00\x00\x00MP3 "),
            Err(FormatError::BadMagic { format: "wav" })
        ));
    }

    #[test]
    fn rejects_non_pcm_and_wrong_bits_and_channels() {
        assert!(matches!(
            decode_wav(&wav_raw(3, 1, 8000, 16, &[])),
            Err(FormatError::Unsupported { field: "format code", .. })
        ));
        assert!(matches!(
            decode_wav(&wav(1, 8000, 8, &[0])),
            Err(FormatError::Unsupported { field: "bits per sample", .. })
        ));
        assert!(matches!(
            decode_wav(&wav(4, 8000, 16, &[0, 0, 0, 0])),
            Err(FormatError::Unsupported { field: "channels", .. })
        ));
    }

    #[test]
    fn rejects_truncation_and_partial_frames() {
        let good = wav(1, 8000, 16, &[1, 2, 3]);
        assert!(matches!(
            decode_wav(&good[..good.len() - 2]),
            Err(FormatError::Truncated { .. })
        ));
        // Stereo data with an odd number of samples is a partial frame.
        let bad = wav(2, 8000, 16, &[1, 2, 3]);
        assert!(matches!(
            decode_wav(&bad),
            Err(FormatError::Truncated { what: "sample data", .. })
        ));
    }

    #[test]
    fn missing_fmt_is_malformed() {
        let mut bytes = Vec::new();
        bytes.extend_from_slice(b"RIFF");
        bytes.extend_from_slice(&12u32.to_le_bytes());
        bytes.extend_from_slice(b"WAVE");
        bytes.extend_from_slice(b"data");
        bytes.extend_from_slice(&2u32.to_le_bytes());
        bytes.extend_from_slice(&[0, 0]);
        assert!(matches!(
            decode_wav(&bytes),
            Err(FormatError::Malformed { .. })
        ));
    }
}
