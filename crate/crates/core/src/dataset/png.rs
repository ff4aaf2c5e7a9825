//! Minimal PNG decoding: 8-bit depth, color types 0 (gray), 2 (rgb),
//! 6 (rgba), no interlace. Palette, 16-bit, and interlaced images are
//! rejected. Chunk CRCs are not verified.

use miniz_oxide::inflate::decompress_to_vec_zlib;

use crate::error::FormatError;
use crate::tensor::Tensor;

const SIGNATURE: [u8; 8] = [137, 80, 78, 71, 13, 10, 26, 10];

fn malformed(message: impl Into<String>) -> FormatError {
    FormatError::Malformed {
        format: "png",
        message: message.into(),
    }
}

fn truncated(what: &'static str) -> FormatError {
    FormatError::Truncated {
        format: "png",
        what,
    }
}

/// Decodes PNG bytes into an (H, W, 3) tensor of raw 0..=255 values.
/// Gray replicates its channel, rgba drops alpha.
pub fn decode_png(bytes: &[u8]) -> Result<Tensor, FormatError> {
    if bytes.len() < 8 || bytes[..8] != SIGNATURE {
        return Err(FormatError::BadMagic { format: "png" });
    }

    let mut pos = 8usize;
    let mut header: Option<(usize, usize, usize)> = None; // (h, w, channels)
    let mut idat = Vec::new();
    let mut saw_end = false;
    while pos < bytes.len() {
        if bytes.len() - pos < 8 {
            return Err(truncated("chunk header"));
        }
        let len = u32::from_be_bytes(bytes[pos..pos + 4].try_into().unwrap()) as usize;
        let kind = &bytes[pos + 4..pos + 8];
        let data_start = pos + 8;
        let data_end = data_start
            .checked_add(len)
            .ok_or_else(|| malformed("chunk length overflows"))?;
        if data_end + 4 > bytes.len() {
            return Err(truncated("chunk data"));
        }
        let data = &bytes[data_start..data_end];
        match kind {
            b"IHDR" => {
                if header.is_some() {
                    return Err(malformed("duplicate IHDR"));
                }
                header = Some(parse_ihdr(data)?);
            }
            b"IDAT" => {
                if header.is_none() {
                    return Err(malformed("IDAT before IHDR"));
                }
                idat.extend_from_slice(data);
            }
            b"IEND" => {
                saw_end = true;
                break;
            }
            _ => {} // ancillary chunks are skipped
        }
        pos = data_end + 4; // skip crc
    }
    let (height, width, channels) = header.ok_or_else(|| malformed("missing IHDR"))?;
    if !saw_end {
        return Err(truncated("image (no IEND)"));
    }
    if idat.is_empty() {
        return Err(malformed("missing IDAT"));
    }

    let raw = decompress_to_vec_zlib(&idat).map_err(|_| malformed("bad zlib stream"))?;
    let stride = width
        .checked_mul(channels)
        .ok_or_else(|| malformed("image dimensions overflow"))?;
    let expect = height
        .checked_mul(stride + 1)
        .ok_or_else(|| malformed("image dimensions overflow"))?;
    if raw.len() < expect {
        return Err(truncated("pixel data"));
    }
    if raw.len() > expect {
        return Err(malformed("excess pixel data"));
    }

    let mut prev = vec![0u8; stride];
    let mut data = Vec::with_capacity(width * height * 3);
    for row in 0..height {
        let line = &raw[row * (stride + 1)..(row + 1) * (stride + 1)];
        let cur = unfilter_row(line[0], &line[1..], &prev, channels)?;
        for px in cur.chunks_exact(channels) {
            match channels {
                1 => data.extend_from_slice(&[px[0] as f32, px[0] as f32, px[0] as f32]),
                _ => data.extend_from_slice(&[px[0] as f32, px[1] as f32, px[2] as f32]),
            }
        }
        prev = cur;
    }
    Ok(Tensor::new(vec![height, width, 3], data))
}

fn parse_ihdr(data: &[u8]) -> Result<(usize, usize, usize), FormatError> {
    if data.len() != 13 {
        return Err(malformed("IHDR must be 13 bytes"));
    }
    let width = u32::from_be_bytes(data[0..4].try_into().unwrap()) as usize;
    let height = u32::from_be_bytes(data[4..8].try_into().unwrap()) as usize;
    let bit_depth = data[8];
    let color_type = data[9];
    let interlace = data[12];
    if width == 0 || height == 0 {
        return Err(malformed("zero image dimensions"));
    }
    if bit_depth != 8 {
        return Err(FormatError::Unsupported {
            format: "png",
            field: "bit depth",
            value: bit_depth.to_string(),
        });
    }
    let channels = match color_type {
        0 => 1,
        2 => 3,
        6 => 4,
        other => {
            return Err(FormatError::Unsupported {
                format: "png",
                field: "color type",
                value: other.to_string(),
            })
        }
    };
    if data[10] != 0 || data[11] != 0 {
        return Err(malformed("bad compression or filter method"));
    }
    if interlace != 0 {
        return Err(FormatError::Unsupported {
            format: "png",
            field: "interlace",
            value: interlace.to_string(),
        });
    }
    Ok((height, width, channels))
}

fn unfilter_row(
    filter: u8,
    line: &[u8],
    prev: &[u8],
    bpp: usize,
) -> Result<Vec<u8>, FormatError> {
    let mut out = Vec::with_capacity(line.len());
    for (i, &x) in line.iter().enumerate() {
        let a = if i >= bpp { out[i - bpp] } else { 0 }; // left
        let b = prev[i]; // up
        let c = if i >= bpp { prev[i - bpp] } else { 0 }; // up-left
        let v = match filter {
            0 => x,
            1 => x.wrapping_add(a),
            2 => x.wrapping_add(b),
            3 => x.wrapping_add(((a as u16 + b as u16) / 2) as u8),
            4 => x.wrapping_add(paeth(a, b, c)),
            other => return Err(malformed(format!("bad filter type {other}"))),
        };
        out.push(v);
    }
    Ok(out)
}

fn paeth(a: u8, b: u8, c: u8) -> u8 {
    let p = a as i16 + b as i16 - c as i16;
    let pa = (p - a as i16).abs();
    let pb = (p - b as i16).abs();
    let pc = (p - c as i16).abs();
    if pa <= pb && pa <= pc {
        a
    } else if pb <= pc {
        b
    } else {
        c
    }
}
