//! NPY v1.0 serialization for f32 tensors.
//!
//! Writes little-endian `<f4`, C order, version 1.0 only. The header dict
//! is rendered exactly as the reference writer does and the preamble
//! (magic + version + length field + header text) is space-padded so its
//! total size is the smallest multiple of 64 that fits, with the final
//! header byte always `\n`. The reader accepts exactly the subset this
//! module writes and rejects everything else with a [`FormatError`]
//! naming the offending field.

use std::path::Path;

use crate::error::{FormatError, IoError, PipelineError};
use crate::tensor::Tensor;

const MAGIC: &[u8; 6] = b"\x93NUMPY";
const ALIGN: usize = 64;

fn shape_repr(shape: &[usize]) -> String {
    if shape.len() == 1 {
        format!("({},)", shape[0])
    } else {
        let dims: Vec<String> = shape.iter().map(|d| d.to_string()).collect();
        format!("({})", dims.join(", "))
    }
}

/// Serialized NPY bytes for `tensor`. Pure and deterministic: equal
/// tensors always produce identical bytes.
pub fn encode_npy(tensor: &Tensor) -> Vec<u8> {
    let dict = format!(
        "{{'descr': '<f4', 'fortran_order': False, 'shape': {}, }}",
        shape_repr(tensor.shape())
    );
    // Preamble: 6 magic + 2 version + 2 length + header text, padded so the
    // total is a multiple of 64 and the text ends with '\n'.
    let unpadded = MAGIC.len() + 4 + dict.len() + 1;
    let preamble = unpadded.div_ceil(ALIGN) * ALIGN;
    let header_len = preamble - MAGIC.len() - 4;
    assert!(header_len <= u16::MAX as usize, "npy header too large");

    let mut out = Vec::with_capacity(preamble + tensor.len() * 4);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&[0x01, 0x00]);
    out.extend_from_slice(&(header_len as u16).to_le_bytes());
    out.extend_from_slice(dict.as_bytes());
    out.resize(preamble - 1, b' ');
    out.push(b'\n');
    for v in tensor.data() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

/// Writes `tensor` to `path` as a single whole-buffer write.
pub fn write_npy(tensor: &Tensor, path: &Path) -> Result<(), IoError> {
    std::fs::write(path, encode_npy(tensor)).map_err(|e| IoError::new(path, e))
}

pub fn read_npy(path: &Path) -> Result<Tensor, PipelineError> {
    let bytes = std::fs::read(path).map_err(|e| IoError::new(path, e))?;
    Ok(decode_npy(&bytes)?)
}

fn malformed(message: impl Into<String>) -> FormatError {
    FormatError::Malformed {
        format: "npy",
        message: message.into(),
    }
}

/// Parses NPY bytes produced by [`encode_npy`] or the reference writer.
pub fn decode_npy(bytes: &[u8]) -> Result<Tensor, FormatError> {
    if bytes.len() < 10 || &bytes[..6] != MAGIC {
        return Err(FormatError::BadMagic { format: "npy" });
    }
    let version = (bytes[6], bytes[7]);
    if version != (1, 0) {
        return Err(FormatError::Unsupported {
            format: "npy",
            field: "version",
            value: format!("{}.{}", version.0, version.1),
        });
    }
    let header_len = u16::from_le_bytes([bytes[8], bytes[9]]) as usize;
    let preamble = 10 + header_len;
    if bytes.len() < preamble {
        return Err(FormatError::Truncated {
            format: "npy",
            what: "header",
        });
    }
    let text = std::str::from_utf8(&bytes[10..preamble])
        .map_err(|_| malformed("header is not ascii"))?;
    if !text.ends_with('\n') {
        return Err(malformed("header does not end with newline"));
    }
    let (descr, fortran, shape) = parse_header(text)?;
    if descr != "<f4" {
        return Err(FormatError::Unsupported {
            format: "npy",
            field: "descr",
            value: descr,
        });
    }
    if fortran {
        return Err(FormatError::Unsupported {
            format: "npy",
            field: "fortran_order",
            value: "True".into(),
        });
    }
    if shape.is_empty() || shape.len() > 3 {
        return Err(FormatError::Unsupported {
            format: "npy",
            field: "shape",
            value: format!("rank {}", shape.len()),
        });
    }
    let count = shape
        .iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d))
        .ok_or_else(|| malformed("shape product overflows"))?;
    let payload = &bytes[preamble..];
    let expect = count
        .checked_mul(4)
        .ok_or_else(|| malformed("payload size overflows"))?;
    if payload.len() < expect {
        return Err(FormatError::Truncated {
            format: "npy",
            what: "payload",
        });
    }
    if payload.len() > expect {
        return Err(malformed("trailing bytes after payload"));
    }
    let data = payload
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect();
    Ok(Tensor::new(shape, data))
}

/// Parses the fixed three-key header dict. Strict: exactly the keys
/// 'descr', 'fortran_order', 'shape', each once.
fn parse_header(text: &str) -> Result<(String, bool, Vec<usize>), FormatError> {
    let body = text.trim_end_matches(['\n', ' ']);
    let inner = body
        .strip_prefix('{')
        .and_then(|s| s.strip_suffix('}'))
        .ok_or_else(|| malformed("header is not a dict"))?;

    let mut descr = None;
    let mut fortran = None;
    let mut shape = None;
    let mut rest = inner.trim_start();
    while !rest.is_empty() {
        let key;
        (key, rest) = take_quoted(rest)?;
        rest = rest
            .trim_start()
            .strip_prefix(':')
            .ok_or_else(|| malformed("expected ':' after header key"))?
            .trim_start();
        match key {
            "descr" => {
                let value;
                (value, rest) = take_quoted(rest)?;
                if descr.replace(value.to_string()).is_some() {
                    return Err(malformed("duplicate 'descr'"));
                }
            }
            "fortran_order" => {
                let value = if let Some(r) = rest.strip_prefix("False") {
                    rest = r;
                    false
                } else if let Some(r) = rest.strip_prefix("True") {
                    rest = r;
                    true
                } else {
                    return Err(malformed("fortran_order must be True or False"));
                };
                if fortran.replace(value).is_some() {
                    return Err(malformed("duplicate 'fortran_order'"));
                }
            }
            "shape" => {
                let value;
                (value, rest) = take_tuple(rest)?;
                if shape.replace(value).is_some() {
                    return Err(malformed("duplicate 'shape'"));
                }
            }
            other => return Err(malformed(format!("unexpected header key '{other}'"))),
        }
        rest = rest.trim_start();
        if let Some(r) = rest.strip_prefix(',') {
            rest = r.trim_start();
        } else if !rest.is_empty() {
            return Err(malformed("expected ',' between header entries"));
        }
    }
    match (descr, fortran, shape) {
        (Some(d), Some(f), Some(s)) => Ok((d, f, s)),
        _ => Err(malformed("header is missing a required key")),
    }
}

fn take_quoted(s: &str) -> Result<(&str, &str), FormatError> {
    let s = s
        .strip_prefix('\'')
        .ok_or_else(|| malformed("expected quoted string in header"))?;
    let end = s
        .find('\'')
        .ok_or_else(|| malformed("unterminated string in header"))?;
    Ok((&s[..end], &s[end + 1..]))
}

fn take_tuple(s: &str) -> Result<(Vec<usize>, &str), FormatError> {
    let s = s
        .strip_prefix('(')
        .ok_or_else(|| malformed("shape must be a tuple"))?;
    let end = s
        .find(')')
        .ok_or_else(|| malformed("unterminated shape tuple"))?;
    let mut dims = Vec::new();
    for part in s[..end].split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue; // trailing comma in "(3,)"
        }
        let d: usize = part
            .parse()
            .map_err(|_| malformed(format!("bad shape dimension '{part}'")))?;
        dims.push(d);
    }
    Ok((dims, &s[end + 1..]))
}
