//! Binary PPM (P6) and PGM (P5) decoding, maxval 255 only.

use crate::error::FormatError;
use crate::tensor::Tensor;

fn malformed(message: impl Into<String>) -> FormatError {
    FormatError::Malformed {
        format: "ppm",
        message: message.into(),
    }
}

/// Decodes P6/P5 bytes into an (H, W, 3) tensor of raw 0..=255 values.
/// Grayscale replicates its channel. '#' comments are allowed between
/// header tokens; exactly one whitespace byte separates the maxval from
/// the pixel data.
pub fn decode_ppm(bytes: &[u8]) -> Result<Tensor, FormatError> {
    let mut scan = Scanner { bytes, pos: 0 };
    let magic = scan.token()?;
    let channels = match magic {
        b"P6" => 3usize,
        b"P5" => 1usize,
        _ => return Err(FormatError::BadMagic { format: "ppm" }),
    };
    let width = scan.number("width")?;
    let height = scan.number("height")?;
    let maxval = scan.number("maxval")?;
    if maxval != 255 {
        return Err(FormatError::Unsupported {
            format: "ppm",
            field: "maxval",
            value: maxval.to_string(),
        });
    }
    if width == 0 || height == 0 {
        return Err(malformed("zero image dimensions"));
    }
    scan.single_separator()?;

    let need = width
        .checked_mul(height)
        .and_then(|n| n.checked_mul(channels))
        .ok_or_else(|| malformed("image dimensions overflow"))?;
    let pixels = &scan.bytes[scan.pos..];
    if pixels.len() < need {
        return Err(FormatError::Truncated {
            format: "ppm",
            what: "pixel data",
        });
    }
    let mut data = Vec::with_capacity(width * height * 3);
    match channels {
        3 => data.extend(pixels[..need].iter().map(|&b| b as f32)),
        _ => {
            for &b in &pixels[..need] {
                let v = b as f32;
                data.extend_from_slice(&[v, v, v]);
            }
        }
    }
    Ok(Tensor::new(vec![height, width, 3], data))
}

struct Scanner<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Scanner<'_> {
    fn skip_space_and_comments(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            match b {
                b' ' | b'\t' | b'\r' | b'\n' => self.pos += 1,
                b'#' => {
                    while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                _ => break,
            }
        }
    }

    fn token(&mut self) -> Result<&[u8], FormatError> {
        self.skip_space_and_comments();
        let start = self.pos;
        while let Some(&b) = self.bytes.get(self.pos) {
            if matches!(b, b' ' | b'\t' | b'\r' | b'\n' | b'#') {
                break;
            }
            self.pos += 1;
        }
        if start == self.pos {
            return Err(FormatError::Truncated {
                format: "ppm",
                what: "header",
            });
        }
        Ok(&self.bytes[start..self.pos])
    }

    fn number(&mut self, what: &'static str) -> Result<usize, FormatError> {
        let token = self.token()?;
        std::str::from_utf8(token)
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| malformed(format!("bad {what} in header")))
    }

    /// The header ends with exactly one whitespace byte before the payload.
    fn single_separator(&mut self) -> Result<(), FormatError> {
        match self.bytes.get(self.pos) {
            Some(b' ' | b'\t' | b'\r' | b'\n') => {
                self.pos += 1;
                Ok(())
            }
            Some(_) => Err(malformed("missing separator after maxval")),
            None => Err(FormatError::Truncated {
                format: "ppm",
                what: "pixel data",
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decodes_p6() {
        // 2x1: red-ish then gray pixel.
        let bytes = b"P6\n2 1\n255\n\x01\x02\x03\x0a\x0b\x0c";
        let t = decode_ppm(bytes).unwrap();
        assert_eq!(t.shape(), &[1, 2, 3]);
        assert_eq!(t.data(), &[1.0, 2.0, 3.0, 10.0, 11.0, 12.0]);
    }

    #[test]
    fn decodes_p5_replicating_gray() {
        let bytes = b"P5\n2 2\n255\n\x00\x40\x80\xff";
        let t = decode_ppm(bytes).unwrap();
        assert_eq!(t.shape(), &[2, 2, 3]);
        assert_eq!(t.at3(0, 1, 0), 64.0);
        assert_eq!(t.at3(0, 1, 1), 64.0);
        assert_eq!(t.at3(0, 1, 2), 64.0);
        assert_eq!(t.at3(1, 1, 0), 255.0);
    }

    #[test]
    fn header_comments_are_skipped() {
        let bytes = b"P6 # magic\n# a comment line\n2 # width\n1 255\n\x01\x02\x03\x0a\x0b\x0c";
        let t = decode_ppm(bytes).unwrap();
        assert_eq!(t.shape(), &[1, 2, 3]);
    }

    #[test]
    fn payload_may_start_with_whitespace_byte() {
        // First pixel byte 0x0a equals '\n'; only one separator is eaten.
        let bytes = b"P6 1 1 255\n\x0a\x0b\x0c";
        let t = decode_ppm(bytes).unwrap();
        assert_eq!(t.data(), &[10.0, 11.0, 12.0]);
    }

    #[test]
    fn rejects_wrong_magic() {
        assert!(matches!(
            decode_ppm(b"P3\n1 1\n255\n1 2 3"),
            Err(FormatError::BadMagic { format: "ppm" })
        ));
    }

    #[test]
    fn rejects_maxval_other_than_255() {
        match decode_ppm(b"P6\n1 1\n65535\n\x00\x00\x00\x00\x00\x00") {
            Err(FormatError::Unsupported { field: "maxval", value, .. }) => {
                assert_eq!(value, "65535")
            }
            other => panic!("expected maxval rejection, got {other:?}"),
        }
    }

    #[test]
    fn rejects_truncated_pixels() {
        assert!(matches!(
            decode_ppm(b"P6\n2 2\n255\n\x01\x02\x03"),
            Err(FormatError::Truncated { what: "pixel data", .. })
        ));
    }

    #[test]
    fn rejects_truncated_header_and_bad_numbers() {
        assert!(matches!(
            decode_ppm(b"P6\n2"),
            Err(FormatError::Truncated { .. })
        ));
        assert!(matches!(
            decode_ppm(b"P6\nx 1\n255\n"),
            Err(FormatError::Malformed { .. })
        ));
    }

    #[test]
    fn rejects_zero_dimensions() {
        assert!(matches!(
            decode_ppm(b"P6\n0 1\n255\n"),
            Err(FormatError::Malformed { .. })
        ));
    }
}
