//! Sample preprocessing: bilinear resize + normalization for images,
//! linear resampling for waveforms, cleanup + tokenization for text.

use std::collections::HashMap;

use crate::error::DataError;
use crate::tensor::Tensor;

/// Visual preprocessing parameters, resolved per model.
#[derive(Clone, Debug, PartialEq)]
pub struct VisualParams {
    /// Target (height, width), both >= 1.
    pub target: (usize, usize),
    pub mean: [f32; 3],
    pub std: [f32; 3],
}

/// Center-aligned bilinear resize on raw 0..=255 values, then
/// per-channel `(x / 255 - mean) / std` normalization. All blending and
/// normalization arithmetic runs in f64; results store as f32.
pub fn preprocess_visual(img: &Tensor, params: &VisualParams) -> Tensor {
    assert_eq!(img.rank(), 3, "visual input must be rank 3");
    assert_eq!(img.shape()[2], 3, "visual input must have 3 channels");
    let (th, tw) = params.target;
    assert!(th >= 1 && tw >= 1, "target dims must be >= 1");
    for c in 0..3 {
        assert!(params.std[c] != 0.0, "std must be nonzero");
    }

    let (h, w) = (img.shape()[0], img.shape()[1]);
    let mut out = Vec::with_capacity(th * tw * 3);
    for i in 0..th {
        // Source position of the output pixel center, clamped to the grid.
        let sy = ((i as f64 + 0.5) * h as f64 / th as f64 - 0.5).clamp(0.0, (h - 1) as f64);
        let y0 = sy.floor() as usize;
        let fy = sy - y0 as f64;
        let y1 = (y0 + 1).min(h - 1);
        for j in 0..tw {
            let sx = ((j as f64 + 0.5) * w as f64 / tw as f64 - 0.5).clamp(0.0, (w - 1) as f64);
            let x0 = sx.floor() as usize;
            let fx = sx - x0 as f64;
            let x1 = (x0 + 1).min(w - 1);
            for c in 0..3 {
                let v00 = img.at3(y0, x0, c) as f64;
                let v01 = img.at3(y0, x1, c) as f64;
                let v10 = img.at3(y1, x0, c) as f64;
                let v11 = img.at3(y1, x1, c) as f64;
                let blend = (1.0 - fy) * ((1.0 - fx) * v00 + fx * v01)
                    + fy * ((1.0 - fx) * v10 + fx * v11);
                let norm = (blend / 255.0 - params.mean[c] as f64) / params.std[c] as f64;
                out.push(norm as f32);
            }
        }
    }
    Tensor::new(vec![th, tw, 3], out)
}

/// Linear resample from `src_rate` to `target_rate`. Output length is
/// `round(n * target / src)`; sample j reads source position
/// `j * src / target`, clamped to the last sample. Equal rates return
/// the waveform bit-identically.
pub fn preprocess_audio(
    wave: &Tensor,
    src_rate: u32,
    target_rate: u32,
) -> Result<Tensor, DataError> {
    assert_eq!(wave.rank(), 1, "waveform must be rank 1");
    assert!(src_rate >= 1 && target_rate >= 1, "rates must be >= 1");
    let n = wave.len();
    if n == 0 {
        return Err(DataError::EmptyWaveform);
    }
    if src_rate == target_rate {
        return Ok(wave.clone());
    }
    let m = (n as f64 * target_rate as f64 / src_rate as f64).round() as usize;
    let step = src_rate as f64 / target_rate as f64;
    let data = wave.data();
    let mut out = Vec::with_capacity(m);
    for j in 0..m {
        let pos = (j as f64 * step).min((n - 1) as f64);
        let i0 = pos.floor() as usize;
        let frac = pos - i0 as f64;
        let i1 = (i0 + 1).min(n - 1);
        let v = data[i0] as f64 * (1.0 - frac) + data[i1] as f64 * frac;
        out.push(v as f32);
    }
    Ok(Tensor::from_vec(out))
}

/// Lowercases ascii letters, deletes ascii digits and punctuation,
/// collapses whitespace runs to single spaces, and trims. Idempotent.
pub fn clean_text(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut pending_space = false;
    for ch in text.chars() {
        if ch.is_ascii_digit() || ch.is_ascii_punctuation() {
            continue;
        }
        if ch.is_whitespace() {
            pending_space = !out.is_empty();
            continue;
        }
        if pending_space {
            out.push(' ');
            pending_space = false;
        }
        out.push(ch.to_ascii_lowercase());
    }
    out
}

/// Whitespace-splits and maps each token through `vocab`; unknown tokens
/// map to 0 (the `<unk>` id). Empty input yields `[0]`, never an empty
/// sequence.
pub fn tokenize(text: &str, vocab: &HashMap<String, u32>) -> Vec<u32> {
    let ids: Vec<u32> = text
        .split_whitespace()
        .map(|tok| vocab.get(tok).copied().unwrap_or(0))
        .collect();
    if ids.is_empty() {
        vec![0]
    } else {
        ids
    }
}
