//! Dataset input and output: media decoding, table parsing, sample
//! preprocessing, and the NPY output cascade.

mod index;
mod output;
mod png;
mod ppm;
mod preprocess;
mod wav;

pub use index::{
    load_text_table, scan_media_folder, InteractionRow, ItemRow, MediaEntry, TextTable,
};
pub use output::{create_output_path, write_feature, SampleKey};
pub use png::decode_png;
pub use ppm::decode_ppm;
pub use preprocess::{clean_text, preprocess_audio, preprocess_visual, tokenize, VisualParams};
pub use wav::decode_wav;

use crate::tensor::Tensor;

/// Model-ready payload for one sample.
#[derive(Clone, Debug, PartialEq)]
pub enum SamplePayload {
    /// Preprocessed (H, W, 3) image.
    Visual(Tensor),
    /// Resampled rank-1 waveform.
    Audio(Tensor),
    /// Token ids, never empty.
    Tokens(Vec<u32>),
}

/// A keyed, model-ready sample.
#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    pub key: SampleKey,
    pub payload: SamplePayload,
}
