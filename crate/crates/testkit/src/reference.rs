//! Naive reference implementations of the pipeline kernels, written
//! from the documented contracts with deliberately different structure
//! than the main crate: resize and resample run as full hat-weight
//! summations over every source element, layers carry f64 parameters.
//! Accumulating ops do their arithmetic in f64 and store f32; the
//! elementwise relu and tanh are pure f32, all per the documented
//! precision contract.

/// Shape-tagged f32 buffer, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct RefTensor {
    pub shape: Vec<usize>,
    pub data: Vec<f32>,
}

impl RefTensor {
    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }
}

fn hat(pos: f64, i: usize) -> f64 {
    (1.0 - (pos - i as f64).abs()).max(0.0)
}

/// Center-aligned bilinear resize of an (h, w, 3) raw image by direct
/// summation: every output pixel is the hat-weighted sum over all
/// source pixels. Operates on raw 0..=255 values and stays in f64; the
/// single f32 store happens after normalization, as documented.
pub fn bilinear_ref(pixels: &[f32], h: usize, w: usize, th: usize, tw: usize) -> Vec<f64> {
    assert_eq!(pixels.len(), h * w * 3);
    let mut out = Vec::with_capacity(th * tw * 3);
    for oy in 0..th {
        let sy = ((oy as f64 + 0.5) * h as f64 / th as f64 - 0.5).clamp(0.0, (h - 1) as f64);
        for ox in 0..tw {
            let sx = ((ox as f64 + 0.5) * w as f64 / tw as f64 - 0.5).clamp(0.0, (w - 1) as f64);
            for c in 0..3 {
                let mut acc = 0.0f64;
                let mut total = 0.0f64;
                for y in 0..h {
                    for x in 0..w {
                        let weight = hat(sy, y) * hat(sx, x);
                        acc += weight * pixels[(y * w + x) * 3 + c] as f64;
                        total += weight;
                    }
                }
                out.push(acc / total);
            }
        }
    }
    out
}

/// Resize then `(x / 255 - mean) / std`, the full visual preprocessing.
pub fn visual_ref(
    pixels: &[f32],
    h: usize,
    w: usize,
    th: usize,
    tw: usize,
    mean: [f32; 3],
    std: [f32; 3],
) -> RefTensor {
    let data = bilinear_ref(pixels, h, w, th, tw)
        .iter()
        .enumerate()
        .map(|(idx, v)| {
            let c = idx % 3;
            ((v / 255.0 - mean[c] as f64) / std[c] as f64) as f32
        })
        .collect();
    RefTensor {
        shape: vec![th, tw, 3],
        data,
    }
}

/// Linear resample by hat-weight summation over every source sample.
/// Output length round(n * dst / src); equal rates copy the input.
pub fn resample_ref(wave: &[f32], src: u32, dst: u32) -> Vec<f32> {
    if src == dst {
        return wave.to_vec();
    }
    let n = wave.len();
    assert!(n > 0, "reference requires a non-empty waveform");
    let m = (n as f64 * dst as f64 / src as f64).round() as usize;
    (0..m)
        .map(|j| {
            let pos = (j as f64 * src as f64 / dst as f64).min((n - 1) as f64);
            let mut acc = 0.0f64;
            for (i, v) in wave.iter().enumerate() {
                acc += hat(pos, i) * *v as f64;
            }
            acc as f32
        })
        .collect()
}

/// Text cleanup per the documented rules, in one scan over chars.
pub fn clean_text_ref(text: &str) -> String {
    let kept: Vec<char> = text
        .chars()
        .filter(|c| !(c.is_ascii_digit() || c.is_ascii_punctuation()))
        .map(|c| c.to_ascii_lowercase())
        .collect();
    kept.iter()
        .collect::<String>()
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
}

/// Independent layer chain with f64 parameters.
#[derive(Clone, Debug)]
pub enum RefLayer {
    Flatten,
    Linear { weights: Vec<Vec<f64>>, bias: Vec<f64> },
    Relu,
    Tanh,
    MeanPool,
    L2Normalize,
    Embedding { table: Vec<Vec<f64>> },
    FrameRms { frame: usize, hop: usize },
}

/// Chain input: a tensor or token ids for an embedding-first chain.
#[derive(Clone, Debug)]
pub enum RefInput {
    Tensor(RefTensor),
    Tokens(Vec<u32>),
}

/// Applies the whole chain, returning every layer's output in order.
pub fn forward_ref(layers: &[RefLayer], input: &RefInput) -> Vec<RefTensor> {
    let mut outputs = Vec::with_capacity(layers.len());
    let mut rest = layers;
    let mut current = match input {
        RefInput::Tokens(ids) => {
            let RefLayer::Embedding { table } = &layers[0] else {
                panic!("token input requires an embedding-first chain");
            };
            let d = table[0].len();
            let data = ids
                .iter()
                .flat_map(|&t| table[t as usize].iter().map(|v| *v as f32))
                .collect();
            rest = &layers[1..];
            let tensor = RefTensor {
                shape: vec![ids.len(), d],
                data,
            };
            outputs.push(tensor.clone());
            tensor
        }
        RefInput::Tensor(t) => t.clone(),
    };
    for layer in rest {
        current = apply_ref(layer, &current);
        outputs.push(current.clone());
    }
    outputs
}

fn apply_ref(layer: &RefLayer, input: &RefTensor) -> RefTensor {
    match layer {
        RefLayer::Flatten => RefTensor {
            shape: vec![input.len()],
            data: input.data.clone(),
        },
        RefLayer::Linear { weights, bias } => {
            assert_eq!(input.shape.len(), 1, "linear takes rank-1 input");
            assert_eq!(input.len(), weights[0].len(), "linear dim mismatch");
            let data = weights
                .iter()
                .zip(bias)
                .map(|(row, b)| {
                    let mut acc = 0.0f64;
                    for (w, x) in row.iter().zip(&input.data) {
                        acc += w * *x as f64;
                    }
                    (acc + b) as f32
                })
                .collect();
            RefTensor {
                shape: vec![weights.len()],
                data,
            }
        }
        RefLayer::Relu => RefTensor {
            shape: input.shape.clone(),
            data: input
                .data
                .iter()
                .map(|&v| if v > 0.0 { v } else { 0.0 })
                .collect(),
        },
        RefLayer::Tanh => RefTensor {
            shape: input.shape.clone(),
            data: input.data.iter().map(|&v| v.tanh()).collect(),
        },
        RefLayer::MeanPool => {
            assert_eq!(input.shape.len(), 2, "mean_pool takes rank-2 input");
            let (n, d) = (input.shape[0], input.shape[1]);
            assert!(n > 0, "mean_pool over zero rows");
            let data = (0..d)
                .map(|col| {
                    let mut acc = 0.0f64;
                    for row in 0..n {
                        acc += input.data[row * d + col] as f64;
                    }
                    (acc / n as f64) as f32
                })
                .collect();
            RefTensor {
                shape: vec![d],
                data,
            }
        }
        RefLayer::L2Normalize => {
            let mut sumsq = 0.0f64;
            for &v in &input.data {
                sumsq += (v as f64) * (v as f64);
            }
            let denom = (sumsq + 1e-12).sqrt();
            RefTensor {
                shape: input.shape.clone(),
                data: input.data.iter().map(|&v| (v as f64 / denom) as f32).collect(),
            }
        }
        RefLayer::Embedding { .. } => panic!("embedding only starts a chain"),
        RefLayer::FrameRms { frame, hop } => {
            assert_eq!(input.shape.len(), 1, "frame_rms takes rank-1 input");
            let n = input.len();
            let mut data = Vec::new();
            let mut off = 0;
            while off + frame <= n {
                let mut acc = 0.0f64;
                for &v in &input.data[off..off + frame] {
                    acc += (v as f64) * (v as f64);
                }
                data.push((acc / *frame as f64).sqrt() as f32);
                off += hop;
            }
            let shape = vec![data.len()];
            RefTensor { shape, data }
        }
    }
}
