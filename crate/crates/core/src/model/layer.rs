//! Layer kernels with fixed arithmetic: accumulating ops widen f32
//! inputs to f64, accumulate in f64, and store f32; relu and tanh are
//! pure f32. Same math always yields the same bits.

use crate::error::ModelError;
use crate::tensor::Tensor;

/// Global epsilon inside the l2 norm square root.
pub const L2_EPS: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub enum LayerOp {
    Flatten,
    /// `weights` is row-major (out_dim x in_dim); bias has out_dim.
    Linear { weights: Vec<Vec<f32>>, bias: Vec<f32> },
    Relu,
    Tanh,
    MeanPool,
    L2Normalize,
    /// Token lookup table (rows x dim); always the first textual layer.
    Embedding { table: Vec<Vec<f32>> },
    /// Root mean square over windows of `frame` samples every `hop`.
    FrameRms { frame: usize, hop: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Layer {
    pub name: String,
    pub op: LayerOp,
}

impl Layer {
    /// Applies a tensor-to-tensor kernel. Embedding layers take token
    /// ids, not tensors; route those through [`Layer::gather`].
    pub fn apply(&self, input: &Tensor) -> Result<Tensor, ModelError> {
        let bad = |message: String| ModelError::BadChain {
            layer: self.name.clone(),
            message,
        };
        match &self.op {
            LayerOp::Flatten => Ok(Tensor::from_vec(input.data().to_vec())),
            LayerOp::Linear { weights, bias } => {
                if input.rank() != 1 {
                    return Err(bad(format!(
                        "linear requires a rank-1 input, got rank {}",
                        input.rank()
                    )));
                }
                let in_dim = weights[0].len();
                if input.len() != in_dim {
                    return Err(ModelError::DimMismatch {
                        layer: self.name.clone(),
                        expected: in_dim,
                        got: input.len(),
                    });
                }
                let x = input.data();
                let mut out = Vec::with_capacity(weights.len());
                for (row, b) in weights.iter().zip(bias) {
                    let mut acc = 0.0f64;
                    for (w, v) in row.iter().zip(x) {
                        acc += *w as f64 * *v as f64;
                    }
                    out.push((acc + *b as f64) as f32);
                }
                Ok(Tensor::from_vec(out))
            }
            LayerOp::Relu => Ok(Tensor::new(
                input.shape().to_vec(),
                input.data().iter().map(|v| v.max(0.0)).collect(),
            )),
            LayerOp::Tanh => Ok(Tensor::new(
                input.shape().to_vec(),
                input.data().iter().map(|v| v.tanh()).collect(),
            )),
            LayerOp::MeanPool => {
                if input.rank() != 2 {
                    return Err(bad(format!(
                        "mean_pool requires a rank-2 input, got rank {}",
                        input.rank()
                    )));
                }
                let (n, d) = (input.shape()[0], input.shape()[1]);
                if n == 0 {
                    return Err(bad("mean_pool over an empty sequence".into()));
                }
                let mut out = Vec::with_capacity(d);
                for j in 0..d {
                    let mut acc = 0.0f64;
                    for i in 0..n {
                        acc += input.at2(i, j) as f64;
                    }
                    out.push((acc / n as f64) as f32);
                }
                Ok(Tensor::from_vec(out))
            }
            LayerOp::L2Normalize => {
                let mut acc = 0.0f64;
                for v in input.data() {
                    acc += *v as f64 * *v as f64;
                }
                let norm = (acc + L2_EPS).sqrt();
                Ok(Tensor::new(
                    input.shape().to_vec(),
                    input.data().iter().map(|v| (*v as f64 / norm) as f32).collect(),
                ))
            }
            LayerOp::Embedding { .. } => Err(bad(
                "embedding must be the first layer of a textual chain".into(),
            )),
            LayerOp::FrameRms { frame, hop } => {
                if input.rank() != 1 {
                    return Err(bad(format!(
                        "frame_rms requires a rank-1 input, got rank {}",
                        input.rank()
                    )));
                }
                let data = input.data();
                let mut out = Vec::new();
                let mut offset = 0usize;
                // Trailing partial frames are dropped.
                while offset + frame <= data.len() {
                    let mut acc = 0.0f64;
                    for &v in &data[offset..offset + frame] {
                        acc += v as f64 * v as f64;
                    }
                    out.push((acc / *frame as f64).sqrt() as f32);
                    offset += hop;
                }
                Ok(Tensor::from_vec(out))
            }
        }
    }

    /// Embedding lookup: token ids to a (len, dim) tensor.
    pub fn gather(&self, tokens: &[u32]) -> Result<Tensor, ModelError> {
        let LayerOp::Embedding { table } = &self.op else {
            return Err(ModelError::BadChain {
                layer: self.name.clone(),
                message: "token input requires an embedding layer".into(),
            });
        };
        let dim = table[0].len();
        let mut data = Vec::with_capacity(tokens.len() * dim);
        for &tok in tokens {
            // Registry validation guarantees coverage of every vocab id.
            let row = table.get(tok as usize).ok_or_else(|| ModelError::BadChain {
                layer: self.name.clone(),
                message: format!("token id {tok} outside embedding table"),
            })?;
            data.extend_from_slice(row);
        }
        Ok(Tensor::new(vec![tokens.len(), dim], data))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn layer(name: &str, op: LayerOp) -> Layer {
        Layer {
            name: name.into(),
            op,
        }
    }

    #[test]
    fn flatten_reshapes_row_major() {
        let input = Tensor::new(vec![2, 1, 3], vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let out = layer("f", LayerOp::Flatten).apply(&input).unwrap();
        assert_eq!(out.shape(), &[6]);
        assert_eq!(out.data(), input.data());
    }

    #[test]
    fn linear_matches_hand_computation() {
        let op = LayerOp::Linear {
            weights: vec![vec![1.0, 0.0], vec![0.5, -0.5], vec![2.0, 1.0]],
            bias: vec![0.0, 1.0, -1.0],
        };
        let out = layer("fc", op).apply(&Tensor::from_vec(vec![4.0, 2.0])).unwrap();
        assert_eq!(out.data(), &[4.0, 2.0, 9.0]);
    }

    #[test]
    fn linear_rejects_wrong_length_with_both_dims() {
        let op = LayerOp::Linear {
            weights: vec![vec![1.0; 12]],
            bias: vec![0.0],
        };
        match layer("fc1", op).apply(&Tensor::from_vec(vec![0.0; 27])) {
            Err(ModelError::DimMismatch { layer, expected, got }) => {
                assert_eq!(layer, "fc1");
                assert_eq!(expected, 12);
                assert_eq!(got, 27);
            }
            other => panic!("expected dim mismatch, got {other:?}"),
        }
    }

    #[test]
    fn relu_clamps_negatives_only() {
        let out = layer("r", LayerOp::Relu)
            .apply(&Tensor::from_vec(vec![-1.5, 0.0, 2.5]))
            .unwrap();
        assert_eq!(out.data(), &[0.0, 0.0, 2.5]);
    }

    #[test]
    fn tanh_is_plain_f32_tanh() {
        let out = layer("t", LayerOp::Tanh)
            .apply(&Tensor::from_vec(vec![0.0, 1.0, -20.0]))
            .unwrap();
        assert_eq!(out.data(), &[0.0, 1.0f32.tanh(), -1.0]);
    }

    #[test]
    fn mean_pool_averages_columns() {
        let input = Tensor::new(vec![2, 3], vec![1.0, 2.0, 3.0, 3.0, 6.0, 9.0]);
        let out = layer("p", LayerOp::MeanPool).apply(&input).unwrap();
        assert_eq!(out.shape(), &[3]);
        assert_eq!(out.data(), &[2.0, 4.0, 6.0]);
    }

    #[test]
    fn mean_pool_single_row_is_identity() {
        let input = Tensor::new(vec![1, 4], vec![0.5, -1.0, 2.0, 0.0]);
        let out = layer("p", LayerOp::MeanPool).apply(&input).unwrap();
        assert_eq!(out.data(), &[0.5, -1.0, 2.0, 0.0]);
    }

    #[test]
    fn l2_normalize_produces_unit_vectors() {
        let out = layer("n", LayerOp::L2Normalize)
            .apply(&Tensor::from_vec(vec![3.0, 4.0]))
            .unwrap();
        assert!((out.data()[0] - 0.6).abs() < 1e-6);
        assert!((out.data()[1] - 0.8).abs() < 1e-6);
        let norm: f64 = out.data().iter().map(|v| (*v as f64).powi(2)).sum();
        assert!((norm.sqrt() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn l2_normalize_near_zero_stays_finite() {
        let out = layer("n", LayerOp::L2Normalize)
            .apply(&Tensor::from_vec(vec![0.0, 0.0]))
            .unwrap();
        assert_eq!(out.data(), &[0.0, 0.0]);
    }

    #[test]
    fn l2_normalize_keeps_rank2_shape() {
        let input = Tensor::new(vec![2, 2], vec![1.0, 0.0, 0.0, 1.0]);
        let out = layer("n", LayerOp::L2Normalize).apply(&input).unwrap();
        assert_eq!(out.shape(), &[2, 2]);
        // Global norm: sqrt(2).
        assert!((out.at2(0, 0) as f64 - 1.0 / 2f64.sqrt()).abs() < 1e-6);
    }

    #[test]
    fn embedding_gathers_rows() {
        let op = LayerOp::Embedding {
            table: vec![vec![0.0, 0.1], vec![1.0, 1.1], vec![2.0, 2.1]],
        };
        let out = layer("e", op).gather(&[2, 0, 2]).unwrap();
        assert_eq!(out.shape(), &[3, 2]);
        assert_eq!(out.data(), &[2.0, 2.1, 0.0, 0.1, 2.0, 2.1]);
    }

    #[test]
    fn frame_rms_windows_and_drops_partial() {
        let op = LayerOp::FrameRms { frame: 2, hop: 2 };
        let out = layer("fr", op)
            .apply(&Tensor::from_vec(vec![3.0, 4.0, 0.0, 0.0, 5.0]))
            .unwrap();
        // Windows [3,4] and [0,0]; the trailing [5] is dropped.
        let want0 = ((9.0f64 + 16.0) / 2.0).sqrt();
        assert_eq!(out.len(), 2);
        assert!((out.data()[0] as f64 - want0).abs() < 1e-6);
        assert_eq!(out.data()[1], 0.0);
    }

    #[test]
    fn frame_rms_overlapping_hop() {
        let op = LayerOp::FrameRms { frame: 2, hop: 1 };
        let out = layer("fr", op)
            .apply(&Tensor::from_vec(vec![1.0, 1.0, 7.0]))
            .unwrap();
        assert_eq!(out.len(), 2);
        assert_eq!(out.data()[0], 1.0);
    }

    #[test]
    fn frame_rms_short_input_gives_empty_output() {
        let op = LayerOp::FrameRms { frame: 16, hop: 16 };
        let out = layer("fr", op).apply(&Tensor::from_vec(vec![1.0; 5])).unwrap();
        assert_eq!(out.shape(), &[0]);
    }

    #[test]
    fn kernels_reject_wrong_ranks() {
        let rank2 = Tensor::new(vec![1, 2], vec![1.0, 2.0]);
        assert!(matches!(
            layer("fc", LayerOp::Linear { weights: vec![vec![1.0, 1.0]], bias: vec![0.0] })
                .apply(&rank2),
            Err(ModelError::BadChain { .. })
        ));
        assert!(matches!(
            layer("p", LayerOp::MeanPool).apply(&Tensor::from_vec(vec![1.0])),
            Err(ModelError::BadChain { .. })
        ));
        assert!(matches!(
            layer("fr", LayerOp::FrameRms { frame: 1, hop: 1 }).apply(&rank2),
            Err(ModelError::BadChain { .. })
        ));
        assert!(matches!(
            layer("e", LayerOp::Embedding { table: vec![vec![0.0]] }).apply(&rank2),
            Err(ModelError::BadChain { .. })
        ));
    }
}
