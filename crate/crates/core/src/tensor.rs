//! Dense row-major f32 tensor, rank 1 to 3.

/// Row-major (C order) f32 tensor. Shape and data length always agree;
/// a mismatch at construction is a programming error and aborts.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor {
    shape: Vec<usize>,
    data: Vec<f32>,
}

impl Tensor {
    /// Panics if rank is outside 1..=3 or the element count does not
    /// match the shape product.
    pub fn new(shape: Vec<usize>, data: Vec<f32>) -> Self {
        assert!(
            (1..=3).contains(&shape.len()),
            "tensor rank must be 1..=3, got {}",
            shape.len()
        );
        let expect: usize = shape.iter().product();
        assert_eq!(
            expect,
            data.len(),
            "shape {:?} expects {} elements, got {}",
            shape,
            expect,
            data.len()
        );
        Self { shape, data }
    }

    /// Rank-1 convenience constructor.
    pub fn from_vec(data: Vec<f32>) -> Self {
        Self::new(vec![data.len()], data)
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn rank(&self) -> usize {
        self.shape.len()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Elements in row-major order.
    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f32> {
        self.data
    }

    /// Element of a rank-2 tensor.
    pub fn at2(&self, i: usize, j: usize) -> f32 {
        debug_assert_eq!(self.rank(), 2);
        self.data[i * self.shape[1] + j]
    }

    /// Element of a rank-3 tensor.
    pub fn at3(&self, i: usize, j: usize, k: usize) -> f32 {
        debug_assert_eq!(self.rank(), 3);
        self.data[(i * self.shape[1] + j) * self.shape[2] + k]
    }
}
