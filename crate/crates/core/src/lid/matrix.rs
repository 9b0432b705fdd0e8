//! Dense row-major matrix, generic over the float type so the training math
//! can be checked in f64 while models store f32.

use num_traits::Float;

#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Float> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Self {
        assert_eq!(data.len(), rows * cols, "data length must be rows*cols");
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [T] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn dot_row(&self, i: usize, v: &[T]) -> T {
        debug_assert_eq!(v.len(), self.cols);
        self.row(i).iter().zip(v).fold(T::zero(), |acc, (&a, &b)| acc + a * b)
    }

    /// `row[i] += alpha * v`
    pub fn add_to_row(&mut self, i: usize, v: &[T], alpha: T) {
        for (slot, &x) in self.row_mut(i).iter_mut().zip(v) {
            *slot = *slot + alpha * x;
        }
    }

    pub fn map<U: Float>(&self, f: impl Fn(T) -> U) -> Matrix<U> {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&x| f(x)).collect() }
    }
}
