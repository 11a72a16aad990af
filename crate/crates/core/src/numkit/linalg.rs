use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};

use super::Scalar;
use crate::error::{Error, Result};

/// Dense column vector. Serializes as a bare array.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Vector<T> {
    data: Vec<T>,
}

impl<T: Scalar> Vector<T> {
    pub fn new(data: Vec<T>) -> Self {
        Self { data }
    }

    pub fn zeros(len: usize) -> Self {
        Self {
            data: vec![T::zero(); len],
        }
    }

    pub fn filled(len: usize, value: T) -> Self {
        Self {
            data: vec![value; len],
        }
    }

    pub fn from_f64(values: &[f64]) -> Self {
        Self::new(values.iter().map(|&v| T::of(v)).collect())
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    pub fn iter(&self) -> std::slice::Iter<'_, T> {
        self.data.iter()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn dot(&self, other: &Self) -> Result<T> {
        if self.len() != other.len() {
            return Err(Error::dim(format!(
                "dot of vectors with lengths {} and {}",
                self.len(),
                other.len()
            )));
        }
        let mut acc = T::zero();
        for (a, b) in self.data.iter().zip(&other.data) {
            acc += *a * *b;
        }
        Ok(acc)
    }

    /// Concatenates vectors end to end.
    pub fn concat(parts: &[&Vector<T>]) -> Self {
        let mut data = Vec::with_capacity(parts.iter().map(|p| p.len()).sum());
        for p in parts {
            data.extend_from_slice(&p.data);
        }
        Self { data }
    }

    pub fn hadamard(&self, other: &Self) -> Self {
        debug_assert_eq!(self.len(), other.len());
        Self::new(
            self.data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| *a * *b)
                .collect(),
        )
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self::new(self.data.iter().map(|&v| f(v)).collect())
    }
}

impl<T> Index<usize> for Vector<T> {
    type Output = T;

    fn index(&self, i: usize) -> &T {
        &self.data[i]
    }
}

impl<T> IndexMut<usize> for Vector<T> {
    fn index_mut(&mut self, i: usize) -> &mut T {
        &mut self.data[i]
    }
}

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::dim(format!(
                "{} values cannot fill a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[&[T]]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::dim("ragged rows"));
        }
        let data = rows.iter().flat_map(|r| r.iter().copied()).collect();
        Ok(Self {
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Row-major flattening.
    pub fn flatten(&self) -> Vector<T> {
        Vector::new(self.data.clone())
    }

    pub fn into_flat(self) -> Vector<T> {
        Vector::new(self.data)
    }

    /// `self += scale * (u ⊗ v)`.
    pub(crate) fn add_outer_scaled(&mut self, u: &[T], v: &[T], scale: T) {
        debug_assert_eq!((self.rows, self.cols), (u.len(), v.len()));
        for (row, &ui) in self.data.chunks_exact_mut(self.cols).zip(u) {
            let s = ui * scale;
            if s == T::zero() {
                continue;
            }
            for (r, &vj) in row.iter_mut().zip(v) {
                *r += s * vj;
            }
        }
    }

    /// `Aᵀ·g`, accumulated row by row.
    pub(crate) fn transpose_mul(&self, g: &[T]) -> Vector<T> {
        debug_assert_eq!(self.rows, g.len());
        let mut out = vec![T::zero(); self.cols];
        for (row, &gi) in self.data.chunks_exact(self.cols).zip(g) {
            if gi == T::zero() {
                continue;
            }
            for (o, &a) in out.iter_mut().zip(row) {
                *o += a * gi;
            }
        }
        Vector::new(out)
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;

    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

/// Matrix-vector product `A·x`.
///
/// Every output entry is summed left to right over `j`; four rows are
/// processed together so the independent sums can overlap in the pipeline.
pub fn matmul<T: Scalar>(a: &Matrix<T>, x: &Vector<T>) -> Result<Vector<T>> {
    if a.cols != x.len() {
        return Err(Error::dim(format!(
            "cannot multiply {}x{} matrix by vector of length {}",
            a.rows,
            a.cols,
            x.len()
        )));
    }
    Ok(Vector::new(matvec_unchecked(a, x.as_slice())))
}

pub(crate) fn matvec_unchecked<T: Scalar>(a: &Matrix<T>, x: &[T]) -> Vec<T> {
    let cols = a.cols;
    if cols == 0 {
        return vec![T::zero(); a.rows];
    }
    // Eight rows per pass share each load of x; every row still sums left to right.
    const R: usize = 8;
    let mut out = Vec::with_capacity(a.rows);
    let mut blocks = a.data.chunks_exact(R * cols);
    for block in &mut blocks {
        let rows: [&[T]; R] = std::array::from_fn(|r| &block[r * cols..(r + 1) * cols]);
        let mut s = [T::zero(); R];
        for (j, &xj) in x.iter().enumerate().take(cols) {
            for r in 0..R {
                s[r] += rows[r][j] * xj;
            }
        }
        out.extend_from_slice(&s);
    }
    for row in blocks.remainder().chunks_exact(cols) {
        let mut s = T::zero();
        for (&w, &xj) in row.iter().zip(x) {
            s += w * xj;
        }
        out.push(s);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive(a: &Matrix<f64>, x: &Vector<f64>) -> Vec<f64> {
        (0..a.rows())
            .map(|i| {
                let mut s = 0.0;
                for j in 0..a.cols() {
                    s += a[(i, j)] * x[j];
                }
                s
            })
            .collect()
    }

    #[test]
    fn matmul_identity() {
        let a = Matrix::<f64>::identity(2);
        let y = matmul(&a, &Vector::new(vec![1.0, 2.0])).unwrap();
        assert_eq!(y.as_slice(), &[1.0, 2.0]);
    }

    #[test]
    fn matmul_hand_product() {
        let a = Matrix::from_rows(&[&[1.0, 2.0], &[3.0, 4.0]]).unwrap();
        let y = matmul(&a, &Vector::new(vec![1.0, 1.0])).unwrap();
        assert_eq!(y.as_slice(), &[3.0, 7.0]);
    }

    #[test]
    fn matmul_zero_row() {
        let a = Matrix::<f64>::zeros(1, 3);
        let y = matmul(&a, &Vector::new(vec![5.0, 6.0, 7.0])).unwrap();
        assert_eq!(y.as_slice(), &[0.0]);
    }

    #[test]
    fn matmul_reports_both_shapes() {
        let a = Matrix::<f64>::zeros(2, 3);
        let err = matmul(&a, &Vector::zeros(2)).unwrap_err().to_string();
        assert!(err.contains("2x3") && err.contains("length 2"), "{err}");
    }

    #[test]
    fn matmul_matches_naive_loop_exactly() {
        let mut rng = crate::numkit::Rng::new(3);
        for rows in [1, 3, 4, 5, 9, 17] {
            for cols in [1, 2, 7, 33] {
                let a = Matrix::from_fn(rows, cols, |_, _| rng.normal());
                let x = Vector::new((0..cols).map(|_| rng.normal()).collect());
                assert_eq!(matmul(&a, &x).unwrap().into_vec(), naive(&a, &x));
            }
        }
    }

    #[test]
    fn from_vec_rejects_wrong_length() {
        assert!(Matrix::<f64>::from_vec(2, 2, vec![1.0; 3]).is_err());
    }
}
