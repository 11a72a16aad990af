//! Forward and backward primitives for the fixed fully connected stacks.

use super::linalg::matvec_unchecked;
use super::{Matrix, Rng, Scalar, Vector};
use crate::error::{Error, Result};

/// Clamp applied to probabilities before taking logarithms in [`bce_loss`].
pub const BCE_EPS: f64 = 1e-7;

/// `W·x + b`.
pub fn dense_forward<T: Scalar>(w: &Matrix<T>, b: &Vector<T>, x: &Vector<T>) -> Result<Vector<T>> {
    check_dense(w, b.len(), x.len())?;
    let mut y = matvec_unchecked(w, x.as_slice());
    for (yi, &bi) in y.iter_mut().zip(b.iter()) {
        *yi += bi;
    }
    Ok(Vector::new(y))
}

/// Gradients of `grad_out · (W·x + b)` with respect to `W`, `b` and `x`.
pub fn dense_backward<T: Scalar>(
    w: &Matrix<T>,
    x: &Vector<T>,
    grad_out: &Vector<T>,
) -> Result<(Matrix<T>, Vector<T>, Vector<T>)> {
    check_dense(w, grad_out.len(), x.len())?;
    let mut grad_w = Matrix::zeros(w.rows(), w.cols());
    grad_w.add_outer_scaled(grad_out.as_slice(), x.as_slice(), T::one());
    let grad_x = w.transpose_mul(grad_out.as_slice());
    Ok((grad_w, grad_out.clone(), grad_x))
}

fn check_dense<T: Scalar>(w: &Matrix<T>, out_len: usize, in_len: usize) -> Result<()> {
    if w.cols() != in_len || w.rows() != out_len {
        return Err(Error::dim(format!(
            "dense layer with {}x{} weights got input of length {in_len} and bias/gradient of length {out_len}",
            w.rows(),
            w.cols()
        )));
    }
    Ok(())
}

/// Rectifier. The mask is 1 where `x > 0` and 0 elsewhere, including at 0.
pub fn relu<T: Scalar>(x: &Vector<T>) -> (Vector<T>, Vector<T>) {
    let mut y = Vec::with_capacity(x.len());
    let mut mask = Vec::with_capacity(x.len());
    for &v in x.iter() {
        if v > T::zero() {
            y.push(v);
            mask.push(T::one());
        } else {
            y.push(T::zero());
            mask.push(T::zero());
        }
    }
    (Vector::new(y), Vector::new(mask))
}

/// Logistic function in the branch form that never exponentiates a
/// positive argument.
///
/// The result is kept inside the open interval `(0, 1)`: saturated values
/// land on the nearest representable neighbours of 0 and 1.
pub fn sigmoid<T: Scalar>(s: T) -> T {
    let p = if s >= T::zero() {
        T::one() / (T::one() + (-s).exp())
    } else {
        let e = s.exp();
        e / (T::one() + e)
    };
    let below_one = T::one() - T::epsilon() / (T::one() + T::one());
    p.max(T::min_positive_value()).min(below_one)
}

/// Inverted dropout. The returned mask holds the per-entry multiplier:
/// `0` for dropped entries, `1/(1-p)` for survivors, and `1` everywhere
/// outside training.
pub fn dropout<T: Scalar>(
    x: &Vector<T>,
    p: f64,
    train_mode: bool,
    rng: &mut Rng,
) -> Result<(Vector<T>, Vector<T>)> {
    if !(0.0..1.0).contains(&p) {
        return Err(Error::Parameter(format!(
            "dropout probability must lie in [0, 1), got {p}"
        )));
    }
    if !train_mode || p == 0.0 {
        return Ok((x.clone(), Vector::filled(x.len(), T::one())));
    }
    let keep = T::of(1.0 / (1.0 - p));
    let mask: Vec<T> = (0..x.len())
        .map(|_| if rng.bernoulli(p) { T::zero() } else { keep })
        .collect();
    let mask = Vector::new(mask);
    Ok((x.hadamard(&mask), mask))
}

/// `u ⊗ v`, shape `u.len() × v.len()`.
pub fn outer<T: Scalar>(u: &Vector<T>, v: &Vector<T>) -> Matrix<T> {
    let mut data = Vec::with_capacity(u.len() * v.len());
    for &ui in u.iter() {
        data.extend(v.iter().map(|&vj| ui * vj));
    }
    Matrix::from_vec(u.len(), v.len(), data).expect("outer product shape")
}

/// Binary cross-entropy of a probability against a 0/1 label, with the
/// probability clamped to `[BCE_EPS, 1 - BCE_EPS]`.
pub fn bce_loss<T: Scalar>(p: T, y: T) -> T {
    let eps = T::of(BCE_EPS);
    let p = p.max(eps).min(T::one() - eps);
    -(y * p.ln() + (T::one() - y) * (T::one() - p).ln())
}

/// Derivative of [`bce_loss`] through a sigmoid, with respect to the logit.
pub fn bce_grad_logit<T: Scalar>(p: T, y: T) -> T {
    p - y
}
