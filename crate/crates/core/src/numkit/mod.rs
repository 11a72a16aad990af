//! Deterministic dense numerics: vectors, matrices, layer primitives,
//! a seeded generator and a finite-difference gradient checker.

mod gradcheck;
mod layers;
mod linalg;
mod rng;
mod scalar;

pub use gradcheck::{grad_check, DEFAULT_STEP};
pub use layers::{
    bce_grad_logit, bce_loss, dense_backward, dense_forward, dropout, outer, relu, sigmoid, BCE_EPS,
};
pub(crate) use linalg::matvec_unchecked;
pub use linalg::{matmul, Matrix, Vector};
pub use rng::{splitmix64, Rng};
pub use scalar::Scalar;
