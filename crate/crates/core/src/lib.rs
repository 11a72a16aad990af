//! Tensor fusion network for bimodal (video feature × audio feature)
//! binary classification, trained from scratch with analytic gradients.
//!
//! The numeric core is generic over [`numkit::Scalar`] (`f32` or `f64`);
//! the aliases below fix it to `f64`, which training and evaluation use.

mod codec;
pub mod data;
pub mod error;
pub mod eval;
pub mod model;
pub mod numkit;
pub mod train;

pub use error::{Error, Result};

pub type Real = f64;
pub type Matrix = numkit::Matrix<Real>;
pub type Vector = numkit::Vector<Real>;
pub type Params = model::ModelParams<Real>;
pub type Trace = model::ForwardTrace<Real>;
