use super::TrainConfig;
use crate::error::{Error, Result};
use crate::model::{Gradients, ModelParams};
use crate::numkit::Scalar;

/// First and second moment buffers, laid out like the parameters.
#[derive(Debug, Clone)]
pub struct AdamWState<T> {
    pub t: u64,
    pub m: Gradients<T>,
    pub v: Gradients<T>,
}

impl<T: Scalar> AdamWState<T> {
    pub fn new(params: &ModelParams<T>) -> Self {
        Self {
            t: 0,
            m: params.zeros_like(),
            v: params.zeros_like(),
        }
    }
}

/// One AdamW update with decoupled weight decay on weight matrices only.
///
/// Non-finite gradients abort the step before any state changes.
pub fn adamw_step<T: Scalar>(
    params: &mut ModelParams<T>,
    grads: &Gradients<T>,
    state: &mut AdamWState<T>,
    lr: f64,
    cfg: &TrainConfig,
) -> Result<()> {
    if grads.variant != params.variant || state.m.variant != params.variant {
        return Err(Error::Configuration(
            "optimizer buffers belong to another variant".into(),
        ));
    }
    let g_layers = grads.layers();
    if g_layers
        .iter()
        .zip(params.layers())
        .any(|(g, p)| g.w.shape() != p.w.shape() || g.b.len() != p.b.len())
        || g_layers.len() != params.layers().len()
    {
        return Err(Error::dim("gradient shapes differ from parameter shapes"));
    }
    if !grads.is_finite() {
        return Err(Error::Numeric(
            "non-finite gradient entry; step skipped".into(),
        ));
    }

    state.t += 1;
    let t = state.t as i32;
    let b1 = T::of(cfg.beta1);
    let b2 = T::of(cfg.beta2);
    let one = T::one();
    let c1 = one / (one - T::of(cfg.beta1.powi(t)));
    let c2 = one / (one - T::of(cfg.beta2.powi(t)));
    let lr = T::of(lr);
    let eps = T::of(cfg.eps);
    let decay = lr * T::of(cfg.weight_decay);

    let update = |theta: &mut [T], g: &[T], m: &mut [T], v: &mut [T], decay: T| {
        for i in 0..theta.len() {
            m[i] = b1 * m[i] + (one - b1) * g[i];
            v[i] = b2 * v[i] + (one - b2) * g[i] * g[i];
            let m_hat = m[i] * c1;
            let v_hat = v[i] * c2;
            theta[i] = theta[i] - lr * (m_hat / (v_hat.sqrt() + eps)) - decay * theta[i];
        }
    };
    let mut m_layers = state.m.layers_mut();
    let mut v_layers = state.v.layers_mut();
    for (k, p) in params.layers_mut().into_iter().enumerate() {
        let g = g_layers[k];
        update(
            p.w.as_mut_slice(),
            g.w.as_slice(),
            m_layers[k].w.as_mut_slice(),
            v_layers[k].w.as_mut_slice(),
            decay,
        );
        update(
            p.b.as_mut_slice(),
            g.b.as_slice(),
            m_layers[k].b.as_mut_slice(),
            v_layers[k].b.as_mut_slice(),
            T::zero(),
        );
    }
    Ok(())
}
