//! Model variants: embedding networks, fusion, detection head, analytic
//! gradients and checkpoints.

mod check;
mod checkpoint;
mod forward;
mod fusion;
mod params;
mod variant;

pub use check::{gradcheck_variant, GRADCHECK_RECORDS};
pub use checkpoint::{decode_params, encode_params, load_params, save_params, CHECKPOINT_VERSION};
pub use forward::{
    accumulate_backward, embed_forward, model_backward, model_forward, predict, replay, EmbedTrace,
    ForwardTrace, HeadTrace,
};
pub use fusion::{fusion_backward, tensor_fuse, FusionTensor};
pub use params::{
    init_params, Dense, EmbedNet, Gradients, Head, HeadNet, ModelParams, DEFAULT_DROPOUT,
};
pub use variant::{Dims, ModelVariant};
