use serde::{Deserialize, Serialize};

use super::{Dims, ModelVariant};
use crate::error::{Error, Result};
use crate::numkit::{Matrix, Rng, Scalar, Vector};

/// Dropout rate between the hidden layers of the detection head.
pub const DEFAULT_DROPOUT: f64 = 0.2;

/// Fully connected layer `W·x + b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dense<T> {
    pub w: Matrix<T>,
    pub b: Vector<T>,
}

impl<T: Scalar> Dense<T> {
    pub fn zeros(out: usize, input: usize) -> Self {
        Self {
            w: Matrix::zeros(out, input),
            b: Vector::zeros(out),
        }
    }

    /// He-normal weights, zero bias.
    fn he_normal(out: usize, input: usize, rng: &mut Rng) -> Self {
        let std = (2.0 / input as f64).sqrt();
        Self {
            w: Matrix::from_fn(out, input, |_, _| T::of(std * rng.normal())),
            b: Vector::zeros(out),
        }
    }

    /// Xavier-uniform weights, zero bias.
    fn xavier_uniform(out: usize, input: usize, rng: &mut Rng) -> Self {
        let bound = (6.0 / (input + out) as f64).sqrt();
        Self {
            w: Matrix::from_fn(out, input, |_, _| T::of(rng.uniform_in(-bound, bound))),
            b: Vector::zeros(out),
        }
    }

    pub fn in_dim(&self) -> usize {
        self.w.cols()
    }

    pub fn out_dim(&self) -> usize {
        self.w.rows()
    }

    pub fn num_params(&self) -> usize {
        self.w.as_slice().len() + self.b.len()
    }
}

/// Two-layer ReLU embedding network for one modality.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbedNet<T> {
    pub l1: Dense<T>,
    pub l2: Dense<T>,
}

/// dense → ReLU → dropout → dense → ReLU → dropout → dense → sigmoid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeadNet<T> {
    pub l1: Dense<T>,
    pub l2: Dense<T>,
    pub l3: Dense<T>,
    pub dropout_p: f64,
}

impl<T: Scalar> HeadNet<T> {
    pub fn in_dim(&self) -> usize {
        self.l1.in_dim()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Head<T> {
    Single(HeadNet<T>),
    /// Separate heads on `z_v` and `z_a`, probabilities averaged.
    Late {
        video: HeadNet<T>,
        audio: HeadNet<T>,
    },
}

impl<T> Head<T> {
    pub fn nets(&self) -> Vec<&HeadNet<T>> {
        match self {
            Head::Single(h) => vec![h],
            Head::Late { video, audio } => vec![video, audio],
        }
    }

    pub fn nets_mut(&mut self) -> Vec<&mut HeadNet<T>> {
        match self {
            Head::Single(h) => vec![h],
            Head::Late { video, audio } => vec![video, audio],
        }
    }
}

/// All learnable parameters of one model variant.
///
/// Widths are not stored separately; they are read off the weight shapes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams<T> {
    pub variant: ModelVariant,
    pub video_embed: Option<EmbedNet<T>>,
    pub audio_embed: Option<EmbedNet<T>>,
    pub head: Head<T>,
    /// Seed used by [`init_params`]; not persisted in checkpoints.
    pub init_seed: u64,
}

/// Gradients share the parameter layout.
pub type Gradients<T> = ModelParams<T>;

/// Draws fresh parameters: He-normal for layers feeding a ReLU,
/// Xavier-uniform for the logit layer, zero biases.
pub fn init_params<T: Scalar>(variant: ModelVariant, dims: &Dims, seed: u64) -> ModelParams<T> {
    let root = Rng::new(seed);
    let mut stream = 0u64;
    let mut next_rng = || {
        stream += 1;
        root.fork(stream)
    };
    let mut embed = |out: usize| EmbedNet {
        l1: Dense::he_normal(dims.embed_hidden, dims.input, &mut next_rng()),
        l2: Dense::he_normal(out, dims.embed_hidden, &mut next_rng()),
    };
    let video_embed = variant.uses_video_embed().then(|| embed(dims.video_out));
    let audio_embed = variant.uses_audio_embed().then(|| embed(dims.audio_out));
    let mut head = |input: usize| HeadNet {
        l1: Dense::he_normal(dims.head_hidden, input, &mut next_rng()),
        l2: Dense::he_normal(dims.head_hidden, dims.head_hidden, &mut next_rng()),
        l3: Dense::xavier_uniform(1, dims.head_hidden, &mut next_rng()),
        dropout_p: DEFAULT_DROPOUT,
    };
    let inputs = variant.head_inputs(dims);
    let head = match variant {
        ModelVariant::LateFusion => Head::Late {
            video: head(inputs[0]),
            audio: head(inputs[1]),
        },
        _ => Head::Single(head(inputs[0])),
    };
    ModelParams {
        variant,
        video_embed,
        audio_embed,
        head,
        init_seed: seed,
    }
}

impl<T: Scalar> ModelParams<T> {
    /// Layers in checkpoint order: video embedding, audio embedding, then
    /// the head (video head before audio head for late fusion).
    pub fn layers(&self) -> Vec<&Dense<T>> {
        let mut out = Vec::new();
        for e in [&self.video_embed, &self.audio_embed].into_iter().flatten() {
            out.push(&e.l1);
            out.push(&e.l2);
        }
        for h in self.head.nets() {
            out.extend([&h.l1, &h.l2, &h.l3]);
        }
        out
    }

    pub fn layers_mut(&mut self) -> Vec<&mut Dense<T>> {
        let mut out = Vec::new();
        for e in [&mut self.video_embed, &mut self.audio_embed]
            .into_iter()
            .flatten()
        {
            out.push(&mut e.l1);
            out.push(&mut e.l2);
        }
        for h in self.head.nets_mut() {
            out.push(&mut h.l1);
            out.push(&mut h.l2);
            out.push(&mut h.l3);
        }
        out
    }

    pub fn zeros_like(&self) -> Self {
        let mut z = self.clone();
        z.set_zero();
        z
    }

    pub fn set_zero(&mut self) {
        for layer in self.layers_mut() {
            layer.w.as_mut_slice().fill(T::zero());
            layer.b.as_mut_slice().fill(T::zero());
        }
    }

    pub fn num_params(&self) -> usize {
        self.layers().iter().map(|l| l.num_params()).sum()
    }

    /// Feature length each modality must have.
    pub fn input_dim(&self) -> usize {
        match (&self.video_embed, &self.audio_embed) {
            (Some(e), _) | (None, Some(e)) => e.l1.in_dim(),
            (None, None) => self.head.nets()[0].in_dim() / 2,
        }
    }

    pub fn set_dropout(&mut self, p: f64) {
        for h in self.head.nets_mut() {
            h.dropout_p = p;
        }
    }

    pub fn is_finite(&self) -> bool {
        self.layers()
            .iter()
            .all(|l| l.w.is_finite() && l.b.is_finite())
    }

    /// All parameters as one `f64` vector, weights before bias per layer.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.num_params());
        for l in self.layers() {
            out.extend(l.w.as_slice().iter().map(|v| v.as_f64()));
            out.extend(l.b.iter().map(|v| v.as_f64()));
        }
        out
    }

    pub fn set_flat(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.num_params() {
            return Err(Error::dim(format!(
                "{} values for {} parameters",
                flat.len(),
                self.num_params()
            )));
        }
        let mut it = flat.iter();
        for l in self.layers_mut() {
            for v in l.w.as_mut_slice().iter_mut().chain(l.b.as_mut_slice()) {
                *v = T::of(*it.next().expect("length checked"));
            }
        }
        Ok(())
    }

    /// Checks that the present sub-networks and every shape agree with the
    /// variant.
    pub fn validate(&self) -> Result<()> {
        let v = self.variant;
        let cfg = |msg: String| Err(Error::Configuration(format!("{v}: {msg}")));
        if self.video_embed.is_some() != v.uses_video_embed()
            || self.audio_embed.is_some() != v.uses_audio_embed()
        {
            return cfg("embedding networks do not match the variant".into());
        }
        if matches!(self.head, Head::Late { .. }) != (v == ModelVariant::LateFusion) {
            return cfg("head layout does not match the variant".into());
        }
        let input = self.input_dim();
        let mut outs = [0usize; 2];
        for (slot, e) in [&self.video_embed, &self.audio_embed].iter().enumerate() {
            if let Some(e) = e {
                let hidden = e.l1.out_dim();
                if e.l1.in_dim() != input
                    || e.l1.b.len() != hidden
                    || e.l2.in_dim() != hidden
                    || e.l2.b.len() != e.l2.out_dim()
                {
                    return cfg("inconsistent embedding network shapes".into());
                }
                outs[slot] = e.l2.out_dim();
            }
        }
        let dims = Dims {
            input,
            embed_hidden: 0,
            video_out: outs[0],
            audio_out: outs[1],
            head_hidden: 0,
        };
        for (h, want) in self.head.nets().iter().zip(v.head_inputs(&dims)) {
            let hidden = h.l1.out_dim();
            if h.l1.in_dim() != want {
                return cfg(format!(
                    "head expects {} inputs but the variant produces {want}",
                    h.l1.in_dim()
                ));
            }
            if h.l1.b.len() != hidden
                || h.l2.w.shape() != (hidden, hidden)
                || h.l2.b.len() != hidden
                || h.l3.w.shape() != (1, hidden)
                || h.l3.b.len() != 1
            {
                return cfg("inconsistent head shapes".into());
            }
            if !(0.0..1.0).contains(&h.dropout_p) {
                return cfg(format!("dropout {} outside [0, 1)", h.dropout_p));
            }
        }
        Ok(())
    }
}
