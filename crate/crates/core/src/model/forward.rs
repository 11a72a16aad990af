use super::fusion::{fusion_backward, tensor_fuse, FusionTensor};
use super::params::{Dense, EmbedNet, Gradients, Head, HeadNet, ModelParams};
use super::ModelVariant;
use crate::error::{Error, Result};
use crate::numkit::{
    bce_grad_logit, dropout, matvec_unchecked, outer, relu, sigmoid, Matrix, Rng, Scalar, Vector,
    BCE_EPS,
};

/// Activations of one embedding network.
#[derive(Debug, Clone)]
pub struct EmbedTrace<T> {
    pub hidden_pre: Vector<T>,
    pub hidden_mask: Vector<T>,
    pub hidden: Vector<T>,
    pub out_pre: Vector<T>,
    pub out_mask: Vector<T>,
    pub out: Vector<T>,
}

/// Activations of one detection head.
#[derive(Debug, Clone)]
pub struct HeadTrace<T> {
    pub input: Vector<T>,
    pub pre1: Vector<T>,
    pub relu_mask1: Vector<T>,
    pub drop_mask1: Vector<T>,
    pub act1: Vector<T>,
    pub pre2: Vector<T>,
    pub relu_mask2: Vector<T>,
    pub drop_mask2: Vector<T>,
    pub act2: Vector<T>,
    pub logit: T,
    pub p: T,
}

/// Everything [`model_backward`] needs from one forward pass.
#[derive(Debug, Clone)]
pub struct ForwardTrace<T> {
    pub variant: ModelVariant,
    pub video_input: Vector<T>,
    pub audio_input: Vector<T>,
    pub video: Option<EmbedTrace<T>>,
    pub audio: Option<EmbedTrace<T>>,
    pub fusion: Option<FusionTensor<T>>,
    pub heads: Vec<HeadTrace<T>>,
    pub p: T,
}

/// Where dropout masks come from.
enum Masks<'a, T> {
    Eval,
    Sample(&'a mut Rng),
    Replay(&'a [HeadTrace<T>]),
}

fn dense<T: Scalar>(layer: &Dense<T>, x: &Vector<T>) -> Vector<T> {
    let mut y = matvec_unchecked(&layer.w, x.as_slice());
    for (yi, &bi) in y.iter_mut().zip(layer.b.iter()) {
        *yi += bi;
    }
    Vector::new(y)
}

/// `ReLU(W2·ReLU(W1·x + b1) + b2)`.
pub fn embed_forward<T: Scalar>(net: &EmbedNet<T>, x: &Vector<T>) -> Result<Vector<T>> {
    if x.len() != net.l1.in_dim() {
        return Err(Error::dim(format!(
            "embedding network expects {} features, got {}",
            net.l1.in_dim(),
            x.len()
        )));
    }
    Ok(embed_trace(net, x).out)
}

fn embed_trace<T: Scalar>(net: &EmbedNet<T>, x: &Vector<T>) -> EmbedTrace<T> {
    let hidden_pre = dense(&net.l1, x);
    let (hidden, hidden_mask) = relu(&hidden_pre);
    let out_pre = dense(&net.l2, &hidden);
    let (out, out_mask) = relu(&out_pre);
    EmbedTrace {
        hidden_pre,
        hidden_mask,
        hidden,
        out_pre,
        out_mask,
        out,
    }
}

fn head_trace<T: Scalar>(
    net: &HeadNet<T>,
    input: Vector<T>,
    masks: &mut Masks<'_, T>,
    index: usize,
) -> Result<HeadTrace<T>> {
    let mut drop = |x: &Vector<T>, site: usize| -> Result<(Vector<T>, Vector<T>)> {
        match masks {
            Masks::Eval => dropout(x, net.dropout_p, false, &mut Rng::new(0)),
            Masks::Sample(rng) => dropout(x, net.dropout_p, true, rng),
            Masks::Replay(heads) => {
                let h = &heads[index];
                let m = if site == 1 {
                    &h.drop_mask1
                } else {
                    &h.drop_mask2
                };
                Ok((x.hadamard(m), m.clone()))
            }
        }
    };
    let pre1 = dense(&net.l1, &input);
    let (r1, relu_mask1) = relu(&pre1);
    let (act1, drop_mask1) = drop(&r1, 1)?;
    let pre2 = dense(&net.l2, &act1);
    let (r2, relu_mask2) = relu(&pre2);
    let (act2, drop_mask2) = drop(&r2, 2)?;
    let logit = dense(&net.l3, &act2)[0];
    Ok(HeadTrace {
        input,
        pre1,
        relu_mask1,
        drop_mask1,
        act1,
        pre2,
        relu_mask2,
        drop_mask2,
        act2,
        logit,
        p: sigmoid(logit),
    })
}

fn forward_impl<T: Scalar>(
    params: &ModelParams<T>,
    video: &Vector<T>,
    audio: &Vector<T>,
    mut masks: Masks<'_, T>,
) -> Result<ForwardTrace<T>> {
    params.validate()?;
    let input = params.input_dim();
    if video.len() != input || audio.len() != input {
        return Err(Error::dim(format!(
            "model expects {input} features per modality, got video {} and audio {}",
            video.len(),
            audio.len()
        )));
    }
    let vt = params.video_embed.as_ref().map(|e| embed_trace(e, video));
    let at = params.audio_embed.as_ref().map(|e| embed_trace(e, audio));
    let z_v = || &vt.as_ref().expect("validated").out;
    let z_a = || &at.as_ref().expect("validated").out;
    let mut fusion = None;
    let mut heads = Vec::with_capacity(2);
    let head_input = match params.variant {
        ModelVariant::VideoOnly => z_v().clone(),
        ModelVariant::AudioOnly => z_a().clone(),
        ModelVariant::EarlyFusionNoEmbed => Vector::concat(&[video, audio]),
        ModelVariant::EarlyFusion => Vector::concat(&[z_v(), z_a()]),
        ModelVariant::LateFusion => z_v().clone(),
        ModelVariant::TfUnimodalOnly => {
            Vector::concat(&[z_v(), z_a(), &Vector::filled(1, T::one())])
        }
        ModelVariant::TfBimodalOnly => outer(z_v(), z_a()).into_flat(),
        ModelVariant::TfComplete => {
            let f = tensor_fuse(z_v(), z_a());
            let flat = f.flatten();
            fusion = Some(f);
            flat
        }
    };
    let p = match &params.head {
        Head::Single(net) => {
            heads.push(head_trace(net, head_input, &mut masks, 0)?);
            heads[0].p
        }
        Head::Late {
            video: hv,
            audio: ha,
        } => {
            heads.push(head_trace(hv, head_input, &mut masks, 0)?);
            heads.push(head_trace(ha, z_a().clone(), &mut masks, 1)?);
            (heads[0].p + heads[1].p) / (T::one() + T::one())
        }
    };
    Ok(ForwardTrace {
        variant: params.variant,
        video_input: video.clone(),
        audio_input: audio.clone(),
        video: vt,
        audio: at,
        fusion,
        heads,
        p,
    })
}

/// Runs one record through the model. Dropout draws from `rng` only when
/// `train_mode` is set; otherwise the result depends on the parameters
/// and features alone.
pub fn model_forward<T: Scalar>(
    params: &ModelParams<T>,
    video: &Vector<T>,
    audio: &Vector<T>,
    train_mode: bool,
    rng: &mut Rng,
) -> Result<(T, ForwardTrace<T>)> {
    let masks = if train_mode {
        Masks::Sample(rng)
    } else {
        Masks::Eval
    };
    let trace = forward_impl(params, video, audio, masks)?;
    Ok((trace.p, trace))
}

/// Inference-mode probability of the positive class.
pub fn predict<T: Scalar>(
    params: &ModelParams<T>,
    video: &Vector<T>,
    audio: &Vector<T>,
) -> Result<T> {
    Ok(forward_impl(params, video, audio, Masks::Eval)?.p)
}

/// Recomputes the forward pass from the trace's inputs, reusing its
/// dropout masks.
pub fn replay<T: Scalar>(params: &ModelParams<T>, trace: &ForwardTrace<T>) -> Result<T> {
    Ok(forward_impl(
        params,
        &trace.video_input,
        &trace.audio_input,
        Masks::Replay(&trace.heads),
    )?
    .p)
}

/// Gradient of the binary cross-entropy loss with respect to every
/// parameter, for one record.
pub fn model_backward<T: Scalar>(
    params: &ModelParams<T>,
    trace: &ForwardTrace<T>,
    label: T,
) -> Result<Gradients<T>> {
    let mut grads = params.zeros_like();
    accumulate_backward(params, trace, label, T::one(), &mut grads)?;
    Ok(grads)
}

/// Adds `scale ×` the loss gradient for one record into `grads`.
pub fn accumulate_backward<T: Scalar>(
    params: &ModelParams<T>,
    trace: &ForwardTrace<T>,
    label: T,
    scale: T,
    grads: &mut Gradients<T>,
) -> Result<()> {
    check_trace(params, trace)?;
    if grads.variant != params.variant {
        return Err(Error::Configuration(
            "gradient buffer belongs to a different variant".into(),
        ));
    }
    let logit_grads: Vec<T> = match &params.head {
        Head::Single(_) => vec![bce_grad_logit(trace.p, label)],
        Head::Late { .. } => {
            // L = bce((p_v + p_a) / 2); zero where the clamp is active.
            let p = trace.p;
            let eps = T::of(BCE_EPS);
            let dl_dp = if p < eps || p > T::one() - eps {
                T::zero()
            } else {
                (p - label) / (p * (T::one() - p))
            };
            let half = T::of(0.5);
            trace
                .heads
                .iter()
                .map(|h| dl_dp * half * h.p * (T::one() - h.p))
                .collect()
        }
    };

    let need_input_grad = params.variant != ModelVariant::EarlyFusionNoEmbed;
    let mut input_grads = Vec::with_capacity(2);
    let head_params = params.head.nets();
    let mut head_grads = grads.head.nets_mut();
    for (k, (net, ht)) in head_params.iter().zip(&trace.heads).enumerate() {
        let g = logit_grads[k] * scale;
        input_grads.push(head_backward(net, ht, g, head_grads[k], need_input_grad));
    }

    let (dz_v, dz_a) = match params.variant {
        ModelVariant::EarlyFusionNoEmbed => return Ok(()),
        ModelVariant::VideoOnly => (input_grads.pop().flatten(), None),
        ModelVariant::AudioOnly => (None, input_grads.pop().flatten()),
        ModelVariant::LateFusion => {
            let da = input_grads.pop().flatten();
            (input_grads.pop().flatten(), da)
        }
        ModelVariant::EarlyFusion | ModelVariant::TfUnimodalOnly => {
            let g = input_grads.pop().flatten().expect("head gradient");
            let v = trace.video.as_ref().expect("checked").out.len();
            let a = trace.audio.as_ref().expect("checked").out.len();
            let s = g.as_slice();
            (
                Some(Vector::new(s[..v].to_vec())),
                Some(Vector::new(s[v..v + a].to_vec())),
            )
        }
        ModelVariant::TfBimodalOnly => {
            let g = input_grads.pop().flatten().expect("head gradient");
            let z_v = &trace.video.as_ref().expect("checked").out;
            let z_a = &trace.audio.as_ref().expect("checked").out;
            let g = Matrix::from_vec(z_v.len(), z_a.len(), g.into_vec())?;
            (
                Some(Vector::new(matvec_unchecked(&g, z_a.as_slice()))),
                Some(g.transpose_mul(z_v.as_slice())),
            )
        }
        ModelVariant::TfComplete => {
            let g = input_grads.pop().flatten().expect("head gradient");
            let z_v = &trace.video.as_ref().expect("checked").out;
            let z_a = &trace.audio.as_ref().expect("checked").out;
            let g = Matrix::from_vec(z_v.len() + 1, z_a.len() + 1, g.into_vec())?;
            let (dv, da) = fusion_backward(&g, z_v, z_a);
            (Some(dv), Some(da))
        }
    };
    if let (Some(dz), Some(net), Some(t)) = (dz_v, &params.video_embed, &trace.video) {
        let gnet = grads.video_embed.as_mut().expect("same layout");
        embed_backward(net, t, &trace.video_input, &dz, gnet);
    }
    if let (Some(dz), Some(net), Some(t)) = (dz_a, &params.audio_embed, &trace.audio) {
        let gnet = grads.audio_embed.as_mut().expect("same layout");
        embed_backward(net, t, &trace.audio_input, &dz, gnet);
    }
    Ok(())
}

fn check_trace<T: Scalar>(params: &ModelParams<T>, trace: &ForwardTrace<T>) -> Result<()> {
    let heads = params.head.nets();
    let ok = trace.variant == params.variant
        && trace.heads.len() == heads.len()
        && heads
            .iter()
            .zip(&trace.heads)
            .all(|(n, t)| n.in_dim() == t.input.len() && n.l1.out_dim() == t.pre1.len())
        && params.video_embed.is_some() == trace.video.is_some()
        && params.audio_embed.is_some() == trace.audio.is_some()
        && trace.video_input.len() == params.input_dim()
        && trace.audio_input.len() == params.input_dim();
    if ok {
        Ok(())
    } else {
        Err(Error::Configuration(
            "forward trace does not belong to these parameters".into(),
        ))
    }
}

/// Accumulates head gradients for upstream logit gradient `g`; returns the
/// gradient with respect to the head input when requested.
fn head_backward<T: Scalar>(
    net: &HeadNet<T>,
    t: &HeadTrace<T>,
    g: T,
    grads: &mut HeadNet<T>,
    want_input: bool,
) -> Option<Vector<T>> {
    grads
        .l3
        .w
        .add_outer_scaled(&[g], t.act2.as_slice(), T::one());
    grads.l3.b[0] += g;
    let g_act2 = net.l3.w.transpose_mul(&[g]);
    let g_pre2 = g_act2.hadamard(&t.drop_mask2).hadamard(&t.relu_mask2);
    grads
        .l2
        .w
        .add_outer_scaled(g_pre2.as_slice(), t.act1.as_slice(), T::one());
    add_into(&mut grads.l2.b, &g_pre2);
    let g_act1 = net.l2.w.transpose_mul(g_pre2.as_slice());
    let g_pre1 = g_act1.hadamard(&t.drop_mask1).hadamard(&t.relu_mask1);
    grads
        .l1
        .w
        .add_outer_scaled(g_pre1.as_slice(), t.input.as_slice(), T::one());
    add_into(&mut grads.l1.b, &g_pre1);
    want_input.then(|| net.l1.w.transpose_mul(g_pre1.as_slice()))
}

fn embed_backward<T: Scalar>(
    net: &EmbedNet<T>,
    t: &EmbedTrace<T>,
    input: &Vector<T>,
    g_out: &Vector<T>,
    grads: &mut EmbedNet<T>,
) {
    let g_pre2 = g_out.hadamard(&t.out_mask);
    grads
        .l2
        .w
        .add_outer_scaled(g_pre2.as_slice(), t.hidden.as_slice(), T::one());
    add_into(&mut grads.l2.b, &g_pre2);
    let g_hidden = net.l2.w.transpose_mul(g_pre2.as_slice());
    let g_pre1 = g_hidden.hadamard(&t.hidden_mask);
    grads
        .l1
        .w
        .add_outer_scaled(g_pre1.as_slice(), input.as_slice(), T::one());
    add_into(&mut grads.l1.b, &g_pre1);
}

fn add_into<T: Scalar>(acc: &mut Vector<T>, g: &Vector<T>) {
    for (a, &b) in acc.as_mut_slice().iter_mut().zip(g.iter()) {
        *a += b;
    }
}
