use super::{accumulate_backward, init_params, predict, Dims, ModelParams, ModelVariant};
use crate::error::Result;
use crate::numkit::{bce_loss, grad_check, Rng, Vector, DEFAULT_STEP};

/// Records used by [`gradcheck_variant`].
pub const GRADCHECK_RECORDS: usize = 4;

/// Finite-difference check of the analytic gradient of the mean loss over a
/// few random records, dropout off. Returns the worst relative error.
///
/// With `corrupt` set the analytic gradient of the first parameter is
/// perturbed before comparison, which must make the check fail.
pub fn gradcheck_variant(
    variant: ModelVariant,
    dims: &Dims,
    seed: u64,
    corrupt: bool,
) -> Result<f64> {
    let mut params: ModelParams<f64> = init_params(variant, dims, seed);
    // Nonzero biases so every bias path carries signal.
    let mut rng = Rng::new(seed).fork(1000);
    for layer in params.layers_mut() {
        for b in layer.b.as_mut_slice() {
            *b = 0.1 * rng.normal();
        }
    }
    let records: Vec<(Vector<f64>, Vector<f64>, f64)> = (0..GRADCHECK_RECORDS)
        .map(|i| {
            let v = Vector::new((0..dims.input).map(|_| rng.normal()).collect());
            let a = Vector::new((0..dims.input).map(|_| rng.normal()).collect());
            (v, a, (i % 2) as f64)
        })
        .collect();
    let n = records.len() as f64;

    let mut grads = params.zeros_like();
    let mut eval_rng = Rng::new(0);
    for (v, a, y) in &records {
        let (_, trace) = super::model_forward(&params, v, a, false, &mut eval_rng)?;
        accumulate_backward(&params, &trace, *y, 1.0 / n, &mut grads)?;
    }
    let mut analytic = grads.to_flat();
    if corrupt {
        analytic[0] += 0.5;
    }

    let theta = params.to_flat();
    let mut probe = params.clone();
    let loss = |flat: &[f64]| -> f64 {
        probe.set_flat(flat).expect("same layout");
        records
            .iter()
            .map(|(v, a, y)| bce_loss(predict(&probe, v, a).expect("valid record"), *y))
            .sum::<f64>()
            / n
    };
    grad_check(loss, &theta, &analytic, DEFAULT_STEP)
}
