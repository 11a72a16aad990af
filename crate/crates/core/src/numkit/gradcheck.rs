use crate::error::{Error, Result};

/// Default central-difference step.
pub const DEFAULT_STEP: f64 = 1e-5;

/// Compares an analytic gradient with central finite differences of `f`.
///
/// Returns the largest `|analytic - fd| / max(1, |analytic|, |fd|)` over all
/// coordinates of `theta`.
pub fn grad_check<F>(mut f: F, theta: &[f64], analytic: &[f64], h: f64) -> Result<f64>
where
    F: FnMut(&[f64]) -> f64,
{
    if h.is_nan() || h <= 0.0 {
        return Err(Error::Parameter(format!(
            "finite-difference step must be positive, got {h}"
        )));
    }
    if theta.len() != analytic.len() {
        return Err(Error::dim(format!(
            "{} parameters but {} analytic gradient entries",
            theta.len(),
            analytic.len()
        )));
    }
    let mut probe = theta.to_vec();
    let mut worst = 0.0f64;
    for i in 0..theta.len() {
        probe[i] = theta[i] + h;
        let up = f(&probe);
        probe[i] = theta[i] - h;
        let down = f(&probe);
        probe[i] = theta[i];
        if !up.is_finite() || !down.is_finite() {
            return Err(Error::Numeric(format!(
                "objective is not finite around coordinate {i}"
            )));
        }
        let fd = (up - down) / (2.0 * h);
        let a = analytic[i];
        let err = (a - fd).abs() / 1f64.max(a.abs()).max(fd.abs());
        worst = worst.max(err);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic() {
        let err = grad_check(|x| x[0] * x[0], &[3.0], &[6.0], DEFAULT_STEP).unwrap();
        assert!(err < 1e-8, "{err}");
    }

    #[test]
    fn linear() {
        let err = grad_check(
            |x| 2.0 * x[0] - 0.5 * x[1] + 4.0,
            &[1.0, -7.0],
            &[2.0, -0.5],
            DEFAULT_STEP,
        )
        .unwrap();
        assert!(err < 1e-9, "{err}");
    }

    #[test]
    fn detects_wrong_gradient() {
        let err = grad_check(|x| x[0] * x[0], &[3.0], &[5.0], DEFAULT_STEP).unwrap();
        assert!(err > 0.1);
    }

    #[test]
    fn non_finite_objective() {
        let r = grad_check(|x| (x[0]).ln(), &[0.0], &[1.0], DEFAULT_STEP);
        assert!(matches!(r, Err(Error::Numeric(_))));
    }

    #[test]
    fn rejects_bad_step() {
        assert!(grad_check(|x| x[0], &[0.0], &[1.0], 0.0).is_err());
    }
}
