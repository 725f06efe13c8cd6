//! Central finite-difference checks for the hand-written gradients.

use ndarray::Array2;

use super::{GradientTape, Sequential};
use crate::error::Result;

/// Gradients smaller than this are compared in absolute rather than relative
/// terms, since central differences cannot resolve them relative to the loss.
pub const RELATIVE_FLOOR: f64 = 1e-5;

pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(RELATIVE_FLOOR)
}

pub fn max_relative_error<'a>(
    analytic: impl IntoIterator<Item = &'a f64>,
    numeric: impl IntoIterator<Item = &'a f64>,
) -> f64 {
    analytic
        .into_iter()
        .zip(numeric)
        .map(|(&a, &n)| relative_error(a, n))
        .fold(0.0, f64::max)
}

/// `∂f/∂x` by central differences with the given step.
pub fn numeric_gradient<F>(mut f: F, x: &Array2<f64>, step: f64) -> Array2<f64>
where
    F: FnMut(&Array2<f64>) -> f64,
{
    let mut x = x.clone();
    let mut g = Array2::zeros(x.dim());
    for idx in 0..x.len() {
        let orig = x.as_slice().expect("standard layout")[idx];
        x.as_slice_mut().expect("standard layout")[idx] = orig + step;
        let up = f(&x);
        x.as_slice_mut().expect("standard layout")[idx] = orig - step;
        let down = f(&x);
        x.as_slice_mut().expect("standard layout")[idx] = orig;
        g.as_slice_mut().expect("standard layout")[idx] = (up - down) / (2.0 * step);
    }
    g
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckReport {
    /// Worst relative error over every parameter and input entry.
    pub max_rel_error: f64,
    /// Parameter tensor index (in `params_mut` order) of the worst entry, or
    /// `None` when the worst entry belongs to the input.
    pub worst_tensor: Option<usize>,
    pub n_checked: usize,
}

/// Checks `Sequential::backward` for a training-mode forward pass followed by
/// `loss`, which returns the scalar loss and its gradient with respect to the
/// network output.
pub fn check_sequential<L>(net: &Sequential, x: &Array2<f64>, loss: L, step: f64) -> Result<GradCheckReport>
where
    L: Fn(&Array2<f64>) -> (f64, Array2<f64>),
{
    let eval = |n: &Sequential, x: &Array2<f64>| -> Result<f64> {
        let mut n = n.clone();
        let mut tape = GradientTape::new();
        Ok(loss(&n.forward_train(x, &mut tape)?).0)
    };

    let mut work = net.clone();
    let mut tape = GradientTape::new();
    let out = work.forward_train(x, &mut tape)?;
    let grads = work.backward(&tape, &loss(&out).1)?;

    let mut report = GradCheckReport {
        max_rel_error: 0.0,
        worst_tensor: None,
        n_checked: 0,
    };
    let mut record = |err: f64, tensor: Option<usize>| {
        report.n_checked += 1;
        if err > report.max_rel_error {
            report.max_rel_error = err;
            report.worst_tensor = tensor;
        }
    };

    for (t, analytic) in grads.slices().into_iter().enumerate() {
        for (i, &a) in analytic.iter().enumerate() {
            let shifted = |delta: f64| -> Result<f64> {
                let mut n = net.clone();
                n.params_mut()[t][i] += delta;
                eval(&n, x)
            };
            let numeric = (shifted(step)? - shifted(-step)?) / (2.0 * step);
            record(relative_error(a, numeric), Some(t));
        }
    }

    let mut failure = None;
    let numeric_input = numeric_gradient(
        |xp| {
            eval(net, xp).unwrap_or_else(|e| {
                failure.get_or_insert(e);
                f64::NAN
            })
        },
        x,
        step,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    for (&a, &n) in grads.input.iter().zip(numeric_input.iter()) {
        record(relative_error(a, n), None);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{bce_grad, bce_loss, BatchNormLayer, DenseLayer, Layer};
    use ndarray::array;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn numeric_gradient_of_quadratic() {
        let x = array![[1.0, -2.0], [0.5, 3.0]];
        let g = numeric_gradient(|x| x.iter().map(|v| v * v).sum(), &x, 1e-5);
        for (a, b) in g.iter().zip(x.iter()) {
            assert!((a - 2.0 * b).abs() < 1e-8);
        }
    }

    #[test]
    fn relative_error_floor() {
        assert_eq!(relative_error(1.0, 1.0), 0.0);
        assert!((relative_error(2.0, 1.0) - 0.5).abs() < 1e-15);
        assert!(relative_error(1e-12, 0.0) < 1e-6);
    }

    #[test]
    fn small_network_passes() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let net = Sequential::new(vec![
            Layer::Dense(DenseLayer::init(4, 3, &mut rng)),
            Layer::BatchNorm(BatchNormLayer::new(3)),
            Layer::Relu,
            Layer::Attention,
            Layer::Dense(DenseLayer::init(3, 4, &mut rng)),
            Layer::Sigmoid,
        ]);
        let x = Array2::from_shape_fn((5, 4), |_| rng.gen_range(0.0..1.0));
        let y = x.clone();
        let r = check_sequential(&net, &x, |p| (bce_loss(p, &y), bce_grad(p, &y)), 1e-5).unwrap();
        assert!(r.max_rel_error < 1e-4, "{r:?}");
        assert_eq!(r.n_checked, 4 * 3 + 3 + 3 + 3 + 3 * 4 + 4 + 20);
    }

    #[test]
    fn detects_a_wrong_gradient() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let net = Sequential::new(vec![Layer::Dense(DenseLayer::init(3, 2, &mut rng))]);
        let x = Array2::from_shape_fn((4, 3), |_| rng.gen_range(-1.0..1.0));
        // claims the gradient of Σ out² is out, off by a factor of two
        let r = check_sequential(&net, &x, |p| (p.iter().map(|v| v * v).sum(), p.clone()), 1e-5).unwrap();
        assert!(r.max_rel_error > 0.4);
    }
}
