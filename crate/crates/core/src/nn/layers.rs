use ndarray::{Array1, Array2, ArrayView1, Axis, Zip};
use rand::Rng;

use crate::error::{Error, Result};

/// Fully connected layer computing `x W + b`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer {
    /// in_dim × out_dim
    pub w: Array2<f64>,
    pub b: Array1<f64>,
}

impl DenseLayer {
    /// Glorot-uniform weights, zero bias.
    pub fn init<R: Rng>(in_dim: usize, out_dim: usize, rng: &mut R) -> Self {
        let limit = (6.0 / (in_dim + out_dim) as f64).sqrt();
        DenseLayer {
            w: Array2::from_shape_fn((in_dim, out_dim), |_| rng.gen_range(-limit..=limit)),
            b: Array1::zeros(out_dim),
        }
    }

    pub fn in_dim(&self) -> usize {
        self.w.nrows()
    }

    pub fn out_dim(&self) -> usize {
        self.w.ncols()
    }

    pub fn forward(&self, x: &Array2<f64>) -> Result<Array2<f64>> {
        if x.ncols() != self.in_dim() {
            return Err(Error::Contract(format!(
                "dense layer expects width {}, got {}",
                self.in_dim(),
                x.ncols()
            )));
        }
        Ok(x.dot(&self.w) + &self.b)
    }

    /// Returns (dW, db, dx).
    pub fn backward(
        &self,
        x: &Array2<f64>,
        grad_out: &Array2<f64>,
    ) -> (Array2<f64>, Array1<f64>, Array2<f64>) {
        let dw = x.t().dot(grad_out);
        let db = grad_out.sum_axis(Axis(0));
        let dx = grad_out.dot(&self.w.t());
        (dw, db, dx)
    }
}

pub fn relu(x: &Array2<f64>) -> Array2<f64> {
    x.mapv(|v| v.max(0.0))
}

pub fn relu_backward(x: &Array2<f64>, grad_out: &Array2<f64>) -> Array2<f64> {
    Zip::from(x)
        .and(grad_out)
        .map_collect(|&x, &g| if x > 0.0 { g } else { 0.0 })
}

pub fn sigmoid(x: &Array2<f64>) -> Array2<f64> {
    x.mapv(|v| 1.0 / (1.0 + (-v).exp()))
}

pub fn sigmoid_backward(out: &Array2<f64>, grad_out: &Array2<f64>) -> Array2<f64> {
    Zip::from(out)
        .and(grad_out)
        .map_collect(|&s, &g| g * s * (1.0 - s))
}

/// Numerically stable softmax of one vector.
pub fn softmax(z: ArrayView1<f64>) -> Array1<f64> {
    let max = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let e = z.mapv(|v| (v - max).exp());
    let sum = e.sum();
    e / sum
}

fn softmax_rows(z: &Array2<f64>) -> Array2<f64> {
    let mut out = z.clone();
    for mut row in out.rows_mut() {
        let s = softmax(row.view());
        row.assign(&s);
    }
    out
}

/// Row-wise `softmax(e) ⊙ e`. Returns the output and the softmax weights.
pub fn attention_forward(e: &Array2<f64>) -> (Array2<f64>, Array2<f64>) {
    let probs = softmax_rows(e);
    (&probs * e, probs)
}

pub fn attention_bottleneck(e: &Array2<f64>) -> Array2<f64> {
    attention_forward(e).0
}

/// Gradient of `z = s ⊙ e`, `s = softmax(e)`, with respect to `e`:
/// `de_k = s_k (g_k + g_k e_k - Σ_c g_c e_c s_c)`.
pub fn attention_backward(
    e: &Array2<f64>,
    probs: &Array2<f64>,
    grad_out: &Array2<f64>,
) -> Array2<f64> {
    let mut de = Array2::zeros(e.raw_dim());
    for ((mut out, e), (s, g)) in de
        .rows_mut()
        .into_iter()
        .zip(e.rows())
        .zip(probs.rows().into_iter().zip(grad_out.rows()))
    {
        let weighted: f64 = (0..e.len()).map(|c| g[c] * e[c] * s[c]).sum();
        for k in 0..e.len() {
            out[k] = s[k] * (g[k] + g[k] * e[k] - weighted);
        }
    }
    de
}

/// Per-feature batch normalization with learned scale and shift.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchNormLayer {
    pub gamma: Array1<f64>,
    pub beta: Array1<f64>,
    pub running_mean: Array1<f64>,
    pub running_var: Array1<f64>,
    pub epsilon: f64,
    pub momentum: f64,
}

/// What the backward pass of a batch-norm layer needs.
#[derive(Debug, Clone)]
pub struct BatchNormCache {
    pub x_hat: Array2<f64>,
    pub inv_std: Array1<f64>,
    pub training: bool,
}

impl BatchNormLayer {
    pub const EPSILON: f64 = 1e-5;
    pub const MOMENTUM: f64 = 0.99;

    pub fn new(dim: usize) -> Self {
        BatchNormLayer {
            gamma: Array1::ones(dim),
            beta: Array1::zeros(dim),
            running_mean: Array1::zeros(dim),
            running_var: Array1::ones(dim),
            epsilon: Self::EPSILON,
            momentum: Self::MOMENTUM,
        }
    }

    pub fn dim(&self) -> usize {
        self.gamma.len()
    }

    /// Training mode normalizes with batch statistics (biased variance) and
    /// folds them into the running statistics; evaluation mode uses the
    /// running statistics and leaves the layer untouched.
    pub fn forward(&mut self, x: &Array2<f64>, training: bool) -> Result<(Array2<f64>, BatchNormCache)> {
        if x.ncols() != self.dim() {
            return Err(Error::Contract(format!(
                "batch norm expects width {}, got {}",
                self.dim(),
                x.ncols()
            )));
        }
        if training {
            if x.nrows() < 2 {
                return Err(Error::Contract(
                    "batch norm in training mode needs at least 2 rows".into(),
                ));
            }
            let mean = x.mean_axis(Axis(0)).expect("nonempty batch");
            let var = x.var_axis(Axis(0), 0.0);
            let m = self.momentum;
            self.running_mean = &self.running_mean * m + &mean * (1.0 - m);
            self.running_var = &self.running_var * m + &var * (1.0 - m);
            Ok(self.normalize(x, &mean, &var, true))
        } else {
            Ok(self.forward_eval(x))
        }
    }

    pub fn forward_eval(&self, x: &Array2<f64>) -> (Array2<f64>, BatchNormCache) {
        self.normalize(x, &self.running_mean, &self.running_var, false)
    }

    fn normalize(
        &self,
        x: &Array2<f64>,
        mean: &Array1<f64>,
        var: &Array1<f64>,
        training: bool,
    ) -> (Array2<f64>, BatchNormCache) {
        let inv_std = var.mapv(|v| 1.0 / (v + self.epsilon).sqrt());
        let x_hat = (x - mean) * &inv_std;
        let out = &x_hat * &self.gamma + &self.beta;
        (
            out,
            BatchNormCache {
                x_hat,
                inv_std,
                training,
            },
        )
    }

    /// Returns (dgamma, dbeta, dx).
    pub fn backward(
        &self,
        cache: &BatchNormCache,
        grad_out: &Array2<f64>,
    ) -> (Array1<f64>, Array1<f64>, Array2<f64>) {
        let dgamma = (grad_out * &cache.x_hat).sum_axis(Axis(0));
        let dbeta = grad_out.sum_axis(Axis(0));
        let dx_hat = grad_out * &self.gamma;
        let dx = if cache.training {
            let n = grad_out.nrows() as f64;
            let sum_dx_hat = dx_hat.sum_axis(Axis(0));
            let sum_dx_hat_xhat = (&dx_hat * &cache.x_hat).sum_axis(Axis(0));
            let scaled = &dx_hat * n - &sum_dx_hat - &cache.x_hat * &sum_dx_hat_xhat;
            scaled * &(&cache.inv_std / n)
        } else {
            dx_hat * &cache.inv_std
        };
        (dgamma, dbeta, dx)
    }
}
