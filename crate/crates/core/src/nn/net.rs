use std::ops::Range;

use ndarray::{Array1, Array2};

use super::layers::{
    attention_backward, attention_forward, relu, relu_backward, sigmoid, sigmoid_backward,
    BatchNormCache, BatchNormLayer, DenseLayer,
};
use crate::error::{Error, Result};
use crate::tensorfile::{Tensor, TensorFile};

#[derive(Debug, Clone, PartialEq)]
pub enum Layer {
    Dense(DenseLayer),
    BatchNorm(BatchNormLayer),
    Relu,
    Sigmoid,
    /// `softmax(x) ⊙ x`, row-wise.
    Attention,
}

impl Layer {
    fn kind(&self) -> &'static str {
        match self {
            Layer::Dense(_) => "dense",
            Layer::BatchNorm(_) => "batchnorm",
            Layer::Relu => "relu",
            Layer::Sigmoid => "sigmoid",
            Layer::Attention => "attention",
        }
    }
}

/// One recorded forward step.
#[derive(Debug, Clone)]
enum Record {
    Dense { input: Array2<f64> },
    BatchNorm(BatchNormCache),
    Relu { input: Array2<f64> },
    Sigmoid { output: Array2<f64> },
    Attention { input: Array2<f64>, probs: Array2<f64> },
}

/// Activations saved by a forward pass, in layer order, for reverse-mode
/// differentiation.
#[derive(Debug, Clone, Default)]
pub struct GradientTape {
    records: Vec<Record>,
}

impl GradientTape {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

/// Parameter gradients of one layer.
#[derive(Debug, Clone, PartialEq)]
pub enum LayerGrad {
    Dense { w: Array2<f64>, b: Array1<f64> },
    BatchNorm { gamma: Array1<f64>, beta: Array1<f64> },
    None,
}

#[derive(Debug, Clone)]
pub struct Gradients {
    pub layers: Vec<LayerGrad>,
    /// Gradient with respect to the network input.
    pub input: Array2<f64>,
}

impl Gradients {
    /// Flat views in the same order as [`Sequential::params_mut`].
    pub fn slices(&self) -> Vec<&[f64]> {
        let mut out = Vec::new();
        for g in &self.layers {
            match g {
                LayerGrad::Dense { w, b } => {
                    out.push(w.as_slice().expect("standard layout"));
                    out.push(b.as_slice().expect("standard layout"));
                }
                LayerGrad::BatchNorm { gamma, beta } => {
                    out.push(gamma.as_slice().expect("standard layout"));
                    out.push(beta.as_slice().expect("standard layout"));
                }
                LayerGrad::None => {}
            }
        }
        out
    }
}

/// A stack of layers applied in order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Sequential {
    pub layers: Vec<Layer>,
}

impl Sequential {
    pub fn new(layers: Vec<Layer>) -> Self {
        Sequential { layers }
    }

    /// Training-mode forward pass over all layers, recording into `tape`.
    /// Batch-norm layers use batch statistics and update their running averages.
    pub fn forward_train(&mut self, x: &Array2<f64>, tape: &mut GradientTape) -> Result<Array2<f64>> {
        self.forward_taped(x, tape, true)
    }

    fn forward_taped(
        &mut self,
        x: &Array2<f64>,
        tape: &mut GradientTape,
        training: bool,
    ) -> Result<Array2<f64>> {
        tape.records.clear();
        let mut h = x.clone();
        for layer in &mut self.layers {
            let (out, rec) = match layer {
                Layer::Dense(d) => (d.forward(&h)?, Record::Dense { input: h }),
                Layer::BatchNorm(bn) => {
                    let (out, cache) = bn.forward(&h, training)?;
                    (out, Record::BatchNorm(cache))
                }
                Layer::Relu => (relu(&h), Record::Relu { input: h }),
                Layer::Sigmoid => {
                    let out = sigmoid(&h);
                    (out.clone(), Record::Sigmoid { output: out })
                }
                Layer::Attention => {
                    let (out, probs) = attention_forward(&h);
                    (out, Record::Attention { input: h, probs })
                }
            };
            tape.records.push(rec);
            h = out;
        }
        Ok(h)
    }

    /// Evaluation-mode forward pass over `range` of the layers.
    pub fn forward_eval_range(&self, x: &Array2<f64>, range: Range<usize>) -> Result<Array2<f64>> {
        let mut h = x.clone();
        for layer in &self.layers[range] {
            h = match layer {
                Layer::Dense(d) => d.forward(&h)?,
                Layer::BatchNorm(bn) => {
                    if h.ncols() != bn.dim() {
                        return Err(Error::Contract(format!(
                            "batch norm expects width {}, got {}",
                            bn.dim(),
                            h.ncols()
                        )));
                    }
                    bn.forward_eval(&h).0
                }
                Layer::Relu => relu(&h),
                Layer::Sigmoid => sigmoid(&h),
                Layer::Attention => attention_forward(&h).0,
            };
        }
        Ok(h)
    }

    pub fn forward_eval(&self, x: &Array2<f64>) -> Result<Array2<f64>> {
        self.forward_eval_range(x, 0..self.layers.len())
    }

    /// Evaluation-mode forward pass that records a tape. Batch-norm layers use
    /// running statistics and are not modified.
    pub fn forward_eval_taped(&self, x: &Array2<f64>, tape: &mut GradientTape) -> Result<Array2<f64>> {
        self.clone().forward_taped(x, tape, false)
    }

    /// Back-propagates `grad_out` (dLoss/dOutput) through the recorded pass.
    pub fn backward(&self, tape: &GradientTape, grad_out: &Array2<f64>) -> Result<Gradients> {
        if tape.records.is_empty() {
            return Err(Error::Contract("backward called before forward".into()));
        }
        if tape.records.len() != self.layers.len() {
            return Err(Error::Contract(format!(
                "tape has {} records for {} layers",
                tape.records.len(),
                self.layers.len()
            )));
        }
        let mut g = grad_out.clone();
        let mut grads = vec![LayerGrad::None; self.layers.len()];
        for (i, (layer, rec)) in self.layers.iter().zip(&tape.records).enumerate().rev() {
            g = match (layer, rec) {
                (Layer::Dense(d), Record::Dense { input }) => {
                    let (w, b, dx) = d.backward(input, &g);
                    grads[i] = LayerGrad::Dense { w, b };
                    dx
                }
                (Layer::BatchNorm(bn), Record::BatchNorm(cache)) => {
                    let (gamma, beta, dx) = bn.backward(cache, &g);
                    grads[i] = LayerGrad::BatchNorm { gamma, beta };
                    dx
                }
                (Layer::Relu, Record::Relu { input }) => relu_backward(input, &g),
                (Layer::Sigmoid, Record::Sigmoid { output }) => sigmoid_backward(output, &g),
                (Layer::Attention, Record::Attention { input, probs }) => {
                    attention_backward(input, probs, &g)
                }
                (layer, _) => {
                    return Err(Error::Contract(format!(
                        "tape record {i} does not match {} layer",
                        layer.kind()
                    )))
                }
            };
        }
        Ok(Gradients {
            layers: grads,
            input: g,
        })
    }

    /// Mutable flat views of every trainable tensor: per dense layer `W, b`,
    /// per batch-norm layer `gamma, beta`.
    pub fn params_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out = Vec::new();
        for layer in &mut self.layers {
            match layer {
                Layer::Dense(d) => {
                    out.push(d.w.as_slice_mut().expect("standard layout"));
                    out.push(d.b.as_slice_mut().expect("standard layout"));
                }
                Layer::BatchNorm(bn) => {
                    out.push(bn.gamma.as_slice_mut().expect("standard layout"));
                    out.push(bn.beta.as_slice_mut().expect("standard layout"));
                }
                _ => {}
            }
        }
        out
    }

    /// Stores every tensor under `{prefix}{layer}.{name}`.
    pub fn write_tensors(&self, prefix: &str, file: &mut TensorFile) {
        for (i, layer) in self.layers.iter().enumerate() {
            match layer {
                Layer::Dense(d) => {
                    file.push(format!("{prefix}{i}.w"), Tensor::from_matrix(&d.w));
                    file.push(format!("{prefix}{i}.b"), Tensor::from_vector(&d.b));
                }
                Layer::BatchNorm(bn) => {
                    file.push(format!("{prefix}{i}.gamma"), Tensor::from_vector(&bn.gamma));
                    file.push(format!("{prefix}{i}.beta"), Tensor::from_vector(&bn.beta));
                    file.push(format!("{prefix}{i}.running_mean"), Tensor::from_vector(&bn.running_mean));
                    file.push(format!("{prefix}{i}.running_var"), Tensor::from_vector(&bn.running_var));
                }
                _ => {}
            }
        }
    }

    /// Overwrites parameters from a file written by [`Sequential::write_tensors`]
    /// for a network of the same architecture.
    pub fn read_tensors(&mut self, prefix: &str, file: &TensorFile) -> Result<()> {
        fn same<T: PartialEq + std::fmt::Debug>(name: &str, want: T, got: T) -> Result<()> {
            if want != got {
                return Err(Error::Format(format!(
                    "tensor {name}: expected shape {want:?}, found {got:?}"
                )));
            }
            Ok(())
        }
        for (i, layer) in self.layers.iter_mut().enumerate() {
            match layer {
                Layer::Dense(d) => {
                    let w = file.get(&format!("{prefix}{i}.w"))?.to_matrix()?;
                    let b = file.get(&format!("{prefix}{i}.b"))?.to_vector()?;
                    same("w", d.w.dim(), w.dim())?;
                    same("b", d.b.len(), b.len())?;
                    d.w = w;
                    d.b = b;
                }
                Layer::BatchNorm(bn) => {
                    let n = bn.dim();
                    for (name, dst) in [
                        ("gamma", &mut bn.gamma),
                        ("beta", &mut bn.beta),
                        ("running_mean", &mut bn.running_mean),
                        ("running_var", &mut bn.running_var),
                    ] {
                        let v = file.get(&format!("{prefix}{i}.{name}"))?.to_vector()?;
                        same(name, n, v.len())?;
                        *dst = v;
                    }
                }
                _ => {}
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{bce_grad, bce_loss};
    use ndarray::array;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn backward_before_forward_is_contract_violation() {
        let net = Sequential::new(vec![Layer::Relu]);
        let err = net.backward(&GradientTape::new(), &array![[1.0]]).unwrap_err();
        assert!(matches!(err, Error::Contract(_)));
    }

    #[test]
    fn unused_parameter_gets_zero_gradient() {
        // ReLU after a dense layer whose outputs are all negative
        let mut net = Sequential::new(vec![
            Layer::Dense(DenseLayer {
                w: array![[-1.0, -2.0]],
                b: array![-1.0, -1.0],
            }),
            Layer::Relu,
        ]);
        let x = array![[1.0], [2.0]];
        let mut tape = GradientTape::new();
        let y = net.forward_train(&x, &mut tape).unwrap();
        assert_eq!(y, Array2::<f64>::zeros((2, 2)));
        let g = net.backward(&tape, &Array2::ones((2, 2))).unwrap();
        match &g.layers[0] {
            LayerGrad::Dense { w, b } => {
                assert!(w.iter().all(|&v| v == 0.0));
                assert!(b.iter().all(|&v| v == 0.0));
            }
            _ => panic!(),
        }
    }

    #[test]
    fn eval_forward_is_deterministic_and_taped_eval_matches() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut net = Sequential::new(vec![
            Layer::Dense(DenseLayer::init(4, 3, &mut rng)),
            Layer::BatchNorm(BatchNormLayer::new(3)),
            Layer::Relu,
            Layer::Attention,
            Layer::Dense(DenseLayer::init(3, 4, &mut rng)),
            Layer::Sigmoid,
        ]);
        let x = Array2::from_shape_fn((6, 4), |_| rng.gen_range(0.0..1.0));
        let mut tape = GradientTape::new();
        net.forward_train(&x, &mut tape).unwrap();
        let a = net.forward_eval(&x).unwrap();
        let b = net.forward_eval(&x).unwrap();
        assert_eq!(a, b);
        let c = net.forward_eval_taped(&x, &mut tape).unwrap();
        assert_eq!(a, c);
        let g = net.backward(&tape, &bce_grad(&c, &x)).unwrap();
        assert_eq!(g.input.dim(), x.dim());
        assert!(bce_loss(&c, &x).is_finite());
    }

    #[test]
    fn tensors_round_trip_within_f32() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let net = Sequential::new(vec![
            Layer::Dense(DenseLayer::init(3, 2, &mut rng)),
            Layer::BatchNorm(BatchNormLayer::new(2)),
        ]);
        let mut f = TensorFile::new();
        net.write_tensors("enc.", &mut f);
        let mut other = Sequential::new(vec![
            Layer::Dense(DenseLayer::init(3, 2, &mut rng)),
            Layer::BatchNorm(BatchNormLayer::new(2)),
        ]);
        other.read_tensors("enc.", &f).unwrap();
        if let (Layer::Dense(a), Layer::Dense(b)) = (&net.layers[0], &other.layers[0]) {
            for (x, y) in a.w.iter().zip(b.w.iter()) {
                assert_eq!(*x as f32, *y as f32);
            }
        }
        let mut wrong = Sequential::new(vec![Layer::Dense(DenseLayer::init(2, 2, &mut rng))]);
        assert!(wrong.read_tensors("enc.", &f).is_err());
    }
}
