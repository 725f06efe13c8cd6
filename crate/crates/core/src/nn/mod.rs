//! Dense network building blocks with hand-written reverse-mode gradients.

pub mod gradcheck;
mod layers;
mod loss;
mod net;
mod optim;

pub use layers::{
    attention_backward, attention_bottleneck, attention_forward, relu, relu_backward, sigmoid,
    sigmoid_backward, softmax, BatchNormCache, BatchNormLayer, DenseLayer,
};
pub use loss::{bce_grad, bce_loss, EPS as BCE_EPS};
pub use net::{Gradients, GradientTape, Layer, LayerGrad, Sequential};
pub use optim::Adam;
