// Verifies the hand-written backward passes against central differences.

use cata::nn::gradcheck::check_sequential;
use cata::nn::{bce_grad, bce_loss, BatchNormLayer, DenseLayer, Layer, Sequential};
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let cases: Vec<(&str, Vec<Layer>)> = vec![
        ("dense", vec![Layer::Dense(DenseLayer::init(6, 6, &mut rng)), Layer::Sigmoid]),
        (
            "dense+relu",
            vec![
                Layer::Dense(DenseLayer::init(6, 4, &mut rng)),
                Layer::Relu,
                Layer::Dense(DenseLayer::init(4, 6, &mut rng)),
                Layer::Sigmoid,
            ],
        ),
        (
            "batchnorm",
            vec![
                Layer::Dense(DenseLayer::init(6, 4, &mut rng)),
                Layer::BatchNorm(BatchNormLayer::new(4)),
                Layer::Dense(DenseLayer::init(4, 6, &mut rng)),
                Layer::Sigmoid,
            ],
        ),
        (
            "attention",
            vec![
                Layer::Dense(DenseLayer::init(6, 3, &mut rng)),
                Layer::Attention,
                Layer::Dense(DenseLayer::init(3, 6, &mut rng)),
                Layer::Sigmoid,
            ],
        ),
    ];

    let x = Array2::from_shape_fn((8, 6), |_| rng.gen_range(0.0..1.0));
    let target = x.mapv(|v| if v > 0.5 { 1.0 } else { 0.0 });
    for (name, layers) in cases {
        let net = Sequential::new(layers);
        let report = check_sequential(&net, &x, |p| (bce_loss(p, &target), bce_grad(p, &target)), 1e-5)?;
        println!(
            "{name:<11} {:>4} entries  max rel error {:.2e}",
            report.n_checked, report.max_rel_error
        );
        assert!(report.max_rel_error < 1e-4);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
