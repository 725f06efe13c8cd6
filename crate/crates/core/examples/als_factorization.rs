// Fits confidence-weighted matrix factorization with and without a content
// prior, and shows how an article nobody has saved falls back on its prior.

use cata::cf::{self, AlsConfig, FactorModel, Hyperparameters, PriorMatrix, Variant};
use cata::corpus::InteractionMatrix;
use cata::synth::{self, SynthConfig};
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let data = synth::generate(&SynthConfig {
        n_users: 150,
        n_articles: 200,
        n_clusters: 4,
        ..SynthConfig::default()
    })?;
    let hyper = Hyperparameters { d: 6, ..Hyperparameters::default() };
    let als = AlsConfig { max_sweeps: 15, tol: 1e-5 };
    let r = &data.interactions;

    let mut wrmf = FactorModel::init(r.n_users(), r.n_articles(), hyper, Variant::Wrmf, 0)?;
    let trace = cf::train_als(r, &mut wrmf, &PriorMatrix::zeros(r.n_articles(), 6), &als)?;
    println!("wrmf objective {:.2} -> {:.2} in {} sweeps", trace[0], trace[trace.len() - 1], wrmf.sweeps);

    // stand-in content vectors: a one-hot of the planted topic plus noise
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let theta = Array2::from_shape_fn((r.n_articles(), 6), |(j, k)| {
        (data.article_cluster[j] == k) as u8 as f64 + rng.gen_range(-0.05..0.05)
    });
    let prior = PriorMatrix::for_variant(Variant::Cata, r.n_articles(), 6, Some(&theta), None)?;
    let mut cata = FactorModel::init(r.n_users(), r.n_articles(), hyper, Variant::Cata, 0)?;
    let trace = cf::train_als(r, &mut cata, &prior, &als)?;
    println!("cata objective {:.2} -> {:.2} in {} sweeps", trace[0], trace[trace.len() - 1], cata.sweeps);

    // drop every reader of article 0 and refit
    let libs: Vec<Vec<u32>> = r.libraries().iter().map(|l| l.iter().copied().filter(|&j| j != 0).collect()).collect();
    let cold = InteractionMatrix::from_libraries(r.n_articles(), libs)?;
    let mut model = FactorModel::init(cold.n_users(), cold.n_articles(), hyper, Variant::Cata, 0)?;
    cf::train_als(&cold, &mut model, &prior, &als)?;
    let (v, t) = (model.v.row(0), prior.row(0));
    let cos = v.dot(&t) / (v.dot(&v).sqrt() * t.dot(&t).sqrt());
    println!("cold article 0: cosine(v, theta) = {cos:.4}, |v| / |theta| = {:.3}", (v.dot(&v) / t.dot(&t)).sqrt());

    // with no user signal at all the item update returns the prior exactly
    model.u.fill(0.0);
    cf::item_half_sweep(&cold, &mut model, &prior)?;
    assert_eq!(model.v, *prior.values());
    println!("with U = 0 every article factor equals its prior");

        Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
