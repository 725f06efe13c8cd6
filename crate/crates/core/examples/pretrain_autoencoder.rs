// Pre-trains an attentive autoencoder on bag-of-words vectors and extracts
// the bottleneck representation used as the article prior.

use cata::autoencoder::{AttentiveAutoencoder, PretrainConfig};
use cata::corpus::{build_bow, select_vocabulary, stop_words, tokenize};
use cata::synth::{self, SynthConfig};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let data = synth::generate(&SynthConfig {
        n_users: 60,
        n_articles: 160,
        n_clusters: 4,
        ..SynthConfig::default()
    })?;
    let docs: Vec<Vec<String>> = data.documents.iter().map(|d| tokenize(d)).collect();
    let vocab = select_vocabulary(&docs, &stop_words(), 100)?;
    let bow = build_bow(&docs, &vocab);

    let mut ae = AttentiveAutoencoder::build(vocab.len(), &[32, 8], 1)?;
    println!("layers {:?}", ae.layer_dims());
    let before = ae.reconstruction_loss(bow.rows())?;
    let losses = ae.pretrain(
        bow.rows(),
        &PretrainConfig {
            epochs: 60,
            batch_size: 32,
            ..PretrainConfig::default()
        },
    )?;
    let after = ae.reconstruction_loss(bow.rows())?;
    println!("reconstruction loss {before:.4} -> {after:.4} over {} epochs", losses.len());

    let theta = ae.encode_rows(bow.rows())?;
    println!("theta {:?}", theta.dim());

    // nearest neighbour in theta space should usually share the planted topic
    let mut agree = 0;
    for i in 0..theta.nrows() {
        let nearest = (0..theta.nrows())
            .filter(|&j| j != i)
            .min_by(|&a, &b| {
                let da = (&theta.row(i) - &theta.row(a)).mapv(|v| v * v).sum();
                let db = (&theta.row(i) - &theta.row(b)).mapv(|v| v * v).sum();
                da.total_cmp(&db)
            })
            .unwrap();
        agree += (data.article_cluster[i] == data.article_cluster[nearest]) as usize;
    }
    println!("nearest neighbour shares topic: {agree}/{}", theta.nrows());
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
