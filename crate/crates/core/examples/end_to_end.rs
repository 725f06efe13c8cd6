// The full preprocess, train, evaluate, recommend sequence on a synthetic
// dataset, driven through the library rather than the binary.

use cata::pipeline::{self, ExperimentConfig};
use cata::synth::{self, SynthConfig};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let root = std::env::temp_dir().join(format!("cata-e2e-{}", std::process::id()));
    let data_dir = root.join("data");
    synth::generate(&SynthConfig {
        n_users: 120,
        n_articles: 180,
        n_clusters: 4,
        ..SynthConfig::default()
    })?
    .write_to(&data_dir)?;

    let cfg = ExperimentConfig {
        data_dir,
        out_dir: root.join("out"),
        models: ["pop", "wrmf", "cata++"].iter().map(|m| m.parse()).collect::<cata::Result<_>>()?,
        n_repeats: 2,
        d: 8,
        widths: vec![48, 8],
        epochs: 20,
        batch_size: 32,
        vocab_size: 150,
        min_articles_per_tag: 2,
        ks: vec![10, 50],
        ..ExperimentConfig::default()
    };
    cfg.validate()?;

    let manifest = pipeline::preprocess(&cfg)?;
    println!("{} users, {} articles, {} pairs", manifest.n_users, manifest.n_articles, manifest.n_pairs);
    for run in pipeline::train(&cfg)? {
        println!("trained {} in {}", run.model, run.run_dir.display());
    }
    let out = pipeline::evaluate(&cfg, false)?;
    for rep in &out.reports {
        let m = rep.mean_at(50).expect("K=50 requested");
        println!("{:<7} recall@50 {:.4}  ndcg@50 {:.4}", rep.variant, m.recall, m.ndcg);
    }
    let cata_only = ExperimentConfig {
        models: vec!["cata++".parse()?],
        ..cfg.clone()
    };
    for rec in pipeline::recommend(&cata_only, 0, 5, 1)? {
        println!("user 0 -> article {} ({:.3})", rec.article, rec.score);
    }
    std::fs::remove_dir_all(&root)?;
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
