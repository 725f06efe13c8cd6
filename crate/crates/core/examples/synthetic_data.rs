// Generates a small planted-cluster dataset and writes it in the on-disk
// formats `cata preprocess` reads.

use cata::synth::{self, SynthConfig};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = SynthConfig {
        n_users: 120,
        n_articles: 200,
        n_clusters: 4,
        seed: 7,
        ..SynthConfig::default()
    };
    let data = synth::generate(&cfg)?;
    let r = &data.interactions;
    println!("{} users, {} articles, {} pairs", r.n_users(), r.n_articles(), r.n_pairs());

    let same_cluster = r
        .pairs()
        .filter(|&(u, j)| data.user_cluster[u] == data.article_cluster[j])
        .count();
    println!("in-cluster pairs: {:.1}%", 100.0 * same_cluster as f64 / r.n_pairs() as f64);
    println!("article 0 ({} citations total): {}", data.citations.len(), &data.documents[0][..60]);

    let dir = std::env::temp_dir().join(format!("cata-synth-{}", std::process::id()));
    data.write_to(&dir)?;
    for f in [synth::USERS_FILE, synth::DOCS_FILE, synth::TAGS_FILE, synth::CITATIONS_FILE] {
        let len = std::fs::metadata(dir.join(f))?.len();
        println!("{f:>14}  {len} bytes");
    }
    std::fs::remove_dir_all(&dir)?;
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
