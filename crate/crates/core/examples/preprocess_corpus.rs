// Turns raw article text and tags into the matrices the autoencoders train on.

use cata::corpus::{build_bow, build_tag_matrix, select_vocabulary, stop_words, tokenize};
use cata::synth::{self, SynthConfig};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let data = synth::generate(&SynthConfig {
        n_users: 80,
        n_articles: 150,
        n_clusters: 3,
        ..SynthConfig::default()
    })?;

    let docs: Vec<Vec<String>> = data.documents.iter().map(|d| tokenize(d)).collect();
    let vocab = select_vocabulary(&docs, &stop_words(), 120)?;
    let bow = build_bow(&docs, &vocab);
    println!("vocabulary {} terms, bag-of-words nnz {}", vocab.len(), bow.rows().nnz());
    for e in vocab.entries().iter().take(5) {
        println!("  {e:?}");
    }

    let assignments: Vec<(usize, u32)> = data
        .article_tags
        .iter()
        .enumerate()
        .flat_map(|(j, tags)| tags.iter().map(move |&t| (j, t)))
        .collect();
    let plain = build_tag_matrix(150, &assignments, &[], 3)?;
    let cited = build_tag_matrix(150, &assignments, &data.citations, 3)?;
    println!(
        "tags kept {}, tag nnz {} before citations, {} after",
        cited.n_tags(),
        plain.rows().nnz(),
        cited.rows().nnz()
    );
    println!("article 0 tag support: {:?}", cited.support(0));
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
