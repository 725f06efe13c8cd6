//! Synthetic corpora with planted clusters.
//!
//! Every article and user belongs to one of `n_clusters` topics. Users mostly
//! collect articles from their own topic (popular ones more often), article
//! text mixes topic words with shared filler and stop words, tags are drawn
//! from a per-topic pool, and citations mostly stay within a topic.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use rand::distributions::WeightedIndex;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::files::{save_interactions, write_lines};
use crate::corpus::InteractionMatrix;
use crate::error::{Error, Result};

pub const USERS_FILE: &str = "users.dat";
pub const DOCS_FILE: &str = "docs.txt";
pub const TAGS_FILE: &str = "item-tag.dat";
pub const CITATIONS_FILE: &str = "citations.dat";

const STOP_FILLER: [&str; 8] = ["the", "of", "and", "in", "for", "with", "on", "is"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub n_users: usize,
    pub n_articles: usize,
    pub n_clusters: usize,
    pub min_library: usize,
    pub max_library: usize,
    /// Probability that a library entry comes from outside the user's topic.
    pub user_noise: f64,
    /// Zipf exponent of within-topic article popularity.
    pub popularity_skew: f64,
    pub words_per_topic: usize,
    pub shared_words: usize,
    pub doc_length: usize,
    /// Probability that a document token is a topic word.
    pub topic_word_rate: f64,
    pub tags_per_topic: usize,
    pub tags_per_article: usize,
    pub tag_noise: f64,
    pub citations_per_article: usize,
    pub citation_noise: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            n_users: 500,
            n_articles: 800,
            n_clusters: 10,
            min_library: 8,
            max_library: 20,
            user_noise: 0.1,
            popularity_skew: 0.6,
            words_per_topic: 25,
            shared_words: 60,
            doc_length: 40,
            topic_word_rate: 0.5,
            tags_per_topic: 6,
            tags_per_article: 3,
            tag_noise: 0.15,
            citations_per_article: 2,
            citation_noise: 0.1,
            seed: 0,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(format!("synthetic config: {m}")));
        if self.n_users == 0 || self.n_articles == 0 {
            return bad("need at least one user and one article");
        }
        if self.n_clusters == 0 || self.n_clusters > self.n_articles {
            return bad("cluster count must be in 1..=n_articles");
        }
        if self.min_library == 0 || self.min_library > self.max_library {
            return bad("library sizes must satisfy 1 <= min <= max");
        }
        if self.max_library > self.n_articles {
            return bad("max_library exceeds n_articles");
        }
        for (name, p) in [
            ("user_noise", self.user_noise),
            ("topic_word_rate", self.topic_word_rate),
            ("tag_noise", self.tag_noise),
            ("citation_noise", self.citation_noise),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return bad(&format!("{name} must be a probability"));
            }
        }
        if self.words_per_topic == 0 || self.doc_length == 0 || self.tags_per_topic == 0 {
            return bad("topic vocabulary, document length and tag pools must be nonempty");
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SynthDataset {
    pub interactions: InteractionMatrix,
    pub documents: Vec<String>,
    pub article_tags: Vec<Vec<u32>>,
    pub citations: Vec<(usize, usize)>,
    pub article_cluster: Vec<usize>,
    pub user_cluster: Vec<usize>,
}

fn topic_word(c: usize, k: usize) -> String {
    format!("topic{c}term{k}")
}

fn shared_word(k: usize) -> String {
    format!("common{k}")
}

pub fn generate(cfg: &SynthConfig) -> Result<SynthDataset> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let k = cfg.n_clusters;

    let article_cluster: Vec<usize> = (0..cfg.n_articles).map(|j| j % k).collect();
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); k];
    for (j, &c) in article_cluster.iter().enumerate() {
        members[c].push(j);
    }
    for m in &mut members {
        m.shuffle(&mut rng);
    }
    let popularity: Vec<WeightedIndex<f64>> = members
        .iter()
        .map(|m| {
            let w: Vec<f64> = (0..m.len()).map(|r| ((r + 1) as f64).powf(-cfg.popularity_skew)).collect();
            WeightedIndex::new(w).expect("positive weights")
        })
        .collect();

    let user_cluster: Vec<usize> = (0..cfg.n_users).map(|_| rng.gen_range(0..k)).collect();
    let mut libraries = Vec::with_capacity(cfg.n_users);
    for &c in &user_cluster {
        let size = rng.gen_range(cfg.min_library..=cfg.max_library);
        let mut lib = BTreeSet::new();
        let mut attempts = 0;
        while lib.len() < size && attempts < 100 * size {
            attempts += 1;
            let j = if rng.gen_bool(cfg.user_noise) {
                rng.gen_range(0..cfg.n_articles)
            } else {
                members[c][popularity[c].sample(&mut rng)]
            };
            lib.insert(j as u32);
        }
        libraries.push(lib.into_iter().collect());
    }
    let interactions = InteractionMatrix::from_libraries(cfg.n_articles, libraries)?;

    let documents = article_cluster
        .iter()
        .map(|&c| {
            let words: Vec<String> = (0..cfg.doc_length)
                .map(|_| {
                    let x: f64 = rng.gen();
                    if x < cfg.topic_word_rate {
                        topic_word(c, rng.gen_range(0..cfg.words_per_topic))
                    } else if cfg.shared_words > 0 && x < cfg.topic_word_rate + (1.0 - cfg.topic_word_rate) * 0.7 {
                        shared_word(rng.gen_range(0..cfg.shared_words))
                    } else {
                        STOP_FILLER.choose(&mut rng).expect("nonempty").to_string()
                    }
                })
                .collect();
            words.join(" ")
        })
        .collect();

    let n_tags = k * cfg.tags_per_topic;
    let article_tags = article_cluster
        .iter()
        .map(|&c| {
            let mut tags = BTreeSet::new();
            for _ in 0..cfg.tags_per_article {
                let t = if rng.gen_bool(cfg.tag_noise) {
                    rng.gen_range(0..n_tags)
                } else {
                    c * cfg.tags_per_topic + rng.gen_range(0..cfg.tags_per_topic)
                };
                tags.insert(t as u32);
            }
            tags.into_iter().collect()
        })
        .collect();

    let mut citations = Vec::new();
    for (j, &c) in article_cluster.iter().enumerate() {
        for _ in 0..cfg.citations_per_article {
            let target = if rng.gen_bool(cfg.citation_noise) {
                rng.gen_range(0..cfg.n_articles)
            } else {
                *members[c].choose(&mut rng).expect("nonempty cluster")
            };
            if target != j {
                citations.push((j, target));
            }
        }
    }
    citations.sort_unstable();
    citations.dedup();

    Ok(SynthDataset {
        interactions,
        documents,
        article_tags,
        citations,
        article_cluster,
        user_cluster,
    })
}

impl SynthDataset {
    /// Writes the raw files (`users.dat`, `docs.txt`, `item-tag.dat`,
    /// `citations.dat`) into `dir`, creating it if needed.
    pub fn write_to(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        save_interactions(&dir.join(USERS_FILE), &self.interactions)?;
        write_lines(&dir.join(DOCS_FILE), &self.documents)?;
        write_lines(
            &dir.join(TAGS_FILE),
            self.article_tags.iter().map(|t| {
                std::iter::once(t.len().to_string())
                    .chain(t.iter().map(u32::to_string))
                    .collect::<Vec<_>>()
                    .join(" ")
            }),
        )?;
        write_lines(
            &dir.join(CITATIONS_FILE),
            self.citations.iter().map(|(a, b)| format!("{a} {b}")),
        )
    }
}
