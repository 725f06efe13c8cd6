use std::collections::{HashMap, HashSet};

use crate::error::{Error, Result};

const STOP_WORDS: &str = include_str!("../../data/stopwords_en.txt");

/// The bundled English stop-word list.
pub fn stop_words() -> HashSet<String> {
    STOP_WORDS
        .lines()
        .map(str::trim)
        .filter(|w| !w.is_empty())
        .map(str::to_owned)
        .collect()
}

/// Lowercases and splits on anything that is not alphanumeric or an inner
/// apostrophe. Tokens shorter than two characters or without a letter are dropped.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !(c.is_alphanumeric() || c == '\''))
        .map(|t| t.trim_matches('\'').to_lowercase())
        .filter(|t| t.chars().count() >= 2 && t.chars().any(char::is_alphabetic))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct VocabularyEntry {
    pub token: String,
    /// Largest within-document count.
    pub max_tf: usize,
    /// Number of documents containing the token.
    pub df: usize,
    pub score: f64,
}

/// Selected tokens in column order (best score first).
#[derive(Debug, Clone, PartialEq)]
pub struct Vocabulary {
    entries: Vec<VocabularyEntry>,
    index: HashMap<String, usize>,
}

impl Vocabulary {
    pub fn from_entries(entries: Vec<VocabularyEntry>) -> Result<Self> {
        let mut index = HashMap::with_capacity(entries.len());
        for (i, e) in entries.iter().enumerate() {
            if index.insert(e.token.clone(), i).is_some() {
                return Err(Error::Contract(format!("duplicate token '{}'", e.token)));
            }
        }
        Ok(Vocabulary { entries, index })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[VocabularyEntry] {
        &self.entries
    }

    pub fn index_of(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    pub fn tokens(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|e| e.token.as_str())
    }
}

/// Picks the `top_n` non-stop tokens with the highest TF-IDF score, where
/// `score = max_tf * ln(n_docs / df)`. Ties go to the lexicographically
/// smaller token.
pub fn select_vocabulary(
    docs: &[Vec<String>],
    stop: &HashSet<String>,
    top_n: usize,
) -> Result<Vocabulary> {
    if top_n == 0 {
        return Err(Error::Config("vocabulary size must be at least 1".into()));
    }
    let mut stats: HashMap<&str, (usize, usize)> = HashMap::new();
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for doc in docs {
        counts.clear();
        for tok in doc {
            if !stop.contains(tok) {
                *counts.entry(tok.as_str()).or_default() += 1;
            }
        }
        for (&tok, &c) in &counts {
            let s = stats.entry(tok).or_default();
            s.0 = s.0.max(c);
            s.1 += 1;
        }
    }

    let n_docs = docs.len() as f64;
    let mut entries: Vec<VocabularyEntry> = stats
        .into_iter()
        .map(|(tok, (max_tf, df))| VocabularyEntry {
            token: tok.to_owned(),
            max_tf,
            df,
            score: max_tf as f64 * (n_docs / df as f64).ln(),
        })
        .collect();
    entries.sort_by(|a, b| b.score.total_cmp(&a.score).then_with(|| a.token.cmp(&b.token)));

    if entries.len() < top_n {
        log::warn!(
            "only {} distinct tokens available, fewer than the requested {top_n}",
            entries.len()
        );
    }
    entries.truncate(top_n);
    Vocabulary::from_entries(entries)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn docs(raw: &[&[&str]]) -> Vec<Vec<String>> {
        raw.iter()
            .map(|d| d.iter().map(|s| s.to_string()).collect())
            .collect()
    }

    #[test]
    fn picks_highest_tfidf_token() {
        // a: 1*ln(2/2) = 0, b: 2*ln 2, c: 1*ln 2
        let d = docs(&[&["a", "b", "b"], &["a", "c"]]);
        let v = select_vocabulary(&d, &HashSet::new(), 1).unwrap();
        assert_eq!(v.tokens().collect::<Vec<_>>(), vec!["b"]);
        let b = &v.entries()[0];
        assert_eq!((b.max_tf, b.df), (2, 1));
        assert!((b.score - 2.0 * 2f64.ln()).abs() < 1e-15);

        let all = select_vocabulary(&d, &HashSet::new(), 10).unwrap();
        assert_eq!(all.tokens().collect::<Vec<_>>(), vec!["b", "c", "a"]);
    }

    #[test]
    fn stop_words_removed_and_ties_lexicographic() {
        let d = docs(&[&["the", "zeta", "alpha"], &["the", "beta"]]);
        let stop: HashSet<String> = ["the".to_string()].into();
        let v = select_vocabulary(&d, &stop, 2).unwrap();
        assert_eq!(v.tokens().collect::<Vec<_>>(), vec!["alpha", "beta"]);
        assert_eq!(v.index_of("the"), None);
        assert_eq!(v.index_of("beta"), Some(1));
    }

    #[test]
    fn zero_top_n_is_rejected() {
        assert!(select_vocabulary(&[], &HashSet::new(), 0).is_err());
    }

    #[test]
    fn tokenizer_behaviour() {
        assert_eq!(
            tokenize("Don't PANIC: a 2nd-order model, 42 times!"),
            vec!["don't", "panic", "2nd", "order", "model", "times"]
        );
        assert!(stop_words().contains("the"));
        assert!(stop_words().contains("don't"));
    }
}
