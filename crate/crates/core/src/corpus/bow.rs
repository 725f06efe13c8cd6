use std::collections::BTreeMap;

use super::{ContentMatrix, SparseRows, Vocabulary};
use crate::error::Result;

/// Counts vocabulary tokens per document and divides each row by its maximum.
/// Out-of-vocabulary tokens are ignored; documents without any vocabulary token
/// become zero rows.
pub fn build_bow(docs: &[Vec<String>], vocab: &Vocabulary) -> ContentMatrix {
    let rows = docs
        .iter()
        .map(|doc| {
            let mut counts: BTreeMap<u32, u32> = BTreeMap::new();
            for tok in doc {
                if let Some(c) = vocab.index_of(tok) {
                    *counts.entry(c as u32).or_default() += 1;
                }
            }
            counts.into_iter().collect::<Vec<_>>()
        })
        .collect();
    content_from_counts(vocab.len(), rows).expect("vocabulary indices are in range")
}

/// Max-normalizes raw `(term, count)` rows, e.g. as read from a `mult.dat` file.
/// Zero counts are dropped and repeated terms within a row are summed.
pub fn content_from_counts(vocab_size: usize, rows: Vec<Vec<(u32, u32)>>) -> Result<ContentMatrix> {
    let normalized = rows
        .into_iter()
        .map(|row| {
            let mut merged: BTreeMap<u32, u32> = BTreeMap::new();
            for (t, c) in row {
                if c > 0 {
                    *merged.entry(t).or_default() += c;
                }
            }
            let max = merged.values().copied().max().unwrap_or(0) as f64;
            merged
                .into_iter()
                .map(|(t, c)| (t, c as f64 / max))
                .collect::<Vec<_>>()
        })
        .collect();
    Ok(ContentMatrix::new(SparseRows::from_rows(vocab_size, normalized)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::select_vocabulary;
    use std::collections::HashSet;

    fn toks(s: &str) -> Vec<String> {
        s.split_whitespace().map(str::to_owned).collect()
    }

    #[test]
    fn max_normalization() {
        let m = content_from_counts(3, vec![vec![(0, 2), (1, 1)], vec![]]).unwrap();
        assert_eq!(m.rows().to_dense().row(0).to_vec(), vec![1.0, 0.5, 0.0]);
        assert_eq!(m.rows().row(1).0.len(), 0);
    }

    #[test]
    fn out_of_vocab_dropped_and_identical_docs_identical_rows() {
        let docs = vec![toks("x y y z"), toks("y x y z"), toks("w"), toks("x q")];
        let vocab = select_vocabulary(&docs, &HashSet::new(), 3).unwrap();
        let m = build_bow(&docs, &vocab);
        assert_eq!(m.n_articles(), 4);
        assert_eq!(m.rows().row(0), m.rows().row(1));
        assert!(vocab.index_of("w").is_some() || m.rows().row(2).0.is_empty());
        for r in 0..4 {
            let (_, vals) = m.rows().row(r);
            if !vals.is_empty() {
                assert_eq!(vals.iter().cloned().fold(0.0, f64::max), 1.0);
            }
            assert!(vals.iter().all(|&v| v > 0.0 && v <= 1.0));
        }
    }
}
