//! Model inputs: the user×article interaction matrix, the article text
//! matrix, and the article tag/citation matrix.

mod bow;
pub mod cache;
pub mod files;
mod tags;
mod vocab;

use std::collections::BTreeSet;

use ndarray::Array2;

use crate::error::{Error, Result};

pub use bow::{build_bow, content_from_counts};
pub use tags::build_tag_matrix;
pub use vocab::{select_vocabulary, stop_words, tokenize, Vocabulary, VocabularyEntry};

/// One-class user×article feedback: a cell is 1 iff the pair is stored.
///
/// Libraries are kept sorted and deduplicated per user.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InteractionMatrix {
    n_articles: usize,
    libraries: Vec<Vec<u32>>,
}

impl InteractionMatrix {
    /// Builds from per-user article lists. Duplicates are dropped silently.
    pub fn from_libraries(n_articles: usize, libraries: Vec<Vec<u32>>) -> Result<Self> {
        let mut libraries = libraries;
        for (user, lib) in libraries.iter_mut().enumerate() {
            lib.sort_unstable();
            lib.dedup();
            if let Some(&last) = lib.last() {
                if last as usize >= n_articles {
                    return Err(Error::Bounds(format!(
                        "user {user} references article {last} but there are only {n_articles} articles"
                    )));
                }
            }
        }
        Ok(InteractionMatrix {
            n_articles,
            libraries,
        })
    }

    pub fn from_pairs(
        n_users: usize,
        n_articles: usize,
        pairs: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self> {
        let mut libraries = vec![Vec::new(); n_users];
        for (u, a) in pairs {
            if u >= n_users {
                return Err(Error::Bounds(format!(
                    "user {u} out of range (n_users = {n_users})"
                )));
            }
            if a >= n_articles {
                return Err(Error::Bounds(format!(
                    "article {a} out of range (n_articles = {n_articles})"
                )));
            }
            libraries[u].push(a as u32);
        }
        Self::from_libraries(n_articles, libraries)
    }

    pub fn n_users(&self) -> usize {
        self.libraries.len()
    }

    pub fn n_articles(&self) -> usize {
        self.n_articles
    }

    pub fn n_pairs(&self) -> usize {
        self.libraries.iter().map(Vec::len).sum()
    }

    /// Sorted article ids in user `i`'s library.
    pub fn library(&self, user: usize) -> &[u32] {
        &self.libraries[user]
    }

    pub fn libraries(&self) -> &[Vec<u32>] {
        &self.libraries
    }

    pub fn contains(&self, user: usize, article: usize) -> bool {
        self.libraries[user].binary_search(&(article as u32)).is_ok()
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.libraries
            .iter()
            .enumerate()
            .flat_map(|(u, lib)| lib.iter().map(move |&a| (u, a as usize)))
    }

    /// Users of each article, sorted. The article-major view used by the item half-sweep.
    pub fn article_users(&self) -> Vec<Vec<u32>> {
        let mut cols = vec![Vec::new(); self.n_articles];
        for (u, lib) in self.libraries.iter().enumerate() {
            for &a in lib {
                cols[a as usize].push(u as u32);
            }
        }
        cols
    }

    /// Number of users holding each article.
    pub fn article_counts(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.n_articles];
        for lib in &self.libraries {
            for &a in lib {
                counts[a as usize] += 1;
            }
        }
        counts
    }
}

/// Compressed sparse rows of real values.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseRows {
    n_cols: usize,
    indptr: Vec<usize>,
    indices: Vec<u32>,
    values: Vec<f64>,
}

impl SparseRows {
    /// Builds from per-row `(column, value)` lists. Columns within a row must be
    /// strictly increasing.
    pub fn from_rows(n_cols: usize, rows: Vec<Vec<(u32, f64)>>) -> Result<Self> {
        let mut indptr = Vec::with_capacity(rows.len() + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        indptr.push(0);
        for (r, row) in rows.into_iter().enumerate() {
            let mut prev: Option<u32> = None;
            for (c, v) in row {
                if c as usize >= n_cols {
                    return Err(Error::Bounds(format!(
                        "row {r}: column {c} out of range (n_cols = {n_cols})"
                    )));
                }
                if prev.is_some_and(|p| p >= c) {
                    return Err(Error::Contract(format!(
                        "row {r}: columns must be strictly increasing"
                    )));
                }
                prev = Some(c);
                indices.push(c);
                values.push(v);
            }
            indptr.push(indices.len());
        }
        Ok(SparseRows {
            n_cols,
            indptr,
            indices,
            values,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.indptr.len() - 1
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn row(&self, r: usize) -> (&[u32], &[f64]) {
        let (lo, hi) = (self.indptr[r], self.indptr[r + 1]);
        (&self.indices[lo..hi], &self.values[lo..hi])
    }

    /// Densifies the selected rows, in the given order.
    pub fn dense_rows(&self, rows: &[usize]) -> Array2<f64> {
        let mut out = Array2::zeros((rows.len(), self.n_cols));
        for (k, &r) in rows.iter().enumerate() {
            let (idx, vals) = self.row(r);
            for (&c, &v) in idx.iter().zip(vals) {
                out[[k, c as usize]] = v;
            }
        }
        out
    }

    pub fn to_dense(&self) -> Array2<f64> {
        let all: Vec<usize> = (0..self.n_rows()).collect();
        self.dense_rows(&all)
    }

    pub(crate) fn raw_parts(&self) -> (&[usize], &[u32], &[f64]) {
        (&self.indptr, &self.indices, &self.values)
    }

    pub(crate) fn from_raw_parts(
        n_cols: usize,
        indptr: Vec<usize>,
        indices: Vec<u32>,
        values: Vec<f64>,
    ) -> Result<Self> {
        let ok = !indptr.is_empty()
            && indptr[0] == 0
            && indptr.windows(2).all(|w| w[0] <= w[1])
            && *indptr.last().unwrap() == indices.len()
            && indices.len() == values.len()
            && indices.iter().all(|&c| (c as usize) < n_cols);
        if !ok {
            return Err(Error::Format("inconsistent sparse row layout".into()));
        }
        Ok(SparseRows {
            n_cols,
            indptr,
            indices,
            values,
        })
    }
}

/// Article×vocabulary bag-of-words, each nonempty row scaled so its maximum is 1.
#[derive(Debug, Clone, PartialEq)]
pub struct ContentMatrix {
    rows: SparseRows,
}

impl ContentMatrix {
    pub(crate) fn new(rows: SparseRows) -> Self {
        ContentMatrix { rows }
    }

    pub fn rows(&self) -> &SparseRows {
        &self.rows
    }

    pub fn n_articles(&self) -> usize {
        self.rows.n_rows()
    }

    pub fn vocab_size(&self) -> usize {
        self.rows.n_cols()
    }
}

/// Binary article×tag matrix after rare-tag filtering and citation propagation.
#[derive(Debug, Clone, PartialEq)]
pub struct TagMatrix {
    rows: SparseRows,
    /// Original tag id of each column.
    tag_ids: Vec<u32>,
}

impl TagMatrix {
    pub(crate) fn new(rows: SparseRows, tag_ids: Vec<u32>) -> Self {
        TagMatrix { rows, tag_ids }
    }

    pub fn rows(&self) -> &SparseRows {
        &self.rows
    }

    pub fn n_articles(&self) -> usize {
        self.rows.n_rows()
    }

    pub fn n_tags(&self) -> usize {
        self.rows.n_cols()
    }

    pub fn tag_ids(&self) -> &[u32] {
        &self.tag_ids
    }

    /// Column indices set in row `article`.
    pub fn support(&self, article: usize) -> BTreeSet<u32> {
        self.rows.row(article).0.iter().copied().collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interactions_dedup_and_bounds() {
        let r = InteractionMatrix::from_pairs(2, 6, [(0, 5), (0, 0), (0, 5), (1, 3)]).unwrap();
        assert_eq!(r.n_pairs(), 3);
        assert_eq!(r.library(0), &[0, 5]);
        assert!(r.contains(1, 3) && !r.contains(1, 0));
        assert_eq!(r.article_counts(), vec![1, 0, 0, 1, 0, 1]);
        assert_eq!(r.article_users()[5], vec![0]);
        assert!(matches!(
            InteractionMatrix::from_pairs(1, 3, [(0, 3)]),
            Err(Error::Bounds(_))
        ));
    }

    #[test]
    fn sparse_rows_reject_unsorted_columns() {
        assert!(SparseRows::from_rows(4, vec![vec![(2, 1.0), (1, 1.0)]]).is_err());
        assert!(SparseRows::from_rows(2, vec![vec![(2, 1.0)]]).is_err());
        let m = SparseRows::from_rows(3, vec![vec![(0, 0.5), (2, 1.0)], vec![]]).unwrap();
        assert_eq!(m.to_dense(), ndarray::array![[0.5, 0.0, 1.0], [0.0, 0.0, 0.0]]);
        assert_eq!(m.dense_rows(&[1, 0]).row(1).to_vec(), vec![0.5, 0.0, 1.0]);
    }
}
