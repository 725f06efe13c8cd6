use std::collections::{BTreeMap, BTreeSet};

use super::{SparseRows, TagMatrix};
use crate::error::{Error, Result};

/// Builds the binary article×tag matrix.
///
/// Tags held by fewer than `min_articles_per_tag` distinct articles are
/// dropped first and the survivors renumbered in ascending original id. Then,
/// for every citation `(citing, cited)`, the citing row gains every tag of the
/// cited article's row as it was *before* any propagation. Propagation is one
/// hop, so the result does not depend on citation order.
pub fn build_tag_matrix(
    n_articles: usize,
    assignments: &[(usize, u32)],
    citations: &[(usize, usize)],
    min_articles_per_tag: usize,
) -> Result<TagMatrix> {
    let mut original: Vec<BTreeSet<u32>> = vec![BTreeSet::new(); n_articles];
    for &(article, tag) in assignments {
        if article >= n_articles {
            return Err(Error::Bounds(format!(
                "tag assignment for article {article} (n_articles = {n_articles})"
            )));
        }
        original[article].insert(tag);
    }
    for &(x, y) in citations {
        if x >= n_articles || y >= n_articles {
            return Err(Error::Bounds(format!(
                "citation ({x}, {y}) references an unknown article (n_articles = {n_articles})"
            )));
        }
    }

    let mut tag_freq: BTreeMap<u32, usize> = BTreeMap::new();
    for row in &original {
        for &t in row {
            *tag_freq.entry(t).or_default() += 1;
        }
    }
    let kept: Vec<u32> = tag_freq
        .into_iter()
        .filter(|&(_, n)| n >= min_articles_per_tag)
        .map(|(t, _)| t)
        .collect();
    let column: BTreeMap<u32, u32> = kept
        .iter()
        .enumerate()
        .map(|(c, &t)| (t, c as u32))
        .collect();

    let filtered: Vec<BTreeSet<u32>> = original
        .iter()
        .map(|row| row.iter().filter_map(|t| column.get(t).copied()).collect())
        .collect();

    let mut propagated = filtered.clone();
    for &(x, y) in citations {
        propagated[x].extend(filtered[y].iter().copied());
    }

    let rows = propagated
        .into_iter()
        .map(|row| row.into_iter().map(|c| (c, 1.0)).collect())
        .collect();
    Ok(TagMatrix::new(SparseRows::from_rows(kept.len(), rows)?, kept))
}
