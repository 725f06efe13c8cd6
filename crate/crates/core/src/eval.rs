//! Train/test splits and top-K ranking metrics.
//!
//! Each split moves `P` random articles of every user library into training
//! and holds out the rest. Rankings exclude the user's training articles, and
//! users with an empty held-out set do not contribute to averages.

use std::cmp::Ordering;
use std::fs;
use std::path::Path;

use ndarray::Array1;
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cf::FactorModel;
use crate::corpus::InteractionMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSpec {
    /// Articles per user placed in training (1 = sparse, 10 = dense).
    pub p: usize,
    pub seed: u64,
    /// Number of splits; split 0 is reserved for validation when there is
    /// more than one.
    pub n_repeats: usize,
}

impl SplitSpec {
    pub fn new(p: usize, seed: u64, n_repeats: usize) -> Self {
        SplitSpec { p, seed, n_repeats }
    }

    pub fn validate(&self) -> Result<()> {
        if self.p == 0 {
            return Err(Error::Config("P must be at least 1".into()));
        }
        if self.n_repeats == 0 {
            return Err(Error::Config("at least one split is required".into()));
        }
        Ok(())
    }

    /// Indices of the splits that enter reported averages.
    pub fn reporting_splits(&self) -> std::ops::Range<usize> {
        if self.n_repeats > 1 {
            1..self.n_repeats
        } else {
            0..self.n_repeats
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Split {
    pub train: InteractionMatrix,
    /// Held-out articles per user, sorted ascending.
    pub test: Vec<Vec<u32>>,
}

impl Split {
    pub fn n_test_users(&self) -> usize {
        self.test.iter().filter(|t| !t.is_empty()).count()
    }

    pub fn test_matrix(&self) -> Result<InteractionMatrix> {
        InteractionMatrix::from_libraries(self.train.n_articles(), self.test.clone())
    }
}

/// Builds split number `repeat` of `spec`. Users owning at most `P` articles
/// keep their whole library in training.
pub fn make_split(r: &InteractionMatrix, spec: &SplitSpec, repeat: usize) -> Result<Split> {
    spec.validate()?;
    if r.n_users() == 0 {
        return Err(Error::Empty("interaction matrix has no users".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(repeat as u64);
    let mut train = Vec::with_capacity(r.n_users());
    let mut test = Vec::with_capacity(r.n_users());
    for lib in r.libraries() {
        if lib.len() <= spec.p {
            train.push(lib.clone());
            test.push(Vec::new());
            continue;
        }
        let mut chosen = vec![false; lib.len()];
        for k in sample(&mut rng, lib.len(), spec.p) {
            chosen[k] = true;
        }
        let (tr, te): (Vec<_>, Vec<_>) = lib.iter().zip(&chosen).partition(|(_, &c)| c);
        train.push(tr.into_iter().map(|(&a, _)| a).collect());
        test.push(te.into_iter().map(|(&a, _)| a).collect());
    }
    Ok(Split {
        train: InteractionMatrix::from_libraries(r.n_articles(), train)?,
        test,
    })
}

/// The `k` highest-scoring articles outside `exclude` (sorted ascending), by
/// descending score with ties broken by ascending id. Returns fewer than `k`
/// when not enough articles remain.
pub fn top_k(scores: &[f64], exclude: &[u32], k: usize) -> Result<Vec<usize>> {
    if k == 0 {
        return Err(Error::Contract("K must be at least 1".into()));
    }
    if let Some(j) = scores.iter().position(|s| s.is_nan()) {
        return Err(Error::Numerical(format!("score of article {j} is NaN")));
    }
    let mut cand: Vec<usize> = (0..scores.len())
        .filter(|&j| exclude.binary_search(&(j as u32)).is_err())
        .collect();
    let by_rank = |&x: &usize, &y: &usize| -> Ordering {
        scores[y].partial_cmp(&scores[x]).expect("no NaN").then(x.cmp(&y))
    };
    if cand.len() > k {
        cand.select_nth_unstable_by(k - 1, by_rank);
        cand.truncate(k);
    }
    cand.sort_unstable_by(by_rank);
    Ok(cand)
}

fn check_metric_args(test: &[u32], k: usize) -> Result<()> {
    if test.is_empty() {
        return Err(Error::Contract("test set is empty".into()));
    }
    if k == 0 {
        return Err(Error::Contract("K must be at least 1".into()));
    }
    Ok(())
}

/// Fraction of `test` (sorted ascending) found among the first `k` entries.
pub fn recall_at_k(recommended: &[usize], test: &[u32], k: usize) -> Result<f64> {
    check_metric_args(test, k)?;
    let hits = recommended
        .iter()
        .take(k)
        .filter(|&&j| test.binary_search(&(j as u32)).is_ok())
        .count();
    Ok(hits as f64 / test.len() as f64)
}

/// `DCG@k / IDCG@k` with binary relevance and `1/log2(i+1)` discounts, ranks
/// starting at 1.
pub fn ndcg_at_k(recommended: &[usize], test: &[u32], k: usize) -> Result<f64> {
    check_metric_args(test, k)?;
    let discount = |i: usize| 1.0 / ((i + 1) as f64).log2();
    let dcg: f64 = recommended
        .iter()
        .take(k)
        .enumerate()
        .filter(|(_, &j)| test.binary_search(&(j as u32)).is_ok())
        .map(|(pos, _)| discount(pos + 1))
        .sum();
    let idcg: f64 = (1..=test.len().min(k)).map(discount).sum();
    Ok(dcg / idcg)
}

/// Anything that assigns a score to every article for a user.
pub trait Scorer: Sync {
    fn n_articles(&self) -> usize;
    fn scores(&self, user: usize) -> Result<Array1<f64>>;
}

impl Scorer for FactorModel {
    fn n_articles(&self) -> usize {
        FactorModel::n_articles(self)
    }

    fn scores(&self, user: usize) -> Result<Array1<f64>> {
        self.predict_scores(user)
    }
}

/// Scores every article by its number of training users.
#[derive(Debug, Clone)]
pub struct Popularity {
    counts: Array1<f64>,
}

impl Popularity {
    pub fn fit(train: &InteractionMatrix) -> Self {
        Popularity {
            counts: train.article_counts().into_iter().map(|c| c as f64).collect(),
        }
    }
}

impl Scorer for Popularity {
    fn n_articles(&self) -> usize {
        self.counts.len()
    }

    fn scores(&self, _user: usize) -> Result<Array1<f64>> {
        Ok(self.counts.clone())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AtK {
    pub k: usize,
    pub recall: f64,
    pub ndcg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitMetrics {
    pub split: usize,
    /// Users with a nonempty test set.
    pub n_users: usize,
    pub metrics: Vec<AtK>,
}

/// Per-user recall and nDCG at each K, averaged over users with held-out
/// articles.
pub fn evaluate(scorer: &dyn Scorer, split: &Split, ks: &[usize], split_index: usize) -> Result<SplitMetrics> {
    if ks.is_empty() || ks.contains(&0) {
        return Err(Error::Config("K list must be nonempty and positive".into()));
    }
    if scorer.n_articles() != split.train.n_articles() || split.test.len() != split.train.n_users() {
        return Err(Error::Contract("scorer and split dimensions disagree".into()));
    }
    let k_max = *ks.iter().max().expect("nonempty");
    let per_user: Vec<Option<Vec<(f64, f64)>>> = (0..split.train.n_users())
        .into_par_iter()
        .map(|i| {
            let test = &split.test[i];
            if test.is_empty() {
                return Ok(None);
            }
            let scores = scorer.scores(i)?;
            let scores = scores.as_slice().expect("contiguous scores");
            let ranked = top_k(scores, split.train.library(i), k_max)?;
            ks.iter()
                .map(|&k| Ok((recall_at_k(&ranked, test, k)?, ndcg_at_k(&ranked, test, k)?)))
                .collect::<Result<Vec<_>>>()
                .map(Some)
        })
        .collect::<Result<_>>()?;

    let mut sums = vec![(0.0, 0.0); ks.len()];
    let mut n_users = 0;
    for user in per_user.into_iter().flatten() {
        n_users += 1;
        for (s, (r, n)) in sums.iter_mut().zip(user) {
            s.0 += r;
            s.1 += n;
        }
    }
    if n_users == 0 {
        return Err(Error::Empty("no user has held-out articles".into()));
    }
    let metrics = ks
        .iter()
        .zip(sums)
        .map(|(&k, (r, n))| AtK {
            k,
            recall: r / n_users as f64,
            ndcg: n / n_users as f64,
        })
        .collect();
    Ok(SplitMetrics {
        split: split_index,
        n_users,
        metrics,
    })
}

/// Results of one model over one or more splits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub variant: String,
    /// Free-form protocol label, e.g. `sparse-p1`.
    pub setting: String,
    pub splits: Vec<SplitMetrics>,
    /// Means over `splits`, per K.
    pub mean: Vec<AtK>,
}

impl MetricReport {
    pub fn new(variant: impl Into<String>, setting: impl Into<String>, splits: Vec<SplitMetrics>) -> Result<Self> {
        let first = splits
            .first()
            .ok_or_else(|| Error::Empty("report needs at least one split".into()))?;
        let ks: Vec<usize> = first.metrics.iter().map(|m| m.k).collect();
        if splits.iter().any(|s| s.metrics.iter().map(|m| m.k).ne(ks.iter().copied())) {
            return Err(Error::Contract("splits were evaluated at different K lists".into()));
        }
        let n = splits.len() as f64;
        let mean = ks
            .iter()
            .enumerate()
            .map(|(c, &k)| AtK {
                k,
                recall: splits.iter().map(|s| s.metrics[c].recall).sum::<f64>() / n,
                ndcg: splits.iter().map(|s| s.metrics[c].ndcg).sum::<f64>() / n,
            })
            .collect();
        Ok(MetricReport {
            variant: variant.into(),
            setting: setting.into(),
            splits,
            mean,
        })
    }

    pub fn mean_at(&self, k: usize) -> Option<AtK> {
        self.mean.iter().copied().find(|m| m.k == k)
    }
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct CsvRow {
    pub variant: String,
    pub setting: String,
    /// Split index, or `mean` for the cross-split average.
    pub split: String,
    #[serde(rename = "K")]
    pub k: usize,
    pub recall: f64,
    pub ndcg: f64,
}

pub fn csv_rows(reports: &[MetricReport]) -> Vec<CsvRow> {
    let mut rows = Vec::new();
    for rep in reports {
        let tagged = rep
            .splits
            .iter()
            .map(|s| (s.split.to_string(), &s.metrics))
            .chain(std::iter::once(("mean".to_string(), &rep.mean)));
        for (split, metrics) in tagged {
            for m in metrics {
                rows.push(CsvRow {
                    variant: rep.variant.clone(),
                    setting: rep.setting.clone(),
                    split: split.clone(),
                    k: m.k,
                    recall: m.recall,
                    ndcg: m.ndcg,
                });
            }
        }
    }
    rows
}

pub fn write_csv(reports: &[MetricReport], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for row in csv_rows(reports) {
        w.serialize(row)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_json(reports: &[MetricReport], path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(reports)?;
    fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

pub fn read_json(path: &Path) -> Result<Vec<MetricReport>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

/// `(ours - baseline) / baseline × 100`; infinite when the baseline is zero
/// and ours is not, NaN when both are zero.
pub fn improvement_percent(ours: f64, baseline: f64) -> f64 {
    (ours - baseline) / baseline * 100.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImprovementRow {
    pub ours: String,
    pub baseline: String,
    #[serde(rename = "K")]
    pub k: usize,
    pub recall_improvement: f64,
    pub ndcg_improvement: f64,
}

/// Pairwise improvement of every report over every other, on cross-split means.
pub fn improvement_table(reports: &[MetricReport]) -> Vec<ImprovementRow> {
    let mut rows = Vec::new();
    for ours in reports {
        for base in reports {
            if std::ptr::eq(ours, base) {
                continue;
            }
            for m in &ours.mean {
                if let Some(b) = base.mean_at(m.k) {
                    rows.push(ImprovementRow {
                        ours: ours.variant.clone(),
                        baseline: base.variant.clone(),
                        k: m.k,
                        recall_improvement: improvement_percent(m.recall, b.recall),
                        ndcg_improvement: improvement_percent(m.ndcg, b.ndcg),
                    });
                }
            }
        }
    }
    rows
}

pub fn write_improvement_csv(rows: &[ImprovementRow], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
