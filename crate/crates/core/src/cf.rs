//! Confidence-weighted matrix factorization with per-article prior means,
//! trained by alternating least squares.
//!
//! The objective summed over *every* user×article cell is
//!
//! ```text
//! L = Σ_ij c_ij/2 (p_ij - u_i·v_j)² + λ_u/2 Σ_i |u_i|² + λ_v/2 Σ_j |v_j - prior_j|²
//! ```
//!
//! with `c_ij = a` on observed cells and `b` elsewhere. The prior is zero for
//! plain WRMF, the text representation for CATA, the tag representation for
//! the tags-only ablation, and their sum for CATA++.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use ndarray::{Array1, Array2, ArrayView1};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::InteractionMatrix;
use crate::error::{Error, Result};
use crate::linalg::solve_spd;
use crate::tensorfile::{Tensor, TensorFile};

/// Which content prior the article factors are pulled towards.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variant {
    #[serde(rename = "wrmf")]
    Wrmf,
    #[serde(rename = "cata")]
    Cata,
    #[serde(rename = "cata-tags")]
    CataTags,
    #[serde(rename = "cata++")]
    CataPlusPlus,
}

impl Variant {
    pub fn uses_text(self) -> bool {
        matches!(self, Variant::Cata | Variant::CataPlusPlus)
    }

    pub fn uses_tags(self) -> bool {
        matches!(self, Variant::CataTags | Variant::CataPlusPlus)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Wrmf => "wrmf",
            Variant::Cata => "cata",
            Variant::CataTags => "cata-tags",
            Variant::CataPlusPlus => "cata++",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "wrmf" => Ok(Variant::Wrmf),
            "cata" => Ok(Variant::Cata),
            "cata-tags" => Ok(Variant::CataTags),
            "cata++" => Ok(Variant::CataPlusPlus),
            _ => Err(Error::Config(format!("unknown factor model variant '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hyperparameters {
    pub d: usize,
    pub lambda_u: f64,
    pub lambda_v: f64,
    /// Confidence of observed cells.
    pub a: f64,
    /// Confidence of unobserved cells.
    pub b: f64,
}

impl Default for Hyperparameters {
    fn default() -> Self {
        Hyperparameters {
            d: 50,
            lambda_u: 10.0,
            lambda_v: 0.1,
            a: 1.0,
            b: 0.01,
        }
    }
}

impl Hyperparameters {
    pub fn validate(&self) -> Result<()> {
        if self.d == 0 {
            return Err(Error::Config("factor dimension must be positive".into()));
        }
        if !(self.a > self.b && self.b > 0.0) {
            return Err(Error::Config(format!(
                "confidences must satisfy a > b > 0 (a = {}, b = {})",
                self.a, self.b
            )));
        }
        if !(self.lambda_u >= 0.0 && self.lambda_v >= 0.0) {
            return Err(Error::Config("regularization weights must be nonnegative".into()));
        }
        Ok(())
    }
}

/// Per-article prior means, m × d.
#[derive(Debug, Clone, PartialEq)]
pub struct PriorMatrix(Array2<f64>);

impl PriorMatrix {
    pub fn zeros(m: usize, d: usize) -> Self {
        PriorMatrix(Array2::zeros((m, d)))
    }

    pub fn new(values: Array2<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical("prior contains non-finite values".into()));
        }
        Ok(PriorMatrix(values))
    }

    /// Assembles the prior a variant calls for from the text (`theta`) and
    /// tag (`gamma`) representations.
    pub fn for_variant(
        variant: Variant,
        m: usize,
        d: usize,
        theta: Option<&Array2<f64>>,
        gamma: Option<&Array2<f64>>,
    ) -> Result<Self> {
        let need = |x: Option<&Array2<f64>>, what: &str| -> Result<Array2<f64>> {
            let x = x.ok_or_else(|| {
                Error::Contract(format!("variant {variant} needs the {what} representation"))
            })?;
            if x.dim() != (m, d) {
                return Err(Error::Contract(format!(
                    "{what} representation is {:?}, expected ({m}, {d})",
                    x.dim()
                )));
            }
            Ok(x.clone())
        };
        let values = match variant {
            Variant::Wrmf => Array2::zeros((m, d)),
            Variant::Cata => need(theta, "text")?,
            Variant::CataTags => need(gamma, "tag")?,
            Variant::CataPlusPlus => need(theta, "text")? + &need(gamma, "tag")?,
        };
        Self::new(values)
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.0
    }

    pub fn row(&self, j: usize) -> ArrayView1<'_, f64> {
        self.0.row(j)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FactorModel {
    /// n × d
    pub u: Array2<f64>,
    /// m × d
    pub v: Array2<f64>,
    pub hyper: Hyperparameters,
    pub variant: Variant,
    /// Completed ALS sweeps.
    pub sweeps: usize,
}

impl FactorModel {
    /// Factors drawn uniformly from `[0, 1/√d]`.
    pub fn init(
        n_users: usize,
        n_articles: usize,
        hyper: Hyperparameters,
        variant: Variant,
        seed: u64,
    ) -> Result<Self> {
        hyper.validate()?;
        let d = hyper.d;
        let hi = 1.0 / (d as f64).sqrt();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = Array2::from_shape_fn((n_users, d), |_| rng.gen_range(0.0..=hi));
        let v = Array2::from_shape_fn((n_articles, d), |_| rng.gen_range(0.0..=hi));
        Ok(FactorModel {
            u,
            v,
            hyper,
            variant,
            sweeps: 0,
        })
    }

    pub fn n_users(&self) -> usize {
        self.u.nrows()
    }

    pub fn n_articles(&self) -> usize {
        self.v.nrows()
    }

    fn check(&self, r: &InteractionMatrix, prior: &PriorMatrix) -> Result<()> {
        let d = self.hyper.d;
        if self.u.dim() != (r.n_users(), d) || self.v.dim() != (r.n_articles(), d) {
            return Err(Error::Contract(format!(
                "factor shapes {:?}/{:?} do not match {} users × {} articles, d = {d}",
                self.u.dim(),
                self.v.dim(),
                r.n_users(),
                r.n_articles()
            )));
        }
        if prior.values().dim() != (r.n_articles(), d) {
            return Err(Error::Contract(format!(
                "prior is {:?}, expected ({}, {d})",
                prior.values().dim(),
                r.n_articles()
            )));
        }
        Ok(())
    }

    /// `scores_i = u_i Vᵀ`.
    pub fn predict_scores(&self, user: usize) -> Result<Array1<f64>> {
        if user >= self.n_users() {
            return Err(Error::Bounds(format!(
                "user {user} out of range (n_users = {})",
                self.n_users()
            )));
        }
        Ok(self.v.dot(&self.u.row(user)))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut f = TensorFile::new();
        f.set_meta("kind", "factor-model");
        f.set_meta("variant", self.variant);
        f.set_meta("d", self.hyper.d);
        f.set_meta("lambda_u", self.hyper.lambda_u);
        f.set_meta("lambda_v", self.hyper.lambda_v);
        f.set_meta("a", self.hyper.a);
        f.set_meta("b", self.hyper.b);
        f.set_meta("sweeps", self.sweeps);
        f.push("U", Tensor::from_matrix(&self.u));
        f.push("V", Tensor::from_matrix(&self.v));
        f.save(path)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let f = TensorFile::load(path)?;
        fn num<T: FromStr>(f: &TensorFile, key: &str) -> Result<T> {
            f.meta_value(key)?
                .parse()
                .map_err(|_| Error::Format(format!("bad metadata value for '{key}'")))
        }
        let hyper = Hyperparameters {
            d: num(&f, "d")?,
            lambda_u: num(&f, "lambda_u")?,
            lambda_v: num(&f, "lambda_v")?,
            a: num(&f, "a")?,
            b: num(&f, "b")?,
        };
        let model = FactorModel {
            u: f.get("U")?.to_matrix()?,
            v: f.get("V")?.to_matrix()?,
            hyper,
            variant: f.meta_value("variant")?.parse()?,
            sweeps: num(&f, "sweeps")?,
        };
        if model.u.ncols() != hyper.d || model.v.ncols() != hyper.d {
            return Err(Error::Format("factor width does not match d".into()));
        }
        Ok(model)
    }
}

fn gram(m: &Array2<f64>) -> Array2<f64> {
    m.t().dot(m)
}

/// Evaluates the full objective. Unobserved cells are handled in closed form
/// via the Gram matrices, so the cost is O((n + m) d² + |R| d).
pub fn objective(r: &InteractionMatrix, model: &FactorModel, prior: &PriorMatrix) -> Result<f64> {
    model.check(r, prior)?;
    let Hyperparameters { lambda_u, lambda_v, a, b, .. } = model.hyper;
    let (gu, gv) = (gram(&model.u), gram(&model.v));
    let mut loss = 0.5 * b * (&gu * &gv).sum();
    for (i, j) in r.pairs() {
        let s = model.u.row(i).dot(&model.v.row(j));
        loss += 0.5 * a * (1.0 - s) * (1.0 - s) - 0.5 * b * s * s;
    }
    loss += 0.5 * lambda_u * model.u.iter().map(|x| x * x).sum::<f64>();
    let dv = &model.v - prior.values();
    loss += 0.5 * lambda_v * dv.iter().map(|x| x * x).sum::<f64>();
    Ok(loss)
}

/// Solves one row of the alternating problem.
///
/// With `other` the fixed factor matrix, `observed` the rows of `other` this
/// row interacts with, and `prior` the row's prior mean, returns
/// `prior + A⁻¹ (a Σ_obs o - (b G + (a-b) Σ_obs o oᵀ) prior)` where
/// `A = b G + (a-b) Σ_obs o oᵀ + λ I`. Expanding gives the familiar
/// `A⁻¹ (a Σ_obs o + λ prior)`; the shifted form returns the prior exactly when
/// the data term vanishes.
fn solve_row(
    other: &Array2<f64>,
    other_gram: &Array2<f64>,
    observed: &[u32],
    prior: Option<ArrayView1<f64>>,
    lambda: f64,
    a: f64,
    b: f64,
) -> Result<Array1<f64>> {
    let d = other.ncols();
    let mut lhs = other_gram * b;
    let mut rhs = Array1::<f64>::zeros(d);
    for &k in observed {
        let o = other.row(k as usize);
        for p in 0..d {
            let op = o[p] * (a - b);
            for q in 0..d {
                lhs[[p, q]] += op * o[q];
            }
        }
        rhs.scaled_add(a, &o);
    }
    if let Some(prior) = prior {
        rhs -= &lhs.dot(&prior);
    }
    for p in 0..d {
        lhs[[p, p]] += lambda;
    }
    let delta = solve_spd(&lhs, rhs.view())?;
    Ok(match prior {
        Some(prior) => &prior + &delta,
        None => delta,
    })
}

/// Closed-form minimizer of the objective over `u_i` with `V` fixed.
pub fn update_user(r: &InteractionMatrix, model: &FactorModel, user: usize) -> Result<Array1<f64>> {
    let h = &model.hyper;
    solve_row(&model.v, &gram(&model.v), r.library(user), None, h.lambda_u, h.a, h.b)
}

/// Closed-form minimizer of the objective over `v_j` with `U` fixed.
pub fn update_item(
    r: &InteractionMatrix,
    model: &FactorModel,
    prior: &PriorMatrix,
    article: usize,
) -> Result<Array1<f64>> {
    let h = &model.hyper;
    let users: Vec<u32> = (0..r.n_users())
        .filter(|&i| r.contains(i, article))
        .map(|i| i as u32)
        .collect();
    solve_row(
        &model.u,
        &gram(&model.u),
        &users,
        Some(prior.row(article)),
        h.lambda_v,
        h.a,
        h.b,
    )
}

/// Solves every user row in parallel (V fixed).
pub fn user_half_sweep(r: &InteractionMatrix, model: &mut FactorModel) -> Result<()> {
    let h = model.hyper;
    let gv = gram(&model.v);
    let v = &model.v;
    let rows: Vec<Array1<f64>> = (0..r.n_users())
        .into_par_iter()
        .map(|i| solve_row(v, &gv, r.library(i), None, h.lambda_u, h.a, h.b))
        .collect::<Result<_>>()?;
    for (i, row) in rows.into_iter().enumerate() {
        model.u.row_mut(i).assign(&row);
    }
    Ok(())
}

/// Solves every article row in parallel (U fixed).
pub fn item_half_sweep(
    r: &InteractionMatrix,
    model: &mut FactorModel,
    prior: &PriorMatrix,
) -> Result<()> {
    let h = model.hyper;
    let gu = gram(&model.u);
    let u = &model.u;
    let cols = r.article_users();
    let rows: Vec<Array1<f64>> = cols
        .par_iter()
        .enumerate()
        .map(|(j, users)| solve_row(u, &gu, users, Some(prior.row(j)), h.lambda_v, h.a, h.b))
        .collect::<Result<_>>()?;
    for (j, row) in rows.into_iter().enumerate() {
        model.v.row_mut(j).assign(&row);
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlsConfig {
    pub max_sweeps: usize,
    /// Stop once the relative objective decrease of a sweep falls below this.
    pub tol: f64,
}

impl Default for AlsConfig {
    fn default() -> Self {
        AlsConfig {
            max_sweeps: 50,
            tol: 1e-4,
        }
    }
}

/// Allowed relative objective increase per sweep (rounding noise).
pub const MONOTONE_SLACK: f64 = 1e-9;

/// Alternates user and article half-sweeps until convergence. Returns the
/// objective before the first sweep followed by its value after each sweep.
pub fn train_als(
    r: &InteractionMatrix,
    model: &mut FactorModel,
    prior: &PriorMatrix,
    cfg: &AlsConfig,
) -> Result<Vec<f64>> {
    model.hyper.validate()?;
    model.check(r, prior)?;
    let mut trace = vec![objective(r, model, prior)?];
    for _ in 0..cfg.max_sweeps {
        user_half_sweep(r, model)?;
        item_half_sweep(r, model, prior)?;
        model.sweeps += 1;
        let prev = *trace.last().expect("nonempty trace");
        let cur = objective(r, model, prior)?;
        if !cur.is_finite() {
            return Err(Error::Numerical(format!(
                "objective became non-finite after sweep {}",
                model.sweeps
            )));
        }
        let scale = prev.abs().max(f64::MIN_POSITIVE);
        if cur > prev + MONOTONE_SLACK * scale {
            return Err(Error::Numerical(format!(
                "objective increased from {prev} to {cur} in sweep {}",
                model.sweeps
            )));
        }
        trace.push(cur);
        log::debug!("als sweep {}: objective {cur:.6}", model.sweeps);
        if (prev - cur) / scale < cfg.tol {
            break;
        }
    }
    Ok(trace)
}

/// Articles ordered by training popularity, ties by ascending id.
pub fn pop_baseline(r_train: &InteractionMatrix) -> Vec<usize> {
    let counts = r_train.article_counts();
    let mut order: Vec<usize> = (0..counts.len()).collect();
    order.sort_by(|&x, &y| counts[y].cmp(&counts[x]).then(x.cmp(&y)));
    order
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;

    fn hyper(d: usize) -> Hyperparameters {
        Hyperparameters {
            d,
            lambda_u: 0.5,
            lambda_v: 0.3,
            a: 1.0,
            b: 0.05,
        }
    }

    fn random_instance(n: usize, m: usize, d: usize, seed: u64) -> (InteractionMatrix, FactorModel, PriorMatrix) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pairs: Vec<(usize, usize)> = (0..n)
            .flat_map(|i| (0..m).map(move |j| (i, j)))
            .filter(|_| rng.gen_bool(0.3))
            .collect();
        let r = InteractionMatrix::from_pairs(n, m, pairs).unwrap();
        let mut model = FactorModel::init(n, m, hyper(d), Variant::Cata, seed).unwrap();
        model.u.mapv_inplace(|_| rng.gen_range(-1.0..1.0));
        let prior = PriorMatrix::new(Array2::from_shape_fn((m, d), |_| rng.gen_range(-1.0..1.0))).unwrap();
        (r, model, prior)
    }

    #[test]
    fn objective_of_zero_factors() {
        let r = InteractionMatrix::from_pairs(3, 4, [(0, 1), (1, 1), (2, 3)]).unwrap();
        let mut m = FactorModel::init(3, 4, hyper(2), Variant::Wrmf, 0).unwrap();
        m.u.fill(0.0);
        m.v.fill(0.0);
        let o = objective(&r, &m, &PriorMatrix::zeros(4, 2)).unwrap();
        assert_abs_diff_eq!(o, 0.5 * 3.0, epsilon = 1e-15);
    }

    #[test]
    fn objective_perfect_fit_is_zero() {
        let r = InteractionMatrix::from_pairs(2, 2, [(0, 0), (0, 1), (1, 0), (1, 1)]).unwrap();
        let mut m = FactorModel::init(2, 2, hyper(1), Variant::Wrmf, 0).unwrap();
        m.hyper.lambda_u = 0.0;
        m.hyper.lambda_v = 0.0;
        m.u = array![[1.0], [1.0]];
        m.v = array![[1.0], [1.0]];
        assert_abs_diff_eq!(objective(&r, &m, &PriorMatrix::zeros(2, 1)).unwrap(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn user_update_scalar_case() {
        let r = InteractionMatrix::from_pairs(1, 2, [(0, 0)]).unwrap();
        let mut m = FactorModel::init(
            1,
            2,
            Hyperparameters { d: 1, lambda_u: 0.1, lambda_v: 0.1, a: 1.0, b: 0.01 },
            Variant::Wrmf,
            0,
        )
        .unwrap();
        m.v = array![[1.0], [1.0]];
        let u = update_user(&r, &m, 0).unwrap();
        // (a·1 + b·1 + λ)⁻¹ · a
        assert_abs_diff_eq!(u[0], 1.0 / 1.11, epsilon = 1e-12);
    }

    #[test]
    fn user_without_items_goes_to_zero() {
        let r = InteractionMatrix::from_pairs(2, 3, [(0, 2)]).unwrap();
        let m = FactorModel::init(2, 3, hyper(2), Variant::Wrmf, 1).unwrap();
        assert_eq!(update_user(&r, &m, 1).unwrap(), Array1::<f64>::zeros(2));
    }

    #[test]
    fn cold_item_with_zero_users_inherits_prior() {
        let r = InteractionMatrix::from_pairs(2, 3, [(0, 0), (1, 1)]).unwrap();
        let mut m = FactorModel::init(2, 3, hyper(2), Variant::Cata, 1).unwrap();
        m.u.fill(0.0);
        let prior = PriorMatrix::new(array![[0.1, 0.2], [0.3, 0.4], [0.123456789, -7.5]]).unwrap();
        let v2 = update_item(&r, &m, &prior, 2).unwrap();
        assert_eq!(v2, array![0.123456789, -7.5]);
    }

    #[test]
    fn cold_item_with_nonzero_users() {
        let (r, model, prior) = random_instance(4, 5, 2, 8);
        let empty = InteractionMatrix::from_pairs(4, 5, []).unwrap();
        let v = update_item(&empty, &model, &prior, 3).unwrap();
        let h = model.hyper;
        let a = gram(&model.u) * h.b + Array2::<f64>::eye(2) * h.lambda_v;
        let expect = solve_spd(&a, (prior.row(3).to_owned() * h.lambda_v).view()).unwrap();
        for k in 0..2 {
            assert_abs_diff_eq!(v[k], expect[k], epsilon = 1e-12);
        }
        let _ = r;
    }

    #[test]
    fn zero_prior_matches_wrmf_item_update() {
        let (r, mut model, _) = random_instance(5, 6, 2, 4);
        let zero = PriorMatrix::zeros(6, 2);
        model.variant = Variant::CataPlusPlus;
        let a = update_item(&r, &model, &zero, 2).unwrap();
        model.variant = Variant::Wrmf;
        let b = update_item(&r, &model, &zero, 2).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn efficient_objective_matches_double_loop() {
        for seed in 0..5 {
            let (r, mut model, prior) = random_instance(4, 5, 3, seed);
            model.v.mapv_inplace(|x| x - 0.2);
            let h = model.hyper;
            let mut brute = 0.0;
            for i in 0..4 {
                for j in 0..5 {
                    let (p, c) = if r.contains(i, j) { (1.0, h.a) } else { (0.0, h.b) };
                    let s: f64 = (0..3).map(|k| model.u[[i, k]] * model.v[[j, k]]).sum();
                    brute += c / 2.0 * (p - s) * (p - s);
                }
            }
            for i in 0..4 {
                brute += h.lambda_u / 2.0 * (0..3).map(|k| model.u[[i, k]].powi(2)).sum::<f64>();
            }
            for j in 0..5 {
                brute += h.lambda_v / 2.0
                    * (0..3).map(|k| (model.v[[j, k]] - prior.values()[[j, k]]).powi(2)).sum::<f64>();
            }
            assert_abs_diff_eq!(objective(&r, &model, &prior).unwrap(), brute, epsilon = 1e-10);
        }
    }

    #[test]
    fn row_updates_zero_the_gradient() {
        for seed in 0..10 {
            let (r, mut model, prior) = random_instance(5, 6, 3, seed);
            let h = model.hyper;
            let i = (seed as usize) % 5;
            let u = update_user(&r, &model, i).unwrap();
            model.u.row_mut(i).assign(&u);
            // dL/du_i = -Σ_j c_ij (p_ij - u_i·v_j) v_j + λ_u u_i
            let mut g = &u * h.lambda_u;
            for j in 0..6 {
                let (p, c) = if r.contains(i, j) { (1.0, h.a) } else { (0.0, h.b) };
                let s = u.dot(&model.v.row(j));
                g.scaled_add(-c * (p - s), &model.v.row(j));
            }
            assert!(g.iter().all(|x| x.abs() < 1e-8), "{g:?}");

            let j = (seed as usize) % 6;
            let v = update_item(&r, &model, &prior, j).unwrap();
            let mut g = (&v - &prior.row(j)) * h.lambda_v;
            for i in 0..5 {
                let (p, c) = if r.contains(i, j) { (1.0, h.a) } else { (0.0, h.b) };
                let s = v.dot(&model.u.row(i));
                g.scaled_add(-c * (p - s), &model.u.row(i));
            }
            assert!(g.iter().all(|x| x.abs() < 1e-8), "{g:?}");
        }
    }

    #[test]
    fn single_row_updates_never_increase_objective() {
        let (r, mut model, prior) = random_instance(6, 7, 2, 21);
        for i in 0..6 {
            let before = objective(&r, &model, &prior).unwrap();
            let u = update_user(&r, &model, i).unwrap();
            model.u.row_mut(i).assign(&u);
            assert!(objective(&r, &model, &prior).unwrap() <= before * (1.0 + 1e-12));
        }
        for j in 0..7 {
            let before = objective(&r, &model, &prior).unwrap();
            let v = update_item(&r, &model, &prior, j).unwrap();
            model.v.row_mut(j).assign(&v);
            assert!(objective(&r, &model, &prior).unwrap() <= before * (1.0 + 1e-12));
        }
    }

    #[test]
    fn infinite_tolerance_runs_one_sweep() {
        let (r, mut model, prior) = random_instance(6, 8, 2, 2);
        let trace = train_als(&r, &mut model, &prior, &AlsConfig { max_sweeps: 10, tol: f64::INFINITY }).unwrap();
        assert_eq!(model.sweeps, 1);
        assert_eq!(trace.len(), 2);
        assert!(trace[1] <= trace[0]);
    }

    #[test]
    fn singular_system_with_zero_lambda() {
        let r = InteractionMatrix::from_pairs(1, 2, []).unwrap();
        let mut m = FactorModel::init(1, 2, hyper(2), Variant::Wrmf, 0).unwrap();
        m.hyper.lambda_u = 0.0;
        m.v = array![[1.0, 1.0], [2.0, 2.0]];
        assert!(matches!(update_user(&r, &m, 0), Err(Error::Numerical(_))));
    }

    #[test]
    fn predict_scores_values() {
        let mut m = FactorModel::init(1, 3, hyper(1), Variant::Wrmf, 0).unwrap();
        m.u = array![[2.0]];
        m.v = array![[1.0], [3.0], [-1.0]];
        assert_eq!(m.predict_scores(0).unwrap(), array![2.0, 6.0, -2.0]);
        assert!(m.predict_scores(1).is_err());
        m.u.fill(0.0);
        assert_eq!(m.predict_scores(0).unwrap(), Array1::<f64>::zeros(3));
    }

    #[test]
    fn popularity_order() {
        let r = InteractionMatrix::from_pairs(5, 3, [(0, 0), (1, 0), (2, 0), (0, 2), (1, 2), (2, 2), (3, 2), (4, 2)]).unwrap();
        assert_eq!(pop_baseline(&r), vec![2, 0, 1]);
        let even = InteractionMatrix::from_pairs(3, 3, [(0, 0), (1, 1), (2, 2)]).unwrap();
        assert_eq!(pop_baseline(&even), vec![0, 1, 2]);
        let empty = InteractionMatrix::from_pairs(2, 4, []).unwrap();
        assert_eq!(pop_baseline(&empty), vec![0, 1, 2, 3]);
    }

    #[test]
    fn hyperparameter_validation_and_variant_names() {
        assert!(Hyperparameters { a: 0.01, b: 1.0, ..Default::default() }.validate().is_err());
        assert!(Hyperparameters { b: 0.0, ..Default::default() }.validate().is_err());
        assert!(Hyperparameters::default().validate().is_ok());
        for v in [Variant::Wrmf, Variant::Cata, Variant::CataTags, Variant::CataPlusPlus] {
            assert_eq!(v.as_str().parse::<Variant>().unwrap(), v);
        }
        assert!("pop".parse::<Variant>().is_err());
    }

    #[test]
    fn checkpoint_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("f.bin");
        let mut m = FactorModel::init(3, 4, hyper(2), Variant::CataPlusPlus, 5).unwrap();
        m.sweeps = 7;
        m.save(&p).unwrap();
        let back = FactorModel::load(&p).unwrap();
        assert_eq!(back.hyper, m.hyper);
        assert_eq!(back.variant, m.variant);
        assert_eq!(back.sweeps, 7);
        for (a, b) in back.u.iter().zip(m.u.iter()) {
            assert_eq!(*a, *b as f32 as f64);
        }
    }
}
