//! Attentive autoencoder: a symmetric dense encoder/decoder with an attention
//! bottleneck, pre-trained on bag-of-words reconstruction.
//!
//! Layer stack for `input_dim = s`, `widths = [w1, ..., wk]`:
//!
//! ```text
//! encoder   (Dense s→w1, BN, ReLU) ... (Dense →wk, BN, ReLU)
//! attention softmax(e) ⊙ e
//! decoder   (Dense wk→w(k-1), BN, ReLU) ... (Dense w1→s, Sigmoid)
//! ```
//!
//! The attention output is the article representation handed to the factor
//! model; its width `wk` must equal the factor dimension.

use std::fs;
use std::path::{Path, PathBuf};

use ndarray::{s, Array2};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::SparseRows;
use crate::error::{Error, Result};
use crate::nn::{bce_grad, bce_loss, Adam, BatchNormLayer, DenseLayer, GradientTape, Layer, Sequential};
use crate::tensorfile::TensorFile;

/// Widths of the best-performing architecture for the CiteULike datasets.
pub const DEFAULT_WIDTHS: [usize; 4] = [400, 200, 100, 50];

/// Rows per forward pass when encoding a whole matrix.
const ENCODE_CHUNK: usize = 1024;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PretrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    pub learning_rate: f64,
}

impl Default for PretrainConfig {
    fn default() -> Self {
        PretrainConfig {
            epochs: 200,
            batch_size: 128,
            seed: 0,
            learning_rate: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttentiveAutoencoder {
    input_dim: usize,
    widths: Vec<usize>,
    net: Sequential,
    /// Number of layers up to and including the attention layer.
    encoder_len: usize,
}

/// Sidecar record written next to a checkpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointMeta {
    pub input_dim: usize,
    pub widths: Vec<usize>,
    pub init_seed: u64,
    pub pretrain: Option<PretrainConfig>,
    pub final_loss: Option<f64>,
}

impl AttentiveAutoencoder {
    /// Builds a freshly initialized network. `widths` must be nonempty and
    /// strictly decreasing; its last entry is the bottleneck width.
    pub fn build(input_dim: usize, widths: &[usize], seed: u64) -> Result<Self> {
        if input_dim == 0 {
            return Err(Error::Config("autoencoder input dimension must be positive".into()));
        }
        if widths.is_empty() {
            return Err(Error::Config("autoencoder needs at least one hidden width".into()));
        }
        if widths.contains(&0) || widths.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::Config(format!(
                "hidden widths must be positive and strictly decreasing, got {widths:?}"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut layers = Vec::new();
        let mut prev = input_dim;
        for &w in widths {
            layers.push(Layer::Dense(DenseLayer::init(prev, w, &mut rng)));
            layers.push(Layer::BatchNorm(BatchNormLayer::new(w)));
            layers.push(Layer::Relu);
            prev = w;
        }
        layers.push(Layer::Attention);
        let encoder_len = layers.len();
        for &w in widths.iter().rev().skip(1) {
            layers.push(Layer::Dense(DenseLayer::init(prev, w, &mut rng)));
            layers.push(Layer::BatchNorm(BatchNormLayer::new(w)));
            layers.push(Layer::Relu);
            prev = w;
        }
        layers.push(Layer::Dense(DenseLayer::init(prev, input_dim, &mut rng)));
        layers.push(Layer::Sigmoid);
        Ok(AttentiveAutoencoder {
            input_dim,
            widths: widths.to_vec(),
            net: Sequential::new(layers),
            encoder_len,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn widths(&self) -> &[usize] {
        &self.widths
    }

    pub fn bottleneck_dim(&self) -> usize {
        *self.widths.last().expect("nonempty widths")
    }

    pub fn network(&self) -> &Sequential {
        &self.net
    }

    pub fn network_mut(&mut self) -> &mut Sequential {
        &mut self.net
    }

    /// Widths of every dense layer boundary, input to output.
    pub fn layer_dims(&self) -> Vec<usize> {
        let mut dims = vec![self.input_dim];
        dims.extend(self.net.layers.iter().filter_map(|l| match l {
            Layer::Dense(d) => Some(d.out_dim()),
            _ => None,
        }));
        dims
    }

    fn check_width(&self, cols: usize) -> Result<()> {
        if cols != self.input_dim {
            return Err(Error::Contract(format!(
                "autoencoder expects {} input columns, got {cols}",
                self.input_dim
            )));
        }
        Ok(())
    }

    /// Encoder output before the attention layer (evaluation mode).
    pub fn encode_pre_attention(&self, x: &Array2<f64>) -> Result<Array2<f64>> {
        self.check_width(x.ncols())?;
        self.net.forward_eval_range(x, 0..self.encoder_len - 1)
    }

    /// Bottleneck representation `softmax(e) ⊙ e` (evaluation mode).
    pub fn encode(&self, x: &Array2<f64>) -> Result<Array2<f64>> {
        self.check_width(x.ncols())?;
        self.net.forward_eval_range(x, 0..self.encoder_len)
    }

    /// Encodes every row of a sparse matrix, in chunks.
    pub fn encode_rows(&self, data: &SparseRows) -> Result<Array2<f64>> {
        self.check_width(data.n_cols())?;
        let mut out = Array2::zeros((data.n_rows(), self.bottleneck_dim()));
        let all: Vec<usize> = (0..data.n_rows()).collect();
        for (c, chunk) in all.chunks(ENCODE_CHUNK).enumerate() {
            let z = self.encode(&data.dense_rows(chunk))?;
            let lo = c * ENCODE_CHUNK;
            out.slice_mut(s![lo..lo + chunk.len(), ..]).assign(&z);
        }
        Ok(out)
    }

    /// Full reconstruction in evaluation mode; values lie in (0, 1).
    pub fn reconstruct(&self, x: &Array2<f64>) -> Result<Array2<f64>> {
        self.check_width(x.ncols())?;
        self.net.forward_eval(x)
    }

    /// Mean reconstruction loss over `data` in evaluation mode.
    pub fn reconstruction_loss(&self, data: &SparseRows) -> Result<f64> {
        self.check_width(data.n_cols())?;
        let all: Vec<usize> = (0..data.n_rows()).collect();
        let mut total = 0.0;
        for chunk in all.chunks(ENCODE_CHUNK) {
            let x = data.dense_rows(chunk);
            total += bce_loss(&self.net.forward_eval(&x)?, &x) * chunk.len() as f64;
        }
        Ok(total / data.n_rows().max(1) as f64)
    }

    /// Minimizes reconstruction cross-entropy with Adam over shuffled
    /// mini-batches. Returns the mean training loss of each epoch.
    ///
    /// A trailing batch of a single row is merged into the previous batch,
    /// since batch normalization needs at least two rows.
    pub fn pretrain(&mut self, data: &SparseRows, cfg: &PretrainConfig) -> Result<Vec<f64>> {
        self.check_width(data.n_cols())?;
        if cfg.epochs == 0 {
            return Ok(Vec::new());
        }
        if cfg.batch_size < 2 {
            return Err(Error::Config("batch size must be at least 2".into()));
        }
        let n = data.n_rows();
        if n < 2 {
            return Err(Error::Empty("pre-training needs at least two rows".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut opt = Adam::new(cfg.learning_rate);
        let mut tape = GradientTape::new();
        let mut order: Vec<usize> = (0..n).collect();
        let mut history = Vec::with_capacity(cfg.epochs);

        for epoch in 0..cfg.epochs {
            order.shuffle(&mut rng);
            let mut batches: Vec<&[usize]> = order.chunks(cfg.batch_size).collect();
            if batches.len() > 1 && batches.last().is_some_and(|b| b.len() == 1) {
                batches.pop();
                let k = batches.len() - 1;
                batches[k] = &order[k * cfg.batch_size..];
            }
            let mut epoch_loss = 0.0;
            for (b, rows) in batches.iter().enumerate() {
                let x = data.dense_rows(rows);
                let p = self.net.forward_train(&x, &mut tape)?;
                let loss = bce_loss(&p, &x);
                if !loss.is_finite() {
                    return Err(Error::Numerical(format!(
                        "non-finite reconstruction loss at epoch {epoch}, batch {b}"
                    )));
                }
                let grads = self.net.backward(&tape, &bce_grad(&p, &x))?;
                opt.step(&mut self.net.params_mut(), &grads.slices())
                    .map_err(|e| match e {
                        Error::Numerical(m) => {
                            Error::Numerical(format!("epoch {epoch}, batch {b}: {m}"))
                        }
                        other => other,
                    })?;
                epoch_loss += loss * rows.len() as f64;
            }
            let mean = epoch_loss / n as f64;
            log::debug!("autoencoder epoch {epoch}: loss {mean:.6}");
            history.push(mean);
        }
        Ok(history)
    }

    /// Writes the parameter checkpoint to `path` and the architecture and
    /// training record to `path` with a `.json` extension.
    pub fn save(&self, path: &Path, meta: &CheckpointMeta) -> Result<()> {
        let mut f = TensorFile::new();
        f.set_meta("kind", "attentive-autoencoder");
        f.set_meta("input_dim", self.input_dim);
        f.set_meta(
            "widths",
            self.widths.iter().map(ToString::to_string).collect::<Vec<_>>().join(","),
        );
        self.net.write_tensors("layer", &mut f);
        f.save(path)?;
        let side = sidecar_path(path);
        fs::write(&side, serde_json::to_string_pretty(meta)?).map_err(|e| Error::io(&side, e))
    }

    pub fn load(path: &Path) -> Result<(Self, CheckpointMeta)> {
        let side = sidecar_path(path);
        let text = fs::read_to_string(&side).map_err(|e| Error::io(&side, e))?;
        let meta: CheckpointMeta = serde_json::from_str(&text)?;
        let f = TensorFile::load(path)?;
        let mut ae = Self::build(meta.input_dim, &meta.widths, meta.init_seed)?;
        ae.net.read_tensors("layer", &f)?;
        Ok((ae, meta))
    }
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("json")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::softmax;
    use rand::Rng;

    fn random_rows(n: usize, d: usize, seed: u64) -> SparseRows {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows = (0..n)
            .map(|_| {
                let mut row = Vec::new();
                for c in 0..d as u32 {
                    if rng.gen_bool(0.2) {
                        row.push((c, rng.gen_range(0.1..=1.0)));
                    }
                }
                row
            })
            .collect();
        SparseRows::from_rows(d, rows).unwrap()
    }

    #[test]
    fn architecture_dims() {
        let ae = AttentiveAutoencoder::build(8000, &DEFAULT_WIDTHS, 0).unwrap();
        assert_eq!(
            ae.layer_dims(),
            vec![8000, 400, 200, 100, 50, 100, 200, 400, 8000]
        );
        assert_eq!(ae.bottleneck_dim(), 50);
        let two = AttentiveAutoencoder::build(8000, &[50], 0).unwrap();
        assert_eq!(two.layer_dims(), vec![8000, 50, 8000]);
    }

    #[test]
    fn rejects_bad_widths() {
        assert!(AttentiveAutoencoder::build(10, &[100, 200], 0).is_err());
        assert!(AttentiveAutoencoder::build(10, &[5, 5], 0).is_err());
        assert!(AttentiveAutoencoder::build(10, &[], 0).is_err());
    }

    #[test]
    fn encode_is_attention_of_pre_attention() {
        let ae = AttentiveAutoencoder::build(12, &[8, 4], 3).unwrap();
        let x = random_rows(5, 12, 1).to_dense();
        let e = ae.encode_pre_attention(&x).unwrap();
        let z = ae.encode(&x).unwrap();
        assert_eq!(z.ncols(), 4);
        for r in 0..5 {
            let s = softmax(e.row(r));
            for c in 0..4 {
                assert_eq!(z[[r, c]], s[c] * e[[r, c]]);
            }
        }
        let rec = ae.reconstruct(&x).unwrap();
        assert!(rec.iter().all(|&v| v > 0.0 && v < 1.0));
        assert!(ae.encode(&Array2::zeros((1, 11))).is_err());
    }

    #[test]
    fn zero_epochs_is_identity_and_training_is_reproducible() {
        let data = random_rows(30, 10, 2);
        let mut ae = AttentiveAutoencoder::build(10, &[6, 3], 9).unwrap();
        let before = ae.clone();
        let cfg0 = PretrainConfig { epochs: 0, ..Default::default() };
        assert!(ae.pretrain(&data, &cfg0).unwrap().is_empty());
        assert_eq!(ae, before);

        let cfg = PretrainConfig {
            epochs: 5,
            batch_size: 8,
            seed: 4,
            learning_rate: 1e-2,
        };
        let h1 = ae.pretrain(&data, &cfg).unwrap();
        let mut other = before.clone();
        let h2 = other.pretrain(&data, &cfg).unwrap();
        assert_eq!(h1, h2);
        assert_eq!(ae, other);
    }

    #[test]
    fn single_row_tail_batch_is_merged() {
        // 9 rows, batch size 4 -> 4, 5
        let data = random_rows(9, 6, 5);
        let mut ae = AttentiveAutoencoder::build(6, &[3], 1).unwrap();
        let cfg = PretrainConfig { epochs: 2, batch_size: 4, seed: 0, learning_rate: 1e-3 };
        assert_eq!(ae.pretrain(&data, &cfg).unwrap().len(), 2);
    }

    #[test]
    fn checkpoint_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("text.ae");
        let ae = AttentiveAutoencoder::build(7, &[4, 2], 11).unwrap();
        let meta = CheckpointMeta {
            input_dim: 7,
            widths: vec![4, 2],
            init_seed: 11,
            pretrain: Some(PretrainConfig::default()),
            final_loss: None,
        };
        ae.save(&path, &meta).unwrap();
        assert!(sidecar_path(&path).exists());
        let (back, meta2) = AttentiveAutoencoder::load(&path).unwrap();
        assert_eq!(meta, meta2);
        let x = random_rows(3, 7, 0).to_dense();
        let a = ae.encode(&x).unwrap();
        let b = back.encode(&x).unwrap();
        for (u, v) in a.iter().zip(b.iter()) {
            assert!((u - v).abs() < 1e-5);
        }
    }

    #[test]
    fn pretraining_halves_reconstruction_loss() {
        let data = random_rows(100, 50, 11);
        let mut ae = AttentiveAutoencoder::build(50, &[32, 16, 8], 2).unwrap();
        let before = ae.reconstruction_loss(&data).unwrap();
        let cfg = PretrainConfig { epochs: 200, batch_size: 20, seed: 5, learning_rate: 1e-3 };
        assert_eq!(ae.pretrain(&data, &cfg).unwrap().len(), 200);
        let after = ae.reconstruction_loss(&data).unwrap();
        assert!(after < 0.5 * before, "{before} -> {after}");
    }

    #[test]
    fn full_batch_loss_windows_never_increase() {
        let data = random_rows(100, 50, 11);
        let mut ae = AttentiveAutoencoder::build(50, &[32, 16, 8], 2).unwrap();
        let cfg = PretrainConfig { epochs: 200, batch_size: 100, seed: 5, learning_rate: 1e-3 };
        let history = ae.pretrain(&data, &cfg).unwrap();
        let window: Vec<f64> = history.windows(5).map(|w| w.iter().sum::<f64>() / 5.0).collect();
        for w in window.windows(2) {
            assert!(w[1] <= w[0], "{window:?}");
        }
    }
}
