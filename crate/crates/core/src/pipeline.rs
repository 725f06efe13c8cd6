//! End-to-end experiment driver behind the `cata` binary.
//!
//! Directory layout under `out_dir`:
//!
//! ```text
//! cache/manifest.json          input hashes, corpus sizes, preprocessing settings
//! cache/{interactions,content,tags}.bin, cache/vocab.txt
//! runs/<model>-p<P>-<hash>/    one directory per trained model and protocol
//!     config.json, text-ae.bin(.json), tags-ae.bin(.json)
//!     split-<r>/{train,test}.bin, factors.bin, trace.json
//! reports/p<P>-<hash>/         metrics.csv, metrics.json, improvement.csv
//! ```
//!
//! Run and report directories are named by a hash of every setting that
//! affects their contents, so identical inputs map to identical paths.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use ndarray::Array2;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::autoencoder::{AttentiveAutoencoder, CheckpointMeta, PretrainConfig};
use crate::cf::{self, AlsConfig, FactorModel, Hyperparameters, PriorMatrix, Variant};
use crate::corpus::{self, cache, files, ContentMatrix, SparseRows, TagMatrix};
use crate::error::{Error, Result};
use crate::eval::{self, MetricReport, Popularity, Scorer, Split, SplitSpec};

/// A model family: the popularity baseline or a factor-model variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum ModelKind {
    Pop,
    Factor(Variant),
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelKind::Pop => f.write_str("pop"),
            ModelKind::Factor(v) => v.fmt(f),
        }
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "pop" {
            Ok(ModelKind::Pop)
        } else {
            s.parse().map(ModelKind::Factor).map_err(|_| {
                Error::Config(format!(
                    "unknown model '{s}' (expected pop, wrmf, cata, cata-tags or cata++)"
                ))
            })
        }
    }
}

impl TryFrom<String> for ModelKind {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<ModelKind> for String {
    fn from(m: ModelKind) -> String {
        m.to_string()
    }
}

impl ModelKind {
    fn uses_text(self) -> bool {
        matches!(self, ModelKind::Factor(v) if v.uses_text())
    }

    fn uses_tags(self) -> bool {
        matches!(self, ModelKind::Factor(v) if v.uses_tags())
    }
}

/// Every knob of an experiment. Loaded from a JSON document; any key may be
/// omitted to take its default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Directory holding the raw input files.
    pub data_dir: PathBuf,
    pub users_file: String,
    /// Plain text (one article per line) or CSV with title/abstract columns.
    pub docs_file: Option<String>,
    /// Pre-tokenized `mult.dat` counts; used instead of `docs_file` when set.
    pub term_counts_file: Option<String>,
    pub tags_file: Option<String>,
    /// Whether each tags line starts with the number of tags that follow.
    pub tags_count_prefixed: bool,
    pub citations_file: Option<String>,
    pub vocab_size: usize,
    pub min_articles_per_tag: usize,

    pub models: Vec<ModelKind>,
    /// Training articles per user.
    pub p: usize,
    pub seed: u64,
    pub n_repeats: usize,

    pub d: usize,
    pub lambda_u: f64,
    pub lambda_v: f64,
    pub a: f64,
    pub b: f64,
    pub max_sweeps: usize,
    pub tol: f64,

    pub widths: Vec<usize>,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,

    pub ks: Vec<usize>,
    pub out_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let hyper = Hyperparameters::default();
        let als = AlsConfig::default();
        let pre = PretrainConfig::default();
        ExperimentConfig {
            data_dir: PathBuf::from("data"),
            users_file: "users.dat".into(),
            docs_file: Some("docs.txt".into()),
            term_counts_file: None,
            tags_file: Some("item-tag.dat".into()),
            tags_count_prefixed: true,
            citations_file: Some("citations.dat".into()),
            vocab_size: 8000,
            min_articles_per_tag: 5,
            models: vec![ModelKind::Factor(Variant::CataPlusPlus)],
            p: 1,
            seed: 0,
            n_repeats: 4,
            d: hyper.d,
            lambda_u: hyper.lambda_u,
            lambda_v: hyper.lambda_v,
            a: hyper.a,
            b: hyper.b,
            max_sweeps: als.max_sweeps,
            tol: als.tol,
            widths: crate::autoencoder::DEFAULT_WIDTHS.to_vec(),
            epochs: pre.epochs,
            batch_size: pre.batch_size,
            learning_rate: pre.learning_rate,
            ks: vec![50, 100, 150, 200, 250, 300],
            out_dir: PathBuf::from("out"),
        }
    }
}

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn hyperparameters(&self) -> Hyperparameters {
        Hyperparameters {
            d: self.d,
            lambda_u: self.lambda_u,
            lambda_v: self.lambda_v,
            a: self.a,
            b: self.b,
        }
    }

    pub fn als(&self) -> AlsConfig {
        AlsConfig {
            max_sweeps: self.max_sweeps,
            tol: self.tol,
        }
    }

    pub fn pretrain(&self) -> PretrainConfig {
        PretrainConfig {
            epochs: self.epochs,
            batch_size: self.batch_size,
            seed: self.seed,
            learning_rate: self.learning_rate,
        }
    }

    pub fn split_spec(&self) -> SplitSpec {
        SplitSpec::new(self.p, self.seed, self.n_repeats)
    }

    /// Protocol label used in reports.
    pub fn setting(&self) -> String {
        match self.p {
            1 => "sparse-p1".into(),
            10 => "dense-p10".into(),
            p => format!("p{p}"),
        }
    }

    fn needs_text(&self) -> bool {
        self.models.iter().any(|m| m.uses_text())
    }

    fn needs_tags(&self) -> bool {
        self.models.iter().any(|m| m.uses_tags())
    }

    pub fn validate(&self) -> Result<()> {
        if self.models.is_empty() {
            return Err(Error::Config("no models selected".into()));
        }
        self.hyperparameters().validate()?;
        self.split_spec().validate()?;
        if self.ks.is_empty() || self.ks.contains(&0) {
            return Err(Error::Config("K list must be nonempty and positive".into()));
        }
        if !(self.tol >= 0.0) {
            return Err(Error::Config("ALS tolerance must be nonnegative".into()));
        }
        if self.needs_text() || self.needs_tags() {
            if self.widths.last() != Some(&self.d) {
                return Err(Error::Config(format!(
                    "last autoencoder width {:?} must equal d = {}",
                    self.widths.last(),
                    self.d
                )));
            }
            if self.batch_size < 2 {
                return Err(Error::Config("batch size must be at least 2".into()));
            }
        }
        Ok(())
    }

    fn input(&self, name: &str) -> PathBuf {
        self.data_dir.join(name)
    }

    pub fn cache_dir(&self) -> PathBuf {
        self.out_dir.join("cache")
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn sha256_file(path: &Path) -> Result<String> {
    let mut f = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut hasher = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    loop {
        let n = f.read(&mut buf).map_err(|e| Error::io(path, e))?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(hex::encode(hasher.finalize()))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputRecord {
    pub path: PathBuf,
    pub sha256: String,
}

/// Provenance of a preprocessed cache.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CacheManifest {
    pub inputs: BTreeMap<String, InputRecord>,
    pub n_users: usize,
    pub n_articles: usize,
    pub n_pairs: usize,
    pub vocab_size: usize,
    pub n_tags: Option<usize>,
    pub settings: PreprocessSettings,
    /// Hashes of the written cache files.
    pub outputs: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreprocessSettings {
    pub vocab_size: usize,
    pub min_articles_per_tag: usize,
    pub tags_count_prefixed: bool,
}

pub const MANIFEST: &str = "manifest.json";
pub const INTERACTIONS_CACHE: &str = "interactions.bin";
pub const CONTENT_CACHE: &str = "content.bin";
pub const TAGS_CACHE: &str = "tags.bin";
pub const VOCAB_FILE: &str = "vocab.txt";

fn load_content(cfg: &ExperimentConfig, inputs: &mut BTreeMap<String, InputRecord>) -> Result<(ContentMatrix, Vec<String>)> {
    let mut record = |key: &str, path: PathBuf| -> Result<()> {
        let sha256 = sha256_file(&path)?;
        inputs.insert(key.into(), InputRecord { path, sha256 });
        Ok(())
    };
    if let Some(name) = &cfg.term_counts_file {
        let path = cfg.input(name);
        let rows = files::load_term_counts(&path)?;
        record("term_counts", path)?;
        let width = rows
            .iter()
            .flatten()
            .map(|&(t, _)| t as usize + 1)
            .max()
            .unwrap_or(0);
        let tokens = (0..width).map(|t| format!("term{t}")).collect();
        return Ok((corpus::content_from_counts(width, rows)?, tokens));
    }
    let name = cfg
        .docs_file
        .as_ref()
        .ok_or_else(|| Error::Config("either docs_file or term_counts_file is required".into()))?;
    let path = cfg.input(name);
    let docs = files::load_documents(&path)?;
    record("docs", path)?;
    if docs.is_empty() {
        return Err(Error::Empty("document file has no articles".into()));
    }
    let vocab = corpus::select_vocabulary(&docs, &corpus::stop_words(), cfg.vocab_size)?;
    let tokens = vocab.tokens().map(str::to_owned).collect();
    Ok((corpus::build_bow(&docs, &vocab), tokens))
}

/// Parses the raw inputs and writes binary caches plus a manifest.
///
/// A missing tags file is tolerated when no selected model uses tags.
pub fn preprocess(cfg: &ExperimentConfig) -> Result<CacheManifest> {
    cfg.validate()?;
    let mut inputs = BTreeMap::new();
    let (content, tokens) = load_content(cfg, &mut inputs)?;
    let m = content.n_articles();

    let users_path = cfg.input(&cfg.users_file);
    let r = files::load_interactions(&users_path, Some(m))?;
    inputs.insert(
        "users".into(),
        InputRecord {
            sha256: sha256_file(&users_path)?,
            path: users_path,
        },
    );

    let tags_path = cfg.tags_file.as_ref().map(|t| cfg.input(t));
    let tags = match tags_path {
        Some(path) if path.exists() => {
            let (lines, assignments) = files::load_tag_assignments(&path, cfg.tags_count_prefixed)?;
            if lines > m {
                return Err(Error::Bounds(format!(
                    "{} lists tags for {lines} articles, corpus has {m}",
                    path.display()
                )));
            }
            inputs.insert(
                "tags".into(),
                InputRecord {
                    sha256: sha256_file(&path)?,
                    path,
                },
            );
            let citations = match cfg.citations_file.as_ref().map(|c| cfg.input(c)) {
                Some(path) if path.exists() => {
                    let c = files::load_citations(&path)?;
                    inputs.insert(
                        "citations".into(),
                        InputRecord {
                            sha256: sha256_file(&path)?,
                            path,
                        },
                    );
                    c
                }
                _ => Vec::new(),
            };
            Some(corpus::build_tag_matrix(m, &assignments, &citations, cfg.min_articles_per_tag)?)
        }
        Some(path) if cfg.needs_tags() => {
            return Err(Error::io(
                &path,
                std::io::Error::new(std::io::ErrorKind::NotFound, "tags file not found"),
            ))
        }
        None if cfg.needs_tags() => {
            return Err(Error::Config("selected models need a tags_file".into()));
        }
        _ => {
            log::info!("no tags file; tag-based models will be unavailable");
            None
        }
    };

    let dir = cfg.cache_dir();
    create_dir(&dir)?;
    let mut outputs = BTreeMap::new();
    let mut record_output = |name: &str| -> Result<()> {
        outputs.insert(name.to_string(), sha256_file(&dir.join(name))?);
        Ok(())
    };
    cache::save_interactions(&dir.join(INTERACTIONS_CACHE), &r)?;
    record_output(INTERACTIONS_CACHE)?;
    cache::save_content(&dir.join(CONTENT_CACHE), &content)?;
    record_output(CONTENT_CACHE)?;
    let tags_out = dir.join(TAGS_CACHE);
    match &tags {
        Some(t) => {
            cache::save_tags(&tags_out, t)?;
            record_output(TAGS_CACHE)?;
        }
        None if tags_out.exists() => fs::remove_file(&tags_out).map_err(|e| Error::io(&tags_out, e))?,
        None => {}
    }
    files::write_lines(&dir.join(VOCAB_FILE), &tokens)?;

    let manifest = CacheManifest {
        inputs,
        n_users: r.n_users(),
        n_articles: m,
        n_pairs: r.n_pairs(),
        vocab_size: content.vocab_size(),
        n_tags: tags.as_ref().map(TagMatrix::n_tags),
        settings: PreprocessSettings {
            vocab_size: cfg.vocab_size,
            min_articles_per_tag: cfg.min_articles_per_tag,
            tags_count_prefixed: cfg.tags_count_prefixed,
        },
        outputs,
    };
    write_json(&dir.join(MANIFEST), &manifest)?;
    log::info!(
        "preprocessed {} users, {} articles, {} pairs, {} terms, {:?} tags",
        manifest.n_users,
        manifest.n_articles,
        manifest.n_pairs,
        manifest.vocab_size,
        manifest.n_tags
    );
    Ok(manifest)
}

pub fn load_manifest(cfg: &ExperimentConfig) -> Result<CacheManifest> {
    read_json(&cfg.cache_dir().join(MANIFEST))
}

/// Settings that determine a run directory's contents.
#[derive(Serialize)]
struct RunKey<'a> {
    model: ModelKind,
    cache: &'a BTreeMap<String, String>,
    split: SplitSpec,
    hyper: Option<Hyperparameters>,
    als: Option<AlsConfig>,
    widths: Option<&'a [usize]>,
    pretrain: Option<PretrainConfig>,
}

fn run_key(cfg: &ExperimentConfig, manifest: &CacheManifest, model: ModelKind) -> Result<String> {
    let factor = matches!(model, ModelKind::Factor(_));
    let ae = model.uses_text() || model.uses_tags();
    let key = RunKey {
        model,
        cache: &manifest.outputs,
        split: cfg.split_spec(),
        hyper: factor.then(|| cfg.hyperparameters()),
        als: factor.then(|| cfg.als()),
        widths: ae.then_some(cfg.widths.as_slice()),
        pretrain: ae.then(|| cfg.pretrain()),
    };
    Ok(sha256_hex(&serde_json::to_vec(&key)?)[..12].to_string())
}

pub fn run_dir(cfg: &ExperimentConfig, manifest: &CacheManifest, model: ModelKind) -> Result<PathBuf> {
    let name = format!("{model}-p{}-{}", cfg.p, run_key(cfg, manifest, model)?);
    Ok(cfg.out_dir.join("runs").join(name))
}

fn split_dir(run: &Path, r: usize) -> PathBuf {
    run.join(format!("split-{r}"))
}

pub const TEXT_AE: &str = "text-ae.bin";
pub const TAGS_AE: &str = "tags-ae.bin";
pub const FACTORS: &str = "factors.bin";
pub const TRACE: &str = "trace.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainSummary {
    pub model: ModelKind,
    pub run_dir: PathBuf,
    /// Final ALS objective per split (empty for the popularity baseline).
    pub final_objective: Vec<f64>,
    pub sweeps: Vec<usize>,
}

fn pretrain_encoder(
    cfg: &ExperimentConfig,
    data: &SparseRows,
    what: &str,
    path: &Path,
) -> Result<Array2<f64>> {
    let mut ae = AttentiveAutoencoder::build(data.n_cols(), &cfg.widths, cfg.seed)?;
    log::info!("pre-training {what} autoencoder on {} × {}", data.n_rows(), data.n_cols());
    let history = ae.pretrain(data, &cfg.pretrain())?;
    let meta = CheckpointMeta {
        input_dim: data.n_cols(),
        widths: cfg.widths.clone(),
        init_seed: cfg.seed,
        pretrain: Some(cfg.pretrain()),
        final_loss: history.last().copied(),
    };
    ae.save(path, &meta)?;
    ae.encode_rows(data)
}

fn train_into(cfg: &ExperimentConfig, model: ModelKind, dir: &Path) -> Result<(Vec<f64>, Vec<usize>)> {
    let cache_dir = cfg.cache_dir();
    let r = cache::load_interactions(&cache_dir.join(INTERACTIONS_CACHE))?;
    write_json(&dir.join("config.json"), cfg)?;

    let theta = if model.uses_text() {
        let content = cache::load_content(&cache_dir.join(CONTENT_CACHE))?;
        Some(pretrain_encoder(cfg, content.rows(), "text", &dir.join(TEXT_AE))?)
    } else {
        None
    };
    let gamma = if model.uses_tags() {
        let path = cache_dir.join(TAGS_CACHE);
        if !path.exists() {
            return Err(Error::Empty(format!(
                "model {model} needs tags but the cache has none; preprocess with a tags file"
            )));
        }
        let tags = cache::load_tags(&path)?;
        Some(pretrain_encoder(cfg, tags.rows(), "tag", &dir.join(TAGS_AE))?)
    } else {
        None
    };

    let spec = cfg.split_spec();
    let mut objectives = Vec::new();
    let mut sweeps = Vec::new();
    for rep in 0..spec.n_repeats {
        let split = eval::make_split(&r, &spec, rep)?;
        let sdir = split_dir(dir, rep);
        create_dir(&sdir)?;
        cache::save_interactions(&sdir.join("train.bin"), &split.train)?;
        cache::save_interactions(&sdir.join("test.bin"), &split.test_matrix()?)?;
        let ModelKind::Factor(variant) = model else {
            continue;
        };
        let hyper = cfg.hyperparameters();
        let prior = PriorMatrix::for_variant(variant, r.n_articles(), hyper.d, theta.as_ref(), gamma.as_ref())?;
        let mut fm = FactorModel::init(r.n_users(), r.n_articles(), hyper, variant, cfg.seed.wrapping_add(rep as u64))?;
        let trace = cf::train_als(&split.train, &mut fm, &prior, &cfg.als())?;
        log::info!(
            "{model} split {rep}: {} sweeps, objective {:.4}",
            fm.sweeps,
            trace.last().copied().unwrap_or(f64::NAN)
        );
        fm.save(&sdir.join(FACTORS))?;
        write_json(&sdir.join(TRACE), &trace)?;
        objectives.push(*trace.last().expect("nonempty trace"));
        sweeps.push(fm.sweeps);
    }
    Ok((objectives, sweeps))
}

/// Trains every configured model on every split. Each run is assembled in a
/// temporary directory that replaces the final one only on success.
pub fn train(cfg: &ExperimentConfig) -> Result<Vec<TrainSummary>> {
    cfg.validate()?;
    let manifest = load_manifest(cfg)?;
    let mut out = Vec::new();
    for &model in &cfg.models {
        let dir = run_dir(cfg, &manifest, model)?;
        let partial = dir.with_extension("partial");
        if partial.exists() {
            fs::remove_dir_all(&partial).map_err(|e| Error::io(&partial, e))?;
        }
        create_dir(&partial)?;
        let (final_objective, sweeps) = match train_into(cfg, model, &partial) {
            Ok(v) => v,
            Err(e) => {
                let _ = fs::remove_dir_all(&partial);
                return Err(e);
            }
        };
        if dir.exists() {
            fs::remove_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        }
        fs::rename(&partial, &dir).map_err(|e| Error::io(&dir, e))?;
        out.push(TrainSummary {
            model,
            run_dir: dir,
            final_objective,
            sweeps,
        });
    }
    Ok(out)
}

/// A trained model restored from its run directory for one split.
pub struct LoadedRun {
    pub split: Split,
    pub scorer: Box<dyn Scorer>,
}

pub fn load_run(cfg: &ExperimentConfig, model: ModelKind, rep: usize) -> Result<LoadedRun> {
    let manifest = load_manifest(cfg)?;
    let dir = run_dir(cfg, &manifest, model)?;
    if !dir.exists() {
        return Err(Error::io(
            &dir,
            std::io::Error::new(std::io::ErrorKind::NotFound, format!("no trained {model} run; run `train` first")),
        ));
    }
    let sdir = split_dir(&dir, rep);
    let train = cache::load_interactions(&sdir.join("train.bin"))?;
    let test = cache::load_interactions(&sdir.join("test.bin"))?;
    let split = Split {
        test: test.libraries().to_vec(),
        train,
    };
    let scorer: Box<dyn Scorer> = match model {
        ModelKind::Pop => Box::new(Popularity::fit(&split.train)),
        ModelKind::Factor(_) => Box::new(FactorModel::load(&sdir.join(FACTORS))?),
    };
    Ok(LoadedRun { split, scorer })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvaluateOutput {
    pub reports: Vec<MetricReport>,
    pub report_dir: PathBuf,
}

/// Scores every configured model on the reporting splits (or on the
/// validation split when `validation` is set) and writes CSV and JSON reports,
/// plus a pairwise improvement table when more than one model is configured.
pub fn evaluate(cfg: &ExperimentConfig, validation: bool) -> Result<EvaluateOutput> {
    cfg.validate()?;
    let manifest = load_manifest(cfg)?;
    let spec = cfg.split_spec();
    let splits: Vec<usize> = if validation {
        vec![0]
    } else {
        spec.reporting_splits().collect()
    };
    let mut reports = Vec::new();
    let mut run_names = Vec::new();
    for &model in &cfg.models {
        run_names.push(run_dir(cfg, &manifest, model)?);
        let mut per_split = Vec::new();
        for &rep in &splits {
            let run = load_run(cfg, model, rep)?;
            per_split.push(eval::evaluate(run.scorer.as_ref(), &run.split, &cfg.ks, rep)?);
        }
        let setting = if validation {
            format!("{}-validation", cfg.setting())
        } else {
            cfg.setting()
        };
        reports.push(MetricReport::new(model.to_string(), setting, per_split)?);
    }

    #[derive(Serialize)]
    struct ReportKey<'a> {
        runs: &'a [PathBuf],
        ks: &'a [usize],
        validation: bool,
    }
    let key = ReportKey {
        runs: &run_names,
        ks: &cfg.ks,
        validation,
    };
    let hash = &sha256_hex(&serde_json::to_vec(&key)?)[..12];
    let dir = cfg.out_dir.join("reports").join(format!("p{}-{hash}", cfg.p));
    create_dir(&dir)?;
    eval::write_csv(&reports, &dir.join("metrics.csv"))?;
    eval::write_json(&reports, &dir.join("metrics.json"))?;
    if reports.len() > 1 {
        eval::write_improvement_csv(&eval::improvement_table(&reports), &dir.join("improvement.csv"))?;
    }
    Ok(EvaluateOutput {
        reports,
        report_dir: dir,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Recommendation {
    pub article: usize,
    pub score: f64,
}

/// Top-`k` unseen articles for `user` from the first configured model, trained
/// on split `rep`.
pub fn recommend(cfg: &ExperimentConfig, user: usize, k: usize, rep: usize) -> Result<Vec<Recommendation>> {
    cfg.validate()?;
    if rep >= cfg.n_repeats {
        return Err(Error::Config(format!("split {rep} out of range (n_repeats = {})", cfg.n_repeats)));
    }
    let run = load_run(cfg, cfg.models[0], rep)?;
    if user >= run.split.train.n_users() {
        return Err(Error::Bounds(format!(
            "user {user} out of range (n_users = {})",
            run.split.train.n_users()
        )));
    }
    let scores = run.scorer.scores(user)?;
    let scores = scores.as_slice().expect("contiguous scores");
    let top = eval::top_k(scores, run.split.train.library(user), k)?;
    Ok(top
        .into_iter()
        .map(|article| Recommendation {
            article,
            score: scores[article],
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn model_kind_names() {
        for s in ["pop", "wrmf", "cata", "cata-tags", "cata++"] {
            assert_eq!(s.parse::<ModelKind>().unwrap().to_string(), s);
        }
        assert!(matches!("cdl".parse::<ModelKind>(), Err(Error::Config(_))));
        let json = serde_json::to_string(&vec![ModelKind::Pop, ModelKind::Factor(Variant::Cata)]).unwrap();
        assert_eq!(json, r#"["pop","cata"]"#);
    }

    #[test]
    fn config_defaults_and_overrides() {
        let c: ExperimentConfig = serde_json::from_str(r#"{"p": 10, "models": ["wrmf"]}"#).unwrap();
        assert_eq!(c.p, 10);
        assert_eq!(c.setting(), "dense-p10");
        assert_eq!(c.d, 50);
        assert!(c.validate().is_ok());
        assert!(serde_json::from_str::<ExperimentConfig>(r#"{"nope": 1}"#).is_err());
    }

    #[test]
    fn config_validation() {
        let bad_width = ExperimentConfig {
            d: 20,
            ..ExperimentConfig::default()
        };
        assert!(matches!(bad_width.validate(), Err(Error::Config(_))));
        let wrmf = ExperimentConfig {
            d: 20,
            models: vec![ModelKind::Factor(Variant::Wrmf)],
            ..ExperimentConfig::default()
        };
        assert!(wrmf.validate().is_ok());
        let no_k = ExperimentConfig {
            ks: vec![],
            ..ExperimentConfig::default()
        };
        assert!(no_k.validate().is_err());
    }
}
