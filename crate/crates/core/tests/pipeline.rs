use std::fs;
use std::path::Path;

use cata::cf::Variant;
use cata::eval::CsvRow;
use cata::pipeline::{self, ExperimentConfig, ModelKind};
use cata::synth::{self, SynthConfig};
use cata::Error;

fn setup(root: &Path, models: &[&str]) -> ExperimentConfig {
    let data = root.join("data");
    synth::generate(&SynthConfig {
        n_users: 60,
        n_articles: 90,
        n_clusters: 3,
        seed: 11,
        ..SynthConfig::default()
    })
    .unwrap()
    .write_to(&data)
    .unwrap();
    ExperimentConfig {
        data_dir: data,
        out_dir: root.join("out"),
        models: models.iter().map(|m| m.parse().unwrap()).collect(),
        n_repeats: 2,
        d: 4,
        widths: vec![16, 4],
        epochs: 5,
        batch_size: 32,
        vocab_size: 100,
        min_articles_per_tag: 2,
        ks: vec![5, 20],
        max_sweeps: 5,
        ..ExperimentConfig::default()
    }
}

#[test]
fn full_run_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = setup(dir.path(), &["pop", "wrmf", "cata", "cata-tags", "cata++"]);
    let manifest = pipeline::preprocess(&cfg).unwrap();
    assert_eq!((manifest.n_users, manifest.n_articles), (60, 90));
    assert_eq!(manifest.vocab_size, 100);
    assert!(manifest.n_tags.is_some());

    let runs = pipeline::train(&cfg).unwrap();
    assert_eq!(runs.len(), 5);
    assert!(runs[0].final_objective.is_empty());
    assert!(runs[1..].iter().all(|r| r.final_objective.len() == 2));
    let has = |r: &pipeline::TrainSummary, f: &str| r.run_dir.join(f).exists();
    assert!(!has(&runs[1], pipeline::TEXT_AE) && !has(&runs[1], pipeline::TAGS_AE));
    assert!(has(&runs[2], pipeline::TEXT_AE) && !has(&runs[2], pipeline::TAGS_AE));
    assert!(!has(&runs[3], pipeline::TEXT_AE) && has(&runs[3], pipeline::TAGS_AE));
    assert!(has(&runs[4], pipeline::TEXT_AE) && has(&runs[4], pipeline::TAGS_AE));
    assert!(runs[4].run_dir.join("split-1").join(pipeline::FACTORS).exists());

    let out = pipeline::evaluate(&cfg, false).unwrap();
    assert_eq!(out.reports.len(), 5);
    for rep in &out.reports {
        // split 0 is held back for validation
        assert_eq!(rep.splits.len(), 1);
        assert_eq!(rep.splits[0].split, 1);
        for m in &rep.mean {
            assert!((0.0..=1.0).contains(&m.recall) && (0.0..=1.0).contains(&m.ndcg));
        }
    }
    let mut reader = csv::Reader::from_path(out.report_dir.join("metrics.csv")).unwrap();
    let rows: Vec<CsvRow> = reader.deserialize().collect::<Result<_, _>>().unwrap();
    assert_eq!(rows.len(), 5 * 2 * 2);
    assert_eq!(rows[0].variant, "pop");
    assert_eq!(rows[0].setting, "sparse-p1");
    let improvement = fs::read_to_string(out.report_dir.join("improvement.csv")).unwrap();
    assert_eq!(improvement.lines().count(), 1 + 5 * 4 * 2);
    assert!(improvement.starts_with("ours,baseline,K,recall_improvement,ndcg_improvement"));

    let again = pipeline::evaluate(&cfg, false).unwrap();
    assert_eq!(again.reports, out.reports);
    assert_eq!(again.report_dir, out.report_dir);

    let validation = pipeline::evaluate(&cfg, true).unwrap();
    assert_eq!(validation.reports[0].splits[0].split, 0);
    assert_ne!(validation.report_dir, out.report_dir);

    let recs = pipeline::recommend(&cfg, 3, 7, 1).unwrap();
    assert_eq!(recs.len(), 7);
    assert!(recs.windows(2).all(|w| w[0].score >= w[1].score));
}

#[test]
fn preprocessing_is_byte_identical_on_rerun() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = setup(dir.path(), &["cata++"]);
    pipeline::preprocess(&cfg).unwrap();
    let cache = cfg.cache_dir();
    let snapshot = |names: &[&str]| names.iter().map(|n| fs::read(cache.join(n)).unwrap()).collect::<Vec<_>>();
    let names = [
        pipeline::INTERACTIONS_CACHE,
        pipeline::CONTENT_CACHE,
        pipeline::TAGS_CACHE,
        pipeline::VOCAB_FILE,
        pipeline::MANIFEST,
    ];
    let first = snapshot(&names);
    pipeline::preprocess(&cfg).unwrap();
    assert_eq!(snapshot(&names), first);
}

#[test]
fn training_is_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let ca = setup(a.path(), &["cata++"]);
    let cb = setup(b.path(), &["cata++"]);
    pipeline::preprocess(&ca).unwrap();
    pipeline::preprocess(&cb).unwrap();
    let ra = pipeline::train(&ca).unwrap();
    let rb = pipeline::train(&cb).unwrap();
    assert_eq!(ra[0].final_objective, rb[0].final_objective);
    let f = |r: &pipeline::TrainSummary| fs::read(r.run_dir.join("split-0").join(pipeline::FACTORS)).unwrap();
    assert_eq!(f(&ra[0]), f(&rb[0]));
}

#[test]
fn missing_tags_file_only_matters_for_tag_models() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = setup(dir.path(), &["cata"]);
    fs::remove_file(cfg.data_dir.join(synth::TAGS_FILE)).unwrap();
    let manifest = pipeline::preprocess(&cfg).unwrap();
    assert_eq!(manifest.n_tags, None);
    pipeline::train(&cfg).unwrap();

    cfg.models = vec![ModelKind::Factor(Variant::CataTags)];
    assert!(matches!(pipeline::preprocess(&cfg), Err(Error::Io { .. })));
}

#[test]
fn failed_training_leaves_no_partial_output() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = setup(dir.path(), &["cata"]);
    fs::remove_file(cfg.data_dir.join(synth::TAGS_FILE)).unwrap();
    pipeline::preprocess(&cfg).unwrap();
    cfg.models = vec![ModelKind::Factor(Variant::CataPlusPlus)];
    assert!(pipeline::train(&cfg).is_err());
    let runs = cfg.out_dir.join("runs");
    let leftovers: Vec<_> = fs::read_dir(&runs).map(|d| d.count()).into_iter().collect();
    assert_eq!(leftovers, vec![0]);
}

#[test]
fn evaluating_untrained_model_fails() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = setup(dir.path(), &["wrmf"]);
    pipeline::preprocess(&cfg).unwrap();
    assert!(matches!(pipeline::evaluate(&cfg, false), Err(Error::Io { .. })));
}

#[test]
fn single_k_gives_one_row_per_split() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = setup(dir.path(), &["pop"]);
    cfg.ks = vec![10];
    cfg.n_repeats = 1;
    pipeline::preprocess(&cfg).unwrap();
    pipeline::train(&cfg).unwrap();
    let out = pipeline::evaluate(&cfg, false).unwrap();
    let text = fs::read_to_string(out.report_dir.join("metrics.csv")).unwrap();
    // header, split 0, mean
    assert_eq!(text.lines().count(), 3);
    assert!(!out.report_dir.join("improvement.csv").exists());
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = setup(dir.path(), &["wrmf"]);
    pipeline::preprocess(&cfg).unwrap();
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| {
            pipeline::train(&cfg).unwrap();
            let factors = fs::read(
                pipeline::train(&cfg).unwrap()[0].run_dir.join("split-1").join(pipeline::FACTORS),
            )
            .unwrap();
            (factors, pipeline::evaluate(&cfg, false).unwrap().reports)
        })
    };
    assert_eq!(run(1), run(4));
}
