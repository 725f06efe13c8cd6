// Splits interactions per user, scores two recommenders and writes recall
// and nDCG reports.

use cata::cf::{self, AlsConfig, FactorModel, Hyperparameters, PriorMatrix, Variant};
use cata::eval::{self, MetricReport, Popularity, SplitSpec};
use cata::synth::{self, SynthConfig};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let r = synth::generate(&SynthConfig {
        n_users: 200,
        n_articles: 250,
        n_clusters: 5,
        ..SynthConfig::default()
    })?
    .interactions;
    let spec = SplitSpec::new(1, 0, 3);
    let ks = [10, 50];

    let (mut pop, mut wrmf) = (Vec::new(), Vec::new());
    for rep in spec.reporting_splits() {
        let split = eval::make_split(&r, &spec, rep)?;
        pop.push(eval::evaluate(&Popularity::fit(&split.train), &split, &ks, rep)?);

        let hyper = Hyperparameters { d: 8, ..Hyperparameters::default() };
        let mut model = FactorModel::init(r.n_users(), r.n_articles(), hyper, Variant::Wrmf, rep as u64)?;
        let prior = PriorMatrix::zeros(r.n_articles(), 8);
        cf::train_als(&split.train, &mut model, &prior, &AlsConfig::default())?;
        wrmf.push(eval::evaluate(&model, &split, &ks, rep)?);
    }

    let reports = vec![
        MetricReport::new("pop", "sparse-p1", pop)?,
        MetricReport::new("wrmf", "sparse-p1", wrmf)?,
    ];
    for rep in &reports {
        for m in &rep.mean {
            println!("{:<5} K={:<3} recall {:.4}  ndcg {:.4}", rep.variant, m.k, m.recall, m.ndcg);
        }
    }
    for row in eval::improvement_table(&reports) {
        println!(
            "{} over {} at K={}: recall {:+.1}%  ndcg {:+.1}%",
            row.ours, row.baseline, row.k, row.recall_improvement, row.ndcg_improvement
        );
    }

    let dir = std::env::temp_dir().join(format!("cata-eval-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;
    eval::write_csv(&reports, &dir.join("metrics.csv"))?;
    print!("{}", std::fs::read_to_string(dir.join("metrics.csv"))?);
    std::fs::remove_dir_all(&dir)?;
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
