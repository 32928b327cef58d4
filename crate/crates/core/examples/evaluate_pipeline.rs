//! End-to-end run on a synthetic benchmark with one clean source. Compares
//! biased and uniform source ratings with a paired t-test.
//!
//! ```text
//! cargo run --release --example evaluate_pipeline
//! ```

use entity_profile::corrupt::{synthetic_benchmark, SourceNoise, SyntheticConfig};
use entity_profile::pipeline::{run, RatingMode, RunConfig};
use entity_profile::similarity::SimilarityModel;

fn main() -> entity_profile::Result<()> {
    let config = SyntheticConfig {
        entities: 100,
        sources: vec![
            SourceNoise::new("s1", 1.0, 0.3, 0.3),
            SourceNoise::new("s2", 1.0, 0.0, 0.0),
            SourceNoise::new("s3", 0.6, 0.3, 0.3),
            SourceNoise::new("s4", 0.6, 0.3, 0.3),
        ],
        filled: 3,
        seed: 3,
    };
    let bench = synthetic_benchmark(&config)?;
    let sim = SimilarityModel::new(&bench.dataset.schema, &bench.embeddings);

    let run_config = RunConfig {
        seed: 3,
        ratings: RatingMode::Biased {
            source: "s2".into(),
            value: 2.0,
        },
        ..RunConfig::default()
    };
    let outcome = run(&bench.dataset, &sim, &run_config, None)?;
    let report = &outcome.report;

    println!("most trustworthy source: {}", report.sources.most_trustworthy);
    println!("training pairs: {}, test queries: {}", report.training_pairs, report.test_queries);
    if let Some(m) = &report.classifier_metrics {
        println!("classifier {} F1 {:.4} MCC {:.4}", m.kind.as_str(), m.f1, m.mcc);
    }
    let m = &report.metrics;
    println!(
        "\nbiased:  precision {:.2}%  recall {:.2}%  accuracy {:.2}%",
        m.precision, m.recall, m.accuracy
    );
    if let Some(ablation) = &report.ablation {
        let u = &ablation.uniform;
        println!(
            "uniform: precision {:.2}%  recall {:.2}%  accuracy {:.2}%",
            u.precision, u.recall, u.accuracy
        );
        for c in &ablation.comparisons {
            match &c.test {
                Some(t) => println!(
                    "  {:<9} t={:+.3} p={:.4} effect={:.3}",
                    c.metric, t.t_value, t.p_value, t.effect_size
                ),
                None => println!("  {:<9} identical runs, no test", c.metric),
            }
        }
    }
    Ok(())
}
