//! Trains all four resolution classifiers on a synthetic benchmark and
//! picks the one with the best held-out F1.
//!
//! ```text
//! cargo run --release --example classifier_selection
//! ```

use entity_profile::classify::{
    build_training_set, select_model, train, ClassifierKind, Hyperparameters, SelectionOptions,
};
use entity_profile::corrupt::{synthetic_benchmark, SyntheticConfig};
use entity_profile::profile::trust_per_source;
use entity_profile::similarity::SimilarityModel;
use entity_profile::sources::{build_source_similarity_matrix, trustworthiness_scores};

fn main() -> entity_profile::Result<()> {
    let seed = 1;
    let bench = synthetic_benchmark(&SyntheticConfig::uniform(60, 4, 0.2, 0.5, seed))?;
    let ds = &bench.dataset;
    let sim = SimilarityModel::new(&ds.schema, &bench.embeddings);

    let matrix = build_source_similarity_matrix(ds, &sim)?;
    let trust = trustworthiness_scores(&matrix)?;
    let per_source = trust_per_source(ds, &trust)?;
    let training = build_training_set(ds, &sim, &per_source, 0.7, seed)?;
    let positives = training.train.iter().filter(|e| e.label == 1).count();
    println!(
        "{} training pairs ({positives} positive) from {} queries",
        training.train.len(),
        training.train_queries.len()
    );

    let hp = Hyperparameters::default();
    let options = SelectionOptions {
        cv_folds: Some(5),
        ..SelectionOptions::default()
    };
    let selection = select_model(&training.train, &ClassifierKind::ALL, hp, seed, options)?;
    println!("\n{:<8}{:>8}{:>10}{:>8}{:>8}", "kind", "F1", "CV err %", "AUC", "MCC");
    for row in &selection.rows {
        println!(
            "{:<8}{:>8.4}{:>10.2}{:>8.4}{:>8.4}",
            row.kind.as_str(),
            row.f1,
            row.cv_error.unwrap_or(f64::NAN),
            row.roc_auc,
            row.mcc
        );
    }
    println!("\nselected: {}", selection.best.as_str());

    let model = train(selection.best, &training.train, hp, seed)?;
    let json = model.to_json()?;
    println!("serialized model: {} bytes", json.len());
    Ok(())
}
