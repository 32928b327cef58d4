//! Completes the three cricket queries with a perfect resolver and prints
//! the selection trace for every filled slot.
//!
//! ```text
//! cargo run --example profile_cricket
//! ```

use std::path::Path;

use entity_profile::model::{load_dataset, load_queries, load_truth, Schema};
use entity_profile::profile::{write_profiles, Decision, OracleResolver, Profiler};
use entity_profile::similarity::{EmbeddingStore, SimilarityModel};
use entity_profile::sources::{source_ratings, trustworthiness_scores, SourceSimilarityMatrix};

fn main() -> entity_profile::Result<()> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/cricket");
    let schema = Schema::load(dir.join("schema.txt"))?;
    let embeddings = EmbeddingStore::load(dir.join("embeddings.txt"))?;
    let dataset = load_dataset(dir.join("records.csv"), &schema)?
        .with_queries(load_queries(dir.join("queries.csv"), &schema)?);
    let truth = load_truth(dir.join("truth.csv"), &schema)?;

    let matrix = SourceSimilarityMatrix::load(dir.join("matrix.csv"))?;
    let trust = trustworthiness_scores(&matrix)?;
    let ratings = source_ratings(&matrix, "s2", 2.0)?;
    let sim = SimilarityModel::new(&schema, &embeddings);
    let profiler = Profiler::new(&dataset, sim, &matrix, &trust, &ratings)?;

    let queries: Vec<_> = dataset.queries.iter().collect();
    let profiles = profiler.complete_all(&queries, &OracleResolver)?;

    for p in &profiles {
        println!("{} <- {}", p.query_id, p.associated_record_ids.join(", "));
        for t in p.traces.iter().filter(|t| t.decision == Decision::Product) {
            println!("  {}:", t.attribute);
            for (i, c) in t.candidates.iter().enumerate() {
                let mark = if t.chosen == Some(i) { '*' } else { ' ' };
                println!(
                    "   {mark} {:<16} S={:.4} F={} T={:.4} V1={:.3} V3={:.4}  [{}]",
                    c.value.to_cell(),
                    c.s,
                    c.f,
                    c.t,
                    c.v1,
                    c.v3,
                    c.sources.join(" ")
                );
            }
        }
        let expected = &truth[&p.query_id];
        println!("  matches ground truth: {}", &p.values == expected);
    }

    println!();
    write_profiles(std::io::stdout().lock(), &schema, &profiles)?;
    Ok(())
}
