//! Attribute and tuple similarity on the cricket fixture.
//!
//! ```text
//! cargo run --example similarity
//! ```

use std::path::Path;

use entity_profile::model::{load_dataset, load_queries, Schema};
use entity_profile::similarity::{
    embedding_similarity, levenshtein_similarity, numeric_similarity, EmbeddingStore,
    SimilarityModel,
};

fn main() -> entity_profile::Result<()> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/cricket");
    let schema = Schema::load(dir.join("schema.txt"))?;
    let embeddings = EmbeddingStore::load(dir.join("embeddings.txt"))?;
    let records = load_dataset(dir.join("records.csv"), &schema)?;
    let queries = load_queries(dir.join("queries.csv"), &schema)?;

    println!("numeric 125 vs 100:          {:.4}", numeric_similarity(125.0, 100.0));
    println!("levenshtein Gavaskar/Gavskar: {:.4}", levenshtein_similarity("Gavaskar", "Gavskar"));
    match embedding_similarity("Sunil Gavaskar", "Gavaskar", &embeddings) {
        Some(s) => println!("embedding Sunil Gavaskar/Gavaskar: {s:.4}"),
        None => println!("embedding: out of vocabulary, falls back to edit distance"),
    }

    let sim = SimilarityModel::new(&schema, &embeddings);
    let q1 = &queries[0];
    println!("\nquery {} against every record:", q1.query_id);
    for r in &records.records {
        println!(
            "  {:>3} ({})  {:.4}",
            r.record_id,
            r.source_id,
            sim.query_record_similarity(q1, r)
        );
    }

    let r6 = records.record_by_id("r6").expect("fixture record");
    let r10 = records.record_by_id("r10").expect("fixture record");
    println!("\nrecord r6 vs r10: {:.4}", sim.record_similarity(r6, r10));
    Ok(())
}
