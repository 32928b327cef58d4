//! Source similarity matrix, trustworthiness and biased ratings.
//!
//! ```text
//! cargo run --example source_trust
//! ```

use std::path::Path;

use entity_profile::model::{load_dataset, Schema};
use entity_profile::similarity::{EmbeddingStore, SimilarityModel};
use entity_profile::sources::{
    build_source_similarity_matrix, source_ratings, trustworthiness_scores, SourceSimilarityMatrix,
};

fn print_matrix(title: &str, m: &SourceSimilarityMatrix) {
    println!("{title}");
    print!("{:>6}", "");
    for s in &m.source_order {
        print!("{s:>8}");
    }
    println!();
    for (i, row) in m.source_order.iter().enumerate() {
        print!("{row:>6}");
        for j in 0..m.len() {
            print!("{:>8.3}", m.get(i, j));
        }
        println!();
    }
}

fn main() -> entity_profile::Result<()> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/cricket");
    let schema = Schema::load(dir.join("schema.txt"))?;
    let embeddings = EmbeddingStore::load(dir.join("embeddings.txt"))?;
    let dataset = load_dataset(dir.join("records.csv"), &schema)?;
    let sim = SimilarityModel::new(&schema, &embeddings);

    let computed = build_source_similarity_matrix(&dataset, &sim)?;
    print_matrix("computed from the records:", &computed);

    // The published matrix drives the worked example downstream.
    let matrix = SourceSimilarityMatrix::load(dir.join("matrix.csv"))?;
    print_matrix("\npublished:", &matrix);

    let trust = trustworthiness_scores(&matrix)?;
    println!("\nmost trustworthy source: {}", trust.most_trustworthy());
    for (s, t) in trust.source_order.iter().zip(&trust.trust) {
        println!("  trust({s}) = {t:.4}");
    }

    let ratings = source_ratings(&matrix, "s2", 2.0)?;
    println!("\nratings with s2 biased at 2.0:");
    for (s, r) in ratings.source_order.iter().zip(&ratings.ratings) {
        println!("  {s}: {r:.4}");
    }
    println!("highest rated: {}", ratings.source_order[ratings.index_of_maximum]);
    Ok(())
}
