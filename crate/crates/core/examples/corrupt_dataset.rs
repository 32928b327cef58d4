//! Injects errors and name ambiguities into the cricket records, then
//! builds a synthetic benchmark with partially filled queries.
//!
//! ```text
//! cargo run --example corrupt_dataset
//! ```

use std::path::Path;

use entity_profile::corrupt::{
    corruption_count, inject_ambiguities, inject_errors, synthetic_benchmark, CorruptionPlan,
    SyntheticConfig,
};
use entity_profile::model::{load_dataset, write_queries, Schema};

fn main() -> entity_profile::Result<()> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/cricket");
    let schema = Schema::load(dir.join("schema.txt"))?;
    let clean = load_dataset(dir.join("records.csv"), &schema)?;

    let plan = CorruptionPlan::new(0.3, 0.5, 42)?;
    let (noisy, n) = inject_errors(&clean, &plan)?;
    let cells: usize = clean
        .records
        .iter()
        .map(|r| r.values.iter().filter(|v| v.is_present()).count())
        .sum();
    println!("{n} of {cells} cells rewritten (expected {})", corruption_count(0.3, cells));
    let (noisy, a) = inject_ambiguities(&noisy, &plan)?;
    println!("{a} names made ambiguous\n");

    let names: Vec<&str> = schema.names().collect();
    for (before, after) in clean.records.iter().zip(&noisy.records) {
        for (j, (x, y)) in before.values.iter().zip(&after.values).enumerate() {
            if x != y {
                println!("  {:>3} {:<8} {:>16} -> {}", before.record_id, names[j], x.to_cell(), y.to_cell());
            }
        }
    }

    let bench = synthetic_benchmark(&SyntheticConfig::uniform(5, 3, 0.2, 0.5, 7))?;
    println!(
        "\nsynthetic benchmark: {} records from {} sources, {} queries",
        bench.dataset.records.len(),
        bench.dataset.sources.len(),
        bench.dataset.queries.len()
    );
    write_queries(std::io::stdout().lock(), &bench.dataset.schema, &bench.dataset.queries)?;
    Ok(())
}
