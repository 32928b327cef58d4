//! Seeded generation of noisy benchmark inputs: cell errors, name
//! ambiguities, partially filled queries and whole synthetic datasets.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{AttributeKind, AttributeValue, Dataset, Query, Record, Schema};
use crate::similarity::EmbeddingStore;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorruptionPlan {
    pub error_rate: f64,
    pub ambiguity_rate: f64,
    pub seed: u64,
    /// Attribute rewritten by ambiguity injection; defaults to the first
    /// text attribute.
    pub name_attribute: Option<usize>,
}

impl CorruptionPlan {
    pub fn new(error_rate: f64, ambiguity_rate: f64, seed: u64) -> Result<Self> {
        for (name, rate) in [("error", error_rate), ("ambiguity", ambiguity_rate)] {
            if !(0.0..=1.0).contains(&rate) {
                return Err(Error::InvalidArgument(format!("{name} rate {rate} outside [0, 1]")));
            }
        }
        Ok(CorruptionPlan {
            error_rate,
            ambiguity_rate,
            seed,
            name_attribute: None,
        })
    }
}

/// `floor(rate * n)`, robust to rates like 0.3 that are not exact in binary.
pub fn corruption_count(rate: f64, n: usize) -> usize {
    let exact = rate * n as f64;
    let rounded = exact.round();
    let count = if (exact - rounded).abs() < 1e-9 { rounded } else { exact.floor() };
    (count as usize).min(n)
}

/// Replaces exactly `corruption_count(rate, cells)` present cells with
/// erroneous values. Returns the corrupted copy and the number of cells
/// changed.
pub fn inject_errors(dataset: &Dataset, plan: &CorruptionPlan) -> Result<(Dataset, usize)> {
    let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);
    let cells = present_cells(dataset, |_| true);
    let mut out = dataset.clone();
    let n = corrupt_cells(dataset, &mut out, cells, plan.error_rate, &mut rng);
    Ok((out, n))
}

fn present_cells(dataset: &Dataset, keep: impl Fn(&Record) -> bool) -> Vec<(usize, usize)> {
    dataset
        .records
        .iter()
        .enumerate()
        .filter(|(_, r)| keep(r))
        .flat_map(|(i, r)| {
            r.values
                .iter()
                .enumerate()
                .filter(|(_, v)| v.is_present())
                .map(move |(j, _)| (i, j))
        })
        .collect()
}

fn corrupt_cells(
    original: &Dataset,
    out: &mut Dataset,
    mut cells: Vec<(usize, usize)>,
    rate: f64,
    rng: &mut ChaCha8Rng,
) -> usize {
    let count = corruption_count(rate, cells.len());
    cells.shuffle(rng);
    cells.truncate(count);
    for &(i, j) in &cells {
        let record = &original.records[i];
        out.records[i].values[j] = match &record.values[j] {
            AttributeValue::Number(x) => AttributeValue::Number(perturb_number(*x, rng)),
            AttributeValue::Text(s) => AttributeValue::Text(replace_text(original, i, j, s, rng)),
            AttributeValue::Missing => unreachable!("only present cells are corrupted"),
        };
    }
    count
}

/// Uniform draw from `[0.5x, 1.5x]` other than `x`; zero draws from
/// `[-0.5, 0.5]`.
fn perturb_number(x: f64, rng: &mut impl Rng) -> f64 {
    let half = if x == 0.0 { 0.5 } else { 0.5 * x.abs() };
    loop {
        let v = rng.random_range(x - half..=x + half);
        if v != x {
            return v;
        }
    }
}

/// A token shuffle of another entity's value for the same attribute,
/// guaranteed to differ from `current`.
fn replace_text(dataset: &Dataset, record: usize, attribute: usize, current: &str, rng: &mut impl Rng) -> String {
    let entity = dataset.records[record].entity_id.as_deref();
    let pool: Vec<&str> = dataset
        .records
        .iter()
        .filter(|r| entity.is_none() || r.entity_id.as_deref() != entity)
        .filter_map(|r| match &r.values[attribute] {
            AttributeValue::Text(s) if s != current => Some(s.as_str()),
            _ => None,
        })
        .collect();
    for _ in 0..8 {
        let Some(donor) = pool.choose(rng) else { break };
        let mut tokens: Vec<&str> = donor.split_whitespace().collect();
        tokens.shuffle(rng);
        let candidate = tokens.join(" ");
        if candidate != current && !candidate.is_empty() {
            return candidate;
        }
    }
    let mut chars: Vec<char> = current.chars().collect();
    chars.shuffle(rng);
    let shuffled: String = chars.into_iter().collect();
    if shuffled != current {
        shuffled
    } else {
        format!("{current}*")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NameTransform {
    Abbreviate,
    DropFirst,
    DropLast,
}

/// Applies a transform; single-token names can only be abbreviated.
pub fn transform_name(name: &str, transform: NameTransform) -> String {
    let tokens: Vec<&str> = name.split_whitespace().collect();
    if tokens.is_empty() {
        return name.to_string();
    }
    let transform = if tokens.len() == 1 { NameTransform::Abbreviate } else { transform };
    match transform {
        NameTransform::Abbreviate => {
            let initial: String = tokens[0].chars().take(1).collect();
            let mut out = vec![format!("{initial}.")];
            out.extend(tokens[1..].iter().map(|t| t.to_string()));
            out.join(" ")
        }
        NameTransform::DropFirst => tokens[1..].join(" "),
        NameTransform::DropLast => tokens[..tokens.len() - 1].join(" "),
    }
}

fn name_attribute(schema: &Schema, plan: &CorruptionPlan) -> Result<usize> {
    let index = match plan.name_attribute {
        Some(i) => i,
        None => (0..schema.len())
            .find(|&i| schema.kind(i) == AttributeKind::Text)
            .ok_or_else(|| Error::InvalidArgument("schema has no text attribute to make ambiguous".into()))?,
    };
    if index >= schema.len() || schema.kind(index) != AttributeKind::Text {
        return Err(Error::InvalidArgument(format!("attribute {index} is not a text attribute")));
    }
    Ok(index)
}

/// Rewrites the name cell of exactly `corruption_count(rate, n)` records
/// that carry a name. Returns the copy and the number of records touched.
pub fn inject_ambiguities(dataset: &Dataset, plan: &CorruptionPlan) -> Result<(Dataset, usize)> {
    let attribute = name_attribute(&dataset.schema, plan)?;
    let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);
    let rows: Vec<usize> = (0..dataset.records.len()).collect();
    let mut out = dataset.clone();
    let n = ambiguate(&mut out, rows, attribute, plan.ambiguity_rate, &mut rng);
    Ok((out, n))
}

fn ambiguate(out: &mut Dataset, rows: Vec<usize>, attribute: usize, rate: f64, rng: &mut ChaCha8Rng) -> usize {
    let mut rows: Vec<usize> = rows
        .into_iter()
        .filter(|&i| matches!(out.records[i].values[attribute], AttributeValue::Text(_)))
        .collect();
    let count = corruption_count(rate, rows.len());
    rows.shuffle(rng);
    rows.truncate(count);
    const TRANSFORMS: [NameTransform; 3] =
        [NameTransform::Abbreviate, NameTransform::DropFirst, NameTransform::DropLast];
    for &i in &rows {
        let t = TRANSFORMS[rng.random_range(0..3)];
        if let AttributeValue::Text(name) = &out.records[i].values[attribute] {
            let changed = transform_name(name, t);
            out.records[i].values[attribute] = AttributeValue::Text(changed);
        }
    }
    count
}

/// Applies errors, then ambiguities, from one seed.
pub fn corrupt(dataset: &Dataset, plan: &CorruptionPlan) -> Result<Dataset> {
    let (noisy, _) = inject_errors(dataset, plan)?;
    let ambiguity_plan = CorruptionPlan {
        seed: plan.seed.wrapping_add(1),
        ..*plan
    };
    if plan.ambiguity_rate == 0.0 {
        return Ok(noisy);
    }
    Ok(inject_ambiguities(&noisy, &ambiguity_plan)?.0)
}

/// Queries with their ground-truth profiles.
#[derive(Debug, Clone, PartialEq)]
pub struct QuerySet {
    pub queries: Vec<Query>,
    pub truth: BTreeMap<String, Vec<AttributeValue>>,
}

/// One query per entity, with a seeded random `A - filled` attributes blanked.
/// Query ids are `q<entity_id>`.
pub fn make_queries(
    entities: &BTreeMap<String, Vec<AttributeValue>>,
    attribute_count: usize,
    filled: usize,
    seed: u64,
) -> Result<QuerySet> {
    if filled == 0 || filled >= attribute_count {
        return Err(Error::InvalidArgument(format!(
            "filled count must be in 1..{attribute_count}, got {filled}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut queries = Vec::with_capacity(entities.len());
    let mut truth = BTreeMap::new();
    for (entity, values) in entities {
        if values.len() != attribute_count {
            return Err(Error::InvalidArgument(format!(
                "entity `{entity}` has {} values, expected {attribute_count}",
                values.len()
            )));
        }
        let mut slots: Vec<usize> = (0..attribute_count).collect();
        slots.shuffle(&mut rng);
        let mut q = values.clone();
        for &s in &slots[..attribute_count - filled] {
            q[s] = AttributeValue::Missing;
        }
        let query_id = format!("q{entity}");
        truth.insert(query_id.clone(), values.clone());
        queries.push(Query {
            query_id,
            values: q,
            entity_id: Some(entity.clone()),
        });
    }
    Ok(QuerySet { queries, truth })
}

const FIRST_NAMES: [&str; 40] = [
    "Lionel", "Cristiano", "Andres", "Xavi", "Sergio", "Iker", "Gerard", "Carles", "David",
    "Fernando", "Thomas", "Manuel", "Philipp", "Bastian", "Mesut", "Miroslav", "Arjen", "Wesley",
    "Robin", "Zlatan", "Luka", "Ivan", "Gianluigi", "Andrea", "Francesco", "Paolo", "Karim",
    "Franck", "Thierry", "Patrick", "Wayne", "Steven", "Frank", "John", "Rio", "Didier", "Yaya",
    "Samuel", "Kaka", "Ronaldo",
];

const LAST_NAMES: [&str; 40] = [
    "Messi", "Silva", "Iniesta", "Hernandez", "Ramos", "Casillas", "Pique", "Puyol", "Villa",
    "Torres", "Muller", "Neuer", "Lahm", "Schweinsteiger", "Ozil", "Klose", "Robben", "Sneijder",
    "Persie", "Ibrahimovic", "Modric", "Rakitic", "Buffon", "Pirlo", "Totti", "Maldini", "Benzema",
    "Ribery", "Henry", "Vieira", "Rooney", "Gerrard", "Lampard", "Terry", "Ferdinand", "Drogba",
    "Toure", "Etoo", "Santos", "Costa",
];

const POSITIONS: [&str; 8] = [
    "Goalkeeper", "Centre Back", "Full Back", "Defensive Midfielder", "Central Midfielder",
    "Attacking Midfielder", "Winger", "Striker",
];

const BIRTH_PLACES: [&str; 30] = [
    "Rosario", "Funchal", "Fuentealbilla", "Terrassa", "Camas", "Madrid", "Barcelona", "Asturias",
    "Fuenlabrada", "Munich", "Gelsenkirchen", "Kassel", "Bremen", "Opole", "Groningen", "Utrecht",
    "Rotterdam", "Malmo", "Zadar", "Rheinfelden", "Carrara", "Flero", "Rome", "Milan", "Lyon",
    "Boulogne", "Paris", "Liverpool", "Abidjan", "Douala",
];

/// The fixed schema of generated benchmarks: football player records.
pub fn synthetic_schema() -> Schema {
    Schema::from_pairs([
        ("name", AttributeKind::Text),
        ("birth_date", AttributeKind::Text),
        ("height", AttributeKind::Numeric),
        ("weight", AttributeKind::Numeric),
        ("position", AttributeKind::Text),
        ("birth_place", AttributeKind::Text),
    ])
    .expect("static schema is valid")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceNoise {
    pub source_id: String,
    /// Probability that the source publishes a record for an entity.
    pub coverage: f64,
    pub error_rate: f64,
    pub ambiguity_rate: f64,
    /// Fraction of the source's cells left empty.
    pub missing_rate: f64,
}

impl SourceNoise {
    pub fn new(source_id: impl Into<String>, coverage: f64, error_rate: f64, ambiguity_rate: f64) -> Self {
        SourceNoise {
            source_id: source_id.into(),
            coverage,
            error_rate,
            ambiguity_rate,
            missing_rate: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticConfig {
    pub entities: usize,
    pub sources: Vec<SourceNoise>,
    /// Attributes left filled in each query.
    pub filled: usize,
    pub seed: u64,
}

impl SyntheticConfig {
    /// `sources` sources with full coverage and identical noise.
    pub fn uniform(entities: usize, sources: usize, error_rate: f64, ambiguity_rate: f64, seed: u64) -> Self {
        SyntheticConfig {
            entities,
            sources: (1..=sources)
                .map(|i| SourceNoise::new(format!("s{i}"), 1.0, error_rate, ambiguity_rate))
                .collect(),
            filled: 4,
            seed,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticBenchmark {
    /// Records, queries and query ground truth.
    pub dataset: Dataset,
    /// Clean attribute values per entity id.
    pub entities: BTreeMap<String, Vec<AttributeValue>>,
    /// Random word vectors for every token the generator can emit.
    pub embeddings: EmbeddingStore,
}

/// Generates clean entities, publishes per-source copies, then corrupts each
/// source according to its noise settings. Deterministic in `config.seed`.
pub fn synthetic_benchmark(config: &SyntheticConfig) -> Result<SyntheticBenchmark> {
    if config.sources.is_empty() {
        return Err(Error::InvalidArgument("synthetic benchmark needs at least one source".into()));
    }
    if config.entities > FIRST_NAMES.len() * LAST_NAMES.len() {
        return Err(Error::InvalidArgument(format!(
            "at most {} distinct entities can be generated",
            FIRST_NAMES.len() * LAST_NAMES.len()
        )));
    }
    for s in &config.sources {
        for (what, p) in [
            ("coverage", s.coverage),
            ("error rate", s.error_rate),
            ("ambiguity rate", s.ambiguity_rate),
            ("missing rate", s.missing_rate),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidArgument(format!(
                    "source `{}`: {what} {p} outside [0, 1]",
                    s.source_id
                )));
            }
        }
    }
    let schema = synthetic_schema();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let mut used = BTreeSet::new();
    let mut entities = BTreeMap::new();
    let width = config.entities.to_string().len();
    for e in 0..config.entities {
        let name = loop {
            let n = format!(
                "{} {}",
                FIRST_NAMES.choose(&mut rng).expect("non-empty"),
                LAST_NAMES.choose(&mut rng).expect("non-empty")
            );
            if used.insert(n.clone()) {
                break n;
            }
        };
        let birth_date = format!(
            "{}-{:02}-{:02}",
            rng.random_range(1970..=2002),
            rng.random_range(1..=12),
            rng.random_range(1..=28)
        );
        let height: u32 = rng.random_range(165..=200);
        let weight = (f64::from(height) - 100.0 + rng.random_range(-12.0..12.0_f64)).round();
        entities.insert(
            format!("e{e:0width$}"),
            vec![
                AttributeValue::Text(name),
                AttributeValue::Text(birth_date),
                AttributeValue::Number(f64::from(height)),
                AttributeValue::Number(weight),
                AttributeValue::text(*POSITIONS.choose(&mut rng).expect("non-empty")),
                AttributeValue::text(*BIRTH_PLACES.choose(&mut rng).expect("non-empty")),
            ],
        );
    }

    let mut records = Vec::new();
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); config.sources.len()];
    for (si, noise) in config.sources.iter().enumerate() {
        for (entity, values) in &entities {
            if rng.random_bool(noise.coverage) {
                members[si].push(records.len());
                records.push(Record {
                    record_id: format!("r{}", records.len() + 1),
                    source_id: noise.source_id.clone(),
                    values: values.clone(),
                    entity_id: Some(entity.clone()),
                });
            }
        }
    }
    let clean = Dataset::from_records(schema.clone(), records)?;
    let mut noisy = clean.clone();
    for (si, noise) in config.sources.iter().enumerate() {
        let rows: BTreeSet<usize> = members[si].iter().copied().collect();
        let cells: Vec<(usize, usize)> = present_cells(&clean, |_| true)
            .into_iter()
            .filter(|(i, _)| rows.contains(i))
            .collect();
        corrupt_cells(&clean, &mut noisy, cells, noise.error_rate, &mut rng);
        ambiguate(&mut noisy, members[si].clone(), 0, noise.ambiguity_rate, &mut rng);
        let mut blanks: Vec<(usize, usize)> = present_cells(&noisy, |_| true)
            .into_iter()
            .filter(|(i, _)| rows.contains(i))
            .collect();
        let count = corruption_count(noise.missing_rate, blanks.len());
        blanks.shuffle(&mut rng);
        for &(i, j) in &blanks[..count] {
            noisy.records[i].values[j] = AttributeValue::Missing;
        }
    }

    let queries = make_queries(&entities, schema.len(), config.filled, rng.random())?;
    let dataset = noisy.with_queries(queries.queries).with_truth(queries.truth);
    let embeddings = random_embeddings(
        FIRST_NAMES
            .iter()
            .chain(&LAST_NAMES)
            .chain(&POSITIONS)
            .chain(&BIRTH_PLACES)
            .flat_map(|s| s.split_whitespace()),
        16,
        rng.random(),
    )?;
    Ok(SyntheticBenchmark {
        dataset,
        entities,
        embeddings,
    })
}

/// Independent Gaussian vectors per token; distinct tokens end up close to
/// orthogonal.
pub fn random_embeddings<'a>(
    tokens: impl IntoIterator<Item = &'a str>,
    dimension: usize,
    seed: u64,
) -> Result<EmbeddingStore> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut store = EmbeddingStore::new(dimension)?;
    let unique: BTreeSet<&str> = tokens.into_iter().collect();
    for token in unique {
        let v: Vec<f64> = (0..dimension)
            .map(|_| rng.sample::<f64, _>(rand::distr::StandardUniform) * 2.0 - 1.0)
            .collect();
        store.insert(token, v)?;
    }
    Ok(store)
}
