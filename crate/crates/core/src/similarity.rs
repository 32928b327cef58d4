//! Attribute, record and query similarity.
//!
//! Numbers compare by percentage difference. Text compares through a
//! [`TextSimilarity`] backend: an embedding store when every token is known,
//! normalized edit distance otherwise.

use std::collections::HashMap;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::{AttributeKind, AttributeValue, Schema};

/// Similarity assigned when either side of an attribute pair is missing.
pub const MISSING_PAIR_SIMILARITY: f64 = 0.0001;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimilarityConfig {
    pub missing_pair_similarity: f64,
}

impl Default for SimilarityConfig {
    fn default() -> Self {
        SimilarityConfig {
            missing_pair_similarity: MISSING_PAIR_SIMILARITY,
        }
    }
}

impl SimilarityConfig {
    pub fn new(missing_pair_similarity: f64) -> Result<Self> {
        if !(missing_pair_similarity > 0.0 && missing_pair_similarity <= 0.001) {
            return Err(Error::InvalidArgument(format!(
                "missing-pair similarity must lie in (0, 0.001], got {missing_pair_similarity}"
            )));
        }
        Ok(SimilarityConfig {
            missing_pair_similarity,
        })
    }
}

/// `1 - |a - b| / max(|a|, |b|)`, clamped to `[0, 1]`.
pub fn numeric_similarity(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        return 1.0;
    }
    (1.0 - (a - b).abs() / scale).clamp(0.0, 1.0)
}

/// `1 - levenshtein(a, b) / max(len(a), len(b))`, counted in chars.
pub fn levenshtein_similarity(a: &str, b: &str) -> f64 {
    let longest = a.chars().count().max(b.chars().count());
    if longest == 0 {
        return 1.0;
    }
    1.0 - strsim::levenshtein(a, b) as f64 / longest as f64
}

/// Word vectors keyed by exact (case-sensitive) token.
#[derive(Debug, Clone, Default)]
pub struct EmbeddingStore {
    dimension: usize,
    entries: HashMap<String, Vec<f64>>,
}

impl EmbeddingStore {
    pub fn new(dimension: usize) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::InvalidArgument("embedding dimension must be positive".into()));
        }
        Ok(EmbeddingStore {
            dimension,
            entries: HashMap::new(),
        })
    }

    pub fn insert(&mut self, token: impl Into<String>, vector: Vec<f64>) -> Result<()> {
        let token = token.into();
        if vector.len() != self.dimension {
            return Err(Error::InvalidArgument(format!(
                "vector for `{token}` has {} components, expected {}",
                vector.len(),
                self.dimension
            )));
        }
        if vector.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument(format!("vector for `{token}` is not finite")));
        }
        self.entries.insert(token, vector);
        Ok(())
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, token: &str) -> Option<&[f64]> {
        self.entries.get(token).map(Vec::as_slice)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read(path, file)
    }

    /// Reads the text format: a `count dimension` header line, then one
    /// `token v1 ... vD` line per entry.
    pub fn read<R: Read>(path: &Path, input: R) -> Result<Self> {
        let mut lines = BufReader::new(input).lines();
        let header = lines
            .next()
            .transpose()
            .map_err(|e| Error::io(path, e))?
            .ok_or_else(|| Error::parse(path, 1, "empty embedding file"))?;
        let mut parts = header.split_whitespace();
        let count: usize = parts
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::parse(path, 1, "header must be `count dimension`"))?;
        let dimension: usize = parts
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::parse(path, 1, "header must be `count dimension`"))?;
        let mut store = EmbeddingStore::new(dimension)?;
        for (i, line) in lines.enumerate() {
            let row = i + 2;
            let line = line.map_err(|e| Error::io(path, e))?;
            if line.trim().is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            let token = parts.next().unwrap_or_default().to_string();
            let vector = parts
                .map(|s| s.parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::parse(path, row, format!("bad component: {e}")))?;
            store
                .insert(token, vector)
                .map_err(|e| Error::parse(path, row, e.to_string()))?;
        }
        if store.len() != count {
            return Err(Error::parse(
                path,
                1,
                format!("header announces {count} tokens, file has {}", store.len()),
            ));
        }
        Ok(store)
    }

    fn mean_vector(&self, text: &str) -> Option<Vec<f64>> {
        let mut sum = vec![0.0; self.dimension];
        let mut n = 0usize;
        for token in text.split_whitespace() {
            let v = self.entries.get(token)?;
            for (s, x) in sum.iter_mut().zip(v) {
                *s += x;
            }
            n += 1;
        }
        if n == 0 {
            return None;
        }
        for s in &mut sum {
            *s /= n as f64;
        }
        Some(sum)
    }
}

/// Cosine similarity of the mean token vectors, or `None` when a token is
/// out of vocabulary or a mean vector has zero length.
pub fn embedding_similarity(a: &str, b: &str, store: &EmbeddingStore) -> Option<f64> {
    let va = store.mean_vector(a)?;
    let vb = store.mean_vector(b)?;
    let dot: f64 = va.iter().zip(&vb).map(|(x, y)| x * y).sum();
    let na = va.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = vb.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return None;
    }
    Some((dot / (na * nb)).clamp(-1.0, 1.0))
}

/// Similarity of two present text values, in `[0, 1]`.
pub trait TextSimilarity: Send + Sync {
    fn text_similarity(&self, a: &str, b: &str) -> f64;
}

/// Edit-distance only.
#[derive(Debug, Clone, Copy, Default)]
pub struct EditDistance;

impl TextSimilarity for EditDistance {
    fn text_similarity(&self, a: &str, b: &str) -> f64 {
        levenshtein_similarity(a, b)
    }
}

/// Embedding cosine when every token is known, edit distance otherwise.
/// Negative cosines clamp to zero.
impl TextSimilarity for EmbeddingStore {
    fn text_similarity(&self, a: &str, b: &str) -> f64 {
        if a == b {
            return 1.0;
        }
        match embedding_similarity(a, b, self) {
            Some(cos) => cos.max(0.0),
            None => levenshtein_similarity(a, b),
        }
    }
}

/// Fixed similarities for chosen string pairs (in either order), deferring
/// everything else to a fallback backend.
#[derive(Debug, Clone, Default)]
pub struct PairTable<T> {
    pairs: HashMap<(String, String), f64>,
    fallback: T,
}

impl<T: TextSimilarity> PairTable<T> {
    pub fn new(fallback: T) -> Self {
        PairTable {
            pairs: HashMap::new(),
            fallback,
        }
    }

    pub fn with(mut self, a: &str, b: &str, similarity: f64) -> Self {
        self.pairs.insert(ordered(a, b), similarity);
        self
    }
}

fn ordered(a: &str, b: &str) -> (String, String) {
    if a <= b {
        (a.to_string(), b.to_string())
    } else {
        (b.to_string(), a.to_string())
    }
}

impl<T: TextSimilarity> TextSimilarity for PairTable<T> {
    fn text_similarity(&self, a: &str, b: &str) -> f64 {
        if let Some(&s) = self.pairs.get(&ordered(a, b)) {
            return s;
        }
        self.fallback.text_similarity(a, b)
    }
}

/// Schema-aware similarity over attribute values and whole tuples.
#[derive(Clone, Copy)]
pub struct SimilarityModel<'a> {
    pub schema: &'a Schema,
    pub config: SimilarityConfig,
    pub text: &'a dyn TextSimilarity,
}

impl<'a> SimilarityModel<'a> {
    pub fn new(schema: &'a Schema, text: &'a dyn TextSimilarity) -> Self {
        SimilarityModel {
            schema,
            config: SimilarityConfig::default(),
            text,
        }
    }

    pub fn with_config(mut self, config: SimilarityConfig) -> Self {
        self.config = config;
        self
    }

    pub fn attribute_count(&self) -> usize {
        self.schema.len()
    }

    /// Similarity of two present values, or `None` if either is missing.
    /// Mismatched variants (kind violations) score 0.
    pub fn present_similarity(&self, a: &AttributeValue, b: &AttributeValue) -> Option<f64> {
        match (a, b) {
            (AttributeValue::Missing, _) | (_, AttributeValue::Missing) => None,
            (AttributeValue::Number(x), AttributeValue::Number(y)) => Some(numeric_similarity(*x, *y)),
            (AttributeValue::Text(x), AttributeValue::Text(y)) => {
                if x == y {
                    Some(1.0)
                } else {
                    Some(self.text.text_similarity(x, y).clamp(0.0, 1.0))
                }
            }
            _ => Some(0.0),
        }
    }

    /// Attribute similarity; a missing side yields the configured
    /// missing-pair similarity.
    pub fn attribute(&self, a: &AttributeValue, b: &AttributeValue) -> f64 {
        self.present_similarity(a, b)
            .unwrap_or(self.config.missing_pair_similarity)
    }

    /// Like [`attribute`](Self::attribute) but checks value kinds against
    /// the schema kind first.
    pub fn attribute_of_kind(&self, a: &AttributeValue, b: &AttributeValue, kind: AttributeKind) -> f64 {
        if !a.conforms_to(kind) || !b.conforms_to(kind) {
            return 0.0;
        }
        self.attribute(a, b)
    }

    /// Sum of attribute similarities over aligned tuples.
    pub fn tuples(&self, a: &[AttributeValue], b: &[AttributeValue]) -> f64 {
        debug_assert_eq!(a.len(), b.len());
        a.iter().zip(b).map(|(x, y)| self.attribute(x, y)).sum()
    }

    pub fn record_similarity(&self, a: &crate::model::Record, b: &crate::model::Record) -> f64 {
        self.tuples(&a.values, &b.values)
    }

    pub fn query_record_similarity(&self, q: &crate::model::Query, r: &crate::model::Record) -> f64 {
        self.tuples(&q.values, &r.values)
    }

    /// Record similarity divided by the attribute count, in `[0, 1]`.
    pub fn normalized(&self, a: &[AttributeValue], b: &[AttributeValue]) -> f64 {
        self.tuples(a, b) / a.len() as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Query, Record};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn dp_edit_distance(a: &str, b: &str) -> usize {
        let a: Vec<char> = a.chars().collect();
        let b: Vec<char> = b.chars().collect();
        let mut d = vec![vec![0usize; b.len() + 1]; a.len() + 1];
        for (i, row) in d.iter_mut().enumerate() {
            row[0] = i;
        }
        for j in 0..=b.len() {
            d[0][j] = j;
        }
        for i in 1..=a.len() {
            for j in 1..=b.len() {
                let sub = d[i - 1][j - 1] + usize::from(a[i - 1] != b[j - 1]);
                d[i][j] = sub.min(d[i - 1][j] + 1).min(d[i][j - 1] + 1);
            }
        }
        d[a.len()][b.len()]
    }

    fn cricket_schema() -> Schema {
        Schema::from_pairs([
            ("Name", AttributeKind::Text),
            ("Matches", AttributeKind::Numeric),
            ("Runs", AttributeKind::Numeric),
            ("Highest", AttributeKind::Numeric),
        ])
        .unwrap()
    }

    fn record(id: &str, name: &str, m: f64, r: f64, h: f64) -> Record {
        Record {
            record_id: id.into(),
            source_id: "s".into(),
            values: vec![
                AttributeValue::text(name),
                AttributeValue::Number(m),
                AttributeValue::Number(r),
                AttributeValue::Number(h),
            ],
            entity_id: None,
        }
    }

    #[test]
    fn numeric_examples() {
        assert_eq!(numeric_similarity(125.0, 125.0), 1.0);
        assert_abs_diff_eq!(numeric_similarity(40.0, 4.0), 0.1, epsilon = 1e-12);
        assert_eq!(numeric_similarity(-1.0, 1.0), 0.0);
        assert_eq!(numeric_similarity(0.0, 0.0), 1.0);
    }

    #[test]
    fn levenshtein_examples() {
        assert_eq!(levenshtein_similarity("abc", "abc"), 1.0);
        assert_eq!(dp_edit_distance("kitten", "sitting"), 3);
        assert_abs_diff_eq!(
            levenshtein_similarity("kitten", "sitting"),
            1.0 - 3.0 / 7.0,
            epsilon = 1e-12
        );
        assert_eq!(levenshtein_similarity("a", ""), 0.0);
        assert_eq!(levenshtein_similarity("", ""), 1.0);
    }

    #[test]
    fn embedding_examples() {
        let mut store = EmbeddingStore::new(2).unwrap();
        store.insert("x", vec![1.0, 0.0]).unwrap();
        store.insert("y", vec![0.0, 3.0]).unwrap();
        store.insert("z", vec![-1.0, 0.0]).unwrap();
        store.insert("zero", vec![0.0, 0.0]).unwrap();
        assert_abs_diff_eq!(embedding_similarity("x y", "x y", &store).unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(embedding_similarity("x", "y", &store).unwrap(), 0.0, epsilon = 1e-12);
        assert_eq!(embedding_similarity("x", "unknown", &store), None);
        assert_eq!(embedding_similarity("zero", "x", &store), None);
        // Negative cosine clamps to zero on the text path.
        assert_eq!(store.text_similarity("x", "z"), 0.0);
        // Out-of-vocabulary falls back to edit distance.
        assert_abs_diff_eq!(
            store.text_similarity("kitten", "sitting"),
            1.0 - 3.0 / 7.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn embedding_file_round_trip() {
        let text = "2 3\nfoo 1 0 0\nbar 0 1 0.5\n";
        let store = EmbeddingStore::read(Path::new("e.txt"), text.as_bytes()).unwrap();
        assert_eq!(store.dimension(), 3);
        assert_eq!(store.get("bar"), Some(&[0.0, 1.0, 0.5][..]));
        assert!(store.get("Foo").is_none());

        let short = "1 3\nfoo 1 0\n";
        assert!(EmbeddingStore::read(Path::new("e.txt"), short.as_bytes()).is_err());
        let miscount = "3 3\nfoo 1 0 0\n";
        assert!(EmbeddingStore::read(Path::new("e.txt"), miscount.as_bytes()).is_err());
    }

    #[test]
    fn attribute_examples() {
        let schema = cricket_schema();
        let sim = SimilarityModel::new(&schema, &EditDistance);
        assert_eq!(sim.attribute(&AttributeValue::Missing, &AttributeValue::Number(125.0)), 0.0001);
        assert_eq!(
            sim.attribute(&AttributeValue::text("Gavaskar"), &AttributeValue::text("Gavaskar")),
            1.0
        );
        assert_eq!(
            sim.attribute(&AttributeValue::Number(10122.0), &AttributeValue::Number(10122.0)),
            1.0
        );
        assert_eq!(
            sim.attribute_of_kind(
                &AttributeValue::text("10"),
                &AttributeValue::Number(10.0),
                AttributeKind::Numeric
            ),
            0.0
        );
    }

    #[test]
    fn record_similarity_walkthroughs() {
        let schema = cricket_schema();
        let r1 = record("r1", "SM Gavaskar", 125.0, 10122.0, 236.0);
        let r4 = record("r4", "Gavaskar", 125.0, 10122.0, 236.0);
        let r6 = record("r6", "Yuvraj Singh", 40.0, 1900.0, 169.0);
        let r10 = record("r10", "Y Singh", 40.0, 1900.0, 169.0);
        let stub = PairTable::new(EditDistance)
            .with("SM Gavaskar", "Gavaskar", 0.70)
            .with("Yuvraj Singh", "Y Singh", 0.746);
        let sim = SimilarityModel::new(&schema, &stub);
        assert_abs_diff_eq!(sim.record_similarity(&r1, &r4), 3.7, epsilon = 1e-9);
        assert_abs_diff_eq!(sim.record_similarity(&r6, &r10), 3.746, epsilon = 1e-9);
        assert_eq!(sim.record_similarity(&r6, &r6), 4.0);
    }

    #[test]
    fn query_record_similarity_examples() {
        let schema = cricket_schema();
        let sim = SimilarityModel::new(&schema, &EditDistance);
        let q1 = Query {
            query_id: "q1".into(),
            values: vec![
                AttributeValue::text("Gavaskar"),
                AttributeValue::Missing,
                AttributeValue::Number(10122.0),
                AttributeValue::Missing,
            ],
            entity_id: None,
        };
        let r4 = record("r4", "Gavaskar", 125.0, 10122.0, 236.0);
        assert_abs_diff_eq!(sim.query_record_similarity(&q1, &r4), 2.0002, epsilon = 1e-9);

        let q = Query {
            query_id: "q".into(),
            values: vec![
                AttributeValue::Missing,
                AttributeValue::Missing,
                AttributeValue::Number(10122.0),
                AttributeValue::Missing,
            ],
            entity_id: None,
        };
        assert_abs_diff_eq!(sim.query_record_similarity(&q, &r4), 1.0 + 3.0 * 0.0001, epsilon = 1e-12);

        let full = Query {
            query_id: "q".into(),
            values: r4.values.clone(),
            entity_id: None,
        };
        assert_eq!(sim.query_record_similarity(&full, &r4), 4.0);
    }

    #[test]
    fn config_bounds() {
        assert!(SimilarityConfig::new(0.0).is_err());
        assert!(SimilarityConfig::new(0.01).is_err());
        assert!(SimilarityConfig::new(0.001).is_ok());
    }

    fn value_strategy() -> impl Strategy<Value = AttributeValue> {
        prop_oneof![
            Just(AttributeValue::Missing),
            (-1e6f64..1e6).prop_map(AttributeValue::Number),
        ]
    }

    fn text_strategy() -> impl Strategy<Value = AttributeValue> {
        prop_oneof![
            Just(AttributeValue::Missing),
            "[a-c ]{0,6}".prop_map(|s| {
                if s.trim().is_empty() {
                    AttributeValue::Missing
                } else {
                    AttributeValue::Text(s)
                }
            }),
        ]
    }

    proptest! {
        #[test]
        fn edit_distance_matches_dp_oracle(a in "[a-d]{0,8}", b in "[a-d]{0,8}") {
            prop_assert_eq!(strsim::levenshtein(&a, &b), dp_edit_distance(&a, &b));
            prop_assert!(levenshtein_similarity(&a, &a) >= levenshtein_similarity(&a, &b));
        }

        #[test]
        fn numeric_attribute_symmetric_and_bounded(a in value_strategy(), b in value_strategy()) {
            let schema = cricket_schema();
            let sim = SimilarityModel::new(&schema, &EditDistance);
            let ab = sim.attribute(&a, &b);
            prop_assert_eq!(ab, sim.attribute(&b, &a));
            prop_assert!((0.0..=1.0).contains(&ab));
        }

        #[test]
        fn text_attribute_symmetric_and_bounded(a in text_strategy(), b in text_strategy()) {
            let schema = cricket_schema();
            let sim = SimilarityModel::new(&schema, &EditDistance);
            let ab = sim.attribute(&a, &b);
            prop_assert_eq!(ab, sim.attribute(&b, &a));
            prop_assert!((0.0..=1.0).contains(&ab));
        }

        #[test]
        fn record_similarity_symmetric_in_range(
            a in proptest::collection::vec(value_strategy(), 4),
            b in proptest::collection::vec(value_strategy(), 4),
        ) {
            let schema = Schema::from_pairs([
                ("a", AttributeKind::Numeric),
                ("b", AttributeKind::Numeric),
                ("c", AttributeKind::Numeric),
                ("d", AttributeKind::Numeric),
            ]).unwrap();
            let sim = SimilarityModel::new(&schema, &EditDistance);
            let ab = sim.tuples(&a, &b);
            prop_assert_eq!(ab, sim.tuples(&b, &a));
            prop_assert!((0.0..=4.0).contains(&ab));
        }
    }
}
