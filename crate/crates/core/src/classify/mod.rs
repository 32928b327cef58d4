//! Resolution-phase learning: query/record pair features, labelled
//! training sets, the classifier suite and model-selection metrics.

mod bayes;
mod forest;
mod knn;
pub mod metrics;
pub mod tree;

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use bayes::{ClassStats, GaussianNaiveBayes, VARIANCE_FLOOR};
pub use forest::RandomForest;
pub use knn::KNearest;
pub use metrics::{
    cv_error, evaluate_kind, f1_score, mcc, roc_auc, select_model, ConfusionCounts, MetricRow, ModelSelection,
    SelectionOptions,
};
pub use tree::{DecisionTree, TreeParams};

use crate::error::{Error, Result};
use crate::model::{Dataset, Query, Record};
use crate::similarity::SimilarityModel;

pub const MODEL_FORMAT: &str = "entity-profile/model/v1";

/// `[similarities (A), record presence flags (A), trustworthiness]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector(pub Vec<f64>);

impl FeatureVector {
    pub fn attribute_count(&self) -> usize {
        (self.0.len() - 1) / 2
    }

    pub fn similarities(&self) -> &[f64] {
        &self.0[..self.attribute_count()]
    }

    pub fn flags(&self) -> &[f64] {
        let a = self.attribute_count();
        &self.0[a..2 * a]
    }

    pub fn trust(&self) -> f64 {
        *self.0.last().expect("feature vector is never empty")
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// Pair features. A missing value on either side gives similarity 0.0; the
/// flag records presence on the record side only.
pub fn extract_features(
    similarity: &SimilarityModel<'_>,
    query: &Query,
    record: &Record,
    trust: f64,
) -> FeatureVector {
    let a = query.values.len();
    let mut v = Vec::with_capacity(2 * a + 1);
    v.extend(
        query
            .values
            .iter()
            .zip(&record.values)
            .map(|(q, r)| similarity.present_similarity(q, r).unwrap_or(0.0)),
    );
    v.extend(record.values.iter().map(|r| if r.is_present() { 1.0 } else { 0.0 }));
    v.push(trust);
    FeatureVector(v)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledExample {
    pub features: FeatureVector,
    pub label: u8,
    pub query_id: String,
    pub record_id: String,
}

/// Whether `record` refers to the entity behind `query`.
pub fn pair_label(query: &Query, record: &Record) -> Result<u8> {
    let q = query.entity_id.as_deref().ok_or_else(|| {
        Error::Validation(format!("query `{}` has no entity_id annotation", query.query_id))
    })?;
    Ok(u8::from(record.entity_id.as_deref() == Some(q)))
}

/// Labelled examples for every (query, record) pair of the chosen queries,
/// query-major. `trust` is aligned with `dataset.sources`.
pub fn pair_examples(
    dataset: &Dataset,
    similarity: &SimilarityModel<'_>,
    trust: &[f64],
    query_indices: &[usize],
) -> Result<Vec<LabeledExample>> {
    let source_of = dataset.record_source_indices();
    let per_query: Vec<Result<Vec<LabeledExample>>> = query_indices
        .par_iter()
        .map(|&qi| {
            let q = &dataset.queries[qi];
            dataset
                .records
                .iter()
                .zip(&source_of)
                .map(|(r, &si)| {
                    Ok(LabeledExample {
                        features: extract_features(similarity, q, r, trust[si]),
                        label: pair_label(q, r)?,
                        query_id: q.query_id.clone(),
                        record_id: r.record_id.clone(),
                    })
                })
                .collect()
        })
        .collect();
    let mut out = Vec::with_capacity(query_indices.len() * dataset.records.len());
    for chunk in per_query {
        out.extend(chunk?);
    }
    Ok(out)
}

/// Seeded shuffle of `0..n` split into a leading `fraction` and the rest.
pub fn split_indices(n: usize, fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(0.0..=1.0).contains(&fraction) {
        return Err(Error::InvalidArgument(format!("split fraction {fraction} outside [0, 1]")));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let cut = ((n as f64) * fraction).round() as usize;
    let test = idx.split_off(cut.min(n));
    Ok((idx, test))
}

#[derive(Debug, Clone)]
pub struct TrainingSet {
    pub train: Vec<LabeledExample>,
    pub train_queries: Vec<usize>,
    pub test_queries: Vec<usize>,
}

/// Splits queries by seed and labels every (training query, record) pair.
pub fn build_training_set(
    dataset: &Dataset,
    similarity: &SimilarityModel<'_>,
    trust: &[f64],
    query_split: f64,
    seed: u64,
) -> Result<TrainingSet> {
    if let Some(q) = dataset.queries.iter().find(|q| q.entity_id.is_none()) {
        return Err(Error::Validation(format!(
            "query `{}` has no entity_id annotation",
            q.query_id
        )));
    }
    let (train_queries, test_queries) = split_indices(dataset.queries.len(), query_split, seed)?;
    let train = pair_examples(dataset, similarity, trust, &train_queries)?;
    Ok(TrainingSet {
        train,
        train_queries,
        test_queries,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassifierKind {
    Tree,
    Forest,
    Bayes,
    Knn,
}

impl ClassifierKind {
    pub const ALL: [ClassifierKind; 4] = [
        ClassifierKind::Bayes,
        ClassifierKind::Knn,
        ClassifierKind::Tree,
        ClassifierKind::Forest,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ClassifierKind::Tree => "tree",
            ClassifierKind::Forest => "forest",
            ClassifierKind::Bayes => "bayes",
            ClassifierKind::Knn => "knn",
        }
    }
}

impl fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ClassifierKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tree" => Ok(ClassifierKind::Tree),
            "forest" => Ok(ClassifierKind::Forest),
            "bayes" => Ok(ClassifierKind::Bayes),
            "knn" => Ok(ClassifierKind::Knn),
            other => Err(Error::InvalidArgument(format!(
                "unknown classifier `{other}` (expected tree, forest, bayes or knn)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MaxFeatures {
    /// `ceil(sqrt(feature count))`
    Sqrt,
    All,
    Count(usize),
}

impl MaxFeatures {
    pub fn resolve(self, n_features: usize) -> usize {
        match self {
            MaxFeatures::Sqrt => (n_features as f64).sqrt().ceil() as usize,
            MaxFeatures::All => n_features,
            MaxFeatures::Count(c) => c.clamp(1, n_features.max(1)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hyperparameters {
    pub n_trees: usize,
    pub bootstrap: bool,
    pub max_features: MaxFeatures,
    pub max_depth: Option<usize>,
    pub k: usize,
}

impl Default for Hyperparameters {
    fn default() -> Self {
        Hyperparameters {
            n_trees: 10,
            bootstrap: true,
            max_features: MaxFeatures::Sqrt,
            max_depth: None,
            k: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum ModelBody {
    Tree(DecisionTree),
    Forest(RandomForest),
    Bayes(GaussianNaiveBayes),
    Knn(KNearest),
}

/// A trained resolution classifier. Serializes to a versioned JSON document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierModel {
    pub format: String,
    pub kind: ClassifierKind,
    pub hyperparameters: Hyperparameters,
    pub seed: u64,
    pub n_features: usize,
    pub body: ModelBody,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub label: u8,
    pub score: f64,
}

impl Prediction {
    fn from_score(score: f64) -> Self {
        Prediction {
            label: u8::from(score >= 0.5),
            score,
        }
    }
}

/// Trains a classifier of the given kind.
pub fn train(
    kind: ClassifierKind,
    examples: &[LabeledExample],
    hyperparameters: Hyperparameters,
    seed: u64,
) -> Result<ClassifierModel> {
    let x: Vec<Vec<f64>> = examples.iter().map(|e| e.features.0.clone()).collect();
    let y: Vec<u8> = examples.iter().map(|e| e.label).collect();
    train_matrix(kind, &x, &y, hyperparameters, seed)
}

/// [`train`] over a plain feature matrix.
pub fn train_matrix(
    kind: ClassifierKind,
    x: &[Vec<f64>],
    y: &[u8],
    hyperparameters: Hyperparameters,
    seed: u64,
) -> Result<ClassifierModel> {
    if x.is_empty() {
        return Err(Error::Model("no training examples".into()));
    }
    if x.len() != y.len() {
        return Err(Error::Model("feature and label counts differ".into()));
    }
    let n_features = x[0].len();
    if x.iter().any(|row| row.len() != n_features) {
        return Err(Error::Model("training rows have different lengths".into()));
    }
    if y.iter().any(|&l| l > 1) {
        return Err(Error::Model("labels must be 0 or 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let body = match kind {
        ClassifierKind::Tree => {
            let params = TreeParams {
                max_features: None,
                max_depth: hyperparameters.max_depth,
                min_samples_split: 2,
            };
            ModelBody::Tree(DecisionTree::fit(x, y, (0..x.len()).collect(), params, &mut rng))
        }
        ClassifierKind::Forest => {
            if hyperparameters.n_trees == 0 {
                return Err(Error::Model("a forest needs at least one tree".into()));
            }
            let max_features = match hyperparameters.max_features {
                MaxFeatures::All => None,
                other => Some(other.resolve(n_features)),
            };
            let params = TreeParams {
                max_features,
                max_depth: hyperparameters.max_depth,
                min_samples_split: 2,
            };
            ModelBody::Forest(RandomForest::fit(
                x,
                y,
                hyperparameters.n_trees,
                hyperparameters.bootstrap,
                params,
                seed,
            ))
        }
        ClassifierKind::Bayes => {
            let positives = y.iter().filter(|&&l| l == 1).count();
            if positives == 0 || positives == y.len() {
                return Err(Error::Model("naive Bayes needs examples of both labels".into()));
            }
            ModelBody::Bayes(GaussianNaiveBayes::fit(x, y))
        }
        ClassifierKind::Knn => {
            let k = hyperparameters.k;
            if k == 0 || k > x.len() {
                return Err(Error::Model(format!(
                    "k = {k} must lie in 1..={} (the number of examples)",
                    x.len()
                )));
            }
            ModelBody::Knn(KNearest::fit(x.to_vec(), y.to_vec(), k))
        }
    };
    Ok(ClassifierModel {
        format: MODEL_FORMAT.to_string(),
        kind,
        hyperparameters,
        seed,
        n_features,
        body,
    })
}

impl ClassifierModel {
    pub fn predict(&self, features: &[f64]) -> Result<Prediction> {
        if features.len() != self.n_features {
            return Err(Error::Model(format!(
                "expected {} features, got {}",
                self.n_features,
                features.len()
            )));
        }
        let score = match &self.body {
            ModelBody::Tree(t) => t.probability(features),
            ModelBody::Forest(f) => f.vote_fraction(features),
            ModelBody::Bayes(b) => b.posterior(features),
            ModelBody::Knn(k) => k.vote_fraction(features),
        };
        Ok(Prediction::from_score(score))
    }

    pub fn predict_many(&self, rows: &[Vec<f64>]) -> Result<Vec<Prediction>> {
        rows.par_iter().map(|r| self.predict(r)).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let model: ClassifierModel = serde_json::from_str(text)?;
        if model.format != MODEL_FORMAT {
            return Err(Error::Model(format!(
                "unsupported model format `{}` (expected `{MODEL_FORMAT}`)",
                model.format
            )));
        }
        Ok(model)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}
