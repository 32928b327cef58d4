//! End-to-end evaluation run: source matrix, trust, classifier training on
//! a query split, profiling of the held-out queries and scoring.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::classify::{
    build_training_set, evaluate_kind, split_indices, train, ClassifierKind, ClassifierModel,
    Hyperparameters, LabeledExample, MetricRow,
};
use crate::error::{Error, Result};
use crate::eval::{compare_runs, MetricComparison, MetricSummary, RunMetrics};
use crate::model::Dataset;
use crate::profile::{trust_per_source, CompletedProfile, FilledSlotPolicy, Profiler};
use crate::similarity::SimilarityModel;
use crate::sources::{
    build_source_similarity_matrix, source_ratings, trustworthiness_scores, uniform_ratings,
    SourceRatings, SourceSimilarityMatrix, TrustReport,
};

pub const REPORT_FORMAT: &str = "entity-profile/report/v1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum RatingMode {
    Uniform,
    Biased { source: String, value: f64 },
}

impl RatingMode {
    pub fn ratings(&self, matrix: &SourceSimilarityMatrix) -> Result<SourceRatings> {
        match self {
            RatingMode::Uniform => uniform_ratings(&matrix.source_order),
            RatingMode::Biased { source, value } => source_ratings(matrix, source, *value),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub seed: u64,
    pub classifier: ClassifierKind,
    pub hyperparameters: Hyperparameters,
    /// Share of training pairs used to fit the reported classifier metrics.
    pub classifier_split: f64,
    /// Share of queries whose pairs train the classifier.
    pub query_split: f64,
    pub ratings: RatingMode,
    pub policy: FilledSlotPolicy,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            classifier: ClassifierKind::Forest,
            hyperparameters: Hyperparameters::default(),
            classifier_split: 0.8,
            query_split: 0.7,
            ratings: RatingMode::Uniform,
            policy: FilledSlotPolicy::Keep,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceSummary {
    pub source_order: Vec<String>,
    pub most_trustworthy: String,
    pub trust: Vec<f64>,
    pub ratings: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ablation {
    /// Same associations, selection under uniform ratings.
    pub uniform: MetricSummary,
    pub uniform_per_query: RunMetrics,
    pub comparisons: Vec<MetricComparison>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub format: String,
    pub config: RunConfig,
    pub sources: SourceSummary,
    pub training_pairs: usize,
    pub test_queries: usize,
    /// Held-out metrics of the chosen classifier on the training pairs;
    /// absent when the held-out part lacks one of the labels.
    pub classifier_metrics: Option<MetricRow>,
    pub metrics: MetricSummary,
    pub per_query: RunMetrics,
    /// Present for biased runs: comparison with uniform ratings.
    pub ablation: Option<Ablation>,
}

impl EvaluationReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let report: EvaluationReport = serde_json::from_str(text)?;
        if report.format != REPORT_FORMAT {
            return Err(Error::Validation(format!(
                "unsupported report format `{}`",
                report.format
            )));
        }
        Ok(report)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub report: EvaluationReport,
    pub matrix: SourceSimilarityMatrix,
    pub trust: TrustReport,
    pub model: ClassifierModel,
    pub profiles: Vec<CompletedProfile>,
}

/// Ids of the records sharing each annotated query's entity.
pub fn true_record_map(dataset: &Dataset) -> BTreeMap<String, Vec<String>> {
    let mut by_entity: BTreeMap<&str, Vec<String>> = BTreeMap::new();
    for r in &dataset.records {
        if let Some(e) = &r.entity_id {
            by_entity.entry(e).or_default().push(r.record_id.clone());
        }
    }
    dataset
        .queries
        .iter()
        .filter_map(|q| {
            let e = q.entity_id.as_deref()?;
            Some((q.query_id.clone(), by_entity.get(e).cloned().unwrap_or_default()))
        })
        .collect()
}

fn held_out_metrics(
    kind: ClassifierKind,
    examples: &[LabeledExample],
    config: &RunConfig,
) -> Result<Option<MetricRow>> {
    let (train_idx, test_idx) = split_indices(examples.len(), config.classifier_split, config.seed)?;
    let pick = |idx: &[usize]| idx.iter().map(|&i| examples[i].clone()).collect::<Vec<_>>();
    let (tr, te) = (pick(&train_idx), pick(&test_idx));
    let both = |s: &[LabeledExample]| s.iter().any(|e| e.label == 1) && s.iter().any(|e| e.label == 0);
    if !both(&tr) || !both(&te) {
        return Ok(None);
    }
    evaluate_kind(kind, &tr, &te, config.hyperparameters, config.seed).map(Some)
}

/// Runs the whole pipeline. `matrix` may be supplied to skip its
/// construction.
pub fn run(
    dataset: &Dataset,
    similarity: &SimilarityModel<'_>,
    config: &RunConfig,
    matrix: Option<SourceSimilarityMatrix>,
) -> Result<RunOutcome> {
    if dataset.queries.is_empty() {
        return Err(Error::Validation("dataset has no queries".into()));
    }
    let matrix = match matrix {
        Some(m) => m,
        None => build_source_similarity_matrix(dataset, similarity)?,
    };
    let trust = trustworthiness_scores(&matrix)?;
    let trust_vec = trust_per_source(dataset, &trust)?;
    let training = build_training_set(dataset, similarity, &trust_vec, config.query_split, config.seed)?;
    if training.test_queries.is_empty() {
        return Err(Error::InvalidArgument("query split leaves no test queries".into()));
    }
    let classifier_metrics = held_out_metrics(config.classifier, &training.train, config)?;
    let model = train(config.classifier, &training.train, config.hyperparameters, config.seed)?;

    let ratings = config.ratings.ratings(&matrix)?;
    let profiler = Profiler::new(dataset, *similarity, &matrix, &trust, &ratings)?
        .with_policy(config.policy);
    let test: Vec<&crate::model::Query> =
        training.test_queries.iter().map(|&i| &dataset.queries[i]).collect();
    let profiles = profiler.complete_all(&test, &model)?;
    let true_records = true_record_map(dataset);
    let per_query = RunMetrics::from_profiles(&profiles, &true_records, &dataset.truth)?;

    let ablation = if matches!(config.ratings, RatingMode::Biased { .. }) {
        let uniform = uniform_ratings(&matrix.source_order)?;
        let alt = Profiler::new(dataset, *similarity, &matrix, &trust, &uniform)?
            .with_policy(config.policy);
        let alt_profiles: Vec<CompletedProfile> = test
            .iter()
            .zip(&profiles)
            .map(|(q, p)| {
                let associated: Vec<usize> = p
                    .associated_record_ids
                    .iter()
                    .filter_map(|id| dataset.records.iter().position(|r| &r.record_id == id))
                    .collect();
                alt.complete_with(q, &associated)
            })
            .collect();
        let alt_metrics = RunMetrics::from_profiles(&alt_profiles, &true_records, &dataset.truth)?;
        Some(Ablation {
            uniform: alt_metrics.summary(),
            comparisons: compare_runs(&per_query, &alt_metrics).unwrap_or_default(),
            uniform_per_query: alt_metrics,
        })
    } else {
        None
    };

    let report = EvaluationReport {
        format: REPORT_FORMAT.to_string(),
        config: config.clone(),
        sources: SourceSummary {
            source_order: matrix.source_order.clone(),
            most_trustworthy: trust.most_trustworthy().to_string(),
            trust: trust.trust.clone(),
            ratings: ratings.ratings.clone(),
        },
        training_pairs: training.train.len(),
        test_queries: test.len(),
        classifier_metrics,
        metrics: per_query.summary(),
        per_query,
        ablation,
    };
    Ok(RunOutcome {
        report,
        matrix,
        trust,
        model,
        profiles,
    })
}
