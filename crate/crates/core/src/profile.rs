//! Entity profiling: associate records with a query, then choose one value
//! per attribute from the associated records.
//!
//! For each candidate value `v` of an attribute the selection step computes
//!
//! * `S` - similarity between the query's value and `v`,
//! * `F` - number of associated records carrying `v`,
//! * `T` - summed similarity of `v` to the other distinct candidates,
//! * `V1` - source similarity from the top-rated source to the source of `v`,
//!
//! and keeps the candidate maximizing `V3 = V1 * S * F * T`.

use std::collections::HashMap;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classify::{extract_features, ClassifierModel, FeatureVector};
use crate::error::{Error, Result};
use crate::model::{AttributeValue, Dataset, Query, Record, Schema};
use crate::similarity::SimilarityModel;
use crate::sources::{SourceRatings, SourceSimilarityMatrix, TrustReport};

/// Decides whether a record belongs to a query's entity.
pub trait Resolver: Sync {
    fn associates(&self, query: &Query, record: &Record, features: &FeatureVector) -> Result<bool>;
}

impl Resolver for ClassifierModel {
    fn associates(&self, _: &Query, _: &Record, features: &FeatureVector) -> Result<bool> {
        Ok(self.predict(features.as_slice())?.label == 1)
    }
}

/// Resolves from `entity_id` annotations. Stands in for a perfect
/// classifier in tests and worked examples.
#[derive(Debug, Clone, Copy, Default)]
pub struct OracleResolver;

impl Resolver for OracleResolver {
    fn associates(&self, query: &Query, record: &Record, _: &FeatureVector) -> Result<bool> {
        Ok(query.entity_id.is_some() && query.entity_id == record.entity_id)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValueEntry {
    pub value: AttributeValue,
    pub frequency: usize,
    /// Matrix indices of the contributing sources, ascending.
    pub sources: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributeValueSet {
    pub attribute: usize,
    pub entries: Vec<ValueEntry>,
}

impl AttributeValueSet {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn values(&self) -> impl Iterator<Item = &AttributeValue> {
        self.entries.iter().map(|e| &e.value)
    }
}

/// Distinct non-missing values per attribute, in first-seen order, with
/// record frequencies. `sources[i]` is the matrix index of `records[i]`.
pub fn build_attribute_value_sets(
    records: &[&Record],
    sources: &[usize],
    attribute_count: usize,
) -> Vec<AttributeValueSet> {
    (0..attribute_count)
        .map(|attribute| {
            let mut entries: Vec<ValueEntry> = Vec::new();
            for (record, &source) in records.iter().zip(sources) {
                let value = &record.values[attribute];
                if value.is_missing() {
                    continue;
                }
                match entries.iter_mut().find(|e| &e.value == value) {
                    Some(e) => {
                        e.frequency += 1;
                        if let Err(pos) = e.sources.binary_search(&source) {
                            e.sources.insert(pos, source);
                        }
                    }
                    None => entries.push(ValueEntry {
                        value: value.clone(),
                        frequency: 1,
                        sources: vec![source],
                    }),
                }
            }
            AttributeValueSet { attribute, entries }
        })
        .collect()
}

/// `T` for every entry: summed similarity to every other distinct value.
pub fn sim_attribute_val(set: &AttributeValueSet, similarity: &SimilarityModel<'_>) -> Vec<f64> {
    set.entries
        .iter()
        .enumerate()
        .map(|(i, a)| {
            set.entries
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, b)| similarity.attribute(&a.value, &b.value))
                .sum()
        })
        .collect()
}

/// `S * F * T` for one candidate.
pub fn similarity_frequency_product(
    query_value: &AttributeValue,
    entry: &ValueEntry,
    t: f64,
    similarity: &SimilarityModel<'_>,
) -> f64 {
    similarity.attribute(query_value, &entry.value) * entry.frequency as f64 * t
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateTrace {
    pub value: AttributeValue,
    pub sources: Vec<String>,
    pub s: f64,
    pub f: usize,
    pub t: f64,
    pub v1: f64,
    pub v2: f64,
    pub v3: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decision {
    /// No associated record had a value; the query's own value stays.
    Empty,
    /// One candidate; taken without scoring.
    Singleton,
    /// Maximum `V3` among several candidates.
    Product,
    /// The query already filled this slot and the policy keeps it.
    QueryValue,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionTrace {
    pub attribute: String,
    pub decision: Decision,
    pub candidates: Vec<CandidateTrace>,
    /// Index into `candidates` of the selected value, if one was taken.
    pub chosen: Option<usize>,
}

/// Scores every candidate and picks the maximum `V3`. Ties go to the
/// candidate whose best source has the higher rating, then to the
/// lexicographically smaller value.
pub fn select_attribute_value(
    set: &AttributeValueSet,
    query_value: &AttributeValue,
    ratings: &SourceRatings,
    matrix: &SourceSimilarityMatrix,
    similarity: &SimilarityModel<'_>,
) -> (AttributeValue, Vec<CandidateTrace>, Option<usize>) {
    if set.is_empty() {
        return (query_value.clone(), Vec::new(), None);
    }
    let iom = ratings.index_of_maximum;
    let t_values = sim_attribute_val(set, similarity);
    let candidates: Vec<CandidateTrace> = set
        .entries
        .iter()
        .zip(&t_values)
        .map(|(entry, &t)| {
            let s = similarity.attribute(query_value, &entry.value);
            let v1 = entry
                .sources
                .iter()
                .map(|&src| matrix.get(iom, src))
                .fold(f64::NEG_INFINITY, f64::max);
            let v2 = s * entry.frequency as f64 * t;
            CandidateTrace {
                value: entry.value.clone(),
                sources: entry
                    .sources
                    .iter()
                    .map(|&src| matrix.source_order[src].clone())
                    .collect(),
                s,
                f: entry.frequency,
                t,
                v1,
                v2,
                v3: v1 * v2,
            }
        })
        .collect();
    if set.len() == 1 {
        return (set.entries[0].value.clone(), candidates, Some(0));
    }
    let best_rating = |entry: &ValueEntry| {
        entry
            .sources
            .iter()
            .map(|&src| ratings.ratings[src])
            .fold(f64::NEG_INFINITY, f64::max)
    };
    let mut best = 0;
    for i in 1..candidates.len() {
        let (c, b) = (&candidates[i], &candidates[best]);
        let better = if c.v3 != b.v3 {
            c.v3 > b.v3
        } else {
            let (rc, rb) = (best_rating(&set.entries[i]), best_rating(&set.entries[best]));
            if rc != rb {
                rc > rb
            } else {
                c.value.to_cell() < b.value.to_cell()
            }
        };
        if better {
            best = i;
        }
    }
    (set.entries[best].value.clone(), candidates, Some(best))
}

/// What happens to attributes the query already fills.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FilledSlotPolicy {
    /// Filled query values are kept; only missing slots are selected.
    #[default]
    Keep,
    /// Every attribute is selected from the associated records; the query
    /// value is used only when no record supplies one.
    Reselect,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompletedProfile {
    pub query_id: String,
    pub values: Vec<AttributeValue>,
    pub associated_record_ids: Vec<String>,
    pub traces: Vec<SelectionTrace>,
    /// At least one record was associated and no slot is left missing.
    pub complete: bool,
}

/// Shared, read-only inputs for profiling any number of queries.
pub struct Profiler<'a> {
    pub dataset: &'a Dataset,
    pub similarity: SimilarityModel<'a>,
    pub matrix: &'a SourceSimilarityMatrix,
    pub ratings: &'a SourceRatings,
    pub policy: FilledSlotPolicy,
    /// Matrix index of each record, aligned with `dataset.records`.
    record_source: Vec<usize>,
    /// Trustworthiness of each record's source, aligned with `dataset.records`.
    record_trust: Vec<f64>,
}

/// Trustworthiness per dataset source, looked up by id.
pub fn trust_per_source(dataset: &Dataset, trust: &TrustReport) -> Result<Vec<f64>> {
    dataset
        .sources
        .iter()
        .map(|s| {
            trust.trust_of(&s.source_id).ok_or_else(|| {
                Error::Validation(format!("no trustworthiness for source `{}`", s.source_id))
            })
        })
        .collect()
}

impl<'a> Profiler<'a> {
    pub fn new(
        dataset: &'a Dataset,
        similarity: SimilarityModel<'a>,
        matrix: &'a SourceSimilarityMatrix,
        trust: &TrustReport,
        ratings: &'a SourceRatings,
    ) -> Result<Self> {
        if ratings.source_order != matrix.source_order {
            return Err(Error::Validation(
                "source ratings and similarity matrix list sources in different orders".into(),
            ));
        }
        let by_id: HashMap<&str, usize> = matrix
            .source_order
            .iter()
            .enumerate()
            .map(|(i, s)| (s.as_str(), i))
            .collect();
        let mut record_source = Vec::with_capacity(dataset.records.len());
        let mut record_trust = Vec::with_capacity(dataset.records.len());
        for r in &dataset.records {
            let idx = *by_id.get(r.source_id.as_str()).ok_or_else(|| {
                Error::Validation(format!(
                    "source `{}` of record `{}` is not in the similarity matrix",
                    r.source_id, r.record_id
                ))
            })?;
            record_source.push(idx);
            record_trust.push(trust.trust_of(&r.source_id).ok_or_else(|| {
                Error::Validation(format!("no trustworthiness for source `{}`", r.source_id))
            })?);
        }
        Ok(Profiler {
            dataset,
            similarity,
            matrix,
            ratings,
            policy: FilledSlotPolicy::default(),
            record_source,
            record_trust,
        })
    }

    pub fn with_policy(mut self, policy: FilledSlotPolicy) -> Self {
        self.policy = policy;
        self
    }

    pub fn schema(&self) -> &Schema {
        &self.dataset.schema
    }

    pub fn features(&self, query: &Query, record_index: usize) -> FeatureVector {
        extract_features(
            &self.similarity,
            query,
            &self.dataset.records[record_index],
            self.record_trust[record_index],
        )
    }

    /// Indices of the records the resolver associates with `query`.
    pub fn resolve(&self, query: &Query, resolver: &dyn Resolver) -> Result<Vec<usize>> {
        let mut out = Vec::new();
        for (i, record) in self.dataset.records.iter().enumerate() {
            if resolver.associates(query, record, &self.features(query, i))? {
                out.push(i);
            }
        }
        Ok(out)
    }

    /// Selection over an already-resolved set of records.
    pub fn complete_with(&self, query: &Query, associated: &[usize]) -> CompletedProfile {
        let records: Vec<&Record> = associated.iter().map(|&i| &self.dataset.records[i]).collect();
        let sources: Vec<usize> = associated.iter().map(|&i| self.record_source[i]).collect();
        let sets = build_attribute_value_sets(&records, &sources, self.schema().len());
        let mut values = Vec::with_capacity(sets.len());
        let mut traces = Vec::with_capacity(sets.len());
        for (set, query_value) in sets.iter().zip(&query.values) {
            let (selected, candidates, chosen) =
                select_attribute_value(set, query_value, self.ratings, self.matrix, &self.similarity);
            let keep_query = self.policy == FilledSlotPolicy::Keep && query_value.is_present();
            let decision = if keep_query {
                Decision::QueryValue
            } else if set.is_empty() {
                Decision::Empty
            } else if set.len() == 1 {
                Decision::Singleton
            } else {
                Decision::Product
            };
            values.push(if keep_query { query_value.clone() } else { selected });
            traces.push(SelectionTrace {
                attribute: self.schema().attributes()[set.attribute].name.clone(),
                decision,
                candidates,
                chosen: if keep_query { None } else { chosen },
            });
        }
        let complete = !associated.is_empty() && values.iter().all(AttributeValue::is_present);
        CompletedProfile {
            query_id: query.query_id.clone(),
            values,
            associated_record_ids: records.iter().map(|r| r.record_id.clone()).collect(),
            traces,
            complete,
        }
    }

    pub fn complete_profile(&self, query: &Query, resolver: &dyn Resolver) -> Result<CompletedProfile> {
        let associated = self.resolve(query, resolver)?;
        Ok(self.complete_with(query, &associated))
    }

    /// Profiles queries concurrently; output order follows `queries`.
    pub fn complete_all(&self, queries: &[&Query], resolver: &dyn Resolver) -> Result<Vec<CompletedProfile>> {
        queries
            .par_iter()
            .map(|q| self.complete_profile(q, resolver))
            .collect()
    }
}

/// Writes `query_id,<attrs...>,complete_flag`.
pub fn write_profiles<W: Write>(out: W, schema: &Schema, profiles: &[CompletedProfile]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["query_id"];
    header.extend(schema.names());
    header.push("complete_flag");
    w.write_record(&header)?;
    for p in profiles {
        let mut row = vec![p.query_id.clone()];
        row.extend(p.values.iter().map(AttributeValue::to_cell));
        row.push(p.complete.to_string());
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::io("<profiles>", e))?;
    Ok(())
}

/// Selection traces for every profile as one JSON document.
pub fn traces_json(profiles: &[CompletedProfile]) -> Result<String> {
    Ok(serde_json::to_string_pretty(profiles)? + "\n")
}
