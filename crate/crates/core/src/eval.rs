//! Resolution precision/recall, profile accuracy against ground truth and
//! the paired t-test used to compare two runs.

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};
use crate::model::AttributeValue;
use crate::profile::CompletedProfile;
use crate::similarity::{levenshtein_similarity, numeric_similarity};

/// Precision and recall of a predicted record set. An empty predicted set
/// has precision 1 only when the true set is empty too; recall mirrors it.
pub fn precision_recall<S: AsRef<str>>(truth: &[S], predicted: &[S]) -> (f64, f64) {
    let t: HashSet<&str> = truth.iter().map(AsRef::as_ref).collect();
    let p: HashSet<&str> = predicted.iter().map(AsRef::as_ref).collect();
    let hits = t.intersection(&p).count() as f64;
    let precision = if p.is_empty() {
        f64::from(u8::from(t.is_empty()))
    } else {
        hits / p.len() as f64
    };
    let recall = if t.is_empty() {
        f64::from(u8::from(p.is_empty()))
    } else {
        hits / t.len() as f64
    };
    (precision, recall)
}

/// Similarity between a profile value and its ground truth, or `None` when
/// either side is missing. Text uses normalized edit distance.
pub fn truth_similarity(value: &AttributeValue, truth: &AttributeValue) -> Option<f64> {
    match (value, truth) {
        (AttributeValue::Missing, _) | (_, AttributeValue::Missing) => None,
        (AttributeValue::Number(a), AttributeValue::Number(b)) => Some(numeric_similarity(*a, *b)),
        (AttributeValue::Text(a), AttributeValue::Text(b)) => Some(levenshtein_similarity(a, b)),
        _ => Some(0.0),
    }
}

/// Mean truth similarity over the attributes the truth provides. A value
/// the profile left missing scores 0. `None` if the truth row is empty.
pub fn profile_accuracy(values: &[AttributeValue], truth: &[AttributeValue]) -> Option<f64> {
    let scores: Vec<f64> = values
        .iter()
        .zip(truth)
        .filter(|(_, t)| t.is_present())
        .map(|(v, t)| truth_similarity(v, t).unwrap_or(0.0))
        .collect();
    if scores.is_empty() {
        None
    } else {
        Some(scores.iter().sum::<f64>() / scores.len() as f64)
    }
}

/// Mean profile accuracy over all profiles.
pub fn accuracy(
    profiles: &[CompletedProfile],
    truth: &BTreeMap<String, Vec<AttributeValue>>,
) -> Result<f64> {
    if profiles.is_empty() {
        return Err(Error::InvalidArgument("no profiles to score".into()));
    }
    let mut total = 0.0;
    let mut n = 0usize;
    for p in profiles {
        if let Some(a) = profile_accuracy(&p.values, truth_row(truth, &p.query_id)?) {
            total += a;
            n += 1;
        }
    }
    if n == 0 {
        return Err(Error::InvalidArgument("ground truth has no values for any profile".into()));
    }
    Ok(total / n as f64)
}

fn truth_row<'a>(
    truth: &'a BTreeMap<String, Vec<AttributeValue>>,
    query_id: &str,
) -> Result<&'a [AttributeValue]> {
    truth
        .get(query_id)
        .map(Vec::as_slice)
        .ok_or_else(|| Error::Validation(format!("no ground truth for query `{query_id}`")))
}

/// Per-query metric lists for one run, aligned by `query_ids`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    pub query_ids: Vec<String>,
    pub precision: Vec<f64>,
    pub recall: Vec<f64>,
    pub accuracy: Vec<f64>,
}

fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        0.0
    } else {
        values.iter().sum::<f64>() / values.len() as f64
    }
}

impl RunMetrics {
    /// Scores profiles against ground truth. `true_records` maps each query
    /// to the ids of the records that truly describe its entity.
    pub fn from_profiles(
        profiles: &[CompletedProfile],
        true_records: &BTreeMap<String, Vec<String>>,
        truth: &BTreeMap<String, Vec<AttributeValue>>,
    ) -> Result<RunMetrics> {
        if profiles.is_empty() {
            return Err(Error::InvalidArgument("no profiles to score".into()));
        }
        let mut m = RunMetrics::default();
        for p in profiles {
            let expected = true_records.get(&p.query_id).map(Vec::as_slice).unwrap_or(&[]);
            let (precision, recall) = precision_recall(expected, &p.associated_record_ids);
            let acc = profile_accuracy(&p.values, truth_row(truth, &p.query_id)?).unwrap_or(1.0);
            m.query_ids.push(p.query_id.clone());
            m.precision.push(precision);
            m.recall.push(recall);
            m.accuracy.push(acc);
        }
        Ok(m)
    }

    pub fn len(&self) -> usize {
        self.query_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.query_ids.is_empty()
    }

    pub fn mean_precision(&self) -> f64 {
        mean(&self.precision)
    }

    pub fn mean_recall(&self) -> f64 {
        mean(&self.recall)
    }

    pub fn mean_accuracy(&self) -> f64 {
        mean(&self.accuracy)
    }

    /// Aggregates as percentages.
    pub fn summary(&self) -> MetricSummary {
        MetricSummary {
            queries: self.len(),
            precision: 100.0 * self.mean_precision(),
            recall: 100.0 * self.mean_recall(),
            accuracy: 100.0 * self.mean_accuracy(),
        }
    }

    /// Restricts both runs to their shared queries, in `self`'s order.
    pub fn align<'a>(&'a self, other: &'a RunMetrics) -> Vec<(usize, usize)> {
        let pos: BTreeMap<&str, usize> = other
            .query_ids
            .iter()
            .enumerate()
            .map(|(i, q)| (q.as_str(), i))
            .collect();
        self.query_ids
            .iter()
            .enumerate()
            .filter_map(|(i, q)| pos.get(q.as_str()).map(|&j| (i, j)))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub queries: usize,
    pub precision: f64,
    pub recall: f64,
    pub accuracy: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TTestResult {
    pub t_value: f64,
    pub p_value: f64,
    pub effect_size: f64,
    pub df: usize,
}

/// Two-sided paired t-test on `a - b`, with paired Cohen's d as effect size.
pub fn paired_t_test(a: &[f64], b: &[f64]) -> Result<TTestResult> {
    if a.len() != b.len() {
        return Err(Error::InvalidArgument(format!(
            "paired samples differ in length ({} vs {})",
            a.len(),
            b.len()
        )));
    }
    let n = a.len();
    if n < 2 {
        return Err(Error::InvalidArgument("paired t-test needs at least two pairs".into()));
    }
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let m = mean(&d);
    let var = d.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1) as f64;
    let sd = var.sqrt();
    if sd.is_nan() || sd <= 0.0 {
        return Err(Error::InvalidArgument(
            "paired differences have zero variance".into(),
        ));
    }
    let t_value = m / (sd / (n as f64).sqrt());
    let df = n - 1;
    Ok(TTestResult {
        t_value,
        p_value: two_sided_p(t_value, df),
        effect_size: m.abs() / sd,
        df,
    })
}

/// Two-sided tail probability of Student's t with `df` degrees of freedom.
pub fn two_sided_p(t: f64, df: usize) -> f64 {
    let dist = StudentsT::new(0.0, 1.0, df as f64).expect("df is positive");
    (2.0 * dist.sf(t.abs())).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricComparison {
    pub metric: String,
    pub mean_a: f64,
    pub mean_b: f64,
    /// `None` when the paired differences are all equal.
    pub test: Option<TTestResult>,
}

/// Paired tests for precision, recall and accuracy over the shared queries.
pub fn compare_runs(a: &RunMetrics, b: &RunMetrics) -> Result<Vec<MetricComparison>> {
    let pairs = a.align(b);
    if pairs.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "runs share {} queries; at least two are needed",
            pairs.len()
        )));
    }
    let metrics: [(&str, &Vec<f64>, &Vec<f64>); 3] = [
        ("precision", &a.precision, &b.precision),
        ("recall", &a.recall, &b.recall),
        ("accuracy", &a.accuracy, &b.accuracy),
    ];
    Ok(metrics
        .iter()
        .map(|(name, xs, ys)| {
            let x: Vec<f64> = pairs.iter().map(|&(i, _)| xs[i]).collect();
            let y: Vec<f64> = pairs.iter().map(|&(_, j)| ys[j]).collect();
            MetricComparison {
                metric: name.to_string(),
                mean_a: 100.0 * mean(&x),
                mean_b: 100.0 * mean(&y),
                test: paired_t_test(&x, &y).ok(),
            }
        })
        .collect())
}
