//! Source-similarity matrix, trustworthiness and biased source ratings.

use std::io::{Read, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Dataset;
use crate::similarity::SimilarityModel;

/// `cells[i][j]` is the mean, over records of source `i`, of the best
/// normalized similarity to any record of source `j`. Not symmetric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceSimilarityMatrix {
    pub source_order: Vec<String>,
    pub cells: Vec<Vec<f64>>,
}

impl SourceSimilarityMatrix {
    pub fn new(source_order: Vec<String>, cells: Vec<Vec<f64>>) -> Result<Self> {
        let n = source_order.len();
        if cells.len() != n || cells.iter().any(|row| row.len() != n) {
            return Err(Error::InvalidArgument(format!(
                "source-similarity matrix must be {n}x{n}"
            )));
        }
        if cells.iter().flatten().any(|c| !(0.0..=1.0).contains(c)) {
            return Err(Error::InvalidArgument(
                "source-similarity cells must lie in [0, 1]".into(),
            ));
        }
        Ok(SourceSimilarityMatrix {
            source_order,
            cells,
        })
    }

    pub fn len(&self) -> usize {
        self.source_order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.source_order.is_empty()
    }

    pub fn index_of(&self, source_id: &str) -> Option<usize> {
        self.source_order.iter().position(|s| s == source_id)
    }

    pub fn get(&self, from: usize, to: usize) -> f64 {
        self.cells[from][to]
    }

    /// Writes the matrix as CSV with a header row and a leading id column.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["source".to_string()];
        header.extend(self.source_order.iter().cloned());
        w.write_record(&header)?;
        for (id, row) in self.source_order.iter().zip(&self.cells) {
            let mut line = vec![id.clone()];
            line.extend(row.iter().map(|c| format!("{c}")));
            w.write_record(&line)?;
        }
        w.flush().map_err(|e| Error::io("<matrix>", e))?;
        Ok(())
    }

    pub fn read_csv<R: Read>(path: &Path, input: R) -> Result<Self> {
        let mut reader = csv::Reader::from_reader(input);
        let header = reader.headers()?.clone();
        let order: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
        let mut cells = Vec::new();
        for (i, row) in reader.records().enumerate() {
            let row = row?;
            let line = i + 2;
            let id = row.get(0).unwrap_or_default();
            if order.get(i).map(String::as_str) != Some(id) {
                return Err(Error::parse(path, line, format!("row id `{id}` out of order")));
            }
            let values = row
                .iter()
                .skip(1)
                .map(|c| c.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::parse(path, line, e.to_string()))?;
            cells.push(values);
        }
        SourceSimilarityMatrix::new(order, cells)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_csv(path, file)
    }
}

/// Builds the source-similarity matrix over `dataset.sources`.
///
/// Cells are evaluated in parallel; each cell is a sequential fold over its
/// record pairs, so the result does not depend on scheduling. The diagonal
/// is pinned to exactly 1.0.
pub fn build_source_similarity_matrix(
    dataset: &Dataset,
    similarity: &SimilarityModel<'_>,
) -> Result<SourceSimilarityMatrix> {
    if let Some(empty) = dataset.sources.iter().find(|s| s.members.is_empty()) {
        return Err(Error::Validation(format!("source `{}` has no records", empty.source_id)));
    }
    let n = dataset.sources.len();
    let cells: Vec<f64> = (0..n * n)
        .into_par_iter()
        .map(|cell| {
            let (i, j) = (cell / n, cell % n);
            if i == j {
                return 1.0;
            }
            let from = &dataset.sources[i];
            let to = &dataset.sources[j];
            let mut total = 0.0;
            for &r1 in &from.members {
                let mut best = 0.0f64;
                for &r2 in &to.members {
                    best = best.max(
                        similarity.normalized(&dataset.records[r1].values, &dataset.records[r2].values),
                    );
                }
                total += best;
            }
            total / from.members.len() as f64
        })
        .collect();
    let cells = cells.chunks(n.max(1)).take(n).map(<[f64]>::to_vec).collect();
    SourceSimilarityMatrix::new(
        dataset.sources.iter().map(|s| s.source_id.clone()).collect(),
        cells,
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrustReport {
    pub source_order: Vec<String>,
    pub mts_index: usize,
    pub row_sums: Vec<f64>,
    pub trust: Vec<f64>,
}

impl TrustReport {
    pub fn most_trustworthy(&self) -> &str {
        &self.source_order[self.mts_index]
    }

    pub fn trust_of(&self, source_id: &str) -> Option<f64> {
        self.source_order
            .iter()
            .position(|s| s == source_id)
            .map(|i| self.trust[i])
    }
}

/// Index of the first maximum.
pub(crate) fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// The most trustworthy source maximizes its row sum; every source's
/// trustworthiness is its similarity towards that source.
pub fn trustworthiness_scores(matrix: &SourceSimilarityMatrix) -> Result<TrustReport> {
    if matrix.is_empty() {
        return Err(Error::InvalidArgument("empty source-similarity matrix".into()));
    }
    let row_sums: Vec<f64> = matrix.cells.iter().map(|row| row.iter().sum()).collect();
    let mts_index = argmax(&row_sums);
    let trust = matrix.cells.iter().map(|row| row[mts_index]).collect();
    Ok(TrustReport {
        source_order: matrix.source_order.clone(),
        mts_index,
        row_sums,
        trust,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceRatings {
    pub source_order: Vec<String>,
    /// `None` for uniform ratings.
    pub biased_source: Option<String>,
    pub bias_value: f64,
    pub ratings: Vec<f64>,
    pub index_of_maximum: usize,
}

/// Rates every source relative to a user-chosen biased source:
/// `rating[i] = bias_value * cells[i][b] / cells[b][b]`.
pub fn source_ratings(
    matrix: &SourceSimilarityMatrix,
    biased_source: &str,
    bias_value: f64,
) -> Result<SourceRatings> {
    let b = matrix
        .index_of(biased_source)
        .ok_or_else(|| Error::InvalidArgument(format!("unknown biased source `{biased_source}`")))?;
    if !(bias_value > 0.0 && bias_value.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "bias value must be positive, got {bias_value}"
        )));
    }
    let anchor = matrix.cells[b][b];
    if anchor <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "biased source `{biased_source}` has zero self-similarity"
        )));
    }
    let ratings: Vec<f64> = matrix
        .cells
        .iter()
        .map(|row| bias_value * row[b] / anchor)
        .collect();
    Ok(SourceRatings {
        source_order: matrix.source_order.clone(),
        biased_source: Some(biased_source.to_string()),
        bias_value,
        index_of_maximum: argmax(&ratings),
        ratings,
    })
}

/// All sources rated 1.0; the maximum falls on the first source.
pub fn uniform_ratings(source_order: &[String]) -> Result<SourceRatings> {
    if source_order.is_empty() {
        return Err(Error::InvalidArgument("no sources to rate".into()));
    }
    Ok(SourceRatings {
        source_order: source_order.to_vec(),
        biased_source: None,
        bias_value: 1.0,
        ratings: vec![1.0; source_order.len()],
        index_of_maximum: 0,
    })
}
