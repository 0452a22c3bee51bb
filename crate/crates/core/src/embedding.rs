//! Binary association embeddings with L2-normalized rows.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;

use indexmap::IndexMap;
use thiserror::Error;

use crate::format::sig12;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EmbeddingError {
    #[error("degenerate embedding space ({rows} rows, {cols} columns)")]
    Degenerate { rows: usize, cols: usize },
    #[error("term {term:?} associated with row {row:?} is not a column")]
    UnknownColumn { row: String, term: String },
    #[error("duplicate label {0:?}")]
    DuplicateLabel(String),
    #[error("unknown row {0:?}")]
    UnknownRow(String),
}

/// Dense, row-labeled and column-labeled matrix of non-negative values.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingMatrix {
    row_labels: Vec<String>,
    col_labels: Vec<String>,
    values: Vec<f64>,
    row_index: HashMap<String, usize>,
}

impl EmbeddingMatrix {
    /// Builds a matrix from rows. Panics if a row length differs from the
    /// column count or labels repeat; use this for values already known to
    /// be consistent.
    pub fn from_rows(row_labels: Vec<String>, col_labels: Vec<String>, rows: Vec<Vec<f64>>) -> Self {
        Self::try_from_rows(row_labels, col_labels, rows).expect("inconsistent embedding matrix")
    }

    pub fn try_from_rows(
        row_labels: Vec<String>,
        col_labels: Vec<String>,
        rows: Vec<Vec<f64>>,
    ) -> Result<Self, EmbeddingError> {
        assert_eq!(row_labels.len(), rows.len(), "row label count");
        let mut cols_seen = HashSet::new();
        for c in &col_labels {
            if !cols_seen.insert(c.as_str()) {
                return Err(EmbeddingError::DuplicateLabel(c.clone()));
            }
        }
        let mut row_index = HashMap::with_capacity(row_labels.len());
        for (i, r) in row_labels.iter().enumerate() {
            if row_index.insert(r.clone(), i).is_some() {
                return Err(EmbeddingError::DuplicateLabel(r.clone()));
            }
        }
        let mut values = Vec::with_capacity(rows.len() * col_labels.len());
        for row in rows {
            assert_eq!(row.len(), col_labels.len(), "row length");
            values.extend(row);
        }
        Ok(EmbeddingMatrix {
            row_labels,
            col_labels,
            values,
            row_index,
        })
    }

    pub fn row_labels(&self) -> &[String] {
        &self.row_labels
    }

    pub fn col_labels(&self) -> &[String] {
        &self.col_labels
    }

    pub fn nrows(&self) -> usize {
        self.row_labels.len()
    }

    pub fn ncols(&self) -> usize {
        self.col_labels.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.ncols();
        &self.values[i * n..(i + 1) * n]
    }

    pub fn row_position(&self, label: &str) -> Option<usize> {
        self.row_index.get(label).copied()
    }

    pub fn row_by_label(&self, label: &str) -> Option<&[f64]> {
        self.row_position(label).map(|i| self.row(i))
    }

    pub fn col_position(&self, label: &str) -> Option<usize> {
        self.col_labels.iter().position(|c| c == label)
    }

    pub fn rows(&self) -> impl Iterator<Item = (&str, &[f64])> {
        self.row_labels
            .iter()
            .enumerate()
            .map(|(i, l)| (l.as_str(), self.row(i)))
    }

    /// TSV with a header of column labels and one labeled row per line.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for c in &self.col_labels {
            out.push('\t');
            out.push_str(c);
        }
        out.push('\n');
        for (label, row) in self.rows() {
            out.push_str(label);
            for v in row {
                let _ = write!(out, "\t{}", sig12(*v));
            }
            out.push('\n');
        }
        out
    }
}

pub fn l2_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Result of [`dict2vec`]: the matrix plus the labels of all-zero rows
/// that were dropped.
#[derive(Clone, Debug, PartialEq)]
pub struct Dict2Vec {
    pub matrix: EmbeddingMatrix,
    pub dropped_rows: Vec<String>,
}

/// Turns an association table into a binary matrix and normalizes each row
/// to unit L2 norm. Rows without any association are dropped.
pub fn dict2vec(
    rows: &IndexMap<String, Vec<String>>,
    row_order: &[String],
    col_order: &[String],
) -> Result<Dict2Vec, EmbeddingError> {
    let columns: HashMap<&str, usize> = col_order.iter().enumerate().map(|(i, c)| (c.as_str(), i)).collect();
    if columns.len() != col_order.len() {
        let mut seen = HashSet::new();
        let dup = col_order.iter().find(|c| !seen.insert(c.as_str())).unwrap();
        return Err(EmbeddingError::DuplicateLabel(dup.clone()));
    }

    let mut labels = Vec::new();
    let mut matrix_rows = Vec::new();
    let mut dropped_rows = Vec::new();
    for label in row_order {
        let mut row = vec![0.0; col_order.len()];
        for term in rows.get(label).into_iter().flatten() {
            let &c = columns
                .get(term.as_str())
                .ok_or_else(|| EmbeddingError::UnknownColumn {
                    row: label.clone(),
                    term: term.clone(),
                })?;
            row[c] = 1.0;
        }
        let norm = l2_norm(&row);
        if norm == 0.0 {
            dropped_rows.push(label.clone());
            continue;
        }
        row.iter_mut().for_each(|x| *x /= norm);
        labels.push(label.clone());
        matrix_rows.push(row);
    }

    if labels.is_empty() || col_order.is_empty() {
        return Err(EmbeddingError::Degenerate {
            rows: labels.len(),
            cols: col_order.len(),
        });
    }
    let matrix = EmbeddingMatrix::try_from_rows(labels, col_order.to_vec(), matrix_rows)?;
    Ok(Dict2Vec { matrix, dropped_rows })
}
