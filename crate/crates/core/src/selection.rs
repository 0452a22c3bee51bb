//! Representative selection over an embedding matrix.
//!
//! Each row is scored with the Gini index; the row at the lower median of
//! those scores seeds a greedy max-min (farthest point) search under cosine
//! dissimilarity, which yields `g` mutually dissimilar representatives.
//! Each representative then collects its `c` most similar other rows.

use std::cmp::Ordering;
use std::fmt::Write as _;

use indexmap::IndexMap;
use thiserror::Error;

use crate::embedding::{l2_norm, EmbeddingMatrix};
use crate::format::sig12;

#[derive(Debug, Error, PartialEq)]
pub enum SelectionError {
    #[error("Gini index needs a non-empty, non-negative vector with positive mass")]
    GiniDomain,
    #[error("cosine similarity is undefined for a zero vector")]
    ZeroNorm,
    #[error("vector lengths differ ({0} vs {1})")]
    Shape(usize, usize),
    #[error("no scored embeddings")]
    Empty,
    #[error("g must be ≥ 1")]
    ZeroG,
    #[error("unknown row {0:?}")]
    UnknownRow(String),
}

/// Similarities are compared on a 1e-12 grid so that values equal up to
/// rounding noise tie and fall back to label order.
const TIE_SCALE: f64 = 1e12;

fn tie_key(x: f64) -> i64 {
    (x * TIE_SCALE).round() as i64
}

/// Gini index of a non-negative vector: 0 when all entries are equal,
/// approaching 1 as mass concentrates in fewer entries.
pub fn gini_index(x: &[f64]) -> Result<f64, SelectionError> {
    if x.is_empty() || x.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(SelectionError::GiniDomain);
    }
    let total: f64 = x.iter().sum();
    if total <= 0.0 {
        return Err(SelectionError::GiniDomain);
    }
    let mut sorted = x.to_vec();
    sorted.sort_by(f64::total_cmp);
    // Coefficients of ranks i and n+1-i are opposite, so the sum is taken
    // over rank pairs; every term is then non-negative and equal entries
    // cancel exactly.
    let len = sorted.len();
    let weighted: f64 = (0..len / 2)
        .map(|i| (len - 1 - 2 * i) as f64 * (sorted[len - 1 - i] - sorted[i]))
        .sum();
    Ok(weighted / (len as f64 * total))
}

pub fn cosine_similarity(a: &[f64], b: &[f64]) -> Result<f64, SelectionError> {
    if a.len() != b.len() {
        return Err(SelectionError::Shape(a.len(), b.len()));
    }
    let (na, nb) = (l2_norm(a), l2_norm(b));
    if na == 0.0 || nb == 0.0 {
        return Err(SelectionError::ZeroNorm);
    }
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    Ok((dot / (na * nb)).clamp(-1.0, 1.0))
}

pub fn cosine_dissimilarity(a: &[f64], b: &[f64]) -> Result<f64, SelectionError> {
    cosine_similarity(a, b).map(|s| 1.0 - s)
}

#[derive(Clone, Debug, PartialEq)]
pub struct GiniScore {
    pub row_label: String,
    pub value: f64,
}

/// Gini score of every row, in row order.
pub fn gini_scores(matrix: &EmbeddingMatrix) -> Result<Vec<GiniScore>, SelectionError> {
    matrix
        .rows()
        .map(|(label, row)| {
            Ok(GiniScore {
                row_label: label.to_string(),
                value: gini_index(row)?,
            })
        })
        .collect()
}

/// Label of the lower median score, ordering by (value, label).
pub fn median_anchor(scores: &[GiniScore]) -> Result<String, SelectionError> {
    if scores.is_empty() {
        return Err(SelectionError::Empty);
    }
    let mut sorted: Vec<&GiniScore> = scores.iter().collect();
    sorted.sort_by(|a, b| a.value.total_cmp(&b.value).then_with(|| a.row_label.cmp(&b.row_label)));
    Ok(sorted[(sorted.len() - 1) / 2].row_label.clone())
}

/// Greedy max-min selection seeded at `anchor`: each step adds the row
/// whose smallest dissimilarity to the rows chosen so far is largest, with
/// ties going to the lexicographically smallest label.
pub fn filter_representatives(matrix: &EmbeddingMatrix, anchor: &str, g: usize) -> Result<Vec<String>, SelectionError> {
    if g == 0 {
        return Err(SelectionError::ZeroG);
    }
    let seed = matrix
        .row_position(anchor)
        .ok_or_else(|| SelectionError::UnknownRow(anchor.to_string()))?;
    let n = matrix.nrows();
    let target = g.min(n);

    let mut chosen = vec![seed];
    let mut taken = vec![false; n];
    taken[seed] = true;
    // Smallest dissimilarity from each row to the chosen set.
    let mut nearest = vec![f64::INFINITY; n];
    while chosen.len() < target {
        let last = *chosen.last().unwrap();
        for i in 0..n {
            if !taken[i] {
                let d = cosine_dissimilarity(matrix.row(i), matrix.row(last))?;
                nearest[i] = nearest[i].min(d);
            }
        }
        let next = (0..n)
            .filter(|&i| !taken[i])
            .max_by(|&a, &b| {
                tie_key(nearest[a])
                    .cmp(&tie_key(nearest[b]))
                    .then_with(|| matrix.row_labels()[b].cmp(&matrix.row_labels()[a]))
            })
            .expect("fewer candidates than target");
        taken[next] = true;
        chosen.push(next);
    }
    Ok(chosen.into_iter().map(|i| matrix.row_labels()[i].clone()).collect())
}

/// Representatives and the rows attached to each.
#[derive(Clone, Debug, PartialEq)]
pub struct SelectionResult {
    pub anchor: String,
    pub representatives: Vec<String>,
    /// Representative → (member label, cosine similarity), most similar first.
    pub members: IndexMap<String, Vec<(String, f64)>>,
}

/// Attaches to each representative the `c` most similar rows that are not
/// themselves representatives. Member lists may overlap.
pub fn select_members(
    matrix: &EmbeddingMatrix,
    representatives: &[String],
    c: usize,
) -> Result<SelectionResult, SelectionError> {
    let anchor = representatives.first().cloned().ok_or(SelectionError::Empty)?;
    let mut rep_rows = Vec::with_capacity(representatives.len());
    for r in representatives {
        rep_rows.push(
            matrix
                .row_position(r)
                .ok_or_else(|| SelectionError::UnknownRow(r.clone()))?,
        );
    }
    let candidates: Vec<usize> = (0..matrix.nrows()).filter(|i| !rep_rows.contains(i)).collect();

    let mut members = IndexMap::with_capacity(representatives.len());
    for (label, &r) in representatives.iter().zip(&rep_rows) {
        let mut ranked = candidates
            .iter()
            .map(|&i| {
                Ok((
                    matrix.row_labels()[i].clone(),
                    cosine_similarity(matrix.row(r), matrix.row(i))?,
                ))
            })
            .collect::<Result<Vec<_>, SelectionError>>()?;
        ranked.sort_by(|(la, sa), (lb, sb)| match tie_key(*sb).cmp(&tie_key(*sa)) {
            Ordering::Equal => la.cmp(lb),
            other => other,
        });
        ranked.truncate(c);
        members.insert(label.clone(), ranked);
    }
    Ok(SelectionResult {
        anchor,
        representatives: representatives.to_vec(),
        members,
    })
}

/// Gini scores together with the selection they led to.
#[derive(Clone, Debug, PartialEq)]
pub struct Selection {
    pub gini: Vec<GiniScore>,
    pub result: SelectionResult,
}

/// Scores rows, picks the median anchor, filters `g` representatives and
/// attaches `c` members to each.
pub fn select(matrix: &EmbeddingMatrix, g: usize, c: usize) -> Result<Selection, SelectionError> {
    let gini = gini_scores(matrix)?;
    let anchor = median_anchor(&gini)?;
    let representatives = filter_representatives(matrix, &anchor, g)?;
    let result = select_members(matrix, &representatives, c)?;
    Ok(Selection { gini, result })
}

/// TSV rows (list, label, gini) for a named list.
pub fn gini_tsv(lists: &[(&str, &[GiniScore])]) -> String {
    let mut out = String::from("list\tlabel\tgini\n");
    for (name, scores) in lists {
        for s in scores.iter() {
            let _ = writeln!(out, "{}\t{}\t{}", name, s.row_label, sig12(s.value));
        }
    }
    out
}
