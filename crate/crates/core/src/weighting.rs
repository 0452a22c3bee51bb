//! tf-idf weighting and threshold filtering of the extracted term lists.
//!
//! Document units differ per list: verbs are counted per dialogue, objects
//! per verb (the objects a verb governs), complements per object.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;

use indexmap::{IndexMap, IndexSet};
use thiserror::Error;

use crate::corpus::Corpus;
use crate::extraction::{ExtractionTables, ListKind, Occurrence};

#[derive(Debug, Error, PartialEq)]
pub enum WeightingError {
    #[error("term {0:?} occurs in no document")]
    UnseenTerm(String),
    #[error("no documents for {0}")]
    NoDocuments(ListKind),
    #[error("invalid log base {0}; must be greater than 1")]
    LogBase(f64),
}

/// Threshold configuration for the three lists.
///
/// A term survives when `lower_bound < aggregate <= threshold`. The default
/// admits everything except idf-zero terms.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Thresholds {
    pub t_v: f64,
    pub t_o: f64,
    pub t_c: f64,
    pub lower_bound: f64,
    pub log_base: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            t_v: f64::INFINITY,
            t_o: f64::INFINITY,
            t_c: f64::INFINITY,
            lower_bound: 0.0,
            log_base: 10.0,
        }
    }
}

impl Thresholds {
    pub fn for_list(&self, kind: ListKind) -> f64 {
        match kind {
            ListKind::Verbs => self.t_v,
            ListKind::Objects => self.t_o,
            ListKind::Complements => self.t_c,
        }
    }

    /// Checks parameter ranges, naming the first offending parameter.
    pub fn validate(&self) -> Result<(), String> {
        if !(self.log_base.is_finite() && self.log_base > 1.0) {
            return Err(format!("log_base must be > 1 (got {})", self.log_base));
        }
        if !self.lower_bound.is_finite() {
            return Err(format!("lower_bound must be finite (got {})", self.lower_bound));
        }
        for (name, t) in [("t_v", self.t_v), ("t_o", self.t_o), ("t_c", self.t_c)] {
            if t.is_nan() || t < 0.0 {
                return Err(format!("{name} must be ≥ 0 (got {t})"));
            }
            if t < self.lower_bound {
                return Err(format!("{name} must be ≥ lower_bound (got {t} < {})", self.lower_bound));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TermScore {
    pub term: String,
    /// tf-idf per document id, only for documents containing the term.
    pub per_doc: IndexMap<String, f64>,
    /// Maximum of the per-document values.
    pub aggregate: f64,
}

pub fn term_frequency<S: AsRef<str>>(term: &str, doc: &[S]) -> usize {
    doc.iter().filter(|t| t.as_ref() == term).count()
}

/// `log_base(N / df)` over the given documents.
pub fn inverse_document_frequency<S: AsRef<str>>(
    term: &str,
    docs: &[Vec<S>],
    log_base: f64,
) -> Result<f64, WeightingError> {
    if log_base.is_nan() || log_base <= 1.0 {
        return Err(WeightingError::LogBase(log_base));
    }
    let df = docs.iter().filter(|d| term_frequency(term, d) > 0).count();
    if df == 0 {
        return Err(WeightingError::UnseenTerm(term.to_string()));
    }
    Ok(idf(docs.len(), df, log_base))
}

fn idf(n: usize, df: usize, log_base: f64) -> f64 {
    (n as f64 / df as f64).log(log_base)
}

/// The document units of a list as (document id, terms) pairs.
pub fn documents(kind: ListKind, tables: &ExtractionTables, corpus: &Corpus) -> Vec<(String, Vec<String>)> {
    match kind {
        ListKind::Verbs => {
            let mut by_dialogue: IndexMap<&str, Vec<String>> =
                corpus.dialogues.iter().map(|d| (d.id.as_str(), Vec::new())).collect();
            for occ in &tables.verbs {
                if let Some(doc) = by_dialogue.get_mut(occ.dialogue.as_str()) {
                    doc.push(occ.term.clone());
                }
            }
            by_dialogue
                .into_iter()
                .map(|(id, terms)| (id.to_string(), terms))
                .collect()
        }
        ListKind::Objects => tables
            .verb_objects
            .iter()
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect(),
        ListKind::Complements => tables
            .object_complements
            .iter()
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect(),
    }
}

/// tf-idf of every distinct term of a list, in first-occurrence order.
pub fn tfidf_scores(
    kind: ListKind,
    tables: &ExtractionTables,
    corpus: &Corpus,
    log_base: f64,
) -> Result<Vec<TermScore>, WeightingError> {
    if log_base.is_nan() || log_base <= 1.0 {
        return Err(WeightingError::LogBase(log_base));
    }
    let docs = documents(kind, tables, corpus);
    if docs.is_empty() {
        return Err(WeightingError::NoDocuments(kind));
    }
    let n = docs.len();

    let mut order: IndexSet<&str> = IndexSet::new();
    let mut df: HashMap<&str, usize> = HashMap::new();
    let counts: Vec<HashMap<&str, usize>> = docs
        .iter()
        .map(|(_, terms)| {
            let mut tf: HashMap<&str, usize> = HashMap::new();
            for term in terms {
                order.insert(term);
                *tf.entry(term).or_default() += 1;
            }
            for term in tf.keys() {
                *df.entry(term).or_default() += 1;
            }
            tf
        })
        .collect();

    Ok(order
        .into_iter()
        .map(|term| {
            let idf_t = idf(n, df[term], log_base);
            let per_doc: IndexMap<String, f64> = docs
                .iter()
                .zip(&counts)
                .filter_map(|((id, _), tf)| tf.get(term).map(|&f| (id.clone(), f as f64 * idf_t)))
                .collect();
            let aggregate = per_doc.values().copied().fold(0.0, f64::max);
            TermScore {
                term: term.to_string(),
                per_doc,
                aggregate,
            }
        })
        .collect())
}

pub fn is_kept(aggregate: f64, threshold: f64, lower_bound: f64) -> bool {
    lower_bound < aggregate && aggregate <= threshold
}

/// Removes the terms of one list whose aggregate falls outside
/// `(lower_bound, threshold]`, then drops every entry that referred to them:
/// objects of removed verbs, complements of removed objects and any table
/// key left without values.
pub fn filter_terms(
    kind: ListKind,
    scores: &[TermScore],
    threshold: f64,
    lower_bound: f64,
    tables: ExtractionTables,
) -> ExtractionTables {
    let removed: HashSet<&str> = scores
        .iter()
        .filter(|s| !is_kept(s.aggregate, threshold, lower_bound))
        .map(|s| s.term.as_str())
        .collect();
    let mut tables = tables;
    let keep = |o: &Occurrence| !removed.contains(o.term.as_str());
    match kind {
        ListKind::Verbs => {
            tables.verbs.retain(keep);
            tables.verb_objects.retain(|k, _| !removed.contains(k.as_str()));
        }
        ListKind::Objects => {
            tables.objects.retain(keep);
            for values in tables.verb_objects.values_mut() {
                values.retain(|v| !removed.contains(v.as_str()));
            }
            tables.object_complements.retain(|k, _| !removed.contains(k.as_str()));
        }
        ListKind::Complements => {
            tables.complements.retain(keep);
            for values in tables.object_complements.values_mut() {
                values.retain(|v| !removed.contains(v.as_str()));
            }
        }
    }
    restore_integrity(tables)
}

fn restore_integrity(mut tables: ExtractionTables) -> ExtractionTables {
    let verbs: HashSet<String> = tables.verbs.iter().map(|o| o.term.clone()).collect();
    tables.verb_objects.retain(|k, v| verbs.contains(k) && !v.is_empty());
    tables
        .objects
        .retain(|o| o.governor.as_ref().is_some_and(|g| tables.verb_objects.contains_key(g)));

    let objects: HashSet<String> = tables.objects.iter().map(|o| o.term.clone()).collect();
    for values in tables.verb_objects.values_mut() {
        values.retain(|v| objects.contains(v));
    }
    tables
        .object_complements
        .retain(|k, v| objects.contains(k) && !v.is_empty());
    tables.complements.retain(|o| {
        o.governor
            .as_ref()
            .is_some_and(|g| tables.object_complements.contains_key(g))
    });
    tables
}

/// Drops repeated terms from each occurrence list and each association
/// list, keeping first occurrences.
pub fn deduplicate(mut tables: ExtractionTables) -> ExtractionTables {
    let dedup_list = |list: &mut Vec<Occurrence>| {
        let mut seen = HashSet::new();
        list.retain(|o| seen.insert(o.term.clone()));
    };
    dedup_list(&mut tables.verbs);
    dedup_list(&mut tables.objects);
    dedup_list(&mut tables.complements);
    for values in tables
        .verb_objects
        .values_mut()
        .chain(tables.object_complements.values_mut())
    {
        let mut seen = HashSet::new();
        values.retain(|v| seen.insert(v.clone()));
    }
    tables
}

/// Scores and filter outcome of one list.
#[derive(Clone, Debug, PartialEq)]
pub struct ListWeighting {
    pub kind: ListKind,
    pub scores: Vec<TermScore>,
    pub threshold: f64,
    pub lower_bound: f64,
}

impl ListWeighting {
    pub fn kept(&self) -> impl Iterator<Item = &TermScore> {
        self.scores
            .iter()
            .filter(|s| is_kept(s.aggregate, self.threshold, self.lower_bound))
    }
}

/// Scores and filters verbs, then objects over the surviving verbs, then
/// complements over the surviving objects, and finally deduplicates.
pub fn weight_and_filter(
    tables: ExtractionTables,
    corpus: &Corpus,
    thresholds: &Thresholds,
) -> Result<(ExtractionTables, Vec<ListWeighting>), WeightingError> {
    let mut tables = tables;
    let mut report = Vec::with_capacity(3);
    for kind in ListKind::ALL {
        let scores = tfidf_scores(kind, &tables, corpus, thresholds.log_base)?;
        let threshold = thresholds.for_list(kind);
        tables = filter_terms(kind, &scores, threshold, thresholds.lower_bound, tables);
        report.push(ListWeighting {
            kind,
            scores,
            threshold,
            lower_bound: thresholds.lower_bound,
        });
    }
    Ok((deduplicate(tables), report))
}

/// TSV with columns list, term, aggregate, kept.
pub fn scores_tsv(report: &[ListWeighting]) -> String {
    let mut out = String::from("list\tterm\taggregate\tkept\n");
    for list in report {
        for s in &list.scores {
            let kept = is_kept(s.aggregate, list.threshold, list.lower_bound);
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}",
                list.kind,
                s.term,
                crate::format::sig12(s.aggregate),
                kept
            );
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Dialogue, Sentence};

    fn occ(term: &str, governor: Option<&str>, dialogue: &str) -> Occurrence {
        Occurrence {
            term: term.into(),
            governor: governor.map(Into::into),
            dialogue: dialogue.into(),
        }
    }

    fn empty_corpus(ids: &[&str]) -> Corpus {
        Corpus::new(
            ids.iter()
                .map(|id| Dialogue {
                    id: id.to_string(),
                    sentences: vec![Sentence::default()],
                })
                .collect(),
        )
    }

    #[test]
    fn term_frequency_examples() {
        assert_eq!(term_frequency("book", &["book", "book", "pay"]), 2);
        assert_eq!(term_frequency::<&str>("book", &[]), 0);
        assert_eq!(term_frequency("flight", &["book", "pay"]), 0);
    }

    #[test]
    fn idf_examples() {
        let all = vec![vec!["a"], vec!["a", "b"], vec!["a"]];
        assert_eq!(inverse_document_frequency("a", &all, 10.0).unwrap(), 0.0);

        let mut ten: Vec<Vec<&str>> = vec![vec!["x"]; 10];
        ten[3] = vec!["t"];
        assert!((inverse_document_frequency("t", &ten, 10.0).unwrap() - 1.0).abs() < 1e-15);

        let four = vec![vec!["t"], vec!["t"], vec!["u"], vec!["u"]];
        let v = inverse_document_frequency("t", &four, 10.0).unwrap();
        assert!((v - std::f64::consts::LOG10_2).abs() < 1e-12);

        assert_eq!(
            inverse_document_frequency("zzz", &four, 10.0),
            Err(WeightingError::UnseenTerm("zzz".into()))
        );
    }

    #[test]
    fn verb_scores_use_dialogues_as_documents() {
        let tables = ExtractionTables {
            verbs: vec![
                occ("book", None, "d1"),
                occ("book", None, "d1"),
                occ("book", None, "d1"),
                occ("pay", None, "d2"),
            ],
            ..Default::default()
        };
        let scores = tfidf_scores(ListKind::Verbs, &tables, &empty_corpus(&["d1", "d2"]), 10.0).unwrap();
        assert_eq!(scores[0].term, "book");
        assert_eq!(scores[0].per_doc.len(), 1);
        assert!((scores[0].per_doc["d1"] - 3.0 * 2f64.log10()).abs() < 1e-15);
        assert!((scores[0].aggregate - 0.903_089_986_991_943_6).abs() < 1e-12);
    }

    #[test]
    fn term_in_every_document_scores_zero() {
        let tables = ExtractionTables {
            verbs: vec![occ("go", None, "a"), occ("go", None, "b"), occ("run", None, "b")],
            ..Default::default()
        };
        let scores = tfidf_scores(ListKind::Verbs, &tables, &empty_corpus(&["a", "b"]), 10.0).unwrap();
        assert_eq!(scores[0].aggregate, 0.0);
        assert!(scores[1].aggregate > 0.0);
    }

    #[test]
    fn single_verb_key_gives_zero_object_scores() {
        let tables = ExtractionTables {
            verbs: vec![occ("book", None, "d")],
            objects: vec![occ("flight", Some("book"), "d"), occ("hotel", Some("book"), "d")],
            verb_objects: IndexMap::from([("book".into(), vec!["flight".into(), "hotel".into()])]),
            ..Default::default()
        };
        let scores = tfidf_scores(ListKind::Objects, &tables, &empty_corpus(&["d"]), 10.0).unwrap();
        assert!(scores.iter().all(|s| s.aggregate == 0.0));
    }

    #[test]
    fn empty_collection_is_an_error() {
        let tables = ExtractionTables::default();
        assert_eq!(
            tfidf_scores(ListKind::Objects, &tables, &empty_corpus(&["d"]), 10.0),
            Err(WeightingError::NoDocuments(ListKind::Objects))
        );
        assert_eq!(
            tfidf_scores(ListKind::Verbs, &tables, &Corpus::default(), 10.0),
            Err(WeightingError::NoDocuments(ListKind::Verbs))
        );
    }

    #[test]
    fn keep_band() {
        assert!(!is_kept(0.0, 5.0, 0.0));
        assert!(is_kept(0.5, 1.0, 0.0));
        assert!(!is_kept(2.0, 1.0, 0.0));
        assert!(is_kept(1.0, 1.0, 0.0));
        assert!(is_kept(0.0, f64::INFINITY, -1.0));
    }

    fn sample_tables() -> ExtractionTables {
        ExtractionTables {
            verbs: vec![occ("book", None, "d1"), occ("pay", None, "d2"), occ("book", None, "d2")],
            objects: vec![
                occ("flight", Some("book"), "d1"),
                occ("bill", Some("pay"), "d2"),
                occ("hotel", Some("book"), "d2"),
            ],
            complements: vec![occ("morning", Some("flight"), "d1"), occ("tax", Some("bill"), "d2")],
            verb_objects: IndexMap::from([
                ("book".into(), vec!["flight".into(), "hotel".into()]),
                ("pay".into(), vec!["bill".into()]),
            ]),
            object_complements: IndexMap::from([
                ("flight".into(), vec!["morning".into()]),
                ("bill".into(), vec!["tax".into()]),
            ]),
        }
    }

    fn score(term: &str, aggregate: f64) -> TermScore {
        TermScore {
            term: term.into(),
            per_doc: IndexMap::new(),
            aggregate,
        }
    }

    #[test]
    fn removing_a_verb_drops_its_objects_and_their_complements() {
        let scores = [score("book", 0.5), score("pay", 3.0)];
        let out = filter_terms(ListKind::Verbs, &scores, 1.0, 0.0, sample_tables());
        assert_eq!(
            out.verbs.iter().map(|o| o.term.as_str()).collect::<Vec<_>>(),
            ["book", "book"]
        );
        assert!(!out.verb_objects.contains_key("pay"));
        assert!(out.objects.iter().all(|o| o.term != "bill"));
        assert!(!out.object_complements.contains_key("bill"));
        assert!(out.complements.iter().all(|o| o.term != "tax"));
    }

    #[test]
    fn removing_an_object_updates_values_and_keys() {
        let scores = [score("flight", 0.0), score("bill", 0.3), score("hotel", 0.3)];
        let out = filter_terms(ListKind::Objects, &scores, 1.0, 0.0, sample_tables());
        assert_eq!(out.verb_objects["book"], ["hotel"]);
        assert!(!out.object_complements.contains_key("flight"));
        assert_eq!(out.complements.len(), 1);
    }

    #[test]
    fn removing_all_objects_of_a_verb_drops_its_key() {
        let scores = [score("bill", 0.0)];
        let out = filter_terms(ListKind::Objects, &scores, 1.0, 0.0, sample_tables());
        assert!(!out.verb_objects.contains_key("pay"));
        assert!(out.verbs.iter().any(|o| o.term == "pay"));
    }

    #[test]
    fn deduplicate_keeps_first_occurrences() {
        let mut tables = sample_tables();
        tables.verb_objects["book"].push("flight".into());
        let out = deduplicate(tables);
        assert_eq!(
            out.verbs.iter().map(|o| o.term.as_str()).collect::<Vec<_>>(),
            ["book", "pay"]
        );
        assert_eq!(out.verb_objects["book"], ["flight", "hotel"]);
    }

    #[test]
    fn threshold_validation_names_parameter() {
        let t = Thresholds {
            t_o: -1.0,
            ..Default::default()
        };
        assert!(t.validate().unwrap_err().starts_with("t_o"));
        let t = Thresholds {
            log_base: 1.0,
            ..Default::default()
        };
        assert!(t.validate().unwrap_err().starts_with("log_base"));
        assert!(Thresholds::default().validate().is_ok());
    }
}
