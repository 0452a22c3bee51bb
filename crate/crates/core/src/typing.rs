//! Type extraction and the end-to-end ontology pipeline.

use indexmap::IndexMap;
use thiserror::Error;

use crate::corpus::Corpus;
use crate::embedding::{dict2vec, l2_norm, Dict2Vec, EmbeddingError, EmbeddingMatrix};
use crate::extraction::{extract_tables, lemmatize_tables, ExtractionTables, ListKind};
use crate::selection::{select, Selection, SelectionError, SelectionResult};
use crate::weighting::{weight_and_filter, ListWeighting, Thresholds, WeightingError};

/// One row per type over the dimensions of the source embeddings.
#[derive(Clone, Debug, PartialEq)]
pub struct TypeMatrix {
    pub type_labels: Vec<String>,
    /// Type → member terms, the type's own anchor first.
    pub member_terms: IndexMap<String, Vec<String>>,
    pub matrix: EmbeddingMatrix,
}

impl TypeMatrix {
    pub fn empty(col_labels: Vec<String>) -> Self {
        TypeMatrix {
            type_labels: Vec::new(),
            member_terms: IndexMap::new(),
            matrix: EmbeddingMatrix::from_rows(Vec::new(), col_labels, Vec::new()),
        }
    }

    pub fn len(&self) -> usize {
        self.type_labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.type_labels.is_empty()
    }
}

/// Sums each representative with its members and normalizes the sum.
///
/// Rows are added in label order, so the result does not depend on the
/// order of the member lists.
pub fn extract_types(selection: &SelectionResult, matrix: &EmbeddingMatrix) -> Result<TypeMatrix, EmbeddingError> {
    let mut member_terms = IndexMap::new();
    let mut rows = Vec::with_capacity(selection.representatives.len());
    for rep in &selection.representatives {
        let members: Vec<String> = selection
            .members
            .get(rep)
            .map(|m| m.iter().map(|(label, _)| label.clone()).collect())
            .unwrap_or_default();
        let mut summed: Vec<&str> = std::iter::once(rep.as_str())
            .chain(members.iter().map(String::as_str))
            .collect();
        summed.sort_unstable();
        summed.dedup();

        let mut row = vec![0.0; matrix.ncols()];
        for label in summed {
            let source = matrix
                .row_by_label(label)
                .ok_or_else(|| EmbeddingError::UnknownRow(label.to_string()))?;
            row.iter_mut().zip(source).for_each(|(acc, v)| *acc += v);
        }
        let norm = l2_norm(&row);
        if norm > 0.0 {
            row.iter_mut().for_each(|v| *v /= norm);
        }
        rows.push(row);

        let mut terms = vec![rep.clone()];
        terms.extend(members);
        member_terms.insert(rep.clone(), terms);
    }
    let matrix = EmbeddingMatrix::try_from_rows(selection.representatives.clone(), matrix.col_labels().to_vec(), rows)?;
    Ok(TypeMatrix {
        type_labels: selection.representatives.clone(),
        member_terms,
        matrix,
    })
}

/// Intent → entity weights: the mass of each intent vector on the object
/// columns belonging to each entity type, with rows normalized to sum 1.
/// Rows with no mass on any entity stay zero.
pub fn associate(intents: &TypeMatrix, entities: &TypeMatrix) -> Vec<Vec<f64>> {
    let entity_columns: Vec<Vec<usize>> = entities
        .type_labels
        .iter()
        .map(|e| {
            entities.member_terms[e]
                .iter()
                .filter_map(|term| intents.matrix.col_position(term))
                .collect()
        })
        .collect();
    intents
        .matrix
        .rows()
        .map(|(_, row)| {
            let raw: Vec<f64> = entity_columns
                .iter()
                .map(|cols| cols.iter().map(|&c| row[c]).sum())
                .collect();
            let total: f64 = raw.iter().sum();
            if total > 0.0 {
                raw.into_iter().map(|w| w / total).collect()
            } else {
                raw
            }
        })
        .collect()
}

/// Run configuration echoed into every estimate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Parameters {
    pub t_v: f64,
    pub t_o: f64,
    pub t_c: f64,
    pub g_v: usize,
    pub g_o: usize,
    pub c_v: usize,
    pub c_o: usize,
    pub log_base: f64,
    pub lower_bound: f64,
}

impl Default for Parameters {
    fn default() -> Self {
        let t = Thresholds::default();
        Parameters {
            t_v: t.t_v,
            t_o: t.t_o,
            t_c: t.t_c,
            g_v: 3,
            g_o: 3,
            c_v: 5,
            c_o: 5,
            log_base: t.log_base,
            lower_bound: t.lower_bound,
        }
    }
}

impl Parameters {
    pub fn thresholds(&self) -> Thresholds {
        Thresholds {
            t_v: self.t_v,
            t_o: self.t_o,
            t_c: self.t_c,
            lower_bound: self.lower_bound,
            log_base: self.log_base,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        self.thresholds().validate()?;
        if self.g_v == 0 {
            return Err("g_v must be ≥ 1".into());
        }
        if self.g_o == 0 {
            return Err("g_o must be ≥ 1".into());
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OntologyEstimate {
    /// Intent types over object dimensions.
    pub intents: TypeMatrix,
    /// Entity types over complement dimensions.
    pub entities: TypeMatrix,
    /// |intents| × |entities|.
    pub associativity: Vec<Vec<f64>>,
    pub parameters: Parameters,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stage {
    Configuration,
    Extraction,
    Weighting,
    Embedding,
    Selection,
    Typing,
}

impl std::fmt::Display for Stage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Stage::Configuration => "configuration",
            Stage::Extraction => "extraction",
            Stage::Weighting => "weighting",
            Stage::Embedding => "embedding",
            Stage::Selection => "selection",
            Stage::Typing => "typing",
        })
    }
}

#[derive(Debug, Error)]
#[error("{stage} stage: {message}")]
pub struct PipelineError {
    pub stage: Stage,
    pub message: String,
}

impl PipelineError {
    fn new(stage: Stage, message: impl ToString) -> Self {
        PipelineError {
            stage,
            message: message.to_string(),
        }
    }
}

impl From<WeightingError> for PipelineError {
    fn from(e: WeightingError) -> Self {
        PipelineError::new(Stage::Weighting, e)
    }
}

/// Every intermediate product of a pipeline run.
#[derive(Clone, Debug)]
pub struct PipelineRun {
    pub extracted: ExtractionTables,
    pub weighting: Vec<ListWeighting>,
    pub filtered: ExtractionTables,
    pub verb_embeddings: Dict2Vec,
    pub object_embeddings: Dict2Vec,
    pub verb_selection: Selection,
    pub object_selection: Selection,
    pub ontology: OntologyEstimate,
}

/// Runs extraction, lemmatization, weighting, embedding, selection,
/// typing and association, keeping every intermediate result.
pub fn run_pipeline(corpus: &Corpus, parameters: &Parameters) -> Result<PipelineRun, PipelineError> {
    parameters
        .validate()
        .map_err(|m| PipelineError::new(Stage::Configuration, m))?;
    if corpus.is_empty() {
        return Err(PipelineError::new(Stage::Extraction, "corpus has no dialogues"));
    }
    let extracted = lemmatize_tables(extract_tables(corpus));
    if extracted.verbs.is_empty() {
        return Err(PipelineError::new(Stage::Extraction, "no verbs extracted"));
    }

    let (filtered, weighting) = weight_and_filter(extracted.clone(), corpus, &parameters.thresholds())?;

    let embed = |kind: ListKind, table, rows: ListKind, cols: ListKind| {
        dict2vec(table, &filtered.distinct_terms(rows), &filtered.distinct_terms(cols))
            .map_err(|e| PipelineError::new(Stage::Embedding, format!("{kind}: {e}")))
    };
    let verb_embeddings = embed(
        ListKind::Verbs,
        &filtered.verb_objects,
        ListKind::Verbs,
        ListKind::Objects,
    )?;
    let object_embeddings = embed(
        ListKind::Objects,
        &filtered.object_complements,
        ListKind::Objects,
        ListKind::Complements,
    )?;

    let choose = |kind: ListKind, m: &EmbeddingMatrix, g, c| {
        select(m, g, c).map_err(|e: SelectionError| PipelineError::new(Stage::Selection, format!("{kind}: {e}")))
    };
    let verb_selection = choose(ListKind::Verbs, &verb_embeddings.matrix, parameters.g_v, parameters.c_v)?;
    let object_selection = choose(
        ListKind::Objects,
        &object_embeddings.matrix,
        parameters.g_o,
        parameters.c_o,
    )?;

    let typing_err = |e: EmbeddingError| PipelineError::new(Stage::Typing, e);
    let intents = extract_types(&verb_selection.result, &verb_embeddings.matrix).map_err(typing_err)?;
    let entities = extract_types(&object_selection.result, &object_embeddings.matrix).map_err(typing_err)?;
    let associativity = associate(&intents, &entities);

    Ok(PipelineRun {
        extracted,
        weighting,
        filtered,
        verb_embeddings,
        object_embeddings,
        verb_selection,
        object_selection,
        ontology: OntologyEstimate {
            intents,
            entities,
            associativity,
            parameters: *parameters,
        },
    })
}

pub fn build_ontology(corpus: &Corpus, parameters: &Parameters) -> Result<OntologyEstimate, PipelineError> {
    run_pipeline(corpus, parameters).map(|run| run.ontology)
}
