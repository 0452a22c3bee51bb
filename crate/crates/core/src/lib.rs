//! Zero-shot estimation of intent and entity types from dialogue corpora.
//!
//! The pipeline reads dependency-parsed dialogues, extracts verbs, their
//! objects and the nouns complementing those objects, filters the terms
//! with tf-idf, embeds verbs over objects and objects over complements,
//! picks representative embeddings by Gini sparsity and cosine
//! dissimilarity, and merges each representative with its nearest
//! neighbours into an intent or entity type.

pub mod cli;
pub mod corpus;
pub mod embedding;
pub mod export_eval;
pub mod extraction;
pub mod format;
pub mod selection;
pub mod typing;
pub mod weighting;

pub use corpus::{normalize_text, parse_conllu, segment_dialogues, Corpus, Dialogue, Sentence, Token};
pub use embedding::{dict2vec, EmbeddingMatrix};
pub use export_eval::{evaluate_against_gold, export_json, export_turtle, EvalReport, GoldStandard};
pub use extraction::{extract_tables, lemmatize_tables, ExtractionTables, ListKind};
pub use selection::{cosine_similarity, filter_representatives, gini_index, median_anchor, select_members};
pub use typing::{build_ontology, run_pipeline, OntologyEstimate, Parameters, PipelineError, Stage, TypeMatrix};
pub use weighting::{filter_terms, tfidf_scores, Thresholds};
