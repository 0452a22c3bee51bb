//! Serialization of ontology estimates and scoring against a gold standard.

mod gold;
mod json;
mod turtle;

pub use gold::{evaluate_against_gold, parse_gold, EvalReport, GoldStandard, GoldType, PairScore, SideReport};
pub use json::{export_json, parse_json};
pub use turtle::{export_turtle, local_name};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ExportError {
    #[error("invalid base IRI {iri:?}: {reason}")]
    BaseIri { iri: String, reason: String },
    #[error("malformed ontology JSON: {0}")]
    Json(String),
    #[error("malformed gold standard: {0}")]
    Gold(String),
}
