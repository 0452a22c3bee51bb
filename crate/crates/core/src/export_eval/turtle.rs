use std::fmt::Write as _;

use super::ExportError;
use crate::format::round12;
use crate::typing::{OntologyEstimate, TypeMatrix};

/// Escapes a term for use as a Turtle local name: ASCII letters, digits and
/// `_` pass through, every other byte of the UTF-8 encoding becomes `%XX`.
pub fn local_name(term: &str) -> String {
    let mut out = String::with_capacity(term.len());
    for &byte in term.as_bytes() {
        if byte.is_ascii_alphanumeric() || byte == b'_' {
            out.push(byte as char);
        } else {
            let _ = write!(out, "%{byte:02X}");
        }
    }
    out
}

fn class_name(label: &str, suffix: &str) -> String {
    let mut chars = label.chars();
    let capitalized: String = match chars.next() {
        Some(first) => first.to_uppercase().chain(chars).collect(),
        None => String::new(),
    };
    format!("{}{suffix}", local_name(&capitalized))
}

fn check_base_iri(base: &str) -> Result<(), ExportError> {
    let fail = |reason: &str| ExportError::BaseIri {
        iri: base.to_string(),
        reason: reason.to_string(),
    };
    if base
        .chars()
        .any(|c| c.is_whitespace() || matches!(c, '<' | '>' | '"' | '{' | '}' | '|' | '^' | '`' | '\\'))
    {
        return Err(fail("contains characters not allowed in an IRI"));
    }
    let parsed = url::Url::parse(base).map_err(|e| fail(&e.to_string()))?;
    if parsed.cannot_be_a_base() && !base.ends_with('#') {
        return Err(fail("not a hierarchical IRI"));
    }
    if !(base.ends_with('/') || base.ends_with('#')) {
        return Err(fail("a namespace prefix must end with '/' or '#'"));
    }
    Ok(())
}

fn write_types(out: &mut String, types: &TypeMatrix, suffix: &str, kind: &str) {
    for label in &types.type_labels {
        let class = class_name(label, suffix);
        let _ = writeln!(out, "\n:{class} a :{kind} .");
        for term in types.member_terms.get(label).into_iter().flatten() {
            let _ = writeln!(out, ":{} :memberOf :{class} .", local_name(term));
        }
    }
}

/// Turtle rendering of an estimate in a small custom vocabulary: types are
/// `:IntentType` / `:EntityType` instances, member terms point at their type
/// through `:memberOf`, and each positive associativity weight becomes a
/// reified `:associatedWith` statement carrying a `:weight` literal.
pub fn export_turtle(ontology: &OntologyEstimate, base_iri: &str) -> Result<Vec<u8>, ExportError> {
    check_base_iri(base_iri)?;
    let mut out = String::new();
    let _ = writeln!(out, "@prefix : <{base_iri}> .");
    out.push_str("@prefix rdf: <http://www.w3.org/1999/02/22-rdf-syntax-ns#> .\n");
    out.push_str("@prefix xsd: <http://www.w3.org/2001/XMLSchema#> .\n");

    write_types(&mut out, &ontology.intents, "Intent", "IntentType");
    write_types(&mut out, &ontology.entities, "Entity", "EntityType");

    for (i, row) in ontology.associativity.iter().enumerate() {
        let intent = class_name(&ontology.intents.type_labels[i], "Intent");
        for (e, &weight) in row.iter().enumerate() {
            if weight <= 0.0 {
                continue;
            }
            let entity = class_name(&ontology.entities.type_labels[e], "Entity");
            let _ = write!(
                out,
                "\n:assoc_{intent}_{entity} a rdf:Statement ;\n    rdf:subject :{intent} ;\n    \
                 rdf:predicate :associatedWith ;\n    rdf:object :{entity} ;\n    \
                 :weight \"{}\"^^xsd:decimal .\n",
                round12(weight)
            );
        }
    }
    Ok(out.into_bytes())
}
