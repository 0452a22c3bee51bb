use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use super::ExportError;
use crate::embedding::EmbeddingMatrix;
use crate::format::round12;
use crate::typing::{OntologyEstimate, Parameters, TypeMatrix};

// Field order here is the key order of the output.
#[derive(Serialize, Deserialize)]
struct OntologyDoc {
    parameters: ParametersDoc,
    intents: Vec<TypeDoc>,
    entities: Vec<TypeDoc>,
    associativity: Vec<Vec<f64>>,
    dimensions: DimensionsDoc,
}

/// Infinite thresholds (no upper cut) are written as `null`.
#[derive(Serialize, Deserialize)]
struct ParametersDoc {
    t_v: Option<f64>,
    t_o: Option<f64>,
    t_c: Option<f64>,
    g_v: usize,
    g_o: usize,
    c_v: usize,
    c_o: usize,
    log_base: f64,
    lower_bound: f64,
}

#[derive(Serialize, Deserialize)]
struct TypeDoc {
    name: String,
    members: Vec<String>,
    vector: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct DimensionsDoc {
    intents: Vec<String>,
    entities: Vec<String>,
}

fn threshold_out(t: f64) -> Option<f64> {
    t.is_finite().then_some(round12(t))
}

fn threshold_in(t: Option<f64>) -> f64 {
    t.unwrap_or(f64::INFINITY)
}

fn types_out(types: &TypeMatrix) -> Vec<TypeDoc> {
    types
        .type_labels
        .iter()
        .enumerate()
        .map(|(i, name)| TypeDoc {
            name: name.clone(),
            members: types.member_terms.get(name).cloned().unwrap_or_default(),
            vector: types.matrix.row(i).iter().map(|v| round12(*v)).collect(),
        })
        .collect()
}

fn types_in(docs: Vec<TypeDoc>, dimensions: Vec<String>) -> Result<TypeMatrix, ExportError> {
    let mut labels = Vec::with_capacity(docs.len());
    let mut member_terms = IndexMap::new();
    let mut rows = Vec::with_capacity(docs.len());
    for doc in docs {
        if doc.vector.len() != dimensions.len() {
            return Err(ExportError::Json(format!(
                "type {:?} has {} values for {} dimensions",
                doc.name,
                doc.vector.len(),
                dimensions.len()
            )));
        }
        labels.push(doc.name.clone());
        member_terms.insert(doc.name, doc.members);
        rows.push(doc.vector);
    }
    let matrix = EmbeddingMatrix::try_from_rows(labels.clone(), dimensions, rows)
        .map_err(|e| ExportError::Json(e.to_string()))?;
    Ok(TypeMatrix {
        type_labels: labels,
        member_terms,
        matrix,
    })
}

/// Compact JSON with a trailing newline. Keys appear in the order
/// `parameters`, `intents`, `entities`, `associativity`, `dimensions`;
/// reals are rounded to 12 significant digits.
pub fn export_json(ontology: &OntologyEstimate) -> Vec<u8> {
    let p = &ontology.parameters;
    let doc = OntologyDoc {
        parameters: ParametersDoc {
            t_v: threshold_out(p.t_v),
            t_o: threshold_out(p.t_o),
            t_c: threshold_out(p.t_c),
            g_v: p.g_v,
            g_o: p.g_o,
            c_v: p.c_v,
            c_o: p.c_o,
            log_base: round12(p.log_base),
            lower_bound: round12(p.lower_bound),
        },
        intents: types_out(&ontology.intents),
        entities: types_out(&ontology.entities),
        associativity: ontology
            .associativity
            .iter()
            .map(|row| row.iter().map(|v| round12(*v)).collect())
            .collect(),
        dimensions: DimensionsDoc {
            intents: ontology.intents.matrix.col_labels().to_vec(),
            entities: ontology.entities.matrix.col_labels().to_vec(),
        },
    };
    let mut out = serde_json::to_vec(&doc).expect("ontology serializes");
    out.push(b'\n');
    out
}

pub fn parse_json(bytes: &[u8]) -> Result<OntologyEstimate, ExportError> {
    let doc: OntologyDoc = serde_json::from_slice(bytes).map_err(|e| ExportError::Json(e.to_string()))?;
    let p = doc.parameters;
    let intents = types_in(doc.intents, doc.dimensions.intents)?;
    let entities = types_in(doc.entities, doc.dimensions.entities)?;
    if doc.associativity.len() != intents.len() || doc.associativity.iter().any(|row| row.len() != entities.len()) {
        return Err(ExportError::Json("associativity shape does not match the types".into()));
    }
    Ok(OntologyEstimate {
        intents,
        entities,
        associativity: doc.associativity,
        parameters: Parameters {
            t_v: threshold_in(p.t_v),
            t_o: threshold_in(p.t_o),
            t_c: threshold_in(p.t_c),
            g_v: p.g_v,
            g_o: p.g_o,
            c_v: p.c_v,
            c_o: p.c_o,
            log_base: p.log_base,
            lower_bound: p.lower_bound,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn s(items: &[&str]) -> Vec<String> {
        items.iter().map(|x| x.to_string()).collect()
    }

    fn one_by_one() -> OntologyEstimate {
        let intents = TypeMatrix {
            type_labels: s(&["book"]),
            member_terms: IndexMap::from([("book".to_string(), s(&["book", "reserve"]))]),
            matrix: EmbeddingMatrix::from_rows(s(&["book"]), s(&["flight"]), vec![vec![1.0]]),
        };
        let entities = TypeMatrix {
            type_labels: s(&["flight"]),
            member_terms: IndexMap::from([("flight".to_string(), s(&["flight"]))]),
            matrix: EmbeddingMatrix::from_rows(s(&["flight"]), s(&["morning"]), vec![vec![1.0]]),
        };
        OntologyEstimate {
            intents,
            entities,
            associativity: vec![vec![1.0]],
            parameters: Parameters::default(),
        }
    }

    #[test]
    fn empty_types() {
        let o = OntologyEstimate {
            intents: TypeMatrix::empty(Vec::new()),
            entities: TypeMatrix::empty(Vec::new()),
            associativity: Vec::new(),
            parameters: Parameters::default(),
        };
        let text = String::from_utf8(export_json(&o)).unwrap();
        assert_eq!(
            text,
            "{\"parameters\":{\"t_v\":null,\"t_o\":null,\"t_c\":null,\"g_v\":3,\"g_o\":3,\"c_v\":5,\"c_o\":5,\
             \"log_base\":10.0,\"lower_bound\":0.0},\"intents\":[],\"entities\":[],\"associativity\":[],\
             \"dimensions\":{\"intents\":[],\"entities\":[]}}\n"
        );
    }

    #[test]
    fn smallest_ontology() {
        let text = String::from_utf8(export_json(&one_by_one())).unwrap();
        assert!(text.contains("\"associativity\":[[1.0]]"));
        assert!(text.contains("{\"name\":\"book\",\"members\":[\"book\",\"reserve\"],\"vector\":[1.0]}"));
        assert!(text.ends_with("}\n"));
        assert_eq!(export_json(&one_by_one()), export_json(&one_by_one()));
    }

    #[test]
    fn parse_rejects_bad_shapes() {
        let text = String::from_utf8(export_json(&one_by_one())).unwrap();
        let broken = text.replace("\"associativity\":[[1.0]]", "\"associativity\":[[1.0,0.0]]");
        assert!(parse_json(broken.as_bytes()).is_err());
        assert!(parse_json(b"{}").is_err());
    }

    proptest! {
        #[test]
        fn round_trip_at_twelve_digits(
            values in proptest::collection::vec(1e-9f64..1.0, 6),
            t_v in proptest::option::of(0.0f64..100.0),
            g in 1usize..9,
        ) {
            let mut o = one_by_one();
            o.intents.matrix = EmbeddingMatrix::from_rows(s(&["book"]), s(&["a", "b", "c"]), vec![values[..3].to_vec()]);
            o.entities.matrix = EmbeddingMatrix::from_rows(s(&["flight"]), s(&["x", "y"]), vec![values[3..5].to_vec()]);
            o.associativity = vec![vec![values[5]]];
            o.parameters.t_v = t_v.unwrap_or(f64::INFINITY);
            o.parameters.g_o = g;
            let parsed = parse_json(&export_json(&o)).unwrap();
            prop_assert_eq!(&parsed.intents.type_labels, &o.intents.type_labels);
            prop_assert_eq!(&parsed.entities.member_terms, &o.entities.member_terms);
            prop_assert_eq!(parsed.intents.matrix.col_labels(), o.intents.matrix.col_labels());
            for (a, b) in parsed.intents.matrix.row(0).iter().zip(o.intents.matrix.row(0)) {
                prop_assert_eq!(*a, round12(*b));
            }
            prop_assert_eq!(parsed.associativity[0][0], round12(values[5]));
            prop_assert_eq!(parsed.parameters.t_v, t_v.map(round12).unwrap_or(f64::INFINITY));
            prop_assert_eq!(parsed.parameters.g_o, g);
            // A second pass is exact.
            prop_assert_eq!(export_json(&parsed), export_json(&o));
        }
    }
}
