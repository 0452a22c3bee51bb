use std::cmp::Ordering;
use std::collections::{BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use super::ExportError;
use crate::typing::{OntologyEstimate, TypeMatrix};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GoldType {
    pub name: String,
    pub members: Vec<String>,
}

/// Reference ontology: intent types over verb lemmas and entity types over
/// object lemmas.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GoldStandard {
    pub intent_types: Vec<GoldType>,
    pub entity_types: Vec<GoldType>,
}

impl GoldStandard {
    pub fn validate(&self) -> Result<(), ExportError> {
        for (side, types) in [
            ("intent_types", &self.intent_types),
            ("entity_types", &self.entity_types),
        ] {
            let mut names = HashSet::new();
            for t in types {
                if !names.insert(t.name.as_str()) {
                    return Err(ExportError::Gold(format!("{side}: duplicate name {:?}", t.name)));
                }
                if t.members.is_empty() {
                    return Err(ExportError::Gold(format!("{side}: type {:?} has no members", t.name)));
                }
            }
        }
        Ok(())
    }
}

pub fn parse_gold(bytes: &[u8]) -> Result<GoldStandard, ExportError> {
    let gold: GoldStandard = serde_json::from_slice(bytes).map_err(|e| ExportError::Gold(e.to_string()))?;
    gold.validate()?;
    Ok(gold)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairScore {
    pub predicted: String,
    pub gold: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SideReport {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub matching: Vec<PairScore>,
    pub unmatched_predicted: Vec<String>,
    pub unmatched_gold: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EvalReport {
    pub intent_f1: f64,
    pub entity_f1: f64,
    pub intents: SideReport,
    pub entities: SideReport,
}

fn f1(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

fn predicted_sets(types: &TypeMatrix) -> Vec<(String, BTreeSet<&str>)> {
    types
        .type_labels
        .iter()
        .map(|label| {
            let set: BTreeSet<&str> = match types.member_terms.get(label) {
                Some(terms) => terms.iter().map(String::as_str).collect(),
                None => BTreeSet::from([label.as_str()]),
            };
            (label.clone(), set)
        })
        .collect()
}

fn score_side(predicted: &[(String, BTreeSet<&str>)], gold: &[GoldType]) -> SideReport {
    let gold: Vec<(&str, BTreeSet<&str>)> = gold
        .iter()
        .map(|g| (g.name.as_str(), g.members.iter().map(String::as_str).collect()))
        .collect();

    let mut pairs = Vec::new();
    for (p, (pname, pset)) in predicted.iter().enumerate() {
        for (g, (gname, gset)) in gold.iter().enumerate() {
            let overlap = pset.intersection(gset).count();
            if overlap == 0 {
                continue;
            }
            let precision = overlap as f64 / pset.len() as f64;
            let recall = overlap as f64 / gset.len() as f64;
            pairs.push((
                p,
                g,
                overlap,
                PairScore {
                    predicted: pname.clone(),
                    gold: gname.to_string(),
                    precision,
                    recall,
                    f1: f1(precision, recall),
                },
            ));
        }
    }
    pairs.sort_by(|a, b| {
        b.3.f1
            .partial_cmp(&a.3.f1)
            .unwrap_or(Ordering::Equal)
            .then_with(|| a.3.predicted.cmp(&b.3.predicted))
            .then_with(|| a.3.gold.cmp(&b.3.gold))
    });

    let mut used_p = vec![false; predicted.len()];
    let mut used_g = vec![false; gold.len()];
    let mut matching = Vec::new();
    let mut overlap_total = 0;
    for (p, g, overlap, score) in pairs {
        if used_p[p] || used_g[g] {
            continue;
        }
        used_p[p] = true;
        used_g[g] = true;
        overlap_total += overlap;
        matching.push(score);
    }

    let predicted_total: usize = predicted.iter().map(|(_, s)| s.len()).sum();
    let gold_total: usize = gold.iter().map(|(_, s)| s.len()).sum();
    let ratio = |n: usize, d: usize| if d == 0 { 0.0 } else { n as f64 / d as f64 };
    let precision = ratio(overlap_total, predicted_total);
    let recall = ratio(overlap_total, gold_total);
    SideReport {
        precision,
        recall,
        f1: f1(precision, recall),
        matching,
        unmatched_predicted: predicted
            .iter()
            .zip(&used_p)
            .filter(|(_, &used)| !used)
            .map(|((name, _), _)| name.clone())
            .collect(),
        unmatched_gold: gold
            .iter()
            .zip(&used_g)
            .filter(|(_, &used)| !used)
            .map(|((name, _), _)| name.to_string())
            .collect(),
    }
}

/// Matches predicted types to gold types greedily by descending pairwise
/// F1 of their member sets (each type used once) and reports
/// micro-averaged precision, recall and F1 per side. A predicted type's
/// member set is its anchor plus its members.
pub fn evaluate_against_gold(ontology: &OntologyEstimate, gold: &GoldStandard) -> EvalReport {
    let intents = score_side(&predicted_sets(&ontology.intents), &gold.intent_types);
    let entities = score_side(&predicted_sets(&ontology.entities), &gold.entity_types);
    EvalReport {
        intent_f1: intents.f1,
        entity_f1: entities.f1,
        intents,
        entities,
    }
}
