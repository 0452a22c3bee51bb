//! Verb, object and complement extraction from dependency trees.

use std::fmt::Write as _;

use indexmap::IndexMap;

use crate::corpus::{Corpus, Sentence, Token};

/// Which dependency relations and tags define verbs, objects and
/// complements. Relations are compared on their universal part, so
/// `obl:tmod` matches `obl`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RelationProfile {
    pub verb_upos: Vec<String>,
    /// Relations under which a verb heads a clause.
    pub clause_deprels: Vec<String>,
    pub object_deprels: Vec<String>,
    pub object_upos: Vec<String>,
    pub complement_deprels: Vec<String>,
    pub complement_upos: Vec<String>,
}

fn strings(items: &[&str]) -> Vec<String> {
    items.iter().map(|s| s.to_string()).collect()
}

impl Default for RelationProfile {
    fn default() -> Self {
        RelationProfile {
            verb_upos: strings(&["VERB"]),
            clause_deprels: strings(&["root", "ccomp", "xcomp", "advcl", "conj"]),
            object_deprels: strings(&["obj", "dobj", "iobj"]),
            object_upos: strings(&["NOUN", "PROPN"]),
            complement_deprels: strings(&["nmod", "obl", "compound"]),
            complement_upos: strings(&["NOUN"]),
        }
    }
}

fn base_relation(deprel: &str) -> &str {
    deprel.split(':').next().unwrap_or(deprel)
}

fn contains(set: &[String], value: &str) -> bool {
    set.iter().any(|s| s == value)
}

impl RelationProfile {
    fn is_verb(&self, t: &Token) -> bool {
        contains(&self.verb_upos, &t.upos) && contains(&self.clause_deprels, base_relation(&t.deprel))
    }

    fn is_object(&self, t: &Token) -> bool {
        contains(&self.object_upos, &t.upos) && contains(&self.object_deprels, base_relation(&t.deprel))
    }

    fn is_complement(&self, t: &Token) -> bool {
        contains(&self.complement_upos, &t.upos) && contains(&self.complement_deprels, base_relation(&t.deprel))
    }
}

/// One extracted term. `governor` is the verb lemma for objects and the
/// object lemma for complements.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Occurrence {
    pub term: String,
    pub governor: Option<String>,
    pub dialogue: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ListKind {
    Verbs,
    Objects,
    Complements,
}

impl ListKind {
    pub const ALL: [ListKind; 3] = [ListKind::Verbs, ListKind::Objects, ListKind::Complements];

    pub fn name(self) -> &'static str {
        match self {
            ListKind::Verbs => "verbs",
            ListKind::Objects => "objects",
            ListKind::Complements => "complements",
        }
    }
}

impl std::fmt::Display for ListKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Occurrence lists and association tables. Lists keep repetitions until
/// [`crate::weighting::deduplicate`] runs.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ExtractionTables {
    pub verbs: Vec<Occurrence>,
    pub objects: Vec<Occurrence>,
    pub complements: Vec<Occurrence>,
    /// verb → objects it governs.
    pub verb_objects: IndexMap<String, Vec<String>>,
    /// object → complements attached to it.
    pub object_complements: IndexMap<String, Vec<String>>,
}

impl ExtractionTables {
    pub fn list(&self, kind: ListKind) -> &[Occurrence] {
        match kind {
            ListKind::Verbs => &self.verbs,
            ListKind::Objects => &self.objects,
            ListKind::Complements => &self.complements,
        }
    }

    /// Distinct terms of a list in first-occurrence order.
    pub fn distinct_terms(&self, kind: ListKind) -> Vec<String> {
        let mut seen = indexmap::IndexSet::new();
        for occ in self.list(kind) {
            seen.insert(occ.term.as_str());
        }
        seen.into_iter().map(str::to_string).collect()
    }

    /// Tab-separated dump with columns kind, term, governor, dialogue_id.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("kind\tterm\tgovernor\tdialogue_id\n");
        for kind in ListKind::ALL {
            for occ in self.list(kind) {
                let _ = writeln!(
                    out,
                    "{}\t{}\t{}\t{}",
                    kind,
                    occ.term,
                    occ.governor.as_deref().unwrap_or("-"),
                    occ.dialogue
                );
            }
        }
        out
    }
}

fn term_of(token: &Token) -> &str {
    if token.lemma == "_" {
        &token.form
    } else {
        &token.lemma
    }
}

fn extract_sentence(profile: &RelationProfile, sentence: &Sentence, dialogue: &str, tables: &mut ExtractionTables) {
    let verbs: Vec<&Token> = sentence.tokens.iter().filter(|t| profile.is_verb(t)).collect();
    if verbs.is_empty() {
        return;
    }
    let is_selected_verb = |index: usize| verbs.iter().any(|v| v.index == index);
    let objects: Vec<&Token> = sentence
        .tokens
        .iter()
        .filter(|t| profile.is_object(t) && is_selected_verb(t.head))
        .collect();

    for verb in &verbs {
        tables.verbs.push(Occurrence {
            term: term_of(verb).to_string(),
            governor: None,
            dialogue: dialogue.to_string(),
        });
    }
    for object in &objects {
        let verb = sentence.token(object.head).map(term_of).unwrap_or_default().to_string();
        let object_term = term_of(object).to_string();
        tables.objects.push(Occurrence {
            term: object_term.clone(),
            governor: Some(verb.clone()),
            dialogue: dialogue.to_string(),
        });
        tables.verb_objects.entry(verb).or_default().push(object_term);
    }

    for complement in sentence.tokens.iter().filter(|t| profile.is_complement(t)) {
        // A complement of an object attaches to that object; a complement of
        // a verb attaches to every object of that verb.
        let targets: Vec<&Token> = if objects.iter().any(|o| o.index == complement.head) {
            objects.iter().copied().filter(|o| o.index == complement.head).collect()
        } else if is_selected_verb(complement.head) {
            objects.iter().copied().filter(|o| o.head == complement.head).collect()
        } else {
            Vec::new()
        };
        for object in targets {
            let object_term = term_of(object).to_string();
            let complement_term = term_of(complement).to_string();
            tables.complements.push(Occurrence {
                term: complement_term.clone(),
                governor: Some(object_term.clone()),
                dialogue: dialogue.to_string(),
            });
            tables
                .object_complements
                .entry(object_term)
                .or_default()
                .push(complement_term);
        }
    }
}

/// Builds occurrence lists and association tables with the default
/// relation profile.
pub fn extract_tables(corpus: &Corpus) -> ExtractionTables {
    extract_tables_with(corpus, &RelationProfile::default())
}

pub fn extract_tables_with(corpus: &Corpus, profile: &RelationProfile) -> ExtractionTables {
    let mut tables = ExtractionTables::default();
    for dialogue in &corpus.dialogues {
        for sentence in &dialogue.sentences {
            extract_sentence(profile, sentence, &dialogue.id, &mut tables);
        }
    }
    tables
}

/// Lowercases every term and merges entries that collide afterwards.
pub fn lemmatize_tables(tables: ExtractionTables) -> ExtractionTables {
    lemmatize_tables_with(tables, |term| term.to_string())
}

/// Maps every term through `lemma_of`, lowercases the result and merges
/// colliding keys by concatenating their lists in first-key order.
pub fn lemmatize_tables_with<F>(tables: ExtractionTables, lemma_of: F) -> ExtractionTables
where
    F: Fn(&str) -> String,
{
    let norm = |term: &str| lemma_of(term).to_lowercase();
    let map_list = |list: Vec<Occurrence>| -> Vec<Occurrence> {
        list.into_iter()
            .map(|o| Occurrence {
                term: norm(&o.term),
                governor: o.governor.as_deref().map(norm),
                dialogue: o.dialogue,
            })
            .collect()
    };
    let map_table = |table: IndexMap<String, Vec<String>>| -> IndexMap<String, Vec<String>> {
        let mut merged: IndexMap<String, Vec<String>> = IndexMap::new();
        for (key, values) in table {
            merged
                .entry(norm(&key))
                .or_default()
                .extend(values.iter().map(|v| norm(v)));
        }
        merged
    };
    ExtractionTables {
        verbs: map_list(tables.verbs),
        objects: map_list(tables.objects),
        complements: map_list(tables.complements),
        verb_objects: map_table(tables.verb_objects),
        object_complements: map_table(tables.object_complements),
    }
}
