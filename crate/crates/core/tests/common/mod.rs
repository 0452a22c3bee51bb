//! Planted-ontology corpus generator shared by the integration tests.
//!
//! Three intent families, each with three synonymous verbs, act on three
//! entity families of three objects. Objects of a family share a pool of
//! complement nouns. Verbs of a family only take objects of the matching
//! family, so the true grouping is known by construction. About 10% of the
//! sentences are noise: rare verbs acting on rare objects, or a planted verb
//! acting on an object of another family.

#![allow(dead_code)]

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use woah::corpus::{Corpus, Dialogue, Sentence, Token};
use woah::export_eval::{GoldStandard, GoldType};

pub struct Family {
    pub intent: &'static str,
    pub entity: &'static str,
    pub verbs: [&'static str; 3],
    pub objects: [&'static str; 3],
    pub complements: [&'static str; 3],
}

pub const FAMILIES: [Family; 3] = [
    Family {
        intent: "Travel",
        entity: "Trip",
        verbs: ["book", "reserve", "schedule"],
        objects: ["flight", "ticket", "seat"],
        complements: ["airport", "window", "morning"],
    },
    Family {
        intent: "Dining",
        entity: "Dish",
        verbs: ["order", "cook", "serve"],
        objects: ["pizza", "salad", "soup"],
        complements: ["cheese", "tomato", "dinner"],
    },
    Family {
        intent: "Rental",
        entity: "Vehicle",
        verbs: ["rent", "hire", "lease"],
        objects: ["car", "bike", "van"],
        complements: ["weekend", "garage", "driver"],
    },
];

const NOISE_VERBS: [&str; 20] = [
    "ponder", "juggle", "whistle", "paint", "fold", "sing", "polish", "wrap", "carve", "knit", "sketch", "tickle",
    "stack", "sniff", "hum", "scribble", "dust", "shuffle", "frame", "spin",
];
const NOISE_OBJECTS: [&str; 12] = [
    "umbrella", "violin", "kite", "pebble", "lantern", "feather", "blanket", "candle", "marble", "ribbon", "teapot",
    "compass",
];
const NOISE_COMPLEMENTS: [&str; 6] = ["attic", "ocean", "winter", "forest", "library", "meadow"];

pub struct Planted {
    pub corpus: Corpus,
    pub gold: GoldStandard,
    pub sentences: usize,
    pub noise_sentences: usize,
}

fn token(index: usize, form: &str, lemma: &str, upos: &str, head: usize, deprel: &str) -> Token {
    Token {
        index,
        form: form.to_string(),
        lemma: lemma.to_string(),
        upos: upos.to_string(),
        head,
        deprel: deprel.to_string(),
    }
}

fn past(verb: &str) -> String {
    if verb.ends_with('e') {
        format!("{verb}d")
    } else {
        format!("{verb}ed")
    }
}

/// "[I] VERB the OBJECT [for the COMPLEMENT]" with UD heads and relations.
fn sentence(rng: &mut ChaCha8Rng, verb: &str, object: &str, complement: Option<&str>) -> Sentence {
    let mut tokens = Vec::new();
    let with_subject = rng.random_bool(0.5);
    let offset = usize::from(with_subject);
    let verb_at = 1 + offset;
    if with_subject {
        tokens.push(token(1, "I", "I", "PRON", verb_at, "nsubj"));
    }
    let verb_form = match rng.random_range(0..3) {
        0 => past(verb),
        1 if !with_subject => {
            let mut chars = verb.chars();
            let first = chars.next().unwrap().to_uppercase().collect::<String>();
            first + chars.as_str()
        }
        _ => verb.to_string(),
    };
    tokens.push(token(verb_at, &verb_form, verb, "VERB", 0, "root"));
    let object_at = verb_at + 2;
    tokens.push(token(verb_at + 1, "the", "the", "DET", object_at, "det"));
    let object_form = if rng.random_bool(0.3) {
        format!("{object}s")
    } else {
        object.to_string()
    };
    tokens.push(token(object_at, &object_form, object, "NOUN", verb_at, "obj"));
    if let Some(c) = complement {
        let comp_at = object_at + 3;
        tokens.push(token(object_at + 1, "for", "for", "ADP", comp_at, "case"));
        tokens.push(token(object_at + 2, "the", "the", "DET", comp_at, "det"));
        tokens.push(token(comp_at, c, c, "NOUN", object_at, "nmod"));
    }
    tokens.push(token(tokens.len() + 1, ".", ".", "PUNCT", verb_at, "punct"));
    Sentence::new(tokens)
}

/// Sentences per dialogue in the default fixture. Short requests keep the
/// within-dialogue count of a planted verb at one or two, which keeps its
/// tf-idf below that of a verb seen once in the whole corpus.
pub const SENTENCES_PER_DIALOGUE: usize = 2;

/// Builds the planted corpus: `sentences` sentences, 10% noise, grouped
/// into dialogues of [`SENTENCES_PER_DIALOGUE`] sentences.
pub fn planted_corpus(seed: u64, sentences: usize) -> Planted {
    planted_corpus_with(seed, sentences, SENTENCES_PER_DIALOGUE)
}

pub fn planted_corpus_with(seed: u64, sentences: usize, per_dialogue: usize) -> Planted {
    planted_corpus_from(&FAMILIES, seed, sentences, per_dialogue)
}

pub fn planted_corpus_from(families: &[Family], seed: u64, sentences: usize, per_dialogue: usize) -> Planted {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = sentences / 10;
    let mut all = Vec::with_capacity(sentences);
    for i in 0..sentences - noise {
        let family = &families[i % families.len()];
        let verb = *family.verbs.choose(&mut rng).unwrap();
        let object = *family.objects.choose(&mut rng).unwrap();
        let complement = rng
            .random_bool(0.8)
            .then(|| *family.complements.choose(&mut rng).unwrap());
        all.push(sentence(&mut rng, verb, object, complement));
    }
    for i in 0..noise {
        let s = if i % 3 == 2 {
            // A planted verb on an object of another family.
            let from = rng.random_range(0..families.len());
            let to = (from + 1 + rng.random_range(0..families.len() - 1)) % families.len();
            let verb = *families[from].verbs.choose(&mut rng).unwrap();
            let object = *families[to].objects.choose(&mut rng).unwrap();
            sentence(&mut rng, verb, object, None)
        } else {
            let verb = NOISE_VERBS[i % NOISE_VERBS.len()];
            let object = *NOISE_OBJECTS.choose(&mut rng).unwrap();
            let complement = *NOISE_COMPLEMENTS.choose(&mut rng).unwrap();
            sentence(&mut rng, verb, object, Some(complement))
        };
        all.push(s);
    }
    all.shuffle(&mut rng);

    let dialogues = all
        .chunks(per_dialogue)
        .enumerate()
        .map(|(i, chunk)| Dialogue {
            id: format!("dlg{i:03}"),
            sentences: chunk.to_vec(),
        })
        .collect();

    let gold = GoldStandard {
        intent_types: families
            .iter()
            .map(|f| GoldType {
                name: f.intent.into(),
                members: f.verbs.iter().map(|v| v.to_string()).collect(),
            })
            .collect(),
        entity_types: families
            .iter()
            .map(|f| GoldType {
                name: f.entity.into(),
                members: f.objects.iter().map(|o| o.to_string()).collect(),
            })
            .collect(),
    };
    Planted {
        corpus: Corpus::new(dialogues),
        gold,
        sentences,
        noise_sentences: noise,
    }
}

pub fn is_planted_verb(term: &str) -> bool {
    FAMILIES.iter().any(|f| f.verbs.contains(&term))
}

/// Writes the corpus as CoNLL-U text.
pub fn planted_conllu(planted: &Planted) -> String {
    woah::corpus::write_conllu(&planted.corpus)
}

/// Parameters for the recovery experiment: g = 3 and c = 2 on both sides,
/// and a verb threshold equal to the highest planted verb score so that all
/// planted verbs are admitted. Objects and complements are not capped.
pub fn planted_parameters(corpus: &Corpus) -> woah::Parameters {
    use woah::extraction::{extract_tables, lemmatize_tables, ListKind};
    let tables = lemmatize_tables(extract_tables(corpus));
    let scores = woah::weighting::tfidf_scores(ListKind::Verbs, &tables, corpus, 10.0).unwrap();
    let t_v = scores
        .iter()
        .filter(|s| is_planted_verb(&s.term))
        .map(|s| s.aggregate)
        .fold(0.0, f64::max);
    woah::Parameters {
        t_v,
        g_v: 3,
        g_o: 3,
        c_v: 2,
        c_o: 2,
        ..Default::default()
    }
}
