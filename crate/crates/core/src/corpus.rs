//! Dialogue corpora: text normalization, CoNLL-U ingestion and segmentation.
//!
//! The pipeline consumes dependency-parsed text. Tokenization, tagging,
//! parsing and coreference resolution all happen upstream; this module only
//! reads their CoNLL-U output and groups sentences into dialogues, which are
//! the document unit for verb weighting.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::io::BufRead;
use std::num::NonZeroUsize;
use std::sync::OnceLock;

use regex::Regex;
use thiserror::Error;

/// Dialogue id used when a file carries no dialogue markers.
pub const DEFAULT_DIALOGUE_ID: &str = "doc0";

const EMOTICON_LIST: &str = include_str!("../resources/emoticons.txt");

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CorpusError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: sentence {sentence}: {message}")]
    Structure {
        line: usize,
        sentence: String,
        message: String,
    },
    #[error("duplicate dialogue id {0:?}")]
    DuplicateDialogue(String),
    #[error("I/O error: {0}")]
    Io(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    /// 1-based position in the sentence.
    pub index: usize,
    pub form: String,
    pub lemma: String,
    pub upos: String,
    /// Index of the governing token, 0 for the root.
    pub head: usize,
    pub deprel: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Sentence {
    pub tokens: Vec<Token>,
}

impl Sentence {
    pub fn new(tokens: Vec<Token>) -> Self {
        Sentence { tokens }
    }

    /// Token at a 1-based index.
    pub fn token(&self, index: usize) -> Option<&Token> {
        index.checked_sub(1).and_then(|i| self.tokens.get(i))
    }

    pub fn root(&self) -> Option<&Token> {
        self.tokens.iter().find(|t| t.head == 0)
    }

    /// Checks the tree invariants: contiguous 1-based indices, non-empty
    /// form and lemma, heads inside the sentence, no self loops and exactly
    /// one root.
    pub fn validate(&self) -> Result<(), String> {
        self.check().map_err(|(_, message)| message)
    }

    // On failure also returns the position of the offending token, or 0 for
    // problems of the sentence as a whole.
    fn check(&self) -> Result<(), (usize, String)> {
        if self.tokens.is_empty() {
            return Err((0, "sentence has no tokens".into()));
        }
        let n = self.tokens.len();
        for (position, token) in self.tokens.iter().enumerate() {
            let fail = |message: String| Err((position, message));
            if token.index != position + 1 {
                return fail(format!(
                    "token ids are not contiguous: expected {}, found {}",
                    position + 1,
                    token.index
                ));
            }
            if token.form.is_empty() || token.lemma.is_empty() {
                return fail(format!("token {} has an empty form or lemma", token.index));
            }
            if token.head == token.index {
                return fail(format!("token {} is its own head", token.index));
            }
            if token.head > n {
                return fail(format!(
                    "token {} has head {} outside the sentence",
                    token.index, token.head
                ));
            }
        }
        match self.tokens.iter().filter(|t| t.head == 0).count() {
            1 => Ok(()),
            0 => Err((0, "sentence has no root".into())),
            k => {
                let second = self
                    .tokens
                    .iter()
                    .enumerate()
                    .filter(|(_, t)| t.head == 0)
                    .nth(1)
                    .unwrap()
                    .0;
                Err((second, format!("sentence has {k} roots")))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dialogue {
    pub id: String,
    pub sentences: Vec<Sentence>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Corpus {
    pub dialogues: Vec<Dialogue>,
}

impl Corpus {
    pub fn new(dialogues: Vec<Dialogue>) -> Self {
        Corpus { dialogues }
    }

    pub fn is_empty(&self) -> bool {
        self.dialogues.is_empty()
    }

    pub fn sentence_count(&self) -> usize {
        self.dialogues.iter().map(|d| d.sentences.len()).sum()
    }

    /// Appends the dialogues of `other`, rejecting repeated dialogue ids.
    pub fn merge(mut self, other: Corpus) -> Result<Corpus, CorpusError> {
        let mut seen: HashSet<String> = self.dialogues.iter().map(|d| d.id.clone()).collect();
        for dialogue in other.dialogues {
            if !seen.insert(dialogue.id.clone()) {
                return Err(CorpusError::DuplicateDialogue(dialogue.id));
            }
            self.dialogues.push(dialogue);
        }
        Ok(self)
    }
}

fn url_pattern() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?i)\b(?:https?://|ftp://|www\.)\S+").unwrap())
}

fn email_pattern() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"[A-Za-z0-9._%+-]+@[A-Za-z0-9-]+(?:\.[A-Za-z0-9-]+)*\.[A-Za-z]{2,}").unwrap())
}

/// The emoticon sequences removed by [`normalize_text`], longest first.
pub fn emoticons() -> &'static [String] {
    static LIST: OnceLock<Vec<String>> = OnceLock::new();
    LIST.get_or_init(|| {
        let mut list: Vec<String> = EMOTICON_LIST
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(str::to_string)
            .collect();
        list.sort_by(|a, b| b.chars().count().cmp(&a.chars().count()).then(a.cmp(b)));
        list
    })
}

fn remove_emoticons(text: &str) -> String {
    let chars: Vec<char> = text.chars().collect();
    let list: Vec<Vec<char>> = emoticons().iter().map(|e| e.chars().collect()).collect();
    let mut out = String::with_capacity(text.len());
    let mut i = 0;
    while i < chars.len() {
        let free_left = i == 0 || !chars[i - 1].is_alphanumeric();
        let matched = free_left
            .then(|| {
                list.iter().find(|e| {
                    let end = i + e.len();
                    end <= chars.len()
                        && chars[i..end] == e[..]
                        && (end == chars.len() || !chars[end].is_alphanumeric())
                })
            })
            .flatten();
        match matched {
            Some(e) => i += e.len(),
            None => {
                out.push(chars[i]);
                i += 1;
            }
        }
    }
    out
}

fn collapse_punctuation(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut last: Option<char> = None;
    for ch in text.chars() {
        if ch.is_ascii_punctuation() && last == Some(ch) {
            continue;
        }
        out.push(ch);
        last = Some(ch);
    }
    out
}

fn collapse_whitespace(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn normalize_once(text: &str) -> String {
    let text: String = text.chars().filter(|c| !c.is_control() || c.is_whitespace()).collect();
    let text = url_pattern().replace_all(&text, "<URL>");
    let text = email_pattern().replace_all(&text, "<EMAIL>");
    let text = remove_emoticons(&text);
    let text = collapse_punctuation(&text);
    collapse_whitespace(&text)
}

/// Cleans one raw utterance.
///
/// URLs become `<URL>`, e-mail addresses `<EMAIL>`, emoticons from the
/// bundled list are removed, runs of a repeated ASCII punctuation character
/// shrink to one, control characters are dropped and whitespace is
/// collapsed. The rules are applied until the text stops changing, so the
/// function is idempotent.
pub fn normalize_text(raw: &str) -> String {
    let mut current = normalize_once(raw);
    // Each pass either shortens the text or leaves it unchanged once the
    // placeholders are in place; the bound only guards pathological input.
    for _ in 0..64 {
        let next = normalize_once(&current);
        if next == current {
            break;
        }
        current = next;
    }
    current
}

fn parse_index(field: &str, line: usize, column: &str) -> Result<usize, CorpusError> {
    field.parse::<usize>().map_err(|_| CorpusError::Parse {
        line,
        message: format!("{column} {field:?} is not a non-negative integer"),
    })
}

/// Extracts a dialogue id from a comment body (text after `#`).
/// Returns `Some(None)` for a bare `# newdoc` marker.
fn dialogue_marker(comment: &str) -> Option<Option<String>> {
    let comment = comment.trim();
    let value = |rest: &str| -> Option<Option<String>> {
        let rest = rest.trim_start();
        if rest.is_empty() {
            return Some(None);
        }
        let rest = rest.strip_prefix('=')?.trim();
        Some((!rest.is_empty()).then(|| rest.to_string()))
    };
    if let Some(rest) = comment.strip_prefix("newdoc") {
        let rest = rest.trim_start();
        if rest.is_empty() {
            return Some(None);
        }
        return value(rest.strip_prefix("id")?);
    }
    if let Some(rest) = comment.strip_prefix("dialogue_id") {
        return value(rest)?.map(Some);
    }
    None
}

struct Builder {
    default_id: String,
    dialogues: Vec<Dialogue>,
    current: Option<Dialogue>,
    anonymous: usize,
    sentence: Vec<Token>,
    sentence_id: Option<String>,
    token_lines: Vec<usize>,
    sentence_ordinal: usize,
    seen_ids: HashSet<String>,
}

impl Builder {
    fn open(&mut self, id: Option<String>) -> Result<(), CorpusError> {
        self.close_dialogue();
        let id = match id {
            Some(id) => id,
            None => {
                let id = format!("{}-{}", self.default_id, self.anonymous);
                self.anonymous += 1;
                id
            }
        };
        if !self.seen_ids.insert(id.clone()) {
            return Err(CorpusError::DuplicateDialogue(id));
        }
        self.current = Some(Dialogue {
            id,
            sentences: Vec::new(),
        });
        Ok(())
    }

    fn close_dialogue(&mut self) {
        if let Some(dialogue) = self.current.take() {
            if !dialogue.sentences.is_empty() {
                self.dialogues.push(dialogue);
            }
        }
    }

    fn finish_sentence(&mut self) -> Result<(), CorpusError> {
        if self.sentence.is_empty() {
            self.sentence_id = None;
            return Ok(());
        }
        self.sentence_ordinal += 1;
        let sentence = Sentence::new(std::mem::take(&mut self.sentence));
        let lines = std::mem::take(&mut self.token_lines);
        let label = self
            .sentence_id
            .take()
            .unwrap_or_else(|| format!("#{}", self.sentence_ordinal));
        sentence.check().map_err(|(position, message)| CorpusError::Structure {
            line: lines[position],
            sentence: label,
            message,
        })?;
        if self.current.is_none() {
            let id = self.default_id.clone();
            if !self.seen_ids.insert(id.clone()) {
                return Err(CorpusError::DuplicateDialogue(id));
            }
            self.current = Some(Dialogue {
                id,
                sentences: Vec::new(),
            });
        }
        self.current.as_mut().unwrap().sentences.push(sentence);
        Ok(())
    }
}

/// Reads CoNLL-U into a corpus.
///
/// `# newdoc id = X` and `# dialogue_id = X` comments open a new dialogue.
/// Sentences before any marker belong to a dialogue named
/// [`DEFAULT_DIALOGUE_ID`]. Multiword-token ranges (`3-4`) and empty nodes
/// (`5.1`) are skipped.
pub fn parse_conllu<R: BufRead>(input: R) -> Result<Corpus, CorpusError> {
    parse_conllu_with_default(input, DEFAULT_DIALOGUE_ID)
}

/// Like [`parse_conllu`] but names the marker-less dialogue `default_id`.
pub fn parse_conllu_with_default<R: BufRead>(input: R, default_id: &str) -> Result<Corpus, CorpusError> {
    let mut b = Builder {
        default_id: default_id.to_string(),
        dialogues: Vec::new(),
        current: None,
        anonymous: 0,
        sentence: Vec::new(),
        sentence_id: None,
        token_lines: Vec::new(),
        sentence_ordinal: 0,
        seen_ids: HashSet::new(),
    };

    for (offset, line) in input.lines().enumerate() {
        let line_no = offset + 1;
        let line = line.map_err(|e| CorpusError::Io(e.to_string()))?;
        let line = line.strip_suffix('\r').unwrap_or(&line);

        if line.trim().is_empty() {
            b.finish_sentence()?;
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if let Some(id) = dialogue_marker(comment) {
                b.finish_sentence()?;
                b.open(id)?;
            } else if let Some(rest) = comment.trim().strip_prefix("sent_id") {
                if let Some(id) = rest.trim_start().strip_prefix('=') {
                    b.sentence_id = Some(id.trim().to_string());
                }
            }
            continue;
        }

        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 10 {
            return Err(CorpusError::Parse {
                line: line_no,
                message: format!("expected 10 tab-separated columns, found {}", fields.len()),
            });
        }
        let id = fields[0];
        if id.contains('-') || id.contains('.') {
            // Multiword token range or empty node.
            continue;
        }
        let index = parse_index(id, line_no, "ID")?;
        if index == 0 {
            return Err(CorpusError::Parse {
                line: line_no,
                message: "ID must be at least 1".into(),
            });
        }
        let head = parse_index(fields[6], line_no, "HEAD")?;
        b.token_lines.push(line_no);
        b.sentence.push(Token {
            index,
            form: fields[1].to_string(),
            lemma: fields[2].to_string(),
            upos: fields[3].to_string(),
            head,
            deprel: fields[7].to_string(),
        });
    }
    b.finish_sentence()?;
    b.close_dialogue();
    Ok(Corpus::new(b.dialogues))
}

/// Writes the six mapped columns (ID, FORM, LEMMA, UPOS, HEAD, DEPREL) of
/// every token, tab separated, with a blank line after each sentence.
pub fn write_mapped_columns(corpus: &Corpus) -> String {
    let mut out = String::new();
    for sentence in corpus.dialogues.iter().flat_map(|d| &d.sentences) {
        for t in &sentence.tokens {
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{}",
                t.index, t.form, t.lemma, t.upos, t.head, t.deprel
            );
        }
        out.push('\n');
    }
    out
}

/// Serializes a corpus as CoNLL-U with `# newdoc id` markers. Columns the
/// reader ignores are written as `_`.
pub fn write_conllu(corpus: &Corpus) -> String {
    let mut out = String::new();
    for dialogue in &corpus.dialogues {
        let _ = writeln!(out, "# newdoc id = {}", dialogue.id);
        for sentence in &dialogue.sentences {
            for t in &sentence.tokens {
                let _ = writeln!(
                    out,
                    "{}\t{}\t{}\t{}\t_\t_\t{}\t{}\t_\t_",
                    t.index, t.form, t.lemma, t.upos, t.head, t.deprel
                );
            }
            out.push('\n');
        }
    }
    out
}

/// Splits every dialogue into consecutive chunks of at most `max_sentences`
/// sentences, suffixing ids with `-0`, `-1`, ... Without a limit the corpus
/// is returned unchanged, as is any dialogue that already fits.
pub fn segment_dialogues(corpus: Corpus, max_sentences: Option<NonZeroUsize>) -> Corpus {
    let Some(limit) = max_sentences else {
        return corpus;
    };
    let limit = limit.get();
    let mut dialogues = Vec::with_capacity(corpus.dialogues.len());
    for dialogue in corpus.dialogues {
        if dialogue.sentences.len() <= limit {
            dialogues.push(dialogue);
            continue;
        }
        let id = dialogue.id;
        let mut sentences = dialogue.sentences.into_iter().peekable();
        let mut chunk_no = 0;
        while sentences.peek().is_some() {
            let chunk: Vec<Sentence> = sentences.by_ref().take(limit).collect();
            dialogues.push(Dialogue {
                id: format!("{id}-{chunk_no}"),
                sentences: chunk,
            });
            chunk_no += 1;
        }
    }
    Corpus::new(dialogues)
}
