//! Command-line driver.
//!
//! Values come from three layers: built-in defaults, a TOML config file
//! (`--config`, or the `WOAH_CONFIG` environment variable) whose keys mirror
//! the flag names with `-` replaced by `_`, and flags. Flags win over the
//! file, the file wins over defaults.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::BufReader;
use std::num::NonZeroUsize;
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use serde::Deserialize;
use thiserror::Error;

use crate::corpus::{parse_conllu_with_default, segment_dialogues, Corpus};
use crate::export_eval::{evaluate_against_gold, export_json, export_turtle, parse_gold};
use crate::extraction::ListKind;
use crate::selection::gini_tsv;
use crate::typing::{run_pipeline, Parameters, PipelineError, PipelineRun};
use crate::weighting::scores_tsv;

pub const CONFIG_ENV: &str = "WOAH_CONFIG";
pub const DEFAULT_OUT: &str = "ontology";
pub const DEFAULT_BASE_IRI: &str = "http://example.org/woah#";

/// Every flag with the default shown in `--help`.
pub const FLAG_DEFAULTS: &[(&str, &str)] = &[
    ("--input", "required"),
    ("--tv", "inf"),
    ("--to", "inf"),
    ("--tc", "inf"),
    ("--lower-bound", "0"),
    ("--log-base", "10"),
    ("--gv", "3"),
    ("--go", "3"),
    ("--cv", "5"),
    ("--co", "5"),
    ("--max-sentences", "none"),
    ("--out", DEFAULT_OUT),
    ("--format", "json"),
    ("--base-iri", DEFAULT_BASE_IRI),
    ("--gold", "none"),
    ("--dump-scores", "none"),
    ("--dump-gini", "none"),
    ("--dump-matrices", "none"),
    ("--dump-tables", "none"),
    ("--config", "none"),
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Json,
    Ttl,
    Both,
}

#[derive(Debug, Default, Parser)]
#[command(
    name = "woah",
    version,
    about = "Estimate intent and entity types from a dependency-parsed dialogue corpus",
    allow_negative_numbers = true
)]
pub struct Cli {
    /// CoNLL-U input files [default: required]
    #[arg(long, num_args = 1.., value_name = "PATH")]
    pub input: Vec<PathBuf>,
    /// Highest verb tf-idf admitted [default: inf]
    #[arg(long, value_name = "FLOAT")]
    pub tv: Option<f64>,
    /// Highest object tf-idf admitted [default: inf]
    #[arg(long = "to", value_name = "FLOAT")]
    pub to: Option<f64>,
    /// Highest complement tf-idf admitted [default: inf]
    #[arg(long, value_name = "FLOAT")]
    pub tc: Option<f64>,
    /// Terms must score strictly above this [default: 0]
    #[arg(long, value_name = "FLOAT")]
    pub lower_bound: Option<f64>,
    /// Logarithm base of the idf [default: 10]
    #[arg(long, value_name = "FLOAT")]
    pub log_base: Option<f64>,
    /// Number of intent types [default: 3]
    #[arg(long, value_name = "INT")]
    pub gv: Option<i64>,
    /// Number of entity types [default: 3]
    #[arg(long = "go", value_name = "INT")]
    pub go: Option<i64>,
    /// Members per intent type [default: 5]
    #[arg(long, value_name = "INT")]
    pub cv: Option<i64>,
    /// Members per entity type [default: 5]
    #[arg(long, value_name = "INT")]
    pub co: Option<i64>,
    /// Split dialogues into chunks of at most this many sentences [default: none]
    #[arg(long, value_name = "INT")]
    pub max_sentences: Option<i64>,
    /// Output path; the extension is set from the format [default: ontology]
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Output format [default: json]
    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,
    /// Namespace IRI for Turtle output [default: http://example.org/woah#]
    #[arg(long, value_name = "IRI")]
    pub base_iri: Option<String>,
    /// Gold-standard JSON; the evaluation report is printed to stdout [default: none]
    #[arg(long, value_name = "PATH")]
    pub gold: Option<PathBuf>,
    /// Write tf-idf scores as TSV [default: none]
    #[arg(long, value_name = "PATH")]
    pub dump_scores: Option<PathBuf>,
    /// Write Gini scores as TSV [default: none]
    #[arg(long, value_name = "PATH")]
    pub dump_gini: Option<PathBuf>,
    /// Write V, O, I and E matrices as TSV files into this directory [default: none]
    #[arg(long, value_name = "DIR")]
    pub dump_matrices: Option<PathBuf>,
    /// Write the extracted occurrence tables as TSV [default: none]
    #[arg(long, value_name = "PATH")]
    pub dump_tables: Option<PathBuf>,
    /// TOML config file; falls back to $WOAH_CONFIG [default: none]
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
}

/// Config-file mirror of [`Cli`].
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub input: Option<Vec<PathBuf>>,
    pub tv: Option<f64>,
    pub to: Option<f64>,
    pub tc: Option<f64>,
    pub lower_bound: Option<f64>,
    pub log_base: Option<f64>,
    pub gv: Option<i64>,
    pub go: Option<i64>,
    pub cv: Option<i64>,
    pub co: Option<i64>,
    pub max_sentences: Option<i64>,
    pub out: Option<PathBuf>,
    pub format: Option<OutputFormat>,
    pub base_iri: Option<String>,
    pub gold: Option<PathBuf>,
    pub dump_scores: Option<PathBuf>,
    pub dump_gini: Option<PathBuf>,
    pub dump_matrices: Option<PathBuf>,
    pub dump_tables: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub inputs: Vec<PathBuf>,
    pub parameters: Parameters,
    pub max_sentences: Option<NonZeroUsize>,
    pub out: PathBuf,
    pub format: OutputFormat,
    pub base_iri: String,
    pub gold: Option<PathBuf>,
    pub dump_scores: Option<PathBuf>,
    pub dump_gini: Option<PathBuf>,
    pub dump_matrices: Option<PathBuf>,
    pub dump_tables: Option<PathBuf>,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("input error: {0}")]
    Input(String),
    #[error("{0}")]
    Pipeline(#[from] PipelineError),
    #[error("output error: {0}")]
    Output(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Input(_) => 2,
            CliError::Pipeline(_) | CliError::Output(_) => 1,
        }
    }
}

pub fn read_config_file(path: &Path) -> Result<FileConfig, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read config file {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| CliError::Config(format!("config file {}: {e}", path.display())))
}

fn count(name: &str, value: i64, min: i64) -> Result<usize, CliError> {
    if value < min {
        return Err(CliError::Config(format!("{name} must be ≥ {min}")));
    }
    Ok(value as usize)
}

/// Merges flags over an optional config file over defaults and checks
/// every parameter range.
pub fn validate_config(cli: &Cli, file: Option<FileConfig>) -> Result<RunConfig, CliError> {
    let file = file.unwrap_or_default();
    let defaults = Parameters::default();
    let pick_f = |flag: Option<f64>, from_file: Option<f64>, default: f64| flag.or(from_file).unwrap_or(default);
    let pick_i =
        |flag: Option<i64>, from_file: Option<i64>, default: usize| flag.or(from_file).unwrap_or(default as i64);

    let inputs = if cli.input.is_empty() {
        file.input.unwrap_or_default()
    } else {
        cli.input.clone()
    };
    if inputs.is_empty() {
        return Err(CliError::Config("at least one --input file is required".into()));
    }

    let parameters = Parameters {
        t_v: pick_f(cli.tv, file.tv, defaults.t_v),
        t_o: pick_f(cli.to, file.to, defaults.t_o),
        t_c: pick_f(cli.tc, file.tc, defaults.t_c),
        lower_bound: pick_f(cli.lower_bound, file.lower_bound, defaults.lower_bound),
        log_base: pick_f(cli.log_base, file.log_base, defaults.log_base),
        g_v: count("g_v", pick_i(cli.gv, file.gv, defaults.g_v), 1)?,
        g_o: count("g_o", pick_i(cli.go, file.go, defaults.g_o), 1)?,
        c_v: count("c_v", pick_i(cli.cv, file.cv, defaults.c_v), 0)?,
        c_o: count("c_o", pick_i(cli.co, file.co, defaults.c_o), 0)?,
    };
    parameters.validate().map_err(CliError::Config)?;

    let max_sentences = match cli.max_sentences.or(file.max_sentences) {
        None => None,
        Some(n) => Some(NonZeroUsize::new(count("max_sentences", n, 1)?).unwrap()),
    };

    Ok(RunConfig {
        inputs,
        parameters,
        max_sentences,
        out: cli
            .out
            .clone()
            .or(file.out)
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT)),
        format: cli.format.or(file.format).unwrap_or(OutputFormat::Json),
        base_iri: cli
            .base_iri
            .clone()
            .or(file.base_iri)
            .unwrap_or_else(|| DEFAULT_BASE_IRI.into()),
        gold: cli.gold.clone().or(file.gold),
        dump_scores: cli.dump_scores.clone().or(file.dump_scores),
        dump_gini: cli.dump_gini.clone().or(file.dump_gini),
        dump_matrices: cli.dump_matrices.clone().or(file.dump_matrices),
        dump_tables: cli.dump_tables.clone().or(file.dump_tables),
    })
}

/// Reads and merges all inputs. Marker-less files get dialogue ids
/// `doc0`, `doc1`, ... by input position.
pub fn load_corpus(inputs: &[PathBuf]) -> Result<Corpus, CliError> {
    let mut corpus = Corpus::default();
    for (i, path) in inputs.iter().enumerate() {
        let file = fs::File::open(path).map_err(|e| CliError::Input(format!("cannot open {}: {e}", path.display())))?;
        let parsed = parse_conllu_with_default(BufReader::new(file), &format!("doc{i}"))
            .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        corpus = corpus
            .merge(parsed)
            .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    }
    Ok(corpus)
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| CliError::Output(format!("{}: {e}", parent.display())))?;
    }
    fs::write(path, bytes).map_err(|e| CliError::Output(format!("{}: {e}", path.display())))
}

/// Human-readable run summary.
pub fn summary(corpus: &Corpus, run: &PipelineRun) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "dialogues: {}  sentences: {}",
        corpus.dialogues.len(),
        corpus.sentence_count()
    );
    for kind in ListKind::ALL {
        let extracted = run.extracted.list(kind).len();
        let distinct = run.extracted.distinct_terms(kind).len();
        let kept = run.filtered.list(kind).len();
        let _ = writeln!(
            out,
            "{kind}: {extracted} occurrences, {distinct} distinct, {kept} kept after tf-idf"
        );
    }
    for (name, e) in [("V", &run.verb_embeddings), ("O", &run.object_embeddings)] {
        let _ = write!(out, "{name}: {} x {}", e.matrix.nrows(), e.matrix.ncols());
        if e.dropped_rows.is_empty() {
            out.push('\n');
        } else {
            let _ = writeln!(out, ", dropped empty rows: {}", e.dropped_rows.join(", "));
        }
    }
    let o = &run.ontology;
    let _ = writeln!(
        out,
        "intent types: {} ({})",
        o.intents.len(),
        o.intents.type_labels.join(", ")
    );
    let _ = writeln!(
        out,
        "entity types: {} ({})",
        o.entities.len(),
        o.entities.type_labels.join(", ")
    );
    out
}

/// Executes a validated configuration. Returns the run summary.
pub fn run(config: &RunConfig) -> Result<String, CliError> {
    let corpus = segment_dialogues(load_corpus(&config.inputs)?, config.max_sentences);
    let run = run_pipeline(&corpus, &config.parameters)?;
    let ontology = &run.ontology;

    if matches!(config.format, OutputFormat::Json | OutputFormat::Both) {
        write_file(&config.out.with_extension("json"), &export_json(ontology))?;
    }
    if matches!(config.format, OutputFormat::Ttl | OutputFormat::Both) {
        let ttl = export_turtle(ontology, &config.base_iri).map_err(|e| CliError::Config(e.to_string()))?;
        write_file(&config.out.with_extension("ttl"), &ttl)?;
    }
    if let Some(path) = &config.dump_scores {
        write_file(path, scores_tsv(&run.weighting).as_bytes())?;
    }
    if let Some(path) = &config.dump_gini {
        let tsv = gini_tsv(&[
            ("verbs", &run.verb_selection.gini),
            ("objects", &run.object_selection.gini),
        ]);
        write_file(path, tsv.as_bytes())?;
    }
    if let Some(path) = &config.dump_tables {
        write_file(path, run.extracted.to_tsv().as_bytes())?;
    }
    if let Some(dir) = &config.dump_matrices {
        for (name, m) in [
            ("V", &run.verb_embeddings.matrix),
            ("O", &run.object_embeddings.matrix),
            ("I", &ontology.intents.matrix),
            ("E", &ontology.entities.matrix),
        ] {
            write_file(&dir.join(format!("{name}.tsv")), m.to_tsv().as_bytes())?;
        }
    }
    if let Some(path) = &config.gold {
        let bytes = fs::read(path).map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
        let gold = parse_gold(&bytes).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        let report = evaluate_against_gold(ontology, &gold);
        println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
    }
    Ok(summary(&corpus, &run))
}

/// Parses arguments, runs, and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let config_path = cli
        .config
        .clone()
        .or_else(|| std::env::var_os(CONFIG_ENV).map(PathBuf::from));
    let result = config_path
        .as_deref()
        .map(read_config_file)
        .transpose()
        .and_then(|file| validate_config(&cli, file))
        .and_then(|config| run(&config));
    match result {
        Ok(summary) => {
            eprint!("{summary}");
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    fn cli(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("woah").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn defaults_without_flags_or_file() {
        let config = validate_config(&cli(&["--input", "a.conllu"]), None).unwrap();
        assert_eq!(config.parameters, Parameters::default());
        assert_eq!(config.parameters.g_v, 3);
        assert_eq!(config.parameters.c_o, 5);
        assert!(config.parameters.t_v.is_infinite());
        assert_eq!(config.format, OutputFormat::Json);
        assert_eq!(config.out, PathBuf::from("ontology"));
        assert_eq!(config.max_sentences, None);
    }

    #[test]
    fn flags_override_file() {
        let file: FileConfig = toml::from_str("gv = 2\ntv = 1\nformat = \"ttl\"\ninput = [\"f.conllu\"]").unwrap();
        let config = validate_config(&cli(&["--gv", "4"]), Some(file)).unwrap();
        assert_eq!(config.parameters.g_v, 4);
        assert_eq!(config.parameters.t_v, 1.0);
        assert_eq!(config.format, OutputFormat::Ttl);
        assert_eq!(config.inputs, [PathBuf::from("f.conllu")]);
    }

    #[test]
    fn out_of_range_values_name_the_parameter() {
        let err = validate_config(&cli(&["--input", "a", "--cv", "-1"]), None).unwrap_err();
        assert_eq!(err.to_string(), "config error: c_v must be ≥ 0");
        assert_eq!(err.exit_code(), 2);
        let err = validate_config(&cli(&["--input", "a", "--go", "0"]), None).unwrap_err();
        assert!(err.to_string().contains("g_o must be ≥ 1"));
        let err = validate_config(&cli(&["--input", "a", "--log-base", "1"]), None).unwrap_err();
        assert!(err.to_string().contains("log_base"));
        let err = validate_config(&cli(&["--input", "a", "--tc", "-0.5"]), None).unwrap_err();
        assert!(err.to_string().contains("t_c"));
        let err = validate_config(&cli(&["--input", "a", "--max-sentences", "0"]), None).unwrap_err();
        assert!(err.to_string().contains("max_sentences"));
        assert!(validate_config(&cli(&[]), None).is_err());
    }

    #[test]
    fn unknown_config_keys_are_rejected() {
        assert!(toml::from_str::<FileConfig>("g_v = 2").is_err());
    }

    #[test]
    fn help_lists_every_flag_with_its_default() {
        let help = Cli::command().render_long_help().to_string();
        for (flag, default) in FLAG_DEFAULTS {
            assert!(help.contains(flag), "{flag} missing from help");
            assert!(
                help.contains(&format!("[default: {default}]")),
                "default of {flag} missing"
            );
        }
        let flags = Cli::command()
            .get_arguments()
            .filter(|a| a.get_long().is_some())
            .count();
        // --help and --version are not parameters.
        assert_eq!(flags, FLAG_DEFAULTS.len());
    }
}
