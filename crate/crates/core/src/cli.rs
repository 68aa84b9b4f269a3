//! The `tcpred` command line.

use std::collections::{BTreeMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::augment::{
    augment_dataset, AugKind, AugMethod, AugStrategy, AugmentError, Backtranslator,
    CachedBacktranslator, MockMode, ProcessAugmenter, RenameBacktranslator, Sampling,
};
use crate::class::{ClassSet, ComplexityClass};
use crate::classifier::{
    serve_classifier, BuiltinModel, Classifier, ClassifierError, Hyperparams, ServeMode,
};
use crate::corpus::generate_split;
use crate::dataset::{CodeSnippet, DataError, Dataset, Entry, LabeledExample, Language};
use crate::metrics::{compute_metrics, Metrics};
use crate::ssl::experiment::ExperimentError;
use crate::ssl::{run_experiment, ExperimentConfig, RunReport, SslError};
use crate::symbolic::analyze;

pub const EXIT_OK: i32 = 0;
/// Missing or unreadable input, unwritable output, refused overwrite.
pub const EXIT_IO: i32 = 2;
/// Malformed dataset or gold file.
pub const EXIT_DATA: i32 = 3;
/// Back-translation requested with no augmenter available.
pub const EXIT_AUGMENTER: i32 = 4;
/// Invalid configuration or invocation.
pub const EXIT_CONFIG: i32 = 5;
/// Failure while running (backend crash, protocol violation, ...).
pub const EXIT_RUNTIME: i32 = 6;

/// Label used for symbolic-only scoring when the analyzer cannot parse a
/// snippet.
pub const UNAVAILABLE_FALLBACK: ComplexityClass = ComplexityClass::Linear;

#[derive(Debug, Parser)]
#[command(
    name = "tcpred",
    version,
    about = "Few-shot time-complexity prediction for Python and Java snippets"
)]
pub struct Cli {
    /// Seed for commands that draw random numbers.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Overwrite existing output files.
    #[arg(long, global = true)]
    pub force: bool,
    /// Worker threads.
    #[arg(long, global = true, default_value_t = 1)]
    pub jobs: usize,
    /// Output format for records and tables.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Classify snippets with the symbolic analyzer.
    Analyze {
        /// Source files, directories of sources, or JSONL datasets.
        #[arg(required = true)]
        paths: Vec<PathBuf>,
        /// Language of source files whose extension does not tell.
        #[arg(long)]
        language: Option<Language>,
        /// JSONL file of `{id, label}` records to score against.
        #[arg(long)]
        gold: Option<PathBuf>,
        /// Write records here instead of standard output.
        #[arg(long, short)]
        output: Option<PathBuf>,
        /// Write gold-set metrics as JSON here.
        #[arg(long)]
        metrics: Option<PathBuf>,
    },
    /// Write an augmented copy of a labeled dataset.
    Augment {
        /// Labeled JSONL dataset.
        input: PathBuf,
        /// `lc`, `bt` or `bt+lc`.
        #[arg(long)]
        strategy: AugKind,
        #[arg(long, default_value = "natural")]
        sampling: Sampling,
        /// Augmented dataset (originals followed by augmentations).
        #[arg(long, short)]
        output: PathBuf,
        /// Provenance records; defaults to `<output>.provenance.jsonl`.
        #[arg(long)]
        provenance: Option<PathBuf>,
        /// Precomputed back-translations (JSONL of `{id, code}`).
        #[arg(long)]
        bt_cache: Option<PathBuf>,
        /// Use the in-process renaming augmenter.
        #[arg(long)]
        mock_bt: bool,
        #[arg(long, default_value_t = 8)]
        max_in_flight: usize,
        /// Augmenter command line, after `--`.
        #[arg(last = true)]
        augmenter: Vec<String>,
    },
    /// Fit the built-in classifier on a labeled dataset.
    Train {
        data: PathBuf,
        /// Model file to write.
        #[arg(long, short)]
        model: PathBuf,
        /// Class set, comma separated; defaults to the dataset's.
        #[arg(long, value_delimiter = ',')]
        classes: Option<Vec<ComplexityClass>>,
        #[arg(long)]
        learning_rate: Option<f64>,
        #[arg(long)]
        epochs_per_fit: Option<usize>,
        #[arg(long)]
        l2: Option<f64>,
        #[arg(long)]
        ngram_max: Option<usize>,
        #[arg(long)]
        batch_size: Option<usize>,
    },
    /// Predict with a saved built-in model.
    Predict {
        #[arg(long, short)]
        model: PathBuf,
        /// Source files, directories of sources, or JSONL datasets.
        #[arg(required = true)]
        paths: Vec<PathBuf>,
        #[arg(long)]
        language: Option<Language>,
        #[arg(long)]
        gold: Option<PathBuf>,
        #[arg(long, short)]
        output: Option<PathBuf>,
        #[arg(long)]
        metrics: Option<PathBuf>,
    },
    /// Run a semi-supervised experiment from a TOML config.
    Experiment {
        config: PathBuf,
        /// Report directory; overrides the config's `output`.
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Generate the synthetic corpus (train, valid and test JSONL files).
    GenCorpus {
        #[arg(long, default_value_t = 700)]
        count: usize,
        #[arg(long, short)]
        output: PathBuf,
    },
    /// Summarize report files as table rows.
    Report {
        #[arg(required = true)]
        reports: Vec<PathBuf>,
    },
    /// Serve the augmenter protocol on standard streams (test double).
    #[command(hide = true)]
    MockAugmenter {
        #[arg(long, default_value = "rename")]
        mode: MockMode,
    },
    /// Serve the classifier protocol on standard streams (test double).
    #[command(hide = true)]
    ServeClassifier {
        #[arg(long, default_value = "builtin")]
        mode: ServeMode,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn new(code: i32, message: impl Into<String>) -> Self {
        CliError {
            code,
            message: message.into(),
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<DataError> for CliError {
    fn from(e: DataError) -> Self {
        let code = match &e {
            DataError::Io { .. } => EXIT_IO,
            DataError::InsufficientClassCount { .. } => EXIT_CONFIG,
            _ => EXIT_DATA,
        };
        CliError::new(code, e.to_string())
    }
}

impl From<AugmentError> for CliError {
    fn from(e: AugmentError) -> Self {
        let code = match &e {
            AugmentError::AugmenterUnavailable => EXIT_AUGMENTER,
            AugmentError::NotLoopSampled(_) => EXIT_CONFIG,
            _ => EXIT_RUNTIME,
        };
        CliError::new(code, e.to_string())
    }
}

impl From<ClassifierError> for CliError {
    fn from(e: ClassifierError) -> Self {
        let code = match &e {
            ClassifierError::Persistence(_) => EXIT_IO,
            ClassifierError::EmptyTrainingSet | ClassifierError::LabelOutsideClassSet { .. } => {
                EXIT_DATA
            }
            _ => EXIT_RUNTIME,
        };
        CliError::new(code, e.to_string())
    }
}

impl From<ExperimentError> for CliError {
    fn from(e: ExperimentError) -> Self {
        match e {
            ExperimentError::Config(c) => CliError::new(EXIT_CONFIG, c.to_string()),
            ExperimentError::Data(d) => d.into(),
            ExperimentError::Augment(a) => a.into(),
            ExperimentError::Ssl(SslError::Classifier(c)) => {
                CliError::new(EXIT_RUNTIME, c.to_string())
            }
            ExperimentError::Ssl(s) => CliError::new(EXIT_RUNTIME, s.to_string()),
            ExperimentError::Io(m) => CliError::new(EXIT_IO, m),
        }
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// exit code. Errors are reported on standard error.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match execute(&cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.code
        }
    }
}

pub fn execute(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Analyze {
            paths,
            language,
            gold,
            output,
            metrics,
        } => cmd_analyze(
            cli,
            paths,
            *language,
            gold.as_deref(),
            output.as_deref(),
            metrics.as_deref(),
        ),
        Command::Augment {
            input,
            strategy,
            sampling,
            output,
            provenance,
            bt_cache,
            mock_bt,
            max_in_flight,
            augmenter,
        } => {
            let bt = BtSource {
                cache: bt_cache.as_deref(),
                mock: *mock_bt,
                command: augmenter,
                max_in_flight: *max_in_flight,
            };
            let strategy = AugStrategy {
                kind: *strategy,
                sampling: *sampling,
            };
            cmd_augment(cli, input, strategy, bt, output, provenance.as_deref())
        }
        Command::Train {
            data,
            model,
            classes,
            learning_rate,
            epochs_per_fit,
            l2,
            ngram_max,
            batch_size,
        } => {
            let mut h = Hyperparams::default();
            h.learning_rate = learning_rate.unwrap_or(h.learning_rate);
            h.epochs_per_fit = epochs_per_fit.unwrap_or(h.epochs_per_fit);
            h.l2 = l2.unwrap_or(h.l2);
            h.ngram_max = ngram_max.unwrap_or(h.ngram_max);
            h.batch_size = batch_size.unwrap_or(h.batch_size);
            cmd_train(cli, data, model, classes.as_deref(), h)
        }
        Command::Predict {
            model,
            paths,
            language,
            gold,
            output,
            metrics,
        } => cmd_predict(
            cli,
            model,
            paths,
            *language,
            gold.as_deref(),
            output.as_deref(),
            metrics.as_deref(),
        ),
        Command::Experiment { config, output } => cmd_experiment(cli, config, output.as_deref()),
        Command::GenCorpus { count, output } => cmd_gen_corpus(cli, *count, output),
        Command::Report { reports } => cmd_report(cli, reports),
        Command::MockAugmenter { mode } => {
            let stdin = std::io::stdin();
            crate::augment::bt::serve_mock(stdin.lock(), std::io::stdout().lock(), *mode)
                .map_err(|e| CliError::new(EXIT_IO, e.to_string()))
        }
        Command::ServeClassifier { mode } => {
            let stdin = std::io::stdin();
            serve_classifier(stdin.lock(), std::io::stdout().lock(), *mode)
                .map_err(|e| CliError::new(EXIT_IO, e.to_string()))
        }
    }
}

fn io_error(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::new(EXIT_IO, format!("{}: {e}", path.display()))
}

/// Opens `path` for writing, refusing to replace an existing file unless
/// `force` is set.
fn create_output(path: &Path, force: bool) -> Result<BufWriter<File>, CliError> {
    if path.exists() && !force {
        return Err(CliError::new(
            EXIT_IO,
            format!("{} exists (use --force to overwrite)", path.display()),
        ));
    }
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| io_error(parent, e))?;
    }
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| io_error(path, e))
}

fn finish(mut w: impl Write, path: &Path) -> Result<(), CliError> {
    w.flush().map_err(|e| io_error(path, e))
}

/// Standard output, or a file when `output` is given.
fn sink(output: Option<&Path>, force: bool) -> Result<Box<dyn Write>, CliError> {
    Ok(match output {
        Some(p) => Box::new(create_output(p, force)?),
        None => Box::new(BufWriter::new(std::io::stdout())),
    })
}

fn language_of(path: &Path, flag: Option<Language>) -> Option<Language> {
    flag.or_else(|| match path.extension()?.to_str()? {
        "py" => Some(Language::Python),
        "java" => Some(Language::Java),
        _ => None,
    })
}

fn read_source(path: &Path, flag: Option<Language>) -> Result<CodeSnippet, CliError> {
    let language = language_of(path, flag).ok_or_else(|| {
        CliError::new(
            EXIT_DATA,
            format!(
                "{}: cannot tell the language (use --language)",
                path.display()
            ),
        )
    })?;
    let source = std::fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    let id = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("snippet")
        .to_string();
    Ok(CodeSnippet::new(id, source, language))
}

fn source_files(dir: &Path, out: &mut Vec<PathBuf>) -> Result<(), CliError> {
    let mut entries: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| io_error(dir, e))?
        .map(|e| e.map(|e| e.path()))
        .collect::<Result<_, _>>()
        .map_err(|e| io_error(dir, e))?;
    entries.sort();
    for p in entries {
        if p.is_dir() {
            source_files(&p, out)?;
        } else if language_of(&p, None).is_some() {
            out.push(p);
        }
    }
    Ok(())
}

/// Snippets from source files, directories and JSONL datasets, in argument
/// order. Ids must be unique across all inputs.
pub fn collect_snippets(
    paths: &[PathBuf],
    language: Option<Language>,
) -> Result<Vec<CodeSnippet>, CliError> {
    let mut out = Vec::new();
    for path in paths {
        if !path.exists() {
            return Err(CliError::new(
                EXIT_IO,
                format!("{}: no such file or directory", path.display()),
            ));
        }
        if path.is_dir() {
            let mut files = Vec::new();
            source_files(path, &mut files)?;
            for f in files {
                out.push(read_source(&f, language)?);
            }
        } else if path.extension().is_some_and(|e| e == "jsonl") {
            out.extend(Dataset::load_jsonl(path)?.snippets().cloned());
        } else {
            out.push(read_source(path, language)?);
        }
    }
    let mut seen = HashSet::new();
    if let Some(s) = out.iter().find(|s| !seen.insert(s.id.as_str())) {
        return Err(CliError::new(
            EXIT_DATA,
            format!("duplicate snippet id `{}`", s.id),
        ));
    }
    Ok(out)
}

#[derive(Deserialize)]
struct GoldRecord {
    id: String,
    label: Option<ComplexityClass>,
}

/// Gold labels from a JSONL file of records with `id` and `label`.
/// Dataset files qualify; a `class_set` header line is skipped.
pub fn load_gold(path: &Path) -> Result<Vec<(String, ComplexityClass)>, CliError> {
    let file = File::open(path).map_err(|e| io_error(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| io_error(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let bad =
            |m: String| CliError::new(EXIT_DATA, format!("{}:{}: {m}", path.display(), i + 1));
        let value: serde_json::Value =
            serde_json::from_str(&line).map_err(|e| bad(e.to_string()))?;
        if value.get("class_set").is_some() && value.get("id").is_none() {
            continue;
        }
        let r: GoldRecord = serde_json::from_value(value).map_err(|e| bad(e.to_string()))?;
        let label = r
            .label
            .ok_or_else(|| bad(format!("`{}` has no label", r.id)))?;
        out.push((r.id, label));
    }
    Ok(out)
}

fn score(
    predictions: &BTreeMap<String, ComplexityClass>,
    gold_path: &Path,
    snippets: &[CodeSnippet],
) -> Result<Metrics, CliError> {
    let gold = load_gold(gold_path)?;
    let by_id: BTreeMap<&str, &CodeSnippet> = snippets.iter().map(|s| (s.id.as_str(), s)).collect();
    let mut examples = Vec::with_capacity(gold.len());
    for (id, label) in &gold {
        let s = by_id.get(id.as_str()).ok_or_else(|| {
            CliError::new(
                EXIT_DATA,
                format!(
                    "{}: gold id `{id}` is not among the inputs",
                    gold_path.display()
                ),
            )
        })?;
        examples.push(LabeledExample::new((*s).clone(), *label));
    }
    let class_set = ClassSet::new(gold.iter().map(|(_, l)| *l));
    compute_metrics(predictions, &examples, &class_set)
        .map_err(|e| CliError::new(EXIT_DATA, e.to_string()))
}

fn report_metrics(
    m: &Metrics,
    extra: &str,
    path: Option<&Path>,
    force: bool,
) -> Result<(), CliError> {
    eprintln!(
        "accuracy {:.4}  macro-F1 {:.4}{extra}",
        m.accuracy, m.macro_f1
    );
    if let Some(p) = path {
        let mut w = create_output(p, force)?;
        serde_json::to_writer_pretty(&mut w, m).map_err(|e| io_error(p, e))?;
        writeln!(w).map_err(|e| io_error(p, e))?;
        finish(w, p)?;
    }
    Ok(())
}

/// Applies `f` to every item over up to `jobs` threads, keeping order.
fn par_map<T: Sync, R: Send>(items: &[T], jobs: usize, f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    let chunk = items.len().div_ceil(jobs.max(1)).max(1);
    std::thread::scope(|scope| {
        let handles: Vec<_> = items
            .chunks(chunk)
            .map(|part| scope.spawn(|| part.iter().map(&f).collect::<Vec<R>>()))
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("worker thread"))
            .collect()
    })
}

#[derive(Serialize)]
struct AnalyzeRecord<'a> {
    id: &'a str,
    class: Option<ComplexityClass>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    trace: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

fn cmd_analyze(
    cli: &Cli,
    paths: &[PathBuf],
    language: Option<Language>,
    gold: Option<&Path>,
    output: Option<&Path>,
    metrics: Option<&Path>,
) -> Result<(), CliError> {
    let snippets = collect_snippets(paths, language)?;
    let results = par_map(&snippets, cli.jobs, analyze);
    let mut w = sink(output, cli.force)?;
    let out_err = |e: std::io::Error| CliError::new(EXIT_IO, e.to_string());
    if cli.format == Some(Format::Csv) {
        let mut csv = csv::Writer::from_writer(&mut w);
        csv.write_record(["id", "class", "trace", "error"])
            .map_err(|e| CliError::new(EXIT_IO, e.to_string()))?;
        for (s, r) in snippets.iter().zip(&results) {
            let row = match r {
                Ok(a) => [s.id.as_str(), a.class.name(), &a.trace.join(" | "), ""],
                Err(e) => [s.id.as_str(), "", "", &e.reason],
            };
            csv.write_record(row)
                .map_err(|e| CliError::new(EXIT_IO, e.to_string()))?;
        }
        csv.flush().map_err(out_err)?;
    } else {
        for (s, r) in snippets.iter().zip(&results) {
            let rec = match r {
                Ok(a) => AnalyzeRecord {
                    id: &s.id,
                    class: Some(a.class),
                    trace: a.trace.clone(),
                    error: None,
                },
                Err(e) => AnalyzeRecord {
                    id: &s.id,
                    class: None,
                    trace: Vec::new(),
                    error: Some(e.reason.clone()),
                },
            };
            writeln!(
                w,
                "{}",
                serde_json::to_string(&rec).expect("record serializes")
            )
            .map_err(out_err)?;
        }
    }
    w.flush().map_err(out_err)?;
    if let Some(gold) = gold {
        let predictions: BTreeMap<String, ComplexityClass> = snippets
            .iter()
            .zip(&results)
            .map(|(s, r)| {
                (
                    s.id.clone(),
                    r.as_ref().map(|a| a.class).unwrap_or(UNAVAILABLE_FALLBACK),
                )
            })
            .collect();
        let m = score(&predictions, gold, &snippets)?;
        let unavailable = results.iter().filter(|r| r.is_err()).count();
        report_metrics(
            &m,
            &format!(
                "  ({} snippets, {unavailable} unanalyzable)",
                snippets.len()
            ),
            metrics,
            cli.force,
        )?;
    }
    Ok(())
}

struct BtSource<'a> {
    cache: Option<&'a Path>,
    mock: bool,
    command: &'a [String],
    max_in_flight: usize,
}

impl BtSource<'_> {
    fn open(&self) -> Result<Option<Box<dyn Backtranslator>>, CliError> {
        if self.mock {
            return Ok(Some(Box::new(RenameBacktranslator)));
        }
        if let Some(p) = self.cache {
            return Ok(Some(Box::new(CachedBacktranslator::load(p)?)));
        }
        if !self.command.is_empty() {
            return Ok(Some(Box::new(ProcessAugmenter::spawn(
                self.command,
                self.max_in_flight,
            )?)));
        }
        Ok(None)
    }
}

#[derive(Serialize)]
struct Provenance<'a> {
    id: &'a str,
    original: &'a str,
    method: AugMethod,
}

fn cmd_augment(
    cli: &Cli,
    input: &Path,
    strategy: AugStrategy,
    bt: BtSource<'_>,
    output: &Path,
    provenance: Option<&Path>,
) -> Result<(), CliError> {
    let data = Dataset::load_jsonl(input)?;
    let labeled = data.labeled();
    let mut backend = if strategy.kind.uses_bt() {
        bt.open()?
    } else {
        None
    };
    let aug = augment_dataset(
        &labeled,
        strategy,
        backend
            .as_mut()
            .map(|b| b.as_mut() as &mut dyn Backtranslator),
    )?;
    drop(backend);
    let prov_path = provenance.map(Path::to_path_buf).unwrap_or_else(|| {
        let mut name = output.as_os_str().to_os_string();
        name.push(".provenance.jsonl");
        PathBuf::from(name)
    });
    if !cli.force {
        for p in [output, prov_path.as_path()] {
            if p.exists() {
                return Err(CliError::new(
                    EXIT_IO,
                    format!("{} exists (use --force to overwrite)", p.display()),
                ));
            }
        }
    }
    let mut entries = data.entries().to_vec();
    entries.extend(aug.examples.iter().map(|a| Entry {
        snippet: a.snippet.clone(),
        label: Some(a.label),
    }));
    let out = Dataset::new(entries, data.class_set().clone())?;
    let mut w = create_output(output, cli.force)?;
    out.write_jsonl(&mut w).map_err(|e| io_error(output, e))?;
    finish(w, output)?;
    let mut w = create_output(&prov_path, cli.force)?;
    for a in &aug.examples {
        let rec = Provenance {
            id: &a.snippet.id,
            original: &a.original,
            method: a.method,
        };
        writeln!(
            w,
            "{}",
            serde_json::to_string(&rec).expect("record serializes")
        )
        .map_err(|e| io_error(&prov_path, e))?;
    }
    finish(w, &prov_path)?;
    for (id, e) in &aug.rejected {
        eprintln!("rejected {id}: {e}");
    }
    eprintln!(
        "{} originals, {} augmentations, {} rejected",
        data.len(),
        aug.examples.len(),
        aug.rejected.len()
    );
    Ok(())
}

fn cmd_train(
    cli: &Cli,
    data: &Path,
    model_path: &Path,
    classes: Option<&[ComplexityClass]>,
    hyper: Hyperparams,
) -> Result<(), CliError> {
    let ds = Dataset::load_jsonl(data)?;
    let class_set = classes
        .map(|c| ClassSet::new(c.iter().copied()))
        .unwrap_or_else(|| ds.class_set().clone());
    if model_path.exists() && !cli.force {
        return Err(CliError::new(
            EXIT_IO,
            format!("{} exists (use --force to overwrite)", model_path.display()),
        ));
    }
    let examples = ds.labeled();
    let mut model = BuiltinModel::new(class_set, hyper);
    model.fit(&examples, cli.seed.unwrap_or(0))?;
    model.save(model_path)?;
    eprintln!(
        "fitted on {} examples, {} features",
        examples.len(),
        model.vocabulary_len()
    );
    Ok(())
}

#[derive(Serialize)]
struct PredictRecord<'a> {
    id: &'a str,
    class: ComplexityClass,
    probs: BTreeMap<String, f64>,
}

fn cmd_predict(
    cli: &Cli,
    model_path: &Path,
    paths: &[PathBuf],
    language: Option<Language>,
    gold: Option<&Path>,
    output: Option<&Path>,
    metrics: Option<&Path>,
) -> Result<(), CliError> {
    if !model_path.exists() {
        return Err(CliError::new(
            EXIT_IO,
            format!("{}: no such file", model_path.display()),
        ));
    }
    let model = BuiltinModel::load(model_path)?;
    let snippets = collect_snippets(paths, language)?;
    let dists = par_map(&snippets, cli.jobs, |s| model.predict_one(s))
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;
    let mut w = sink(output, cli.force)?;
    let out_err = |e: std::io::Error| CliError::new(EXIT_IO, e.to_string());
    if cli.format == Some(Format::Csv) {
        let classes = model.class_set().classes().to_vec();
        let mut csv = csv::Writer::from_writer(&mut w);
        let header: Vec<&str> = ["id", "class"]
            .into_iter()
            .chain(classes.iter().map(|c| c.name()))
            .collect();
        csv.write_record(&header)
            .map_err(|e| CliError::new(EXIT_IO, e.to_string()))?;
        for (s, d) in snippets.iter().zip(&dists) {
            let mut row = vec![s.id.clone(), d.argmax().name().to_string()];
            row.extend(classes.iter().map(|&c| d.prob(c).to_string()));
            csv.write_record(&row)
                .map_err(|e| CliError::new(EXIT_IO, e.to_string()))?;
        }
        csv.flush().map_err(out_err)?;
    } else {
        for (s, d) in snippets.iter().zip(&dists) {
            let rec = PredictRecord {
                id: &s.id,
                class: d.argmax(),
                probs: d.to_wire(),
            };
            writeln!(
                w,
                "{}",
                serde_json::to_string(&rec).expect("record serializes")
            )
            .map_err(out_err)?;
        }
    }
    w.flush().map_err(out_err)?;
    if let Some(gold) = gold {
        let predictions = snippets
            .iter()
            .zip(&dists)
            .map(|(s, d)| (s.id.clone(), d.argmax()))
            .collect();
        let m = score(&predictions, gold, &snippets)?;
        report_metrics(&m, "", metrics, cli.force)?;
    }
    Ok(())
}

fn cmd_experiment(cli: &Cli, config: &Path, output: Option<&Path>) -> Result<(), CliError> {
    if !config.exists() {
        return Err(CliError::new(
            EXIT_IO,
            format!("{}: no such file", config.display()),
        ));
    }
    let mut cfg =
        ExperimentConfig::load(config).map_err(|e| CliError::new(EXIT_CONFIG, e.to_string()))?;
    if let Some(seed) = cli.seed {
        cfg.experiment.seeds = vec![seed];
    }
    let dir = output
        .map(Path::to_path_buf)
        .or_else(|| cfg.output.clone())
        .ok_or_else(|| {
            CliError::new(
                EXIT_CONFIG,
                "no report directory (set `output` or pass --output)",
            )
        })?;
    if !cli.force {
        for name in ["report.json", "epochs.csv", "confusion.csv"] {
            let p = dir.join(name);
            if p.exists() {
                return Err(CliError::new(
                    EXIT_IO,
                    format!("{} exists (use --force to overwrite)", p.display()),
                ));
            }
        }
    }
    let report = run_experiment(&cfg, cli.jobs)?;
    report.write(&dir, cli.force)?;
    println!("{}", report.table_row());
    Ok(())
}

fn cmd_gen_corpus(cli: &Cli, count: usize, dir: &Path) -> Result<(), CliError> {
    if count < 7 {
        return Err(CliError::new(
            EXIT_CONFIG,
            "count must be at least 7 (one program per class)",
        ));
    }
    let split = generate_split(count, cli.seed.unwrap_or(0));
    let files = [
        ("train.jsonl", &split.train),
        ("valid.jsonl", &split.validation),
        ("test.jsonl", &split.test),
    ];
    if !cli.force {
        if let Some((name, _)) = files.iter().find(|(n, _)| dir.join(n).exists()) {
            return Err(CliError::new(
                EXIT_IO,
                format!(
                    "{} exists (use --force to overwrite)",
                    dir.join(name).display()
                ),
            ));
        }
    }
    for (name, part) in files {
        let path = dir.join(name);
        let ds = Dataset::from_labeled(part.clone(), ClassSet::all())?;
        let mut w = create_output(&path, cli.force)?;
        ds.write_jsonl(&mut w).map_err(|e| io_error(&path, e))?;
        finish(w, &path)?;
        eprintln!("{}: {} snippets", path.display(), part.len());
    }
    Ok(())
}

fn cmd_report(cli: &Cli, paths: &[PathBuf]) -> Result<(), CliError> {
    let mut reports = Vec::new();
    for p in paths {
        let text = std::fs::read_to_string(p).map_err(|e| io_error(p, e))?;
        let r: RunReport = serde_json::from_str(&text)
            .map_err(|e| CliError::new(EXIT_DATA, format!("{}: not a report: {e}", p.display())))?;
        reports.push(r);
    }
    let stdout = std::io::stdout();
    let mut w = stdout.lock();
    let out_err = |e: std::io::Error| CliError::new(EXIT_IO, e.to_string());
    match cli.format {
        None => {
            for r in &reports {
                writeln!(w, "{}", r.table_row()).map_err(out_err)?;
            }
        }
        Some(Format::Json) => {
            let rows: Vec<_> = reports
                .iter()
                .map(|r| serde_json::json!({ "name": r.name, "summary": r.summary }))
                .collect();
            writeln!(
                w,
                "{}",
                serde_json::to_string_pretty(&rows).expect("summary serializes")
            )
            .map_err(out_err)?;
        }
        Some(Format::Csv) => {
            let mut csv = csv::Writer::from_writer(&mut w);
            let e = |e: csv::Error| CliError::new(EXIT_IO, e.to_string());
            csv.write_record([
                "name",
                "accuracy",
                "macro_f1",
                "accuracy_mean",
                "accuracy_std",
                "macro_f1_mean",
                "macro_f1_std",
            ])
            .map_err(e)?;
            for r in &reports {
                let s = &r.summary;
                csv.write_record([
                    r.name.clone(),
                    s.accuracy.clone(),
                    s.macro_f1.clone(),
                    s.accuracy_mean.to_string(),
                    s.accuracy_std.to_string(),
                    s.macro_f1_mean.to_string(),
                    s.macro_f1_std.to_string(),
                ])
                .map_err(e)?;
            }
            csv.flush().map_err(out_err)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_parse() {
        let cli = Cli::try_parse_from([
            "tcpred",
            "--seed",
            "3",
            "augment",
            "d.jsonl",
            "--strategy",
            "bt+lc",
            "-o",
            "o.jsonl",
            "--",
            "aug",
            "--x",
        ])
        .unwrap();
        assert_eq!(cli.seed, Some(3));
        match cli.command {
            Command::Augment {
                strategy,
                augmenter,
                ..
            } => {
                assert_eq!(strategy, AugKind::BtPlusLc);
                assert_eq!(augmenter, ["aug", "--x"]);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn usage_errors_are_config_errors() {
        assert_eq!(run(["tcpred", "analyze"]), EXIT_CONFIG);
        assert_eq!(run(["tcpred", "frobnicate"]), EXIT_CONFIG);
    }

    #[test]
    fn exit_codes_by_category() {
        assert_eq!(
            CliError::from(AugmentError::AugmenterUnavailable).code,
            EXIT_AUGMENTER
        );
        let e = DataError::InsufficientClassCount {
            class: ComplexityClass::Cubic,
            have: 3,
            need: 5,
        };
        assert_eq!(CliError::from(e).code, EXIT_CONFIG);
        assert_eq!(
            CliError::from(ClassifierError::ProtocolViolation("x".into())).code,
            EXIT_RUNTIME
        );
    }
}
