//! `langsieve`: train and apply an open-set language identifier, clean web
//! shards into per-language partitions, and inspect the supporting pieces
//! (synthetic data, fuzzy hashes, PII scrubbing, wall-time estimates).

use std::collections::BTreeSet;
use std::fs;
use std::io::{self, BufRead, Read, Write};
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use langsieve::blocklist::{load_blocklists, Blocklists};
use langsieve::corpus::{read_corpus, write_corpus, LabeledSentence, LABEL_PREFIX};
use langsieve::digest::{compute_digest, digest_distance, Digest};
use langsieve::eval::evaluate;
use langsieve::filters::FilterConfig;
use langsieve::label::LabelId;
use langsieve::lid::{train, LidModel, TrainConfig};
use langsieve::pii;
use langsieve::pipeline::{
    estimate_walltime, run, RunOptions, WalltimeParams, DEFAULT_PART_BYTES, DEFAULT_THRESHOLD,
};
use langsieve::script::ScriptRegistry;
use langsieve::synth::{gen_und, gen_zxx, NoiseKind, DEFAULT_UND_LEN_RANGE};

#[derive(Parser)]
#[command(name = "langsieve", version, about = "Web-corpus cleaning with open-set language ID")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a language identifier from a labeled corpus
    Train(TrainArgs),
    /// Predict labels for text arguments or stdin lines
    Predict(PredictArgs),
    /// Generate synthetic und_* / zxx_* training sentences
    Synth(SynthArgs),
    /// Clean shards into per-language partitioned JSONL
    Run(RunArgs),
    /// Score a model against a labeled benchmark
    Eval(EvalArgs),
    /// Fuzzy-hash text, or compare two digests
    Hash(HashArgs),
    /// Replace emails and public IPv4 addresses with sentinels
    Scrub(ScrubArgs),
    /// Estimate processing wall time in hours
    Walltime(WalltimeArgs),
}

#[derive(Args)]
struct TrainArgs {
    /// Corpus file, one `__label__xxx_Yyyy text` per line
    #[arg(long)]
    corpus: PathBuf,
    /// Where to write the trained model
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Keep words seen at least this often [default: 1000]
    #[arg(long)]
    min_count: Option<u32>,
    #[arg(long)]
    min_count_label: Option<u32>,
    /// Hash buckets for character n-grams [default: 1000000]
    #[arg(long)]
    bucket: Option<u32>,
    /// Shortest character n-gram [default: 2]
    #[arg(long)]
    minn: Option<u32>,
    /// Longest character n-gram [default: 5]
    #[arg(long)]
    maxn: Option<u32>,
    /// Embedding dimension [default: 256]
    #[arg(long)]
    dim: Option<u32>,
    /// Passes over the corpus [default: 1]
    #[arg(long)]
    epoch: Option<u32>,
    /// Initial learning rate [default: 0.8]
    #[arg(long)]
    lr: Option<f32>,
}

#[derive(Args)]
struct PredictArgs {
    #[arg(long)]
    model: PathBuf,
    /// Labels to print per input
    #[arg(long, default_value_t = 1)]
    k: usize,
    /// Restrict the softmax to this comma-separated label set
    #[arg(long, value_delimiter = ',')]
    labels: Vec<String>,
    /// Lines to classify; stdin when absent
    text: Vec<String>,
}

#[derive(Args)]
struct SynthArgs {
    #[command(subcommand)]
    command: SynthCommand,
}

#[derive(Subcommand)]
enum SynthCommand {
    /// Random characters of one script, labeled und_<Script>
    Und {
        /// Four-letter script code, e.g. Armn
        #[arg(long)]
        script: String,
        #[arg(long, default_value_t = 100)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Shortest token, in characters
        #[arg(long, default_value_t = DEFAULT_UND_LEN_RANGE.0)]
        min_len: u32,
        /// Longest token, in characters
        #[arg(long, default_value_t = DEFAULT_UND_LEN_RANGE.1)]
        max_len: u32,
        /// Write here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Web noise (mojibake, PDF soup, ...), labeled zxx_*
    Zxx {
        /// One of: misrendered_pdf, antspeak, binary, mojibake_latin,
        /// mojibake_arabic, replacement_char
        #[arg(long)]
        kind: String,
        #[arg(long, default_value_t = 100)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Corpus whose sentences feed carrier-based kinds
        #[arg(long)]
        carrier: Option<PathBuf>,
        /// Write here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    model: PathBuf,
    /// Input shards (.wet or .jsonl); repeatable
    #[arg(long, required = true, num_args = 1..)]
    input: Vec<PathBuf>,
    /// Partition output directory
    #[arg(long)]
    output: PathBuf,
    /// Reject documents below this probability
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    threshold: f64,
    /// key=value file overriding warning thresholds
    #[arg(long)]
    filters_config: Option<PathBuf>,
    /// Directory of <class>/domains lists merged over the built-ins
    #[arg(long)]
    blocklists: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads; 0 means one per core
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// Also write the report as JSON here
    #[arg(long)]
    report: Option<PathBuf>,
    /// Force a shard format (wet or jsonl) instead of inferring it
    #[arg(long)]
    format: Option<String>,
    /// Rotate partition parts beyond this many bytes
    #[arg(long, default_value_t = DEFAULT_PART_BYTES)]
    part_max_bytes: u64,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    model: PathBuf,
    /// Labeled benchmark corpus
    #[arg(long)]
    benchmark: PathBuf,
    /// Print JSON instead of the table
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct HashArgs {
    /// Compare two hex digests instead of hashing text
    #[arg(long, num_args = 2, value_names = ["HEX", "HEX"])]
    distance: Vec<String>,
    /// Read the text from this file
    #[arg(long, conflicts_with = "distance")]
    file: Option<PathBuf>,
    /// Text to hash; stdin when absent
    #[arg(conflicts_with_all = ["distance", "file"])]
    text: Option<String>,
}

#[derive(Args)]
struct ScrubArgs {
    /// Seed for sentinel selection
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Text to scrub; stdin when absent
    text: Option<String>,
}

#[derive(Args)]
struct WalltimeArgs {
    /// Documents to process
    #[arg(long)]
    documents: f64,
    /// Parallel jobs
    #[arg(long)]
    parallel_jobs: f64,
    /// Mean sentences per document
    #[arg(long)]
    sentences_per_doc: f64,
    /// Single-worker line throughput
    #[arg(long)]
    sentences_per_second: f64,
    /// Single-worker document throughput
    #[arg(long)]
    documents_per_second: f64,
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Train(args) => cmd_train(args),
        Command::Predict(args) => cmd_predict(args),
        Command::Synth(args) => cmd_synth(args),
        Command::Run(args) => cmd_run(args),
        Command::Eval(args) => cmd_eval(args),
        Command::Hash(args) => cmd_hash(args),
        Command::Scrub(args) => cmd_scrub(args),
        Command::Walltime(args) => cmd_walltime(args),
    };
    if let Err(err) = result {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}

fn cmd_train(args: TrainArgs) -> Result<()> {
    let corpus = read_corpus(&args.corpus)
        .with_context(|| format!("reading corpus {}", args.corpus.display()))?;
    let mut config = TrainConfig::default();
    if let Some(v) = args.min_count {
        config.min_count = v;
    }
    if let Some(v) = args.min_count_label {
        config.min_count_label = v;
    }
    if let Some(v) = args.bucket {
        config.bucket = v;
    }
    if let Some(v) = args.minn {
        config.minn = v;
    }
    if let Some(v) = args.maxn {
        config.maxn = v;
    }
    if let Some(v) = args.dim {
        config.dim = v;
    }
    if let Some(v) = args.epoch {
        config.epoch = v;
    }
    if let Some(v) = args.lr {
        config.lr = v;
    }
    let model = train(&corpus, &config, args.seed)?;
    model.save(&args.out)?;
    println!(
        "trained on {} sentences: {} labels, {} words -> {}",
        corpus.len(),
        model.labels().len(),
        model.vocab().n_words(),
        args.out.display()
    );
    Ok(())
}

fn cmd_predict(args: PredictArgs) -> Result<()> {
    if args.k < 1 {
        bail!("k must be >= 1");
    }
    let model = LidModel::load(&args.model)?;
    let allowed = parse_label_set(&args.labels)?;
    let stdout = io::stdout();
    let mut out = stdout.lock();
    if args.text.is_empty() {
        for line in io::stdin().lock().lines() {
            predict_line(&model, &line?, args.k, allowed.as_ref(), &mut out)?;
        }
    } else {
        for text in &args.text {
            predict_line(&model, text, args.k, allowed.as_ref(), &mut out)?;
        }
    }
    Ok(())
}

fn parse_label_set(labels: &[String]) -> Result<Option<BTreeSet<LabelId>>> {
    if labels.is_empty() {
        return Ok(None);
    }
    let mut set = BTreeSet::new();
    for raw in labels {
        let label: LabelId =
            raw.parse().with_context(|| format!("bad label {raw:?}"))?;
        set.insert(label);
    }
    Ok(Some(set))
}

/// One output line per input: `label prob` pairs, or `-` when the text
/// yields no features.
fn predict_line(
    model: &LidModel,
    text: &str,
    k: usize,
    allowed: Option<&BTreeSet<LabelId>>,
    out: &mut impl Write,
) -> Result<()> {
    let predictions = match allowed {
        Some(set) => model.predict_constrained(text, set)?,
        None => model.predict(text, k),
    };
    match predictions {
        None => writeln!(out, "-")?,
        Some(ranked) => {
            let rendered: Vec<String> = ranked
                .iter()
                .take(k)
                .map(|p| format!("{} {:.4}", p.label, p.probability))
                .collect();
            writeln!(out, "{}", rendered.join(" "))?;
        }
    }
    Ok(())
}

fn cmd_synth(args: SynthArgs) -> Result<()> {
    let (sentences, out_path) = match args.command {
        SynthCommand::Und { script, count, seed, min_len, max_len, out } => {
            let code = script
                .parse()
                .with_context(|| format!("bad script code {script:?}"))?;
            (gen_und(code, count, (min_len, max_len), seed)?, out)
        }
        SynthCommand::Zxx { kind, count, seed, carrier, out } => {
            let kind = NoiseKind::from_name(&kind)?;
            let carrier_texts = match &carrier {
                Some(path) => Some(
                    read_corpus(path)
                        .with_context(|| format!("reading carrier {}", path.display()))?
                        .into_iter()
                        .map(|s| s.text)
                        .collect::<Vec<_>>(),
                ),
                None => None,
            };
            (gen_zxx(kind, count, seed, carrier_texts.as_deref())?, out)
        }
    };
    write_sentences(&sentences, out_path.as_deref())
}

fn write_sentences(sentences: &[LabeledSentence], out: Option<&std::path::Path>) -> Result<()> {
    match out {
        Some(path) => {
            write_corpus(path, sentences)
                .with_context(|| format!("writing {}", path.display()))?;
            println!("wrote {} sentences -> {}", sentences.len(), path.display());
        }
        None => {
            let stdout = io::stdout();
            let mut out = stdout.lock();
            for s in sentences {
                writeln!(out, "{LABEL_PREFIX}{} {}", s.label, s.text)?;
            }
        }
    }
    Ok(())
}

fn cmd_run(args: RunArgs) -> Result<()> {
    let model = LidModel::load(&args.model)?;
    let cfg = match &args.filters_config {
        Some(path) => FilterConfig::from_file(path)?,
        None => FilterConfig::default(),
    };
    let lists = match &args.blocklists {
        Some(dir) => {
            let (lists, loaded) = load_blocklists(dir)?;
            eprintln!(
                "blocklists: {} classes, {} domains ({} lines skipped)",
                loaded.classes_loaded, loaded.domains_loaded, loaded.lines_skipped
            );
            lists
        }
        None => Blocklists::builtin(),
    };
    let options = RunOptions {
        threshold: args.threshold,
        seed: args.seed,
        workers: args.workers,
        part_max_bytes: args.part_max_bytes,
        format: args.format.clone(),
    };
    let report = run(
        &args.input,
        &args.output,
        &model,
        &cfg,
        ScriptRegistry::builtin(),
        &lists,
        &options,
    )?;
    print!("{}", report.render_table());
    if let Some(path) = &args.report {
        fs::write(path, report.to_json())
            .with_context(|| format!("writing report {}", path.display()))?;
        eprintln!("report -> {}", path.display());
    }
    Ok(())
}

fn cmd_eval(args: EvalArgs) -> Result<()> {
    let model = LidModel::load(&args.model)?;
    let benchmark = read_corpus(&args.benchmark)
        .with_context(|| format!("reading benchmark {}", args.benchmark.display()))?;
    let result = evaluate(&model, &benchmark)?;
    if args.json {
        println!("{}", result.to_json());
    } else {
        print!("{}", result.render_table());
    }
    Ok(())
}

fn cmd_hash(args: HashArgs) -> Result<()> {
    if !args.distance.is_empty() {
        let a = Digest::from_hex(&args.distance[0])?;
        let b = Digest::from_hex(&args.distance[1])?;
        println!("{}", digest_distance(&a, &b));
        return Ok(());
    }
    let text = match (&args.file, &args.text) {
        (Some(path), _) => fs::read_to_string(path)
            .with_context(|| format!("reading {}", path.display()))?,
        (None, Some(text)) => text.clone(),
        (None, None) => read_stdin()?,
    };
    match compute_digest(&text) {
        Some(digest) => println!("{}", digest.to_hex()),
        // Too short or too uniform to hash.
        None => println!("-"),
    }
    Ok(())
}

fn cmd_scrub(args: ScrubArgs) -> Result<()> {
    let text = match &args.text {
        Some(text) => text.clone(),
        None => read_stdin()?,
    };
    let (scrubbed, report) = pii::scrub(&text, args.seed);
    print!("{scrubbed}");
    if args.text.is_some() || !scrubbed.ends_with('\n') {
        println!();
    }
    eprintln!(
        "emails replaced: {}, ips replaced: {}",
        report.emails_replaced, report.ips_replaced
    );
    Ok(())
}

fn cmd_walltime(args: WalltimeArgs) -> Result<()> {
    let hours = estimate_walltime(&WalltimeParams {
        documents: args.documents,
        parallel_jobs: args.parallel_jobs,
        sentences_per_doc: args.sentences_per_doc,
        sentences_per_second: args.sentences_per_second,
        documents_per_second: args.documents_per_second,
    })?;
    println!("{hours:.2} hours");
    Ok(())
}

fn read_stdin() -> Result<String> {
    let mut text = String::new();
    io::stdin().lock().read_to_string(&mut text).context("reading stdin")?;
    Ok(text)
}
