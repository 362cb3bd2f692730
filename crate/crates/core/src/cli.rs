//! The `absa` command-line driver.
//!
//! Exit status is 0 on success, 1 on a runtime failure and 2 on a usage
//! error. `ABSA_LOG` selects the log level: `quiet`, `info` (default) or
//! `debug`.

use std::ffi::OsString;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};

use crate::corpus::{parse_dataset, shuffle_split, Dataset, Polarity};
use crate::encode::{assign_aspect_ids, EncodingReport, TfIdfModel};
use crate::error::{Error, Result};
use crate::eval::{compute_metrics, run_crossval, CrossvalReport, Metrics, DEFAULT_K};
use crate::memnet::{grad_check, random_gradcheck_case, EmbeddingSource};
use crate::persist;
use crate::pipeline::{FeatureMode, ModelKind, ModelSpec, PipelineConfig};
use crate::textproc::{build_vocab, load_stoplist, TokenizedInstance};

/// Gradient checks at or above this relative error fail.
pub const GRADCHECK_TOLERANCE: f64 = 1e-4;

#[derive(Debug, Parser)]
#[command(
    name = "absa",
    version,
    about = "Aspect-based sentiment analysis toolkit",
    arg_required_else_help = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit a pipeline and write an .absa archive
    Train(TrainArgs),
    /// Label every instance of a dataset with a saved archive
    Predict(PredictArgs),
    /// Stratified k-fold cross-validation report
    Cv(CvArgs),
    /// Print the encodings of dataset instances as JSON
    Encode(EncodeArgs),
    /// Verify memory-network gradients against finite differences
    Gradcheck(GradcheckArgs),
    /// Precision, recall, F1 and accuracy of a prediction file
    Metrics(MetricsArgs),
}

#[derive(Debug, Args)]
struct ModelArgs {
    /// Training data (JSONL)
    #[arg(long)]
    data: PathBuf,
    #[arg(long, value_parser = parse_kind)]
    model: ModelKind,
    /// Feature mode; defaults to memnet for the memnet model and oh otherwise
    #[arg(long, value_parser = parse_features)]
    features: Option<FeatureMode>,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Pre-trained word vectors (GloVe text format)
    #[arg(long)]
    embeddings: Option<PathBuf>,
    /// Embedding dimension when no embedding file is given
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    hops: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    epochs: Option<usize>,
    /// Stop-word list; the memnet model uses the bundled list by default
    #[arg(long)]
    stopwords: Option<PathBuf>,
    /// Padded length of the location-encoding features
    #[arg(long)]
    max_len: Option<usize>,
}

#[derive(Debug, Args)]
struct TrainArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Held-out data to score after training
    #[arg(long)]
    test: Option<PathBuf>,
    /// Hold out this fraction of --data instead of reading --test
    #[arg(long, conflicts_with = "test")]
    test_fraction: Option<f64>,
    /// Archive path
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct PredictArgs {
    /// Archive written by `train`
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    data: PathBuf,
    /// Label file, one of -1/0/1 per line (stdout when absent)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CvArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, default_value_t = DEFAULT_K)]
    k: usize,
    /// Text report path; the JSON report goes next to it with a .json extension
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EncodeArgs {
    #[arg(long)]
    data: PathBuf,
    /// Instance position; all instances (one JSON object per line) when absent
    #[arg(long)]
    index: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct GradcheckArgs {
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Check only this hop count instead of 1, 2 and 3
    #[arg(long)]
    hops: Option<usize>,
    #[arg(long, default_value_t = 8)]
    dim: usize,
    #[arg(long, default_value_t = 1e-5)]
    eps: f64,
}

#[derive(Debug, Args)]
struct MetricsArgs {
    /// Gold dataset (JSONL)
    #[arg(long)]
    data: PathBuf,
    /// Predictions, one of -1/0/1 per line
    #[arg(long)]
    pred: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_kind(s: &str) -> std::result::Result<ModelKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_features(s: &str) -> std::result::Result<FeatureMode, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

enum Failure {
    Usage(String),
    Runtime(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Runtime(e)
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn usage<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(Failure::Usage(msg.into()))
}

fn init_logging() -> std::result::Result<(), String> {
    let level = match std::env::var("ABSA_LOG").as_deref() {
        Err(_) | Ok("") | Ok("info") => log::LevelFilter::Info,
        Ok("quiet") => log::LevelFilter::Off,
        Ok("debug") => log::LevelFilter::Debug,
        Ok(other) => return Err(format!("ABSA_LOG must be quiet, info or debug, got {other:?}")),
    };
    let _ = env_logger::Builder::new()
        .filter_level(level)
        .format_timestamp(None)
        .target(env_logger::Target::Stderr)
        .try_init();
    log::set_max_level(level);
    Ok(())
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit status.
pub fn main_with_args<I: IntoIterator<Item = OsString>>(args: I) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    if let Err(msg) = init_logging() {
        eprintln!("error: {msg}");
        return 2;
    }
    log::info!("effective configuration: {cli:?}");
    match run(cli.command) {
        Ok(()) => 0,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            2
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn run(command: Command) -> CliResult<()> {
    match command {
        Command::Train(a) => train(a),
        Command::Predict(a) => predict(a),
        Command::Cv(a) => cv(a),
        Command::Encode(a) => encode(a),
        Command::Gradcheck(a) => gradcheck(a),
        Command::Metrics(a) => metrics(a),
    }
}

/// Builds the pipeline configuration; inconsistent flag combinations are
/// usage errors.
fn build_config(a: &ModelArgs) -> CliResult<PipelineConfig> {
    let features = a.features.unwrap_or(if a.model == ModelKind::Memnet {
        FeatureMode::Memnet
    } else {
        FeatureMode::Oh
    });
    let mut cfg = PipelineConfig::new(features, a.model, a.seed);
    cfg.max_len = a.max_len;
    let memnet_only = [
        ("--hops", a.hops.is_some()),
        ("--lr", a.lr.is_some()),
        ("--epochs", a.epochs.is_some()),
        ("--embeddings", a.embeddings.is_some()),
        ("--dim", a.dim.is_some()),
    ];
    match &mut cfg.model {
        ModelSpec::Memnet(tp) => {
            if let Some(h) = a.hops {
                tp.hops = h;
            }
            if let Some(lr) = a.lr {
                tp.learning_rate = lr;
            }
            if let Some(e) = a.epochs {
                tp.epochs = e;
            }
            if let Some(d) = a.dim {
                tp.dim = d;
            }
        }
        ModelSpec::Classic(_) => {
            if let Some((flag, _)) = memnet_only.iter().find(|(_, set)| *set) {
                return usage(format!("{flag} only applies to --model memnet"));
            }
        }
    }
    if let Some(path) = &a.stopwords {
        cfg.stoplist = Some(Arc::new(load_stoplist(path)?));
    }
    if let Err(e) = cfg.validate() {
        return usage(e.to_string());
    }
    if let Some(path) = &a.embeddings {
        let src = EmbeddingSource::read(path, None)?;
        if let ModelSpec::Memnet(tp) = &mut cfg.model {
            match a.dim {
                Some(d) if d != src.dim() => {
                    return usage(format!(
                        "--dim {d} disagrees with embedding file dimension {}",
                        src.dim()
                    ))
                }
                _ => tp.dim = src.dim(),
            }
        }
        cfg.embeddings = Some(Arc::new(src));
    }
    log::info!("pipeline: {cfg:?}");
    Ok(cfg)
}

fn write_output(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| Error::io(path, e)),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| Error::io("<stdout>", e))
        }
    }
}

fn classifier_label(cfg: &PipelineConfig) -> String {
    match cfg.features {
        FeatureMode::Memnet => cfg.kind().label().to_owned(),
        f => format!("{} + {}", cfg.kind().label(), f.name().to_uppercase()),
    }
}

fn metrics_text(m: &Metrics) -> String {
    let mut s = String::from("class     precision  recall     f1\n");
    for p in crate::eval::TABLE_CLASSES {
        let c = m.class(p);
        s.push_str(&format!(
            "{:<9} {:>9.4}  {:>6.4}  {:>6.4}\n",
            p.name(),
            c.precision,
            c.recall,
            c.f1
        ));
    }
    s.push_str(&format!("accuracy  {:.4}\n", m.accuracy));
    s
}

fn train(a: TrainArgs) -> CliResult<()> {
    let cfg = build_config(&a.model)?;
    let data = parse_dataset(&a.model.data)?;
    let (train, test) = match (&a.test, a.test_fraction) {
        (Some(path), _) => (data, Some(parse_dataset(path)?)),
        (None, Some(f)) => {
            let (tr, te) = shuffle_split(&data, f, a.model.seed)?;
            (tr, Some(te))
        }
        (None, None) => (data, None),
    };
    let fitted = cfg.fit(&train)?;
    persist::save(&fitted, &a.out)?;
    log::info!("wrote {}", a.out.display());
    if let Some(test) = test {
        let pred = fitted.predict_dataset(&test)?;
        let m = compute_metrics(&test.labels(), &pred)?;
        print!("{}", metrics_text(&m));
    }
    Ok(())
}

fn predict(a: PredictArgs) -> CliResult<()> {
    let fitted = persist::load(&a.model)?;
    let data = parse_dataset(&a.data)?;
    let labels = fitted.predict_dataset(&data)?;
    let text: String = labels.iter().map(|l| format!("{}\n", l.value())).collect();
    write_output(a.out.as_deref(), &text)?;
    Ok(())
}

fn cv(a: CvArgs) -> CliResult<()> {
    if a.k < 2 {
        return usage("--k must be at least 2");
    }
    if a.out
        .as_ref()
        .is_some_and(|p| p.extension().is_some_and(|e| e == "json"))
    {
        return usage("--out must not end in .json; the JSON report is written beside it");
    }
    let cfg = build_config(&a.model)?;
    let data = parse_dataset(&a.model.data)?;
    let report: CrossvalReport = run_crossval(&data, &cfg, &classifier_label(&cfg), a.k, a.model.seed)?;
    let text = report.to_text();
    match &a.out {
        Some(path) => {
            write_output(Some(path), &text)?;
            let json_path = path.with_extension("json");
            write_output(Some(&json_path), &report.to_json())?;
            log::info!("wrote {} and {}", path.display(), json_path.display());
        }
        None => write_output(None, &text)?,
    }
    Ok(())
}

fn encode(a: EncodeArgs) -> CliResult<()> {
    let data = parse_dataset(&a.data)?;
    let corpus = data
        .instances
        .iter()
        .map(TokenizedInstance::from_instance)
        .collect::<Result<Vec<_>>>()?;
    if corpus.is_empty() {
        return Err(Error::invalid("dataset is empty").into());
    }
    let vocab = build_vocab(&corpus, 1);
    let aspect_ids = assign_aspect_ids(&corpus);
    let tfidf = TfIdfModel::fit(&corpus, &vocab)?;
    let selected: Vec<&TokenizedInstance> = match a.index {
        Some(i) => match corpus.get(i) {
            Some(ti) => vec![ti],
            None => return usage(format!("--index {i} out of range for {} instances", corpus.len())),
        },
        None => corpus.iter().collect(),
    };
    let mut text = String::new();
    for ti in selected {
        let report = EncodingReport::new(ti, &aspect_ids, &tfidf);
        text.push_str(&serde_json::to_string(&report).expect("report serializes"));
        text.push('\n');
    }
    write_output(a.out.as_deref(), &text)?;
    Ok(())
}

fn gradcheck(a: GradcheckArgs) -> CliResult<()> {
    if !(a.eps > 0.0) {
        return usage("--eps must be positive");
    }
    if a.dim == 0 || a.hops == Some(0) {
        return usage("--dim and --hops must be at least 1");
    }
    let hops: Vec<usize> = a.hops.map_or(vec![1, 2, 3], |h| vec![h]);
    let mut worst = 0.0f64;
    let mut case = 0u64;
    for &k in &hops {
        for m in [0, 1, 5] {
            for trainable in [false, true] {
                let (p, input, gold) =
                    random_gradcheck_case(a.dim, m, k, trainable, crate::exec::sub_seed(a.seed, case));
                let err = grad_check(&p, &input, gold, a.eps);
                log::debug!("K={k} m={m} trainable={trainable}: {err:e}");
                worst = worst.max(err);
                case += 1;
            }
        }
    }
    println!("max relative error {worst:e}");
    if worst < GRADCHECK_TOLERANCE {
        Ok(())
    } else {
        Err(Error::invalid(format!("gradient check failed: {worst:e} >= {GRADCHECK_TOLERANCE:e}")).into())
    }
}

fn read_labels(path: &Path) -> Result<Vec<Polarity>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            l.trim()
                .parse::<i64>()
                .ok()
                .and_then(Polarity::from_value)
                .ok_or_else(|| Error::Parse {
                    line: i + 1,
                    message: format!("expected -1, 0 or 1, got {:?}", l.trim()),
                })
        })
        .collect()
}

fn metrics(a: MetricsArgs) -> CliResult<()> {
    let gold: Dataset = parse_dataset(&a.data)?;
    let pred = read_labels(&a.pred)?;
    let m = compute_metrics(&gold.labels(), &pred)?;
    let mut text = metrics_text(&m);
    text.push_str(&serde_json::to_string_pretty(&m).expect("metrics serialize"));
    text.push('\n');
    write_output(a.out.as_deref(), &text)?;
    Ok(())
}
