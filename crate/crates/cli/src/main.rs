//! `sbss` command-line front end.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sbss::{
    load_csv, normalize_minmax, pair_reports, pairwise_matrix, run_experiment, score_comparisons,
    wilcoxon_signed_rank, ComparisonVerdict, Dataset64, DatasetSummary, Error, ErrorClass,
    EvaluationReport, ExperimentConfig, GroupCriterion, KnnConfig, LabelColumn, Pairing,
    RunManifest, SimilarityKind, SplitConfig, Strategy,
};
use serde::Serialize;

const EXIT_USAGE: u8 = 1;
const EXIT_DATA: u8 = 2;
const EXIT_COMPUTATION: u8 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "sbss",
    version,
    about = "Similarity-based stratified K-fold splitting and evaluation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print sample count, feature count, label counts and imbalance as JSON.
    Imbalance(InputArgs),
    /// Split a dataset into K folds and write the fold file.
    Split(SplitArgs),
    /// Run repeated K-fold cross-validation with a KNN classifier.
    Evaluate(EvaluateArgs),
    /// Wilcoxon signed-rank comparison of two evaluation reports.
    Compare(CompareArgs),
    /// Win/tie/loss table over saved comparison verdicts.
    Score(ScoreArgs),
}

#[derive(Args, Debug)]
struct InputArgs {
    /// CSV file with numeric features and one label column.
    input: PathBuf,
    /// Label column, by header name or zero-based index. Defaults to the last column.
    #[arg(long)]
    label_column: Option<LabelColumn>,
    /// The first row is data, not a header.
    #[arg(long)]
    no_header: bool,
}

#[derive(Args, Debug)]
struct SplitFlags {
    /// Number of folds.
    #[arg(long = "k", default_value_t = 10)]
    k: usize,
    /// sbss or stratified.
    #[arg(long, default_value_t = Strategy::Sbss)]
    strategy: Strategy,
    /// chebyshev, cityblock, euclidean, cosine or correlation.
    #[arg(long, default_value_t = SimilarityKind::Correlation)]
    similarity: SimilarityKind,
    /// How SBSS grows a group: pivot or picked-set.
    #[arg(long, default_value_t = GroupCriterion::Pivot)]
    group_criterion: GroupCriterion,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Use features as given instead of min-max scaling them to [0, 1].
    #[arg(long)]
    no_normalize: bool,
}

#[derive(Args, Debug)]
struct SplitArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    flags: SplitFlags,
    /// Write the fold file here instead of stdout.
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Also write the distance matrix (binary) to this path and its summary to `<path>.json`.
    #[arg(long)]
    dump_matrix: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct EvaluateArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    flags: SplitFlags,
    #[arg(long, default_value_t = 10)]
    repetitions: usize,
    /// Neighbors used by the KNN classifier.
    #[arg(long = "knn-k", default_value_t = 5)]
    knn_k: usize,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CompareArgs {
    report_a: PathBuf,
    report_b: PathBuf,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Pair per-repetition means (repetition) or every fold score (fold).
    #[arg(long, default_value = "repetition")]
    pairing: Pairing,
    /// Write the verdict JSON here instead of stdout.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ScoreArgs {
    /// Verdict files written by `sbss compare --output`.
    #[arg(required = true)]
    verdicts: Vec<PathBuf>,
    /// Write the table as JSON here; the text rendering goes to stdout.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(EXIT_USAGE);
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e.class() {
                ErrorClass::Usage => EXIT_USAGE,
                ErrorClass::Data => EXIT_DATA,
                ErrorClass::Computation => EXIT_COMPUTATION,
            })
        }
    }
}

fn configure_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var("SBSS_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .map_err(|_| format!("SBSS_THREADS must be a non-negative integer, got {raw:?}"))?;
    // 0 leaves the choice to rayon
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn run(command: Command) -> sbss::Result<()> {
    match command {
        Command::Imbalance(args) => cmd_imbalance(&args),
        Command::Split(args) => cmd_split(&args),
        Command::Evaluate(args) => cmd_evaluate(&args),
        Command::Compare(args) => cmd_compare(&args),
        Command::Score(args) => cmd_score(&args),
    }
}

fn load(args: &InputArgs) -> sbss::Result<Dataset64> {
    load_csv(
        &args.input,
        &args.label_column.clone().unwrap_or_default(),
        !args.no_header,
    )
}

fn load_for_split(args: &InputArgs, flags: &SplitFlags) -> sbss::Result<Dataset64> {
    let ds = load(args)?;
    Ok(if flags.no_normalize {
        ds
    } else {
        normalize_minmax(&ds)
    })
}

fn manifest(command: &str, input: &InputArgs, ds: &Dataset64) -> RunManifest {
    let label = match &input.label_column {
        Some(LabelColumn::Name(s)) => s.clone(),
        Some(other) => other.to_string(),
        None => "last".to_string(),
    };
    RunManifest::new(command)
        .flag("input", input.input.display())
        .flag("label-column", label)
        .flag("header", !input.no_header)
        .fingerprint(ds.fingerprint())
        .timestamp(std::env::var("SOURCE_DATE_EPOCH").ok())
}

fn with_split_flags(m: RunManifest, f: &SplitFlags) -> RunManifest {
    m.flag("k", f.k)
        .flag("strategy", f.strategy)
        .flag("similarity", f.similarity)
        .flag("group-criterion", f.group_criterion)
        .flag("seed", f.seed)
        .flag("normalize", !f.no_normalize)
}

fn cmd_imbalance(args: &InputArgs) -> sbss::Result<()> {
    let summary: DatasetSummary = load(args)?.summary()?;
    emit_json(&summary, None)
}

fn cmd_split(args: &SplitArgs) -> sbss::Result<()> {
    let f = &args.flags;
    let ds = load_for_split(&args.input, f)?;
    let cfg =
        SplitConfig::new(f.k, f.strategy, f.similarity, f.seed).with_criterion(f.group_criterion);
    cfg.validate(ds.n_samples())?;
    let matrix = match f.strategy {
        Strategy::Sbss => Some(pairwise_matrix(f.similarity, &ds)?),
        Strategy::Stratified => None,
    };
    if let (Some(path), Some(m)) = (&args.dump_matrix, &matrix) {
        let file = fs::File::create(path).map_err(|e| io_error(path, e))?;
        let mut out = std::io::BufWriter::new(file);
        m.write_binary(&mut out)
            .and_then(|_| out.flush())
            .map_err(|e| io_error(path, e))?;
        let mut summary_path = path.clone().into_os_string();
        summary_path.push(".json");
        emit_json(&m.summary(), Some(Path::new(&summary_path)))?;
    }
    let fa = sbss::splitter::split(&ds, matrix.as_ref(), &cfg)?;
    let mut file = fa.to_fold_file(ds.name());
    let mut m = with_split_flags(manifest("split", &args.input, &ds), f);
    if let Some(path) = &args.dump_matrix {
        m = m.flag("dump-matrix", path.display());
    }
    file.manifest = Some(m);
    emit_json(&file, args.output.as_deref())
}

fn cmd_evaluate(args: &EvaluateArgs) -> sbss::Result<()> {
    let f = &args.flags;
    let ds = load_for_split(&args.input, f)?;
    let cfg = ExperimentConfig {
        k: f.k,
        strategy: f.strategy,
        kind: f.similarity,
        repetitions: args.repetitions,
        base_seed: f.seed,
        knn: KnnConfig {
            n_neighbors: args.knn_k,
        },
        criterion: f.group_criterion,
    };
    // settings that cannot work fail here, before the distance matrix is built
    cfg.validate(&ds)?;
    let mut report: EvaluationReport = run_experiment(&ds, &cfg)?;
    report.manifest = Some(
        with_split_flags(manifest("evaluate", &args.input, &ds), f)
            .flag("repetitions", args.repetitions)
            .flag("knn-k", args.knn_k),
    );
    emit_json(&report, args.output.as_deref())
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> sbss::Result<T> {
    let bytes = fs::read(path).map_err(|e| io_error(path, e))?;
    Ok(serde_json::from_slice(&bytes)?)
}

fn cmd_compare(args: &CompareArgs) -> sbss::Result<()> {
    let a: EvaluationReport = read_json(&args.report_a)?;
    let b: EvaluationReport = read_json(&args.report_b)?;
    let series = pair_reports(&a, &b, args.pairing)?;
    let verdict = wilcoxon_signed_rank(&series, args.alpha)?;
    emit_json(&verdict, args.output.as_deref())?;
    println!("{}", verdict.summary_line());
    Ok(())
}

fn cmd_score(args: &ScoreArgs) -> sbss::Result<()> {
    let verdicts = args
        .verdicts
        .iter()
        .map(|p| read_json::<ComparisonVerdict>(p))
        .collect::<sbss::Result<Vec<_>>>()?;
    let table = score_comparisons(&verdicts)?;
    if let Some(path) = &args.output {
        emit_json(&table, Some(path))?;
    }
    print!("{}", table.render_text());
    Ok(())
}

fn io_error(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Pretty JSON plus a trailing newline, to `path` or stdout.
fn emit_json<T: Serialize>(value: &T, path: Option<&Path>) -> sbss::Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    match path {
        Some(p) => fs::write(p, text).map_err(|e| io_error(p, e)),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| io_error(Path::new("<stdout>"), e)),
    }
}
