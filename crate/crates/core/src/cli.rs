//! Command-line front end.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use crate::datasets::{gen_tf, load_csv, load_features_csv, write_csv, Scaling, TargetColumn, TargetFunction};
use crate::error::{Error, Result};
use crate::evaluation::{evaluate, repeated_runs, rmse};
use crate::network::{train, HkanConfig, HkanModel};
use crate::search::{random_search, write_trial_log, SearchSpace};

#[derive(Debug, Parser)]
#[command(name = "hkan", version, about = "Hierarchical Kolmogorov-Arnold networks trained by least squares")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic benchmark as train.csv and test.csv.
    Synth(SynthArgs),
    /// Fit a network and write the model file.
    Train(TrainArgs),
    /// Write predictions for a CSV of inputs.
    Predict(PredictArgs),
    /// Score a model, or the test RMSE distribution of a config over repeated runs.
    Eval(EvalArgs),
    /// Print per-input importance scores of a model.
    Importance(ImportanceArgs),
    /// Random hyperparameter search by cross-validation.
    Search(SearchArgs),
}

#[derive(Debug, Args)]
struct SynthArgs {
    /// TF1, TF2, TF3, TF4, TF5 or TF5-5.
    #[arg(long = "fn", value_parser = parse_tf)]
    function: TargetFunction,
    #[arg(long)]
    train: usize,
    #[arg(long)]
    test: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Debug, Args)]
struct TargetArg {
    /// Target column name; defaults to the last column.
    #[arg(long)]
    target: Option<String>,
}

impl TargetArg {
    fn column(&self) -> TargetColumn {
        self.target.clone().map_or(TargetColumn::Last, TargetColumn::Name)
    }
}

#[derive(Debug, Args)]
struct TrainArgs {
    #[arg(long)]
    train: PathBuf,
    #[arg(long)]
    config: PathBuf,
    /// Overrides the seed stored in the config.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    model_out: PathBuf,
    /// Also write the training report to this file.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Fit on raw values instead of min-max scaled ones.
    #[arg(long)]
    no_normalize: bool,
    #[command(flatten)]
    target: TargetArg,
}

#[derive(Debug, Args)]
struct PredictArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Column to drop before predicting (e.g. the target of a labelled file).
    #[arg(long)]
    drop: Option<String>,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[arg(long, conflicts_with_all = ["config", "train", "test", "runs"], requires = "data")]
    model: Option<PathBuf>,
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long, requires_all = ["train", "test"])]
    config: Option<PathBuf>,
    #[arg(long)]
    train: Option<PathBuf>,
    #[arg(long)]
    test: Option<PathBuf>,
    #[arg(long, default_value_t = 10)]
    runs: usize,
    /// Base seed; run `i` uses `seed + i`. Defaults to the config seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    no_normalize: bool,
    #[command(flatten)]
    target: TargetArg,
}

#[derive(Debug, Args)]
struct ImportanceArgs {
    #[arg(long)]
    model: PathBuf,
}

#[derive(Debug, Args)]
struct SearchArgs {
    #[arg(long)]
    train: PathBuf,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 5)]
    folds: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// JSON search space; omitted fields keep their defaults.
    #[arg(long)]
    space: Option<PathBuf>,
    /// Best config, in the format `train --config` reads.
    #[arg(long)]
    out: PathBuf,
    /// Trial log as JSON lines; defaults to the `--out` path with extension `trials.jsonl`.
    #[arg(long)]
    log: Option<PathBuf>,
    #[command(flatten)]
    target: TargetArg,
}

fn parse_tf(s: &str) -> std::result::Result<TargetFunction, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn scaling(no_normalize: bool) -> Scaling {
    if no_normalize {
        Scaling::None
    } else {
        Scaling::MinMax
    }
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn load_config(path: &Path) -> Result<HkanConfig> {
    HkanConfig::from_json(&read_text(path)?)
}

fn synth(args: &SynthArgs, out: &mut dyn Write) -> Result<()> {
    let (train_ds, test_ds) = gen_tf(args.function, args.train, args.test, args.seed)?;
    fs::create_dir_all(&args.out_dir).map_err(|e| Error::io(&args.out_dir, e))?;
    let train_path = args.out_dir.join("train.csv");
    let test_path = args.out_dir.join("test.csv");
    write_csv(&train_path, &train_ds)?;
    write_csv(&test_path, &test_ds)?;
    emit(
        out,
        &json!({
            "function": args.function.name(),
            "train": train_path.display().to_string(),
            "test": test_path.display().to_string(),
            "n_train": train_ds.len(),
            "n_test": test_ds.len(),
        }),
    )
}

fn train_cmd(args: &TrainArgs, out: &mut dyn Write) -> Result<()> {
    let mut cfg = load_config(&args.config)?;
    if let Some(seed) = args.seed {
        cfg = cfg.with_seed(seed);
    }
    let ds = load_csv(&args.train, &args.target.column())?;
    let start = Instant::now();
    let model = train(&ds, &cfg, scaling(args.no_normalize))?;
    let wall_time_s = start.elapsed().as_secs_f64();
    let train_rmse = evaluate(&model, &ds)?;
    model.save(&args.model_out)?;
    let report = json!({
        "train_rmse": train_rmse,
        "n_train": ds.len(),
        "input_dim": model.input_dim,
        "widths": model.widths(),
        "wall_time_s": wall_time_s,
        "model": args.model_out.display().to_string(),
    });
    if let Some(path) = &args.report {
        write_text(path, &serde_json::to_string_pretty(&report)?)?;
    }
    emit(out, &report)
}

fn predict_cmd(args: &PredictArgs, out: &mut dyn Write) -> Result<()> {
    let model = HkanModel::load(&args.model)?;
    let (x, _) = load_features_csv(&args.data, args.drop.as_deref())?;
    let pred = model.predict(&x)?;
    let file = fs::File::create(&args.out).map_err(|e| Error::io(&args.out, e))?;
    let mut writer = csv::Writer::from_writer(file);
    writer.write_record(["prediction"])?;
    for p in &pred {
        writer.write_record([p.to_string()])?;
    }
    writer.flush().map_err(|e| Error::io(&args.out, e))?;
    emit(out, &json!({ "predictions": pred.len(), "out": args.out.display().to_string() }))
}

fn eval_cmd(args: &EvalArgs, out: &mut dyn Write) -> Result<()> {
    let target = args.target.column();
    if let Some(model_path) = &args.model {
        let data = args.data.as_ref().expect("clap enforces --data");
        let model = HkanModel::load(model_path)?;
        let ds = load_csv(data, &target)?;
        let pred = model.predict(&ds.x)?;
        return emit(out, &json!({ "rmse": rmse(&ds.y, &pred)?, "n": ds.len() }));
    }
    let (Some(config), Some(train_path), Some(test_path)) = (&args.config, &args.train, &args.test) else {
        return Err(Error::InvalidConfig(
            "eval needs either --model and --data, or --config, --train and --test".into(),
        ));
    };
    let mut cfg = load_config(config)?;
    if let Some(seed) = args.seed {
        cfg = cfg.with_seed(seed);
    }
    let train_ds = load_csv(train_path, &target)?;
    let test_ds = load_csv(test_path, &target)?;
    let stats = repeated_runs(&cfg, &train_ds, &test_ds, args.runs, scaling(args.no_normalize))?;
    writeln!(out, "{}", stats.to_json()?).map_err(|e| Error::io("<stdout>", e))
}

fn importance_cmd(args: &ImportanceArgs, out: &mut dyn Write) -> Result<()> {
    let model = HkanModel::load(&args.model)?;
    let rows: Vec<_> = model
        .input_importance()
        .into_iter()
        .enumerate()
        .map(|(input, importance)| json!({ "input": input, "importance": importance }))
        .collect();
    emit(out, &serde_json::Value::Array(rows))
}

fn search_cmd(args: &SearchArgs, out: &mut dyn Write) -> Result<()> {
    let space = match &args.space {
        Some(path) => SearchSpace::from_json(&read_text(path)?)?,
        None => SearchSpace::default(),
    };
    let ds = load_csv(&args.train, &args.target.column())?;
    let result = random_search(&space, &ds, args.trials, args.folds, args.seed)?;
    let log_path = args.log.clone().unwrap_or_else(|| args.out.with_extension("trials.jsonl"));
    write_text(&args.out, &result.best.to_json()?)?;
    write_trial_log(&log_path, &result.log)?;
    emit(
        out,
        &json!({
            "best_cv_rmse": result.best_cv_rmse,
            "baseline_rmse": result.baseline_rmse,
            "trials": result.log.len(),
            "config": args.out.display().to_string(),
            "log": log_path.display().to_string(),
        }),
    )
}

fn emit(out: &mut dyn Write, value: &serde_json::Value) -> Result<()> {
    writeln!(out, "{}", serde_json::to_string_pretty(value)?).map_err(|e| Error::io("<stdout>", e))
}

fn configure_threads() -> std::result::Result<(), String> {
    let Ok(raw) = std::env::var("HKAN_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n >= 1)
        .ok_or_else(|| format!("HKAN_THREADS must be a positive integer, got '{raw}'"))?;
    // A pool built earlier in the same process keeps its size.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

/// Runs one command, writing results to `out` and diagnostics to `err`.
/// Returns the process exit code: 0 success, 1 usage, 2 data, 3 numeric.
pub fn run_cli_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    0
                }
                _ => {
                    let _ = write!(err, "{}", e.render());
                    1
                }
            };
        }
    };
    if let Err(msg) = configure_threads() {
        let _ = writeln!(err, "error: {msg}");
        return 1;
    }
    let result = match &cli.command {
        Command::Synth(a) => synth(a, out),
        Command::Train(a) => train_cmd(a, out),
        Command::Predict(a) => predict_cmd(a, out),
        Command::Eval(a) => eval_cmd(a, out),
        Command::Importance(a) => importance_cmd(a, out),
        Command::Search(a) => search_cmd(a, out),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_cli_with(argv, &mut std::io::stdout().lock(), &mut std::io::stderr().lock())
}
