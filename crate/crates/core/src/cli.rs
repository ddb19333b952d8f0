//! Command-line front end.
//!
//! Each subcommand writes a run manifest (JSON) next to its primary output
//! recording the argument vector, the resolved configuration, seeds and the
//! SHA-256 of every input and output, so that `acnet replay` can re-run it and
//! confirm that the outputs are reproduced byte for byte.
//!
//! Exit codes: 0 success, 2 usage, 3 data, 4 numeric degeneracy, 5
//! convergence.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::copula::{ConditioningQuery, CopulaModel, Generator, Rectangle};
use crate::data::{self, CensoredDataset, Dataset};
use crate::error::Error;
use crate::families::{self, FamilyKind, ParametricFamily};
use crate::io::{format_f64, ModelFile};
use crate::network::GeneratorNetwork;
use crate::training::{self, LossKind, Reduction, TrainConfig, TrainData, TrainStatus};

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "ACNET_THREADS";

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_NUMERIC: i32 = 4;
pub const EXIT_CONVERGENCE: i32 = 5;

#[derive(Debug, Parser)]
#[command(name = "acnet", version, about = "Learned Archimedean copulas")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sample train and test sets from a parametric family.
    Synth(SynthArgs),
    /// Fit a generator network (or a parametric family) to data.
    Fit(FitArgs),
    /// Print the mean negative log-likelihood of a data set.
    Eval(EvalArgs),
    /// Answer a single probabilistic query.
    Query(QueryArgs),
    /// Draw samples from a model.
    Sample(SampleArgs),
    /// Evaluate the cdf or log density on a bivariate grid.
    Grid(GridArgs),
    /// Re-run a recorded command and verify its outputs.
    Replay(ReplayArgs),
}

#[derive(Debug, Args, Serialize)]
struct SynthArgs {
    #[arg(long)]
    family: String,
    #[arg(long, allow_hyphen_values = true)]
    theta: f64,
    #[arg(long, default_value_t = 2000)]
    n_train: usize,
    #[arg(long, default_value_t = 1000)]
    n_test: usize,
    #[arg(long, default_value_t = 2)]
    dim: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory for train.csv and test.csv.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum LossArg {
    Pointwise,
    Censored,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum ReductionArg {
    Mean,
    Sum,
}

#[derive(Debug, Args, Serialize)]
struct FitArgs {
    #[arg(long)]
    train: PathBuf,
    #[arg(long)]
    test: Option<PathBuf>,
    /// Split the training file at this train fraction when no test file is given.
    #[arg(long)]
    split: Option<f64>,
    /// Hidden widths, comma separated.
    #[arg(long, default_value = "10,10")]
    widths: String,
    /// Fit this parametric family instead of a network.
    #[arg(long)]
    family: Option<String>,
    /// Continue from an existing model file.
    #[arg(long)]
    init: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-5)]
    lr: f64,
    #[arg(long, default_value_t = 0.9)]
    momentum: f64,
    #[arg(long, default_value_t = 200)]
    batch: usize,
    #[arg(long, default_value_t = 40_000)]
    epochs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "pointwise")]
    loss: LossArg,
    #[arg(long, value_enum, default_value = "sum")]
    reduction: ReductionArg,
    #[arg(long)]
    grad_clip: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    weight_decay: f64,
    #[arg(long, default_value_t = 100)]
    test_interval: usize,
    /// Censor point data at this noise level before censored training.
    #[arg(long)]
    censor: Option<f64>,
    /// Append floor(n * rate) uniform points to the training set.
    #[arg(long, default_value_t = 0.0)]
    outlier_rate: f64,
    /// Coordinates to flip (u -> 1 - u), comma separated.
    #[arg(long)]
    flip: Option<String>,
    #[arg(long)]
    out: PathBuf,
    /// Telemetry CSV; defaults to the model path with `.telemetry.csv`.
    #[arg(long)]
    telemetry: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct EvalArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    data: PathBuf,
    #[arg(long, value_enum, default_value = "pointwise")]
    loss: LossArg,
    #[arg(long)]
    manifest: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum QueryKind {
    Cdf,
    Logpdf,
    Condcdf,
    Condpdf,
    Rect,
}

#[derive(Debug, Args, Serialize)]
struct QueryArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long, value_enum)]
    kind: QueryKind,
    /// Point coordinates, comma separated (cdf, logpdf, condcdf, condpdf).
    #[arg(long)]
    point: Option<String>,
    /// Observed coordinate indices for conditional queries, comma separated.
    #[arg(long)]
    observed: Option<String>,
    /// Rectangle lower corner.
    #[arg(long)]
    lower: Option<String>,
    /// Rectangle upper corner.
    #[arg(long)]
    upper: Option<String>,
    #[arg(long)]
    manifest: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct SampleArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    n: usize,
    /// Defaults to the dimension recorded in the model, else 2.
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum GridKind {
    Cdf,
    Logpdf,
}

#[derive(Debug, Args, Serialize)]
struct GridArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long, value_enum)]
    kind: GridKind,
    #[arg(long, default_value_t = 50)]
    resolution: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
struct ReplayArgs {
    manifest: PathBuf,
}

/// Failure of a command, already classified by exit code.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn usage(msg: impl Into<String>) -> Self {
        Failure { code: EXIT_USAGE, message: msg.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure { code: exit_code(&e), message: e.to_string() }
    }
}

/// Exit code for an error class.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Domain(_) | Error::Structural(_) | Error::Capacity { .. } | Error::Unsupported(_) => EXIT_USAGE,
        Error::Data(_) | Error::Io(_) | Error::Json(_) | Error::Csv(_) => EXIT_DATA,
        Error::NumericDegeneracy(_) | Error::InvariantViolation(_) => EXIT_NUMERIC,
        Error::Convergence { .. } | Error::Fit(_) => EXIT_CONVERGENCE,
    }
}

type CmdResult<T> = std::result::Result<T, Failure>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileRecord {
    pub path: PathBuf,
    pub sha256: String,
    /// Primary outputs must be reproduced exactly on replay.
    pub primary: bool,
}

/// Everything needed to reproduce one invocation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub argv: Vec<String>,
    pub working_dir: PathBuf,
    pub config: serde_json::Value,
    pub seeds: Vec<u64>,
    pub inputs: Vec<FileRecord>,
    pub outputs: Vec<FileRecord>,
    /// Value printed to standard output, for commands that print one.
    pub result: Option<String>,
    /// Set when training stopped early and the saved model is the last good
    /// state rather than the final one.
    pub partial: bool,
    pub exit_code: i32,
    pub wall_clock_seconds: f64,
}

impl RunManifest {
    pub fn load(path: &Path) -> crate::Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }
}

fn sha256_file(path: &Path) -> crate::Result<String> {
    let bytes = std::fs::read(path)?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

fn record(path: &Path, primary: bool) -> CmdResult<FileRecord> {
    Ok(FileRecord { path: path.to_path_buf(), sha256: sha256_file(path)?, primary })
}

fn manifest_path_for(output: &Path) -> PathBuf {
    let mut name = output.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".manifest.json");
    output.with_file_name(name)
}

/// Outcome of a command body, before the manifest is written.
struct Outcome {
    seeds: Vec<u64>,
    inputs: Vec<FileRecord>,
    outputs: Vec<FileRecord>,
    result: Option<String>,
    partial: bool,
    code: i32,
    manifest: PathBuf,
}

fn parse_list<T: std::str::FromStr>(text: &str, what: &str) -> CmdResult<Vec<T>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|tok| tok.parse::<T>().map_err(|_| Failure::usage(format!("malformed {what}: bad token '{tok}'"))))
        .collect()
}

fn load_model(path: &Path) -> CmdResult<ModelFile> {
    ModelFile::load(path).map_err(|e| match e {
        Error::Io(_) => Failure { code: EXIT_DATA, message: format!("cannot read model {}: {e}", path.display()) },
        other => Failure { code: EXIT_USAGE, message: format!("invalid model {}: {other}", path.display()) },
    })
}

/// Load point data, ranking it first when it is not already inside (0, 1).
fn load_points(path: &Path) -> CmdResult<Dataset> {
    let ds = Dataset::load(path)?;
    if ds.is_normalized() {
        Ok(ds)
    } else {
        Ok(data::rank_normalize(&ds)?)
    }
}

fn check_dims(model: &ModelFile, dim: usize) -> CmdResult<()> {
    match model.dimension {
        Some(d) if d != dim => Err(Failure::usage(format!("model was fitted in dimension {d}, data has dimension {dim}"))),
        _ => Ok(()),
    }
}

fn cmd_synth(a: &SynthArgs) -> CmdResult<Outcome> {
    let kind: FamilyKind = a.family.parse().map_err(|e: Error| Failure::usage(e.to_string()))?;
    let family = ParametricFamily::new(kind, a.theta).map_err(|e| Failure::usage(e.to_string()))?;
    std::fs::create_dir_all(&a.out).map_err(Error::from)?;
    let train = family.sample(a.dim, a.n_train, a.seed)?;
    // The test stream is keyed off the train seed so one seed fixes both.
    let test = family.sample(a.dim, a.n_test, a.seed.wrapping_add(0x9e37_79b9_7f4a_7c15))?;
    let train_path = a.out.join("train.csv");
    let test_path = a.out.join("test.csv");
    train.save(&train_path)?;
    test.save(&test_path)?;
    Ok(Outcome {
        seeds: vec![a.seed],
        inputs: vec![],
        outputs: vec![record(&train_path, true)?, record(&test_path, true)?],
        result: None,
        partial: false,
        code: EXIT_OK,
        manifest: a.out.join("synth.manifest.json"),
    })
}

fn cmd_fit(a: &FitArgs) -> CmdResult<Outcome> {
    let mut inputs = vec![record(&a.train, false)?];
    let loss = match a.loss {
        LossArg::Pointwise => LossKind::Pointwise,
        LossArg::Censored => LossKind::Censored,
    };
    let reduction = match a.reduction {
        ReductionArg::Mean => Reduction::Mean,
        ReductionArg::Sum => Reduction::Sum,
    };
    let flip: Vec<usize> = match &a.flip {
        Some(s) => parse_list(s, "--flip")?,
        None => Vec::new(),
    };
    let telemetry = a.telemetry.clone().unwrap_or_else(|| a.out.with_extension("telemetry.csv"));
    if a.init.is_none() && telemetry.exists() {
        std::fs::remove_file(&telemetry).map_err(Error::from)?;
    }
    let cfg = TrainConfig {
        learning_rate: a.lr,
        momentum: a.momentum,
        batch_size: a.batch,
        epochs: a.epochs,
        seed: a.seed,
        loss,
        reduction,
        grad_clip: a.grad_clip,
        weight_decay: a.weight_decay,
        test_interval: a.test_interval,
        telemetry: Some(telemetry.clone()),
    };
    cfg.validate().map_err(|e| Failure::usage(e.to_string()))?;

    let censored_input = loss == LossKind::Censored && a.censor.is_none();
    let prepare = |ds: Dataset, outliers: bool| -> CmdResult<Dataset> {
        let ds = data::flip(&ds, &flip).map_err(|e| Failure::usage(e.to_string()))?;
        if outliers && a.outlier_rate > 0.0 {
            Ok(data::inject_outliers(&ds, a.outlier_rate, a.seed)?)
        } else {
            Ok(ds)
        }
    };

    let mut train_pts = None;
    let mut test_pts = None;
    let mut train_cens = None;
    let mut test_cens = None;
    if censored_input {
        train_cens = Some(CensoredDataset::load(&a.train)?);
        if let Some(t) = &a.test {
            inputs.push(record(t, false)?);
            test_cens = Some(CensoredDataset::load(t)?);
        }
    } else {
        let (train, test) = match (&a.test, a.split) {
            (Some(t), _) => {
                inputs.push(record(t, false)?);
                (load_points(&a.train)?, Some(load_points(t)?))
            }
            (None, Some(ratio)) => {
                let (tr, te) = data::split(&Dataset::load(&a.train)?, ratio, a.seed)?;
                (tr, Some(te))
            }
            (None, None) => (load_points(&a.train)?, None),
        };
        let train = prepare(train, true)?;
        let test = test.map(|t| prepare(t, false)).transpose()?;
        if let (LossKind::Censored, Some(lambda)) = (loss, a.censor) {
            train_cens = Some(data::censor(&train, lambda, a.seed).map_err(|e| Failure::usage(e.to_string()))?);
            test_cens = test.as_ref().map(|t| data::censor(t, lambda, a.seed.wrapping_add(1))).transpose()?;
        }
        train_pts = Some(train);
        test_pts = test;
    }

    let (train_data, test_data): (TrainData<'_>, Option<TrainData<'_>>) = match loss {
        LossKind::Pointwise => (
            TrainData::Points(train_pts.as_ref().expect("point data loaded")),
            test_pts.as_ref().map(TrainData::Points),
        ),
        LossKind::Censored => (
            TrainData::Censored(train_cens.as_ref().expect("censored data loaded")),
            test_cens.as_ref().map(TrainData::Censored),
        ),
    };
    let dim = train_data.dim();

    let mut partial = false;
    let mut code = EXIT_OK;
    let mut outputs = Vec::new();
    let model = if let Some(name) = &a.family {
        let kind: FamilyKind = name.parse().map_err(|e: Error| Failure::usage(e.to_string()))?;
        let train = train_pts.as_ref().ok_or_else(|| Failure::usage("parametric fits use pointwise data"))?;
        let fitted = families::fit_parametric(kind, train, test_pts.as_ref(), &cfg)?;
        if let Some(t) = fitted.test_nll {
            println!("test_nll {}", fmt12(t));
        }
        ModelFile { generator: fitted.family.into(), dimension: Some(dim) }
    } else {
        let net = match &a.init {
            Some(path) => {
                inputs.push(record(path, false)?);
                match load_model(path)?.generator {
                    Generator::Network(n) => n,
                    Generator::Family(_) => return Err(Failure::usage("--init needs a network model")),
                }
            }
            None => {
                let widths: Vec<usize> = parse_list(&a.widths, "--widths")?;
                GeneratorNetwork::init(&widths, a.seed).map_err(|e| Failure::usage(e.to_string()))?
            }
        };
        let report = training::fit(&net, train_data, test_data, &cfg)?;
        if let TrainStatus::Aborted { epoch, reason } = &report.status {
            eprintln!("training aborted at epoch {epoch}: {reason}; saving last good weights");
            partial = true;
            code = EXIT_NUMERIC;
        }
        if let Some(t) = report.final_test_nll {
            println!("test_nll {}", fmt12(t));
        }
        outputs.push(record(&telemetry, false)?);
        ModelFile { generator: report.network.into(), dimension: Some(dim) }
    };
    model.save(&a.out)?;
    outputs.insert(0, record(&a.out, true)?);
    Ok(Outcome {
        seeds: vec![a.seed],
        inputs,
        outputs,
        result: None,
        partial,
        code,
        manifest: manifest_path_for(&a.out),
    })
}

fn fmt12(v: f64) -> String {
    format!("{v:.11e}")
}

fn nll_string(v: f64) -> String {
    // 12 significant digits in plain notation.
    let text = format!("{}", format!("{v:.11e}").parse::<f64>().unwrap_or(v));
    if text == "-0" {
        "0".into()
    } else {
        text
    }
}

fn cmd_eval(a: &EvalArgs) -> CmdResult<Outcome> {
    let model = load_model(&a.model)?;
    let value = match a.loss {
        LossArg::Pointwise => {
            let ds = load_points(&a.data)?;
            check_dims(&model, ds.dim())?;
            let copula = CopulaModel::new(ds.dim(), model.generator.clone()).map_err(|e| Failure::usage(e.to_string()))?;
            match &model.generator {
                Generator::Network(net) => training::evaluate(net, TrainData::Points(&ds))?,
                Generator::Family(_) => families::mean_nll(&copula, &ds)?,
            }
        }
        LossArg::Censored => {
            let ds = CensoredDataset::load(&a.data)?;
            check_dims(&model, ds.dim())?;
            let copula = CopulaModel::new(ds.dim(), model.generator.clone()).map_err(|e| Failure::usage(e.to_string()))?;
            let mut total = 0.0;
            for i in 0..ds.len() {
                let p = copula.rectangle_prob(&ds.rectangle(i)).map_err(|e| e.at_point(i))?;
                if !(p > 0.0) {
                    return Err(Error::Data(format!("point {i}: rectangle has probability {p}")).into());
                }
                total -= p.ln();
            }
            total / ds.len() as f64
        }
    };
    let text = nll_string(value);
    println!("{text}");
    Ok(Outcome {
        seeds: vec![],
        inputs: vec![record(&a.model, false)?, record(&a.data, false)?],
        outputs: vec![],
        result: Some(text),
        partial: false,
        code: EXIT_OK,
        manifest: a.manifest.clone().unwrap_or_else(|| manifest_path_for(&a.data.with_extension("eval"))),
    })
}

fn query_value(a: &QueryArgs, model: &ModelFile) -> CmdResult<f64> {
    let point = |what: &str| -> CmdResult<Vec<f64>> {
        let text = a.point.as_deref().ok_or_else(|| Failure::usage(format!("{what} needs --point")))?;
        parse_list(text, "--point")
    };
    let copula = |dim: usize| -> CmdResult<CopulaModel> {
        check_dims(model, dim)?;
        CopulaModel::new(dim, model.generator.clone()).map_err(|e| Failure::usage(e.to_string()))
    };
    let value = match a.kind {
        QueryKind::Cdf => {
            let u = point("cdf")?;
            copula(u.len())?.cdf(&u)
        }
        QueryKind::Logpdf => {
            let u = point("logpdf")?;
            copula(u.len())?.log_density(&u)
        }
        QueryKind::Condcdf | QueryKind::Condpdf => {
            let u = point("conditional query")?;
            let observed: Vec<usize> = parse_list(
                a.observed.as_deref().ok_or_else(|| Failure::usage("conditional query needs --observed"))?,
                "--observed",
            )?;
            if let Some(&i) = observed.iter().find(|&&i| i >= u.len()) {
                return Err(Failure::usage(format!("malformed --observed: bad token '{i}'")));
            }
            let q = ConditioningQuery {
                observed_values: observed.iter().map(|&i| u[i]).collect(),
                query_values: (0..u.len()).filter(|i| !observed.contains(i)).map(|i| u[i]).collect(),
                observed,
            };
            let m = copula(u.len())?;
            if matches!(a.kind, QueryKind::Condcdf) {
                m.conditional_cdf(&q)
            } else {
                m.conditional_log_density(&q).map(f64::exp)
            }
        }
        QueryKind::Rect => {
            let lower = parse_list(a.lower.as_deref().ok_or_else(|| Failure::usage("rect needs --lower"))?, "--lower")?;
            let upper = parse_list(a.upper.as_deref().ok_or_else(|| Failure::usage("rect needs --upper"))?, "--upper")?;
            let r = Rectangle::new(lower, upper).map_err(|e| Failure::usage(e.to_string()))?;
            copula(r.dim())?.rectangle_prob(&r)
        }
    };
    value.map_err(|e| match e {
        Error::Domain(_) | Error::Structural(_) => Failure::usage(e.to_string()),
        other => other.into(),
    })
}

fn cmd_query(a: &QueryArgs) -> CmdResult<Outcome> {
    let model = load_model(&a.model)?;
    let value = query_value(a, &model)?;
    let text = format_f64(value);
    println!("{text}");
    Ok(Outcome {
        seeds: vec![],
        inputs: vec![record(&a.model, false)?],
        outputs: vec![],
        result: Some(text),
        partial: false,
        code: EXIT_OK,
        manifest: a.manifest.clone().unwrap_or_else(|| manifest_path_for(&a.model.with_extension("query"))),
    })
}

fn cmd_sample(a: &SampleArgs) -> CmdResult<Outcome> {
    let model = load_model(&a.model)?;
    let dim = a.dim.or(model.dimension).unwrap_or(2);
    let ds = match &model.generator {
        Generator::Network(net) => crate::sampling::sample_u(net, dim, a.n, a.seed),
        Generator::Family(f) => f.sample(dim, a.n, a.seed),
    }
    .map_err(|e| match e {
        Error::Domain(_) | Error::Unsupported(_) => Failure::usage(e.to_string()),
        other => other.into(),
    })?;
    ds.save(&a.out)?;
    Ok(Outcome {
        seeds: vec![a.seed],
        inputs: vec![record(&a.model, false)?],
        outputs: vec![record(&a.out, true)?],
        result: None,
        partial: false,
        code: EXIT_OK,
        manifest: manifest_path_for(&a.out),
    })
}

/// Interior grid over `[0.01, 0.99]`.
fn grid_levels(resolution: usize) -> Vec<f64> {
    if resolution == 1 {
        return vec![0.5];
    }
    (0..resolution).map(|i| 0.01 + 0.98 * i as f64 / (resolution - 1) as f64).collect()
}

fn cmd_grid(a: &GridArgs) -> CmdResult<Outcome> {
    let model = load_model(&a.model)?;
    if let Some(d) = model.dimension.filter(|&d| d != 2) {
        return Err(Failure::usage(format!("grid output needs a bivariate model, this one has dimension {d}")));
    }
    if a.resolution == 0 {
        return Err(Failure::usage("--resolution must be positive"));
    }
    let copula = CopulaModel::new(2, model.generator.clone()).map_err(|e| Failure::usage(e.to_string()))?;
    let levels = grid_levels(a.resolution);
    let mut values = Vec::with_capacity(3 * levels.len() * levels.len());
    for &u in &levels {
        for &v in &levels {
            let z = match a.kind {
                GridKind::Cdf => copula.cdf(&[u, v])?,
                GridKind::Logpdf => copula.log_density(&[u, v])?,
            };
            values.extend([u, v, z]);
        }
    }
    let file = std::fs::File::create(&a.out).map_err(Error::from)?;
    data::write_matrix(std::io::BufWriter::new(file), 3, &values)?;
    Ok(Outcome {
        seeds: vec![],
        inputs: vec![record(&a.model, false)?],
        outputs: vec![record(&a.out, true)?],
        result: None,
        partial: false,
        code: EXIT_OK,
        manifest: manifest_path_for(&a.out),
    })
}

fn cmd_replay(a: &ReplayArgs) -> CmdResult<i32> {
    let manifest = RunManifest::load(&a.manifest)?;
    if manifest.command == "replay" {
        return Err(Failure::usage("cannot replay a replay"));
    }
    let cwd = std::env::current_dir().map_err(Error::from)?;
    std::env::set_current_dir(&manifest.working_dir).map_err(Error::from)?;
    for input in &manifest.inputs {
        let now = sha256_file(&input.path)?;
        if now != input.sha256 {
            std::env::set_current_dir(&cwd).map_err(Error::from)?;
            return Err(Failure {
                code: EXIT_DATA,
                message: format!("input {} changed since the recorded run", input.path.display()),
            });
        }
    }
    let code = run_inner(manifest.argv.iter().map(OsString::from));
    let mut mismatches = Vec::new();
    for out in manifest.outputs.iter().filter(|o| o.primary) {
        match sha256_file(&out.path) {
            Ok(h) if h == out.sha256 => {}
            _ => mismatches.push(out.path.display().to_string()),
        }
    }
    std::env::set_current_dir(&cwd).map_err(Error::from)?;
    if code != manifest.exit_code {
        return Err(Failure {
            code: EXIT_NUMERIC,
            message: format!("replay exited with {code}, recorded run exited with {}", manifest.exit_code),
        });
    }
    if !mismatches.is_empty() {
        return Err(Failure {
            code: EXIT_NUMERIC,
            message: format!("replayed outputs differ: {}", mismatches.join(", ")),
        });
    }
    println!("replay reproduced {} output(s)", manifest.outputs.iter().filter(|o| o.primary).count());
    Ok(EXIT_OK)
}

fn configure_threads() {
    if let Some(n) = std::env::var(THREADS_ENV).ok().and_then(|v| v.parse::<usize>().ok()) {
        // Fails only when the pool already exists, e.g. during replay.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
}

/// Parse `args` (including the program name) and run the command; returns
/// the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    configure_threads();
    run_inner(args)
}

fn run_inner<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let start = Instant::now();
    let (name, config, outcome) = match &cli.command {
        Command::Synth(a) => ("synth", serde_json::to_value(a), cmd_synth(a)),
        Command::Fit(a) => ("fit", serde_json::to_value(a), cmd_fit(a)),
        Command::Eval(a) => ("eval", serde_json::to_value(a), cmd_eval(a)),
        Command::Query(a) => ("query", serde_json::to_value(a), cmd_query(a)),
        Command::Sample(a) => ("sample", serde_json::to_value(a), cmd_sample(a)),
        Command::Grid(a) => ("grid", serde_json::to_value(a), cmd_grid(a)),
        Command::Replay(a) => {
            return match cmd_replay(a) {
                Ok(code) => code,
                Err(f) => {
                    eprintln!("error: {}", f.message);
                    f.code
                }
            }
        }
    };
    let outcome = match outcome {
        Ok(o) => o,
        Err(f) => {
            eprintln!("error: {}", f.message);
            return f.code;
        }
    };
    let manifest = RunManifest {
        command: name.into(),
        argv: argv.iter().map(|a| a.to_string_lossy().into_owned()).collect(),
        working_dir: std::env::current_dir().unwrap_or_default(),
        config: config.unwrap_or(serde_json::Value::Null),
        seeds: outcome.seeds,
        inputs: outcome.inputs,
        outputs: outcome.outputs,
        result: outcome.result,
        partial: outcome.partial,
        exit_code: outcome.code,
        wall_clock_seconds: start.elapsed().as_secs_f64(),
    };
    let written = serde_json::to_string_pretty(&manifest)
        .map_err(Error::from)
        .and_then(|text| std::fs::write(&outcome.manifest, text + "\n").map_err(Error::from));
    if let Err(e) = written {
        eprintln!("error: cannot write manifest {}: {e}", outcome.manifest.display());
        return EXIT_DATA;
    }
    outcome.code
}
