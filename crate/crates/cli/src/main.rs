use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use monolattice::data::{read_dataset_file, read_header, read_pairs_file};
use monolattice::model::CHECK_TOLERANCE;
use monolattice::timing::{run_benchmark, write_csv, TimingConfig};
use monolattice::{
    build_constraints_with_missing, check_monotonic, CsvOptions, Error, InterpolationKind, Loss, Model,
    MonotonicitySpec, PairFormat, RegularizerConfig, Schema, TrainConfig, TrainingData, UnseenPolicy,
};

mod args;

#[derive(Parser)]
#[command(name = "monolattice", version, about = "Calibrated monotonic lattice regression")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a model from a CSV file.
    Train(TrainArgs),
    /// Score rows of a CSV file with a trained model.
    Predict(PredictArgs),
    /// Report metrics of a model on labelled data.
    Evaluate(EvaluateArgs),
    /// List monotonicity violations of a model's lattice.
    Check(CheckArgs),
    /// Time the interpolation kernels on 2^D lattices.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum PairLayout {
    /// One row per pair with `name+` and `name-` columns.
    Columns,
    /// Two rows per pair sharing the `--pair-id` column.
    Grouped,
}

#[derive(Clone, Copy, ValueEnum)]
enum Unseen {
    Error,
    Default,
}

impl From<Unseen> for UnseenPolicy {
    fn from(u: Unseen) -> Self {
        match u {
            Unseen::Error => UnseenPolicy::Error,
            Unseen::Default => UnseenPolicy::Default,
        }
    }
}

#[derive(Args)]
struct DataArgs {
    /// CSV file with a header row.
    #[arg(long)]
    data: PathBuf,
    /// Label column.
    #[arg(long, default_value = "label")]
    label: String,
    /// Cell text that marks a missing value.
    #[arg(long, default_value = "")]
    missing_token: String,
    /// Read preference pairs instead of labelled samples.
    #[arg(long, value_enum)]
    pairs: Option<PairLayout>,
    /// Pair id column for `--pairs grouped`.
    #[arg(long, default_value = "pair_id")]
    pair_id: String,
}

impl DataArgs {
    fn options(&self) -> CsvOptions {
        CsvOptions {
            missing_token: self.missing_token.clone(),
        }
    }

    fn pair_format(&self) -> Option<PairFormat> {
        self.pairs.map(|p| match p {
            PairLayout::Columns => PairFormat::Columns,
            PairLayout::Grouped => PairFormat::Grouped {
                pair_id: self.pair_id.clone(),
            },
        })
    }

    fn load(&self, schema: &Schema) -> monolattice::Result<TrainingData> {
        let opts = self.options();
        Ok(match self.pair_format() {
            Some(format) => TrainingData::Pairs(read_pairs_file(&self.data, &schema.features, &format, &self.label, &opts)?),
            None => TrainingData::Samples(read_dataset_file(&self.data, &schema.features, Some(&self.label), &opts)?),
        })
    }

    /// Feature columns when no schema is given: everything except label
    /// and pair id, with pair suffixes removed.
    fn feature_columns(&self) -> monolattice::Result<Vec<String>> {
        let mut names = Vec::new();
        for h in read_header(&self.data)? {
            if h == self.label || (self.pairs.is_some() && h == self.pair_id) {
                continue;
            }
            let name = match self.pairs {
                Some(PairLayout::Columns) => match h.strip_suffix('+') {
                    Some(n) => n.to_string(),
                    None => continue,
                },
                _ => h,
            };
            names.push(name);
        }
        Ok(names)
    }
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Feature schema (JSON). Without it every non-label column is a
    /// continuous feature.
    #[arg(long)]
    schema: Option<PathBuf>,
    /// Monotone directions: `+name` increasing, `-name` decreasing, bare
    /// name unconstrained.
    #[arg(long, allow_hyphen_values = true)]
    monotonic: Option<String>,
    /// Lattice vertices per feature: `2,3`, `3` for all, or `name=3`.
    #[arg(long)]
    lattice: Option<String>,
    /// Calibration keypoints per feature, in the same forms as `--lattice`.
    #[arg(long)]
    keypoints: Option<String>,
    /// `kind:weight[:samples]` with kind laplacian, hessian or torsion;
    /// repeat to add several.
    #[arg(long = "regularizer")]
    regularizers: Vec<RegularizerConfig>,
    #[arg(long, default_value = "squared")]
    loss: Loss,
    #[arg(long, default_value_t = 10)]
    epochs: usize,
    #[arg(long, default_value_t = 16)]
    minibatch: usize,
    #[arg(long, default_value_t = 0.1)]
    step_size: f64,
    /// Calibrator step size as a multiple of `--step-size`; 0 freezes the
    /// calibrators.
    #[arg(long, default_value_t = 1.0)]
    calib_step_scale: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    #[arg(long, default_value_t = 1)]
    sync_rounds: usize,
    #[arg(long, default_value = "multilinear")]
    kind: InterpolationKind,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct PredictArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    data: PathBuf,
    /// Override the stored interpolation kind.
    #[arg(long)]
    kind: Option<InterpolationKind>,
    #[arg(long, value_enum, default_value = "error")]
    unseen: Unseen,
    #[arg(long, default_value = "")]
    missing_token: String,
    /// Write scores here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    model: PathBuf,
    #[command(flatten)]
    data: DataArgs,
    #[arg(long, value_enum, default_value = "error")]
    unseen: Unseen,
}

#[derive(Args)]
struct CheckArgs {
    #[arg(long)]
    model: PathBuf,
    /// Check against these directions instead of the stored ones.
    #[arg(long, allow_hyphen_values = true)]
    against: Option<String>,
    #[arg(long, default_value_t = CHECK_TOLERANCE)]
    tolerance: f64,
}

#[derive(Args)]
struct BenchArgs {
    /// Dimensions to time, e.g. `4..20`.
    #[arg(long, default_value = "4..20")]
    dims: String,
    #[arg(long, default_value_t = 100_000)]
    evals: usize,
    #[arg(long, default_value_t = 3)]
    trials: usize,
    /// Time allowance per dimension and kind, in milliseconds; large
    /// lattices run fewer evaluations to fit it.
    #[arg(long, default_value_t = 2000)]
    budget_ms: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Outcome of a command that ran to completion.
enum Status {
    Ok,
    CheckFailed,
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Training { .. } | Error::Numerical(_) | Error::Contract(_) => 3,
        _ => 2,
    }
}

fn output(path: Option<&Path>) -> std::io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(std::io::BufWriter::new(std::fs::File::create(p)?)),
        None => Box::new(std::io::BufWriter::new(std::io::stdout().lock())),
    })
}

fn train(a: TrainArgs) -> monolattice::Result<Status> {
    let mut schema = match &a.schema {
        Some(path) => Schema::load(path)?,
        None => args::infer_schema(&a.data.feature_columns()?)?,
    };
    if let Some(text) = &a.monotonic {
        for (name, direction) in args::parse_monotonic(text)? {
            schema.feature_mut(&name)?.monotonic = direction;
        }
    }
    if let Some(text) = &a.lattice {
        args::apply_counts(&mut schema, text, "lattice size", |f, v| f.lattice_size = v)?;
    }
    if let Some(text) = &a.keypoints {
        args::apply_counts(&mut schema, text, "keypoints", |f, v| f.keypoints = v)?;
    }
    schema.validate()?;
    let data = a.data.load(&schema)?;
    let config = TrainConfig {
        loss: a.loss,
        epochs: a.epochs,
        step_size: a.step_size,
        calibrator_step_scale: a.calib_step_scale,
        minibatch: a.minibatch,
        regularizers: a.regularizers,
        seed: a.seed,
        workers: a.workers,
        sync_rounds: a.sync_rounds,
        kind: a.kind,
    };
    let model = monolattice::train(&schema, &data, &config)?;
    model.save(&a.out)?;
    println!("examples {}", data.len());
    if let Some(obj) = model.metadata.objective {
        println!("objective {obj}");
    }
    if let Some(m) = &model.metadata.metrics {
        println!("metrics {}", serde_json::to_string(m)?);
    }
    println!("wrote {}", a.out.display());
    Ok(Status::Ok)
}

fn predict(a: PredictArgs) -> monolattice::Result<Status> {
    let model = Model::load(&a.model)?;
    let opts = CsvOptions {
        missing_token: a.missing_token,
    };
    let data = read_dataset_file(&a.data, &model.specs(), None, &opts)?;
    let scores = model.predict(&data.rows, a.unseen.into(), a.kind)?;
    let mut out = output(a.out.as_deref())?;
    if !scores.is_empty() {
        writeln!(out, "score")?;
        for s in scores {
            writeln!(out, "{s}")?;
        }
    }
    out.flush()?;
    Ok(Status::Ok)
}

fn evaluate(a: EvaluateArgs) -> monolattice::Result<Status> {
    let model = Model::load(&a.model)?;
    let schema = Schema::new(model.specs())?;
    let data = a.data.load(&schema)?;
    let metrics = model.evaluate_metrics(&data, a.unseen.into())?;
    println!("{}", serde_json::to_string_pretty(&metrics)?);
    Ok(Status::Ok)
}

fn check(a: CheckArgs) -> monolattice::Result<Status> {
    // read without validation so that violating models can be reported
    let model = Model::load_unchecked(&a.model)?;
    let mut directions = model.monotonicity.clone();
    if let Some(text) = &a.against {
        for (name, direction) in args::parse_monotonic(text)? {
            let d = model
                .calibrators
                .iter()
                .position(|c| c.spec.name == name)
                .ok_or_else(|| Error::Config(format!("unknown feature {name:?}")))?;
            directions.0[d] = direction;
        }
    }
    let cs = build_constraints_with_missing(&model.shape, &MonotonicitySpec(directions.0), &model.missing_vertex())?;
    let violations = check_monotonic(&model.theta, &cs, a.tolerance);
    println!("{} constraints, {} violations", cs.len(), violations.len());
    for v in &violations {
        let feature = model.shape.vertex_coords(v.low)?
            .iter()
            .zip(model.shape.vertex_coords(v.high)?)
            .position(|(a, b)| *a != b)
            .map(|d| model.calibrators[d].spec.name.clone())
            .unwrap_or_default();
        println!(
            "feature {feature}: theta[{}] = {} -> theta[{}] = {} (gap {})",
            v.low, model.theta[v.low], v.high, model.theta[v.high], v.gap
        );
    }
    Ok(if violations.is_empty() { Status::Ok } else { Status::CheckFailed })
}

fn bench(a: BenchArgs) -> monolattice::Result<Status> {
    let config = TimingConfig {
        dims: args::parse_range(&a.dims)?,
        evaluations: a.evals,
        trials: a.trials,
        budget: Duration::from_millis(a.budget_ms),
        seed: a.seed,
        ..TimingConfig::default()
    };
    let rows = run_benchmark(&config)?;
    write_csv(&rows, output(a.out.as_deref())?)?;
    Ok(Status::Ok)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Train(a) => train(a),
        Command::Predict(a) => predict(a),
        Command::Evaluate(a) => evaluate(a),
        Command::Check(a) => check(a),
        Command::Bench(a) => bench(a),
    };
    match result {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::CheckFailed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
