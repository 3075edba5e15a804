//! Projected stochastic gradient descent over lattice and calibrator
//! parameters, with optional parallelize-and-average training.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::calibration::{
    build_calibrator_constraints, calibrator_params, init_calibrators, param_offsets, set_calibrator_params,
    FeatureCalibrator, Schema, UnseenPolicy,
};
use crate::data::{Dataset, PairDataset, TrainingData, Value};
use crate::error::{Error, Result};
use crate::interpolation::{input_gradient, InterpolationKind, Interpolator};
use crate::model::{Metadata, Model};
use crate::monotonicity::{
    build_constraints_with_missing, project_update_in_place, snap_feasible, ConstraintSet, Direction,
    MonotonicitySpec,
};
use crate::regularizers::{RegularizerConfig, RegularizerTerms, SampleCount};
use crate::shape::LatticeShape;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Loss {
    #[default]
    Squared,
    /// `log(1 + e^z) - y z` for labels in `{0, 1}`.
    Logistic,
    /// `max(0, 1 - y' z)` with `y' = 2y - 1`.
    Hinge,
}

impl Loss {
    pub fn value(self, y: f64, z: f64) -> f64 {
        match self {
            Loss::Squared => (y - z) * (y - z),
            Loss::Logistic => softplus(z) - y * z,
            Loss::Hinge => (1.0 - (2.0 * y - 1.0) * z).max(0.0),
        }
    }

    /// Derivative with respect to the score `z` (a subgradient for hinge).
    pub fn derivative(self, y: f64, z: f64) -> f64 {
        match self {
            Loss::Squared => 2.0 * (z - y),
            Loss::Logistic => sigmoid(z) - y,
            Loss::Hinge => {
                let sign = 2.0 * y - 1.0;
                if sign * z < 1.0 {
                    -sign
                } else {
                    0.0
                }
            }
        }
    }

    /// Maps a score to a probability-like value for classification metrics.
    pub fn probability(self, z: f64) -> f64 {
        match self {
            Loss::Squared => z.clamp(0.0, 1.0),
            Loss::Logistic => sigmoid(z),
            Loss::Hinge => ((z + 1.0) / 2.0).clamp(0.0, 1.0),
        }
    }
}

fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

impl fmt::Display for Loss {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Loss::Squared => "squared",
            Loss::Logistic => "logistic",
            Loss::Hinge => "hinge",
        })
    }
}

impl FromStr for Loss {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "squared" | "l2" => Ok(Loss::Squared),
            "logistic" | "log" => Ok(Loss::Logistic),
            "hinge" => Ok(Loss::Hinge),
            other => Err(Error::Config(format!("unknown loss {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub loss: Loss,
    pub epochs: usize,
    pub step_size: f64,
    /// Multiplies the step size for calibrator parameters; 0 keeps the
    /// calibrators at their initial values.
    pub calibrator_step_scale: f64,
    /// Samples per step. A minibatch at least as large as the data set
    /// means deterministic full-batch steps.
    pub minibatch: usize,
    pub regularizers: Vec<RegularizerConfig>,
    pub seed: u64,
    pub workers: usize,
    pub sync_rounds: usize,
    pub kind: InterpolationKind,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            loss: Loss::Squared,
            epochs: 10,
            step_size: 0.1,
            calibrator_step_scale: 1.0,
            minibatch: 1,
            regularizers: Vec::new(),
            seed: 0,
            workers: 1,
            sync_rounds: 1,
            kind: InterpolationKind::Multilinear,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.step_size > 0.0 && self.step_size.is_finite()) {
            return Err(Error::Config(format!("step size must be > 0, got {}", self.step_size)));
        }
        if !(self.calibrator_step_scale >= 0.0 && self.calibrator_step_scale.is_finite()) {
            return Err(Error::Config("calibrator step scale must be >= 0".into()));
        }
        if self.minibatch == 0 {
            return Err(Error::Config("minibatch must be >= 1".into()));
        }
        if self.workers == 0 {
            return Err(Error::Config("workers must be >= 1".into()));
        }
        if self.sync_rounds == 0 {
            return Err(Error::Config("sync rounds must be >= 1".into()));
        }
        for r in &self.regularizers {
            RegularizerConfig::new(r.kind, r.weight, r.samples)?;
        }
        Ok(())
    }
}

/// Initial lattice: a linear function increasing along Increasing features
/// and decreasing along Decreasing ones, rescaled to span `[0, 1]`. A
/// reserved missing slice sits halfway along its feature.
pub fn init_lattice(shape: &LatticeShape, spec: &MonotonicitySpec, missing_vertex: &[bool]) -> Result<Vec<f64>> {
    if spec.len() != shape.dims() {
        return Err(Error::Config(format!(
            "{} directions for a {}-feature lattice",
            spec.len(),
            shape.dims()
        )));
    }
    let mut theta = vec![0.0; shape.len()];
    if !spec.directions().iter().any(|d| d.is_constrained()) {
        return Ok(theta);
    }
    let mut coords = vec![0; shape.dims()];
    for (i, t) in theta.iter_mut().enumerate() {
        shape.write_coords(i, &mut coords);
        *t = coords
            .iter()
            .enumerate()
            .map(|(d, &c)| {
                let m = shape.sizes()[d];
                let reserved = missing_vertex.get(d).copied().unwrap_or(false);
                let position = match (reserved, c) {
                    (true, c) if c == m - 1 => 0.5,
                    (true, c) => c as f64 / (m - 2) as f64,
                    (false, c) => c as f64 / (m - 1) as f64,
                };
                match spec.directions()[d] {
                    Direction::Increasing => position,
                    Direction::Decreasing => -position,
                    Direction::None => 0.0,
                }
            })
            .sum();
    }
    let lo = theta.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = theta.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    for t in &mut theta {
        *t = (*t - lo) / (hi - lo);
    }
    Ok(theta)
}

/// Lattice shape, directions and missing-vertex flags declared by a schema.
pub fn lattice_layout(schema: &Schema) -> Result<(LatticeShape, MonotonicitySpec, Vec<bool>)> {
    let shape = LatticeShape::new(schema.features.iter().map(|f| f.lattice_size).collect())?;
    let spec = MonotonicitySpec(schema.features.iter().map(|f| f.monotonic).collect());
    let missing = schema.features.iter().map(|f| f.has_missing_vertex()).collect();
    Ok((shape, spec, missing))
}

/// Everything that changes during training.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainState {
    pub theta: Vec<f64>,
    pub calibrators: Vec<FeatureCalibrator>,
}

impl TrainState {
    pub fn alpha(&self) -> Vec<f64> {
        calibrator_params(&self.calibrators)
    }
}

/// Fixed problem data shared by every step: shape, constraints and
/// regularizer terms.
#[derive(Debug, Clone)]
pub struct Problem {
    pub shape: LatticeShape,
    pub monotonicity: MonotonicitySpec,
    pub missing_vertex: Vec<bool>,
    pub lattice_constraints: ConstraintSet,
    pub calibrator_constraints: ConstraintSet,
    pub regularizers: Vec<(RegularizerConfig, RegularizerTerms)>,
    pub kind: InterpolationKind,
    pub loss: Loss,
    offsets: Vec<usize>,
}

impl Problem {
    pub fn new(schema: &Schema, calibrators: &[FeatureCalibrator], config: &TrainConfig) -> Result<Self> {
        let (shape, monotonicity, missing_vertex) = lattice_layout(schema)?;
        let lattice_constraints = build_constraints_with_missing(&shape, &monotonicity, &missing_vertex)?;
        let calibrator_constraints = build_calibrator_constraints(calibrators)?;
        let regularizers = config
            .regularizers
            .iter()
            .map(|r| (*r, RegularizerTerms::build(&shape, r.kind, &missing_vertex)))
            .collect();
        Ok(Self {
            shape,
            monotonicity,
            missing_vertex,
            lattice_constraints,
            calibrator_constraints,
            regularizers,
            kind: config.kind,
            loss: config.loss,
            offsets: param_offsets(calibrators),
        })
    }

    fn interpolator(&self) -> Interpolator {
        Interpolator::new(&self.shape, self.kind).with_reserved_top(&self.missing_vertex)
    }

    pub fn regularization(&self, theta: &[f64]) -> f64 {
        self.regularizers.iter().map(|(c, t)| c.weight * t.value(theta)).sum()
    }
}

/// Scratch buffers for gradient evaluation.
struct Workspace {
    interp: Interpolator,
    x: Vec<f64>,
    grad_theta: Vec<f64>,
    grad_alpha: Vec<f64>,
    step: Vec<f64>,
    alpha: Vec<f64>,
}

impl Workspace {
    fn new(problem: &Problem) -> Self {
        let n_alpha = problem.calibrator_constraints.param_count();
        Self {
            interp: problem.interpolator(),
            x: vec![0.0; problem.shape.dims()],
            grad_theta: vec![0.0; problem.shape.len()],
            grad_alpha: vec![0.0; n_alpha],
            step: Vec::new(),
            alpha: Vec::with_capacity(n_alpha),
        }
    }
}

fn calibrate_row(calibrators: &[FeatureCalibrator], row: &[Value], unseen: UnseenPolicy, out: &mut [f64]) -> Result<()> {
    if row.len() != calibrators.len() {
        return Err(Error::Data(format!(
            "row has {} values but the model has {} features",
            row.len(),
            calibrators.len()
        )));
    }
    for ((c, v), x) in calibrators.iter().zip(row).zip(out.iter_mut()) {
        *x = c.calibrate(v, unseen)?;
    }
    Ok(())
}

/// Adds `scale * d f(row) / d(theta, alpha)` into the workspace gradients
/// and returns `f(row)`.
fn accumulate(
    problem: &Problem,
    state: &TrainState,
    ws: &mut Workspace,
    row: &[Value],
    scale: f64,
    with_alpha: bool,
) -> Result<f64> {
    calibrate_row(&state.calibrators, row, UnseenPolicy::Default, &mut ws.x)?;
    let weights = ws.interp.weights(&problem.shape, &ws.x)?;
    let score = weights.dot(&state.theta);
    for (i, w) in weights.iter() {
        ws.grad_theta[i] += scale * w;
    }
    if with_alpha && scale != 0.0 {
        let slope = input_gradient(&state.theta, &problem.shape, ws.interp.location(), problem.kind);
        for (d, (c, v)) in state.calibrators.iter().zip(row).enumerate() {
            for (j, partial) in c.gradient(v, UnseenPolicy::Default)?.iter() {
                ws.grad_alpha[problem.offsets[d] + j] += scale * slope[d] * partial;
            }
        }
    }
    Ok(score)
}

fn score(problem: &Problem, state: &TrainState, ws: &mut Workspace, row: &[Value]) -> Result<f64> {
    calibrate_row(&state.calibrators, row, UnseenPolicy::Default, &mut ws.x)?;
    ws.interp.evaluate(&state.theta, &problem.shape, &ws.x)
}

/// One score difference per example: a sample's own score, or the
/// preferred minus the other score of a pair. Returns the loss derivative
/// scaled by `weight` and accumulates gradients.
fn example_gradient(
    problem: &Problem,
    state: &TrainState,
    ws: &mut Workspace,
    data: &TrainingData,
    i: usize,
    weight: f64,
    with_alpha: bool,
) -> Result<()> {
    match data {
        TrainingData::Samples(d) => {
            let z = score(problem, state, ws, &d.rows[i])?;
            let g = weight * problem.loss.derivative(d.labels[i], z);
            accumulate(problem, state, ws, &d.rows[i], g, with_alpha)?;
        }
        TrainingData::Pairs(p) => {
            let z = score(problem, state, ws, &p.preferred[i])? - score(problem, state, ws, &p.other[i])?;
            let g = weight * problem.loss.derivative(1.0, z);
            accumulate(problem, state, ws, &p.preferred[i], g, with_alpha)?;
            accumulate(problem, state, ws, &p.other[i], -g, with_alpha)?;
        }
    }
    Ok(())
}

/// How the examples of one step are chosen.
#[derive(Debug, Clone, Copy)]
enum Batch<'a> {
    /// Every listed example once, in order.
    Full(&'a [usize]),
    /// `k` examples drawn uniformly with replacement from the list.
    Sampled(&'a [usize], usize),
}

/// One projected step on `theta` and the calibrator parameters. Both stay
/// feasible.
fn sgd_step_inner<R: Rng>(
    problem: &Problem,
    state: &mut TrainState,
    ws: &mut Workspace,
    data: &TrainingData,
    batch: Batch<'_>,
    config: &TrainConfig,
    rng: &mut R,
    step_index: usize,
) -> Result<()> {
    ws.grad_theta.fill(0.0);
    ws.grad_alpha.fill(0.0);
    let with_alpha = config.calibrator_step_scale > 0.0 && !ws.grad_alpha.is_empty();
    match batch {
        Batch::Full(indices) => {
            let weight = 1.0 / indices.len() as f64;
            for &i in indices {
                example_gradient(problem, state, ws, data, i, weight, with_alpha)?;
            }
        }
        Batch::Sampled(indices, k) => {
            let weight = 1.0 / k as f64;
            for _ in 0..k {
                let i = indices[rng.random_range(0..indices.len())];
                example_gradient(problem, state, ws, data, i, weight, with_alpha)?;
            }
        }
    }
    for (config, terms) in &problem.regularizers {
        match config.samples {
            SampleCount::All => terms.add_gradient(&state.theta, config.weight, &mut ws.grad_theta),
            SampleCount::Sampled(k) => {
                terms.add_sampled_gradient(&state.theta, k, config.weight, rng, &mut ws.grad_theta)
            }
        }
    }
    let abort = |what: &str, i: usize| Error::Training {
        step: step_index,
        detail: format!("non-finite {what} gradient at parameter {i}"),
    };
    if let Some(i) = ws.grad_theta.iter().position(|g| !g.is_finite()) {
        return Err(abort("lattice", i));
    }
    if let Some(i) = ws.grad_alpha.iter().position(|g| !g.is_finite()) {
        return Err(abort("calibrator", i));
    }

    let eta = config.step_size;
    ws.step.clear();
    ws.step.extend(ws.grad_theta.iter().map(|g| -eta * g));
    project_update_in_place(&mut state.theta, &ws.step, &problem.lattice_constraints)
        .map_err(|e| Error::Training { step: step_index, detail: e.to_string() })?;
    if with_alpha {
        let eta = eta * config.calibrator_step_scale;
        ws.alpha.clear();
        for c in &state.calibrators {
            c.push_params(&mut ws.alpha);
        }
        ws.step.clear();
        ws.step.extend(ws.grad_alpha.iter().map(|g| -eta * g));
        project_update_in_place(&mut ws.alpha, &ws.step, &problem.calibrator_constraints)
            .map_err(|e| Error::Training { step: step_index, detail: e.to_string() })?;
        set_calibrator_params(&mut state.calibrators, &ws.alpha)?;
    }
    Ok(())
}

/// One projected step on a minibatch of example indices, each used once.
/// Pass every index for a full-batch step.
pub fn sgd_step(
    problem: &Problem,
    state: &mut TrainState,
    data: &TrainingData,
    minibatch: &[usize],
    config: &TrainConfig,
    rng: &mut ChaCha8Rng,
) -> Result<()> {
    if minibatch.is_empty() {
        return Ok(());
    }
    let mut ws = Workspace::new(problem);
    sgd_step_inner(problem, state, &mut ws, data, Batch::Full(minibatch), config, rng, 0)
}

/// Gradient of the mean loss over the listed examples plus the full
/// regularizers, as `(d/d theta, d/d alpha)`.
pub fn full_gradient(
    problem: &Problem,
    state: &TrainState,
    data: &TrainingData,
    indices: &[usize],
) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut ws = Workspace::new(problem);
    let weight = 1.0 / indices.len().max(1) as f64;
    for &i in indices {
        example_gradient(problem, state, &mut ws, data, i, weight, true)?;
    }
    for (config, terms) in &problem.regularizers {
        terms.add_gradient(&state.theta, config.weight, &mut ws.grad_theta);
    }
    Ok((ws.grad_theta, ws.grad_alpha))
}

/// Mean training loss plus weighted regularizers.
pub fn objective(problem: &Problem, state: &TrainState, data: &TrainingData) -> Result<f64> {
    let mut ws = Workspace::new(problem);
    let mut total = 0.0;
    match data {
        TrainingData::Samples(d) => {
            for (row, &y) in d.rows.iter().zip(&d.labels) {
                total += problem.loss.value(y, score(problem, state, &mut ws, row)?);
            }
        }
        TrainingData::Pairs(p) => {
            for (a, b) in p.preferred.iter().zip(&p.other) {
                let z = score(problem, state, &mut ws, a)? - score(problem, state, &mut ws, b)?;
                total += problem.loss.value(1.0, z);
            }
        }
    }
    Ok(total / data.len().max(1) as f64 + problem.regularization(&state.theta))
}

/// Runs `steps` steps over the given example indices.
#[allow(clippy::too_many_arguments)]
fn run_steps(
    problem: &Problem,
    state: &mut TrainState,
    data: &TrainingData,
    indices: &[usize],
    steps: usize,
    config: &TrainConfig,
    rng: &mut ChaCha8Rng,
    first_step: usize,
) -> Result<()> {
    let mut ws = Workspace::new(problem);
    let batch = if config.minibatch >= indices.len() {
        Batch::Full(indices)
    } else {
        Batch::Sampled(indices, config.minibatch)
    };
    for s in 0..steps {
        sgd_step_inner(problem, state, &mut ws, data, batch, config, rng, first_step + s)?;
    }
    Ok(())
}

fn steps_per_epoch(examples: usize, minibatch: usize) -> usize {
    examples.div_ceil(minibatch)
}

/// Fits calibrators and builds the problem and initial state.
pub fn prepare(schema: &Schema, data: &TrainingData, config: &TrainConfig) -> Result<(Problem, TrainState)> {
    schema.validate()?;
    config.validate()?;
    if data.is_empty() {
        return Err(Error::Data("no training examples".into()));
    }
    let calibrators = match data {
        TrainingData::Samples(d) => init_calibrators(&schema.features, &d.rows, &d.labels)?,
        TrainingData::Pairs(p) => {
            let rows: Vec<Vec<Value>> = p.preferred.iter().chain(&p.other).cloned().collect();
            let labels: Vec<f64> = (0..rows.len()).map(|i| if i < p.len() { 1.0 } else { 0.0 }).collect();
            init_calibrators(&schema.features, &rows, &labels)?
        }
    };
    let problem = Problem::new(schema, &calibrators, config)?;
    let theta = init_lattice(&problem.shape, &problem.monotonicity, &problem.missing_vertex)?;
    Ok((problem, TrainState { theta, calibrators }))
}

/// Trains on the given state in place, single-threaded.
pub fn train_state(
    problem: &Problem,
    state: &mut TrainState,
    data: &TrainingData,
    config: &TrainConfig,
) -> Result<()> {
    let indices: Vec<usize> = (0..data.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let steps = config.epochs * steps_per_epoch(indices.len(), config.minibatch);
    run_steps(problem, state, data, &indices, steps, config, &mut rng, 0)
}

/// Deterministic disjoint shards of `0..n`, shuffled by `seed`.
pub fn shards(n: usize, workers: usize, seed: u64) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(u64::MAX);
    for i in (1..n).rev() {
        order.swap(i, rng.random_range(0..=i));
    }
    (0..workers)
        .map(|w| order[w * n / workers..(w + 1) * n / workers].to_vec())
        .collect()
}

/// Parallelize-and-average on the given state. Each worker owns a shard;
/// every round starts all workers from the consensus and ends by averaging
/// lattice and calibrator parameters in worker order.
pub fn parallel_train_state(
    problem: &Problem,
    state: &mut TrainState,
    data: &TrainingData,
    config: &TrainConfig,
) -> Result<()> {
    let k = config.workers;
    let parts = shards(data.len(), k, config.seed);
    if parts.iter().any(|p| p.is_empty()) {
        return Err(Error::Config(format!("{} examples cannot fill {k} shards", data.len())));
    }
    let rounds = config.sync_rounds;
    let worker_steps: Vec<usize> = parts
        .iter()
        .map(|p| config.epochs * steps_per_epoch(p.len(), config.minibatch))
        .collect();
    let mut done = vec![0usize; k];
    for round in 0..rounds {
        let plan: Vec<(usize, usize)> = worker_steps
            .iter()
            .zip(&done)
            .map(|(&total, &start)| (start, total * (round + 1) / rounds - start))
            .collect();
        let consensus = &*state;
        let results: Vec<Result<TrainState>> = std::thread::scope(|scope| {
            let handles: Vec<_> = parts
                .iter()
                .zip(&plan)
                .enumerate()
                .map(|(w, (shard, &(start, steps)))| {
                    scope.spawn(move || {
                        let mut local = consensus.clone();
                        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
                        rng.set_stream((round * k + w) as u64 + 1);
                        run_steps(problem, &mut local, data, shard, steps, config, &mut rng, start)?;
                        Ok(local)
                    })
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().unwrap_or_else(|_| Err(Error::Numerical("worker panicked".into()))))
                .collect()
        });
        let locals = results.into_iter().collect::<Result<Vec<_>>>()?;
        average_into(problem, state, &locals)?;
        for (d, (_, steps)) in done.iter_mut().zip(&plan) {
            *d += steps;
        }
    }
    Ok(())
}

fn average_into(problem: &Problem, state: &mut TrainState, locals: &[TrainState]) -> Result<()> {
    let k = locals.len() as f64;
    let mut theta = vec![0.0; state.theta.len()];
    for l in locals {
        for (t, v) in theta.iter_mut().zip(&l.theta) {
            *t += v;
        }
    }
    theta.iter_mut().for_each(|t| *t /= k);
    snap_feasible(&mut theta, &problem.lattice_constraints);

    let mut alpha = vec![0.0; problem.calibrator_constraints.param_count()];
    for l in locals {
        for (a, v) in alpha.iter_mut().zip(l.alpha()) {
            *a += v;
        }
    }
    alpha.iter_mut().for_each(|a| *a /= k);
    snap_feasible(&mut alpha, &problem.calibrator_constraints);
    state.theta = theta;
    set_calibrator_params(&mut state.calibrators, &alpha)
}

/// Trains a model. Uses parallelize-and-average when more than one worker
/// is configured; a single worker runs the sequential loop.
pub fn train(schema: &Schema, data: &TrainingData, config: &TrainConfig) -> Result<Model> {
    let (problem, mut state) = prepare(schema, data, config)?;
    if config.workers > 1 {
        parallel_train_state(&problem, &mut state, data, config)?;
    } else {
        train_state(&problem, &mut state, data, config)?;
    }
    let objective = objective(&problem, &state, data)?;
    let mut model = Model::new(
        state.calibrators,
        problem.shape.clone(),
        state.theta,
        problem.kind,
        problem.loss,
        Metadata::for_config(config, data.len()),
    )?;
    model.metadata.objective = Some(objective);
    model.metadata.metrics = Some(model.evaluate_metrics(data, UnseenPolicy::Default)?);
    Ok(model)
}

/// [`train`] with the configured worker count, kept as a separate entry
/// point for callers that want to be explicit.
pub fn parallel_train(schema: &Schema, data: &TrainingData, config: &TrainConfig) -> Result<Model> {
    train(schema, data, config)
}

pub fn train_samples(schema: &Schema, data: &Dataset, config: &TrainConfig) -> Result<Model> {
    train(schema, &TrainingData::Samples(data.clone()), config)
}

pub fn train_pairs(schema: &Schema, data: &PairDataset, config: &TrainConfig) -> Result<Model> {
    train(schema, &TrainingData::Pairs(data.clone()), config)
}
