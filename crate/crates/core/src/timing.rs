//! Wall-clock timing of the interpolation kernels on `2^D` lattices.

use std::hint::black_box;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::Result;
use crate::interpolation::{InterpolationKind, Interpolator};
use crate::shape::LatticeShape;

/// Distinct random points cycled through during a run.
const POOL_SIZE: usize = 4096;

#[derive(Debug, Clone)]
pub struct TimingConfig {
    pub dims: Vec<usize>,
    pub kinds: Vec<InterpolationKind>,
    /// Evaluations per trial, unless the time budget cuts it short.
    pub evaluations: usize,
    pub trials: usize,
    /// Rough wall-clock allowance for all trials of one `(D, kind)` cell.
    pub budget: Duration,
    /// Lower limit on evaluations per trial when the budget applies.
    pub min_evaluations: usize,
    pub seed: u64,
}

impl Default for TimingConfig {
    fn default() -> Self {
        Self {
            dims: (4..=20).collect(),
            kinds: InterpolationKind::ALL.to_vec(),
            evaluations: 100_000,
            trials: 3,
            budget: Duration::from_secs(2),
            min_evaluations: 200,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimingRow {
    pub dims: usize,
    pub kind: InterpolationKind,
    /// Median over trials.
    pub ns_per_op: f64,
    /// Evaluations per trial.
    pub evals: usize,
}

fn run(interp: &mut Interpolator, theta: &[f64], shape: &LatticeShape, pool: &[f64], evals: usize) -> Result<Duration> {
    let d = shape.dims();
    let points = pool.len() / d;
    let mut acc = 0.0;
    let start = Instant::now();
    for i in 0..evals {
        let p = i % points;
        acc += interp.evaluate(theta, shape, black_box(&pool[p * d..(p + 1) * d]))?;
    }
    let elapsed = start.elapsed();
    black_box(acc);
    Ok(elapsed)
}

/// Times one kernel at one dimension.
pub fn time_kernel(dims: usize, kind: InterpolationKind, config: &TimingConfig) -> Result<TimingRow> {
    let shape = LatticeShape::binary(dims)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ dims as u64);
    let theta: Vec<f64> = (0..shape.len()).map(|_| rng.random()).collect();
    let pool: Vec<f64> = (0..POOL_SIZE * dims).map(|_| rng.random()).collect();
    let mut interp = Interpolator::new(&shape, kind);

    // warm-up doubles as a speed estimate for the budget
    let warm = config.min_evaluations.max(1);
    let estimate = run(&mut interp, &theta, &shape, &pool, warm)?.as_secs_f64() / warm as f64;
    let trials = config.trials.max(1);
    let affordable = (config.budget.as_secs_f64() / trials as f64 / estimate.max(1e-12)) as usize;
    let evals = config.evaluations.min(affordable).max(config.min_evaluations).max(1);

    let mut samples: Vec<f64> = (0..trials)
        .map(|_| run(&mut interp, &theta, &shape, &pool, evals).map(|t| t.as_nanos() as f64 / evals as f64))
        .collect::<Result<_>>()?;
    samples.sort_by(f64::total_cmp);
    Ok(TimingRow {
        dims,
        kind,
        ns_per_op: samples[samples.len() / 2],
        evals,
    })
}

/// Times every configured kernel at every configured dimension, in order
/// of dimension then kind.
pub fn run_benchmark(config: &TimingConfig) -> Result<Vec<TimingRow>> {
    let mut rows = Vec::with_capacity(config.dims.len() * config.kinds.len());
    for &d in &config.dims {
        for &kind in &config.kinds {
            rows.push(time_kernel(d, kind, config)?);
        }
    }
    Ok(rows)
}

/// Writes `d,kind,ns_per_op,evals` rows with a header.
pub fn write_csv<W: std::io::Write>(rows: &[TimingRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["d", "kind", "ns_per_op", "evals"])?;
    for r in rows {
        w.write_record([
            r.dims.to_string(),
            r.kind.name().to_string(),
            format!("{:.3}", r.ns_per_op),
            r.evals.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
