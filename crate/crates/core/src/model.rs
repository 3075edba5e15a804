//! Trained models: calibrators, lattice parameters and metadata, stored as
//! JSON.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::calibration::{build_calibrator_constraints, calibrator_params, FeatureCalibrator, FeatureSpec, UnseenPolicy};
use crate::data::{TrainingData, Value};
use crate::error::{Error, Result};
use crate::interpolation::{InterpolationKind, Interpolator};
use crate::monotonicity::{
    build_constraints_with_missing, check_monotonic, ConstraintSet, MonotonicitySpec, Violation,
};
use crate::shape::LatticeShape;
use crate::training::{Loss, TrainConfig};

pub const FORMAT_VERSION: u32 = 1;

/// Tolerance used when a model is loaded or checked.
pub const CHECK_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub count: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rmse: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub accuracy: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub log_loss: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pairwise_accuracy: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<TrainConfig>,
    #[serde(default)]
    pub examples: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub objective: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metrics: Option<Metrics>,
}

impl Metadata {
    pub fn for_config(config: &TrainConfig, examples: usize) -> Self {
        Self {
            config: Some(config.clone()),
            examples,
            objective: None,
            metrics: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub calibrators: Vec<FeatureCalibrator>,
    pub shape: LatticeShape,
    pub theta: Vec<f64>,
    pub monotonicity: MonotonicitySpec,
    pub kind: InterpolationKind,
    pub loss: Loss,
    pub metadata: Metadata,
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format_version: u32,
    features: Vec<FeatureCalibrator>,
    lattice: LatticeShape,
    theta: Vec<f64>,
    monotonicity: MonotonicitySpec,
    interpolation: InterpolationKind,
    loss: Loss,
    metadata: Metadata,
}

impl Model {
    /// Assembles a model and verifies that it satisfies its constraints.
    pub fn new(
        calibrators: Vec<FeatureCalibrator>,
        shape: LatticeShape,
        theta: Vec<f64>,
        kind: InterpolationKind,
        loss: Loss,
        metadata: Metadata,
    ) -> Result<Self> {
        let model = Self::new_unchecked(calibrators, shape, theta, kind, loss, metadata)?;
        model.validate()?;
        Ok(model)
    }

    /// Assembles a model checking only that the parts fit together.
    pub fn new_unchecked(
        calibrators: Vec<FeatureCalibrator>,
        shape: LatticeShape,
        theta: Vec<f64>,
        kind: InterpolationKind,
        loss: Loss,
        metadata: Metadata,
    ) -> Result<Self> {
        if calibrators.len() != shape.dims() {
            return Err(Error::Config(format!(
                "{} calibrators for a {}-feature lattice",
                calibrators.len(),
                shape.dims()
            )));
        }
        for (c, &m) in calibrators.iter().zip(shape.sizes()) {
            c.spec.validate()?;
            if c.spec.lattice_size != m {
                return Err(Error::Config(format!(
                    "feature {:?} declares {} vertices but the lattice has {m}",
                    c.spec.name, c.spec.lattice_size
                )));
            }
        }
        if theta.len() != shape.len() {
            return Err(Error::Config(format!(
                "lattice has {} parameters but theta has {}",
                shape.len(),
                theta.len()
            )));
        }
        let monotonicity = MonotonicitySpec(calibrators.iter().map(|c| c.spec.monotonic).collect());
        Ok(Self {
            calibrators,
            shape,
            theta,
            monotonicity,
            kind,
            loss,
            metadata,
        })
    }

    pub fn specs(&self) -> Vec<FeatureSpec> {
        self.calibrators.iter().map(|c| c.spec.clone()).collect()
    }

    pub fn missing_vertex(&self) -> Vec<bool> {
        self.calibrators.iter().map(|c| c.spec.has_missing_vertex()).collect()
    }

    pub fn lattice_constraints(&self) -> Result<ConstraintSet> {
        build_constraints_with_missing(&self.shape, &self.monotonicity, &self.missing_vertex())
    }

    /// Lattice monotonicity violations for the declared directions.
    pub fn check(&self, tolerance: f64) -> Result<Vec<Violation>> {
        Ok(check_monotonic(&self.theta, &self.lattice_constraints()?, tolerance))
    }

    /// Fails unless parameters are finite and both lattice and calibrator
    /// constraints hold.
    pub fn validate(&self) -> Result<()> {
        if let Some(i) = self.theta.iter().position(|t| !t.is_finite()) {
            return Err(Error::Config(format!("theta[{i}] is not finite")));
        }
        let violations = self.check(CHECK_TOLERANCE)?;
        if let Some(v) = violations.first() {
            return Err(Error::Config(format!(
                "{} monotonicity violations, first theta[{}] = {} > theta[{}] = {}",
                violations.len(),
                v.low,
                self.theta[v.low],
                v.high,
                self.theta[v.high]
            )));
        }
        let alpha = calibrator_params(&self.calibrators);
        let cs = build_calibrator_constraints(&self.calibrators)?;
        if !cs.is_feasible(&alpha, CHECK_TOLERANCE) {
            return Err(Error::Config("calibrator parameters violate their constraints".into()));
        }
        Ok(())
    }

    pub fn interpolator(&self, kind: InterpolationKind) -> Interpolator {
        Interpolator::new(&self.shape, kind).with_reserved_top(&self.missing_vertex())
    }

    pub fn calibrate_into(&self, row: &[Value], unseen: UnseenPolicy, out: &mut [f64]) -> Result<()> {
        if row.len() != self.calibrators.len() {
            return Err(Error::Data(format!(
                "row has {} values but the model has {} features",
                row.len(),
                self.calibrators.len()
            )));
        }
        for ((c, v), x) in self.calibrators.iter().zip(row).zip(out.iter_mut()) {
            *x = c.calibrate(v, unseen)?;
        }
        Ok(())
    }

    pub fn calibrate(&self, row: &[Value], unseen: UnseenPolicy) -> Result<Vec<f64>> {
        let mut x = vec![0.0; self.shape.dims()];
        self.calibrate_into(row, unseen, &mut x)?;
        Ok(x)
    }

    /// Scores one raw row.
    pub fn predict_row(&self, row: &[Value], unseen: UnseenPolicy) -> Result<f64> {
        let x = self.calibrate(row, unseen)?;
        self.interpolator(self.kind).evaluate(&self.theta, &self.shape, &x)
    }

    /// Scores already-calibrated lattice coordinates.
    pub fn evaluate_lattice(&self, x: &[f64]) -> Result<f64> {
        self.interpolator(self.kind).evaluate(&self.theta, &self.shape, x)
    }

    /// Scores many rows with the stored or an overriding interpolation kind.
    pub fn predict(&self, rows: &[Vec<Value>], unseen: UnseenPolicy, kind: Option<InterpolationKind>) -> Result<Vec<f64>> {
        let mut interp = self.interpolator(kind.unwrap_or(self.kind));
        let mut x = vec![0.0; self.shape.dims()];
        rows.iter()
            .map(|row| {
                self.calibrate_into(row, unseen, &mut x)?;
                interp.evaluate(&self.theta, &self.shape, &x)
            })
            .collect()
    }

    /// Regression metrics for samples (plus accuracy and log-loss when the
    /// labels are all 0 or 1), or pairwise accuracy for pairs.
    pub fn evaluate_metrics(&self, data: &TrainingData, unseen: UnseenPolicy) -> Result<Metrics> {
        let mut m = Metrics {
            count: data.len(),
            ..Metrics::default()
        };
        if data.is_empty() {
            return Ok(m);
        }
        match data {
            TrainingData::Samples(d) => {
                let scores = self.predict(&d.rows, unseen, None)?;
                let n = scores.len() as f64;
                let sse: f64 = scores.iter().zip(&d.labels).map(|(z, y)| (z - y) * (z - y)).sum();
                m.rmse = Some((sse / n).sqrt());
                if d.labels.iter().all(|&y| y == 0.0 || y == 1.0) {
                    let mut correct = 0usize;
                    let mut log_loss = 0.0;
                    for (&z, &y) in scores.iter().zip(&d.labels) {
                        let p = self.loss.probability(z);
                        correct += usize::from((p >= 0.5) == (y == 1.0));
                        let p = p.clamp(1e-15, 1.0 - 1e-15);
                        log_loss -= y * p.ln() + (1.0 - y) * (1.0 - p).ln();
                    }
                    m.accuracy = Some(correct as f64 / n);
                    m.log_loss = Some(log_loss / n);
                }
            }
            TrainingData::Pairs(p) => {
                let a = self.predict(&p.preferred, unseen, None)?;
                let b = self.predict(&p.other, unseen, None)?;
                let wins: f64 = a
                    .iter()
                    .zip(&b)
                    .map(|(x, y)| match x.partial_cmp(y) {
                        Some(std::cmp::Ordering::Greater) => 1.0,
                        Some(std::cmp::Ordering::Equal) => 0.5,
                        _ => 0.0,
                    })
                    .sum();
                m.pairwise_accuracy = Some(wins / a.len() as f64);
            }
        }
        Ok(m)
    }

    fn to_file(&self) -> ModelFile {
        ModelFile {
            format_version: FORMAT_VERSION,
            features: self.calibrators.clone(),
            lattice: self.shape.clone(),
            theta: self.theta.clone(),
            monotonicity: self.monotonicity.clone(),
            interpolation: self.kind,
            loss: self.loss,
            metadata: self.metadata.clone(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let mut text = serde_json::to_string_pretty(&self.to_file())?;
        text.push('\n');
        Ok(text)
    }

    /// Parses a model, checking structure but not constraints.
    pub fn from_json_unchecked(text: &str) -> Result<Self> {
        let file: ModelFile = serde_json::from_str(text)?;
        if file.format_version != FORMAT_VERSION {
            return Err(Error::Config(format!(
                "unsupported model format version {}",
                file.format_version
            )));
        }
        let model = Self::new_unchecked(
            file.features,
            file.lattice,
            file.theta,
            file.interpolation,
            file.loss,
            file.metadata,
        )?;
        if model.monotonicity != file.monotonicity {
            return Err(Error::Config(
                "stored monotonicity does not match the feature directions".into(),
            ));
        }
        Ok(model)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let model = Self::from_json_unchecked(text)?;
        model.validate()?;
        Ok(model)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn load_unchecked(path: &Path) -> Result<Self> {
        Self::from_json_unchecked(&std::fs::read_to_string(path)?)
    }
}
