//! Per-feature calibrators mapping raw inputs into the lattice domain.
//!
//! A continuous feature is mapped by a monotone piecewise-linear function
//! with fixed knots; its first and last outputs are pinned to the ends of the
//! lattice span and the interior outputs are learned. A categorical feature
//! maps each category to a learned value, with one extra value shared by rare
//! and (optionally) unseen categories. Missing values either get a learned
//! value of their own or are sent to a dedicated last lattice slice.
//!
//! # Schema file
//!
//! ```json
//! {
//!   "features": [
//!     {"name": "distance", "kind": "continuous", "keypoints": 5,
//!      "bounds": [0, 100], "monotonic": "decreasing", "lattice_size": 2},
//!     {"name": "country", "kind": "categorical", "missing": "vertex",
//!      "lattice_size": 3, "order": [["GB", "DE"]], "min_category_count": 5}
//!   ]
//! }
//! ```
//!
//! `kind` defaults to continuous, `keypoints` to 2, `lattice_size` to 2 and
//! `monotonic` to none. Without a `missing` entry, missing cells are an
//! error; `"calibrated"` learns a value for them and `"vertex"` reserves the
//! last lattice slice.

use std::collections::{BTreeMap, BinaryHeap, HashMap};
use std::cmp::{Ordering, Reverse};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::data::Value;
use crate::error::{Error, Result};
use crate::monotonicity::{ConstraintSet, Direction};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureKind {
    #[default]
    Continuous,
    Categorical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MissingPolicy {
    /// Missing inputs map to a learned value inside the lattice span.
    #[serde(alias = "calibrated_value")]
    Calibrated,
    /// The last slice of the lattice is reserved for missing inputs.
    #[serde(alias = "missing_vertex")]
    Vertex,
}

/// What to do with a category that has no learned value.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum UnseenPolicy {
    #[default]
    Error,
    /// Use the value learned for rare categories.
    Default,
}

fn default_keypoints() -> usize {
    2
}

fn default_lattice_size() -> usize {
    2
}

fn default_min_count() -> usize {
    1
}

fn is_default_min_count(n: &usize) -> bool {
    *n == 1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeatureSpec {
    pub name: String,
    #[serde(default)]
    pub kind: FeatureKind,
    /// Raw input range `[l, u]`; taken from the data when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounds: Option<(f64, f64)>,
    #[serde(default = "default_keypoints")]
    pub keypoints: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub missing: Option<MissingPolicy>,
    #[serde(default)]
    pub monotonic: Direction,
    #[serde(default = "default_lattice_size")]
    pub lattice_size: usize,
    /// Category pairs `(low, high)` whose calibrated values must not decrease.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub order: Vec<(String, String)>,
    /// Categories seen fewer times than this share the default value.
    #[serde(default = "default_min_count", skip_serializing_if = "is_default_min_count")]
    pub min_category_count: usize,
}

impl FeatureSpec {
    pub fn continuous(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            kind: FeatureKind::Continuous,
            bounds: None,
            keypoints: default_keypoints(),
            missing: None,
            monotonic: Direction::None,
            lattice_size: default_lattice_size(),
            order: Vec::new(),
            min_category_count: 1,
        }
    }

    pub fn categorical(name: impl Into<String>) -> Self {
        Self {
            kind: FeatureKind::Categorical,
            ..Self::continuous(name)
        }
    }

    pub fn with_keypoints(mut self, keypoints: usize) -> Self {
        self.keypoints = keypoints;
        self
    }

    pub fn with_bounds(mut self, low: f64, high: f64) -> Self {
        self.bounds = Some((low, high));
        self
    }

    pub fn with_lattice_size(mut self, size: usize) -> Self {
        self.lattice_size = size;
        self
    }

    pub fn with_monotonic(mut self, direction: Direction) -> Self {
        self.monotonic = direction;
        self
    }

    pub fn with_missing(mut self, policy: MissingPolicy) -> Self {
        self.missing = Some(policy);
        self
    }

    pub fn with_order(mut self, low: &str, high: &str) -> Self {
        self.order.push((low.to_string(), high.to_string()));
        self
    }

    pub fn has_missing_vertex(&self) -> bool {
        self.missing == Some(MissingPolicy::Vertex)
    }

    /// Top of the range that non-missing values are mapped into.
    pub fn upper(&self) -> f64 {
        let slices = if self.has_missing_vertex() { 2 } else { 1 };
        (self.lattice_size - slices) as f64
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(format!("feature {:?}: {msg}", self.name)));
        if self.name.is_empty() {
            return Err(Error::Config("feature with empty name".into()));
        }
        if self.lattice_size < 2 {
            return fail(format!("lattice size {} is below 2", self.lattice_size));
        }
        if self.has_missing_vertex() && self.lattice_size < 3 {
            return fail("a missing vertex needs a lattice size of at least 3".into());
        }
        if self.min_category_count == 0 {
            return fail("min_category_count must be at least 1".into());
        }
        match self.kind {
            FeatureKind::Continuous => {
                if self.keypoints < 2 {
                    return fail(format!("{} keypoints; at least 2 are needed", self.keypoints));
                }
                if let Some((l, u)) = self.bounds {
                    if !(l.is_finite() && u.is_finite() && l < u) {
                        return fail(format!("bounds ({l}, {u}) need l < u"));
                    }
                }
                if !self.order.is_empty() {
                    return fail("order pairs apply only to categorical features".into());
                }
            }
            FeatureKind::Categorical => {
                if self.bounds.is_some() {
                    return fail("bounds apply only to continuous features".into());
                }
            }
        }
        Ok(())
    }
}

/// The feature schema file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schema {
    pub features: Vec<FeatureSpec>,
}

impl Schema {
    pub fn new(features: Vec<FeatureSpec>) -> Result<Self> {
        let schema = Self { features };
        schema.validate()?;
        Ok(schema)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let schema: Schema = serde_json::from_str(text)?;
        schema.validate()?;
        Ok(schema)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.features.is_empty() {
            return Err(Error::Config("schema declares no features".into()));
        }
        for (i, f) in self.features.iter().enumerate() {
            f.validate()?;
            if self.features[..i].iter().any(|g| g.name == f.name) {
                return Err(Error::Config(format!("duplicate feature {:?}", f.name)));
            }
        }
        Ok(())
    }

    pub fn feature(&self, name: &str) -> Option<&FeatureSpec> {
        self.features.iter().find(|f| f.name == name)
    }

    pub fn feature_mut(&mut self, name: &str) -> Result<&mut FeatureSpec> {
        self.features
            .iter_mut()
            .find(|f| f.name == name)
            .ok_or_else(|| Error::Config(format!("unknown feature {name:?}")))
    }
}

fn quantile(sorted: &[f64], p: f64) -> f64 {
    let q = p * (sorted.len() - 1) as f64;
    let lo = q.floor() as usize;
    if lo + 1 >= sorted.len() {
        return sorted[sorted.len() - 1];
    }
    sorted[lo] + (q - lo as f64) * (sorted[lo + 1] - sorted[lo])
}

/// Knots at the ends of the raw range and at the interior equally spaced
/// quantiles of the column, with duplicates dropped. Non-finite values are
/// ignored.
pub fn fit_knots(column: &[f64], keypoints: usize, bounds: Option<(f64, f64)>) -> Result<Vec<f64>> {
    if keypoints < 2 {
        return Err(Error::Config(format!("{keypoints} keypoints; at least 2 are needed")));
    }
    let mut sorted: Vec<f64> = column.iter().copied().filter(|x| x.is_finite()).collect();
    sorted.sort_by(f64::total_cmp);
    let (low, high) = match bounds {
        Some(b) => b,
        None if sorted.is_empty() => return Err(Error::Fit("no finite values to fit knots".into())),
        None => (sorted[0], sorted[sorted.len() - 1]),
    };
    if !(low < high) {
        return Err(Error::Fit(format!("degenerate raw range [{low}, {high}]")));
    }
    let mut knots = vec![low];
    if !sorted.is_empty() {
        for k in 1..keypoints - 1 {
            let q = quantile(&sorted, k as f64 / (keypoints - 1) as f64);
            if q > *knots.last().expect("nonempty") && q < high {
                knots.push(q);
            }
        }
    }
    knots.push(high);
    Ok(knots)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseLinearCalibrator {
    pub knots: Vec<f64>,
    pub outputs: Vec<f64>,
}

impl PiecewiseLinearCalibrator {
    /// Outputs on the straight line from 0 to `upper` through the knots.
    pub fn linear(knots: Vec<f64>, upper: f64) -> Self {
        let (first, last) = (knots[0], knots[knots.len() - 1]);
        let outputs = knots
            .iter()
            .map(|&b| upper * (b - first) / (last - first))
            .collect::<Vec<_>>();
        let mut cal = Self { knots, outputs };
        let n = cal.outputs.len();
        cal.outputs[0] = 0.0;
        cal.outputs[n - 1] = upper;
        cal
    }

    /// Segment index and the clamped raw value.
    fn segment(&self, x: f64) -> (usize, f64) {
        let last = self.knots.len() - 1;
        let x = x.clamp(self.knots[0], self.knots[last]);
        let k = self.knots.partition_point(|&b| b <= x).saturating_sub(1).min(last - 1);
        (k, x)
    }

    /// Interpolation weights of outputs `k` and `k + 1`.
    fn weights(&self, x: f64) -> (usize, f64, f64) {
        let (k, x) = self.segment(x);
        let (b0, b1) = (self.knots[k], self.knots[k + 1]);
        let width = b1 - b0;
        (k, (b1 - x) / width, (x - b0) / width)
    }

    pub fn calibrate(&self, x: f64) -> f64 {
        let (k, w0, w1) = self.weights(x);
        w0 * self.outputs[k] + w1 * self.outputs[k + 1]
    }

    pub fn free_count(&self) -> usize {
        self.outputs.len() - 2
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "CategoricalRepr", into = "CategoricalRepr")]
pub struct CategoricalCalibrator {
    categories: Vec<String>,
    values: Vec<f64>,
    default: f64,
    index: HashMap<String, usize>,
}

#[derive(Serialize, Deserialize)]
struct CategoricalRepr {
    mapping: BTreeMap<String, f64>,
    default: f64,
}

impl From<CategoricalRepr> for CategoricalCalibrator {
    fn from(repr: CategoricalRepr) -> Self {
        let (categories, values) = repr.mapping.into_iter().unzip();
        Self::new(categories, values, repr.default)
    }
}

impl From<CategoricalCalibrator> for CategoricalRepr {
    fn from(cal: CategoricalCalibrator) -> Self {
        CategoricalRepr {
            mapping: cal.categories.into_iter().zip(cal.values).collect(),
            default: cal.default,
        }
    }
}

impl CategoricalCalibrator {
    /// Categories are kept in sorted order so the parameter layout does not
    /// depend on how the mapping was built.
    pub fn new(categories: Vec<String>, values: Vec<f64>, default: f64) -> Self {
        let mut pairs: Vec<(String, f64)> = categories.into_iter().zip(values).collect();
        pairs.sort_by(|a, b| a.0.cmp(&b.0));
        pairs.dedup_by(|a, b| a.0 == b.0);
        let (categories, values): (Vec<_>, Vec<_>) = pairs.into_iter().unzip();
        let index = categories.iter().enumerate().map(|(i, c)| (c.clone(), i)).collect();
        Self {
            categories,
            values,
            default,
            index,
        }
    }

    pub fn categories(&self) -> &[String] {
        &self.categories
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn default_value(&self) -> f64 {
        self.default
    }

    pub fn position(&self, category: &str) -> Option<usize> {
        self.index.get(category).copied()
    }

    pub fn get(&self, category: &str) -> Option<f64> {
        self.position(category).map(|i| self.values[i])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Transform {
    PiecewiseLinear(PiecewiseLinearCalibrator),
    Categorical(CategoricalCalibrator),
}

/// A feature's spec together with its learned transform.
///
/// Parameters are laid out as: the free piecewise-linear outputs, or the
/// category values followed by the default value; then the missing value
/// when the policy is [`MissingPolicy::Calibrated`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureCalibrator {
    pub spec: FeatureSpec,
    pub transform: Transform,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub missing_value: Option<f64>,
}

/// Up to two nonzero partial derivatives of a calibrated value with respect
/// to the calibrator's local parameters.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CalibratorGradient {
    entries: [(usize, f64); 2],
    len: usize,
}

impl CalibratorGradient {
    fn push(&mut self, index: usize, weight: f64) {
        self.entries[self.len] = (index, weight);
        self.len += 1;
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.entries[..self.len].iter().copied()
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }
}

impl FeatureCalibrator {
    /// Fits knots or categories from a column and initializes the outputs.
    /// Labels should be larger for more preferred samples.
    pub fn fit(spec: &FeatureSpec, column: &[Value], labels: &[f64]) -> Result<Self> {
        spec.validate()?;
        if column.len() != labels.len() {
            return Err(Error::Data("column and labels differ in length".into()));
        }
        let upper = spec.upper();
        let transform = match spec.kind {
            FeatureKind::Continuous => {
                let mut raw = Vec::with_capacity(column.len());
                for v in column {
                    match v {
                        Value::Number(x) => raw.push(*x),
                        Value::Missing => {}
                        Value::Category(c) => {
                            return Err(Error::Data(format!(
                                "feature {:?} is continuous but got {c:?}",
                                spec.name
                            )))
                        }
                    }
                }
                let knots = fit_knots(&raw, spec.keypoints, spec.bounds)
                    .map_err(|e| Error::Fit(format!("feature {:?}: {e}", spec.name)))?;
                Transform::PiecewiseLinear(PiecewiseLinearCalibrator::linear(knots, upper))
            }
            FeatureKind::Categorical => Transform::Categorical(fit_categories(spec, column, labels)?),
        };
        let missing_value = (spec.missing == Some(MissingPolicy::Calibrated)).then_some(upper / 2.0);
        if spec.missing.is_none() && column.iter().any(Value::is_missing) {
            return Err(Error::Data(format!(
                "feature {:?} has missing values but no missing policy",
                spec.name
            )));
        }
        Ok(Self {
            spec: spec.clone(),
            transform,
            missing_value,
        })
    }

    pub fn name(&self) -> &str {
        &self.spec.name
    }

    pub fn param_count(&self) -> usize {
        let body = match &self.transform {
            Transform::PiecewiseLinear(p) => p.free_count(),
            Transform::Categorical(c) => c.values.len() + 1,
        };
        body + usize::from(self.missing_value.is_some())
    }

    pub fn push_params(&self, out: &mut Vec<f64>) {
        match &self.transform {
            Transform::PiecewiseLinear(p) => out.extend_from_slice(&p.outputs[1..p.outputs.len() - 1]),
            Transform::Categorical(c) => {
                out.extend_from_slice(&c.values);
                out.push(c.default);
            }
        }
        out.extend(self.missing_value);
    }

    pub fn set_params(&mut self, params: &[f64]) -> Result<()> {
        if params.len() != self.param_count() {
            return Err(Error::Contract(format!(
                "feature {:?} takes {} parameters, got {}",
                self.spec.name,
                self.param_count(),
                params.len()
            )));
        }
        let body = match &mut self.transform {
            Transform::PiecewiseLinear(p) => {
                let n = p.outputs.len();
                p.outputs[1..n - 1].copy_from_slice(&params[..n - 2]);
                n - 2
            }
            Transform::Categorical(c) => {
                let n = c.values.len();
                c.values.copy_from_slice(&params[..n]);
                c.default = params[n];
                n + 1
            }
        };
        if let Some(m) = &mut self.missing_value {
            *m = params[body];
        }
        Ok(())
    }

    fn missing_error(&self) -> Error {
        Error::Data(format!("missing value for feature {:?}, which has no missing policy", self.spec.name))
    }

    fn category_slot(&self, c: &CategoricalCalibrator, category: &str, unseen: UnseenPolicy) -> Result<usize> {
        match (c.position(category), unseen) {
            (Some(i), _) => Ok(i),
            (None, UnseenPolicy::Default) => Ok(c.values.len()),
            (None, UnseenPolicy::Error) => Err(Error::UnseenCategory {
                feature: self.spec.name.clone(),
                value: category.to_string(),
            }),
        }
    }

    fn type_error(&self, value: &Value) -> Error {
        Error::Data(format!("feature {:?} cannot take {value:?}", self.spec.name))
    }

    /// Maps a raw value into `[0, lattice_size - 1]`.
    pub fn calibrate(&self, value: &Value, unseen: UnseenPolicy) -> Result<f64> {
        if value.is_missing() {
            return match (self.spec.missing, self.missing_value) {
                (Some(MissingPolicy::Vertex), _) => Ok((self.spec.lattice_size - 1) as f64),
                (_, Some(m)) => Ok(m),
                _ => Err(self.missing_error()),
            };
        }
        match (&self.transform, value) {
            (Transform::PiecewiseLinear(p), Value::Number(x)) if !x.is_nan() => Ok(p.calibrate(*x)),
            (Transform::Categorical(c), Value::Category(s)) => {
                let slot = self.category_slot(c, s, unseen)?;
                Ok(c.values.get(slot).copied().unwrap_or(c.default))
            }
            _ => Err(self.type_error(value)),
        }
    }

    /// Partial derivatives of [`calibrate`](Self::calibrate) with respect to
    /// this calibrator's parameters, indexed locally.
    pub fn gradient(&self, value: &Value, unseen: UnseenPolicy) -> Result<CalibratorGradient> {
        let mut g = CalibratorGradient::default();
        if value.is_missing() {
            return match (self.spec.missing, self.missing_value) {
                (Some(MissingPolicy::Vertex), _) => Ok(g),
                (_, Some(_)) => {
                    g.push(self.param_count() - 1, 1.0);
                    Ok(g)
                }
                _ => Err(self.missing_error()),
            };
        }
        match (&self.transform, value) {
            (Transform::PiecewiseLinear(p), Value::Number(x)) if !x.is_nan() => {
                let (k, w0, w1) = p.weights(*x);
                let last = p.outputs.len() - 1;
                if k >= 1 && w0 != 0.0 {
                    g.push(k - 1, w0);
                }
                if k + 1 < last && w1 != 0.0 {
                    g.push(k, w1);
                }
            }
            (Transform::Categorical(c), Value::Category(s)) => {
                g.push(self.category_slot(c, s, unseen)?, 1.0);
            }
            _ => return Err(self.type_error(value)),
        }
        Ok(g)
    }

    /// Appends this calibrator's ordering rows and bounds, shifted by
    /// `offset`, to the global constraint lists.
    fn push_constraints(&self, offset: usize, rows: &mut Vec<(usize, usize)>, bounds: &mut Vec<(f64, f64)>) -> Result<()> {
        let upper = self.spec.upper();
        let count = self.param_count();
        bounds.extend(std::iter::repeat_n((0.0, upper), count));
        match &self.transform {
            Transform::PiecewiseLinear(p) => {
                for i in 1..p.free_count() {
                    rows.push((offset + i - 1, offset + i));
                }
            }
            Transform::Categorical(c) => {
                for (low, high) in &self.spec.order {
                    let find = |name: &str| {
                        c.position(name).ok_or_else(|| {
                            Error::Config(format!(
                                "feature {:?}: order refers to unknown category {name:?}",
                                self.spec.name
                            ))
                        })
                    };
                    rows.push((offset + find(low)?, offset + find(high)?));
                }
            }
        }
        Ok(())
    }
}

#[derive(PartialEq)]
struct Ranked {
    mean: f64,
    name: String,
    index: usize,
}

impl Eq for Ranked {}

impl Ord for Ranked {
    fn cmp(&self, other: &Self) -> Ordering {
        self.mean.total_cmp(&other.mean).then_with(|| self.name.cmp(&other.name))
    }
}

impl PartialOrd for Ranked {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn fit_categories(spec: &FeatureSpec, column: &[Value], labels: &[f64]) -> Result<CategoricalCalibrator> {
    let mut stats: BTreeMap<&str, (usize, f64)> = BTreeMap::new();
    let mut total = 0.0;
    let mut observed = 0usize;
    for (v, &y) in column.iter().zip(labels) {
        match v {
            Value::Category(c) => {
                let e = stats.entry(c.as_str()).or_default();
                e.0 += 1;
                e.1 += y;
                total += y;
                observed += 1;
            }
            Value::Missing => {}
            Value::Number(x) => {
                return Err(Error::Data(format!(
                    "feature {:?} is categorical but got the number {x}",
                    spec.name
                )))
            }
        }
    }
    let overall = if observed > 0 { total / observed as f64 } else { 0.0 };
    let mut means: BTreeMap<&str, f64> = stats
        .iter()
        .filter(|(_, (n, _))| *n >= spec.min_category_count)
        .map(|(c, (n, s))| (*c, s / *n as f64))
        .collect();
    for (low, high) in &spec.order {
        for c in [low, high] {
            means.entry(c.as_str()).or_insert(overall);
        }
    }
    let names: Vec<&str> = means.keys().copied().collect();
    let index: HashMap<&str, usize> = names.iter().enumerate().map(|(i, c)| (*c, i)).collect();

    // order categories by mean label, subject to the declared pairs
    let n = names.len();
    let mut successors = vec![Vec::new(); n];
    let mut indegree = vec![0usize; n];
    for (low, high) in &spec.order {
        let (a, b) = (index[low.as_str()], index[high.as_str()]);
        successors[a].push(b);
        indegree[b] += 1;
    }
    let ranked = |i: usize| {
        Reverse(Ranked {
            mean: means[names[i]],
            name: names[i].to_string(),
            index: i,
        })
    };
    let mut ready: BinaryHeap<_> = (0..n).filter(|&i| indegree[i] == 0).map(ranked).collect();
    let mut sequence = Vec::with_capacity(n);
    while let Some(Reverse(r)) = ready.pop() {
        sequence.push(r.index);
        for &s in &successors[r.index] {
            indegree[s] -= 1;
            if indegree[s] == 0 {
                ready.push(ranked(s));
            }
        }
    }
    if sequence.len() != n {
        return Err(Error::Config(format!("feature {:?}: order pairs form a cycle", spec.name)));
    }

    let upper = spec.upper();
    let mut values = vec![0.0; n];
    for (rank, &i) in sequence.iter().enumerate() {
        values[i] = if n == 1 {
            upper / 2.0
        } else {
            upper * rank as f64 / (n - 1) as f64
        };
    }
    Ok(CategoricalCalibrator::new(
        names.iter().map(|c| c.to_string()).collect(),
        values,
        upper / 2.0,
    ))
}

/// Fits one calibrator per feature from row-major data.
pub fn init_calibrators(specs: &[FeatureSpec], rows: &[Vec<Value>], labels: &[f64]) -> Result<Vec<FeatureCalibrator>> {
    if let Some(r) = rows.iter().find(|r| r.len() != specs.len()) {
        return Err(Error::Data(format!(
            "row has {} values but the schema has {} features",
            r.len(),
            specs.len()
        )));
    }
    specs
        .iter()
        .enumerate()
        .map(|(d, spec)| {
            let column: Vec<Value> = rows.iter().map(|r| r[d].clone()).collect();
            FeatureCalibrator::fit(spec, &column, labels)
        })
        .collect()
}

/// Start offset of each calibrator's parameters in the joint vector, plus
/// the total as the last entry.
pub fn param_offsets(calibrators: &[FeatureCalibrator]) -> Vec<usize> {
    let mut offsets = Vec::with_capacity(calibrators.len() + 1);
    let mut total = 0;
    for c in calibrators {
        offsets.push(total);
        total += c.param_count();
    }
    offsets.push(total);
    offsets
}

pub fn calibrator_params(calibrators: &[FeatureCalibrator]) -> Vec<f64> {
    let mut out = Vec::new();
    for c in calibrators {
        c.push_params(&mut out);
    }
    out
}

pub fn set_calibrator_params(calibrators: &mut [FeatureCalibrator], params: &[f64]) -> Result<()> {
    let offsets = param_offsets(calibrators);
    if params.len() != offsets[calibrators.len()] {
        return Err(Error::Contract(format!(
            "expected {} calibrator parameters, got {}",
            offsets[calibrators.len()],
            params.len()
        )));
    }
    for (i, c) in calibrators.iter_mut().enumerate() {
        c.set_params(&params[offsets[i]..offsets[i + 1]])?;
    }
    Ok(())
}

/// Ordering rows and range bounds over the joint calibrator parameters.
pub fn build_calibrator_constraints(calibrators: &[FeatureCalibrator]) -> Result<ConstraintSet> {
    let offsets = param_offsets(calibrators);
    let mut rows = Vec::new();
    let mut bounds = Vec::new();
    for (c, &offset) in calibrators.iter().zip(&offsets) {
        c.push_constraints(offset, &mut rows, &mut bounds)?;
    }
    let n = offsets[calibrators.len()];
    ConstraintSet::new(n, rows, (n > 0).then_some(bounds))
}
