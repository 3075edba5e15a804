//! Pairwise monotonicity constraints over lattice parameters, feasibility
//! checks, and the active-set projection walk used by projected SGD.
//!
//! A row `(low, high)` requires `theta[high] - theta[low] >= 0`. Requiring this
//! for every pair of vertices adjacent along a feature is necessary and
//! sufficient for the interpolated function to be nondecreasing in that
//! feature, for both multilinear and simplex interpolation.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::shape::LatticeShape;

/// Slack at or below which a constraint counts as hit during the walk.
pub const HIT_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Increasing,
    Decreasing,
    #[default]
    None,
}

impl Direction {
    pub fn is_constrained(self) -> bool {
        self != Direction::None
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Increasing => "increasing",
            Direction::Decreasing => "decreasing",
            Direction::None => "none",
        })
    }
}

impl FromStr for Direction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "increasing" | "inc" | "+" => Ok(Direction::Increasing),
            "decreasing" | "dec" | "-" => Ok(Direction::Decreasing),
            "none" | "" => Ok(Direction::None),
            other => Err(Error::config(format!("unknown monotonic direction {other:?}"))),
        }
    }
}

/// Per-feature monotonic direction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MonotonicitySpec(pub Vec<Direction>);

impl MonotonicitySpec {
    pub fn unconstrained(dims: usize) -> Self {
        Self(vec![Direction::None; dims])
    }

    pub fn all(dims: usize, direction: Direction) -> Self {
        Self(vec![direction; dims])
    }

    pub fn directions(&self) -> &[Direction] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Sparse pairwise inequalities `theta[high] >= theta[low]` plus optional
/// per-parameter box bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintSet {
    param_count: usize,
    rows: Vec<(usize, usize)>,
    bounds: Option<Vec<(f64, f64)>>,
    by_param: Vec<Vec<usize>>,
}

/// A row whose gap `theta[high] - theta[low]` is below tolerance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Violation {
    pub row: usize,
    pub low: usize,
    pub high: usize,
    pub gap: f64,
}

impl ConstraintSet {
    pub fn new(
        param_count: usize,
        rows: Vec<(usize, usize)>,
        bounds: Option<Vec<(f64, f64)>>,
    ) -> Result<Self> {
        for &(low, high) in &rows {
            if low == high || low >= param_count || high >= param_count {
                return Err(Error::config(format!(
                    "invalid constraint row ({low}, {high}) over {param_count} parameters"
                )));
            }
        }
        if let Some(b) = &bounds {
            if b.len() != param_count {
                return Err(Error::config(format!(
                    "{} bounds for {param_count} parameters",
                    b.len()
                )));
            }
            if let Some(i) = b.iter().position(|&(lo, hi)| !(lo <= hi)) {
                return Err(Error::config(format!("empty bound interval on parameter {i}")));
            }
        }
        let mut by_param = vec![Vec::new(); param_count];
        for (r, &(low, high)) in rows.iter().enumerate() {
            by_param[low].push(r);
            by_param[high].push(r);
        }
        Ok(Self {
            param_count,
            rows,
            bounds,
            by_param,
        })
    }

    pub fn empty(param_count: usize) -> Self {
        Self::new(param_count, Vec::new(), None).expect("empty set is valid")
    }

    pub fn param_count(&self) -> usize {
        self.param_count
    }

    pub fn rows(&self) -> &[(usize, usize)] {
        &self.rows
    }

    pub fn bounds(&self) -> Option<&[(f64, f64)]> {
        self.bounds.as_deref()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty() && self.bounds.is_none()
    }

    /// Whether every row and bound holds to within `tolerance`.
    pub fn is_feasible(&self, theta: &[f64], tolerance: f64) -> bool {
        check_monotonic(theta, self, tolerance).is_empty() && self.bound_violations(theta, tolerance) == 0
    }

    fn bound_violations(&self, theta: &[f64], tolerance: f64) -> usize {
        self.bounds.as_ref().map_or(0, |b| {
            b.iter()
                .zip(theta)
                .filter(|(&(lo, hi), &t)| !(t >= lo - tolerance && t <= hi + tolerance))
                .count()
        })
    }
}

/// Edges along one feature, as pairs of coordinates `(from, to)` such that
/// monotone increase means `theta[to] >= theta[from]`.
pub(crate) fn feature_edges(size: usize, missing_vertex: bool) -> Vec<(usize, usize)> {
    if missing_vertex {
        // slices 0..=size-2 hold observed values; slice size-1 is missing,
        // constrained to lie between the lowest and highest observed slice
        let top = size - 2;
        let mut edges: Vec<_> = (0..top).map(|c| (c, c + 1)).collect();
        edges.push((0, size - 1));
        edges.push((size - 1, top));
        edges
    } else {
        (0..size - 1).map(|c| (c, c + 1)).collect()
    }
}

/// All pairs of flat indices whose coordinates equal `(from, to)` along
/// feature `d` and agree elsewhere.
pub(crate) fn pairs_along(
    shape: &LatticeShape,
    d: usize,
    from: usize,
    to: usize,
) -> impl Iterator<Item = (usize, usize)> + '_ {
    let stride = shape.strides()[d];
    let size = shape.sizes()[d];
    let outer = stride * size;
    let blocks = shape.len() / outer;
    (0..blocks).flat_map(move |b| {
        (0..stride).map(move |inner| {
            let origin = b * outer + inner;
            (origin + from * stride, origin + to * stride)
        })
    })
}

/// One row per pair of lattice-adjacent vertices along each constrained
/// feature; decreasing features swap the pair.
pub fn build_constraints(shape: &LatticeShape, spec: &MonotonicitySpec) -> Result<ConstraintSet> {
    build_constraints_with_missing(shape, spec, &vec![false; shape.dims()])
}

/// Like [`build_constraints`], where features flagged in `missing_vertex`
/// reserve their last slice for missing values. That slice is treated as
/// adjacent to the lowest and highest observed slices, so missing inputs
/// never score outside the observed range.
pub fn build_constraints_with_missing(
    shape: &LatticeShape,
    spec: &MonotonicitySpec,
    missing_vertex: &[bool],
) -> Result<ConstraintSet> {
    if spec.len() != shape.dims() || missing_vertex.len() != shape.dims() {
        return Err(Error::config(format!(
            "monotonicity spec has {} entries for a {}-feature lattice",
            spec.len(),
            shape.dims()
        )));
    }
    let mut rows = Vec::new();
    for (d, &direction) in spec.directions().iter().enumerate() {
        if !direction.is_constrained() {
            continue;
        }
        if missing_vertex[d] && shape.sizes()[d] < 3 {
            return Err(Error::config(format!(
                "feature {d} needs at least 3 vertices to hold a missing-value slice"
            )));
        }
        for (from, to) in feature_edges(shape.sizes()[d], missing_vertex[d]) {
            for (a, b) in pairs_along(shape, d, from, to) {
                rows.push(match direction {
                    Direction::Increasing => (a, b),
                    _ => (b, a),
                });
            }
        }
    }
    ConstraintSet::new(shape.len(), rows, None)
}

/// Rows with `theta[high] - theta[low] < -tolerance`. An empty result
/// certifies that the interpolated function is monotone in every constrained
/// feature.
pub fn check_monotonic(theta: &[f64], constraints: &ConstraintSet, tolerance: f64) -> Vec<Violation> {
    constraints
        .rows
        .iter()
        .enumerate()
        .filter_map(|(row, &(low, high))| {
            let gap = theta[high] - theta[low];
            // NaN gaps are violations too
            (!(gap >= -tolerance)).then_some(Violation { row, low, high, gap })
        })
        .collect()
}

/// Active constraints of one walk, kept as connected components over the
/// parameters. Moving orthogonally to the normals `e_low - e_high` of the
/// active rows means moving by a constant within each component; a component
/// containing a parameter held at a bound cannot move at all.
struct ActiveSet {
    parent: Vec<usize>,
    members: Vec<Vec<usize>>,
    pinned: Vec<bool>,
    row_active: Vec<bool>,
}

impl ActiveSet {
    fn new(n: usize, rows: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            members: vec![Vec::new(); n],
            pinned: vec![false; n],
            row_active: vec![false; rows],
        }
    }

    fn find(&mut self, mut i: usize) -> usize {
        while self.parent[i] != i {
            self.parent[i] = self.parent[self.parent[i]];
            i = self.parent[i];
        }
        i
    }

    fn same(&mut self, a: usize, b: usize) -> bool {
        self.find(a) == self.find(b)
    }

    fn members_of(&self, root: usize) -> Vec<usize> {
        if self.members[root].is_empty() {
            vec![root]
        } else {
            self.members[root].clone()
        }
    }

    /// Merges the components of `a` and `b`, returning the new root.
    fn union(&mut self, a: usize, b: usize) -> usize {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return ra;
        }
        let (big, small) = if self.members_of(ra).len() >= self.members_of(rb).len() {
            (ra, rb)
        } else {
            (rb, ra)
        };
        let moved = self.members_of(small);
        if self.members[big].is_empty() {
            self.members[big].push(big);
        }
        self.members[big].extend(moved);
        self.members[small] = Vec::new();
        self.parent[small] = big;
        self.pinned[big] |= self.pinned[small];
        big
    }

    fn pin(&mut self, i: usize) -> usize {
        let r = self.find(i);
        self.pinned[r] = true;
        r
    }

    /// Projects `dir` onto the motions allowed for the component at `root`.
    fn project_component(&self, root: usize, dir: &mut [f64]) {
        let members = self.members_of(root);
        let value = if self.pinned[root] {
            0.0
        } else {
            members.iter().map(|&i| dir[i]).sum::<f64>() / members.len() as f64
        };
        for i in members {
            dir[i] = value;
        }
    }
}

#[derive(Clone, Copy)]
enum Hit {
    Row(usize),
    Lower(usize),
    Upper(usize),
}

/// Approximate projected update. Starting from a feasible `theta`, walks
/// along `step`; each constraint met on the way joins an active set that is
/// never shrunk, and the walk continues along the part of the remaining step
/// orthogonal to all active constraints. Stops when the step is used up or
/// no orthogonal motion is left. The result is always feasible.
pub fn project_update(theta: &[f64], step: &[f64], constraints: &ConstraintSet) -> Result<Vec<f64>> {
    let mut out = theta.to_vec();
    project_update_in_place(&mut out, step, constraints)?;
    Ok(out)
}

/// What one projection walk ran into.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct WalkStats {
    /// Constraints (rows and bounds) added to the active set.
    pub hits: usize,
    /// Whether the full step was applied.
    pub exhausted: bool,
}

pub fn project_update_in_place(
    theta: &mut [f64],
    step: &[f64],
    constraints: &ConstraintSet,
) -> Result<WalkStats> {
    let n = constraints.param_count;
    if theta.len() != n || step.len() != n {
        return Err(Error::domain(format!(
            "constraint set covers {n} parameters, got theta {} and step {}",
            theta.len(),
            step.len()
        )));
    }
    if let Some(i) = step.iter().position(|s| !s.is_finite()) {
        return Err(Error::Numerical(format!("non-finite step component at parameter {i}")));
    }
    if !constraints.is_feasible(theta, HIT_TOLERANCE) {
        return Err(Error::Contract(
            "projection walk must start from a feasible point".into(),
        ));
    }

    let mut stats = WalkStats::default();
    let mut dir = step.to_vec();
    let mut support: Vec<usize> = (0..n).filter(|&i| dir[i] != 0.0).collect();
    if support.is_empty() {
        stats.exhausted = true;
        return Ok(stats);
    }
    let step_norm = support.iter().map(|&i| dir[i] * dir[i]).sum::<f64>().sqrt();
    let mut in_support = vec![false; n];
    for &i in &support {
        in_support[i] = true;
    }
    let mut active = ActiveSet::new(n, constraints.rows.len());
    let mut candidates: Vec<(Hit, f64, f64)> = Vec::new();

    loop {
        // rate at which each inactive constraint's slack shrinks, and its slack
        candidates.clear();
        for &i in &support {
            for &r in &constraints.by_param[i] {
                if active.row_active[r] {
                    continue;
                }
                let (low, high) = constraints.rows[r];
                let rate = dir[low] - dir[high];
                if rate > 0.0 {
                    candidates.push((Hit::Row(r), theta[high] - theta[low], rate));
                }
            }
            if let Some(bounds) = &constraints.bounds {
                let (lo, hi) = bounds[i];
                let root = active.find(i);
                let pinned = active.pinned[root];
                if dir[i] < 0.0 && lo.is_finite() && !pinned {
                    candidates.push((Hit::Lower(i), theta[i] - lo, -dir[i]));
                } else if dir[i] > 0.0 && hi.is_finite() && !pinned {
                    candidates.push((Hit::Upper(i), hi - theta[i], dir[i]));
                }
            }
        }

        let t_star = candidates
            .iter()
            .map(|&(_, slack, rate)| slack.max(0.0) / rate)
            .fold(1.0_f64, f64::min);
        for &i in &support {
            theta[i] += t_star * dir[i];
        }
        if t_star >= 1.0 {
            stats.exhausted = true;
            break;
        }

        let mut touched_roots = Vec::new();
        for &(hit, slack, rate) in &candidates {
            if slack - t_star * rate > HIT_TOLERANCE {
                continue;
            }
            match hit {
                Hit::Row(r) => {
                    if active.row_active[r] {
                        continue;
                    }
                    active.row_active[r] = true;
                    stats.hits += 1;
                    let (low, high) = constraints.rows[r];
                    if !active.same(low, high) {
                        touched_roots.push(active.union(low, high));
                    }
                }
                Hit::Lower(i) | Hit::Upper(i) => {
                    let root = active.find(i);
                    if !active.pinned[root] {
                        stats.hits += 1;
                    }
                    touched_roots.push(active.pin(i));
                }
            }
        }

        let remaining = 1.0 - t_star;
        for &i in &support {
            dir[i] *= remaining;
        }
        for root in touched_roots {
            let root = active.find(root);
            for i in active.members_of(root) {
                if !in_support[i] {
                    in_support[i] = true;
                    support.push(i);
                }
            }
            active.project_component(root, &mut dir);
        }

        let norm: f64 = support.iter().map(|&i| dir[i] * dir[i]).sum::<f64>().sqrt();
        if norm <= 1e-15 * step_norm {
            break;
        }
    }

    repair(theta, &support, constraints);
    Ok(stats)
}

/// Removes rounding-level violations from a point that is feasible up to
/// floating-point error, such as an average of feasible points.
pub fn snap_feasible(theta: &mut [f64], constraints: &ConstraintSet) {
    let all: Vec<usize> = (0..theta.len().min(constraints.param_count)).collect();
    repair(theta, &all, constraints);
}

/// Removes rounding-level violations left by the walk so the result is
/// exactly feasible: clamps bounds, then raises each violated `high` to its
/// `low`. Values only ever copy existing ones, so this terminates.
fn repair(theta: &mut [f64], touched: &[usize], constraints: &ConstraintSet) {
    if let Some(bounds) = &constraints.bounds {
        for &i in touched {
            let (lo, hi) = bounds[i];
            theta[i] = theta[i].clamp(lo, hi);
        }
    }
    let mut queue: Vec<usize> = touched.to_vec();
    while let Some(i) = queue.pop() {
        for &r in &constraints.by_param[i] {
            let (low, high) = constraints.rows[r];
            if theta[high] < theta[low] {
                theta[high] = theta[low];
                queue.push(high);
            }
        }
    }
}

/// Euclidean projection onto the constraint set by Dykstra's alternating
/// projections, iterated until a full sweep moves the point by at most
/// `1e-10`. Intended for small problems.
pub fn project_exact(theta: &[f64], constraints: &ConstraintSet) -> Result<Vec<f64>> {
    project_exact_with_tolerance(theta, constraints, 1e-10)
}

pub const EXACT_PROJECTION_MAX_PARAMS: usize = 64;
const EXACT_PROJECTION_MAX_SWEEPS: usize = 1_000_000;

pub fn project_exact_with_tolerance(
    theta: &[f64],
    constraints: &ConstraintSet,
    tolerance: f64,
) -> Result<Vec<f64>> {
    let n = constraints.param_count;
    if theta.len() != n {
        return Err(Error::domain(format!(
            "constraint set covers {n} parameters, got {}",
            theta.len()
        )));
    }
    if n > EXACT_PROJECTION_MAX_PARAMS {
        return Err(Error::domain(format!(
            "exact projection supports at most {EXACT_PROJECTION_MAX_PARAMS} parameters, got {n}"
        )));
    }
    let mut x = theta.to_vec();
    // Dykstra correction for each row (two entries) and for the box
    let mut row_corr = vec![(0.0, 0.0); constraints.rows.len()];
    let mut box_corr = vec![0.0; n];
    for _ in 0..EXACT_PROJECTION_MAX_SWEEPS {
        let start = x.clone();
        for (r, &(low, high)) in constraints.rows.iter().enumerate() {
            let (cl, ch) = row_corr[r];
            let yl = x[low] + cl;
            let yh = x[high] + ch;
            let (pl, ph) = if yl > yh {
                let mid = 0.5 * (yl + yh);
                (mid, mid)
            } else {
                (yl, yh)
            };
            row_corr[r] = (yl - pl, yh - ph);
            x[low] = pl;
            x[high] = ph;
        }
        if let Some(bounds) = &constraints.bounds {
            for (i, &(lo, hi)) in bounds.iter().enumerate() {
                let y = x[i] + box_corr[i];
                let p = y.clamp(lo, hi);
                box_corr[i] = y - p;
                x[i] = p;
            }
        }
        let change: f64 = x.iter().zip(&start).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        if change <= tolerance {
            return Ok(x);
        }
    }
    Err(Error::Numerical(format!(
        "Dykstra projection did not converge in {EXACT_PROJECTION_MAX_SWEEPS} sweeps"
    )))
}
