//! Linear interpolation weights over a lattice cell.
//!
//! Three routes compute the weights `phi(x)` with `f(x) = theta . phi(x)`:
//! the product formula evaluated per vertex (`O(D 2^D)`, kept as a reference),
//! the dynamic-programming multilinear expansion (`O(2^D)`), and simplex
//! interpolation, which sorts the residual and touches only `D + 1` vertices
//! (`O(D log D)`).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::shape::{CellLocation, LatticeShape};

/// Largest dimension accepted by the dense reference weights.
pub const NAIVE_MAX_DIMS: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InterpolationKind {
    MultilinearNaive,
    #[default]
    Multilinear,
    Simplex,
}

impl InterpolationKind {
    pub const ALL: [InterpolationKind; 3] = [
        InterpolationKind::MultilinearNaive,
        InterpolationKind::Multilinear,
        InterpolationKind::Simplex,
    ];

    pub fn name(self) -> &'static str {
        match self {
            InterpolationKind::MultilinearNaive => "multilinear_naive",
            InterpolationKind::Multilinear => "multilinear",
            InterpolationKind::Simplex => "simplex",
        }
    }
}

impl fmt::Display for InterpolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for InterpolationKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "multilinear_naive" | "naive" => Ok(InterpolationKind::MultilinearNaive),
            "multilinear" => Ok(InterpolationKind::Multilinear),
            "simplex" => Ok(InterpolationKind::Simplex),
            other => Err(Error::config(format!("unknown interpolation kind {other:?}"))),
        }
    }
}

/// Interpolation weights on the vertices of one cell, as parallel lists of
/// flat parameter indices and weights.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SparseWeights {
    pub indices: Vec<usize>,
    pub weights: Vec<f64>,
}

impl SparseWeights {
    pub fn with_capacity(n: usize) -> Self {
        Self {
            indices: Vec::with_capacity(n),
            weights: Vec::with_capacity(n),
        }
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn clear(&mut self) {
        self.indices.clear();
        self.weights.clear();
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.indices.iter().copied().zip(self.weights.iter().copied())
    }

    /// `theta . phi(x)` restricted to the stored indices.
    #[inline]
    pub fn dot(&self, theta: &[f64]) -> f64 {
        self.indices
            .iter()
            .zip(&self.weights)
            .map(|(&i, &w)| theta[i] * w)
            .sum()
    }
}

fn check_residual(residual: &[f64]) -> Result<()> {
    for (d, &r) in residual.iter().enumerate() {
        if !(0.0..=1.0).contains(&r) {
            return Err(Error::domain(format!("residual[{d}] = {r} lies outside [0, 1]")));
        }
    }
    Ok(())
}

/// Dense multilinear weights for a unit cell, one product per vertex. Entry
/// `k` belongs to the vertex whose bit `d` is `(k >> d) & 1`.
pub fn multilinear_weights_naive(residual: &[f64]) -> Result<Vec<f64>> {
    let dims = residual.len();
    if dims > NAIVE_MAX_DIMS {
        return Err(Error::domain(format!(
            "dense weights support at most {NAIVE_MAX_DIMS} dimensions, got {dims}"
        )));
    }
    check_residual(residual)?;
    let weights = (0..1usize << dims)
        .map(|k| {
            residual
                .iter()
                .enumerate()
                .map(|(d, &r)| if (k >> d) & 1 == 1 { r } else { 1.0 - r })
                .product()
        })
        .collect();
    Ok(weights)
}

/// Multilinear weights by the doubling expansion: dimension `d` splits every
/// existing weight into a `1 - r` part kept in place and an `r` part appended
/// at offset `stride[d]`.
pub fn multilinear_weights(shape: &LatticeShape, loc: &CellLocation) -> SparseWeights {
    let mut out = SparseWeights::with_capacity(1 << shape.dims());
    multilinear_weights_into(shape, loc, &mut out);
    out
}

pub fn multilinear_weights_into(shape: &LatticeShape, loc: &CellLocation, out: &mut SparseWeights) {
    out.clear();
    out.indices.push(shape.base_index(&loc.base));
    out.weights.push(1.0);
    for (&r, &stride) in loc.residual.iter().zip(shape.strides()) {
        let n = out.indices.len();
        for k in 0..n {
            let w = out.weights[k];
            out.indices.push(out.indices[k] + stride);
            out.weights.push(r * w);
            out.weights[k] = (1.0 - r) * w;
        }
    }
}

/// Simplex weights: with the residual sorted descending as
/// `r[p1] >= r[p2] >= ... >= r[pD]`, the weights `1 - r[p1], r[p1] - r[p2], ...,
/// r[pD]` fall on the chain of vertices that switches on bits `p1, p2, ...` in
/// turn. Ties are ordered by ascending dimension.
pub fn simplex_weights(shape: &LatticeShape, loc: &CellLocation) -> SparseWeights {
    let mut out = SparseWeights::with_capacity(shape.dims() + 1);
    let mut order = Vec::with_capacity(shape.dims());
    simplex_weights_into(shape, loc, &mut out, &mut order);
    out
}

pub fn simplex_weights_into(
    shape: &LatticeShape,
    loc: &CellLocation,
    out: &mut SparseWeights,
    order: &mut Vec<usize>,
) {
    sort_descending(&loc.residual, order);
    out.clear();
    let mut index = shape.base_index(&loc.base);
    let strides = shape.strides();
    let mut prev = 1.0;
    out.indices.push(index);
    for &d in order.iter() {
        let r = loc.residual[d];
        out.weights.push(prev - r);
        index += strides[d];
        out.indices.push(index);
        prev = r;
    }
    out.weights.push(prev);
}

/// Dimensions ordered by descending residual, ties by ascending dimension.
fn sort_descending(residual: &[f64], order: &mut Vec<usize>) {
    order.clear();
    order.extend(0..residual.len());
    order.sort_unstable_by(|&a, &b| residual[b].total_cmp(&residual[a]).then(a.cmp(&b)));
}

/// Weights of any kind for a located point.
pub fn interpolation_weights(
    shape: &LatticeShape,
    loc: &CellLocation,
    kind: InterpolationKind,
) -> SparseWeights {
    match kind {
        InterpolationKind::MultilinearNaive => {
            let dense = multilinear_weights_naive(&loc.residual)
                .expect("located residual lies in the unit cube");
            let base = shape.base_index(&loc.base);
            let strides = shape.strides();
            let indices = (0..dense.len())
                .map(|k| {
                    base + strides
                        .iter()
                        .enumerate()
                        .filter(|&(d, _)| (k >> d) & 1 == 1)
                        .map(|(_, s)| s)
                        .sum::<usize>()
                })
                .collect();
            SparseWeights { indices, weights: dense }
        }
        InterpolationKind::Multilinear => multilinear_weights(shape, loc),
        InterpolationKind::Simplex => simplex_weights(shape, loc),
    }
}

/// `f(x) = theta . phi(x)` for a point in the lattice span.
pub fn evaluate(
    theta: &[f64],
    shape: &LatticeShape,
    x: &[f64],
    kind: InterpolationKind,
) -> Result<f64> {
    check_theta(theta, shape)?;
    let loc = shape.locate_cell(x)?;
    Ok(interpolation_weights(shape, &loc, kind).dot(theta))
}

fn check_theta(theta: &[f64], shape: &LatticeShape) -> Result<()> {
    if theta.len() != shape.len() {
        return Err(Error::domain(format!(
            "lattice has {} parameters, got {}",
            shape.len(),
            theta.len()
        )));
    }
    Ok(())
}

/// Partial derivatives of the interpolated function with respect to each
/// coordinate of the point, inside the given cell. On simplex boundaries the
/// derivative of the simplex selected by the tie order is returned.
pub fn input_gradient(
    theta: &[f64],
    shape: &LatticeShape,
    loc: &CellLocation,
    kind: InterpolationKind,
) -> Vec<f64> {
    let dims = shape.dims();
    let strides = shape.strides();
    let base = shape.base_index(&loc.base);
    match kind {
        InterpolationKind::Simplex => {
            let mut order = Vec::with_capacity(dims);
            sort_descending(&loc.residual, &mut order);
            let mut grad = vec![0.0; dims];
            let mut index = base;
            for &d in &order {
                let next = index + strides[d];
                grad[d] = theta[next] - theta[index];
                index = next;
            }
            grad
        }
        InterpolationKind::Multilinear | InterpolationKind::MultilinearNaive => {
            // d/dr_d replaces the (1 - r_d, r_d) factor pair by (-1, 1).
            let mut indices = Vec::with_capacity(1 << dims);
            let mut weights = Vec::with_capacity(1 << dims);
            (0..dims)
                .map(|target| {
                    indices.clear();
                    weights.clear();
                    indices.push(base);
                    weights.push(1.0);
                    for (d, (&r, &stride)) in loc.residual.iter().zip(strides).enumerate() {
                        let (lo, hi) = if d == target { (-1.0, 1.0) } else { (1.0 - r, r) };
                        let n = indices.len();
                        for k in 0..n {
                            let w = weights[k];
                            indices.push(indices[k] + stride);
                            weights.push(hi * w);
                            weights[k] = lo * w;
                        }
                    }
                    indices.iter().zip(&weights).map(|(&i, &w)| theta[i] * w).sum()
                })
                .collect()
        }
    }
}

/// Evaluates many points against one lattice while reusing scratch buffers.
#[derive(Debug, Clone)]
pub struct Interpolator {
    kind: InterpolationKind,
    loc: CellLocation,
    weights: SparseWeights,
    order: Vec<usize>,
    reserved_top: Vec<bool>,
}

impl Interpolator {
    pub fn new(shape: &LatticeShape, kind: InterpolationKind) -> Self {
        let dims = shape.dims();
        let cap = match kind {
            InterpolationKind::Simplex => dims + 1,
            _ => 1 << dims.min(NAIVE_MAX_DIMS),
        };
        Self {
            kind,
            loc: CellLocation {
                base: vec![0; dims],
                residual: vec![0.0; dims],
            },
            weights: SparseWeights::with_capacity(cap),
            order: Vec::with_capacity(dims),
            reserved_top: Vec::new(),
        }
    }

    /// Marks features whose last slice is reserved for missing values.
    /// Points on the top observed slice of such a feature are then placed
    /// in the cell below it, so that the reserved slice only takes part when
    /// the coordinate is exactly `M - 1`.
    pub fn with_reserved_top(mut self, flags: &[bool]) -> Self {
        self.reserved_top = flags.to_vec();
        self
    }

    /// The cell found by the last call to `weights` or `evaluate`.
    pub fn location(&self) -> &CellLocation {
        &self.loc
    }

    fn locate(&mut self, shape: &LatticeShape, x: &[f64]) -> Result<()> {
        shape.locate_cell_into(x, &mut self.loc)?;
        for (d, &reserved) in self.reserved_top.iter().enumerate() {
            let m = shape.sizes()[d];
            if reserved && self.loc.base[d] == m - 2 && self.loc.residual[d] == 0.0 && m >= 3 {
                self.loc.base[d] = m - 3;
                self.loc.residual[d] = 1.0;
            }
        }
        Ok(())
    }

    pub fn kind(&self) -> InterpolationKind {
        self.kind
    }

    /// Locates `x` and computes its weights, returning the borrowed result.
    pub fn weights(&mut self, shape: &LatticeShape, x: &[f64]) -> Result<&SparseWeights> {
        self.locate(shape, x)?;
        self.weights_at_location(shape);
        Ok(&self.weights)
    }

    fn weights_at_location(&mut self, shape: &LatticeShape) {
        match self.kind {
            InterpolationKind::Multilinear => {
                multilinear_weights_into(shape, &self.loc, &mut self.weights)
            }
            InterpolationKind::Simplex => {
                simplex_weights_into(shape, &self.loc, &mut self.weights, &mut self.order)
            }
            InterpolationKind::MultilinearNaive => {
                self.weights = interpolation_weights(shape, &self.loc, self.kind)
            }
        }
    }

    #[inline]
    pub fn evaluate(&mut self, theta: &[f64], shape: &LatticeShape, x: &[f64]) -> Result<f64> {
        if self.kind == InterpolationKind::MultilinearNaive {
            self.locate(shape, x)?;
            return Ok(naive_dot(theta, shape, &self.loc));
        }
        Ok(self.weights(shape, x)?.dot(theta))
    }
}

/// Evaluates the product formula vertex by vertex without materializing the
/// weights; this is the `O(D 2^D)` baseline used by the timing harness.
fn naive_dot(theta: &[f64], shape: &LatticeShape, loc: &CellLocation) -> f64 {
    let base = shape.base_index(&loc.base);
    let strides = shape.strides();
    let mut total = 0.0;
    for k in 0..1usize << shape.dims() {
        let mut w = 1.0;
        let mut index = base;
        for (d, &r) in loc.residual.iter().enumerate() {
            if (k >> d) & 1 == 1 {
                w *= r;
                index += strides[d];
            } else {
                w *= 1.0 - r;
            }
        }
        total += theta[index] * w;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn shape(sizes: &[usize]) -> LatticeShape {
        LatticeShape::new(sizes.to_vec()).unwrap()
    }

    fn unit_loc(residual: &[f64]) -> CellLocation {
        CellLocation {
            base: vec![0; residual.len()],
            residual: residual.to_vec(),
        }
    }

    fn assert_close(a: &[f64], b: &[f64], tol: f64) {
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() <= tol, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn naive_weights_examples() {
        // hand evaluation of the product formula at (0.8, 0.2)
        let w = multilinear_weights_naive(&[0.8, 0.2]).unwrap();
        assert_close(&w, &[0.2 * 0.8, 0.8 * 0.8, 0.2 * 0.2, 0.8 * 0.2], 1e-15);
        assert_close(&w, &[0.16, 0.64, 0.04, 0.16], 1e-12);

        let w = multilinear_weights_naive(&[0.5, 0.5]).unwrap();
        assert_eq!(w, vec![0.25; 4]);

        let w = multilinear_weights_naive(&[1.0, 0.0, 0.0, 0.0]).unwrap();
        for (k, wk) in w.iter().enumerate() {
            assert_eq!(*wk, if k == 1 { 1.0 } else { 0.0 });
        }

        assert!(multilinear_weights_naive(&[1.2, 0.0]).is_err());
        assert!(multilinear_weights_naive(&[f64::NAN]).is_err());
    }

    #[test]
    fn fast_multilinear_examples() {
        let s = shape(&[2, 2]);
        let w = multilinear_weights(&s, &unit_loc(&[0.8, 0.2]));
        assert_eq!(w.indices, vec![0, 1, 2, 3]);
        assert_close(&w.weights, &[0.16, 0.64, 0.04, 0.16], 1e-12);

        let s32 = shape(&[3, 2]);
        let loc = CellLocation { base: vec![1, 0], residual: vec![0.0, 0.0] };
        let w = multilinear_weights(&s32, &loc);
        assert_eq!(w.len(), 4);
        for (i, wt) in w.iter() {
            assert_eq!(wt, if i == 1 { 1.0 } else { 0.0 });
        }

        let theta = [0.0, 0.5, 1.0, 1.0];
        let f = evaluate(&theta, &s, &[0.5, 0.5], InterpolationKind::Multilinear).unwrap();
        assert!((f - 0.625).abs() < 1e-15);
    }

    #[test]
    fn simplex_examples() {
        let s = shape(&[2, 2, 2]);
        let w = simplex_weights(&s, &unit_loc(&[0.8, 0.2, 0.3]));
        // vertices [000], [100], [101], [111]
        let expected: Vec<usize> = [[0, 0, 0], [1, 0, 0], [1, 0, 1], [1, 1, 1]]
            .iter()
            .map(|c| s.vertex_index(c).unwrap())
            .collect();
        assert_eq!(w.indices, expected);
        assert_close(&w.weights, &[0.2, 0.5, 0.1, 0.2], 1e-12);

        let s2 = shape(&[2, 2]);
        let w = simplex_weights(&s2, &unit_loc(&[0.7, 0.4]));
        assert_eq!(w.indices, vec![0, 1, 3]);
        assert_close(&w.weights, &[0.3, 0.7 - 0.4, 0.4], 1e-15);

        let theta = [0.0, 0.5, 1.0, 1.0];
        let w = simplex_weights(&s2, &unit_loc(&[0.5, 0.5]));
        assert_close(&w.weights, &[0.5, 0.0, 0.5], 0.0);
        assert_eq!(w.dot(&theta), 0.5);
    }

    #[test]
    fn evaluate_examples() {
        let s = shape(&[2, 2]);
        let theta = [6.0, 3.0, 5.0, 8.0];
        for kind in InterpolationKind::ALL {
            // multilinear centre is the mean; simplex uses the diagonal 6, 8
            let f = evaluate(&theta, &s, &[0.5, 0.5], kind).unwrap();
            if kind == InterpolationKind::Simplex {
                assert_eq!(f, 7.0);
            } else {
                assert_eq!(f, 5.5);
            }
        }
        assert!(evaluate(&theta, &s, &[1.5, 0.0], InterpolationKind::Simplex).is_err());
        assert!(evaluate(&theta[..3], &s, &[0.5, 0.0], InterpolationKind::Simplex).is_err());
    }

    #[test]
    fn vertices_reproduce_parameters_exactly() {
        let s = shape(&[3, 2, 4]);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let theta: Vec<f64> = (0..s.len()).map(|_| rng.random::<f64>()).collect();
        for index in 0..s.len() {
            let x: Vec<f64> = s.vertex_coords(index).unwrap().iter().map(|&c| c as f64).collect();
            for kind in InterpolationKind::ALL {
                assert_eq!(evaluate(&theta, &s, &x, kind).unwrap(), theta[index]);
            }
        }
    }

    #[test]
    fn linear_parameters_give_linear_function() {
        let s = shape(&[3, 2, 4]);
        let w = [0.7, -1.3, 2.1];
        let theta: Vec<f64> = (0..s.len())
            .map(|i| {
                let c = s.vertex_coords(i).unwrap();
                c.iter().zip(&w).map(|(&c, w)| c as f64 * w).sum()
            })
            .collect();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..1000 {
            let x: Vec<f64> = s.sizes().iter().map(|&m| rng.random::<f64>() * (m - 1) as f64).collect();
            let expected: f64 = x.iter().zip(&w).map(|(a, b)| a * b).sum();
            for kind in InterpolationKind::ALL {
                let f = evaluate(&theta, &s, &x, kind).unwrap();
                assert!((f - expected).abs() < 1e-12, "{kind}: {f} vs {expected}");
            }
        }
    }

    fn check_simplex_membership_and_linear_precision(kind: InterpolationKind, dims: usize, n: usize) {
        let s = LatticeShape::binary(dims).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(dims as u64);
        for _ in 0..n {
            let r: Vec<f64> = (0..dims).map(|_| rng.random::<f64>()).collect();
            let w = interpolation_weights(&s, &unit_loc(&r), kind);
            let sum: f64 = w.weights.iter().sum();
            assert!((sum - 1.0).abs() <= 1e-12);
            assert!(w.weights.iter().all(|&x| x >= -1e-15));
            let mut centroid = vec![0.0; dims];
            for (i, wt) in w.iter() {
                for (d, c) in centroid.iter_mut().enumerate() {
                    if (i >> d) & 1 == 1 {
                        *c += wt;
                    }
                }
            }
            assert_close(&centroid, &r, 1e-12);
        }
    }

    #[test]
    fn weights_solve_the_linear_interpolation_system() {
        for dims in 1..=12 {
            let n = if dims > 9 { 300 } else { 3000 };
            for kind in InterpolationKind::ALL {
                check_simplex_membership_and_linear_precision(kind, dims, n);
            }
        }
    }

    #[test]
    fn fast_multilinear_matches_naive() {
        for dims in 1..=10 {
            let s = LatticeShape::binary(dims).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(100 + dims as u64);
            for _ in 0..500 {
                let r: Vec<f64> = (0..dims).map(|_| rng.random::<f64>()).collect();
                let naive = multilinear_weights_naive(&r).unwrap();
                let fast = multilinear_weights(&s, &unit_loc(&r));
                assert_eq!(fast.indices, (0..1 << dims).collect::<Vec<_>>());
                assert_close(&fast.weights, &naive, 1e-12);
            }
        }
    }

    #[test]
    fn simplex_ties_put_zero_weight_off_the_shared_face() {
        let s = LatticeShape::binary(3).unwrap();
        // x[0] == x[2]: both adjacent simplices share the face without the
        // vertex that sets only one of the tied bits
        let w = simplex_weights(&s, &unit_loc(&[0.6, 0.1, 0.6]));
        let mut dense = [0.0; 8];
        for (i, wt) in w.iter() {
            dense[i] = wt;
        }
        assert_eq!(dense[0b001], 0.0);
        assert_eq!(dense[0b100], 0.0);
        // the alternative tie order gives the same function value
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..100 {
            let theta: Vec<f64> = (0..8).map(|_| rng.random::<f64>()).collect();
            let f = w.dot(&theta);
            let perturbed_a = simplex_weights(&s, &unit_loc(&[0.6 + 1e-13, 0.1, 0.6])).dot(&theta);
            let perturbed_b = simplex_weights(&s, &unit_loc(&[0.6, 0.1, 0.6 + 1e-13])).dot(&theta);
            assert!((f - perturbed_a).abs() < 1e-11);
            assert!((f - perturbed_b).abs() < 1e-11);
        }
    }

    #[test]
    fn continuity_across_cell_boundaries() {
        let s = shape(&[3, 4, 2]);
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let theta: Vec<f64> = (0..s.len()).map(|_| rng.random::<f64>()).collect();
        for _ in 0..1000 {
            let d = rng.random_range(0..2);
            let face = rng.random_range(1..s.sizes()[d] - 1) as f64;
            let mut residual: Vec<f64> = (0..3).map(|_| rng.random::<f64>()).collect();
            let mut lower_base = vec![rng.random_range(0..2), rng.random_range(0..3), 0];
            lower_base[d] = face as usize - 1;
            let mut upper_base = lower_base.clone();
            upper_base[d] = face as usize;
            residual[d] = 1.0;
            let from_below = CellLocation { base: lower_base, residual: residual.clone() };
            residual[d] = 0.0;
            let from_above = CellLocation { base: upper_base, residual };
            for kind in InterpolationKind::ALL {
                let a = interpolation_weights(&s, &from_below, kind).dot(&theta);
                let b = interpolation_weights(&s, &from_above, kind).dot(&theta);
                assert!((a - b).abs() <= 1e-12, "{kind}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn input_gradient_matches_finite_differences() {
        let s = shape(&[3, 2, 3]);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let theta: Vec<f64> = (0..s.len()).map(|_| rng.random::<f64>()).collect();
        let h = 1e-6;
        for _ in 0..200 {
            let x: Vec<f64> = s
                .sizes()
                .iter()
                .map(|&m| 0.01 + rng.random::<f64>() * ((m - 1) as f64 - 0.02))
                .collect();
            for kind in [InterpolationKind::Multilinear, InterpolationKind::Simplex] {
                let loc = s.locate_cell(&x).unwrap();
                let g = input_gradient(&theta, &s, &loc, kind);
                for d in 0..3 {
                    let mut up = x.clone();
                    let mut down = x.clone();
                    up[d] += h;
                    down[d] -= h;
                    // stay inside one cell and one simplex
                    if up[d].floor() != x[d].floor() || down[d].floor() != x[d].floor() {
                        continue;
                    }
                    let fd = (evaluate(&theta, &s, &up, kind).unwrap()
                        - evaluate(&theta, &s, &down, kind).unwrap())
                        / (2.0 * h);
                    let near_tie = kind == InterpolationKind::Simplex
                        && loc.residual.iter().enumerate().any(|(e, &r)| {
                            e != d && (r - loc.residual[d]).abs() < 2.0 * h
                        });
                    if !near_tie {
                        assert!((fd - g[d]).abs() < 1e-6, "{kind} d={d}: {fd} vs {}", g[d]);
                    }
                }
            }
        }
    }

    #[test]
    fn interpolator_matches_free_functions() {
        let s = shape(&[2, 3, 2, 2]);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let theta: Vec<f64> = (0..s.len()).map(|_| rng.random::<f64>()).collect();
        for kind in InterpolationKind::ALL {
            let mut interp = Interpolator::new(&s, kind);
            for _ in 0..200 {
                let x: Vec<f64> = s.sizes().iter().map(|&m| rng.random::<f64>() * (m - 1) as f64).collect();
                let a = interp.evaluate(&theta, &s, &x).unwrap();
                let b = evaluate(&theta, &s, &x, kind).unwrap();
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn kind_parses() {
        assert_eq!("simplex".parse::<InterpolationKind>().unwrap(), InterpolationKind::Simplex);
        assert_eq!("Multilinear".parse::<InterpolationKind>().unwrap(), InterpolationKind::Multilinear);
        assert!("cubic".parse::<InterpolationKind>().is_err());
    }

    #[test]
    fn reserved_top_slice_only_used_for_exact_top() {
        let s = LatticeShape::new(vec![4, 2]).unwrap();
        let theta: Vec<f64> = (0..s.len()).map(|i| i as f64).collect();
        let mut plain = Interpolator::new(&s, InterpolationKind::Multilinear);
        let mut reserved = Interpolator::new(&s, InterpolationKind::Multilinear).with_reserved_top(&[true, false]);
        for x in [[2.0, 0.3], [1.5, 1.0], [3.0, 0.5]] {
            let a = plain.evaluate(&theta, &s, &x).unwrap();
            let b = reserved.evaluate(&theta, &s, &x).unwrap();
            assert_eq!(a, b);
        }
        reserved.evaluate(&theta, &s, &[2.0, 0.3]).unwrap();
        assert_eq!(reserved.location().base, vec![1, 0]);
        assert_eq!(reserved.location().residual, vec![1.0, 0.3]);
        reserved.evaluate(&theta, &s, &[3.0, 0.3]).unwrap();
        assert_eq!(reserved.location().base, vec![2, 0]);
    }
}
