//! Graph regularizers on lattice parameters.
//!
//! Each regularizer is a sum of squared sparse linear forms of `theta`:
//! - Laplacian: `(theta_s - theta_r)^2` for every pair of adjacent vertices;
//! - Hessian: `(theta_{t+1} - 2 theta_t + theta_{t-1})^2` for every run of
//!   three consecutive vertices along a feature;
//! - Torsion: `((theta_r - theta_s) - (theta_t - theta_u))^2` for every unit
//!   square face of the lattice, where `r, s` and `t, u` are parallel edges.
//!
//! Torsion counts each face once. Summing over ordered feature pairs would
//! give every face twice with the same value, so this convention halves the
//! penalty for a given weight.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::monotonicity::{feature_edges, pairs_along};
use crate::shape::LatticeShape;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegularizerKind {
    Laplacian,
    Hessian,
    Torsion,
}

impl RegularizerKind {
    pub const ALL: [RegularizerKind; 3] = [
        RegularizerKind::Laplacian,
        RegularizerKind::Hessian,
        RegularizerKind::Torsion,
    ];
}

impl fmt::Display for RegularizerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RegularizerKind::Laplacian => "laplacian",
            RegularizerKind::Hessian => "hessian",
            RegularizerKind::Torsion => "torsion",
        })
    }
}

impl FromStr for RegularizerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "laplacian" => Ok(RegularizerKind::Laplacian),
            "hessian" => Ok(RegularizerKind::Hessian),
            "torsion" => Ok(RegularizerKind::Torsion),
            other => Err(Error::config(format!("unknown regularizer {other:?}"))),
        }
    }
}

/// How many regularizer terms each stochastic step samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleCount {
    #[default]
    All,
    Sampled(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegularizerConfig {
    pub kind: RegularizerKind,
    pub weight: f64,
    #[serde(default)]
    pub samples: SampleCount,
}

impl RegularizerConfig {
    pub fn new(kind: RegularizerKind, weight: f64, samples: SampleCount) -> Result<Self> {
        if !(weight >= 0.0 && weight.is_finite()) {
            return Err(Error::config(format!("regularizer weight must be >= 0, got {weight}")));
        }
        if samples == SampleCount::Sampled(0) {
            return Err(Error::config("regularizer sample count must be >= 1"));
        }
        Ok(Self { kind, weight, samples })
    }
}

/// Parses `kind:weight[:samples]`, e.g. `torsion:0.1:1024`.
impl FromStr for RegularizerConfig {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        if !(2..=3).contains(&parts.len()) {
            return Err(Error::config(format!(
                "regularizer {s:?} should look like kind:weight[:samples]"
            )));
        }
        let kind = parts[0].parse()?;
        let weight = parts[1]
            .parse::<f64>()
            .map_err(|_| Error::config(format!("bad regularizer weight {:?}", parts[1])))?;
        let samples = match parts.get(2) {
            None => SampleCount::All,
            Some(&"all") => SampleCount::All,
            Some(k) => SampleCount::Sampled(
                k.parse()
                    .map_err(|_| Error::config(format!("bad regularizer sample count {k:?}")))?,
            ),
        };
        Self::new(kind, weight, samples)
    }
}

/// One additive term: the square of a linear form over at most four
/// parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Term {
    len: u8,
    indices: [usize; 4],
    coefs: [f64; 4],
}

impl Term {
    fn new(entries: &[(usize, f64)]) -> Self {
        let mut indices = [0; 4];
        let mut coefs = [0.0; 4];
        for (k, &(i, c)) in entries.iter().enumerate() {
            indices[k] = i;
            coefs[k] = c;
        }
        Self {
            len: entries.len() as u8,
            indices,
            coefs,
        }
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        let n = self.len as usize;
        self.indices[..n].iter().copied().zip(self.coefs[..n].iter().copied())
    }

    #[inline]
    fn linear_form(&self, theta: &[f64]) -> f64 {
        self.entries().map(|(i, c)| c * theta[i]).sum()
    }

    pub fn value(&self, theta: &[f64]) -> f64 {
        let a = self.linear_form(theta);
        a * a
    }

    /// Adds `scale * d(term)/d(theta)` into `grad`.
    #[inline]
    pub fn add_gradient(&self, theta: &[f64], scale: f64, grad: &mut [f64]) {
        let a = 2.0 * scale * self.linear_form(theta);
        for (i, c) in self.entries() {
            grad[i] += a * c;
        }
    }
}

/// The materialized term list of one regularizer over one lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct RegularizerTerms {
    kind: RegularizerKind,
    param_count: usize,
    terms: Vec<Term>,
}

pub fn regularizer_terms(shape: &LatticeShape, kind: RegularizerKind) -> RegularizerTerms {
    RegularizerTerms::build(shape, kind, &vec![false; shape.dims()])
}

impl RegularizerTerms {
    /// Builds the terms; features flagged in `missing_vertex` treat their
    /// last (missing-value) slice as adjacent to the lowest and highest
    /// observed slices.
    pub fn build(shape: &LatticeShape, kind: RegularizerKind, missing_vertex: &[bool]) -> Self {
        assert_eq!(missing_vertex.len(), shape.dims());
        let dims = shape.dims();
        let edges: Vec<Vec<(usize, usize)>> = (0..dims)
            .map(|d| {
                let m = shape.sizes()[d];
                feature_edges(m, missing_vertex[d] && m >= 3)
            })
            .collect();
        let mut terms = Vec::new();
        match kind {
            RegularizerKind::Laplacian => {
                for d in 0..dims {
                    for &(a, b) in &edges[d] {
                        for (r, s) in pairs_along(shape, d, a, b) {
                            terms.push(Term::new(&[(s, 1.0), (r, -1.0)]));
                        }
                    }
                }
            }
            RegularizerKind::Hessian => {
                for d in 0..dims {
                    let m = shape.sizes()[d];
                    let observed = if missing_vertex[d] && m >= 3 { m - 1 } else { m };
                    let stride = shape.strides()[d];
                    for c in 0..observed.saturating_sub(2) {
                        for (lo, _) in pairs_along(shape, d, c, c + 1) {
                            terms.push(Term::new(&[
                                (lo, 1.0),
                                (lo + stride, -2.0),
                                (lo + 2 * stride, 1.0),
                            ]));
                        }
                    }
                }
            }
            RegularizerKind::Torsion => {
                let mut coords = vec![0; dims];
                for d in 0..dims {
                    for e in d + 1..dims {
                        let (sd, se) = (shape.strides()[d], shape.strides()[e]);
                        for origin in 0..shape.len() {
                            shape.write_coords(origin, &mut coords);
                            if coords[d] != 0 || coords[e] != 0 {
                                continue;
                            }
                            for &(a, b) in &edges[d] {
                                for &(c, f) in &edges[e] {
                                    let at = |x: usize, y: usize| origin + x * sd + y * se;
                                    let (r, s) = (at(a, c), at(b, c));
                                    let (t, u) = (at(a, f), at(b, f));
                                    terms.push(Term::new(&[(r, 1.0), (s, -1.0), (t, -1.0), (u, 1.0)]));
                                }
                            }
                        }
                    }
                }
            }
        }
        Self {
            kind,
            param_count: shape.len(),
            terms,
        }
    }

    pub fn kind(&self) -> RegularizerKind {
        self.kind
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn value(&self, theta: &[f64]) -> f64 {
        self.terms.iter().map(|t| t.value(theta)).sum()
    }

    pub fn value_grad(&self, theta: &[f64]) -> (f64, Vec<f64>) {
        let mut grad = vec![0.0; self.param_count];
        self.add_gradient(theta, 1.0, &mut grad);
        (self.value(theta), grad)
    }

    pub fn add_gradient(&self, theta: &[f64], scale: f64, grad: &mut [f64]) {
        for t in &self.terms {
            t.add_gradient(theta, scale, grad);
        }
    }

    /// Unbiased estimate of the full gradient from `samples` terms drawn
    /// uniformly with replacement, scaled by `m / samples`.
    pub fn sample_subgradient<R: Rng + ?Sized>(&self, theta: &[f64], samples: usize, rng: &mut R) -> Vec<f64> {
        let mut grad = vec![0.0; self.param_count];
        self.add_sampled_gradient(theta, samples, 1.0, rng, &mut grad);
        grad
    }

    pub fn add_sampled_gradient<R: Rng + ?Sized>(
        &self,
        theta: &[f64],
        samples: usize,
        scale: f64,
        rng: &mut R,
        grad: &mut [f64],
    ) {
        let m = self.terms.len();
        if m == 0 || samples == 0 {
            return;
        }
        let factor = scale * m as f64 / samples as f64;
        for _ in 0..samples {
            self.terms[rng.random_range(0..m)].add_gradient(theta, factor, grad);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn shape(sizes: &[usize]) -> LatticeShape {
        LatticeShape::new(sizes.to_vec()).unwrap()
    }

    fn linear_theta(s: &LatticeShape, offset: f64, w: &[f64]) -> Vec<f64> {
        (0..s.len())
            .map(|i| {
                offset
                    + s.vertex_coords(i)
                        .unwrap()
                        .iter()
                        .zip(w)
                        .map(|(&c, w)| c as f64 * w)
                        .sum::<f64>()
            })
            .collect()
    }

    #[test]
    fn term_count_examples() {
        assert_eq!(regularizer_terms(&shape(&[2, 2]), RegularizerKind::Laplacian).len(), 4);
        assert_eq!(regularizer_terms(&shape(&[2, 2]), RegularizerKind::Hessian).len(), 0);
        for dims in 2..=8 {
            let t = regularizer_terms(&LatticeShape::binary(dims).unwrap(), RegularizerKind::Torsion);
            assert_eq!(t.len(), dims * (dims - 1) * (1 << dims) / 8);
            let l = regularizer_terms(&LatticeShape::binary(dims).unwrap(), RegularizerKind::Laplacian);
            assert_eq!(l.len(), dims << (dims - 1));
        }
    }

    /// Independent count by brute-force enumeration over vertex tuples.
    fn brute_force_count(s: &LatticeShape, kind: RegularizerKind) -> usize {
        let coords: Vec<Vec<usize>> = (0..s.len()).map(|i| s.vertex_coords(i).unwrap()).collect();
        let diff = |a: &[usize], b: &[usize]| -> Vec<i64> {
            a.iter().zip(b).map(|(&x, &y)| y as i64 - x as i64).collect()
        };
        let unit = |v: &[i64]| v.iter().filter(|&&x| x != 0).count() == 1 && v.iter().all(|&x| x == 0 || x == 1);
        let n = s.len();
        match kind {
            RegularizerKind::Laplacian => (0..n)
                .flat_map(|a| (0..n).map(move |b| (a, b)))
                .filter(|&(a, b)| unit(&diff(&coords[a], &coords[b])))
                .count(),
            RegularizerKind::Hessian => (0..n)
                .flat_map(|a| (0..n).map(move |b| (a, b)))
                .filter(|&(a, b)| unit(&diff(&coords[a], &coords[b])))
                .map(|(a, b)| {
                    let step = diff(&coords[a], &coords[b]);
                    (0..n).filter(|&c| diff(&coords[b], &coords[c]) == step).count()
                })
                .sum(),
            RegularizerKind::Torsion => {
                // unit squares: origin a plus two distinct unit steps, counted once
                let mut count = 0;
                for a in 0..n {
                    for b in 0..n {
                        for c in 0..n {
                            let (u, v) = (diff(&coords[a], &coords[b]), diff(&coords[a], &coords[c]));
                            if unit(&u) && unit(&v) && u < v {
                                let far: Vec<usize> = coords[a]
                                    .iter()
                                    .zip(u.iter().zip(&v))
                                    .map(|(&x, (p, q))| (x as i64 + p + q) as usize)
                                    .collect();
                                if s.vertex_index(&far).is_ok() {
                                    count += 1;
                                }
                            }
                        }
                    }
                }
                count
            }
        }
    }

    fn closed_form_count(sizes: &[usize], kind: RegularizerKind) -> usize {
        let prod_except = |skip: &[usize]| -> usize {
            sizes.iter().enumerate().filter(|(i, _)| !skip.contains(i)).map(|(_, m)| m).product()
        };
        let d = sizes.len();
        match kind {
            RegularizerKind::Laplacian => (0..d).map(|i| (sizes[i] - 1) * prod_except(&[i])).sum(),
            RegularizerKind::Hessian => (0..d).map(|i| (sizes[i] - 2) * prod_except(&[i])).sum(),
            RegularizerKind::Torsion => (0..d)
                .flat_map(|i| (i + 1..d).map(move |j| (i, j)))
                .map(|(i, j)| (sizes[i] - 1) * (sizes[j] - 1) * prod_except(&[i, j]))
                .sum(),
        }
    }

    #[test]
    fn term_counts_match_enumeration() {
        for sizes in [vec![2, 2], vec![3, 2], vec![3, 3, 3], vec![2, 3, 2, 3], vec![3, 3, 3, 3], vec![4, 2]] {
            let s = shape(&sizes);
            for kind in RegularizerKind::ALL {
                let built = regularizer_terms(&s, kind).len();
                assert_eq!(built, closed_form_count(&sizes, kind), "{sizes:?} {kind}");
                assert_eq!(built, brute_force_count(&s, kind), "{sizes:?} {kind}");
            }
        }
    }

    #[test]
    fn value_examples() {
        let s = shape(&[2, 2]);
        let linear = linear_theta(&s, 0.0, &[2.0, 3.0]);
        assert_eq!(regularizer_terms(&s, RegularizerKind::Torsion).value(&linear), 0.0);
        let xor = [0.0, 1.0, 1.0, 0.0];
        assert_eq!(regularizer_terms(&s, RegularizerKind::Torsion).value(&xor), 4.0);
        assert_eq!(regularizer_terms(&s, RegularizerKind::Laplacian).value(&xor), 4.0);
        let (v, g) = regularizer_terms(&s, RegularizerKind::Hessian).value_grad(&xor);
        assert_eq!(v, 0.0);
        assert_eq!(g, vec![0.0; 4]);
    }

    #[test]
    fn quadratic_form_properties() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for sizes in [vec![2, 2, 2], vec![3, 4], vec![3, 3, 2]] {
            let s = shape(&sizes);
            let constant = vec![1.7; s.len()];
            let w: Vec<f64> = (0..sizes.len()).map(|_| rng.random_range(-2.0..2.0)).collect();
            let linear = linear_theta(&s, 0.3, &w);
            for kind in RegularizerKind::ALL {
                let terms = regularizer_terms(&s, kind);
                assert_eq!(terms.value(&constant), 0.0);
                for _ in 0..50 {
                    let theta: Vec<f64> = (0..s.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
                    assert!(terms.value(&theta) >= 0.0);
                }
                if kind != RegularizerKind::Laplacian {
                    assert!(terms.value(&linear) < 1e-24, "{kind} on linear theta");
                }
            }
        }
    }

    #[test]
    fn gradients_match_central_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for sizes in [vec![2; 8], vec![3, 3, 3], vec![4, 2, 3]] {
            let s = shape(&sizes);
            for kind in RegularizerKind::ALL {
                let terms = regularizer_terms(&s, kind);
                let theta: Vec<f64> = (0..s.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
                let (_, grad) = terms.value_grad(&theta);
                let h = 1e-5;
                for i in (0..s.len()).step_by(7) {
                    let mut up = theta.clone();
                    let mut down = theta.clone();
                    up[i] += h;
                    down[i] -= h;
                    let fd = (terms.value(&up) - terms.value(&down)) / (2.0 * h);
                    assert!((fd - grad[i]).abs() <= 1e-6 * grad[i].abs().max(1.0));
                }
            }
        }
    }

    #[test]
    fn sampled_subgradient_is_unbiased() {
        let s = shape(&[2, 2, 2]);
        let terms = regularizer_terms(&s, RegularizerKind::Torsion);
        let theta = [0.0, 1.0, 1.0, 0.0, 0.5, 0.2, 0.9, 0.4];
        let (_, full) = terms.value_grad(&theta);
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let draws = 100_000;
        let mut sum = vec![0.0; 8];
        let mut sum_sq = vec![0.0; 8];
        for _ in 0..draws {
            let g = terms.sample_subgradient(&theta, 1, &mut rng);
            for i in 0..8 {
                sum[i] += g[i];
                sum_sq[i] += g[i] * g[i];
            }
        }
        for i in 0..8 {
            let mean = sum[i] / draws as f64;
            let var = sum_sq[i] / draws as f64 - mean * mean;
            let se = (var.max(0.0) / draws as f64).sqrt();
            assert!((mean - full[i]).abs() <= 3.0 * se + 1e-12, "component {i}: {mean} vs {}", full[i]);
        }
    }

    #[test]
    fn sampling_with_no_terms_is_zero() {
        let s = shape(&[2, 2, 2]);
        let terms = regularizer_terms(&s, RegularizerKind::Hessian);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(terms.sample_subgradient(&[1.0; 8], 5, &mut rng), vec![0.0; 8]);
    }

    #[test]
    fn missing_slice_is_adjacent_to_both_ends() {
        let s = shape(&[4]);
        let t = RegularizerTerms::build(&s, RegularizerKind::Laplacian, &[true]);
        // observed chain 0-1-2, missing slice 3 joined to 0 and 2
        assert_eq!(t.len(), 4);
        let h = RegularizerTerms::build(&s, RegularizerKind::Hessian, &[true]);
        assert_eq!(h.len(), 1);
        let tor = RegularizerTerms::build(&shape(&[3, 2]), RegularizerKind::Torsion, &[true, false]);
        assert_eq!(tor.len(), 3);
    }

    #[test]
    fn config_parses() {
        let c: RegularizerConfig = "torsion:0.1:1024".parse().unwrap();
        assert_eq!(c.kind, RegularizerKind::Torsion);
        assert_eq!(c.weight, 0.1);
        assert_eq!(c.samples, SampleCount::Sampled(1024));
        let c: RegularizerConfig = "laplacian:1e-3".parse().unwrap();
        assert_eq!(c.samples, SampleCount::All);
        assert!("laplacian:-1".parse::<RegularizerConfig>().is_err());
        assert!("torsion:1:0".parse::<RegularizerConfig>().is_err());
        assert!("cubic:1".parse::<RegularizerConfig>().is_err());
    }
}
