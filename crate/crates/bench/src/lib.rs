//! Shared fixtures for the criterion benchmarks.

use monolattice::{build_constraints, ConstraintSet, Direction, LatticeShape, MonotonicitySpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A `2^D` lattice with random parameters and a pool of random points.
pub struct Fixture {
    pub shape: LatticeShape,
    pub theta: Vec<f64>,
    pub points: Vec<Vec<f64>>,
}

impl Fixture {
    pub fn binary(dims: usize, points: usize, seed: u64) -> Self {
        let shape = LatticeShape::binary(dims).expect("small lattice");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let theta = (0..shape.len()).map(|_| rng.random()).collect();
        let points = (0..points)
            .map(|_| (0..dims).map(|_| rng.random()).collect())
            .collect();
        Self { shape, theta, points }
    }
}

/// A feasible increasing lattice, its constraints, and a random step.
pub fn projection_case(sizes: &[usize], seed: u64) -> (Vec<f64>, Vec<f64>, ConstraintSet) {
    let shape = LatticeShape::new(sizes.to_vec()).expect("valid sizes");
    let spec = MonotonicitySpec::all(sizes.len(), Direction::Increasing);
    let cs = build_constraints(&shape, &spec).expect("valid spec");
    let theta = monolattice::init_lattice(&shape, &spec, &[]).expect("matching spec");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let step = (0..shape.len()).map(|_| rng.random_range(-0.1..0.1)).collect();
    (theta, step, cs)
}
