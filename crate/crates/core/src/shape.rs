//! Lattice geometry: per-feature vertex counts, stride-ordered flat indexing,
//! and cell location.
//!
//! Parameters are stored in stride order: feature 0 varies fastest, so the
//! vertices of a 2x2 lattice are ordered `[0 0], [1 0], [0 1], [1 1]`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest parameter count a lattice may have.
pub const MAX_PARAMETERS: usize = 1 << 30;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "ShapeRepr", into = "ShapeRepr")]
pub struct LatticeShape {
    sizes: Vec<usize>,
    strides: Vec<usize>,
    len: usize,
}

#[derive(Serialize, Deserialize)]
struct ShapeRepr {
    sizes: Vec<usize>,
}

impl TryFrom<ShapeRepr> for LatticeShape {
    type Error = Error;

    fn try_from(repr: ShapeRepr) -> Result<Self> {
        LatticeShape::new(repr.sizes)
    }
}

impl From<LatticeShape> for ShapeRepr {
    fn from(shape: LatticeShape) -> Self {
        ShapeRepr { sizes: shape.sizes }
    }
}

/// The cell of the lattice containing a point, and the point's position
/// inside that cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellLocation {
    pub base: Vec<usize>,
    pub residual: Vec<f64>,
}

impl LatticeShape {
    pub fn new(sizes: Vec<usize>) -> Result<Self> {
        if sizes.is_empty() {
            return Err(Error::config("lattice needs at least one feature"));
        }
        if let Some(d) = sizes.iter().position(|&m| m < 2) {
            return Err(Error::config(format!(
                "feature {d} has {} vertices; every feature needs at least 2",
                sizes[d]
            )));
        }
        let mut strides = Vec::with_capacity(sizes.len());
        let mut len: usize = 1;
        for &m in &sizes {
            strides.push(len);
            len = len
                .checked_mul(m)
                .filter(|&l| l <= MAX_PARAMETERS)
                .ok_or_else(|| {
                    Error::config(format!(
                        "lattice {sizes:?} exceeds the limit of {MAX_PARAMETERS} parameters"
                    ))
                })?;
        }
        Ok(Self { sizes, strides, len })
    }

    /// A `2^D` lattice.
    pub fn binary(dims: usize) -> Result<Self> {
        Self::new(vec![2; dims])
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn strides(&self) -> &[usize] {
        &self.strides
    }

    pub fn dims(&self) -> usize {
        self.sizes.len()
    }

    /// Total number of parameters, the product of all vertex counts.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn vertex_index(&self, coords: &[usize]) -> Result<usize> {
        if coords.len() != self.dims() {
            return Err(Error::domain(format!(
                "expected {} coordinates, got {}",
                self.dims(),
                coords.len()
            )));
        }
        let mut index = 0;
        for (d, (&c, &m)) in coords.iter().zip(&self.sizes).enumerate() {
            if c >= m {
                return Err(Error::domain(format!(
                    "coordinate {c} out of range for feature {d} with {m} vertices"
                )));
            }
            index += c * self.strides[d];
        }
        Ok(index)
    }

    pub fn vertex_coords(&self, index: usize) -> Result<Vec<usize>> {
        if index >= self.len {
            return Err(Error::domain(format!(
                "vertex index {index} out of range for {} parameters",
                self.len
            )));
        }
        let mut coords = vec![0; self.dims()];
        self.write_coords(index, &mut coords);
        Ok(coords)
    }

    /// Writes the coordinates of an in-range index into `out`.
    pub(crate) fn write_coords(&self, mut index: usize, out: &mut [usize]) {
        for (c, &m) in out.iter_mut().zip(&self.sizes) {
            *c = index % m;
            index /= m;
        }
    }

    /// Finds the cell containing `x`. Points on the upper boundary of a
    /// feature belong to the topmost cell with residual 1.
    pub fn locate_cell(&self, x: &[f64]) -> Result<CellLocation> {
        let mut loc = CellLocation {
            base: vec![0; self.dims()],
            residual: vec![0.0; self.dims()],
        };
        self.locate_cell_into(x, &mut loc)?;
        Ok(loc)
    }

    pub fn locate_cell_into(&self, x: &[f64], loc: &mut CellLocation) -> Result<()> {
        if x.len() != self.dims() {
            return Err(Error::domain(format!(
                "expected a {}-dimensional point, got {}",
                self.dims(),
                x.len()
            )));
        }
        loc.base.resize(self.dims(), 0);
        loc.residual.resize(self.dims(), 0.0);
        for (d, (&xd, &m)) in x.iter().zip(&self.sizes).enumerate() {
            let top = (m - 1) as f64;
            // NaN fails both comparisons
            if !(xd >= 0.0 && xd <= top) {
                return Err(Error::domain(format!(
                    "x[{d}] = {xd} lies outside [0, {top}]"
                )));
            }
            let cell = (xd.floor() as usize).min(m - 2);
            loc.base[d] = cell;
            loc.residual[d] = xd - cell as f64;
        }
        Ok(())
    }

    /// Flat index of a cell's origin vertex.
    pub fn base_index(&self, base: &[usize]) -> usize {
        base.iter().zip(&self.strides).map(|(b, s)| b * s).sum()
    }

    /// Whether the point lies inside the lattice span.
    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dims()
            && x
                .iter()
                .zip(&self.sizes)
                .all(|(&xd, &m)| xd >= 0.0 && xd <= (m - 1) as f64)
    }
}
