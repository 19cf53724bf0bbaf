//! Discretization geometry and vector-valued lattices.

use std::ops::{Add, Mul, Neg, Sub};

use crate::backend::Backend;
use crate::error::{Error, Result};
use crate::real::Real;

/// Regular grid of `nx * ny * nz` cubic cells with edge `delta` (nm).
///
/// Lattices are stored with x varying fastest: cell `(i, j, k)` lives at
/// `i + nx * (j + ny * k)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    nx: usize,
    ny: usize,
    nz: usize,
    delta: f64,
}

impl Grid {
    pub fn new(nx: usize, ny: usize, nz: usize, delta: f64) -> Result<Self> {
        if nx == 0 || ny == 0 || nz == 0 {
            return Err(Error::InvalidArgument(format!(
                "grid needs at least one cell per axis, got {nx}x{ny}x{nz}"
            )));
        }
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "cell size must be positive, got {delta}"
            )));
        }
        Ok(Grid { nx, ny, nz, delta })
    }

    pub fn nx(&self) -> usize {
        self.nx
    }
    pub fn ny(&self) -> usize {
        self.ny
    }
    pub fn nz(&self) -> usize {
        self.nz
    }
    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        (self.nx, self.ny, self.nz)
    }

    pub fn cells(&self) -> usize {
        self.nx * self.ny * self.nz
    }

    /// Shape of the zero-padded grid used by the demag convolution.
    pub fn padded_shape(&self) -> (usize, usize, usize) {
        (2 * self.nx, 2 * self.ny, 2 * self.nz)
    }

    pub fn cell_volume(&self) -> f64 {
        self.delta * self.delta * self.delta
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.nx * (j + self.ny * k)
    }

    #[inline]
    pub fn coords(&self, index: usize) -> (usize, usize, usize) {
        let i = index % self.nx;
        let jk = index / self.nx;
        (i, jk % self.ny, jk / self.ny)
    }
}

/// Plain 3-vector used for averages and uniform applied fields.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3 {
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn dot(&self, o: &Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(&self, o: &Vec3) -> Vec3 {
        Vec3::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

/// Three scalar lattices holding one vector per cell (kA/m).
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField<T> {
    grid: Grid,
    pub x: Vec<T>,
    pub y: Vec<T>,
    pub z: Vec<T>,
}

impl<T: Real> VectorField<T> {
    pub fn zeros(grid: Grid) -> Self {
        Self::uniform(grid, Vec3::ZERO)
    }

    pub fn uniform(grid: Grid, v: Vec3) -> Self {
        let n = grid.cells();
        VectorField {
            grid,
            x: vec![T::from_double(v.x); n],
            y: vec![T::from_double(v.y); n],
            z: vec![T::from_double(v.z); n],
        }
    }

    /// Builds a field from a per-cell function of `(i, j, k)`.
    pub fn from_fn(grid: Grid, mut f: impl FnMut(usize, usize, usize) -> Vec3) -> Self {
        let mut out = Self::zeros(grid);
        for c in 0..grid.cells() {
            let (i, j, k) = grid.coords(c);
            out.set(c, f(i, j, k));
        }
        out
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    #[inline]
    pub fn get(&self, cell: usize) -> Vec3 {
        Vec3::new(self.x[cell].to_double(), self.y[cell].to_double(), self.z[cell].to_double())
    }

    #[inline]
    pub fn set(&mut self, cell: usize, v: Vec3) {
        self.x[cell] = T::from_double(v.x);
        self.y[cell] = T::from_double(v.y);
        self.z[cell] = T::from_double(v.z);
    }

    pub fn components(&self) -> [&[T]; 3] {
        [&self.x, &self.y, &self.z]
    }

    pub fn fill(&mut self, v: Vec3) {
        self.x.fill(T::from_double(v.x));
        self.y.fill(T::from_double(v.y));
        self.z.fill(T::from_double(v.z));
    }

    /// Errors unless `other` lives on a grid of the same shape.
    pub fn check_shape<U>(&self, other: &VectorField<U>) -> Result<()> {
        check_same_shape(&self.grid, &other.grid)
    }

    /// Largest per-cell magnitude.
    pub fn max_norm(&self) -> f64 {
        (0..self.len())
            .map(|c| self.get(c).norm())
            .fold(0.0, f64::max)
    }

    /// Largest absolute component value.
    pub fn max_abs(&self) -> f64 {
        self.components()
            .iter()
            .flat_map(|c| c.iter())
            .map(|v| v.to_double().abs())
            .fold(0.0, f64::max)
    }

    pub fn cast<U: Real>(&self) -> VectorField<U> {
        let conv = |v: &Vec<T>| v.iter().map(|a| U::from_double(a.to_double())).collect();
        VectorField {
            grid: self.grid,
            x: conv(&self.x),
            y: conv(&self.y),
            z: conv(&self.z),
        }
    }

    /// `a * self + b * other`, cell by cell.
    pub fn linear_combination(&self, a: f64, other: &Self, b: f64) -> Result<Self> {
        self.check_shape(other)?;
        let (a, b) = (T::from_double(a), T::from_double(b));
        let comb = |p: &[T], q: &[T]| p.iter().zip(q).map(|(&u, &v)| a * u + b * v).collect();
        Ok(VectorField {
            grid: self.grid,
            x: comb(&self.x, &other.x),
            y: comb(&self.y, &other.y),
            z: comb(&self.z, &other.z),
        })
    }
}

pub(crate) fn check_same_shape(expected: &Grid, found: &Grid) -> Result<()> {
    if expected.shape() != found.shape() {
        return Err(Error::ShapeMismatch {
            expected: expected.shape(),
            found: found.shape(),
        });
    }
    Ok(())
}

/// Uniform magnetization of magnitude `ms` along `direction`.
pub fn init_uniform<T: Real>(grid: Grid, direction: Vec3, ms: f64) -> Result<VectorField<T>> {
    let norm = direction.norm();
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "initial direction must be a nonzero finite vector, got {direction:?}"
        )));
    }
    Ok(VectorField::uniform(grid, direction * (ms / norm)))
}

/// Rescales every cell to magnitude `ms`, keeping its direction.
pub fn renormalize<T: Real>(mut m: VectorField<T>, ms: f64) -> Result<VectorField<T>> {
    renormalize_in_place(&mut m, ms, Backend::Serial)?;
    Ok(m)
}

pub fn renormalize_in_place<T: Real>(m: &mut VectorField<T>, ms: f64, backend: Backend) -> Result<()> {
    let ms = T::from_double(ms);
    let grid = m.grid;
    let VectorField { x, y, z, .. } = m;
    backend.for_each_cell(x, y, z, |_, a, b, c| {
        let mag = (*a * *a + *b * *b + *c * *c).sqrt();
        *a = *a / mag * ms;
        *b = *b / mag * ms;
        *c = *c / mag * ms;
    });
    // a zero-length cell turns into NaN above; report the first one
    if let Some(cell) = m.x.iter().position(|v| !v.is_finite()) {
        let (i, j, k) = grid.coords(cell);
        return Err(Error::Degenerate { i, j, k, step: None });
    }
    Ok(())
}

/// Arithmetic mean of each component over all cells.
pub fn average_magnetization<T: Real>(m: &VectorField<T>) -> Vec3 {
    let mean = |v: &[T]| v.iter().map(|a| a.to_double()).sum::<f64>() / v.len() as f64;
    Vec3::new(mean(&m.x), mean(&m.y), mean(&m.z))
}
