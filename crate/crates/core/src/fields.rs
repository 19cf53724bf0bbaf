//! Short-range and uniform field terms: exchange, uniaxial anisotropy,
//! the staged applied field, and their sum with the demag field.

use crate::backend::Backend;
use crate::error::{Error, Result};
use crate::grid::{check_same_shape, Grid, Vec3, VectorField};
use crate::material::MaterialParams;
use crate::real::Real;

/// Exchange field from the six-neighbor Laplacian with Neumann boundaries.
///
/// A neighbor outside the sample is replaced by the center cell, so it
/// contributes nothing; axes with a single cell drop out entirely.
pub fn exchange_field<T: Real>(
    m: &VectorField<T>,
    params: &MaterialParams,
    grid: &Grid,
) -> Result<VectorField<T>> {
    let mut out = VectorField::zeros(*grid);
    exchange_field_into(m, params, grid, Backend::Serial, &mut out)?;
    Ok(out)
}

pub fn exchange_field_into<T: Real>(
    m: &VectorField<T>,
    params: &MaterialParams,
    grid: &Grid,
    backend: Backend,
    out: &mut VectorField<T>,
) -> Result<()> {
    check_same_shape(grid, m.grid())?;
    check_same_shape(grid, out.grid())?;
    let coef = T::from_double(params.exchange_length_sq() / (grid.delta() * grid.delta()));
    let (nx, ny, nz) = grid.shape();
    let sx = 1;
    let sy = nx;
    let sz = nx * ny;
    let g = *grid;
    let VectorField { x, y, z, .. } = out;
    backend.for_each_cell(x, y, z, |c, hx, hy, hz| {
        let (i, j, k) = g.coords(c);
        let mut neighbors = [0usize; 6];
        let mut count = 0;
        if i > 0 {
            neighbors[count] = c - sx;
            count += 1;
        }
        if i + 1 < nx {
            neighbors[count] = c + sx;
            count += 1;
        }
        if j > 0 {
            neighbors[count] = c - sy;
            count += 1;
        }
        if j + 1 < ny {
            neighbors[count] = c + sy;
            count += 1;
        }
        if k > 0 {
            neighbors[count] = c - sz;
            count += 1;
        }
        if k + 1 < nz {
            neighbors[count] = c + sz;
            count += 1;
        }
        let lap = |v: &[T]| {
            let center = v[c];
            neighbors[..count]
                .iter()
                .fold(T::zero(), |acc, &n| acc + (v[n] - center))
        };
        *hx = coef * lap(&m.x);
        *hy = coef * lap(&m.y);
        *hz = coef * lap(&m.z);
    });
    Ok(())
}

/// Uniaxial anisotropy field with the easy axis along +x: `(hk/ms · Mx, 0, 0)`.
pub fn anisotropy_field<T: Real>(m: &VectorField<T>, params: &MaterialParams) -> VectorField<T> {
    let mut out = VectorField::zeros(*m.grid());
    let scale = T::from_double(params.hk / params.ms);
    for (h, &mx) in out.x.iter_mut().zip(&m.x) {
        *h = scale * mx;
    }
    out
}

/// Per-cell sum of the three lattice fields plus the uniform applied field.
pub fn effective_field<T: Real>(
    h_demag: &VectorField<T>,
    h_exch: &VectorField<T>,
    h_anis: &VectorField<T>,
    h_applied: Vec3,
) -> Result<VectorField<T>> {
    h_demag.check_shape(h_exch)?;
    h_demag.check_shape(h_anis)?;
    let sum = |a: &[T], b: &[T], c: &[T], u: f64| {
        let u = T::from_double(u);
        a.iter()
            .zip(b)
            .zip(c)
            .map(|((&p, &q), &r)| p + q + r + u)
            .collect()
    };
    let mut out = VectorField::zeros(*h_demag.grid());
    out.x = sum(&h_demag.x, &h_exch.x, &h_anis.x, h_applied.x);
    out.y = sum(&h_demag.y, &h_exch.y, &h_anis.y, h_applied.y);
    out.z = sum(&h_demag.z, &h_exch.z, &h_anis.z, h_applied.z);
    Ok(out)
}

/// How a stage's field varies over its step range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FieldRule {
    Constant(Vec3),
    /// Linear in the step index: `from` at the first step of the stage,
    /// reaching `to` at the (exclusive) end step.
    Ramp { from: Vec3, to: Vec3 },
}

/// One stage of an applied-field program, active for steps in `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stage {
    pub start: u64,
    /// `None` leaves the stage open to the end of the run.
    pub end: Option<u64>,
    pub rule: FieldRule,
    pub alpha: Option<f64>,
}

impl Stage {
    pub fn constant(start: u64, end: Option<u64>, field: Vec3) -> Self {
        Stage {
            start,
            end,
            rule: FieldRule::Constant(field),
            alpha: None,
        }
    }

    pub fn ramp(start: u64, end: u64, from: Vec3, to: Vec3) -> Self {
        Stage {
            start,
            end: Some(end),
            rule: FieldRule::Ramp { from, to },
            alpha: None,
        }
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = Some(alpha);
        self
    }

    fn contains(&self, step: u64) -> bool {
        step >= self.start && self.end.map_or(true, |e| step < e)
    }

    fn field_at(&self, step: u64) -> Vec3 {
        match self.rule {
            FieldRule::Constant(h) => h,
            FieldRule::Ramp { from, to } => {
                // validated: ramps always have a finite end
                let end = self.end.unwrap_or(self.start + 1);
                let frac = (step - self.start) as f64 / (end - self.start) as f64;
                from + (to - from) * frac
            }
        }
    }
}

/// Ordered, non-overlapping applied-field stages indexed by step number.
///
/// Steps outside every stage see zero applied field and the run's base
/// damping.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FieldSchedule {
    stages: Vec<Stage>,
}

impl FieldSchedule {
    pub fn new(stages: Vec<Stage>) -> Result<Self> {
        for (n, s) in stages.iter().enumerate() {
            if let Some(end) = s.end {
                if end <= s.start {
                    return Err(Error::InvalidArgument(format!(
                        "stage {n}: empty step range [{}, {end})",
                        s.start
                    )));
                }
            } else if matches!(s.rule, FieldRule::Ramp { .. }) {
                return Err(Error::InvalidArgument(format!("stage {n}: a ramp needs an end step")));
            }
            if let Some(a) = s.alpha {
                if !(a > 0.0 && a.is_finite()) {
                    return Err(Error::InvalidArgument(format!("stage {n}: alpha must be positive, got {a}")));
                }
            }
            let finite = match s.rule {
                FieldRule::Constant(h) => h.is_finite(),
                FieldRule::Ramp { from, to } => from.is_finite() && to.is_finite(),
            };
            if !finite {
                return Err(Error::InvalidArgument(format!("stage {n}: non-finite field")));
            }
        }
        for (n, pair) in stages.windows(2).enumerate() {
            let (a, b) = (&pair[0], &pair[1]);
            match a.end {
                Some(end) if end <= b.start => {}
                _ => {
                    return Err(Error::InvalidArgument(format!(
                        "stages {n} and {} overlap or are out of order",
                        n + 1
                    )))
                }
            }
        }
        Ok(FieldSchedule { stages })
    }

    pub fn empty() -> Self {
        FieldSchedule::default()
    }

    pub fn stages(&self) -> &[Stage] {
        &self.stages
    }

    pub fn is_empty(&self) -> bool {
        self.stages.is_empty()
    }

    /// Applied field and damping override at `step`.
    pub fn applied_field(&self, step: u64) -> (Vec3, Option<f64>) {
        match self.stages.iter().find(|s| s.contains(step)) {
            Some(s) => (s.field_at(step), s.alpha),
            None => (Vec3::ZERO, None),
        }
    }
}
