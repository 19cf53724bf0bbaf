//! Total micromagnetic energy, used as a relaxation diagnostic.
//!
//! Exchange uses nearest-neighbor differences with the same Neumann
//! convention as the exchange field, so that the field is exactly minus the
//! gradient of this energy (divided by mu0 and the cell volume).

use crate::error::Result;
use crate::grid::{check_same_shape, Grid, Vec3, VectorField};
use crate::material::MaterialParams;
use crate::real::Real;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EnergyTerms {
    pub exchange: f64,
    pub anisotropy: f64,
    pub demag: f64,
    pub zeeman: f64,
}

impl EnergyTerms {
    pub fn total(&self) -> f64 {
        self.exchange + self.anisotropy + self.demag + self.zeeman
    }
}

pub fn total_energy<T: Real>(
    m: &VectorField<T>,
    h_demag: &VectorField<T>,
    h_ext: Vec3,
    params: &MaterialParams,
    grid: &Grid,
) -> Result<f64> {
    Ok(energy_terms(m, h_demag, h_ext, params, grid)?.total())
}

/// Energy split by term, in J/m³·nm³.
pub fn energy_terms<T: Real>(
    m: &VectorField<T>,
    h_demag: &VectorField<T>,
    h_ext: Vec3,
    params: &MaterialParams,
    grid: &Grid,
) -> Result<EnergyTerms> {
    check_same_shape(grid, m.grid())?;
    check_same_shape(grid, h_demag.grid())?;
    let (nx, ny, nz) = grid.shape();
    let vol = grid.cell_volume();
    let ms = params.ms;
    let ku = params.ku();
    let mu0 = params.mu0;

    let mut squared_diffs = 0.0;
    let mut aniso = 0.0;
    let mut demag = 0.0;
    let mut zeeman = 0.0;
    for c in 0..grid.cells() {
        let (i, j, k) = grid.coords(c);
        let mc = m.get(c);
        let step = [(i + 1 < nx, 1), (j + 1 < ny, nx), (k + 1 < nz, nx * ny)];
        for (inside, stride) in step {
            if inside {
                let d = m.get(c + stride) - mc;
                squared_diffs += d.dot(&d);
            }
        }
        aniso += mc.y * mc.y + mc.z * mc.z;
        demag += h_demag.get(c).dot(&mc);
        zeeman += h_ext.dot(&mc);
    }
    Ok(EnergyTerms {
        // A (∇m)² δ³ with ∇m ≈ Δm/δ and m = M/ms
        exchange: params.a_ex * grid.delta() * squared_diffs / (ms * ms),
        anisotropy: ku * aniso / (ms * ms) * vol,
        demag: -0.5 * mu0 * demag * vol,
        zeeman: -mu0 * zeeman * vol,
    })
}
