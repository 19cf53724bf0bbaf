//! Built-in μMAG standard problem setups.

use crate::backend::Backend;
use crate::error::{Error, Result};
use crate::fields::{FieldSchedule, Stage};
use crate::grid::{init_uniform, Grid, Vec3, VectorField};
use crate::llg::SimState;
use crate::material::{exchange_from_si, MaterialParams};
use crate::real::Real;

/// Saturating field along (1, 1, 1) used to prepare the S-state (kA/m).
pub const SP4_SATURATION_FIELD: Vec3 = Vec3::new(100.0, 100.0, 100.0);
/// Field 1 of problem #4: (-24.6, 4.3, 0) mT expressed in kA/m.
pub const SP4_REVERSAL_FIELD: Vec3 = Vec3::new(-19.576, 3.422, 0.0);
pub const SP4_REVERSAL_ALPHA: f64 = 0.02;
/// First step of the reversal stage.
pub const SP4_REVERSAL_START: u64 = 50_001;

/// Time step used by the built-in problems (ns).
pub const DEFAULT_DT: f64 = 5e-6;
/// Cell edge for the problem #3 benchmark cube (nm).
pub const SP3_DELTA: f64 = 1.0;

/// Everything needed to set up and run one simulation.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub name: String,
    pub grid: Grid,
    pub material: MaterialParams,
    /// Direction of the initial uniform magnetization.
    pub initial: Vec3,
    pub schedule: FieldSchedule,
    pub dt: f64,
    pub steps: u64,
    pub cadence: u64,
}

impl ProblemSpec {
    pub fn initial_state<T: Real>(&self) -> Result<VectorField<T>> {
        init_uniform(self.grid, self.initial, self.material.ms)
    }

    pub fn build_state<T: Real>(&self, backend: Backend) -> Result<SimState<T>> {
        SimState::new(
            self.grid,
            self.material,
            self.initial_state()?,
            self.schedule.clone(),
            self.dt,
            backend,
        )
    }
}

/// Standard problem #4, field 1: a 500 × 125 × 3 nm permalloy film on
/// 166 × 42 × 1 cells of 3 nm, relaxed into the S-state and then reversed.
pub fn standard_problem_4() -> ProblemSpec {
    let schedule = FieldSchedule::new(vec![
        Stage::constant(0, Some(4000), SP4_SATURATION_FIELD),
        Stage::ramp(4000, 6000, SP4_SATURATION_FIELD, Vec3::ZERO),
        Stage::constant(SP4_REVERSAL_START, None, SP4_REVERSAL_FIELD).with_alpha(SP4_REVERSAL_ALPHA),
    ])
    .expect("built-in schedule is valid");
    ProblemSpec {
        name: "sp4".into(),
        grid: Grid::new(166, 42, 1, 3.0).expect("built-in grid is valid"),
        material: MaterialParams::new(exchange_from_si(1.3e-11), 800.0, 0.0, 0.5).expect("built-in material is valid"),
        initial: Vec3::new(1.0, 0.0, 0.0),
        schedule,
        dt: DEFAULT_DT,
        steps: 150_000,
        cadence: 1000,
    }
}

/// Standard problem #3 material on an `n³` cube, relaxed with large damping
/// and no applied field. Used for per-step timing.
pub fn standard_problem_3_benchmark(n: usize) -> Result<ProblemSpec> {
    if n == 0 {
        return Err(Error::InvalidArgument("benchmark cube needs at least one cell per edge".into()));
    }
    Ok(ProblemSpec {
        name: "sp3".into(),
        grid: Grid::new(n, n, n, SP3_DELTA)?,
        material: MaterialParams::new(exchange_from_si(1e-11), 1000.0, 100.0, 0.5)?,
        initial: Vec3::new(1.0, 0.0, 0.0),
        schedule: FieldSchedule::empty(),
        dt: DEFAULT_DT,
        steps: 20_000,
        cadence: 1000,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::material::MU0;

    #[test]
    fn sp4_constants() {
        let p = standard_problem_4();
        assert_eq!(p.grid.shape(), (166, 42, 1));
        assert_eq!(p.grid.delta(), 3.0);
        assert_eq!(p.material.ms, 800.0);
        assert_eq!(p.material.hk, 0.0);
        assert_eq!(p.material.alpha, 0.5);
        assert!((p.material.a_ex - 1.3e7).abs() < 1e-6);
        assert_eq!((p.dt, p.steps, p.cadence), (5e-6, 150_000, 1000));
        assert_eq!(p.initial, Vec3::new(1.0, 0.0, 0.0));
    }

    #[test]
    fn sp4_reversal_field_from_millitesla() {
        assert!((-24.6 / MU0 - SP4_REVERSAL_FIELD.x).abs() < 1e-3);
        assert!((4.3 / MU0 - SP4_REVERSAL_FIELD.y).abs() < 1e-3);
    }

    #[test]
    fn sp4_schedule_values() {
        let s = standard_problem_4().schedule;
        assert_eq!(s.stages().len(), 3);
        assert_eq!(s.applied_field(1000), (Vec3::new(100.0, 100.0, 100.0), None));
        assert_eq!(s.applied_field(3999), (Vec3::new(100.0, 100.0, 100.0), None));
        assert_eq!(s.applied_field(4000), (Vec3::new(100.0, 100.0, 100.0), None));
        assert_eq!(s.applied_field(5000).0, Vec3::new(50.0, 50.0, 50.0));
        // the ramp is (6000 - step) / 20 per component
        for step in (4000..6000).step_by(7) {
            let want = (6000.0 - step as f64) / 20.0;
            assert!((s.applied_field(step).0.x - want).abs() < 1e-12);
        }
        assert_eq!(s.applied_field(6000), (Vec3::ZERO, None));
        assert_eq!(s.applied_field(50_000), (Vec3::ZERO, None));
        let (h, alpha) = s.applied_field(60_000);
        assert_eq!(h, Vec3::new(-19.576, 3.422, 0.0));
        assert_eq!(alpha, Some(0.02));
        assert_eq!(s.applied_field(50_001).1, Some(0.02));
    }

    #[test]
    fn sp3_constants() {
        let p = standard_problem_3_benchmark(8).unwrap();
        assert_eq!(p.grid.shape(), (8, 8, 8));
        assert_eq!((p.material.ms, p.material.hk), (1000.0, 100.0));
        assert!((p.material.a_ex - 1e7).abs() < 1e-6);
        let p = standard_problem_3_benchmark(64).unwrap();
        assert_eq!(p.grid.cells(), 262_144);
        assert!(standard_problem_3_benchmark(0).is_err());
        for step in [0, 1, 500, 20_000, u64::MAX] {
            assert_eq!(p.schedule.applied_field(step), (Vec3::ZERO, None));
        }
    }
}
