//! Explicit Euler integration of the Landau-Lifshitz-Gilbert equation.
//!
//! Each step evaluates the effective field of the current magnetization,
//! applies
//!
//! ```text
//! ΔM = p1 · (M × H) + p2 · (M × (M × H)),   p1 = -γμ0·dt/(1+α²),   p2 = p1·α/ms
//! ```
//!
//! and rescales every cell back to ms.
//!
//! Steps are numbered from 1: the n-th call to [`SimState::advance`]
//! evaluates the applied-field schedule at step n and leaves
//! [`SimState::step`] equal to n.

use std::sync::Arc;

use crate::backend::Backend;
use crate::demag::{build_demag_tensor_with, spectral_prepare_with, DemagWorkspace, SpectralTensor};
use crate::energy::{energy_terms, EnergyTerms};
use crate::error::{Error, Result};
use crate::fields::{exchange_field_into, FieldSchedule};
use crate::grid::{average_magnetization, check_same_shape, renormalize_in_place, Grid, Vec3, VectorField};
use crate::material::MaterialParams;
use crate::real::Real;
use crate::trajectory::{TrajectoryRecord, TrajectorySink};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorParams {
    pub dt: f64,
    pub alpha: f64,
    pub ms: f64,
    pub gamma_mu0: f64,
    pub prefactor1: f64,
    pub prefactor2: f64,
}

impl IntegratorParams {
    pub fn new(dt: f64, alpha: f64, params: &MaterialParams) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidArgument(format!("time step must be positive, got {dt}")));
        }
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidArgument(format!("alpha must be positive, got {alpha}")));
        }
        let prefactor1 = -params.gamma_mu0 * dt / (1.0 + alpha * alpha);
        Ok(IntegratorParams {
            dt,
            alpha,
            ms: params.ms,
            gamma_mu0: params.gamma_mu0,
            prefactor1,
            prefactor2: prefactor1 * alpha / params.ms,
        })
    }

    /// Same step with a different damping; both prefactors are re-derived.
    pub fn with_alpha(&self, alpha: f64) -> Self {
        let prefactor1 = -self.gamma_mu0 * self.dt / (1.0 + alpha * alpha);
        IntegratorParams {
            alpha,
            prefactor1,
            prefactor2: prefactor1 * alpha / self.ms,
            ..*self
        }
    }
}

/// `M ← renormalize(M + ΔM)` for a given effective field.
pub fn euler_update<T: Real>(
    m: &mut VectorField<T>,
    h: &VectorField<T>,
    ip: &IntegratorParams,
    backend: Backend,
) -> Result<()> {
    m.check_shape(h)?;
    let p1 = T::from_double(ip.prefactor1);
    let p2 = T::from_double(ip.prefactor2);
    let (hx, hy, hz) = (&h.x, &h.y, &h.z);
    {
        let VectorField { x, y, z, .. } = m;
        backend.for_each_cell(x, y, z, |c, mx, my, mz| {
            let (ax, ay, az) = (*mx, *my, *mz);
            let (bx, by, bz) = (hx[c], hy[c], hz[c]);
            let tx = ay * bz - az * by;
            let ty = az * bx - ax * bz;
            let tz = ax * by - ay * bx;
            *mx = ax + (p1 * tx + p2 * (ay * tz - az * ty));
            *my = ay + (p1 * ty + p2 * (az * tx - ax * tz));
            *mz = az + (p1 * tz + p2 * (ax * ty - ay * tx));
        });
    }
    renormalize_in_place(m, ip.ms, backend)
}

/// Largest `|M × H| / ms²` over all cells.
pub fn max_torque<T: Real>(m: &VectorField<T>, h: &VectorField<T>, ms: f64) -> f64 {
    (0..m.len())
        .map(|c| m.get(c).cross(&h.get(c)).norm())
        .fold(0.0, f64::max)
        / (ms * ms)
}

/// Why [`SimState::run`] returned.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunOutcome {
    Completed,
    /// The torque fell below the requested tolerance before the step budget ran out.
    Converged,
}

/// Magnetization, parameters, and per-step scratch of one simulation.
pub struct SimState<T: Real> {
    pub m: VectorField<T>,
    pub step: u64,
    pub params: MaterialParams,
    pub integrator: IntegratorParams,
    pub schedule: FieldSchedule,
    pub grid: Grid,
    pub spectral: Arc<SpectralTensor<T>>,
    workspace: DemagWorkspace<T>,
    h_demag: VectorField<T>,
    h_exch: VectorField<T>,
    h_eff: VectorField<T>,
    last_torque: Option<f64>,
}

impl<T: Real> SimState<T> {
    /// Builds the demag tensor and its spectrum for `grid`.
    pub fn new(
        grid: Grid,
        params: MaterialParams,
        m: VectorField<T>,
        schedule: FieldSchedule,
        dt: f64,
        backend: Backend,
    ) -> Result<Self> {
        let tensor = build_demag_tensor_with(&grid, backend)?;
        let spectral = Arc::new(spectral_prepare_with(&tensor, backend)?);
        Self::with_spectral(grid, params, m, schedule, dt, spectral, backend)
    }

    /// Reuses a spectrum computed earlier for the same grid.
    pub fn with_spectral(
        grid: Grid,
        params: MaterialParams,
        m: VectorField<T>,
        schedule: FieldSchedule,
        dt: f64,
        spectral: Arc<SpectralTensor<T>>,
        backend: Backend,
    ) -> Result<Self> {
        params.validate()?;
        check_same_shape(&grid, m.grid())?;
        check_same_shape(&grid, spectral.grid())?;
        let integrator = IntegratorParams::new(dt, params.alpha, &params)?;
        Ok(SimState {
            m,
            step: 0,
            params,
            integrator,
            schedule,
            grid,
            spectral,
            workspace: DemagWorkspace::new(&grid, backend)?,
            h_demag: VectorField::zeros(grid),
            h_exch: VectorField::zeros(grid),
            h_eff: VectorField::zeros(grid),
            last_torque: None,
        })
    }

    pub fn backend(&self) -> Backend {
        self.workspace.backend()
    }

    /// Effective field for the current magnetization with the given applied field.
    pub fn effective_field(&mut self, applied: Vec3) -> Result<&VectorField<T>> {
        self.update_fields(applied)?;
        Ok(&self.h_eff)
    }

    pub fn demag_field(&mut self) -> Result<&VectorField<T>> {
        self.workspace.compute_into(&self.m, &self.spectral, &mut self.h_demag)?;
        Ok(&self.h_demag)
    }

    fn update_fields(&mut self, applied: Vec3) -> Result<()> {
        let backend = self.backend();
        self.workspace.compute_into(&self.m, &self.spectral, &mut self.h_demag)?;
        exchange_field_into(&self.m, &self.params, &self.grid, backend, &mut self.h_exch)?;
        let aniso = T::from_double(self.params.hk / self.params.ms);
        let (ax, ay, az) = (T::from_double(applied.x), T::from_double(applied.y), T::from_double(applied.z));
        let (d, e, m) = (&self.h_demag, &self.h_exch, &self.m);
        let VectorField { x, y, z, .. } = &mut self.h_eff;
        backend.for_each_cell(x, y, z, |c, hx, hy, hz| {
            *hx = d.x[c] + e.x[c] + aniso * m.x[c] + ax;
            *hy = d.y[c] + e.y[c] + ay;
            *hz = d.z[c] + e.z[c] + az;
        });
        Ok(())
    }

    /// Max torque `|M × H_eff| / ms²` seen at the start of the last step.
    pub fn last_torque(&self) -> Option<f64> {
        self.last_torque
    }

    /// Max torque of the current state under the applied field of the last step.
    pub fn torque(&mut self) -> Result<f64> {
        let (applied, _) = self.schedule.applied_field(self.step);
        self.update_fields(applied)?;
        Ok(max_torque(&self.m, &self.h_eff, self.params.ms))
    }

    /// Advances one step.
    pub fn advance(&mut self) -> Result<()> {
        self.advance_inner(false).map(|_| ())
    }

    fn advance_inner(&mut self, track_torque: bool) -> Result<f64> {
        let n = self.step + 1;
        let (applied, alpha) = self.schedule.applied_field(n);
        let alpha = alpha.unwrap_or(self.params.alpha);
        if alpha != self.integrator.alpha {
            self.integrator = self.integrator.with_alpha(alpha);
        }
        self.update_fields(applied)?;
        let torque = if track_torque {
            let t = max_torque(&self.m, &self.h_eff, self.params.ms);
            self.last_torque = Some(t);
            t
        } else {
            f64::INFINITY
        };
        let backend = self.backend();
        euler_update(&mut self.m, &self.h_eff, &self.integrator, backend).map_err(|e| match e {
            Error::Degenerate { i, j, k, .. } => Error::Degenerate { i, j, k, step: Some(n) },
            other => other,
        })?;
        self.step = n;
        Ok(torque)
    }

    /// Current `⟨M⟩ / ms` tagged with the step count.
    pub fn record(&self) -> TrajectoryRecord {
        let avg = average_magnetization(&self.m);
        let ms = self.params.ms;
        TrajectoryRecord {
            step: self.step,
            mx: avg.x / ms,
            my: avg.y / ms,
            mz: avg.z / ms,
        }
    }

    /// Runs `steps` steps, handing a record to `sink` whenever the step
    /// count is a multiple of `output_every`.
    pub fn run(&mut self, steps: u64, output_every: u64, sink: &mut dyn TrajectorySink) -> Result<RunOutcome> {
        self.run_until(steps, output_every, sink, None)
    }

    /// Like [`SimState::run`], but stops before a step whose starting state
    /// already has max torque below `torque_tol`.
    pub fn run_until(
        &mut self,
        steps: u64,
        output_every: u64,
        sink: &mut dyn TrajectorySink,
        torque_tol: Option<f64>,
    ) -> Result<RunOutcome> {
        if output_every == 0 {
            return Err(Error::InvalidArgument("output cadence must be at least 1".into()));
        }
        for _ in 0..steps {
            if let Some(tol) = torque_tol {
                // the torque of the state about to be advanced
                let n = self.step + 1;
                let (applied, _) = self.schedule.applied_field(n);
                self.update_fields(applied)?;
                let t = max_torque(&self.m, &self.h_eff, self.params.ms);
                self.last_torque = Some(t);
                if t < tol {
                    return Ok(RunOutcome::Converged);
                }
            }
            self.advance_inner(false)?;
            if self.step % output_every == 0 {
                sink.record(self.record())?;
            }
        }
        Ok(RunOutcome::Completed)
    }

    /// Energy of the current state under the applied field of the last step.
    pub fn energy_terms(&mut self) -> Result<EnergyTerms> {
        let (applied, _) = self.schedule.applied_field(self.step);
        self.workspace.compute_into(&self.m, &self.spectral, &mut self.h_demag)?;
        energy_terms(&self.m, &self.h_demag, applied, &self.params, &self.grid)
    }

    pub fn energy(&mut self) -> Result<f64> {
        Ok(self.energy_terms()?.total())
    }
}

/// Consumes a state and returns it advanced by one step.
pub fn llg_step<T: Real>(mut state: SimState<T>) -> Result<SimState<T>> {
    state.advance()?;
    Ok(state)
}
