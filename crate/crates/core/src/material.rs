//! Material constants in the internal nm / ns / kA·m⁻¹ unit system.
//!
//! Exchange constants are given in J/m × 10¹⁸ so that `2A / (mu0 Ms²)` comes
//! out in nm². Energies are reported in J/m³ × nm³ (10⁻²⁷ J).

use crate::error::{Error, Result};

/// Vacuum permeability in mT per kA/m (4π/10).
pub const MU0: f64 = 1.256636;

/// Gyromagnetic ratio times mu0 in (kA/m)⁻¹ ns⁻¹.
pub const GAMMA_MU0: f64 = 0.221;

/// Converts an exchange constant in J/m to internal units.
pub fn exchange_from_si(a_si: f64) -> f64 {
    a_si * 1e18
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaterialParams {
    /// Exchange constant (internal units).
    pub a_ex: f64,
    /// Saturation magnetization (kA/m).
    pub ms: f64,
    /// Uniaxial anisotropy field along +x (kA/m).
    pub hk: f64,
    /// Gilbert damping.
    pub alpha: f64,
    pub gamma_mu0: f64,
    pub mu0: f64,
}

impl MaterialParams {
    pub fn new(a_ex: f64, ms: f64, hk: f64, alpha: f64) -> Result<Self> {
        let p = MaterialParams {
            a_ex,
            ms,
            hk,
            alpha,
            gamma_mu0: GAMMA_MU0,
            mu0: MU0,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str, v: f64| Err(Error::InvalidArgument(format!("{what} out of range: {v}")));
        if !(self.ms > 0.0 && self.ms.is_finite()) {
            return bad("ms", self.ms);
        }
        if !(self.a_ex >= 0.0 && self.a_ex.is_finite()) {
            return bad("a_ex", self.a_ex);
        }
        if !(self.hk >= 0.0 && self.hk.is_finite()) {
            return bad("hk", self.hk);
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return bad("alpha", self.alpha);
        }
        Ok(())
    }

    /// Anisotropy energy density K_u = hk·mu0·ms/2.
    pub fn ku(&self) -> f64 {
        self.hk * self.mu0 * self.ms / 2.0
    }

    /// Exchange prefactor 2A/(mu0·ms²) in nm²; divide by δ² for the stencil.
    pub fn exchange_length_sq(&self) -> f64 {
        2.0 * self.a_ex / self.mu0 / self.ms / self.ms
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }
}
