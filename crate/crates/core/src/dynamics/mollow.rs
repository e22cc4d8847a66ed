use alloc::vec::Vec;

use crate::constants::{HBAR, TAU};
use crate::{Error, Result};

/// Linewidth parameters of the resonance-fluorescence spectrum.
///
/// `gamma_s = (Γ₁ + Γ₂)/2` is the sideband half-width; it is derived and
/// cannot be set independently.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MollowParams {
    gamma1: f64,
    gamma2: f64,
    gamma_s: f64,
    omega0: f64,
}

impl MollowParams {
    pub fn new(gamma1: f64, gamma2: f64, omega0: f64) -> Result<Self> {
        if !(gamma1 > 0.0) || !(gamma2 > 0.0) || !(omega0 > 0.0) {
            return Err(Error::InvalidParameter {
                name: "gamma1/gamma2/omega0",
                reason: "must be positive",
            });
        }
        Ok(Self {
            gamma1,
            gamma2,
            gamma_s: 0.5 * (gamma1 + gamma2),
            omega0,
        })
    }

    pub fn gamma1(&self) -> f64 {
        self.gamma1
    }

    pub fn gamma2(&self) -> f64 {
        self.gamma2
    }

    pub fn gamma_s(&self) -> f64 {
        self.gamma_s
    }

    pub fn omega0(&self) -> f64 {
        self.omega0
    }
}

/// Incoherent emission spectral density at detuning `δω` (J, i.e. W per
/// rad/s):
///
/// `(1/2π)(ħω₀Γ_f/4)[Γ_s/((δω+Ω)²+Γ_s²) + 2Γ₂/(δω²+Γ₂²) + Γ_s/((δω−Ω)²+Γ_s²)]`.
///
/// Integrated over `δω` it gives `ħω₀Γ_f/2` for any `Ω_R`.
pub fn mollow_psd_at(m: &MollowParams, gamma_f: f64, omega_r: f64, delta_omega: f64) -> f64 {
    let gs = m.gamma_s;
    let g2 = m.gamma2;
    let lor = |x: f64, w: f64| w / (x * x + w * w);
    let pre = HBAR * m.omega0 * gamma_f / (4.0 * TAU);
    pre * (lor(delta_omega + omega_r, gs) + 2.0 * lor(delta_omega, g2) + lor(delta_omega - omega_r, gs))
}

/// [`mollow_psd_at`] over a detuning grid.
pub fn mollow_psd(m: &MollowParams, gamma_f: f64, omega_r: f64, grid: &[f64]) -> Vec<f64> {
    grid.iter().map(|&d| mollow_psd_at(m, gamma_f, omega_r, d)).collect()
}
