//! Decoherence budget: thermally enhanced loss, β-factor and Purcell factor.
//!
//! A bath with occupation `n̄` raises the emitter decay to `(2n̄ + 1)Γ₁`, and
//! with `Γ₂ ≈ Γ₁/2` the excess over the waveguide emission becomes
//!
//! ```text
//! Γ′ = 2n̄(Γ_1D + Γ′₀) + Γ′₀ + Γ_hyb
//! ```
//!
//! where `Γ_hyb` is decoherence inherited from the couplers.

use crate::constants::{BOLTZMANN, HBAR, TAU};
use crate::coupling::{thermal_occupation, AtomRates, ThermalBath};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecoherenceBudget {
    pub gamma_prime0: f64,
    pub n_th: f64,
    pub gamma_1d: f64,
    pub hybridization_term: f64,
}

impl DecoherenceBudget {
    pub fn new(gamma_prime0: f64, n_th: f64, gamma_1d: f64, hybridization_term: f64) -> Result<Self> {
        let fields = [
            ("gamma_prime0", gamma_prime0),
            ("n_th", n_th),
            ("gamma_1d", gamma_1d),
            ("hybridization_term", hybridization_term),
        ];
        for (name, v) in fields {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter {
                    name,
                    reason: "must be finite and non-negative",
                });
            }
        }
        Ok(Self {
            gamma_prime0,
            n_th,
            gamma_1d,
            hybridization_term,
        })
    }

    pub fn from_bath(gamma_prime0: f64, bath: &ThermalBath, gamma_1d: f64, hybridization_term: f64) -> Result<Self> {
        Self::new(gamma_prime0, thermal_occupation(bath), gamma_1d, hybridization_term)
    }

    pub fn with_gamma_1d(self, gamma_1d: f64) -> Result<Self> {
        Self::new(self.gamma_prime0, self.n_th, gamma_1d, self.hybridization_term)
    }

    /// Emitter rates with all waveguide emission in the forward direction.
    pub fn forward_rates(&self) -> AtomRates {
        AtomRates {
            gamma_f: self.gamma_1d,
            gamma_b: 0.0,
            gamma_prime: thermal_gamma_prime(self),
            gamma_phi: 0.0,
        }
    }
}

pub fn thermal_gamma_prime(b: &DecoherenceBudget) -> f64 {
    2.0 * b.n_th * (b.gamma_1d + b.gamma_prime0) + b.gamma_prime0 + b.hybridization_term
}

/// `(2n̄ + 1)Γ₁`.
pub fn thermal_gamma1(gamma1: f64, n_th: f64) -> f64 {
    (2.0 * n_th + 1.0) * gamma1
}

/// `Γ_f/(Γ_f + Γ_b + Γ′)`.
pub fn beta_factor(rates: &AtomRates) -> Result<f64> {
    let den = rates.gamma_f + rates.gamma_b + rates.gamma_prime;
    if !(den > 0.0) {
        return Err(Error::Undefined("beta factor with all rates zero"));
    }
    Ok(rates.gamma_f / den)
}

/// `Γ_f/Γ′`; `+∞` for a lossless emitter with non-zero forward emission.
pub fn purcell_factor(rates: &AtomRates) -> f64 {
    if rates.gamma_prime > 0.0 {
        rates.gamma_f / rates.gamma_prime
    } else if rates.gamma_f > 0.0 {
        f64::INFINITY
    } else {
        0.0
    }
}

/// `β/(1 − β)`, the Purcell factor implied by β when `Γ_b = 0`.
pub fn purcell_from_beta(beta: f64) -> f64 {
    if beta >= 1.0 {
        f64::INFINITY
    } else {
        beta / (1.0 - beta)
    }
}

/// Bath temperature (K) with occupation `n_th` at `frequency` (Hz).
pub fn temperature_from_occupation(n_th: f64, frequency: f64) -> f64 {
    if n_th <= 0.0 {
        return 0.0;
    }
    HBAR * TAU * frequency / (BOLTZMANN * (1.0 / n_th).ln_1p())
}

/// Whether the coupler term is removed from the data before the fit or
/// left inside the fitted intrinsic rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HybridizationOrdering {
    #[default]
    SubtractFirst,
    Joint,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TemperatureFit {
    pub n_th: f64,
    pub temperature: f64,
    pub gamma_prime0: f64,
}

/// Least-squares line through `(Γ_1D, Γ′)` samples: the slope is `2n̄` and the
/// intercept `(2n̄ + 1)Γ′₀`. Each sample carries its coupler term `Γ_hyb`,
/// used only with [`HybridizationOrdering::SubtractFirst`].
pub fn fit_waveguide_temperature(
    samples: &[(f64, f64, f64)],
    frequency: f64,
    ordering: HybridizationOrdering,
) -> Result<TemperatureFit> {
    if samples.len() < 2 {
        return Err(Error::InvalidParameter {
            name: "samples",
            reason: "need at least two points",
        });
    }
    let y = |s: &(f64, f64, f64)| match ordering {
        HybridizationOrdering::SubtractFirst => s.1 - s.2,
        HybridizationOrdering::Joint => s.1,
    };
    let n = samples.len() as f64;
    let mx = samples.iter().map(|s| s.0).sum::<f64>() / n;
    let my = samples.iter().map(y).sum::<f64>() / n;
    let sxx: f64 = samples.iter().map(|s| (s.0 - mx).powi(2)).sum();
    let sxy: f64 = samples.iter().map(|s| (s.0 - mx) * (y(s) - my)).sum();
    if !(sxx > 0.0) {
        return Err(Error::InvalidParameter {
            name: "samples",
            reason: "coupling rates must not all be equal",
        });
    }
    let slope = sxy / sxx;
    let n_th = (0.5 * slope).max(0.0);
    let intercept = my - slope * mx;
    Ok(TemperatureFit {
        n_th,
        temperature: temperature_from_occupation(n_th, frequency),
        gamma_prime0: intercept / (2.0 * n_th + 1.0),
    })
}
