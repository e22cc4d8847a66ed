//! Directionality limits set by phase noise on the coupling drives.

use crate::coupling::{decay_rates, ChiralCoupling};
use crate::{Error, Result};

/// What the supplied phase variance refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PhaseNoiseSource {
    /// Variance of each of two independent drive phases; the relative phase
    /// then fluctuates with twice this variance.
    #[default]
    SingleSource,
    /// Variance of the relative phase `φ_c` itself.
    Relative,
}

/// Small-variance limit on `η_d` from Gaussian phase jitter around the
/// chiral point: `4/v` for the relative phase, `2/v` per independent source.
///
/// Equals `⟨Γ_f⟩/⟨Γ_b⟩` to first order in `v`.
pub fn phase_noise_bound(phase_variance: f64, source: PhaseNoiseSource) -> Result<f64> {
    if !(phase_variance >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "phase_variance",
            reason: "must be non-negative",
        });
    }
    if phase_variance >= 1.0 {
        return Err(Error::PhaseVarianceTooLarge(phase_variance));
    }
    if phase_variance == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(match source {
        PhaseNoiseSource::SingleSource => 2.0 / phase_variance,
        PhaseNoiseSource::Relative => 4.0 / phase_variance,
    })
}

/// `Γ_f/Γ_b` at the given phases; `+∞` where the backward rate vanishes.
pub fn exact_directionality_vs_phase(phi_c: f64, phi_wg: f64) -> f64 {
    let c = ChiralCoupling::new(1.0, phi_c, phi_wg).expect("unit coupling is valid");
    let (f, b) = decay_rates(&c);
    if b <= 0.0 {
        f64::INFINITY
    } else {
        f / b
    }
}
