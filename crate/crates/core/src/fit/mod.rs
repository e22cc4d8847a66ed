//! Resonance fitting, directionality confidence intervals and phase-noise
//! bounds.
//!
//! Rates are angular (rad/s), centre frequencies are in Hz. The model is
//!
//! ```text
//! t(f) = 1 − Γ_1D e^{iφ_f} / (i·2π(f₀ − f) + Γ_tot/2)
//! ```
//!
//! optionally plus a complex affine background.

mod bounds;
mod circle;
mod fano;
mod lm;
mod ratio;

pub use bounds::{exact_directionality_vs_phase, phase_noise_bound, PhaseNoiseSource};
pub use circle::{circle_fit, fit_circle_geometry, Circle};
pub use fano::{fit_fano, fit_fano_with, FitOptions};
pub use ratio::{directionality_ci, ratio_cdf, BoundMethod, DirectionalityBound};

use crate::constants::TAU;
use crate::spectrum::SpectrumTrace;
use crate::C64;

/// A fitted value with its one-sigma uncertainty.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Estimate {
    pub value: f64,
    pub sigma: f64,
}

impl Estimate {
    pub fn new(value: f64, sigma: f64) -> Self {
        Self { value, sigma }
    }
}

/// Complex affine background `a + b (f − f_ref)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Background {
    pub a: C64,
    pub slope_per_hz: C64,
    pub f_ref: f64,
}

impl Background {
    pub fn at(&self, f: f64) -> C64 {
        self.a + self.slope_per_hz * (f - self.f_ref)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitMethod {
    Fano,
    Circle,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub gamma_1d: Estimate,
    pub gamma_tot: Estimate,
    pub f0: Estimate,
    pub phi_fano: Estimate,
    /// RMS of `|t_model − t|` over the trace.
    pub residual_rms: f64,
    /// Covariance of `(Γ_1D, Γ_tot, f₀, φ_f)` in (rad/s, rad/s, Hz, rad).
    pub covariance: [[f64; 4]; 4],
    pub background: Option<Background>,
    pub iterations: usize,
    pub method: FitMethod,
}

impl FitResult {
    pub fn model(&self, f: f64) -> C64 {
        let t = fano_model(
            self.gamma_1d.value,
            self.gamma_tot.value,
            self.f0.value,
            self.phi_fano.value,
            f,
        );
        match &self.background {
            Some(b) => t + b.at(f),
            None => t,
        }
    }

    /// `Γ_1D cos φ_f`, the coupling seen on resonance.
    pub fn effective_coupling(&self) -> f64 {
        self.gamma_1d.value * self.phi_fano.value.cos()
    }

    /// `false` flags `Γ_tot < Γ_1D cos φ_f`, which no passive emitter produces.
    pub fn linewidth_consistent(&self) -> bool {
        self.gamma_tot.value >= self.effective_coupling() * (1.0 - 1e-9)
    }
}

pub fn fano_model(gamma_1d: f64, gamma_tot: f64, f0: f64, phi: f64, f: f64) -> C64 {
    C64::new(1.0, 0.0) - C64::from_polar(gamma_1d, phi) / C64::new(0.5 * gamma_tot, TAU * (f0 - f))
}

/// Peak of `|base − t|²` and its full width at half maximum in Hz. `None`
/// when the trace has no resonance to speak of.
pub(crate) fn locate_peak(trace: &SpectrumTrace, base: C64) -> Option<(usize, f64)> {
    let f = trace.freqs();
    let dev: alloc::vec::Vec<f64> = trace.t().iter().map(|z| (base - z).norm_sqr()).collect();
    let (imax, &peak) = dev.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1))?;
    if !(peak > 1e-24) {
        return None;
    }
    let half = 0.5 * peak;
    let cross = |it: &mut dyn Iterator<Item = usize>| {
        let mut prev = imax;
        for k in it {
            if dev[k] <= half {
                let (y0, y1) = (dev[prev], dev[k]);
                return Some((f[k] - f[prev]) * (y0 - half) / (y0 - y1) + f[prev]);
            }
            prev = k;
        }
        None
    };
    let lo = cross(&mut (0..imax).rev());
    let hi = cross(&mut (imax + 1..f.len()));
    let fwhm = match (lo, hi) {
        (Some(a), Some(b)) => b - a,
        (Some(a), None) => 2.0 * (f[imax] - a),
        (None, Some(b)) => 2.0 * (b - f[imax]),
        (None, None) => return None,
    };
    // a lone noisy point is not a resonance
    let step = (f[f.len() - 1] - f[0]) / (f.len() - 1) as f64;
    (fwhm > 3.0 * step).then_some((imax, fwhm))
}
