//! Ladder `g, e, f` with a coherent drive on g–e and a weak probe on e–f.
//!
//! The e–f transition couples to the waveguide through the two ports with
//! magnitudes `κ_l`, `κ_r`. These are the rates of the e–f transition itself;
//! for a weakly anharmonic oscillator its matrix element is `√2` times the
//! g–e one, so [`ThreeLevelPorts::harmonic`] sets `κ_ef = 2κ_ge`.

use alloc::vec::Vec;

use super::lindblad::{lindblad_steady_state, SteadyState};
use super::DriveSpec;
use crate::constants::TAU;
use crate::coupling::AtomRates;
use crate::linalg::OperatorMatrix;
use crate::spectrum::SpectrumTrace;
use crate::{Error, Result, C64};

const G: usize = 0;
const E: usize = 1;
const F: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThreeLevelPorts {
    pub kappa_l: f64,
    pub kappa_r: f64,
    /// `α = ω_ge − ω_ef`, rad/s.
    pub anharmonicity: f64,
    pub ge_rates: AtomRates,
    pub phi_c: f64,
    pub phi_wg: f64,
    /// Pure dephasing of the e–f coherence; `None` reuses the g–e value.
    pub gamma_phi_ef: Option<f64>,
    /// Non-waveguide decay of `|f⟩` to `|e⟩`.
    pub ef_loss: f64,
}

impl ThreeLevelPorts {
    /// Ports at the chiral point `φ_c = φ_WG = π/2` with no extra e–f loss.
    pub fn new(kappa_l: f64, kappa_r: f64, anharmonicity: f64, ge_rates: AtomRates) -> Result<Self> {
        if !(kappa_l >= 0.0) || !(kappa_r >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "kappa_l/kappa_r",
                reason: "must be non-negative",
            });
        }
        let h = core::f64::consts::FRAC_PI_2;
        Ok(Self {
            kappa_l,
            kappa_r,
            anharmonicity,
            ge_rates,
            phi_c: h,
            phi_wg: h,
            gamma_phi_ef: None,
            ef_loss: 0.0,
        })
    }

    /// Balanced ports scaled from the g–e coupling, `κ_ef = 2κ_ge`.
    pub fn harmonic(kappa_ge: f64, anharmonicity: f64, ge_rates: AtomRates) -> Result<Self> {
        Self::new(2.0 * kappa_ge, 2.0 * kappa_ge, anharmonicity, ge_rates)
    }

    /// Port magnitudes reproducing given forward/backward e–f rates.
    pub fn from_ef_rates(gamma_f: f64, gamma_b: f64, anharmonicity: f64, ge_rates: AtomRates) -> Result<Self> {
        if !(gamma_f >= gamma_b) || !(gamma_b >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "gamma_f/gamma_b",
                reason: "need gamma_f >= gamma_b >= 0",
            });
        }
        // κ_l,r = (√Γ_f ± √Γ_b)²/2
        let a = gamma_f.sqrt();
        let b = gamma_b.sqrt();
        let kl = 0.5 * (a + b) * (a + b);
        let kr = 0.5 * (a - b) * (a - b);
        Self::new(kl, kr, anharmonicity, ge_rates)
    }

    pub fn with_phases(mut self, phi_c: f64, phi_wg: f64) -> Self {
        self.phi_c = phi_c;
        self.phi_wg = phi_wg;
        self
    }

    pub fn with_ef_dephasing(mut self, gamma_phi_ef: f64) -> Self {
        self.gamma_phi_ef = Some(gamma_phi_ef);
        self
    }

    pub fn with_ef_loss(mut self, loss: f64) -> Self {
        self.ef_loss = loss;
        self
    }

    /// Forward and backward collapse amplitudes of the e–f transition,
    /// global propagation phase removed.
    pub fn channel_amplitudes(&self) -> (C64, C64) {
        let l = (0.5 * self.kappa_l).sqrt();
        let r = (0.5 * self.kappa_r).sqrt();
        (
            C64::new(l, 0.0) + C64::from_polar(r, self.phi_c - self.phi_wg),
            C64::new(l, 0.0) + C64::from_polar(r, self.phi_c + self.phi_wg),
        )
    }
}

/// Directional e–f rates for the best-case phases, `(κ_l+κ_r)/2 ± √(κ_l κ_r)`,
/// and their ratio (infinite when the backward rate vanishes).
pub fn ef_rates(p: &ThreeLevelPorts) -> (f64, f64, f64) {
    let a = p.kappa_l.sqrt();
    let b = p.kappa_r.sqrt();
    let f = 0.5 * (a + b) * (a + b);
    let bk = 0.5 * (a - b) * (a - b);
    let eta = if bk == 0.0 { f64::INFINITY } else { f / bk };
    (f, bk, eta)
}

fn model(
    p: &ThreeLevelPorts,
    ge: &DriveSpec,
    probe_detuning: f64,
    alpha_p: f64,
) -> (OperatorMatrix, Vec<(f64, OperatorMatrix)>, C64) {
    let i = C64::new(0.0, 1.0);
    let (cf, cb) = p.channel_amplitudes();
    let ket = |a, b| OperatorMatrix::ket_bra(3, a, b);
    let lower_ge = ket(G, E);
    let lower_ef = ket(E, F);

    let mut h = OperatorMatrix::diag(&[
        C64::new(0.0, 0.0),
        C64::new(ge.delta_omega, 0.0),
        C64::new(ge.delta_omega + probe_detuning, 0.0),
    ]);
    // (Ω/2)σ_y on g–e
    let sy = &(&ket(G, E) * i) - &(&ket(E, G) * i);
    h += &(&sy * (0.5 * ge.omega_r));
    // probe through the forward channel, −i(α C† − α* C)
    let c = &lower_ef * cf;
    let probe = &(&c.dagger() * alpha_p) - &(&c * alpha_p);
    h += &(&probe * (-i));

    let mut d = Vec::new();
    d.push((p.ge_rates.gamma1(), lower_ge));
    d.push((1.0, &lower_ef * cf));
    d.push((1.0, &lower_ef * cb));
    if p.ef_loss > 0.0 {
        d.push((p.ef_loss, lower_ef));
    }
    let phi_ge = p.ge_rates.gamma_phi;
    let phi_ef = p.gamma_phi_ef.unwrap_or(phi_ge);
    if phi_ge > 0.0 || phi_ef > 0.0 {
        let xe = (2.0 * phi_ge).sqrt();
        let xf = xe + (2.0 * phi_ef).sqrt();
        d.push((
            1.0,
            OperatorMatrix::diag(&[C64::new(0.0, 0.0), C64::new(xe, 0.0), C64::new(xf, 0.0)]),
        ));
    }
    (h, d, cf)
}

/// Steady state with the g–e drive and a probe of amplitude `alpha_p` at
/// detuning `ω_ef − ω_p`.
pub fn three_level_steady_state(
    p: &ThreeLevelPorts,
    ge_drive: &DriveSpec,
    probe_detuning: f64,
    alpha_p: f64,
) -> Result<SteadyState> {
    let (h, d, _) = model(p, ge_drive, probe_detuning, alpha_p);
    lindblad_steady_state(&h, &d)
}

/// Weak-probe transmission around `ω_ef`.
///
/// `probe_offsets_hz` are probe frequencies relative to `ω_ef/2π`. The trace
/// is `t = 1 + c_f ⟨|e⟩⟨f|⟩ / α_p` from the steady state of the driven ladder.
pub fn two_tone_trace(p: &ThreeLevelPorts, ge_drive: &DriveSpec, probe_offsets_hz: &[f64]) -> Result<SpectrumTrace> {
    let scale = p.kappa_l + p.kappa_r + p.ge_rates.gamma1() + p.ef_loss + ge_drive.omega_r;
    let alpha_p = 1e-4 * scale.max(1e-300).sqrt();
    let mut t = Vec::with_capacity(probe_offsets_hz.len());
    for &off in probe_offsets_hz {
        let (h, d, cf) = model(p, ge_drive, -TAU * off, alpha_p);
        let s = lindblad_steady_state(&h, &d)?;
        t.push(C64::new(1.0, 0.0) + cf * s.rho[(F, E)] / alpha_p);
    }
    SpectrumTrace::new(probe_offsets_hz.to_vec(), t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::linspace;
    use approx::assert_relative_eq;
    use core::f64::consts::FRAC_PI_2;
    use proptest::prelude::*;

    fn ge() -> AtomRates {
        AtomRates::new(0.005, 0.0, 0.0, 0.0).unwrap()
    }

    #[test]
    fn balanced_and_single_port() {
        let p = ThreeLevelPorts::new(1.5, 1.5, 0.0, ge()).unwrap();
        let (f, b, eta) = ef_rates(&p);
        assert_relative_eq!(f, 3.0, epsilon = 1e-15);
        assert_eq!(b, 0.0);
        assert_eq!(eta, f64::INFINITY);
        let p = ThreeLevelPorts::new(2.0, 0.0, 0.0, ge()).unwrap();
        let (f, b, eta) = ef_rates(&p);
        assert_relative_eq!(f, 1.0, epsilon = 1e-15);
        assert_relative_eq!(b, 1.0, epsilon = 1e-15);
        assert_relative_eq!(eta, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn inversion_of_measured_rates() {
        let p = ThreeLevelPorts::from_ef_rates(2.4, 0.2, 0.0, ge()).unwrap();
        // oracle: roots of κ² − (Γ_f+Γ_b)κ + ((Γ_f−Γ_b)/2)² = 0
        let s: f64 = 2.6;
        let q: f64 = 1.1 * 1.1;
        let disc = (s * s / 4.0 - q).sqrt();
        assert_relative_eq!(p.kappa_l, s / 2.0 + disc, epsilon = 1e-14);
        assert_relative_eq!(p.kappa_r, s / 2.0 - disc, epsilon = 1e-14);
        assert!((p.kappa_l - 1.99).abs() < 0.01 && (p.kappa_r - 0.61).abs() < 0.01);
        let (f, b, eta) = ef_rates(&p);
        assert_relative_eq!(f, 2.4, epsilon = 1e-14);
        assert_relative_eq!(b, 0.2, epsilon = 1e-14);
        assert_relative_eq!(eta, 12.0, epsilon = 1e-12);
    }

    #[test]
    fn rates_match_channel_amplitudes_at_best_phase() {
        let p = ThreeLevelPorts::new(1.3, 0.4, 0.0, ge()).unwrap();
        let (cf, cb) = p.channel_amplitudes();
        let (f, b, _) = ef_rates(&p);
        assert_relative_eq!(cf.norm_sqr(), f, epsilon = 1e-14);
        assert_relative_eq!(cb.norm_sqr(), b, epsilon = 1e-14);
    }

    #[test]
    fn undriven_is_flat() {
        let p = ThreeLevelPorts::new(1.0, 1.0, 0.0, ge()).unwrap();
        let tr = two_tone_trace(&p, &DriveSpec::new(0.0, 0.0).unwrap(), &linspace(-1.0, 1.0, 21)).unwrap();
        for z in tr.t() {
            assert!((z.norm() - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn saturated_ladder_matches_two_level_response() {
        // narrow g–e line, strongly saturated but weak next to the e–f width
        let ge_rates = AtomRates::new(0.005, 0.0, 0.0, 0.0).unwrap();
        let p = ThreeLevelPorts::new(0.5, 0.5, 0.0, ge_rates).unwrap().with_ef_loss(1.0);
        let drive = DriveSpec::new(0.1, 0.0).unwrap();
        let s = three_level_steady_state(&p, &drive, 0.0, 1e-6).unwrap();
        let pop = s.rho[(E, E)].re - s.rho[(F, F)].re;
        assert!(pop > 0.45);
        let tr = two_tone_trace(&p, &drive, &[0.0]).unwrap();
        let (f, b, _) = ef_rates(&p);
        // e–f coherence decays at half the f decay plus the e decay
        let gamma = f + b + p.ef_loss + p.ge_rates.gamma1();
        let two_level = 1.0 - pop * f / (0.5 * gamma);
        assert!(
            (tr.t()[0].norm() / two_level.abs() - 1.0).abs() < 0.05,
            "{} vs {}",
            tr.t()[0].norm(),
            two_level
        );
    }

    #[test]
    fn contrast_is_periodic_in_drive_phase() {
        let p = ThreeLevelPorts::new(0.8, 0.5, 0.0, ge()).unwrap();
        let drive = DriveSpec::new(0.1, 0.0).unwrap();
        let depth = |pc: f64| {
            let tr = two_tone_trace(&p.with_phases(pc, FRAC_PI_2), &drive, &[0.0]).unwrap();
            1.0 - tr.t()[0].norm()
        };
        let a = depth(0.3);
        assert_relative_eq!(a, depth(0.3 + TAU), epsilon = 1e-9);
        assert!((depth(FRAC_PI_2) - depth(3.0 * FRAC_PI_2)).abs() > 0.1);
    }

    proptest! {
        #[test]
        fn rate_identities(kl in 0.0..5.0f64, kr in 0.0..5.0f64) {
            let p = ThreeLevelPorts::new(kl, kr, 0.0, ge()).unwrap();
            let (f, b, _) = ef_rates(&p);
            prop_assert!(f >= b);
            prop_assert!((f * b - ((kl - kr) / 2.0).powi(2)).abs() < 1e-12 * (1.0 + kl + kr).powi(2));
            prop_assert!((f + b - (kl + kr)).abs() < 1e-12 * (1.0 + kl + kr));
            if kl > 1e-9 && kr > 1e-9 { prop_assert!(f > b); } else { prop_assert!((f - b).abs() < 1e-12); }
        }
    }
}
