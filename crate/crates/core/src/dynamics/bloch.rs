use crate::constants::HBAR;
use crate::{Error, Result, C64};

/// Bloch-vector components `(⟨σ_x⟩, ⟨σ_y⟩, ⟨σ_z⟩)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochState {
    pub sx: f64,
    pub sy: f64,
    pub sz: f64,
}

impl BlochState {
    pub const GROUND: Self = Self {
        sx: 0.0,
        sy: 0.0,
        sz: -1.0,
    };

    pub fn norm_sqr(&self) -> f64 {
        self.sx * self.sx + self.sy * self.sy + self.sz * self.sz
    }
}

/// Coherent drive: Rabi frequency, detuning `δω = ω_ge − ω`, and optionally
/// the input power it was derived from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveSpec {
    pub omega_r: f64,
    pub delta_omega: f64,
    pub p_in: Option<f64>,
}

impl DriveSpec {
    pub fn new(omega_r: f64, delta_omega: f64) -> Result<Self> {
        if !(omega_r >= 0.0) || !omega_r.is_finite() || !delta_omega.is_finite() {
            return Err(Error::InvalidParameter {
                name: "omega_r",
                reason: "must be finite and non-negative",
            });
        }
        Ok(Self {
            omega_r,
            delta_omega,
            p_in: None,
        })
    }

    /// Drive set by the input power on a chiral atom.
    pub fn from_power(p_in: f64, gamma_f: f64, omega_ge: f64, delta_omega: f64) -> Result<Self> {
        let mut d = Self::new(rabi_from_power(p_in, gamma_f, omega_ge)?, delta_omega)?;
        d.p_in = Some(p_in);
        Ok(d)
    }
}

fn denominator(d: &DriveSpec, gamma1: f64, gamma2: f64) -> f64 {
    let w = d.omega_r;
    let dw = d.delta_omega;
    gamma1 * (gamma2 * gamma2 + dw * dw) + gamma2 * w * w
}

/// Steady state of `H = (δω/2)σ_z + (Ω_R/2)σ_y` with energy relaxation `Γ₁`
/// and coherence decay `Γ₂`.
pub fn bloch_steady_state(d: &DriveSpec, gamma1: f64, gamma2: f64) -> Result<BlochState> {
    if !(gamma1 > 0.0) || !(gamma2 > 0.0) {
        return Err(Error::InvalidParameter {
            name: "gamma1/gamma2",
            reason: "must be positive",
        });
    }
    let den = denominator(d, gamma1, gamma2);
    let w = d.omega_r;
    Ok(BlochState {
        sx: -gamma1 * gamma2 * w / den,
        sy: -gamma1 * d.delta_omega * w / den,
        sz: -1.0 + gamma2 * w * w / den,
    })
}

/// Power-broadened transmission of a chiral atom (no backward emission):
/// `1 − Γ_f Γ₁ (Γ₂ − iδω) / (Γ₁(Γ₂² + δω²) + Γ₂Ω_R²)`.
pub fn transmission_strong(d: &DriveSpec, gamma_f: f64, gamma1: f64, gamma2: f64) -> C64 {
    let den = denominator(d, gamma1, gamma2);
    C64::new(1.0, 0.0) - C64::new(gamma2, -d.delta_omega) * (gamma_f * gamma1 / den)
}

/// `Ω_R = √(4 P_in Γ_f / ħω_ge)`.
pub fn rabi_from_power(p_in: f64, gamma_f: f64, omega_ge: f64) -> Result<f64> {
    if !(p_in >= 0.0) || !(gamma_f >= 0.0) || !(omega_ge > 0.0) {
        return Err(Error::InvalidParameter {
            name: "p_in/gamma_f/omega_ge",
            reason: "power and rate must be non-negative, frequency positive",
        });
    }
    Ok((4.0 * p_in * gamma_f / (HBAR * omega_ge)).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coupling::{AtomRates, ChiralCoupling};
    use crate::slh::weak_transmission;
    use approx::assert_relative_eq;
    use core::f64::consts::{FRAC_PI_2, TAU};
    use proptest::prelude::*;

    #[test]
    fn undriven_is_ground() {
        let s = bloch_steady_state(&DriveSpec::new(0.0, 0.3).unwrap(), 1.0, 0.7).unwrap();
        assert_eq!(
            s,
            BlochState {
                sx: -0.0,
                sy: -0.0,
                sz: -1.0
            }
        );
    }

    #[test]
    fn resonant_drive_has_no_sy() {
        let s = bloch_steady_state(&DriveSpec::new(2.0, 0.0).unwrap(), 1.0, 0.7).unwrap();
        assert_eq!(s.sy, 0.0);
    }

    #[test]
    fn saturation() {
        let s = bloch_steady_state(&DriveSpec::new(1e6, 0.2).unwrap(), 1.0, 0.6).unwrap();
        assert!(s.sz.abs() < 1e-6);
        let t = transmission_strong(&DriveSpec::new(1e6, 0.2).unwrap(), 1.0, 1.0, 0.6);
        assert!((t - C64::new(1.0, 0.0)).norm() < 1e-6);
    }

    #[test]
    fn weak_limit_peak() {
        let (gf, g1, g2) = (0.8, 1.0, 0.7);
        let t = transmission_strong(&DriveSpec::new(0.0, 0.0).unwrap(), gf, g1, g2);
        assert_relative_eq!((C64::new(1.0, 0.0) - t).norm(), gf / g2, epsilon = 1e-15);
    }

    #[test]
    fn rejects_bad_rates() {
        assert!(bloch_steady_state(&DriveSpec::new(1.0, 0.0).unwrap(), 0.0, 1.0).is_err());
        assert!(DriveSpec::new(-1.0, 0.0).is_err());
    }

    #[test]
    fn power_slope() {
        let gf = TAU * 1e6;
        let w = TAU * 6.441e9;
        let p = 1e-15;
        let om = rabi_from_power(p, gf, w).unwrap();
        let slope = (om / TAU).powi(2) / 1e12; // MHz² per fW
                                               // oracle: 4Γ/((2π)² ħω) with ħ written out from h
        let hbar = 6.626_070_15e-34 / TAU;
        let oracle = 4.0 * gf / (TAU * TAU * hbar * w) * 1e-15 / 1e12;
        assert_relative_eq!(slope, oracle, max_relative = 1e-12);
        assert!((slope / 150.0 - 1.0).abs() < 0.01, "slope = {slope}");
        assert_eq!(rabi_from_power(0.0, gf, w).unwrap(), 0.0);
        let o2 = rabi_from_power(p, 2.0 * gf, w).unwrap();
        assert_relative_eq!(o2 / om, 2f64.sqrt(), epsilon = 1e-14);
        let d = DriveSpec::from_power(p, gf, w, 0.0).unwrap();
        assert_eq!(d.p_in, Some(p));
    }

    proptest! {
        #[test]
        fn inside_bloch_ball(w in 0.0..50.0f64, dw in -50.0..50.0f64, g1 in 0.01..5.0f64, phi in 0.0..5.0f64) {
            let g2 = 0.5 * g1 + phi;
            let s = bloch_steady_state(&DriveSpec::new(w, dw).unwrap(), g1, g2).unwrap();
            prop_assert!(s.norm_sqr() <= 1.0 + 1e-9);
        }

        #[test]
        fn zero_drive_matches_weak(gf in 0.01..3.0f64, g1x in 0.0..2.0f64, phi in 0.0..2.0f64, dw in -30.0..30.0f64) {
            let g1 = gf + g1x;
            let g2 = 0.5 * g1 + phi;
            let strong = transmission_strong(&DriveSpec::new(0.0, dw).unwrap(), gf, g1, g2);
            // chiral coupling giving Γ_f, with Γ′ chosen so that Γ_tot = 2Γ₂
            let c = ChiralCoupling::new(gf / 2.0, FRAC_PI_2, FRAC_PI_2).unwrap();
            let r = AtomRates::new(gf, 0.0, 2.0 * g2 - gf, 0.0).unwrap();
            let weak = weak_transmission(&c, &r, dw).unwrap();
            prop_assert!((strong - weak).norm() <= 1e-9 * weak.norm().max(1e-12));
        }
    }
}
