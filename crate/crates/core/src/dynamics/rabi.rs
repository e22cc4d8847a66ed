use alloc::vec::Vec;

use super::{BlochState, DriveSpec};
use crate::{Error, Result};

/// Transverse and longitudinal components sampled on a time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RabiTrace {
    pub tau: Vec<f64>,
    pub sx: Vec<f64>,
    pub sz: Vec<f64>,
}

pub type RingDown = RabiTrace;

/// Resonantly driven Rabi oscillation from the ground state.
///
/// Closed-form solution of `ṡ_x = −Ω s_z − Γ₂ s_x`, `ṡ_z = Ω s_x − Γ₁(1 + s_z)`
/// (drive along `σ_y`), valid on the oscillating branch
/// `Ω_R ≥ |Γ₁ − Γ₂|/2`. With `Γ_R = (Γ₁+Γ₂)/2` and
/// `ν_R = √(Ω_R² − (Γ₁−Γ₂)²/4)` the trace relaxes to
/// `x_∞ = Γ₁Ω_R/(Γ₁Γ₂+Ω_R²)`, `z_∞ = −Γ₁Γ₂/(Γ₁Γ₂+Ω_R²)`.
pub fn rabi_trace(tau_grid: &[f64], d: &DriveSpec, gamma1: f64, gamma2: f64) -> Result<RabiTrace> {
    if d.delta_omega != 0.0 {
        return Err(Error::InvalidParameter {
            name: "delta_omega",
            reason: "the Rabi trace is defined for a resonant drive",
        });
    }
    if !(gamma1 >= 0.0) || !(gamma2 >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "gamma1/gamma2",
            reason: "must be non-negative",
        });
    }
    let w = d.omega_r;
    let threshold = 0.5 * (gamma1 - gamma2).abs();
    let nu2 = w * w - threshold * threshold;
    if w < threshold || !(nu2 > 0.0) {
        return Err(Error::OverdampedRabi { omega_r: w, threshold });
    }
    let nu = nu2.sqrt();
    let gr = 0.5 * (gamma1 + gamma2);
    let den = gamma1 * gamma2 + w * w;
    let x_inf = gamma1 * w / den;
    let z_inf = -gamma1 * gamma2 / den;
    let mut sx = Vec::with_capacity(tau_grid.len());
    let mut sz = Vec::with_capacity(tau_grid.len());
    for &t in tau_grid {
        let (s, c) = (nu * t).sin_cos();
        let e = (-gr * t).exp();
        sx.push(x_inf - ((gr * x_inf - w) / nu * s + x_inf * c) * e);
        sz.push(z_inf - (1.0 + z_inf) * (c + gr / nu * s) * e);
    }
    Ok(RabiTrace {
        tau: tau_grid.to_vec(),
        sx,
        sz,
    })
}

/// Free decay after the drive is switched off.
pub fn ring_down(initial: &BlochState, t_grid: &[f64], gamma1: f64, gamma2: f64) -> RingDown {
    let sx = t_grid.iter().map(|&t| initial.sx * (-gamma2 * t).exp()).collect();
    let sz = t_grid
        .iter()
        .map(|&t| (1.0 + initial.sz) * (-gamma1 * t).exp() - 1.0)
        .collect();
    RabiTrace {
        tau: t_grid.to_vec(),
        sx,
        sz,
    }
}

/// `∫₀^∞ s_x dt = s_x(0)/Γ₂`, the integrated ring-down signal.
pub fn ring_down_integral(initial: &BlochState, gamma2: f64) -> f64 {
    initial.sx / gamma2
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::linspace;
    use approx::assert_relative_eq;
    use core::f64::consts::PI;

    fn drive(w: f64) -> DriveSpec {
        DriveSpec::new(w, 0.0).unwrap()
    }

    /// Fourth-order Runge-Kutta on the underlying equations.
    fn rk4(w: f64, g1: f64, g2: f64, t_end: f64, steps: usize) -> (f64, f64) {
        let f = |x: f64, z: f64| (-w * z - g2 * x, w * x - g1 * (1.0 + z));
        let h = t_end / steps as f64;
        let (mut x, mut z) = (0.0, -1.0);
        for _ in 0..steps {
            let k1 = f(x, z);
            let k2 = f(x + 0.5 * h * k1.0, z + 0.5 * h * k1.1);
            let k3 = f(x + 0.5 * h * k2.0, z + 0.5 * h * k2.1);
            let k4 = f(x + h * k3.0, z + h * k3.1);
            x += h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
            z += h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
        }
        (x, z)
    }

    #[test]
    fn matches_direct_integration() {
        for &(w, g1, g2) in &[(3.0, 1.0, 0.5), (0.8, 1.0, 0.9), (12.0, 0.3, 1.1)] {
            for &t in &[0.1, 1.0, 4.0] {
                let tr = rabi_trace(&[t], &drive(w), g1, g2).unwrap();
                let (x, z) = rk4(w, g1, g2, t, 20_000);
                assert_relative_eq!(tr.sx[0], x, epsilon = 1e-10);
                assert_relative_eq!(tr.sz[0], z, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn starts_in_ground_state() {
        let tr = rabi_trace(&[0.0], &drive(5.0), 1.0, 0.5).unwrap();
        assert!(tr.sx[0].abs() < 1e-15);
        assert_relative_eq!(tr.sz[0], -1.0, epsilon = 1e-15);
    }

    #[test]
    fn relaxes_to_steady_state() {
        let (w, g1, g2) = (4.0, 1.0, 0.7);
        let tr = rabi_trace(&[200.0], &drive(w), g1, g2).unwrap();
        let den = g1 * g2 + w * w;
        assert_relative_eq!(tr.sx[0], g1 * w / den, epsilon = 1e-12);
        assert_relative_eq!(tr.sz[0], -g1 * g2 / den, epsilon = 1e-12);
    }

    #[test]
    fn strong_drive_limit() {
        let (w, g1, g2) = (1000.0, 1.0, 0.5);
        let gr = 0.75;
        let grid = linspace(0.0, 3.0 * 2.0 * PI / w, 601);
        let tr = rabi_trace(&grid, &drive(w), g1, g2).unwrap();
        for (t, sx) in grid.iter().zip(&tr.sx) {
            let approx = (w * t).sin() * (-gr * t).exp();
            assert!((sx - approx).abs() < 0.01);
        }
    }

    #[test]
    fn overdamped_rejected() {
        assert!(matches!(
            rabi_trace(&[0.0], &drive(0.1), 2.0, 0.5),
            Err(Error::OverdampedRabi { .. })
        ));
        assert!(rabi_trace(&[0.0], &DriveSpec::new(5.0, 0.1).unwrap(), 1.0, 0.5).is_err());
    }

    #[test]
    fn free_decay() {
        let s = BlochState {
            sx: 1.0,
            sy: 0.0,
            sz: 0.0,
        };
        let r = ring_down(&s, &[0.0, 1.0], 2.0, 1.0);
        assert_relative_eq!(r.sx[1], (-1.0f64).exp(), epsilon = 1e-15);
        assert_relative_eq!(r.sz[1], (-2.0f64).exp() - 1.0, epsilon = 1e-15);
        let g = ring_down(&BlochState::GROUND, &[0.0, 0.5, 7.0], 2.0, 1.0);
        assert!(g.sz.iter().all(|&z| z == -1.0));
        // trapezoid oracle for the integrated signal
        let grid = linspace(0.0, 40.0, 400_001);
        let tr = ring_down(
            &BlochState {
                sx: 0.37,
                sy: 0.0,
                sz: -0.2,
            },
            &grid,
            1.0,
            0.8,
        );
        let h = grid[1] - grid[0];
        let trap: f64 = tr.sx.windows(2).map(|w| 0.5 * h * (w[0] + w[1])).sum();
        assert_relative_eq!(
            trap,
            ring_down_integral(
                &BlochState {
                    sx: 0.37,
                    sy: 0.0,
                    sz: -0.2
                },
                0.8
            ),
            max_relative = 1e-8
        );
    }
}
