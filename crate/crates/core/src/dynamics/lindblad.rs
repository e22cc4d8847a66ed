use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use super::BlochState;
use crate::linalg::{pauli, OperatorMatrix};
use crate::{Error, Result, C64};

/// Steady-state density matrix with solver diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct SteadyState {
    pub rho: OperatorMatrix,
    /// `‖𝓛ρ‖ / ‖𝓛‖` (Frobenius norms of the vectorised superoperator).
    pub residual: f64,
    pub min_eigenvalue: f64,
}

fn kron(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    a.kronecker(b)
}

/// Superoperator of `ρ̇ = −i[H, ρ] + Σ_k γ_k D[X_k]ρ` acting on
/// column-stacked `vec(ρ)`, using `vec(AρB) = (Bᵀ ⊗ A) vec(ρ)`.
pub fn liouvillian(h: &OperatorMatrix, dissipators: &[(f64, OperatorMatrix)]) -> Result<DMatrix<C64>> {
    let n = h.dim();
    let id = DMatrix::<C64>::identity(n, n);
    let hm = h.matrix();
    let mi = C64::new(0.0, -1.0);
    let mut l = (kron(&id, hm) - kron(&hm.transpose(), &id)) * mi;
    for (rate, x) in dissipators {
        if x.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: x.dim(),
            });
        }
        if !(*rate >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "rate",
                reason: "dissipator rates must be non-negative",
            });
        }
        let xm = x.matrix();
        let xdx = xm.adjoint() * xm;
        let term = kron(&xm.conjugate(), xm) - (kron(&id, &xdx) + kron(&xdx.transpose(), &id)) * C64::new(0.5, 0.0);
        l += term * C64::new(*rate, 0.0);
    }
    Ok(l)
}

/// Unique steady state of the master equation.
///
/// The null space of the Liouvillian is found directly: one row of `𝓛` is
/// replaced by the trace condition and the resulting linear system solved.
/// A null space of dimension above one is reported as
/// [`Error::SteadyStateMultiplicity`].
pub fn lindblad_steady_state(h: &OperatorMatrix, dissipators: &[(f64, OperatorMatrix)]) -> Result<SteadyState> {
    if dissipators.is_empty() {
        return Err(Error::InvalidParameter {
            name: "dissipators",
            reason: "at least one dissipator is required",
        });
    }
    let n = h.dim();
    let l = liouvillian(h, dissipators)?;
    let lnorm = l.norm();
    if !(lnorm > 0.0) {
        return Err(Error::SteadyStateMultiplicity(n * n));
    }

    let sv = l.singular_values();
    let smax = sv.max();
    let null = sv.iter().filter(|s| **s <= 1e-10 * smax).count();
    if null > 1 {
        return Err(Error::SteadyStateMultiplicity(null));
    }
    if null == 0 {
        return Err(Error::NoSteadyState(sv.min()));
    }

    // Trace preservation makes the population rows sum to zero, so one of
    // them (ρ₀₀) is redundant and can carry the normalisation instead.
    let scale = C64::new(lnorm / n as f64, 0.0);
    let mut a = l.clone();
    let mut b = DVector::<C64>::zeros(n * n);
    let row = 0;
    for k in 0..n * n {
        a[(row, k)] = C64::new(0.0, 0.0);
    }
    for i in 0..n {
        a[(row, i * (n + 1))] = scale;
    }
    b[row] = scale;
    let v = a.lu().solve(&b).ok_or(Error::SteadyStateMultiplicity(2))?;

    let rho = DMatrix::from_column_slice(n, n, v.as_slice());
    let rho = (&rho + rho.adjoint()) * C64::new(0.5, 0.0);
    let tr = rho.trace();
    let rho = rho / tr;

    let vr = DVector::from_column_slice(rho.as_slice());
    let residual = (&l * vr).norm() / lnorm;
    let min_eigenvalue = rho.clone().symmetric_eigen().eigenvalues.min();
    Ok(SteadyState {
        rho: OperatorMatrix::from_matrix(rho)?,
        residual,
        min_eigenvalue,
    })
}

/// `(⟨σ_x⟩, ⟨σ_y⟩, ⟨σ_z⟩)` of a two-level density matrix.
pub fn bloch_vector(rho: &OperatorMatrix) -> BlochState {
    BlochState {
        sx: pauli::sigma_x().expect(rho).re,
        sy: pauli::sigma_y().expect(rho).re,
        sz: pauli::sigma_z().expect(rho).re,
    }
}

/// Hamiltonian and dissipators of the driven two-level atom:
/// `H = (δω/2)σ_z + (Ω_R/2)σ_y`, `Γ₁ D[σ₋]`, `(Γ_φ/2) D[σ_z]` with
/// `Γ_φ = Γ₂ − Γ₁/2`.
pub fn two_level_model(
    omega_r: f64,
    delta_omega: f64,
    gamma1: f64,
    gamma2: f64,
) -> (OperatorMatrix, Vec<(f64, OperatorMatrix)>) {
    let h = &(&pauli::sigma_z() * (0.5 * delta_omega)) + &(&pauli::sigma_y() * (0.5 * omega_r));
    let gphi = (gamma2 - 0.5 * gamma1).max(0.0);
    let d = alloc::vec![(gamma1, pauli::sigma_minus()), (0.5 * gphi, pauli::sigma_z())];
    (h, d)
}

/// Thermal relaxation: `(n̄+1)Γ₁ D[σ₋] + n̄Γ₁ D[σ₊]`.
pub fn thermal_dissipators(gamma1: f64, n_th: f64) -> Vec<(f64, OperatorMatrix)> {
    alloc::vec![
        ((n_th + 1.0) * gamma1, pauli::sigma_minus()),
        (n_th * gamma1, pauli::sigma_plus()),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{bloch_steady_state, DriveSpec};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn pure_decay_reaches_ground() {
        let s = lindblad_steady_state(&OperatorMatrix::zeros(2), &[(1.0, pauli::sigma_minus())]).unwrap();
        assert!((s.rho.matrix() - pauli::ground().matrix()).norm() < 1e-14);
        assert!(s.residual < 1e-14);
    }

    #[test]
    fn detailed_balance() {
        let n = 0.3;
        let s = lindblad_steady_state(&OperatorMatrix::zeros(2), &thermal_dissipators(1.7, n)).unwrap();
        assert_relative_eq!(s.rho[(0, 0)].re, n / (2.0 * n + 1.0), epsilon = 1e-14);
    }

    #[test]
    fn degenerate_null_space() {
        // pure dephasing leaves every diagonal state stationary
        let r = lindblad_steady_state(&OperatorMatrix::zeros(2), &[(1.0, pauli::sigma_z())]);
        assert_eq!(r, Err(Error::SteadyStateMultiplicity(2)));
        assert!(lindblad_steady_state(&OperatorMatrix::zeros(2), &[]).is_err());
    }

    #[test]
    fn matches_closed_form() {
        let (w, dw, g1, g2) = (1.3, -0.4, 1.0, 0.8);
        let (h, d) = two_level_model(w, dw, g1, g2);
        let s = lindblad_steady_state(&h, &d).unwrap();
        let b = bloch_vector(&s.rho);
        let c = bloch_steady_state(&DriveSpec::new(w, dw).unwrap(), g1, g2).unwrap();
        assert_relative_eq!(b.sx, c.sx, epsilon = 1e-12);
        assert_relative_eq!(b.sy, c.sy, epsilon = 1e-12);
        assert_relative_eq!(b.sz, c.sz, epsilon = 1e-12);
    }

    proptest! {
        #[test]
        fn physical_state(w in 0.0..10.0f64, dw in -10.0..10.0f64, g1 in 0.05..3.0f64,
                          phi in 0.0..2.0f64, n in 0.0..1.0f64) {
            let (h, mut d) = two_level_model(w, dw, g1, 0.5 * g1 + phi);
            d.push((n * g1, pauli::sigma_plus()));
            let s = lindblad_steady_state(&h, &d).unwrap();
            prop_assert!((s.rho.trace() - C64::new(1.0, 0.0)).norm() < 1e-12);
            prop_assert!(s.rho.is_hermitian(1e-14));
            prop_assert!(s.min_eigenvalue > -1e-10);
            prop_assert!(s.residual < 1e-10);
        }
    }
}
