//! SLH triplets `(S, L, H)` for finite-dimensional open systems, their series
//! (`◁`) and concatenation (`⊞`) products, and the two-point chiral atom built
//! from them.
//!
//! Operators act on the atom's Hilbert space; `S` holds complex scalars (the
//! waveguide sections carry no internal degrees of freedom). Hamiltonians are
//! in units of ħ, i.e. angular frequencies.

use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::coupling::{decay_rates, AtomRates, ChiralCoupling};
use crate::linalg::{pauli, OperatorMatrix};
use crate::spectrum::SpectrumTrace;
use crate::{Error, Result, C64};

#[derive(Debug, Clone, PartialEq)]
pub struct SlhTriplet {
    s: DMatrix<C64>,
    l: Vec<OperatorMatrix>,
    h: OperatorMatrix,
}

fn herm_tol(h: &OperatorMatrix) -> f64 {
    1e-12 * h.norm().max(1.0)
}

impl SlhTriplet {
    pub fn new(s: DMatrix<C64>, l: Vec<OperatorMatrix>, h: OperatorMatrix) -> Result<Self> {
        let n = s.nrows();
        if s.ncols() != n || n == 0 {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: s.ncols(),
            });
        }
        if l.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: l.len(),
            });
        }
        let dim = h.dim();
        if let Some(bad) = l.iter().find(|op| op.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: bad.dim(),
            });
        }
        let defect = (s.adjoint() * &s - DMatrix::<C64>::identity(n, n)).norm();
        if defect > 1e-10 {
            return Err(Error::InvalidParameter {
                name: "s",
                reason: "scattering matrix is not unitary",
            });
        }
        if !h.is_hermitian(herm_tol(&h)) {
            return Err(Error::InvalidParameter {
                name: "h",
                reason: "Hamiltonian is not Hermitian",
            });
        }
        Ok(Self { s, l, h })
    }

    /// `(I, 0, 0)` with `ports` channels on a `dim`-dimensional system.
    pub fn identity(ports: usize, dim: usize) -> Self {
        Self {
            s: DMatrix::identity(ports, ports),
            l: (0..ports).map(|_| OperatorMatrix::zeros(dim)).collect(),
            h: OperatorMatrix::zeros(dim),
        }
    }

    /// One-port component with unit scattering.
    pub fn single(l: OperatorMatrix, h: OperatorMatrix) -> Result<Self> {
        Self::new(DMatrix::identity(1, 1), alloc::vec![l], h)
    }

    /// One-port pure phase shift `(e^{iφ}, 0, 0)`.
    pub fn phase_shift(phi: f64, dim: usize) -> Self {
        Self {
            s: DMatrix::from_element(1, 1, C64::from_polar(1.0, phi)),
            l: alloc::vec![OperatorMatrix::zeros(dim)],
            h: OperatorMatrix::zeros(dim),
        }
    }

    /// Coherent displacement `(1, α, 0)`.
    pub fn coherent_drive(alpha: C64, dim: usize) -> Self {
        Self {
            s: DMatrix::identity(1, 1),
            l: alloc::vec![OperatorMatrix::identity(dim).scale(alpha)],
            h: OperatorMatrix::zeros(dim),
        }
    }

    pub fn ports(&self) -> usize {
        self.s.nrows()
    }

    pub fn dim(&self) -> usize {
        self.h.dim()
    }

    pub fn s(&self) -> &DMatrix<C64> {
        &self.s
    }

    pub fn l(&self) -> &[OperatorMatrix] {
        &self.l
    }

    pub fn h(&self) -> &OperatorMatrix {
        &self.h
    }

    pub fn unitarity_defect(&self) -> f64 {
        let n = self.ports();
        (self.s.adjoint() * &self.s - DMatrix::<C64>::identity(n, n)).norm()
    }
}

/// Series product `g2 ◁ g1`: the output of `g1` feeds `g2`.
pub fn series(g2: &SlhTriplet, g1: &SlhTriplet) -> Result<SlhTriplet> {
    if g2.ports() != g1.ports() {
        return Err(Error::DimensionMismatch {
            expected: g2.ports(),
            found: g1.ports(),
        });
    }
    if g2.dim() != g1.dim() {
        return Err(Error::DimensionMismatch {
            expected: g2.dim(),
            found: g1.dim(),
        });
    }
    let n = g2.ports();
    let dim = g2.dim();
    let s = &g2.s * &g1.s;
    // S₂L₁
    let s2l1: Vec<OperatorMatrix> = (0..n)
        .map(|i| {
            let mut acc = OperatorMatrix::zeros(dim);
            for j in 0..n {
                acc += &(&g1.l[j] * g2.s[(i, j)]);
            }
            acc
        })
        .collect();
    let l: Vec<OperatorMatrix> = g2.l.iter().zip(&s2l1).map(|(a, b)| a + b).collect();
    let mut x = OperatorMatrix::zeros(dim);
    for (l2, sl1) in g2.l.iter().zip(&s2l1) {
        x += &(&l2.dagger() * sl1);
    }
    let h = &(&g1.h + &g2.h) + &x.im_part();
    Ok(SlhTriplet { s, l, h })
}

/// Concatenation `ga ⊞ gb`: block-diagonal `S`, stacked `L`, summed `H`.
pub fn concat(ga: &SlhTriplet, gb: &SlhTriplet) -> Result<SlhTriplet> {
    if ga.dim() != gb.dim() {
        return Err(Error::DimensionMismatch {
            expected: ga.dim(),
            found: gb.dim(),
        });
    }
    let (na, nb) = (ga.ports(), gb.ports());
    let mut s = DMatrix::zeros(na + nb, na + nb);
    s.view_mut((0, 0), (na, na)).copy_from(&ga.s);
    s.view_mut((na, na), (nb, nb)).copy_from(&gb.s);
    let mut l = ga.l.clone();
    l.extend(gb.l.iter().cloned());
    Ok(SlhTriplet { s, l, h: &ga.h + &gb.h })
}

/// Coherent input on the forward channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveField {
    /// Amplitude in √(photons/s).
    pub alpha: C64,
    /// `δω = ω_ge − ω`, rad/s.
    pub detuning: f64,
}

fn ports_of(c: &ChiralCoupling, detuning: f64) -> [SlhTriplet; 5] {
    let g = (0.5 * c.kappa_em()).sqrt();
    let sm = pauli::sigma_minus();
    let zero = OperatorMatrix::zeros(2);
    let eic = C64::from_polar(1.0, c.phi_c());
    let mk = |l: OperatorMatrix, h: OperatorMatrix| SlhTriplet {
        s: DMatrix::identity(1, 1),
        l: alloc::vec![l],
        h,
    };
    [
        mk(&sm * g, &pauli::sigma_z() * (0.5 * detuning)),
        mk(&sm * (eic * g), zero.clone()),
        mk(&sm * g, zero.clone()),
        mk(&sm * (eic * g), zero),
        SlhTriplet::phase_shift(c.phi_wg(), 2),
    ]
}

/// The forward and backward chains composed with the standard series rule,
/// `G_f = G_fr ◁ G_WG ◁ G_fl ◁ G_drive`, `G_b = G_bl ◁ G_WG ◁ G_br`, then
/// concatenated.
///
/// Its Hamiltonian carries half of the coherent drive (the other half sits in
/// the cross term of the forward dissipator) and the exchange shift
/// [`lamb_shift`]`·σ₊σ₋`.
pub fn chiral_cascade(c: &ChiralCoupling, drive: &DriveField) -> SlhTriplet {
    let [fl, fr, bl, br, wg] = ports_of(c, drive.detuning);
    let dr = SlhTriplet::coherent_drive(drive.alpha, 2);
    let chain = |parts: &[&SlhTriplet]| {
        let mut acc = parts[parts.len() - 1].clone();
        for p in parts.iter().rev().skip(1) {
            acc = series(p, &acc).expect("single-port two-level chain");
        }
        acc
    };
    let gf = chain(&[&fr, &wg, &fl, &dr]);
    let gb = chain(&[&bl, &wg, &br]);
    concat(&gf, &gb).expect("same Hilbert space")
}

/// Coherent exchange shift `κ_em sin φ_WG cos φ_c` mediated by the waveguide
/// between the two coupling points. It renormalises the transition frequency
/// and is treated as absorbed into `δω`.
pub fn lamb_shift(c: &ChiralCoupling) -> f64 {
    c.kappa_em() * c.phi_wg().sin() * c.phi_c().cos()
}

/// The driven chiral atom as a two-port triplet.
///
/// `S` and `L` are the cascade products. `H` is the effective Hamiltonian of
/// the driven atom,
/// `(δω/2)σ_z − i√(κ/2)[α σ₊(1 + e^{i(φ_WG−φ_c)}) − α* σ₋(1 + e^{−i(φ_WG−φ_c)})]`,
/// in which the coherent part of the forward channel has been moved from the
/// dissipator into `H` (so the drive appears at full strength) and the
/// exchange shift is absorbed into `δω`. The master equation
/// `−i[H, ρ] + Σ D[L_k − ⟨L_k⟩_α]` equals the one of [`chiral_cascade`] up to
/// that frequency shift.
pub fn build_chiral_atom(c: &ChiralCoupling, drive: &DriveField) -> SlhTriplet {
    let raw = chiral_cascade(c, drive);
    SlhTriplet {
        s: raw.s,
        l: raw.l,
        h: effective_hamiltonian(c, drive),
    }
}

fn effective_hamiltonian(c: &ChiralCoupling, drive: &DriveField) -> OperatorMatrix {
    let g = (0.5 * c.kappa_em()).sqrt();
    let th = C64::from_polar(1.0, c.phi_wg() - c.phi_c());
    let a = drive.alpha;
    let i = C64::new(0.0, 1.0);
    let up = &pauli::sigma_plus() * (a * (C64::new(1.0, 0.0) + th));
    let down = &pauli::sigma_minus() * (a.conj() * (C64::new(1.0, 0.0) + th.conj()));
    let drive_term = &(&up - &down) * (-i * g);
    &(&pauli::sigma_z() * (0.5 * drive.detuning)) + &drive_term
}

/// Splits a collapse operator `a·I + b·σ₋` into `(a, b)`.
fn affine_parts(l: &OperatorMatrix) -> (C64, C64) {
    (l[(0, 0)], l[(1, 0)])
}

/// Weak-drive transmission and reflection through the SLH route, including
/// the propagation phase `e^{iφ_WG}`.
///
/// `⟨σ₋⟩` solves the linearised Heisenberg equation of `H` with total decay
/// `Γ_tot` taken from `rates`; then `t = ⟨L_f⟩/α`, `r = ⟨L_b⟩/α`.
pub fn slh_weak_response(c: &ChiralCoupling, rates: &AtomRates, delta_omega: f64) -> Result<(C64, C64)> {
    let gamma_tot = rates.gamma_tot();
    if !(gamma_tot > 0.0) {
        return Err(Error::DegenerateResonance);
    }
    let alpha = C64::new(1.0, 0.0);
    let g = build_chiral_atom(
        c,
        &DriveField {
            alpha,
            detuning: delta_omega,
        },
    );
    // coefficient of σ₊ in H
    let d = g.h()[(0, 1)];
    let i = C64::new(0.0, 1.0);
    let sm = -i * d / C64::new(0.5 * gamma_tot, delta_omega);
    let (af, bf) = affine_parts(&g.l()[0]);
    let (ab, bb) = affine_parts(&g.l()[1]);
    Ok(((af + bf * sm) / alpha, (ab + bb * sm) / alpha))
}

/// Closed-form weak-drive transmission `1 − Γ_f/(iδω + Γ_tot/2)`, with `Γ_f`
/// from the coupling phases and `Γ_tot` from `rates`. The global factor
/// `e^{iφ_WG}` is removed so that `t → 1` far from resonance.
pub fn weak_transmission(c: &ChiralCoupling, rates: &AtomRates, delta_omega: f64) -> Result<C64> {
    let gamma_tot = rates.gamma_tot();
    if !(gamma_tot > 0.0) {
        return Err(Error::DegenerateResonance);
    }
    let (gf, _) = decay_rates(c);
    Ok(C64::new(1.0, 0.0) - gf / C64::new(0.5 * gamma_tot, delta_omega))
}

/// [`weak_transmission`] with the propagation phase kept.
pub fn weak_transmission_raw(c: &ChiralCoupling, rates: &AtomRates, delta_omega: f64) -> Result<C64> {
    Ok(C64::from_polar(1.0, c.phi_wg()) * weak_transmission(c, rates, delta_omega)?)
}

/// Weak-drive reflection for a forward drive.
pub fn weak_reflection(c: &ChiralCoupling, rates: &AtomRates, delta_omega: f64) -> Result<C64> {
    Ok(slh_weak_response(c, rates, delta_omega)?.1)
}

/// Lorentzian response `1 − Γ_1D e^{iφ}/(iδω + Γ_tot/2)`.
pub fn lorentzian(gamma_1d: f64, gamma_tot: f64, phi: f64, delta_omega: f64) -> C64 {
    C64::new(1.0, 0.0) - C64::from_polar(gamma_1d, phi) / C64::new(0.5 * gamma_tot, delta_omega)
}

/// Total excursion (max − min) of the unwrapped phase of `t` across a sweep.
///
/// The resonance centre and width are taken from `|1 − t|²`; the sweep must
/// extend at least ten linewidths to each side. A trace with no resonance
/// (`1 − t ≡ 0`) has zero winding.
pub fn phase_winding(trace: &SpectrumTrace) -> Result<f64> {
    if trace.len() < 3 {
        return Err(Error::WindingUndefined("fewer than three points"));
    }
    let f = trace.freqs();
    let dev: Vec<f64> = trace.t().iter().map(|z| (C64::new(1.0, 0.0) - z).norm_sqr()).collect();
    let (imax, &peak) = dev
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty");
    if peak <= 1e-24 {
        return Ok(0.0);
    }
    let half = 0.5 * peak;
    let cross = |range: &mut dyn Iterator<Item = usize>| -> Option<f64> {
        let mut prev = imax;
        for k in range {
            if dev[k] <= half {
                let (x0, x1) = (f[prev], f[k]);
                let (y0, y1) = (dev[prev], dev[k]);
                return Some(x0 + (half - y0) * (x1 - x0) / (y1 - y0));
            }
            prev = k;
        }
        None
    };
    let lo = cross(&mut (0..imax).rev());
    let hi = cross(&mut (imax + 1..f.len()));
    let (lo, hi) = match (lo, hi) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(Error::WindingUndefined("resonance not resolved inside the sweep")),
    };
    let fwhm = hi - lo;
    let f0 = f[imax];
    // a few percent of slack for the discrete peak position
    let need = 10.0 * fwhm * 0.98;
    if f0 - f[0] < need || f[f.len() - 1] - f0 < need {
        return Err(Error::WindingUndefined("sweep spans fewer than ten linewidths"));
    }
    let ph = trace.unwrapped_phase();
    let max = ph.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = ph.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(max - min)
}
