//! Sideband coupled-mode model of a frequency-modulated coupler.
//!
//! An emitter `E`, a coupler `C` and a filter cavity `R` form a ladder; the
//! coupler frequency is modulated as `ω_C + ε sin(Δt)` and the cavity decays
//! into the waveguide. Each mode splits into sidebands `n = −N … N`; block `n`
//! holds the amplitudes `(E, C, R)` at `ω + nΔ` and the linear system
//!
//! ```text
//! i√(κ_e/2) a_in e_{R₀} = M(ω) a
//! ```
//!
//! is solved for the cavity baseband, giving `t = 1 − i(κ_e/2) [M⁻¹]_{R₀R₀}`.
//!
//! The frequency-domain convention follows Langevin equations written with
//! `+iω` on the left (`ȧ = iω_R a + …`); the more common `−iω` convention maps
//! to it by `ω → −ω` together with complex conjugation of `t`.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector, Matrix2, SymmetricEigen};

use crate::constants::TAU;
use crate::special::bessel_j_all;
use crate::spectrum::SpectrumTrace;
use crate::{Error, Result, C64};

const E: usize = 0;
const C: usize = 1;
const R: usize = 2;

/// Phase pattern of the couplings between sidebands of different order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CouplingConvention {
    /// `G_k = −i^k g J_k` on every entry of the blocks above the diagonal and
    /// `G_k*` below it.
    #[default]
    Printed,
    /// Phases taken directly from the transformed Langevin equations: rows of
    /// `E` and `R` carry `−g(−i)^k J_k`, rows of `C` carry `−g i^k J_k`, on
    /// both sides of the diagonal. Differs from `Printed` for odd `k` only.
    Derived,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SidebandModel {
    pub omega_e: f64,
    pub omega_c: f64,
    pub omega_r: f64,
    pub g_ec: f64,
    pub g_cr: f64,
    pub kappa_e: f64,
    pub kappa_t: f64,
    pub gamma_e: f64,
    pub gamma_c: f64,
    pub epsilon: f64,
    pub delta_mod: f64,
    pub n_trunc: usize,
    pub convention: CouplingConvention,
}

impl SidebandModel {
    /// A model with no modulation, no internal loss and `N = 2`; adjust the
    /// public fields and call [`SidebandModel::validate`].
    pub fn new(
        omega_e: f64,
        omega_c: f64,
        omega_r: f64,
        g_ec: f64,
        g_cr: f64,
        kappa_e: f64,
        kappa_t: f64,
    ) -> Result<Self> {
        let m = Self {
            omega_e,
            omega_c,
            omega_r,
            g_ec,
            g_cr,
            kappa_e,
            kappa_t,
            gamma_e: 0.0,
            gamma_c: 0.0,
            epsilon: 0.0,
            delta_mod: 1.0,
            n_trunc: 2,
            convention: CouplingConvention::Printed,
        };
        m.validate()?;
        Ok(m)
    }

    /// Right-hand port of the reference device at `Δ/2π = 805 MHz`,
    /// `ε/2π = 364 MHz`. Internal losses of emitter and coupler are not
    /// characterised there and are set to 0.1 MHz and 0.5 MHz.
    pub fn reference() -> Self {
        let mhz = |x: f64| TAU * 1e6 * x;
        Self {
            omega_e: mhz(5636.0),
            omega_c: mhz(6402.0),
            omega_r: mhz(6577.0),
            g_ec: mhz(73.15),
            g_cr: mhz(155.55),
            kappa_e: mhz(41.74),
            kappa_t: mhz(41.74 + 0.187),
            gamma_e: mhz(0.1),
            gamma_c: mhz(0.5),
            epsilon: mhz(364.0),
            delta_mod: mhz(805.0),
            n_trunc: 2,
            convention: CouplingConvention::Printed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |name, reason| Err(Error::InvalidParameter { name, reason });
        if !(self.kappa_e >= 0.0) || !(self.kappa_t >= self.kappa_e) {
            return bad("kappa_t", "need kappa_t >= kappa_e >= 0");
        }
        if !(self.gamma_e >= 0.0) || !(self.gamma_c >= 0.0) {
            return bad("gamma_e/gamma_c", "internal losses must be non-negative");
        }
        if !(self.delta_mod > 0.0) {
            return bad("delta_mod", "modulation frequency must be positive");
        }
        if !(self.epsilon >= 0.0) {
            return bad("epsilon", "modulation amplitude must be non-negative");
        }
        Ok(())
    }

    pub fn modulation_index(&self) -> f64 {
        self.epsilon / self.delta_mod
    }

    pub fn with_truncation(mut self, n: usize) -> Self {
        self.n_trunc = n;
        self
    }

    pub fn with_convention(mut self, c: CouplingConvention) -> Self {
        self.convention = c;
        self
    }
}

/// `J_0 … J_max_order` at `ε/Δ`.
pub fn bessel_weights(epsilon: f64, delta_mod: f64, max_order: usize) -> Result<Vec<f64>> {
    if !(delta_mod > 0.0) {
        return Err(Error::InvalidParameter {
            name: "delta_mod",
            reason: "modulation frequency must be positive",
        });
    }
    Ok(bessel_j_all(max_order, epsilon / delta_mod))
}

/// Smallest `N` with `|J_{N+1}(x)| < tol`.
pub fn min_truncation(x: f64, tol: f64) -> usize {
    let j = bessel_j_all(64, x);
    (0..63).find(|&n| j[n + 1].abs() < tol).unwrap_or(63)
}

/// Assembled coupled-mode matrix, `3(2N+1)` square.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockMatrix {
    order: usize,
    m: DMatrix<C64>,
}

impl BlockMatrix {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.m
    }

    /// Sub-matrix coupling sideband `row` to sideband `col` (orders in
    /// `−N … N`).
    pub fn block(&self, row: isize, col: isize) -> nalgebra::Matrix3<C64> {
        let n = self.order as isize;
        let (r, c) = (3 * (row + n) as usize, 3 * (col + n) as usize);
        self.m.fixed_view::<3, 3>(r, c).into_owned()
    }

    /// Row/column of mode `mode` (0 = E, 1 = C, 2 = R) in sideband `n`.
    pub fn index(&self, n: isize, mode: usize) -> usize {
        3 * (n + self.order as isize) as usize + mode
    }
}

fn i_pow(k: usize) -> C64 {
    match k % 4 {
        0 => C64::new(1.0, 0.0),
        1 => C64::new(0.0, 1.0),
        2 => C64::new(-1.0, 0.0),
        _ => C64::new(0.0, -1.0),
    }
}

/// Coupled-mode matrix at probe frequency `omega`.
pub fn build_blocks(m: &SidebandModel, omega: f64) -> BlockMatrix {
    let n = m.n_trunc;
    let nb = 2 * n + 1;
    let j = bessel_j_all(2 * n, m.modulation_index());
    let mut a = DMatrix::<C64>::zeros(3 * nb, 3 * nb);
    let idx = |b: usize, mode: usize| 3 * b + mode;

    for p in 0..nb {
        let order = p as f64 - n as f64;
        let det = |w: f64| omega - w + order * m.delta_mod;
        a[(idx(p, E), idx(p, E))] = C64::new(det(m.omega_e), 0.5 * m.gamma_e);
        a[(idx(p, C), idx(p, C))] = C64::new(det(m.omega_c), 0.5 * m.gamma_c);
        a[(idx(p, R), idx(p, R))] = C64::new(det(m.omega_r), 0.5 * m.kappa_t);
        for q in 0..nb {
            let k = p.abs_diff(q);
            let (gec, gcr) = (m.g_ec * j[k], m.g_cr * j[k]);
            // phase applied to entries in rows E/R and in row C
            let (ph_er, ph_c) = if k == 0 {
                (C64::new(-1.0, 0.0), C64::new(-1.0, 0.0))
            } else {
                match m.convention {
                    CouplingConvention::Printed => {
                        let ph = if q > p { -i_pow(k) } else { -i_pow(k).conj() };
                        (ph, ph)
                    }
                    CouplingConvention::Derived => (-i_pow(k).conj(), -i_pow(k)),
                }
            };
            a[(idx(p, E), idx(q, C))] += ph_er * gec;
            a[(idx(p, R), idx(q, C))] += ph_er * gcr;
            a[(idx(p, C), idx(q, E))] += ph_c * gec;
            a[(idx(p, C), idx(q, R))] += ph_c * gcr;
        }
    }
    BlockMatrix { order: n, m: a }
}

/// Transmission on a grid, with the indices of any grid points where the
/// matrix could not be inverted (their `t` is NaN).
#[derive(Debug, Clone, PartialEq)]
pub struct CmtTrace {
    pub trace: SpectrumTrace,
    pub singular: Vec<usize>,
}

/// `t(ω)` at a single frequency; `None` if the matrix is singular there.
pub fn cmt_transmission_at(m: &SidebandModel, omega: f64) -> Option<C64> {
    let b = build_blocks(m, omega);
    let r0 = b.index(0, R);
    let dim = b.m.nrows();
    let mut rhs = DVector::<C64>::zeros(dim);
    rhs[r0] = C64::new(1.0, 0.0);
    let x = b.m.lu().solve(&rhs)?;
    let g = x[r0];
    if !(g.re.is_finite() && g.im.is_finite()) {
        return None;
    }
    Some(C64::new(1.0, 0.0) - C64::new(0.0, 0.5 * m.kappa_e) * g)
}

/// Transmission over angular frequencies `omega_grid` (strictly increasing);
/// the trace frequencies are in Hz.
pub fn cmt_transmission(m: &SidebandModel, omega_grid: &[f64]) -> Result<CmtTrace> {
    m.validate()?;
    let mut t = Vec::with_capacity(omega_grid.len());
    let mut singular = Vec::new();
    for (k, &w) in omega_grid.iter().enumerate() {
        match cmt_transmission_at(m, w) {
            Some(z) => t.push(z),
            None => {
                singular.push(k);
                t.push(C64::new(f64::NAN, f64::NAN));
            }
        }
    }
    let freqs = omega_grid.iter().map(|w| w / TAU).collect();
    Ok(CmtTrace {
        trace: SpectrumTrace::new(freqs, t)?,
        singular,
    })
}

/// Raises the truncation order from `m.n_trunc` until two successive orders
/// agree to `tol` on the grid (at most order 12).
pub fn converged_truncation(m: &SidebandModel, omega_grid: &[f64], tol: f64) -> Result<usize> {
    let mut n = m.n_trunc;
    let eval = |n: usize| cmt_transmission(&m.with_truncation(n), omega_grid);
    let mut prev = eval(n)?;
    while n < 12 {
        let next = eval(n + 1)?;
        let diff = max_difference(prev.trace.t(), next.trace.t());
        if diff < tol {
            return Ok(n);
        }
        prev = next;
        n += 1;
    }
    Ok(n)
}

/// Largest pointwise `|a − b|`, ignoring NaN points.
pub fn max_difference(a: &[C64], b: &[C64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .filter(|d| d.is_finite())
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Dispersive,
    HybridizedCavity,
    FullyHybridized,
}

/// Mode-mixing coefficients used by an estimate.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Participation {
    /// Coupler amplitude in the hybrid mode.
    pub zeta: Option<f64>,
    /// Cavity amplitude in the hybrid mode.
    pub xi: Option<f64>,
    /// Hybrid-mode admixture of the dressed emitter.
    pub alpha: Option<f64>,
}

/// Detunings (rad/s) along the decay path `E_n → C_m → R₀`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathDetunings {
    pub c_e: f64,
    pub c_r: f64,
    pub e_r: f64,
    pub e_h: Option<f64>,
    pub omega_h: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeEstimate {
    pub regime: Regime,
    pub g_eff: f64,
    pub kappa_em: f64,
    pub participation: Participation,
    pub detunings: PathDetunings,
    /// `false` when the detuning hierarchy assumed by the regime does not hold.
    pub reliable: bool,
}

/// Margin used for "much larger than" in the regime preconditions.
const HIERARCHY: f64 = 3.0;

fn signed_bessel(j: &[f64], k: isize) -> f64 {
    let v = j[k.unsigned_abs()];
    if k < 0 && k % 2 != 0 {
        -v
    } else {
        v
    }
}

/// Coupler–cavity hybrid: `(ω_h, ζ, ξ)` for the eigenmode with the larger
/// coupler weight, normalised so `ζ² + ξ² = 1`.
fn hybrid_mode(omega_cm: f64, omega_r: f64, g: f64) -> (f64, f64, f64) {
    let h = Matrix2::new(omega_cm, g, g, omega_r);
    let eig = SymmetricEigen::new(h);
    let k = if eig.eigenvectors[(0, 0)].abs() >= eig.eigenvectors[(0, 1)].abs() {
        0
    } else {
        1
    };
    let (z, x) = (eig.eigenvectors[(0, k)], eig.eigenvectors[(1, k)]);
    let s = if z < 0.0 { -1.0 } else { 1.0 };
    (eig.eigenvalues[k], s * z, s * x)
}

/// External coupling of emitter sideband `n` through coupler sideband `mm`
/// into the cavity baseband.
pub fn regime_estimate(m: &SidebandModel, n: isize, mm: isize, regime: Regime) -> Result<RegimeEstimate> {
    m.validate()?;
    let order = (n.unsigned_abs()).max(mm.unsigned_abs()).max((mm - n).unsigned_abs());
    let j = bessel_j_all(order, m.modulation_index());
    let j_mn = signed_bessel(&j, mm - n);
    let j_m = signed_bessel(&j, mm);
    let w_en = m.omega_e + n as f64 * m.delta_mod;
    let w_cm = m.omega_c + mm as f64 * m.delta_mod;
    let mut det = PathDetunings {
        c_e: w_cm - w_en,
        c_r: w_cm - m.omega_r,
        e_r: w_en - m.omega_r,
        e_h: None,
        omega_h: None,
    };
    let g_ec = m.g_ec * j_mn;
    let g_cr = m.g_cr * j_m;

    let est = match regime {
        Regime::Dispersive => {
            let g_eff = 0.5 * m.g_ec * m.g_cr * j_mn * j_m * (1.0 / det.c_e + 1.0 / det.c_r);
            let kappa_em = (g_eff / det.e_r).powi(2) * m.kappa_e;
            let reliable = det.c_e.abs() >= HIERARCHY * g_ec.abs()
                && det.c_r.abs() >= HIERARCHY * g_cr.abs()
                && det.e_r.abs() >= HIERARCHY * g_eff.abs();
            RegimeEstimate {
                regime,
                g_eff,
                kappa_em,
                participation: Participation::default(),
                detunings: det,
                reliable,
            }
        }
        Regime::HybridizedCavity | Regime::FullyHybridized => {
            let (w_h, zeta, xi) = hybrid_mode(w_cm, m.omega_r, g_cr);
            let norm = zeta * zeta + xi * xi;
            let g_eff = g_ec * zeta * zeta / norm;
            let e_h = w_en - w_h;
            det.e_h = Some(e_h);
            det.omega_h = Some(w_h);
            let cavity_weight = xi * xi / norm;
            let strongly_mixed = det.c_r.abs() <= HIERARCHY * g_cr.abs();
            if regime == Regime::HybridizedCavity {
                RegimeEstimate {
                    regime,
                    g_eff,
                    kappa_em: (g_eff / e_h).powi(2) * cavity_weight * m.kappa_e,
                    participation: Participation {
                        zeta: Some(zeta),
                        xi: Some(xi),
                        alpha: None,
                    },
                    detunings: det,
                    reliable: strongly_mixed && e_h.abs() >= HIERARCHY * g_eff.abs(),
                }
            } else {
                // emitter-like eigenvector (1, α)/√(1+α²) of [[ω_E, g], [g, ω_h]]
                let alpha = 2.0 * g_eff / (e_h + e_h.signum() * (e_h * e_h + 4.0 * g_eff * g_eff).sqrt());
                let alpha = if alpha.is_finite() { alpha } else { 1.0 };
                let a2 = alpha * alpha;
                RegimeEstimate {
                    regime,
                    g_eff,
                    kappa_em: a2 / (1.0 + a2) * cavity_weight * m.kappa_e,
                    participation: Participation {
                        zeta: Some(zeta),
                        xi: Some(xi),
                        alpha: Some(alpha),
                    },
                    detunings: det,
                    reliable: strongly_mixed && alpha.abs() < 1.0 / HIERARCHY,
                }
            }
        }
    };
    Ok(est)
}

/// How the mean-frequency shift of a modulated coupler is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ShiftConvention {
    /// `ω̄_C = ω_C + (ε_Φ²/4) dω_C/dΦ`.
    #[default]
    FirstDerivative,
    /// `ω̄_C = ω_C + (ε_Φ²/4) d²ω_C/dΦ²`, the time average of the second-order
    /// Taylor term.
    SecondDerivative,
}

/// Tabulated coupler frequency versus flux.
#[derive(Debug, Clone, PartialEq)]
pub struct TuningCurve {
    flux: Vec<f64>,
    omega: Vec<f64>,
}

impl TuningCurve {
    pub fn new(flux: Vec<f64>, omega: Vec<f64>) -> Result<Self> {
        if flux.len() != omega.len() {
            return Err(Error::DimensionMismatch {
                expected: flux.len(),
                found: omega.len(),
            });
        }
        if flux.len() < 3 {
            return Err(Error::InvalidParameter {
                name: "flux",
                reason: "need at least three tabulated points",
            });
        }
        if flux.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter {
                name: "flux",
                reason: "must be strictly increasing",
            });
        }
        Ok(Self { flux, omega })
    }

    pub fn from_fn<F: Fn(f64) -> f64>(flux: Vec<f64>, f: F) -> Result<Self> {
        let omega = flux.iter().map(|&x| f(x)).collect();
        Self::new(flux, omega)
    }

    /// Value, first and second derivative of the local quadratic through the
    /// three tabulated points nearest `phi`.
    pub fn local_taylor(&self, phi: f64) -> Result<(f64, f64, f64)> {
        let (lo, hi) = (self.flux[0], self.flux[self.flux.len() - 1]);
        if !(phi >= lo && phi <= hi) {
            return Err(Error::OutOfRange {
                value: phi,
                min: lo,
                max: hi,
            });
        }
        let k = self.flux.partition_point(|&x| x < phi);
        let start = k.saturating_sub(1).min(self.flux.len() - 3);
        let x = &self.flux[start..start + 3];
        let y = &self.omega[start..start + 3];
        let (mut v, mut d1, mut d2) = (0.0, 0.0, 0.0);
        for i in 0..3 {
            let (a, b) = ((i + 1) % 3, (i + 2) % 3);
            let den = (x[i] - x[a]) * (x[i] - x[b]);
            v += y[i] * (phi - x[a]) * (phi - x[b]) / den;
            d1 += y[i] * ((phi - x[a]) + (phi - x[b])) / den;
            d2 += y[i] * 2.0 / den;
        }
        Ok((v, d1, d2))
    }
}

/// Mean coupler frequency and modulation amplitude produced by a flux tone
/// of amplitude `epsilon_phi` around `phi_dc`: `ε = ε_Φ dω_C/dΦ` and the
/// shift selected by `conv`.
pub fn coupler_drive_calibration(
    curve: &TuningCurve,
    phi_dc: f64,
    epsilon_phi: f64,
    conv: ShiftConvention,
) -> Result<(f64, f64)> {
    let (w, d1, d2) = curve.local_taylor(phi_dc)?;
    let slope = match conv {
        ShiftConvention::FirstDerivative => d1,
        ShiftConvention::SecondDerivative => d2,
    };
    Ok((w + 0.25 * epsilon_phi * epsilon_phi * slope, epsilon_phi * d1))
}
