//! Fano-generalised Lorentzian fit.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use super::lm::{levenberg_marquardt, normal_inverse};
use super::{locate_peak, Background, Estimate, FitMethod, FitResult};
use crate::constants::TAU;
use crate::spectrum::SpectrumTrace;
use crate::{Error, Result, C64};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    /// Fit a complex affine background `a + b (f − f_mid)` along with the
    /// resonance.
    pub background: bool,
    pub max_iterations: usize,
    /// Convergence on the relative parameter step.
    pub tolerance: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            background: false,
            max_iterations: 200,
            tolerance: 1e-10,
        }
    }
}

pub fn fit_fano(trace: &SpectrumTrace, init: Option<&FitResult>) -> Result<FitResult> {
    fit_fano_with(trace, init, &FitOptions::default())
}

/// Dimensionless problem: rates in units of `2πw`, frequency offsets in
/// units of `w` around `f_ref`, background slope per half-span.
pub(crate) struct Scaled<'a> {
    trace: &'a SpectrumTrace,
    f_ref: f64,
    w: f64,
    f_mid: f64,
    half_span: f64,
    weights: Vec<f64>,
    background: bool,
}

impl<'a> Scaled<'a> {
    pub(crate) fn new(trace: &'a SpectrumTrace, f_ref: f64, w: f64, background: bool) -> Self {
        let f = trace.freqs();
        let (lo, hi) = (f[0], f[f.len() - 1]);
        let weights = match trace.noise_sigma() {
            Some(s) => s.iter().map(|s| core::f64::consts::SQRT_2 / s).collect(),
            None => alloc::vec![1.0; f.len()],
        };
        Self {
            trace,
            f_ref,
            w,
            f_mid: 0.5 * (lo + hi),
            half_span: 0.5 * (hi - lo),
            weights,
            background,
        }
    }

    fn nparams(&self) -> usize {
        if self.background {
            8
        } else {
            4
        }
    }

    pub(crate) fn to_internal(&self, r: &FitResult) -> Vec<f64> {
        let s = TAU * self.w;
        let mut p = alloc::vec![
            r.gamma_1d.value / s,
            r.gamma_tot.value / s,
            (r.f0.value - self.f_ref) / self.w,
            r.phi_fano.value,
        ];
        if self.background {
            let (a, b) = match &r.background {
                Some(bg) => (bg.at(self.f_mid), bg.slope_per_hz * self.half_span),
                None => (C64::new(0.0, 0.0), C64::new(0.0, 0.0)),
            };
            p.extend([a.re, a.im, b.re, b.im]);
        }
        p
    }

    /// Weighted residuals `(Re, Im)` stacked per point, and their Jacobian.
    pub(crate) fn eval(&self, p: &[f64]) -> (DVector<f64>, DMatrix<f64>) {
        let n = self.trace.len();
        let np = self.nparams();
        let mut r = DVector::zeros(2 * n);
        let mut j = DMatrix::zeros(2 * n, np);
        let (g, gt, u, phi) = (p[0], p[1], p[2], p[3]);
        let e = C64::from_polar(1.0, phi);
        let a = e * g;
        let i = C64::new(0.0, 1.0);
        for (k, (&f, &t)) in self.trace.freqs().iter().zip(self.trace.t()).enumerate() {
            let y = (f - self.f_ref) / self.w;
            let d = C64::new(0.5 * gt, u - y);
            let frac = a / d;
            let mut model = C64::new(1.0, 0.0) - frac;
            let mut cols = [
                -e / d,
                0.5 * frac / d,
                i * frac / d,
                -i * frac,
                C64::default(),
                C64::default(),
                C64::default(),
                C64::default(),
            ];
            if self.background {
                let z = (f - self.f_mid) / self.half_span;
                model += C64::new(p[4], p[5]) + C64::new(p[6], p[7]) * z;
                cols[4] = C64::new(1.0, 0.0);
                cols[5] = i;
                cols[6] = C64::new(z, 0.0);
                cols[7] = i * z;
            }
            let wk = self.weights[k];
            let res = (model - t) * wk;
            r[2 * k] = res.re;
            r[2 * k + 1] = res.im;
            for (c, col) in cols.iter().take(np).enumerate() {
                j[(2 * k, c)] = col.re * wk;
                j[(2 * k + 1, c)] = col.im * wk;
            }
        }
        (r, j)
    }

    /// Converts an internal optimum to a [`FitResult`] with covariance.
    pub(crate) fn finish(&self, mut p: Vec<f64>, iterations: usize, method: FitMethod) -> FitResult {
        if p[0] < 0.0 {
            p[0] = -p[0];
            p[3] += core::f64::consts::PI;
        }
        p[3] = crate::coupling::wrap_phase(p[3] + core::f64::consts::PI) - core::f64::consts::PI;
        let (r, j) = self.eval(&p);
        let mut cov = normal_inverse(&j);
        let dof = r.len().saturating_sub(p.len()).max(1) as f64;
        if self.trace.noise_sigma().is_none() {
            cov *= r.norm_squared() / dof;
        }
        let s = TAU * self.w;
        let scale = [s, s, self.w, 1.0];
        let mut c4 = [[0.0; 4]; 4];
        for a in 0..4 {
            for b in 0..4 {
                c4[a][b] = cov[(a, b)] * scale[a] * scale[b];
            }
        }
        let sig = |k: usize| c4[k][k].max(0.0).sqrt();
        let background = self.background.then(|| Background {
            a: C64::new(p[4], p[5]),
            slope_per_hz: C64::new(p[6], p[7]) / self.half_span,
            f_ref: self.f_mid,
        });
        let mut out = FitResult {
            gamma_1d: Estimate::new(p[0] * s, sig(0)),
            gamma_tot: Estimate::new(p[1] * s, sig(1)),
            f0: Estimate::new(self.f_ref + p[2] * self.w, sig(2)),
            phi_fano: Estimate::new(p[3], sig(3)),
            residual_rms: 0.0,
            covariance: c4,
            background,
            iterations,
            method,
        };
        let n = self.trace.len() as f64;
        let ss: f64 = self
            .trace
            .freqs()
            .iter()
            .zip(self.trace.t())
            .map(|(&f, t)| (out.model(f) - t).norm_sqr())
            .sum();
        out.residual_rms = (ss / n).sqrt();
        out
    }
}

/// Starting point from the peak of `|1 − t|` (or of the deviation from the
/// mean end-point value when a background is fitted).
pub(crate) fn initial_guess(trace: &SpectrumTrace, background: bool) -> Result<FitResult> {
    let f = trace.freqs();
    let t = trace.t();
    let span = f[f.len() - 1] - f[0];
    let base = if background {
        0.5 * (t[0] + t[t.len() - 1])
    } else {
        C64::new(1.0, 0.0)
    };
    let (f0, fwhm, z) = match locate_peak(trace, base) {
        Some((k, fwhm)) => {
            if span < 3.0 * fwhm {
                return Err(Error::InvalidParameter {
                    name: "trace",
                    reason: "sweep spans fewer than three linewidths",
                });
            }
            (f[k], fwhm, base - t[k])
        }
        None => (0.5 * (f[0] + f[f.len() - 1]), 0.1 * span, C64::new(0.0, 0.0)),
    };
    let gamma_tot = TAU * fwhm;
    let bg = background.then(|| Background {
        a: base - C64::new(1.0, 0.0),
        slope_per_hz: C64::new(0.0, 0.0),
        f_ref: 0.5 * (f[0] + f[f.len() - 1]),
    });
    Ok(FitResult {
        gamma_1d: Estimate::new(0.5 * z.norm() * gamma_tot, 0.0),
        gamma_tot: Estimate::new(gamma_tot, 0.0),
        f0: Estimate::new(f0, 0.0),
        phi_fano: Estimate::new(if z.norm() > 0.0 { z.arg() } else { 0.0 }, 0.0),
        residual_rms: 0.0,
        covariance: [[0.0; 4]; 4],
        background: bg,
        iterations: 0,
        method: FitMethod::Fano,
    })
}

pub fn fit_fano_with(trace: &SpectrumTrace, init: Option<&FitResult>, opts: &FitOptions) -> Result<FitResult> {
    let np = if opts.background { 8 } else { 4 };
    if 2 * trace.len() <= np {
        return Err(Error::MalformedTrace("too few points for the fit"));
    }
    if trace.t().iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::MalformedTrace("non-finite transmission"));
    }
    let guess = match init {
        Some(r) => r.clone(),
        None => initial_guess(trace, opts.background)?,
    };
    let w = (guess.gamma_tot.value.abs() / TAU).max(1e-9 * (trace.freqs()[trace.len() - 1] - trace.freqs()[0]));
    let sc = Scaled::new(trace, guess.f0.value, w, opts.background);
    let p0 = sc.to_internal(&guess);
    let out = levenberg_marquardt(&p0, |p| sc.eval(p), opts.max_iterations, opts.tolerance);
    if !out.converged {
        return Err(Error::NonConvergence {
            iterations: out.iterations,
            best_rms: (2.0 * out.cost / trace.len() as f64).sqrt(),
        });
    }
    Ok(sc.finish(out.params, out.iterations, FitMethod::Fano))
}
