//! Algebraic circle fit followed by a phase-versus-frequency fit.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use super::fano::Scaled;
use super::lm::levenberg_marquardt;
use super::{locate_peak, FitMethod, FitResult};
use crate::spectrum::{unwrap, SpectrumTrace};
use crate::{Error, Result, C64};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Circle {
    pub center: C64,
    pub radius: f64,
}

/// Taubin's algebraic fit (Chernov's Newton iteration on the characteristic
/// polynomial).
pub fn fit_circle_geometry(points: &[C64]) -> Result<Circle> {
    let n = points.len();
    if n < 3 {
        return Err(Error::DegenerateCircle);
    }
    let nf = n as f64;
    let mean = points.iter().sum::<C64>() / nf;
    let (mut mxx, mut myy, mut mxy, mut mxz, mut myz, mut mzz) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
    for p in points {
        let (x, y) = (p.re - mean.re, p.im - mean.im);
        let z = x * x + y * y;
        mxx += x * x;
        myy += y * y;
        mxy += x * y;
        mxz += x * z;
        myz += y * z;
        mzz += z * z;
    }
    let (mxx, myy, mxy, mxz, myz, mzz) = (mxx / nf, myy / nf, mxy / nf, mxz / nf, myz / nf, mzz / nf);
    let mz = mxx + myy;
    let cov_xy = mxx * myy - mxy * mxy;
    if !(mz > 0.0) || cov_xy <= 1e-14 * mz * mz {
        return Err(Error::DegenerateCircle);
    }
    let var_z = mzz - mz * mz;
    let a3 = 4.0 * mz;
    let a2 = -3.0 * mz * mz - mzz;
    let a1 = var_z * mz + 4.0 * cov_xy * mz - mxz * mxz - myz * myz;
    let a0 = mxz * (mxz * myy - myz * mxy) + myz * (myz * mxx - mxz * mxy) - var_z * cov_xy;
    let (mut x, mut y) = (0.0f64, a0);
    for _ in 0..100 {
        let dy = a1 + x * (2.0 * a2 + 3.0 * a3 * x);
        let xn = x - y / dy;
        if xn == x || !xn.is_finite() {
            break;
        }
        let yn = a0 + xn * (a1 + xn * (a2 + xn * a3));
        if yn.abs() >= y.abs() {
            break;
        }
        x = xn;
        y = yn;
    }
    let det = x * x - x * mz + cov_xy;
    let cx = (mxz * (myy - x) - myz * mxy) / det / 2.0;
    let cy = (myz * (mxx - x) - mxz * mxy) / det / 2.0;
    let radius = (cx * cx + cy * cy + mz).sqrt();
    if !(radius.is_finite()) {
        return Err(Error::DegenerateCircle);
    }
    Ok(Circle {
        center: C64::new(cx, cy) + mean,
        radius,
    })
}

/// Resonance parameters from the circle traced by `t` in the complex plane.
///
/// The radius gives `Γ_1D/Γ_tot`, the direction from the centre to the
/// off-resonant point `t = 1` gives `φ_f`, and the angle around the centre,
/// `θ₀ + 2 atan(2·2π(f − f₀)/Γ_tot)`, gives `f₀` and `Γ_tot`. Uncertainties
/// come from the linearised Fano model at the result.
pub fn circle_fit(trace: &SpectrumTrace) -> Result<FitResult> {
    let c = fit_circle_geometry(trace.t())?;
    let scatter = (trace
        .t()
        .iter()
        .map(|z| ((z - c.center).norm() - c.radius).powi(2))
        .sum::<f64>()
        / trace.len() as f64)
        .sqrt();
    if 2.0 * c.radius < 5.0 * scatter {
        return Err(Error::InvalidParameter {
            name: "trace",
            reason: "circle diameter below five times the point scatter",
        });
    }
    let to_one = C64::new(1.0, 0.0) - c.center;
    if to_one.norm() < 1e-12 {
        return Err(Error::DegenerateCircle);
    }
    let off_res = c.center + to_one / to_one.norm() * c.radius;
    let phi = to_one.arg();

    let f = trace.freqs();
    let (k0, fwhm) = locate_peak(trace, off_res).ok_or(Error::DegenerateCircle)?;
    let theta = unwrap(trace.t().iter().map(|z| (z - c.center).arg()));
    let w = fwhm;
    let f_ref = f[k0];

    // (θ₀, u, G) with u = (f₀ − f_ref)/w and G = Γ_tot/(2πw)
    let eval = |p: &[f64]| {
        let n = f.len();
        let mut r = DVector::zeros(n);
        let mut j = DMatrix::zeros(n, 3);
        for k in 0..n {
            let x = 2.0 * ((f[k] - f_ref) / w - p[1]) / p[2];
            let den = 1.0 + x * x;
            r[k] = p[0] + 2.0 * x.atan() - theta[k];
            j[(k, 0)] = 1.0;
            j[(k, 1)] = -4.0 / (p[2] * den);
            j[(k, 2)] = -2.0 * x / (p[2] * den);
        }
        (r, j)
    };
    let out = levenberg_marquardt(&[theta[k0], 0.0, 1.0], eval, 200, 1e-10);
    if !out.converged {
        return Err(Error::NonConvergence {
            iterations: out.iterations,
            best_rms: (2.0 * out.cost / f.len() as f64).sqrt(),
        });
    }
    let g_tot = out.params[2].abs();
    let f0 = f_ref + out.params[1] * w;
    let sc = Scaled::new(trace, f0, w, false);
    let p: Vec<f64> = alloc::vec![c.radius * g_tot, g_tot, 0.0, phi];
    Ok(sc.finish(p, out.iterations, FitMethod::Circle))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::TAU;
    use crate::fit::{fano_model, fit_fano};
    use crate::spectrum::linspace;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    const MHZ: f64 = TAU * 1e6;

    fn synth(g1d: f64, gt: f64, phi: f64, halfspan: f64, n: usize, sigma: f64, seed: u64) -> SpectrumTrace {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let nd = Normal::new(0.0, sigma / core::f64::consts::SQRT_2).unwrap();
        SpectrumTrace::from_fn(linspace(6e9 - halfspan, 6e9 + halfspan, n), |f| {
            fano_model(g1d, gt, 6e9, phi, f) + C64::new(nd.sample(&mut rng), nd.sample(&mut rng))
        })
        .unwrap()
    }

    #[test]
    fn exact_circle() {
        let pts: Vec<C64> = (0..7)
            .map(|k| C64::new(0.3, -0.2) + C64::from_polar(0.8, k as f64))
            .collect();
        let c = fit_circle_geometry(&pts).unwrap();
        assert!((c.center - C64::new(0.3, -0.2)).norm() < 1e-12);
        assert_relative_eq!(c.radius, 0.8, epsilon = 1e-12);
    }

    #[test]
    fn collinear_points_rejected() {
        let pts: Vec<C64> = (0..10).map(|k| C64::new(k as f64, 2.0 * k as f64)).collect();
        assert_eq!(fit_circle_geometry(&pts), Err(Error::DegenerateCircle));
        assert_eq!(fit_circle_geometry(&pts[..2]), Err(Error::DegenerateCircle));
    }

    #[test]
    fn ideal_chiral_circle() {
        let tr = synth(2.0 * MHZ, 2.0 * MHZ, 0.0, 40e6, 401, 0.0, 0);
        let c = fit_circle_geometry(tr.t()).unwrap();
        assert!((c.center).norm() < 1e-10);
        assert_relative_eq!(2.0 * c.radius, 2.0, epsilon = 1e-10);
        let r = circle_fit(&tr).unwrap();
        assert_relative_eq!(r.gamma_1d.value, 2.0 * MHZ, max_relative = 1e-8);
        assert_relative_eq!(r.gamma_tot.value, 2.0 * MHZ, max_relative = 1e-8);
        assert_relative_eq!(r.f0.value, 6e9, max_relative = 1e-12);
        assert_eq!(r.method, FitMethod::Circle);
    }

    #[test]
    fn fano_circle_is_rotated() {
        let tr = synth(2.5 * MHZ, 3.0 * MHZ, 0.4, 40e6, 401, 0.0, 0);
        let r = circle_fit(&tr).unwrap();
        assert_relative_eq!(r.phi_fano.value, 0.4, epsilon = 1e-9);
        assert_relative_eq!(r.gamma_1d.value, 2.5 * MHZ, max_relative = 1e-8);
    }

    #[test]
    fn noisy_agreement_with_fano() {
        for seed in 0..20 {
            let tr = synth(2.5 * MHZ, 3.0 * MHZ, 0.0, 30e6, 401, 0.01, seed);
            let a = circle_fit(&tr).unwrap();
            let b = fit_fano(&tr, None).unwrap();
            assert_relative_eq!(a.gamma_1d.value, 2.5 * MHZ, max_relative = 0.02);
            let s = (a.gamma_1d.sigma.powi(2) + b.gamma_1d.sigma.powi(2)).sqrt();
            assert!((a.gamma_1d.value - b.gamma_1d.value).abs() <= s);
        }
    }

    #[test]
    fn scatter_precondition() {
        let tr = synth(0.01 * MHZ, 3.0 * MHZ, 0.0, 30e6, 401, 0.05, 1);
        assert!(circle_fit(&tr).is_err());
    }

    #[test]
    fn semicircle_centre_unbiased() {
        // half the circle: from far below resonance up to f₀
        let gt = 3.0 * MHZ;
        let n = 200;
        let (mut sx, mut sy) = (0.0, 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let nd = Normal::new(0.0, 0.01 / core::f64::consts::SQRT_2).unwrap();
        for _ in 0..n {
            let pts: Vec<C64> = linspace(6e9 - 30e6, 6e9, 201)
                .into_iter()
                .map(|f| fano_model(2.5 * MHZ, gt, 6e9, 0.0, f) + C64::new(nd.sample(&mut rng), nd.sample(&mut rng)))
                .collect();
            let c = fit_circle_geometry(&pts).unwrap();
            sx += c.center.re;
            sy += c.center.im;
        }
        let true_c = C64::new(1.0 - 2.5 / 3.0, 0.0);
        let mean = C64::new(sx, sy) / n as f64;
        // standard error of the mean is ~1e-4 here
        assert!((mean - true_c).norm() < 1e-3, "{mean}");
    }
}
