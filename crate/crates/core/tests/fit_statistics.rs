use chiral_qed::coupling::{decay_rates, ChiralCoupling};
use chiral_qed::fit::{
    circle_fit, directionality_ci, exact_directionality_vs_phase, fano_model, fit_fano, phase_noise_bound, ratio_cdf,
    Estimate, FitMethod, FitResult, PhaseNoiseSource,
};
use chiral_qed::spectrum::{linspace, SpectrumTrace};
use chiral_qed::C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use std::f64::consts::{FRAC_PI_2, SQRT_2, TAU};

const MHZ: f64 = TAU * 1e6;

fn trace(g1d: f64, gt: f64, f0: f64, phi: f64, sigma: f64, rng: &mut ChaCha8Rng) -> SpectrumTrace {
    let nd = Normal::new(0.0, sigma / SQRT_2).unwrap();
    let half = 10.0 * gt / TAU;
    SpectrumTrace::from_fn(linspace(f0 - half, f0 + half, 401), |f| {
        let n = if sigma > 0.0 {
            C64::new(nd.sample(rng), nd.sample(rng))
        } else {
            C64::new(0.0, 0.0)
        };
        fano_model(g1d, gt, f0, phi, f) + n
    })
    .unwrap()
}

fn gamma_only(v: f64, s: f64) -> FitResult {
    FitResult {
        gamma_1d: Estimate::new(v, s),
        gamma_tot: Estimate::default(),
        f0: Estimate::default(),
        phi_fano: Estimate::default(),
        residual_rms: 0.0,
        covariance: [[0.0; 4]; 4],
        background: None,
        iterations: 0,
        method: FitMethod::Fano,
    }
}

#[test]
fn noiseless_round_trip_grid() {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for &g in &[0.5, 1.5, 2.5] {
        for &extra in &[0.05, 0.5, 2.0] {
            for &phi in &[-0.4, 0.0, 0.7] {
                let gt = g + extra;
                let tr = trace(g * MHZ, gt * MHZ, 6.441e9, phi, 0.0, &mut rng);
                let r = fit_fano(&tr, None).unwrap();
                let rel = |a: f64, b: f64| ((a - b) / b).abs();
                assert!(rel(r.gamma_1d.value, g * MHZ) < 1e-6, "{g} {extra} {phi}");
                assert!(rel(r.gamma_tot.value, gt * MHZ) < 1e-6);
                assert!(rel(r.f0.value, 6.441e9) < 1e-6);
                assert!((r.phi_fano.value - phi).abs() < 1e-6);
            }
        }
    }
}

#[test]
fn circle_and_fano_agree_on_noisy_traces() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    // Γ_f = 2.5, Γ_b + Γ' = 0.5 (MHz)
    for _ in 0..100 {
        let tr = trace(2.5 * MHZ, 3.0 * MHZ, 6.441e9, 0.0, 0.01, &mut rng);
        let a = fit_fano(&tr, None).unwrap();
        let b = circle_fit(&tr).unwrap();
        let mutual = (a.gamma_1d.sigma.powi(2) + b.gamma_1d.sigma.powi(2)).sqrt();
        assert!((a.gamma_1d.value - b.gamma_1d.value).abs() <= mutual);
        assert!((a.gamma_1d.value / (2.5 * MHZ) - 1.0).abs() < 0.02);
        assert!((b.gamma_1d.value / (2.5 * MHZ) - 1.0).abs() < 0.02);
    }
}

fn mc_quantiles(mf: f64, sf: f64, mb: f64, sb: f64, n: usize) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (x, y) = (Normal::new(mf, sf).unwrap(), Normal::new(mb, sb).unwrap());
    let mut r: Vec<f64> = (0..n).map(|_| x.sample(&mut rng) / y.sample(&mut rng)).collect();
    r.sort_by(f64::total_cmp);
    (r[(0.025 * n as f64) as usize], r[(0.975 * n as f64) as usize])
}

#[test]
fn ratio_interval_matches_monte_carlo() {
    let ci = directionality_ci(&gamma_only(2.5, 0.05), &gamma_only(0.025, 0.005), 0.95);
    assert!((ci.eta_d - 100.0).abs() < 1e-9);
    assert!(ci.ci_high.is_finite());
    let (lo, hi) = mc_quantiles(2.5, 0.05, 0.025, 0.005, 1_000_000);
    assert!((ci.ci_low / lo - 1.0).abs() < 0.05, "{} vs {lo}", ci.ci_low);
    assert!((ci.ci_high / hi - 1.0).abs() < 0.05, "{} vs {hi}", ci.ci_high);
}

#[test]
fn ratio_cdf_matches_sampling() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (x, y) = (Normal::new(1.0, 0.3).unwrap(), Normal::new(0.4, 0.3).unwrap());
    let s: Vec<f64> = (0..200_000).map(|_| x.sample(&mut rng) / y.sample(&mut rng)).collect();
    for w in [-5.0, -1.0, 0.0, 1.0, 2.5, 10.0] {
        let emp = s.iter().filter(|&&v| v <= w).count() as f64 / s.len() as f64;
        assert!((ratio_cdf(w, 1.0, 0.3, 0.4, 0.3) - emp).abs() < 4e-3, "{w}");
    }
}

#[test]
fn one_sided_bound_covers_true_ratio() {
    let ci = directionality_ci(&gamma_only(2.5, 0.05), &gamma_only(0.0, 0.005), 0.95);
    assert!(ci.is_one_sided() && ci.ci_high.is_infinite());
    assert!((ci.ci_low - 2.5 / (1.959964 * 0.005)).abs() < 1e-3 * ci.ci_low);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for gb in [0.0, 0.002, 0.006] {
        let truth = if gb > 0.0 { 2.5 / gb } else { f64::INFINITY };
        let (nf, nb) = (Normal::new(2.5, 0.05).unwrap(), Normal::new(gb, 0.005).unwrap());
        let n = 4000;
        let hits = (0..n)
            .filter(|_| {
                let ci = directionality_ci(
                    &gamma_only(nf.sample(&mut rng), 0.05),
                    &gamma_only(nb.sample(&mut rng), 0.005),
                    0.95,
                );
                ci.contains(truth)
            })
            .count();
        assert!(hits as f64 / n as f64 >= 0.93, "{gb}: {hits}");
    }
}

#[test]
fn phase_bound_matches_ensemble() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for v in [1e-3, 3e-3, 1e-2] {
        let nd = Normal::new(0.0, f64::sqrt(v)).unwrap();
        let (mut sf, mut sb) = (0.0, 0.0);
        let n = 400_000;
        for _ in 0..n {
            let c = ChiralCoupling::new(1.0, FRAC_PI_2 + nd.sample(&mut rng), FRAC_PI_2).unwrap();
            let (f, b) = decay_rates(&c);
            sf += f;
            sb += b;
        }
        let ensemble = sf / sb;
        let bound = phase_noise_bound(v, PhaseNoiseSource::Relative).unwrap();
        assert!((bound / ensemble - 1.0).abs() < 0.1, "{v}: {bound} vs {ensemble}");
        // two independent sources of variance v/2 each give the same relative phase
        let single = phase_noise_bound(v / 2.0, PhaseNoiseSource::SingleSource).unwrap();
        assert!((single / bound - 1.0).abs() < 1e-12);
    }
    assert!(exact_directionality_vs_phase(FRAC_PI_2, FRAC_PI_2).is_infinite());
}
