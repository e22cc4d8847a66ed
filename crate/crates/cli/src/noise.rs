use chiral_qed::spectrum::SpectrumTrace;
use chiral_qed::C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

/// Adds i.i.d. complex Gaussian noise with `E|n|² = σ²` (σ/√2 per
/// quadrature). The result records σ as its per-point noise level.
pub fn synthesize_noisy(trace: &SpectrumTrace, sigma: f64, seed: u64) -> SpectrumTrace {
    let n = trace.len();
    if sigma == 0.0 {
        return trace.clone();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, sigma / std::f64::consts::SQRT_2).expect("sigma is finite and non-negative");
    let t: Vec<C64> = trace
        .t()
        .iter()
        .map(|z| {
            let re = normal.sample(&mut rng);
            let im = normal.sample(&mut rng);
            z + C64::new(re, im)
        })
        .collect();
    SpectrumTrace::new(trace.freqs().to_vec(), t)
        .and_then(|tr| tr.with_noise_sigma(vec![sigma; n]))
        .expect("grid unchanged")
}
