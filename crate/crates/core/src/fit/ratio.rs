//! Confidence intervals for the ratio of two independent normal estimates.

use super::FitResult;
use crate::quad::integrate;
use crate::special::{normal_cdf, normal_pdf, normal_quantile};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundMethod {
    RatioDistribution,
    PhaseNoise,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirectionalityBound {
    pub eta_d: f64,
    pub ci_low: f64,
    /// `+∞` for one-sided bounds.
    pub ci_high: f64,
    pub level: f64,
    pub method: BoundMethod,
}

impl DirectionalityBound {
    pub fn contains(&self, eta: f64) -> bool {
        eta >= self.ci_low && eta <= self.ci_high
    }

    pub fn is_one_sided(&self) -> bool {
        self.ci_high.is_infinite()
    }
}

/// `P(X/Y ≤ w)` for independent `X ~ N(μx, σx²)`, `Y ~ N(μy, σy²)`.
///
/// Conditioning on `Y` gives `∫ φ(y) [Φ((wy − μx)/σx) 1{y>0} +
/// Φ((μx − wy)/σx) 1{y<0}] dy`, integrated on each half line.
pub fn ratio_cdf(w: f64, mx: f64, sx: f64, my: f64, sy: f64) -> f64 {
    let dens = |y: f64| normal_pdf((y - my) / sy) / sy;
    let lo = my - 12.0 * sy;
    let hi = my + 12.0 * sy;
    let mut total = 0.0;
    if hi > 0.0 {
        let a = lo.max(0.0);
        total += integrate(|y| dens(y) * normal_cdf((w * y - mx) / sx), a, hi, 24, 16);
    }
    if lo < 0.0 {
        let b = hi.min(0.0);
        total += integrate(|y| dens(y) * normal_cdf((mx - w * y) / sx), lo, b, 24, 16);
    }
    total.clamp(0.0, 1.0)
}

fn ratio_quantile(p: f64, mx: f64, sx: f64, my: f64, sy: f64) -> f64 {
    let center = mx / my;
    let spread = center.abs().max(1e-300);
    let (mut a, mut b) = (center - spread, center + spread);
    while ratio_cdf(a, mx, sx, my, sy) > p {
        a -= 2.0 * (b - a);
    }
    while ratio_cdf(b, mx, sx, my, sy) < p {
        b += 2.0 * (b - a);
        if !b.is_finite() {
            return f64::INFINITY;
        }
    }
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if ratio_cdf(m, mx, sx, my, sy) < p {
            a = m;
        } else {
            b = m;
        }
        if b - a <= 1e-12 * m.abs() {
            break;
        }
    }
    0.5 * (a + b)
}

/// Interval for `η_d = Γ_f/Γ_b` at confidence `level` (0.95 is customary).
///
/// When the backward estimate is within two standard deviations of zero it
/// is clamped at zero and only the one-sided bound
/// `η_d ≥ Γ_f/(Γ_b + z σ_b)` is given.
pub fn directionality_ci(forward: &FitResult, backward: &FitResult, level: f64) -> DirectionalityBound {
    ratio_interval(
        forward.gamma_1d.value,
        forward.gamma_1d.sigma,
        backward.gamma_1d.value,
        backward.gamma_1d.sigma,
        level,
    )
}

pub(crate) fn ratio_interval(mf: f64, sf: f64, mb: f64, sb: f64, level: f64) -> DirectionalityBound {
    let z = normal_quantile(0.5 * (1.0 + level));
    if !(sf > 0.0 && sb > 0.0) {
        // no spread: plug-in ratio
        let eta = if mb > 0.0 { mf / mb } else { f64::INFINITY };
        return DirectionalityBound {
            eta_d: eta,
            ci_low: eta,
            ci_high: eta,
            level,
            method: BoundMethod::RatioDistribution,
        };
    }
    if mb < 2.0 * sb {
        let b = mb.max(0.0);
        return DirectionalityBound {
            eta_d: if b > 0.0 { mf / b } else { f64::INFINITY },
            ci_low: mf / (b + z * sb),
            ci_high: f64::INFINITY,
            level,
            method: BoundMethod::RatioDistribution,
        };
    }
    let tail = 0.5 * (1.0 - level);
    let lo = ratio_quantile(tail, mf, sf, mb, sb);
    let hi = ratio_quantile(1.0 - tail, mf, sf, mb, sb);
    let eta = mf / mb;
    DirectionalityBound {
        eta_d: eta,
        ci_low: lo.min(eta),
        ci_high: hi.max(eta),
        level,
        method: BoundMethod::RatioDistribution,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn cdf_limits() {
        assert_relative_eq!(ratio_cdf(100.0, 2.5, 0.05, 0.025, 0.005), 0.5, epsilon = 0.1);
        assert!(ratio_cdf(1e6, 2.5, 0.05, 0.025, 0.005) > 0.999);
        assert!(ratio_cdf(1.0, 2.5, 0.05, 0.025, 0.005) < 1e-6);
        // X/Y with both standard normal is Cauchy
        for w in [-3.0, -0.5, 0.0, 0.7, 2.0] {
            let cauchy = 0.5 + libm::atan(w) / core::f64::consts::PI;
            assert_relative_eq!(ratio_cdf(w, 0.0, 1.0, 0.0, 1.0), cauchy, epsilon = 1e-9);
        }
    }

    #[test]
    fn narrow_denominator_reduces_to_delta_method() {
        let b = ratio_interval(2.5, 0.05, 0.5, 1e-6, 0.95);
        let sd = 0.05 / 0.5;
        assert_relative_eq!(b.ci_low, 5.0 - 1.959964 * sd, max_relative = 1e-4);
        assert_relative_eq!(b.ci_high, 5.0 + 1.959964 * sd, max_relative = 1e-4);
    }

    #[test]
    fn one_sided_when_backward_is_noise() {
        let b = ratio_interval(2.5, 0.05, 0.0, 0.005, 0.95);
        assert!(b.is_one_sided());
        assert_relative_eq!(b.ci_low, 2.5 / (1.959964 * 0.005), max_relative = 1e-5);
        let b = ratio_interval(2.5, 0.05, -0.003, 0.005, 0.95);
        assert_relative_eq!(b.ci_low, 2.5 / (1.959964 * 0.005), max_relative = 1e-5);
        assert!(b.eta_d.is_infinite());
    }

    #[test]
    fn interval_brackets_estimate() {
        let b = ratio_interval(2.5, 0.05, 0.025, 0.005, 0.95);
        assert_relative_eq!(b.eta_d, 100.0, epsilon = 1e-9);
        assert!(b.ci_low < 100.0 && b.ci_high > 100.0 && b.ci_high.is_finite());
        assert!(b.contains(100.0));
    }
}
