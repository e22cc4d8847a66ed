//! Frequency-indexed complex transmission data.

use alloc::vec::Vec;

use crate::constants::TAU;
use crate::{Error, Result, C64};

/// Complex transmission sampled on a strictly increasing frequency grid (Hz).
///
/// `noise_sigma`, when present, is the per-point standard deviation of the
/// complex Gaussian noise, `E|n|² = σ²`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumTrace {
    freqs: Vec<f64>,
    t: Vec<C64>,
    noise_sigma: Option<Vec<f64>>,
}

impl SpectrumTrace {
    pub fn new(freqs: Vec<f64>, t: Vec<C64>) -> Result<Self> {
        if freqs.len() != t.len() {
            return Err(Error::DimensionMismatch {
                expected: freqs.len(),
                found: t.len(),
            });
        }
        if freqs.iter().any(|f| !f.is_finite()) {
            return Err(Error::MalformedTrace("non-finite frequency"));
        }
        if freqs.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::MalformedTrace("frequencies must be strictly increasing"));
        }
        Ok(Self {
            freqs,
            t,
            noise_sigma: None,
        })
    }

    pub fn with_noise_sigma(mut self, sigma: Vec<f64>) -> Result<Self> {
        if sigma.len() != self.freqs.len() {
            return Err(Error::DimensionMismatch {
                expected: self.freqs.len(),
                found: sigma.len(),
            });
        }
        if sigma.iter().any(|s| !(*s >= 0.0)) {
            return Err(Error::MalformedTrace("noise sigma must be non-negative"));
        }
        self.noise_sigma = Some(sigma);
        Ok(self)
    }

    /// Evaluates `t(f)` on the given grid.
    pub fn from_fn<F: FnMut(f64) -> C64>(freqs: Vec<f64>, mut f: F) -> Result<Self> {
        let t = freqs.iter().map(|&x| f(x)).collect();
        Self::new(freqs, t)
    }

    pub fn len(&self) -> usize {
        self.freqs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.freqs.is_empty()
    }

    pub fn freqs(&self) -> &[f64] {
        &self.freqs
    }

    pub fn t(&self) -> &[C64] {
        &self.t
    }

    pub fn noise_sigma(&self) -> Option<&[f64]> {
        self.noise_sigma.as_deref()
    }

    pub fn into_parts(self) -> (Vec<f64>, Vec<C64>, Option<Vec<f64>>) {
        (self.freqs, self.t, self.noise_sigma)
    }

    /// `arg t`, unwrapped along the sweep.
    pub fn unwrapped_phase(&self) -> Vec<f64> {
        unwrap(self.t.iter().map(|z| z.arg()))
    }
}

/// Removes 2π jumps between consecutive samples.
pub fn unwrap<I: IntoIterator<Item = f64>>(phases: I) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::new();
    let mut offset = 0.0;
    let mut prev: Option<f64> = None;
    for p in phases {
        if let Some(q) = prev {
            let d = p - q;
            offset -= TAU * ((d + core::f64::consts::PI) / TAU).floor();
        }
        prev = Some(p);
        out.push(p + offset);
    }
    out
}

/// `n` evenly spaced points on `[start, stop]`, both ends included.
pub fn linspace(start: f64, stop: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => alloc::vec![start],
        _ => {
            let h = (stop - start) / (n - 1) as f64;
            (0..n)
                .map(|i| if i == n - 1 { stop } else { start + h * i as f64 })
                .collect()
        }
    }
}
