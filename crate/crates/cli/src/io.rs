//! Text formats: CSV tables for traces and spectra, TOML for fit reports.
//!
//! Numbers are written in Rust's shortest round-trip form, so reading a file
//! back recovers the written values exactly.

use std::path::Path;

use chiral_qed::fit::{Background, Estimate, FitMethod, FitResult};
use chiral_qed::spectrum::SpectrumTrace;
use chiral_qed::C64;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const TRACE_HEADER: [&str; 5] = ["freq_hz", "re_t", "im_t", "abs_t", "arg_t_rad"];
pub const PSD_HEADER: [&str; 2] = ["freq_hz", "psd_w_per_hz"];
pub const RABI_HEADER: [&str; 3] = ["tau_s", "sx", "sz"];
pub const BUDGET_HEADER: [&str; 4] = ["gamma_1d_hz", "gamma_prime_hz", "beta", "purcell"];

pub fn fmt_f64(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-5..1e16).contains(&a) || !x.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn parse_f64(s: &str, path: &Path, line: u64) -> Result<f64, CliError> {
    s.trim().parse().map_err(|_| CliError::Format {
        path: path.display().to_string(),
        message: format!("line {line}: `{s}` is not a number"),
    })
}

pub fn write_table(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| CliError::io(path, e))?;
    w.write_record(header).map_err(|e| CliError::io(path, e))?;
    for row in rows {
        w.write_record(row.iter().map(|x| fmt_f64(*x)))
            .map_err(|e| CliError::io(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn read_table(path: &Path, header: &[&str]) -> Result<Vec<Vec<f64>>, CliError> {
    let mut r = csv::Reader::from_path(path).map_err(|e| CliError::io(path, e))?;
    let got = r.headers().map_err(|e| CliError::io(path, e))?.clone();
    if got.iter().collect::<Vec<_>>() != header {
        return Err(CliError::Format {
            path: path.display().to_string(),
            message: format!("expected header `{}`", header.join(",")),
        });
    }
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| CliError::Format {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        rows.push(
            rec.iter()
                .map(|s| parse_f64(s, path, line))
                .collect::<Result<Vec<_>, _>>()?,
        );
    }
    Ok(rows)
}

pub fn write_trace(path: &Path, trace: &SpectrumTrace) -> Result<(), CliError> {
    let arg = trace.unwrapped_phase();
    let rows = trace
        .freqs()
        .iter()
        .zip(trace.t())
        .zip(arg)
        .map(|((&f, z), a)| vec![f, z.re, z.im, z.norm(), a]);
    write_table(path, &TRACE_HEADER, rows)
}

pub fn read_trace(path: &Path) -> Result<SpectrumTrace, CliError> {
    let rows = read_table(path, &TRACE_HEADER)?;
    let freqs = rows.iter().map(|r| r[0]).collect();
    let t = rows.iter().map(|r| C64::new(r[1], r[2])).collect();
    SpectrumTrace::new(freqs, t).map_err(|e| CliError::Format {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

pub fn write_psd(path: &Path, freqs_hz: &[f64], psd_w_per_hz: &[f64]) -> Result<(), CliError> {
    write_table(
        path,
        &PSD_HEADER,
        freqs_hz.iter().zip(psd_w_per_hz).map(|(&f, &p)| vec![f, p]),
    )
}

pub fn read_psd(path: &Path) -> Result<(Vec<f64>, Vec<f64>), CliError> {
    let rows = read_table(path, &PSD_HEADER)?;
    Ok(rows.into_iter().map(|r| (r[0], r[1])).unzip())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateRecord {
    pub value: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BackgroundRecord {
    pub a_re: f64,
    pub a_im: f64,
    pub slope_re_per_hz: f64,
    pub slope_im_per_hz: f64,
    pub f_ref_hz: f64,
}

/// Fit result with rates as `Γ/2π` in Hz.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitReport {
    pub method: String,
    pub residual_rms: f64,
    pub iterations: usize,
    pub linewidth_consistent: bool,
    pub gamma_1d_hz: EstimateRecord,
    pub gamma_tot_hz: EstimateRecord,
    pub f0_hz: EstimateRecord,
    pub phi_fano_rad: EstimateRecord,
    /// Row-major, in the order of the four estimates above.
    pub covariance: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub background: Option<BackgroundRecord>,
}

const TAU: f64 = std::f64::consts::TAU;

impl FitReport {
    pub fn from_result(r: &FitResult) -> Self {
        let scale = [1.0 / TAU, 1.0 / TAU, 1.0, 1.0];
        let est = |e: &Estimate, s: f64| EstimateRecord {
            value: e.value * s,
            sigma: e.sigma * s,
        };
        FitReport {
            method: match r.method {
                FitMethod::Fano => "fano",
                FitMethod::Circle => "circle",
            }
            .to_string(),
            residual_rms: r.residual_rms,
            iterations: r.iterations,
            linewidth_consistent: r.linewidth_consistent(),
            gamma_1d_hz: est(&r.gamma_1d, scale[0]),
            gamma_tot_hz: est(&r.gamma_tot, scale[1]),
            f0_hz: est(&r.f0, 1.0),
            phi_fano_rad: est(&r.phi_fano, 1.0),
            covariance: (0..4)
                .map(|i| (0..4).map(|j| r.covariance[i][j] * scale[i] * scale[j]).collect())
                .collect(),
            background: r.background.map(|b| BackgroundRecord {
                a_re: b.a.re,
                a_im: b.a.im,
                slope_re_per_hz: b.slope_per_hz.re,
                slope_im_per_hz: b.slope_per_hz.im,
                f_ref_hz: b.f_ref,
            }),
        }
    }

    pub fn to_result(&self) -> Result<FitResult, String> {
        let method = match self.method.as_str() {
            "fano" => FitMethod::Fano,
            "circle" => FitMethod::Circle,
            other => return Err(format!("unknown fit method `{other}`")),
        };
        if self.covariance.len() != 4 || self.covariance.iter().any(|r| r.len() != 4) {
            return Err("covariance must be 4x4".into());
        }
        let scale = [TAU, TAU, 1.0, 1.0];
        let mut cov = [[0.0; 4]; 4];
        for (i, row) in cov.iter_mut().enumerate() {
            for (j, c) in row.iter_mut().enumerate() {
                *c = self.covariance[i][j] * scale[i] * scale[j];
            }
        }
        let est = |e: &EstimateRecord, s: f64| Estimate::new(e.value * s, e.sigma * s);
        Ok(FitResult {
            gamma_1d: est(&self.gamma_1d_hz, TAU),
            gamma_tot: est(&self.gamma_tot_hz, TAU),
            f0: est(&self.f0_hz, 1.0),
            phi_fano: est(&self.phi_fano_rad, 1.0),
            residual_rms: self.residual_rms,
            covariance: cov,
            background: self.background.map(|b| Background {
                a: C64::new(b.a_re, b.a_im),
                slope_per_hz: C64::new(b.slope_re_per_hz, b.slope_im_per_hz),
                f_ref: b.f_ref_hz,
            }),
            iterations: self.iterations,
            method,
        })
    }
}

pub fn write_toml<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let text = toml::to_string_pretty(value).map_err(|e| CliError::io(path, e))?;
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

pub fn read_toml<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    toml::from_str(&text).map_err(|e| CliError::Format {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use chiral_qed::fit::fano_model;
    use chiral_qed::fit::fit_fano;
    use chiral_qed::spectrum::linspace;

    #[test]
    fn number_format_round_trips() {
        for x in [
            0.0,
            -0.0,
            1.0,
            0.1,
            1e-20,
            -3.3e-7,
            6.441e9,
            1e300,
            f64::MIN_POSITIVE,
            123456.789,
        ] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap().to_bits(), x.to_bits(), "{x}");
        }
    }

    #[test]
    fn trace_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.csv");
        let tr = SpectrumTrace::from_fn(linspace(6.4e9, 6.5e9, 101), |f| {
            fano_model(TAU * 2e6, TAU * 3e6, 6.45e9, 0.3, f) * C64::new(0.9, 0.1)
        })
        .unwrap();
        write_trace(&p, &tr).unwrap();
        assert_eq!(read_trace(&p).unwrap(), tr);
        let text = std::fs::read_to_string(&p).unwrap();
        assert!(text.starts_with("freq_hz,re_t,im_t,abs_t,arg_t_rad\n"));
    }

    #[test]
    fn psd_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("p.csv");
        let f = linspace(1.0, 2.0, 11);
        let s: Vec<f64> = f.iter().map(|x| 1e-30 * x.sin()).collect();
        write_psd(&p, &f, &s).unwrap();
        assert_eq!(read_psd(&p).unwrap(), (f, s));
    }

    #[test]
    fn wrong_header_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.csv");
        std::fs::write(&p, "f,re,im\n1,2,3\n").unwrap();
        assert!(matches!(read_trace(&p), Err(CliError::Format { .. })));
    }

    #[test]
    fn report_round_trip() {
        let tr = SpectrumTrace::from_fn(linspace(6.4e9, 6.5e9, 401), |f| {
            fano_model(TAU * 2e6, TAU * 3e6, 6.45e9, 0.3, f)
        })
        .unwrap();
        let noisy = crate::noise::synthesize_noisy(&tr, 0.01, 2);
        let r = fit_fano(&noisy, None).unwrap();
        let rep = FitReport::from_result(&r);
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("r.toml");
        write_toml(&p, &rep).unwrap();
        let back: FitReport = read_toml(&p).unwrap();
        assert_eq!(back, rep);
        let r2 = back.to_result().unwrap();
        assert!((r2.gamma_1d.value - r.gamma_1d.value).abs() <= 1e-15 * r.gamma_1d.value);
        assert!((r2.covariance[0][1] - r.covariance[0][1]).abs() <= 1e-12 * r.covariance[0][1].abs());
    }
}
