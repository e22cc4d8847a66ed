//! Dispatches a scenario to the simulation and fitting code and writes its
//! artifacts.

use std::path::{Path, PathBuf};
use std::time::Instant;

use chiral_qed::cmt::{cmt_transmission, converged_truncation, CouplingConvention, SidebandModel};
use chiral_qed::coupling::{decay_rates, propagation_phase, AtomRates, ChiralCoupling, ThermalBath, WaveguideGeometry};
use chiral_qed::dynamics::{
    mollow_psd, rabi_from_power, rabi_trace, transmission_strong, two_tone_trace, DriveSpec, MollowParams,
    ThreeLevelPorts,
};
use chiral_qed::fit::{
    circle_fit, directionality_ci, fit_fano_with, phase_noise_bound, DirectionalityBound, Estimate, FitMethod,
    FitOptions, FitResult, PhaseNoiseSource,
};
use chiral_qed::slh::weak_transmission;
use chiral_qed::spectrum::{linspace, SpectrumTrace};
use chiral_qed::thermal::{beta_factor, purcell_factor, thermal_gamma_prime, DecoherenceBudget};
use chiral_qed::units::{deg, from_khz, from_mhz, hz};
use chiral_qed::C64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::{CmtConvention, Device, FitMethodChoice, GridAxis, Kind, PhaseSource, Scenario};
use crate::error::CliError;
use crate::io::{write_psd, write_table, write_toml, write_trace, FitReport, BUDGET_HEADER, RABI_HEADER};
use crate::noise::synthesize_noisy;

pub const OUT_DIR_ENV: &str = "CHIRALQED_OUT_DIR";

/// Output directory from the environment, `chiralqed-out` otherwise.
pub fn out_dir_from_env() -> PathBuf {
    std::env::var_os(OUT_DIR_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("chiralqed-out"))
}

#[derive(Debug, Clone, Default)]
pub struct RunOutput {
    pub files: Vec<PathBuf>,
    pub notes: Vec<String>,
}

pub fn coupling(d: &Device) -> Result<ChiralCoupling, CliError> {
    let phi_wg = match (d.phi_wg_deg, d.separation_mm, d.eps_eff) {
        (Some(p), _, _) => deg(p),
        (None, Some(sep), Some(eps)) => propagation_phase(&WaveguideGeometry::new(sep * 1e-3, d.f_ge_ghz * 1e9, eps)?),
        _ => return Err(CliError::config("device.phi_wg_deg", "missing")),
    };
    Ok(ChiralCoupling::new(from_mhz(d.kappa_em_mhz), deg(d.phi_c_deg), phi_wg)?)
}

pub fn rates(d: &Device, c: &ChiralCoupling) -> Result<AtomRates, CliError> {
    let (f, b) = decay_rates(c);
    Ok(AtomRates::new(
        f,
        b,
        from_mhz(d.gamma_prime_mhz),
        from_mhz(d.gamma_phi_mhz),
    )?)
}

fn frequency_grid(s: &Scenario) -> Result<Vec<f64>, CliError> {
    let g = s.grid.as_ref().ok_or_else(|| CliError::config("grid", "missing"))?;
    let (a, b, n) = g.resolve(GridAxis::Frequency)?;
    Ok(linspace(a, b, n))
}

fn rabi_rate(s: &Scenario, gamma_f: f64) -> Result<f64, CliError> {
    let d = s.drive.as_ref().ok_or_else(|| CliError::config("drive", "missing"))?;
    match (d.rabi_mhz, d.power_fw) {
        (Some(r), None) => Ok(from_mhz(r)),
        (None, Some(p)) => Ok(rabi_from_power(p * 1e-15, gamma_f, from_mhz(s.device.f_ge_ghz * 1e3))?),
        _ => Err(CliError::config("drive", "give exactly one of rabi_mhz and power_fw")),
    }
}

fn resonant_only(s: &Scenario) -> Result<(), CliError> {
    match &s.drive {
        Some(d) if d.detuning_mhz != 0.0 => Err(CliError::config(
            "drive.detuning_mhz",
            format!("must be 0 for kind = \"{}\"", s.kind.as_str()),
        )),
        _ => Ok(()),
    }
}

fn maybe_noisy(s: &Scenario, trace: SpectrumTrace) -> SpectrumTrace {
    match (&s.noise, s.seed) {
        (Some(n), Some(seed)) => synthesize_noisy(&trace, n.sigma, seed),
        _ => trace,
    }
}

fn weak_trace(s: &Scenario) -> Result<SpectrumTrace, CliError> {
    let c = coupling(&s.device)?;
    let r = rates(&s.device, &c)?;
    let f_ge = s.device.f_ge_ghz * 1e9;
    let offsets = frequency_grid(s)?;
    let t = offsets
        .iter()
        .map(|&off| weak_transmission(&c, &r, -from_mhz(off * 1e-6)))
        .collect::<Result<Vec<C64>, _>>()?;
    Ok(SpectrumTrace::new(offsets.iter().map(|o| f_ge + o).collect(), t)?)
}

fn cmt_model(s: &Scenario) -> Result<SidebandModel, CliError> {
    let c = s.cmt.as_ref().ok_or_else(|| CliError::config("cmt", "missing"))?;
    let mut m = SidebandModel::new(
        from_mhz(c.f_e_ghz * 1e3),
        from_mhz(c.f_c_ghz * 1e3),
        from_mhz(c.f_r_ghz * 1e3),
        from_mhz(c.g_ec_mhz),
        from_mhz(c.g_cr_mhz),
        from_mhz(c.kappa_e_mhz),
        from_mhz(c.kappa_e_mhz + c.kappa_i_mhz),
    )?;
    m.gamma_e = from_mhz(c.gamma_e_mhz);
    m.gamma_c = from_mhz(c.gamma_c_mhz);
    m.epsilon = from_mhz(c.epsilon_mhz);
    m.delta_mod = from_mhz(c.delta_mhz);
    m.n_trunc = c.truncation;
    m.convention = match c.convention {
        CmtConvention::Printed => CouplingConvention::Printed,
        CmtConvention::Derived => CouplingConvention::Derived,
    };
    m.validate()?;
    Ok(m)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioRecord {
    pub eta_d: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub level: f64,
    pub one_sided: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub phase_variance_rad2: f64,
    pub source: String,
    pub eta_d_phase_bound: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ratio: Option<RatioRecord>,
}

impl From<DirectionalityBound> for RatioRecord {
    fn from(b: DirectionalityBound) -> Self {
        RatioRecord {
            eta_d: b.eta_d,
            ci_low: b.ci_low,
            ci_high: b.ci_high,
            level: b.level,
            one_sided: b.is_one_sided(),
        }
    }
}

fn estimate_only(value: f64, sigma: f64) -> FitResult {
    FitResult {
        gamma_1d: Estimate::new(value, sigma),
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

pub fn bound_report(variance: f64, source: PhaseSource) -> Result<BoundReport, CliError> {
    let (src, name) = match source {
        PhaseSource::Single => (PhaseNoiseSource::SingleSource, "single"),
        PhaseSource::Relative => (PhaseNoiseSource::Relative, "relative"),
    };
    Ok(BoundReport {
        phase_variance_rad2: variance,
        source: name.to_string(),
        eta_d_phase_bound: phase_noise_bound(variance, src)?,
        ratio: None,
    })
}

/// Fits a trace with the requested methods.
pub fn fit_trace(trace: &SpectrumTrace, method: FitMethodChoice, background: bool) -> Result<Vec<FitResult>, CliError> {
    let opts = FitOptions {
        background,
        ..FitOptions::default()
    };
    let mut out = Vec::new();
    if matches!(method, FitMethodChoice::Fano | FitMethodChoice::Both) {
        out.push(fit_fano_with(trace, None, &opts)?);
    }
    if matches!(method, FitMethodChoice::Circle | FitMethodChoice::Both) {
        out.push(circle_fit(trace)?);
    }
    Ok(out)
}

/// Runs one scenario, writing its artifacts (but not the manifest) into
/// `out_dir`. Relative paths in the scenario resolve against `base_dir`.
pub fn run_scenario(s: &Scenario, base_dir: &Path, out_dir: &Path) -> Result<RunOutput, CliError> {
    s.validate()?;
    std::fs::create_dir_all(out_dir).map_err(|e| CliError::io(out_dir, e))?;
    let stem = s.stem();
    let path = |suffix: &str| out_dir.join(format!("{stem}{suffix}"));
    let mut out = RunOutput::default();

    match s.kind {
        Kind::SweepWeak => {
            let tr = maybe_noisy(s, weak_trace(s)?);
            let p = path(".csv");
            write_trace(&p, &tr)?;
            out.files.push(p);
        }
        Kind::SweepStrong => {
            resonant_only(s)?;
            let c = coupling(&s.device)?;
            let r = rates(&s.device, &c)?;
            let omega = rabi_rate(s, r.gamma_f)?;
            let f_ge = s.device.f_ge_ghz * 1e9;
            let offsets = frequency_grid(s)?;
            let mut t = Vec::with_capacity(offsets.len());
            for &off in &offsets {
                let d = DriveSpec::new(omega, -from_mhz(off * 1e-6))?;
                t.push(transmission_strong(&d, r.gamma_f, r.gamma1(), r.gamma2()));
            }
            let tr = maybe_noisy(s, SpectrumTrace::new(offsets.iter().map(|o| f_ge + o).collect(), t)?);
            let p = path(".csv");
            write_trace(&p, &tr)?;
            out.files.push(p);
        }
        Kind::Mollow => {
            resonant_only(s)?;
            let c = coupling(&s.device)?;
            let r = rates(&s.device, &c)?;
            let omega = rabi_rate(s, r.gamma_f)?;
            let f_ge = s.device.f_ge_ghz * 1e9;
            let m = MollowParams::new(r.gamma1(), r.gamma2(), from_mhz(f_ge * 1e-6))?;
            let offsets = frequency_grid(s)?;
            let dw: Vec<f64> = offsets.iter().map(|o| from_mhz(o * 1e-6)).collect();
            // per rad/s → per Hz
            let psd: Vec<f64> = mollow_psd(&m, r.gamma_f, omega, &dw)
                .into_iter()
                .map(|x| x * std::f64::consts::TAU)
                .collect();
            let freqs: Vec<f64> = offsets.iter().map(|o| f_ge + o).collect();
            let p = path("_psd.csv");
            write_psd(&p, &freqs, &psd)?;
            out.files.push(p);
        }
        Kind::Rabi => {
            resonant_only(s)?;
            let c = coupling(&s.device)?;
            let r = rates(&s.device, &c)?;
            let omega = rabi_rate(s, r.gamma_f)?;
            let g = s.grid.as_ref().ok_or_else(|| CliError::config("grid", "missing"))?;
            let (a, b, n) = g.resolve(GridAxis::Time)?;
            let tr = rabi_trace(&linspace(a, b, n), &DriveSpec::new(omega, 0.0)?, r.gamma1(), r.gamma2())?;
            let p = path("_rabi.csv");
            write_table(
                &p,
                &RABI_HEADER,
                (0..tr.tau.len()).map(|k| vec![tr.tau[k], tr.sx[k], tr.sz[k]]),
            )?;
            out.files.push(p);
        }
        Kind::Cmt => {
            let mut m = cmt_model(s)?;
            let freqs = frequency_grid(s)?;
            let omegas: Vec<f64> = freqs.iter().map(|f| from_mhz(f * 1e-6)).collect();
            if s.cmt.as_ref().is_some_and(|c| c.auto_truncation) {
                m.n_trunc = converged_truncation(&m, &omegas, 1e-3)?;
                out.notes.push(format!("truncation order {}", m.n_trunc));
            }
            let res = cmt_transmission(&m, &omegas)?;
            if !res.singular.is_empty() {
                out.notes
                    .push(format!("{} singular grid points written as NaN", res.singular.len()));
            }
            let (_, t, _) = res.trace.into_parts();
            let tr = maybe_noisy(s, SpectrumTrace::new(freqs, t)?);
            let p = path(".csv");
            write_trace(&p, &tr)?;
            out.files.push(p);
        }
        Kind::TwoTone => {
            let c = coupling(&s.device)?;
            let r = rates(&s.device, &c)?;
            let tl = s
                .three_level
                .as_ref()
                .ok_or_else(|| CliError::config("three_level", "missing"))?;
            let mut ports = ThreeLevelPorts::from_ef_rates(
                from_mhz(tl.gamma_f_ef_mhz),
                from_mhz(tl.gamma_b_ef_mhz),
                from_mhz(tl.anharmonicity_mhz),
                r,
            )?
            .with_phases(c.phi_c(), c.phi_wg());
            if let Some(g) = tl.gamma_phi_ef_mhz {
                ports = ports.with_ef_dephasing(from_mhz(g));
            }
            let omega = rabi_rate(s, r.gamma_f)?;
            let detuning = s.drive.as_ref().map_or(0.0, |d| d.detuning_mhz);
            let drive = DriveSpec::new(omega, from_mhz(detuning))?;
            let offsets = frequency_grid(s)?;
            let (_, t, _) = two_tone_trace(&ports, &drive, &offsets)?.into_parts();
            let f_ef = s.device.f_ge_ghz * 1e9 - tl.anharmonicity_mhz * 1e6;
            let tr = maybe_noisy(s, SpectrumTrace::new(offsets.iter().map(|o| f_ef + o).collect(), t)?);
            let p = path(".csv");
            write_trace(&p, &tr)?;
            out.files.push(p);
        }
        Kind::Fit => {
            let fs = s.fit.clone().unwrap_or_default();
            let trace = match &fs.trace {
                Some(rel) => crate::io::read_trace(&base_dir.join(rel))?,
                None => {
                    let tr = maybe_noisy(s, weak_trace(s)?);
                    let p = path("_data.csv");
                    write_trace(&p, &tr)?;
                    out.files.push(p);
                    tr
                }
            };
            for r in fit_trace(&trace, fs.method, fs.background)? {
                let rep = FitReport::from_result(&r);
                let p = path(&format!("_{}.toml", rep.method));
                write_toml(&p, &rep)?;
                out.files.push(p);
            }
        }
        Kind::Bound => {
            let b = s.bound.as_ref().ok_or_else(|| CliError::config("bound", "missing"))?;
            let v = match (b.phase_var_rad2, b.phase_var_deg2) {
                (Some(v), None) => v,
                (None, Some(v)) => v * deg(1.0).powi(2),
                _ => return Err(CliError::config("bound.phase_var_rad2", "give exactly one variance")),
            };
            let mut rep = bound_report(v, b.source)?;
            if let (Some(gf), Some(sf), Some(gb), Some(sb)) =
                (b.gamma_f_mhz, b.sigma_f_mhz, b.gamma_b_mhz, b.sigma_b_mhz)
            {
                let ci = directionality_ci(&estimate_only(gf, sf), &estimate_only(gb, sb), b.level);
                rep.ratio = Some(ci.into());
            }
            let p = path(".toml");
            write_toml(&p, &rep)?;
            out.files.push(p);
        }
        Kind::Budget => {
            let b = s.budget.as_ref().ok_or_else(|| CliError::config("budget", "missing"))?;
            let bath = ThermalBath::new(b.temperature_mk * 1e-3, s.device.f_ge_ghz * 1e9)?;
            let base =
                DecoherenceBudget::from_bath(from_khz(b.gamma_prime0_khz), &bath, 0.0, from_khz(b.hybridization_khz))?;
            let mut rows = Vec::new();
            for g in frequency_grid(s)? {
                if g < 0.0 {
                    return Err(CliError::config("grid.start", "coupling rates must be non-negative"));
                }
                let bud = base.with_gamma_1d(from_mhz(g * 1e-6))?;
                let r = bud.forward_rates();
                rows.push(vec![
                    g,
                    hz(thermal_gamma_prime(&bud)),
                    beta_factor(&r)?,
                    purcell_factor(&r),
                ]);
            }
            let p = path("_budget.csv");
            write_table(&p, &BUDGET_HEADER, rows)?;
            out.files.push(p);
        }
    }
    Ok(out)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputRecord {
    pub file: String,
    pub sha256: String,
}

/// Provenance of a run. The wall time makes it the one artifact that
/// differs between otherwise identical runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub kind: String,
    pub config_sha256: String,
    pub tool_version: String,
    pub wall_time_s: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub outputs: Vec<OutputRecord>,
    #[serde(default)]
    pub notes: Vec<String>,
}

/// Loads, runs and records a scenario file.
pub fn run_file(config: &Path, out_dir: &Path) -> Result<(RunOutput, PathBuf), CliError> {
    let started = Instant::now();
    let (s, text) = Scenario::load(config)?;
    let base = config.parent().unwrap_or(Path::new("."));
    let out = run_scenario(&s, base, out_dir)?;
    let mut outputs = Vec::new();
    for f in &out.files {
        let bytes = std::fs::read(f).map_err(|e| CliError::io(f, e))?;
        outputs.push(OutputRecord {
            file: f
                .file_name()
                .map_or_else(String::new, |n| n.to_string_lossy().into_owned()),
            sha256: sha256_hex(&bytes),
        });
    }
    let manifest = Manifest {
        kind: s.kind.as_str().to_string(),
        config_sha256: sha256_hex(text.as_bytes()),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        wall_time_s: started.elapsed().as_secs_f64(),
        seed: s.seed,
        outputs,
        notes: out.notes.clone(),
    };
    let mp = out_dir.join(format!("{}_manifest.toml", s.stem()));
    write_toml(&mp, &manifest)?;
    Ok((out, mp))
}
