//! Scenario files: TOML with unit-suffixed keys. Unknown keys are rejected.
//!
//! Rates and frequencies are ordinary frequencies (`Γ/2π`) in the unit named
//! by the suffix; phases are in degrees.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    SweepWeak,
    SweepStrong,
    Mollow,
    Rabi,
    Cmt,
    TwoTone,
    Fit,
    Bound,
    Budget,
}

impl Kind {
    pub fn as_str(&self) -> &'static str {
        match self {
            Kind::SweepWeak => "sweep-weak",
            Kind::SweepStrong => "sweep-strong",
            Kind::Mollow => "mollow",
            Kind::Rabi => "rabi",
            Kind::Cmt => "cmt",
            Kind::TwoTone => "two-tone",
            Kind::Fit => "fit",
            Kind::Bound => "bound",
            Kind::Budget => "budget",
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub kind: Kind,
    /// Stem of the output files; defaults to the kind.
    pub name: Option<String>,
    pub seed: Option<u64>,
    #[serde(default)]
    pub device: Device,
    pub grid: Option<Grid>,
    pub drive: Option<Drive>,
    pub noise: Option<Noise>,
    pub cmt: Option<CmtSection>,
    pub three_level: Option<ThreeLevelSection>,
    pub fit: Option<FitSection>,
    pub bound: Option<BoundSection>,
    pub budget: Option<BudgetSection>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Device {
    pub kappa_em_mhz: f64,
    pub phi_c_deg: f64,
    /// Either this or `separation_mm` with `eps_eff`.
    pub phi_wg_deg: Option<f64>,
    pub separation_mm: Option<f64>,
    pub eps_eff: Option<f64>,
    pub gamma_prime_mhz: f64,
    pub gamma_phi_mhz: f64,
    pub f_ge_ghz: f64,
}

impl Default for Device {
    fn default() -> Self {
        Self {
            kappa_em_mhz: 0.5,
            phi_c_deg: 90.0,
            phi_wg_deg: Some(90.0),
            separation_mm: None,
            eps_eff: None,
            gamma_prime_mhz: 0.0,
            gamma_phi_mhz: 0.0,
            f_ge_ghz: 6.441,
        }
    }
}

/// Sweep grid. Exactly one unit for `start` and the same unit for `stop`.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub start_hz: Option<f64>,
    pub start_khz: Option<f64>,
    pub start_mhz: Option<f64>,
    pub start_ghz: Option<f64>,
    pub start_ns: Option<f64>,
    pub start_us: Option<f64>,
    pub stop_hz: Option<f64>,
    pub stop_khz: Option<f64>,
    pub stop_mhz: Option<f64>,
    pub stop_ghz: Option<f64>,
    pub stop_ns: Option<f64>,
    pub stop_us: Option<f64>,
    pub points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridAxis {
    Frequency,
    Time,
}

impl Grid {
    /// `(start, stop, points)` in Hz or seconds.
    pub fn resolve(&self, axis: GridAxis) -> Result<(f64, f64, usize), CliError> {
        let pick = |name: &str, vals: [(Option<f64>, f64, GridAxis); 6]| -> Result<f64, CliError> {
            let set: Vec<_> = vals.iter().filter(|v| v.0.is_some()).collect();
            match set.as_slice() {
                [one] if one.2 == axis => Ok(one.0.unwrap() * one.1),
                [_] => Err(CliError::config(
                    format!("grid.{name}"),
                    "unit does not match this scenario's axis",
                )),
                [] => Err(CliError::config(
                    format!("grid.{name}"),
                    "missing (give it with a unit suffix, e.g. _mhz)",
                )),
                _ => Err(CliError::config(format!("grid.{name}"), "given in more than one unit")),
            }
        };
        use GridAxis::*;
        let start = pick(
            "start",
            [
                (self.start_hz, 1.0, Frequency),
                (self.start_khz, 1e3, Frequency),
                (self.start_mhz, 1e6, Frequency),
                (self.start_ghz, 1e9, Frequency),
                (self.start_ns, 1e-9, Time),
                (self.start_us, 1e-6, Time),
            ],
        )?;
        let stop = pick(
            "stop",
            [
                (self.stop_hz, 1.0, Frequency),
                (self.stop_khz, 1e3, Frequency),
                (self.stop_mhz, 1e6, Frequency),
                (self.stop_ghz, 1e9, Frequency),
                (self.stop_ns, 1e-9, Time),
                (self.stop_us, 1e-6, Time),
            ],
        )?;
        if self.points < 2 {
            return Err(CliError::config("grid.points", "need at least 2 points"));
        }
        if !(stop > start) {
            return Err(CliError::config("grid.stop", "must exceed grid.start"));
        }
        Ok((start, stop, self.points))
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Drive {
    /// Either the Rabi frequency or the input power.
    pub rabi_mhz: Option<f64>,
    pub power_fw: Option<f64>,
    #[serde(default)]
    pub detuning_mhz: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Noise {
    /// Complex Gaussian σ per point (`E|n|² = σ²`), dimensionless.
    pub sigma: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CmtSection {
    pub f_e_ghz: f64,
    pub f_c_ghz: f64,
    pub f_r_ghz: f64,
    pub g_ec_mhz: f64,
    pub g_cr_mhz: f64,
    pub kappa_e_mhz: f64,
    pub kappa_i_mhz: f64,
    #[serde(default)]
    pub gamma_e_mhz: f64,
    #[serde(default)]
    pub gamma_c_mhz: f64,
    pub epsilon_mhz: f64,
    pub delta_mhz: f64,
    #[serde(default = "default_truncation")]
    pub truncation: usize,
    /// Raise the truncation until successive orders agree to 1e-3.
    #[serde(default)]
    pub auto_truncation: bool,
    #[serde(default)]
    pub convention: CmtConvention,
}

fn default_truncation() -> usize {
    2
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CmtConvention {
    #[default]
    Printed,
    Derived,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThreeLevelSection {
    pub gamma_f_ef_mhz: f64,
    pub gamma_b_ef_mhz: f64,
    pub anharmonicity_mhz: f64,
    #[serde(default)]
    pub gamma_phi_ef_mhz: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitMethodChoice {
    #[default]
    Fano,
    Circle,
    Both,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitSection {
    /// Trace CSV to fit, relative to the scenario file. Without it the trace
    /// is synthesised from `device` and `grid`.
    pub trace: Option<PathBuf>,
    #[serde(default)]
    pub method: FitMethodChoice,
    #[serde(default)]
    pub background: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PhaseSource {
    #[default]
    Single,
    Relative,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundSection {
    pub phase_var_rad2: Option<f64>,
    pub phase_var_deg2: Option<f64>,
    #[serde(default)]
    pub source: PhaseSource,
    pub gamma_f_mhz: Option<f64>,
    pub sigma_f_mhz: Option<f64>,
    pub gamma_b_mhz: Option<f64>,
    pub sigma_b_mhz: Option<f64>,
    #[serde(default = "default_level")]
    pub level: f64,
}

fn default_level() -> f64 {
    0.95
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BudgetSection {
    pub temperature_mk: f64,
    pub gamma_prime0_khz: f64,
    #[serde(default)]
    pub hybridization_khz: f64,
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let s: Scenario = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        s.validate()?;
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<(Self, String), CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Ok((Self::parse(&text)?, text))
    }

    pub fn stem(&self) -> String {
        self.name.clone().unwrap_or_else(|| self.kind.as_str().to_string())
    }

    fn require<'a, T>(&self, v: &'a Option<T>, field: &str) -> Result<&'a T, CliError> {
        v.as_ref()
            .ok_or_else(|| CliError::config(field, format!("required for kind = \"{}\"", self.kind.as_str())))
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if let Some(name) = &self.name {
            if name.is_empty() || name.contains(['/', '\\']) {
                return Err(CliError::config("name", "must be a plain file stem"));
            }
        }
        if let Some(n) = &self.noise {
            if !(n.sigma >= 0.0) {
                return Err(CliError::config("noise.sigma", "must be non-negative"));
            }
            if self.seed.is_none() {
                return Err(CliError::config("seed", "required when noise is present"));
            }
        }
        let d = &self.device;
        match (d.phi_wg_deg, d.separation_mm) {
            (Some(_), None) => {}
            (None, Some(_)) if d.eps_eff.is_some() => {}
            (None, Some(_)) => return Err(CliError::config("device.eps_eff", "required with separation_mm")),
            (Some(_), Some(_)) => {
                return Err(CliError::config(
                    "device.phi_wg_deg",
                    "give either phi_wg_deg or separation_mm",
                ))
            }
            (None, None) => return Err(CliError::config("device.phi_wg_deg", "missing")),
        }
        use GridAxis::*;
        match self.kind {
            Kind::SweepWeak | Kind::SweepStrong | Kind::Mollow | Kind::TwoTone | Kind::Cmt | Kind::Budget => {
                self.require(&self.grid, "grid")?.resolve(Frequency)?;
            }
            Kind::Rabi => {
                self.require(&self.grid, "grid")?.resolve(Time)?;
            }
            Kind::Fit => {
                let f = self.fit.clone().unwrap_or_default();
                if f.trace.is_none() {
                    self.require(&self.grid, "grid")?.resolve(Frequency)?;
                }
            }
            Kind::Bound => {}
        }
        match self.kind {
            Kind::SweepStrong | Kind::Mollow | Kind::Rabi | Kind::TwoTone => {
                let dr = self.require(&self.drive, "drive")?;
                if dr.rabi_mhz.is_some() == dr.power_fw.is_some() {
                    return Err(CliError::config("drive", "give exactly one of rabi_mhz and power_fw"));
                }
            }
            _ => {}
        }
        match self.kind {
            Kind::Cmt => {
                self.require(&self.cmt, "cmt")?;
            }
            Kind::TwoTone => {
                self.require(&self.three_level, "three_level")?;
            }
            Kind::Bound => {
                let b = self.require(&self.bound, "bound")?;
                if b.phase_var_rad2.is_some() == b.phase_var_deg2.is_some() {
                    return Err(CliError::config(
                        "bound.phase_var_rad2",
                        "give exactly one of phase_var_rad2 and phase_var_deg2",
                    ));
                }
                let ratio = [b.gamma_f_mhz, b.sigma_f_mhz, b.gamma_b_mhz, b.sigma_b_mhz];
                let n = ratio.iter().filter(|x| x.is_some()).count();
                if n != 0 && n != 4 {
                    return Err(CliError::config(
                        "bound.gamma_f_mhz",
                        "the ratio interval needs gamma_f_mhz, sigma_f_mhz, gamma_b_mhz and sigma_b_mhz",
                    ));
                }
                if !(b.level > 0.0 && b.level < 1.0) {
                    return Err(CliError::config("bound.level", "must lie in (0, 1)"));
                }
            }
            Kind::Budget => {
                self.require(&self.budget, "budget")?;
            }
            _ => {}
        }
        Ok(())
    }
}
