use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use chiral_qed_cli::config::{FitMethodChoice, PhaseSource, Scenario};
use chiral_qed_cli::io::{read_trace, write_toml, FitReport};
use chiral_qed_cli::runner::{bound_report, fit_trace, out_dir_from_env, run_file};
use chiral_qed_cli::CliError;

/// Chiral waveguide-QED scenarios, fits and bounds.
///
/// Artifacts go to $CHIRALQED_OUT_DIR (default ./chiralqed-out).
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a scenario file.
    Run { config: PathBuf },
    /// Fit a trace CSV (Fano fit unless --circle alone is given).
    Fit {
        trace: PathBuf,
        #[arg(long)]
        fano: bool,
        #[arg(long)]
        circle: bool,
        /// Add a complex affine background to the Fano model.
        #[arg(long)]
        background: bool,
    },
    /// Directionality limit from drive-phase noise.
    Bound {
        /// Phase variance in rad².
        #[arg(long = "phase-var")]
        phase_var: f64,
        /// The variance is that of the relative phase.
        #[arg(long)]
        relative: bool,
    },
    /// Check a scenario file without running it.
    Validate { config: PathBuf },
}

fn run(cli: Cli) -> Result<(), CliError> {
    let out_dir = out_dir_from_env();
    match cli.cmd {
        Cmd::Run { config } => {
            let (out, manifest) = run_file(&config, &out_dir)?;
            for f in out.files.iter().chain(std::iter::once(&manifest)) {
                println!("{}", f.display());
            }
            for n in &out.notes {
                eprintln!("note: {n}");
            }
        }
        Cmd::Fit {
            trace,
            fano,
            circle,
            background,
        } => {
            let method = match (fano, circle) {
                (_, false) => FitMethodChoice::Fano,
                (false, true) => FitMethodChoice::Circle,
                (true, true) => FitMethodChoice::Both,
            };
            let tr = read_trace(&trace)?;
            std::fs::create_dir_all(&out_dir).map_err(|e| CliError::io(&out_dir, e))?;
            let stem = trace
                .file_stem()
                .map_or_else(|| "trace".into(), |s| s.to_string_lossy().into_owned());
            for r in fit_trace(&tr, method, background)? {
                let rep = FitReport::from_result(&r);
                let p = out_dir.join(format!("{stem}_{}.toml", rep.method));
                write_toml(&p, &rep)?;
                print!("{}", toml::to_string_pretty(&rep).expect("report serialises"));
                eprintln!("wrote {}", p.display());
            }
        }
        Cmd::Bound { phase_var, relative } => {
            let src = if relative {
                PhaseSource::Relative
            } else {
                PhaseSource::Single
            };
            let rep = bound_report(phase_var, src)?;
            println!("eta_d <= {:.6e}", rep.eta_d_phase_bound);
        }
        Cmd::Validate { config } => {
            let (s, _) = Scenario::load(&config)?;
            println!("ok: {} scenario `{}`", s.kind.as_str(), s.stem());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
