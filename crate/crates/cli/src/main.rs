use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bubble_bands::BlochVector;
use bubble_bands_cli::run::{self, DEFAULT_CONTRASTS, DEFAULT_DILUTE_CONTRAST, DEFAULT_RADII};
use bubble_bands_cli::{CliError, RunConfig};
use clap::{Args, Parser, Subcommand};

const SCHEMAS: &str = "\
Output schemas (UTF-8, LF, numbers as %.15e):
  bands     s,alpha_x,alpha_y,band,omega
            footer: # omega_star=  # argmax_alpha=  # gap_lo=  # gap_hi=  (none if no gap)
  compare   contrast,delta,omega_exact,omega_approx,rel_error
            failed cells are left empty and explained under a `# warnings` footer
  dilute    radius,omega_star,omega_M,ratio
            footer: # radius= argmax_alpha=  per row
  capacity  plain-text report on stdout

Exit codes: 0 success, 1 computation failure, 2 usage error.";

/// Subwavelength band structures of a square lattice of air bubbles.
#[derive(Debug, Parser)]
#[command(name = "bubble-bands", version, after_help = SCHEMAS)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output file; overrides `output_path` from the config.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Worker threads for the path sweep (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Band diagram along Γ→X→M→Γ.
    Bands {
        #[command(flatten)]
        common: Common,
    },
    /// Lowest band at alpha against the capacity approximation, per contrast.
    Compare {
        #[command(flatten)]
        common: Common,
        /// Contrasts ρ/ρ_b = κ/κ_b.
        #[arg(long, value_parser = run::parse_list, default_value = "100,300,1000,3000")]
        contrasts: Vec<f64>,
        /// Bloch vector `ax,ay` (default M = π,π).
        #[arg(long, value_parser = run::parse_alpha, allow_hyphen_values = true)]
        alpha: Option<BlochVector>,
    },
    /// Top of the first band against the Minnaert frequency, per radius.
    Dilute {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_parser = run::parse_list, default_value = "0.25,0.1,0.05")]
        radii: Vec<f64>,
        /// Fixed contrast 1/δ.
        #[arg(long, default_value_t = DEFAULT_DILUTE_CONTRAST)]
        contrast: f64,
    },
    /// Free and quasi-periodic capacities with their Minnaert frequencies.
    Capacity {
        #[arg(long)]
        config: PathBuf,
        /// Nonzero Bloch vector `ax,ay` (default M = π,π).
        #[arg(long, value_parser = run::parse_alpha, allow_hyphen_values = true)]
        alpha: Option<BlochVector>,
    },
}

fn setup(common: &Common) -> Result<(RunConfig, PathBuf), CliError> {
    let config = RunConfig::load(&common.config)?;
    if let Some(threads) = common.threads {
        if threads == 0 {
            return Err(CliError::Usage("--threads must be positive".into()));
        }
        #[cfg(feature = "parallel")]
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    let output = common.output.clone().unwrap_or_else(|| config.output_path.clone());
    Ok((config, output))
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Io(path.to_path_buf(), e))
}

fn flatten(values: Vec<f64>, default: &[f64]) -> Vec<f64> {
    if values.is_empty() {
        default.to_vec()
    } else {
        values
    }
}

fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Bands { common } => {
            let (config, output) = setup(&common)?;
            let bs = run::run_bands(&config)?;
            write(&output, &run::bands_csv(&bs))?;
            run::check_bands(&bs)
        }
        Command::Compare { common, contrasts, alpha } => {
            let (config, output) = setup(&common)?;
            let alpha = alpha.unwrap_or_else(BlochVector::m_point);
            let rows = run::run_compare(&config, &flatten(contrasts, &DEFAULT_CONTRASTS), &alpha)?;
            write(&output, &run::compare_csv(&rows))
        }
        Command::Dilute { common, radii, contrast } => {
            let (config, output) = setup(&common)?;
            let rows = run::run_dilute(&config, &flatten(radii, &DEFAULT_RADII), contrast)?;
            write(&output, &run::dilute_csv(&rows))
        }
        Command::Capacity { config, alpha } => {
            let alpha = alpha.unwrap_or_else(BlochVector::m_point);
            if alpha.is_zero() {
                return Err(CliError::Usage("capacity needs a nonzero alpha".into()));
            }
            let config = RunConfig::load(&config)?;
            let report = run::run_capacity(&config, &alpha)?;
            print!("{}", run::capacity_text(&report));
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("bubble-bands: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
