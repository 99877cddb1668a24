use std::path::{Path, PathBuf};

use bubble_bands::lattice::LatticeOptions;
use bubble_bands::operator::{DiskCrystal, MaterialParams};
use bubble_bands::spectra::SpectraOptions;
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Largest truncation order accepted from a config file.
pub const MAX_TRUNCATION: usize = 12;

fn default_band_count() -> usize {
    2
}

/// One experiment, as read from JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub radius: f64,
    pub rho: f64,
    pub kappa: f64,
    pub rho_b: f64,
    pub kappa_b: f64,
    #[serde(rename = "truncation_N")]
    pub truncation: usize,
    pub path_resolution: usize,
    pub omega_max: f64,
    pub scan_step: f64,
    pub lattice_tol: f64,
    pub spectral_cutoff: usize,
    pub output_path: PathBuf,
    /// Bands per path sample for `bands`.
    #[serde(default = "default_band_count")]
    pub band_count: usize,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        let config: Self =
            serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let reals = [
            ("radius", self.radius),
            ("rho", self.rho),
            ("kappa", self.kappa),
            ("rho_b", self.rho_b),
            ("kappa_b", self.kappa_b),
            ("omega_max", self.omega_max),
            ("scan_step", self.scan_step),
            ("lattice_tol", self.lattice_tol),
        ];
        for (name, v) in reals {
            if !(v > 0.0 && v.is_finite()) {
                return Err(CliError::Usage(format!("{name} must be positive, got {v}")));
            }
        }
        let bad = |msg: String| Err(CliError::Usage(msg));
        if self.radius >= 0.5 {
            return bad(format!("radius {} must be below 0.5", self.radius));
        }
        if self.truncation == 0 || self.truncation > MAX_TRUNCATION {
            return bad(format!("truncation_N must lie in 1..={MAX_TRUNCATION}, got {}", self.truncation));
        }
        if self.path_resolution < 3 {
            return bad(format!("path_resolution must be at least 3, got {}", self.path_resolution));
        }
        if self.spectral_cutoff == 0 {
            return bad("spectral_cutoff must be positive".into());
        }
        if !(1..=5).contains(&self.band_count) {
            return bad(format!("band_count must lie in 1..=5, got {}", self.band_count));
        }
        Ok(())
    }

    pub fn material(&self) -> Result<MaterialParams, CliError> {
        MaterialParams::new(self.rho, self.kappa, self.rho_b, self.kappa_b).map_err(|e| CliError::Usage(e.to_string()))
    }

    /// Outer medium scaled so that `ρ/ρ_b = κ/κ_b = contrast`.
    pub fn material_with_contrast(&self, contrast: f64) -> Result<MaterialParams, CliError> {
        MaterialParams::with_contrast(contrast, self.rho_b, self.kappa_b).map_err(|e| CliError::Usage(e.to_string()))
    }

    pub fn crystal(&self) -> Result<DiskCrystal, CliError> {
        self.crystal_with_radius(self.radius)
    }

    pub fn crystal_with_radius(&self, radius: f64) -> Result<DiskCrystal, CliError> {
        DiskCrystal::new(radius).map_err(|e| CliError::Usage(e.to_string()))
    }

    pub fn spectra_options(&self) -> SpectraOptions {
        SpectraOptions {
            scan_step: self.scan_step,
            lattice: LatticeOptions::with_tol(self.lattice_tol),
            ..SpectraOptions::default()
        }
    }
}
