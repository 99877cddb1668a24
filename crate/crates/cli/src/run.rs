//! The experiments behind each subcommand, and their CSV renderings.

use std::fmt::Write as _;

use bubble_bands::capacity::{approx_resonance, capacity_disk, capacity_quasi, minnaert_frequency};
use bubble_bands::spectra::{band_structure, find_bands, BandPoint, BandStructure};
use bubble_bands::BlochVector;

use crate::config::RunConfig;
use crate::CliError;

pub const BANDS_HEADER: &str = "s,alpha_x,alpha_y,band,omega";
pub const COMPARE_HEADER: &str = "contrast,delta,omega_exact,omega_approx,rel_error";
pub const DILUTE_HEADER: &str = "radius,omega_star,omega_M,ratio";

pub const DEFAULT_CONTRASTS: [f64; 4] = [100.0, 300.0, 1000.0, 3000.0];
pub const DEFAULT_RADII: [f64; 3] = [0.25, 0.1, 0.05];
pub const DEFAULT_DILUTE_CONTRAST: f64 = 1000.0;

/// The `dilute` sweep searches the first band up to this multiple of the
/// free-space Minnaert frequency.
pub const DILUTE_SEARCH_FACTOR: f64 = 3.0;

fn num(v: f64) -> String {
    format!("{v:.15e}")
}

fn opt_num(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

/// Parses `ax,ay`.
pub fn parse_alpha(text: &str) -> Result<BlochVector, String> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    let [x, y] = parts.as_slice() else {
        return Err(format!("expected `ax,ay`, got `{text}`"));
    };
    let x: f64 = x.parse().map_err(|e| format!("alpha_x `{x}`: {e}"))?;
    let y: f64 = y.parse().map_err(|e| format!("alpha_y `{y}`: {e}"))?;
    BlochVector::new(x, y).map_err(|e| e.to_string())
}

/// Parses a comma-separated list of positive numbers.
pub fn parse_list(text: &str) -> Result<Vec<f64>, String> {
    text.split(',')
        .map(|t| {
            let v: f64 = t.trim().parse().map_err(|e| format!("`{t}`: {e}"))?;
            if v > 0.0 && v.is_finite() {
                Ok(v)
            } else {
                Err(format!("`{t}` must be positive"))
            }
        })
        .collect()
}

fn nonzero(alpha: &BlochVector) -> Result<(), CliError> {
    if alpha.is_zero() {
        Err(CliError::Usage("alpha must be nonzero".into()))
    } else {
        Ok(())
    }
}

pub fn run_bands(config: &RunConfig) -> Result<BandStructure, CliError> {
    let (mat, crystal) = (config.material()?, config.crystal()?);
    Ok(band_structure(
        &mat,
        &crystal,
        config.truncation,
        config.path_resolution,
        config.band_count,
        config.omega_max,
        &config.spectra_options(),
    ))
}

pub fn first_failure(points: &[BandPoint]) -> Option<&BandPoint> {
    points.iter().find(|p| p.failure.is_some())
}

fn describe_failure(p: &BandPoint) -> String {
    let reason = p.failure.as_ref().map(ToString::to_string).unwrap_or_default();
    format!("path point s={:.6} alpha=({:.6}, {:.6}): {reason}", p.s, p.alpha.x(), p.alpha.y())
}

pub fn bands_csv(bs: &BandStructure) -> String {
    let mut out = String::new();
    writeln!(out, "{BANDS_HEADER}").unwrap();
    for p in &bs.points {
        for (band, &omega) in p.omegas.iter().enumerate() {
            let row = [num(p.s), num(p.alpha.x()), num(p.alpha.y()), (band + 1).to_string(), num(omega)];
            writeln!(out, "{}", row.join(",")).unwrap();
        }
    }
    writeln!(out, "# omega_star={}", num(bs.omega_star)).unwrap();
    writeln!(out, "# argmax_alpha={},{}", num(bs.argmax_alpha.x()), num(bs.argmax_alpha.y())).unwrap();
    match bs.gap {
        Some((lo, hi)) => {
            writeln!(out, "# gap_lo={}", num(lo)).unwrap();
            writeln!(out, "# gap_hi={}", num(hi)).unwrap();
        }
        None => {
            writeln!(out, "# gap_lo=none").unwrap();
            writeln!(out, "# gap_hi=none").unwrap();
        }
    }
    for p in bs.points.iter().filter(|p| p.failure.is_some()) {
        writeln!(out, "# failed {}", describe_failure(p)).unwrap();
    }
    out
}

/// Error for the first path point that is missing bands, if any.
pub fn check_bands(bs: &BandStructure) -> Result<(), CliError> {
    match first_failure(&bs.points) {
        Some(p) => Err(CliError::Compute(describe_failure(p))),
        None => Ok(()),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompareRow {
    pub contrast: f64,
    pub delta: f64,
    pub omega_exact: Option<f64>,
    pub omega_approx: Option<f64>,
    pub rel_error: Option<f64>,
    pub warning: Option<String>,
}

/// The lowest band at `α` against the capacity approximation, per contrast.
pub fn run_compare(config: &RunConfig, contrasts: &[f64], alpha: &BlochVector) -> Result<Vec<CompareRow>, CliError> {
    nonzero(alpha)?;
    let crystal = config.crystal()?;
    let opts = config.spectra_options();
    let mut rows = Vec::with_capacity(contrasts.len());
    for &contrast in contrasts {
        let mat = config.material_with_contrast(contrast)?;
        let mut row = CompareRow {
            contrast,
            delta: mat.delta(),
            omega_exact: None,
            omega_approx: None,
            rel_error: None,
            warning: None,
        };
        match approx_resonance(alpha, &mat, &crystal, config.truncation, config.spectral_cutoff) {
            Ok(w) => row.omega_approx = Some(w),
            Err(e) => row.warning = Some(format!("approximation: {e}")),
        }
        let search = find_bands(alpha, &mat, &crystal, config.truncation, config.omega_max, 1, &opts);
        match search.roots.first() {
            Some(root) => row.omega_exact = Some(root.omega),
            None => {
                let msg = format!("no band below omega_max = {}", config.omega_max);
                row.warning = Some(row.warning.map_or(msg.clone(), |w| format!("{w}; {msg}")));
            }
        }
        if let (Some(exact), Some(approx)) = (row.omega_exact, row.omega_approx) {
            row.rel_error = Some((exact - approx).abs() / exact);
        }
        rows.push(row);
    }
    Ok(rows)
}

pub fn compare_csv(rows: &[CompareRow]) -> String {
    let mut out = String::new();
    writeln!(out, "{COMPARE_HEADER}").unwrap();
    for r in rows {
        let cells = [num(r.contrast), num(r.delta), opt_num(r.omega_exact), opt_num(r.omega_approx), opt_num(r.rel_error)];
        writeln!(out, "{}", cells.join(",")).unwrap();
    }
    let warnings: Vec<_> = rows.iter().filter_map(|r| r.warning.as_ref().map(|w| (r.contrast, w))).collect();
    if !warnings.is_empty() {
        writeln!(out, "# warnings").unwrap();
        for (contrast, w) in warnings {
            writeln!(out, "# contrast={}: {w}", num(contrast)).unwrap();
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiluteRow {
    pub radius: f64,
    pub omega_star: f64,
    pub omega_m: f64,
    pub ratio: f64,
    pub argmax_alpha: BlochVector,
}

/// Top of the first band against the free-space Minnaert frequency, per
/// radius, at a fixed contrast.
pub fn run_dilute(config: &RunConfig, radii: &[f64], contrast: f64) -> Result<Vec<DiluteRow>, CliError> {
    let mat = config.material_with_contrast(contrast)?;
    let opts = config.spectra_options();
    let mut rows = Vec::with_capacity(radii.len());
    for &radius in radii {
        let crystal = config.crystal_with_radius(radius)?;
        let cap = capacity_disk(radius).map_err(|e| CliError::Compute(e.to_string()))?;
        let omega_m =
            minnaert_frequency(mat.delta(), mat.v_b(), cap, crystal.area()).map_err(|e| CliError::Compute(e.to_string()))?;
        let bs = band_structure(
            &mat,
            &crystal,
            config.truncation,
            config.path_resolution,
            1,
            DILUTE_SEARCH_FACTOR * omega_m,
            &opts,
        );
        if let Some(p) = first_failure(&bs.points) {
            return Err(CliError::Compute(format!("radius {radius}: {}", describe_failure(p))));
        }
        rows.push(DiluteRow {
            radius,
            omega_star: bs.omega_star,
            omega_m,
            ratio: bs.omega_star / omega_m,
            argmax_alpha: bs.argmax_alpha,
        });
    }
    Ok(rows)
}

pub fn dilute_csv(rows: &[DiluteRow]) -> String {
    let mut out = String::new();
    writeln!(out, "{DILUTE_HEADER}").unwrap();
    for r in rows {
        writeln!(out, "{}", [num(r.radius), num(r.omega_star), num(r.omega_m), num(r.ratio)].join(",")).unwrap();
    }
    for r in rows {
        writeln!(out, "# radius={} argmax_alpha={},{}", num(r.radius), num(r.argmax_alpha.x()), num(r.argmax_alpha.y()))
            .unwrap();
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct CapacityReport {
    pub alpha: BlochVector,
    pub radius: f64,
    pub delta: f64,
    pub v_b: f64,
    pub truncation: usize,
    pub cutoff: usize,
    pub cap: f64,
    pub cap_alpha: f64,
    pub residual: f64,
    pub omega_m: f64,
    pub omega_m_alpha: f64,
}

impl CapacityReport {
    pub fn ratio(&self) -> f64 {
        self.cap_alpha / self.cap
    }
}

pub fn run_capacity(config: &RunConfig, alpha: &BlochVector) -> Result<CapacityReport, CliError> {
    nonzero(alpha)?;
    let (mat, crystal) = (config.material()?, config.crystal()?);
    let compute = |e: bubble_bands::CapacityError| CliError::Compute(e.to_string());
    let cap = capacity_disk(config.radius).map_err(compute)?;
    let quasi = capacity_quasi(alpha, config.radius, config.truncation, config.spectral_cutoff).map_err(compute)?;
    let omega_m = minnaert_frequency(mat.delta(), mat.v_b(), cap, crystal.area()).map_err(compute)?;
    let omega_m_alpha = approx_resonance(alpha, &mat, &crystal, config.truncation, config.spectral_cutoff).map_err(compute)?;
    Ok(CapacityReport {
        alpha: *alpha,
        radius: config.radius,
        delta: mat.delta(),
        v_b: mat.v_b(),
        truncation: config.truncation,
        cutoff: config.spectral_cutoff,
        cap,
        cap_alpha: quasi.cap,
        residual: quasi.residual,
        omega_m,
        omega_m_alpha,
    })
}

pub fn capacity_text(r: &CapacityReport) -> String {
    let mut out = String::new();
    writeln!(out, "Cap_D             = {}", num(r.cap)).unwrap();
    writeln!(out, "Cap_D,alpha       = {}", num(r.cap_alpha)).unwrap();
    writeln!(out, "ratio             = {}", num(r.ratio())).unwrap();
    writeln!(out, "omega_M           = {}", num(r.omega_m)).unwrap();
    writeln!(out, "omega_M,alpha     = {}", num(r.omega_m_alpha)).unwrap();
    writeln!(out, "# alpha=({}, {}) radius={} delta={} v_b={}", r.alpha.x(), r.alpha.y(), r.radius, r.delta, r.v_b)
        .unwrap();
    writeln!(
        out,
        "# truncation_N={} spectral_cutoff={} solve_residual={:.3e}",
        r.truncation, r.cutoff, r.residual
    )
    .unwrap();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use bubble_bands::spectra::BandPoint;

    #[test]
    fn alpha_parsing() {
        let a = parse_alpha("3.141592653589793, 0").unwrap();
        assert_eq!(a, BlochVector::x_point());
        assert!(parse_alpha("1").is_err());
        assert!(parse_alpha("1,x").is_err());
        assert!(parse_alpha("4,0").is_err());
    }

    #[test]
    fn list_parsing() {
        assert_eq!(parse_list("100, 300").unwrap(), vec![100.0, 300.0]);
        assert!(parse_list("100,-3").is_err());
    }

    #[test]
    fn bands_csv_layout() {
        let point = |s: f64, alpha, omegas: Vec<f64>| BandPoint {
            s,
            alpha,
            omegas,
            diagnostics: Vec::new(),
            flagged: Vec::new(),
            failure: None,
        };
        let bs = BandStructure {
            points: vec![point(0.0, BlochVector::gamma(), vec![0.0, 2.0]), point(1.0, BlochVector::m_point(), vec![1.0, 3.0])],
            gap: Some((1.0, 2.0)),
            omega_star: 1.0,
            argmax_alpha: BlochVector::m_point(),
        };
        let csv = bands_csv(&bs);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], BANDS_HEADER);
        assert_eq!(lines[1], "0.000000000000000e0,0.000000000000000e0,0.000000000000000e0,1,0.000000000000000e0");
        assert_eq!(lines.len(), 1 + 4 + 4);
        assert!(csv.contains("# gap_lo=1.000000000000000e0\n# gap_hi=2.000000000000000e0\n"));
        assert!(check_bands(&bs).is_ok());
    }

    #[test]
    fn compare_csv_leaves_failures_empty() {
        let rows = [CompareRow {
            contrast: 100.0,
            delta: 0.01,
            omega_exact: None,
            omega_approx: Some(1.0),
            rel_error: None,
            warning: Some("no band".into()),
        }];
        let csv = compare_csv(&rows);
        assert!(csv.contains("1.000000000000000e-2,,1.000000000000000e0,\n# warnings\n"));
    }
}
