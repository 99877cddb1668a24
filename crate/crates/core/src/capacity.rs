//! Capacities of the disk and the Minnaert-type frequencies built from them.

use nalgebra::DVector;
use num_complex::Complex64;
use std::f64::consts::TAU;

use crate::error::CapacityError;
use crate::lattice::BlochVector;
use crate::operator::{quasistatic_matrix, DiskCrystal, MaterialParams};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapacityResult {
    pub cap: f64,
    pub alpha: Option<BlochVector>,
    pub radius: f64,
    pub truncation: usize,
    /// `‖M a - e_0‖` of the linear solve.
    pub residual: f64,
}

/// Free-space capacity of a disk of radius `R < 1` for the kernel
/// `(1/2π) ln|x - y|`: `-2π / ln R`.
pub fn capacity_disk(radius: f64) -> Result<f64, CapacityError> {
    if !(radius > 0.0 && radius < 1.0) {
        return Err(CapacityError::Domain(format!("disk capacity needs 0 < R < 1, got {radius}")));
    }
    Ok(-TAU / radius.ln())
}

/// Quasi-periodic capacity `-(S^{-1}[1], 1)` from the truncated quasi-static
/// matrix.
pub fn capacity_quasi(
    alpha: &BlochVector,
    radius: f64,
    truncation: usize,
    cutoff: usize,
) -> Result<CapacityResult, CapacityError> {
    let m = quasistatic_matrix(alpha, radius, truncation, cutoff)?;
    let size = m.nrows();
    let mut rhs = DVector::<Complex64>::zeros(size);
    rhs[truncation] = Complex64::new(1.0, 0.0);
    let a = m.clone().lu().solve(&rhs).ok_or(CapacityError::SingularSystem)?;
    if a.iter().any(|v| !v.is_finite()) {
        return Err(CapacityError::SingularSystem);
    }
    let residual = (&m * &a - &rhs).norm();
    let form = -TAU * radius * a[truncation];
    if form.im.abs() > 1e-10 * form.re.abs().max(1.0) {
        return Err(CapacityError::Domain(format!(
            "quadratic form not real: imaginary part {:.3e}",
            form.im
        )));
    }
    Ok(CapacityResult { cap: form.re, alpha: Some(*alpha), radius, truncation, residual })
}

/// `sqrt(δ v_b² Cap / |D|)`.
pub fn minnaert_frequency(delta: f64, v_b: f64, cap: f64, volume: f64) -> Result<f64, CapacityError> {
    for (name, v) in [("delta", delta), ("v_b", v_b), ("cap", cap), ("volume", volume)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(CapacityError::Domain(format!("{name} = {v} must be positive")));
        }
    }
    Ok((delta * v_b * v_b * cap / volume).sqrt())
}

/// Leading-order first-band frequency at `α`: the Minnaert formula with the
/// quasi-periodic capacity.
pub fn approx_resonance(
    alpha: &BlochVector,
    mat: &MaterialParams,
    crystal: &DiskCrystal,
    truncation: usize,
    cutoff: usize,
) -> Result<f64, CapacityError> {
    let cap = capacity_quasi(alpha, crystal.radius(), truncation, cutoff)?;
    minnaert_frequency(mat.delta(), mat.v_b(), cap.cap, crystal.area())
}

/// Normalized capacity shift `(Cap_α - Cap) / Cap²` at one radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapacityShift {
    pub radius: f64,
    pub cap: f64,
    pub cap_alpha: f64,
    pub beta: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiluteRow {
    pub alpha: BlochVector,
    pub shifts: Vec<CapacityShift>,
    pub mean_beta: f64,
    /// `(max β - min β) / |mean β|` over the radii.
    pub spread: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiluteReport {
    pub rows: Vec<DiluteRow>,
}

/// Checks that the normalized shift `β(α, R)` is nearly independent of `R`
/// in the dilute regime, for every `α` with `|α| >= 1`.
pub fn dilute_consistency(
    alphas: &[BlochVector],
    radii: &[f64],
    truncation: usize,
    cutoff: usize,
) -> Result<DiluteReport, CapacityError> {
    if radii.is_empty() {
        return Err(CapacityError::Domain("no radii given".into()));
    }
    let mut rows = Vec::with_capacity(alphas.len());
    for alpha in alphas {
        if alpha.norm() < 1.0 {
            return Err(CapacityError::Domain(format!("|α| = {} below 1", alpha.norm())));
        }
        let mut shifts = Vec::with_capacity(radii.len());
        for &radius in radii {
            let cap = capacity_disk(radius)?;
            let cap_alpha = capacity_quasi(alpha, radius, truncation, cutoff)?.cap;
            shifts.push(CapacityShift { radius, cap, cap_alpha, beta: (cap_alpha - cap) / (cap * cap) });
        }
        let mean_beta = shifts.iter().map(|s| s.beta).sum::<f64>() / shifts.len() as f64;
        let (lo, hi) = shifts
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| (lo.min(s.beta), hi.max(s.beta)));
        rows.push(DiluteRow { alpha: *alpha, shifts, mean_beta, spread: (hi - lo) / mean_beta.abs() });
    }
    Ok(DiluteReport { rows })
}
