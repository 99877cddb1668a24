//! Band frequencies as real characteristic values of `A(ω, δ)`.
//!
//! A frequency grid is scanned with the smallest singular value of the
//! row-equilibrated matrix; every local minimum becomes a bracket that is
//! polished by Muller's method on the determinant. Grid points too close to
//! an empty-lattice resonance are rescanned on a finer grid with a smaller
//! guard instead of being dropped.

use nalgebra::DMatrix;
use num_complex::Complex64;
use std::f64::consts::PI;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::error::{OperatorError, SpectraError};
use crate::lattice::{empty_lattice_margin, BlochVector, LatticeOptions};
use crate::operator::{assemble_characteristic_matrix, CharacteristicMatrix, DiskCrystal, MaterialParams};

/// Numerical knobs of the band search. Defaults follow the documented
/// settings of the solver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectraOptions {
    /// Grid step below `step_switch`.
    pub scan_step: f64,
    pub step_switch: f64,
    /// Step multiplier above `step_switch`.
    pub coarse_factor: f64,
    pub lattice: LatticeOptions,
    /// Successively smaller guards for rescanning stretches of the grid that
    /// fail the previous guard.
    pub fine_guards: [f64; 2],
    /// Step divisor between guard levels.
    pub fine_divisor: f64,
    pub muller_tol: f64,
    pub max_iter: usize,
    /// Largest equilibrated smallest singular value of an accepted root.
    pub accept: f64,
    pub imag_tol: f64,
}

impl Default for SpectraOptions {
    fn default() -> Self {
        Self {
            scan_step: 2e-3,
            step_switch: 0.5,
            coarse_factor: 5.0,
            lattice: LatticeOptions::default(),
            fine_guards: [0.01, 1e-3],
            fine_divisor: 10.0,
            muller_tol: 1e-10,
            max_iter: 50,
            accept: 1e-6,
            imag_tol: 1e-8,
        }
    }
}

/// Smallest singular value after scaling every row to unit max-norm.
#[derive(Debug, Clone, PartialEq)]
pub struct Indicator {
    pub sigma_min: f64,
    pub row_scales: Vec<f64>,
}

/// Reciprocal max-norm of each row; zero rows keep scale 1.
pub fn row_scales(m: &DMatrix<Complex64>) -> Vec<f64> {
    m.row_iter()
        .map(|row| {
            let max = row.iter().map(|z| z.norm()).fold(0.0, f64::max);
            if max > 0.0 {
                1.0 / max
            } else {
                1.0
            }
        })
        .collect()
}

fn scale_rows(m: &DMatrix<Complex64>, scales: &[f64]) -> DMatrix<Complex64> {
    let mut out = m.clone();
    for (i, &s) in scales.iter().enumerate() {
        out.row_mut(i).scale_mut(s);
    }
    out
}

fn singular_values(m: &DMatrix<Complex64>) -> Vec<f64> {
    let mut sv: Vec<f64> = m.clone().singular_values().iter().copied().collect();
    sv.sort_by(f64::total_cmp);
    sv
}

pub fn matrix_indicator(m: &DMatrix<Complex64>) -> Indicator {
    let scales = row_scales(m);
    let sv = singular_values(&scale_rows(m, &scales));
    Indicator { sigma_min: sv.first().copied().unwrap_or(0.0), row_scales: scales }
}

pub fn singular_value_indicator(a: &CharacteristicMatrix) -> Indicator {
    matrix_indicator(&a.entries)
}

/// Determinant as `phase · exp(log_abs)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogDet {
    pub log_abs: f64,
    pub phase: Complex64,
}

/// Determinant by LU with partial pivoting, accumulated in log form.
pub fn log_determinant(mut m: DMatrix<Complex64>) -> LogDet {
    let n = m.nrows();
    assert_eq!(n, m.ncols(), "determinant of a non-square matrix");
    let mut log_abs = 0.0;
    let mut phase = Complex64::new(1.0, 0.0);
    for col in 0..n {
        let (pivot_row, pivot_abs) = (col..n)
            .map(|r| (r, m[(r, col)].norm()))
            .fold((col, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if pivot_abs == 0.0 {
            return LogDet { log_abs: f64::NEG_INFINITY, phase: Complex64::new(0.0, 0.0) };
        }
        if pivot_row != col {
            m.swap_rows(pivot_row, col);
            phase = -phase;
        }
        let pivot = m[(col, col)];
        log_abs += pivot_abs.ln();
        phase *= pivot / pivot_abs;
        for r in col + 1..n {
            let factor = m[(r, col)] / pivot;
            if factor == Complex64::new(0.0, 0.0) {
                continue;
            }
            for c in col + 1..n {
                let v = m[(col, c)];
                m[(r, c)] -= factor * v;
            }
        }
    }
    LogDet { log_abs, phase }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MullerOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Replace every iterate by its real part.
    pub project_real: bool,
}

impl Default for MullerOptions {
    fn default() -> Self {
        Self { tol: 1e-10, max_iter: 50, project_real: false }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MullerOutcome {
    pub root: Complex64,
    pub iterations: usize,
    pub last_step: f64,
    /// Imaginary part of the last quadratic-fit root before projection.
    pub raw_imag: f64,
}

/// Muller's method: fit a quadratic through the last three iterates and
/// step to its root nearer the newest one. Stops when the step falls below
/// `tol (1 + |ω|)`.
pub fn muller_refine<F>(mut f: F, starts: [Complex64; 3], opts: &MullerOptions) -> Result<MullerOutcome, SpectraError>
where
    F: FnMut(Complex64) -> Result<Complex64, SpectraError>,
{
    let [mut x0, mut x1, mut x2] = starts;
    if x0 == x1 || x1 == x2 || x0 == x2 {
        return Err(SpectraError::BadStarts);
    }
    let (mut f0, mut f1, mut f2) = (f(x0)?, f(x1)?, f(x2)?);
    let zero = Complex64::new(0.0, 0.0);
    if let Some(&(x, _)) = [(x0, f0), (x1, f1), (x2, f2)].iter().find(|(_, v)| *v == zero) {
        return Ok(MullerOutcome { root: x, iterations: 0, last_step: 0.0, raw_imag: x.im });
    }
    let mut best = if f0.norm() < f1.norm() { (x0, f0.norm()) } else { (x1, f1.norm()) };
    if f2.norm() <= best.1 {
        best = (x2, f2.norm());
    }
    let mut last_step = f64::INFINITY;
    for iteration in 1..=opts.max_iter {
        if f2 == Complex64::new(0.0, 0.0) {
            return Ok(MullerOutcome { root: x2, iterations: iteration - 1, last_step: 0.0, raw_imag: 0.0 });
        }
        let h1 = x1 - x0;
        let h2 = x2 - x1;
        let d1 = (f1 - f0) / h1;
        let d2 = (f2 - f1) / h2;
        let a = (d2 - d1) / (h2 + h1);
        let b = d2 + h2 * a;
        let disc = (b * b - 4.0 * f2 * a).sqrt();
        let denom = if (b + disc).norm() >= (b - disc).norm() { b + disc } else { b - disc };
        let step = if denom.norm() == 0.0 {
            // flat fit: nudge by the last spacing
            h2
        } else {
            -2.0 * f2 / denom
        };
        let raw = x2 + step;
        let next = if opts.project_real { Complex64::new(raw.re, 0.0) } else { raw };
        last_step = (next - x2).norm();
        if !next.is_finite() {
            break;
        }
        if last_step <= opts.tol * (1.0 + next.norm()) {
            return Ok(MullerOutcome { root: next, iterations: iteration, last_step, raw_imag: raw.im });
        }
        // Stepping back onto an earlier node happens when that node already
        // sits on the root to rounding; the next fit would be degenerate.
        if next == x0 || next == x1 {
            if next == best.0 {
                return Ok(MullerOutcome { root: next, iterations: iteration, last_step, raw_imag: raw.im });
            }
            break;
        }
        x0 = x1;
        f0 = f1;
        x1 = x2;
        f1 = f2;
        x2 = next;
        f2 = f(x2)?;
        if f2.norm() <= best.1 {
            best = (x2, f2.norm());
        }
    }
    Err(SpectraError::NoConvergence { best: best.0, iterations: opts.max_iter, last_step })
}

/// Everything needed to evaluate `A(ω)` along one Bloch vector.
#[derive(Debug, Clone, Copy)]
struct Problem<'a> {
    alpha: BlochVector,
    mat: &'a MaterialParams,
    crystal: &'a DiskCrystal,
    truncation: usize,
    opts: &'a SpectraOptions,
}

impl Problem<'_> {
    fn margin(&self, omega: f64) -> f64 {
        empty_lattice_margin(omega / self.mat.v(), &self.alpha)
    }

    fn matrix(&self, omega: f64, guard: f64) -> Result<CharacteristicMatrix, OperatorError> {
        let lattice = LatticeOptions { guard, ..self.opts.lattice };
        assemble_characteristic_matrix(omega, self.mat, &self.alpha, self.crystal, self.truncation, &lattice)
    }

    fn indicator(&self, omega: f64, guard: f64) -> Option<f64> {
        if self.margin(omega) <= guard {
            return None;
        }
        self.matrix(omega, guard).ok().map(|a| singular_value_indicator(&a).sigma_min)
    }
}

/// One indicator sample of the scan; `sigma` is absent where the matrix
/// could not be formed.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Sample {
    omega: f64,
    sigma: Option<f64>,
    guard: f64,
}

/// Three consecutive samples whose middle one is a local minimum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket {
    pub lo: f64,
    pub mid: f64,
    pub hi: f64,
    pub sigma: f64,
    /// Guard in force when the bracket was found.
    pub guard: f64,
}

/// Stretch of the grid that fell inside the guard of an empty-lattice
/// resonance and was rescanned; `unresolved` counts fine points that were
/// still too close to evaluate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlaggedInterval {
    pub lo: f64,
    pub hi: f64,
    pub unresolved: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ScanResult {
    pub brackets: Vec<Bracket>,
    pub flagged: Vec<FlaggedInterval>,
}

/// Evaluates `grid` (ascending) and rescans every run of guarded points.
fn sample_grid(problem: &Problem, grid: &[f64], step: f64, flagged: &mut Vec<FlaggedInterval>) -> Vec<Sample> {
    let mut out = Vec::with_capacity(grid.len());
    let mut unresolved = 0;
    sample_level(problem, grid, step, 0, &mut out, &mut unresolved, Some(flagged));
    out
}

fn guard_at(opts: &SpectraOptions, level: usize) -> Option<f64> {
    match level {
        0 => Some(opts.lattice.guard),
        l => opts.fine_guards.get(l - 1).copied(),
    }
}

/// One level of the guard cascade: points that fail at this level's guard
/// are resampled `fine_divisor` times finer with the next, smaller guard.
fn sample_level(
    problem: &Problem,
    grid: &[f64],
    step: f64,
    level: usize,
    out: &mut Vec<Sample>,
    unresolved: &mut usize,
    mut flagged: Option<&mut Vec<FlaggedInterval>>,
) {
    let guard = guard_at(problem.opts, level).expect("level within cascade");
    let values: Vec<Option<f64>> = grid.iter().map(|&w| problem.indicator(w, guard)).collect();
    let deeper = guard_at(problem.opts, level + 1).is_some();
    let mut i = 0;
    while i < grid.len() {
        if values[i].is_some() || !deeper {
            *unresolved += usize::from(values[i].is_none());
            out.push(Sample { omega: grid[i], sigma: values[i], guard });
            i += 1;
            continue;
        }
        let mut j = i;
        while j + 1 < grid.len() && values[j + 1].is_none() {
            j += 1;
        }
        let lo = if i > 0 { grid[i - 1] } else { grid[i] - step };
        let hi = if j + 1 < grid.len() { grid[j + 1] } else { grid[j] + step };
        let fine_step = step / problem.opts.fine_divisor;
        let count = ((hi - lo) / fine_step).round() as usize;
        let fine: Vec<f64> = (1..count).map(|t| lo + t as f64 * fine_step).filter(|&w| w > 0.0).collect();
        let before = *unresolved;
        sample_level(problem, &fine, fine_step, level + 1, out, unresolved, None);
        if let Some(list) = flagged.as_deref_mut() {
            list.push(FlaggedInterval { lo, hi, unresolved: *unresolved - before });
        }
        i = j + 1;
    }
}

fn bracket_at(samples: &[Sample], mid: usize) -> Option<Bracket> {
    if mid == 0 || mid + 1 >= samples.len() {
        return None;
    }
    let (a, b, c) = (samples[mid - 1], samples[mid], samples[mid + 1]);
    let (sa, sb, sc) = (a.sigma?, b.sigma?, c.sigma?);
    (sb < sa && sb <= sc).then(|| Bracket {
        lo: a.omega,
        mid: b.omega,
        hi: c.omega,
        sigma: sb,
        guard: a.guard.min(b.guard).min(c.guard),
    })
}

fn uniform_grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    if !(hi > lo) || !(step > 0.0) {
        return Vec::new();
    }
    let count = ((hi - lo) / step + 1e-9).floor() as usize;
    (0..=count).map(|i| lo + i as f64 * step).filter(|&w| w > 0.0).collect()
}

/// Local minima of the indicator on a uniform grid over `range`.
pub fn scan_and_bracket(
    alpha: &BlochVector,
    mat: &MaterialParams,
    crystal: &DiskCrystal,
    truncation: usize,
    range: (f64, f64),
    step: f64,
    opts: &SpectraOptions,
) -> ScanResult {
    let problem = Problem { alpha: *alpha, mat, crystal, truncation, opts };
    let grid = uniform_grid(range.0, range.1, step);
    let mut flagged = Vec::new();
    let samples = sample_grid(&problem, &grid, step, &mut flagged);
    let brackets = (1..samples.len()).filter_map(|i| bracket_at(&samples, i)).collect();
    ScanResult { brackets, flagged }
}

/// An accepted band frequency with its diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandRoot {
    pub omega: f64,
    pub sigma_min: f64,
    pub iterations: usize,
    /// Number of equilibrated singular values below `1e-5` at the root.
    pub multiplicity: usize,
    pub guard: f64,
    /// `true` for the `ω = 0` band at `α = 0`, which is not computed.
    pub analytic: bool,
}

fn refine_bracket(problem: &Problem, bracket: &Bracket) -> Result<BandRoot, SpectraError> {
    let guard = bracket.guard;
    let centre = problem.matrix(bracket.mid, guard)?;
    let scales = row_scales(&centre.entries);
    // Only guards against overflow, so any finite level will do; the centre
    // itself can be exactly singular when a start lands on the root.
    let mut reference = 0.0;
    for w in [bracket.mid, bracket.lo, bracket.hi] {
        let level = log_determinant(scale_rows(&problem.matrix(w, guard)?.entries, &scales)).log_abs;
        if level.is_finite() {
            reference = level;
            break;
        }
    }
    let f = |w: Complex64| -> Result<Complex64, SpectraError> {
        let a = problem.matrix(w.re, guard)?;
        let d = log_determinant(scale_rows(&a.entries, &scales));
        Ok(d.phase * (d.log_abs - reference).exp())
    };
    let muller = MullerOptions { tol: problem.opts.muller_tol, max_iter: problem.opts.max_iter, project_real: true };
    let starts = [bracket.lo, bracket.mid, bracket.hi].map(|w| Complex64::new(w, 0.0));
    let outcome = muller_refine(f, starts, &muller)?;
    let omega = outcome.root.re;
    if !(bracket.lo..=bracket.hi).contains(&omega) {
        return Err(SpectraError::RejectedRoot {
            omega,
            reason: format!("outside bracket [{}, {}]", bracket.lo, bracket.hi),
        });
    }
    if outcome.raw_imag.abs() > problem.opts.imag_tol {
        return Err(SpectraError::RejectedRoot {
            omega,
            reason: format!("imaginary part {:.2e}", outcome.raw_imag),
        });
    }
    let a = problem.matrix(omega, guard)?;
    let scales = row_scales(&a.entries);
    let sv = singular_values(&scale_rows(&a.entries, &scales));
    let sigma_min = sv[0];
    if sigma_min > problem.opts.accept {
        return Err(SpectraError::RejectedRoot { omega, reason: format!("indicator {sigma_min:.2e}") });
    }
    Ok(BandRoot {
        omega,
        sigma_min,
        iterations: outcome.iterations,
        multiplicity: sv.iter().filter(|&&s| s <= 1e-5).count(),
        guard,
        analytic: false,
    })
}

/// Result of a band search at one Bloch vector. Fewer roots than requested
/// means the search reached `omega_max` first.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BandSearch {
    pub roots: Vec<BandRoot>,
    pub flagged: Vec<FlaggedInterval>,
    pub rejected: usize,
}

impl BandSearch {
    pub fn omegas(&self) -> Vec<f64> {
        self.roots.iter().map(|r| r.omega).collect()
    }
}

fn scan_grid(omega_max: f64, opts: &SpectraOptions) -> Vec<f64> {
    let fine_top = opts.step_switch.min(omega_max);
    let mut grid = uniform_grid(0.0, fine_top, opts.scan_step);
    if omega_max > opts.step_switch {
        let coarse = opts.scan_step * opts.coarse_factor;
        grid.extend(uniform_grid(opts.step_switch, omega_max, coarse).into_iter().filter(|&w| w > fine_top));
    }
    grid
}

const CHUNK: usize = 32;

/// Lowest `band_count` distinct band frequencies in `(0, omega_max]`,
/// scanning upward and stopping as soon as enough roots are accepted.
pub fn find_bands(
    alpha: &BlochVector,
    mat: &MaterialParams,
    crystal: &DiskCrystal,
    truncation: usize,
    omega_max: f64,
    band_count: usize,
    opts: &SpectraOptions,
) -> BandSearch {
    let problem = Problem { alpha: *alpha, mat, crystal, truncation, opts };
    let mut search = BandSearch::default();
    if alpha.is_zero() && band_count > 0 {
        search.roots.push(BandRoot {
            omega: 0.0,
            sigma_min: 0.0,
            iterations: 0,
            multiplicity: 1,
            guard: 0.0,
            analytic: true,
        });
    }
    let grid = scan_grid(omega_max, opts);
    let mut samples: Vec<Sample> = Vec::new();
    let mut next_mid = 1;
    let mut start = 0;
    while start < grid.len() && search.roots.len() < band_count {
        let mut end = (start + CHUNK).min(grid.len());
        // never cut a guarded stretch in two
        while end < grid.len() && problem.margin(grid[end - 1]) <= opts.lattice.guard {
            end += 1;
        }
        let step = if grid[start] < opts.step_switch { opts.scan_step } else { opts.scan_step * opts.coarse_factor };
        samples.extend(sample_grid(&problem, &grid[start..end], step, &mut search.flagged));
        start = end;
        while next_mid + 1 < samples.len() && search.roots.len() < band_count {
            if let Some(bracket) = bracket_at(&samples, next_mid) {
                match refine_bracket(&problem, &bracket) {
                    Ok(root) => {
                        let duplicate = search
                            .roots
                            .iter()
                            .any(|r| (r.omega - root.omega).abs() <= 1e-8 * (1.0 + root.omega));
                        if !duplicate {
                            search.roots.push(root);
                        }
                    }
                    Err(_) => search.rejected += 1,
                }
            }
            next_mid += 1;
        }
    }
    search.roots.sort_by(|a, b| a.omega.total_cmp(&b.omega));
    search
}

/// The two lowest band frequencies (`ω_1 = 0` at `α = 0`).
pub fn first_two_bands(
    alpha: &BlochVector,
    mat: &MaterialParams,
    crystal: &DiskCrystal,
    truncation: usize,
    omega_max: f64,
    opts: &SpectraOptions,
) -> Result<(f64, f64), SpectraError> {
    let search = find_bands(alpha, mat, crystal, truncation, omega_max, 2, opts);
    match search.roots.as_slice() {
        [a, b, ..] => Ok((a.omega, b.omega)),
        roots => Err(SpectraError::BandNotFound { found: roots.len(), wanted: 2, omega_max }),
    }
}

/// Accepted root nearest to `guess`, searched in `guess ± half_width`.
pub fn refine_near(
    alpha: &BlochVector,
    mat: &MaterialParams,
    crystal: &DiskCrystal,
    truncation: usize,
    guess: f64,
    half_width: f64,
    opts: &SpectraOptions,
) -> Result<BandRoot, SpectraError> {
    let problem = Problem { alpha: *alpha, mat, crystal, truncation, opts };
    let step = half_width / 10.0;
    let grid = uniform_grid(guess - half_width, guess + half_width, step);
    let mut flagged = Vec::new();
    let samples = sample_grid(&problem, &grid, step, &mut flagged);
    let mut best: Option<BandRoot> = None;
    let mut last_err = None;
    for i in 1..samples.len() {
        if let Some(bracket) = bracket_at(&samples, i) {
            match refine_bracket(&problem, &bracket) {
                Ok(root) => {
                    if best.is_none_or(|b| (root.omega - guess).abs() < (b.omega - guess).abs()) {
                        best = Some(root);
                    }
                }
                Err(e) => last_err = Some(e),
            }
        }
    }
    best.ok_or_else(|| {
        last_err.unwrap_or(SpectraError::RejectedRoot {
            omega: guess,
            reason: format!("no indicator minimum within {half_width} of the guess"),
        })
    })
}

/// One sample of the band diagram.
#[derive(Debug, Clone, PartialEq)]
pub struct BandPoint {
    /// Arc-length parameter along Γ→X→M→Γ, in `[0, 1]`.
    pub s: f64,
    pub alpha: BlochVector,
    pub omegas: Vec<f64>,
    pub diagnostics: Vec<BandRoot>,
    pub flagged: Vec<FlaggedInterval>,
    pub failure: Option<SpectraError>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapSummary {
    pub omega_star: f64,
    pub argmax_alpha: BlochVector,
    pub gap: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BandStructure {
    pub points: Vec<BandPoint>,
    pub gap: Option<(f64, f64)>,
    pub omega_star: f64,
    pub argmax_alpha: BlochVector,
}

/// `resolution` samples per edge of Γ→X→M→Γ plus the closing Γ, with the
/// arc-length parameter of each.
pub fn symmetry_path(resolution: usize) -> Vec<(f64, BlochVector)> {
    let total = PI * (2.0 + 2f64.sqrt());
    let mut out = Vec::with_capacity(3 * resolution + 1);
    let res = resolution as f64;
    for i in 0..resolution {
        let t = i as f64 / res;
        out.push((PI * t / total, BlochVector::new(PI * t, 0.0).expect("inside zone")));
    }
    for i in 0..resolution {
        let t = i as f64 / res;
        out.push(((PI + PI * t) / total, BlochVector::new(PI, PI * t).expect("inside zone")));
    }
    for i in 0..resolution {
        let t = i as f64 / res;
        let a = PI * (1.0 - t);
        out.push(((2.0 * PI + PI * 2f64.sqrt() * t) / total, BlochVector::new(a, a).expect("inside zone")));
    }
    out.push((1.0, BlochVector::gamma()));
    out
}

/// How the independent path samples are distributed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// Data-parallel over Bloch vectors; sequential without the `parallel`
    /// feature.
    Parallel,
}

/// Configuration of a band sweep.
#[derive(Debug, Clone, Copy)]
pub struct SweepSpec<'a> {
    pub mat: &'a MaterialParams,
    pub crystal: &'a DiskCrystal,
    pub truncation: usize,
    pub band_count: usize,
    pub omega_max: f64,
    pub opts: &'a SpectraOptions,
}

impl SweepSpec<'_> {
    pub fn point(&self, s: f64, alpha: &BlochVector) -> BandPoint {
        let search = find_bands(alpha, self.mat, self.crystal, self.truncation, self.omega_max, self.band_count, self.opts);
        let failure = (search.roots.len() < self.band_count).then_some(SpectraError::BandNotFound {
            found: search.roots.len(),
            wanted: self.band_count,
            omega_max: self.omega_max,
        });
        BandPoint {
            s,
            alpha: *alpha,
            omegas: search.omegas(),
            diagnostics: search.roots,
            flagged: search.flagged,
            failure,
        }
    }

    /// Band points for the given samples, in input order.
    pub fn sweep(&self, samples: &[(f64, BlochVector)], exec: Execution) -> Vec<BandPoint> {
        match exec {
            Execution::Sequential => samples.iter().map(|(s, a)| self.point(*s, a)).collect(),
            #[cfg(feature = "parallel")]
            Execution::Parallel => samples.par_iter().map(|(s, a)| self.point(*s, a)).collect(),
            #[cfg(not(feature = "parallel"))]
            Execution::Parallel => samples.iter().map(|(s, a)| self.point(*s, a)).collect(),
        }
    }
}

/// `ω_1^* = max ω_1` over the points and the gap `(max ω_1, min ω_2)` when
/// it is nonempty. Points missing a band are skipped for that band.
pub fn extract_gap_and_star(points: &[BandPoint]) -> GapSummary {
    let mut omega_star = f64::NEG_INFINITY;
    let mut argmax_alpha = BlochVector::gamma();
    let mut second_min = f64::INFINITY;
    for p in points {
        if let Some(&w1) = p.omegas.first() {
            if w1 > omega_star {
                omega_star = w1;
                argmax_alpha = p.alpha;
            }
        }
        if let Some(&w2) = p.omegas.get(1) {
            second_min = second_min.min(w2);
        }
    }
    let gap = (second_min.is_finite() && second_min > omega_star).then_some((omega_star, second_min));
    GapSummary { omega_star, argmax_alpha, gap }
}

/// Band diagram along Γ→X→M→Γ.
pub fn band_structure(
    mat: &MaterialParams,
    crystal: &DiskCrystal,
    truncation: usize,
    resolution: usize,
    band_count: usize,
    omega_max: f64,
    opts: &SpectraOptions,
) -> BandStructure {
    band_structure_with(mat, crystal, truncation, resolution, band_count, omega_max, opts, Execution::Parallel)
}

#[allow(clippy::too_many_arguments)]
pub fn band_structure_with(
    mat: &MaterialParams,
    crystal: &DiskCrystal,
    truncation: usize,
    resolution: usize,
    band_count: usize,
    omega_max: f64,
    opts: &SpectraOptions,
    exec: Execution,
) -> BandStructure {
    assert!(resolution >= 3, "need at least 3 samples per edge");
    let spec = SweepSpec { mat, crystal, truncation, band_count, omega_max, opts };
    let points = spec.sweep(&symmetry_path(resolution), exec);
    let summary = extract_gap_and_star(&points);
    BandStructure { points, gap: summary.gap, omega_star: summary.omega_star, argmax_alpha: summary.argmax_alpha }
}
