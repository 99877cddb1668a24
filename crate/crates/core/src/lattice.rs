//! Lattice sums of Hankel functions over the unit square lattice,
//!
//! ```text
//! Q_n(k, α) = Σ_{m ∈ ℤ², m ≠ 0} H_n^{(1)}(k|m|) e^{i n arg m} e^{i m·α},
//! ```
//!
//! which couple a bubble to its periodic images in the multipole basis.
//!
//! The raw sum is only conditionally convergent, so the production path uses
//! the Ewald splitting of the quasi-periodic Green's function. With
//! `f(x) = Σ_m H_0(k|x - m|) e^{i m·α}` one has
//! `Q_n = k^{-n} (∂_x + i∂_y)^n [f - H_0(k|x|)]` at the origin (and the
//! conjugate operator for negative orders). Both Ewald pieces are
//! differentiated in closed form: plane waves in the reciprocal sum, and
//! `d/ds E_j(s η²) = -η² E_{j-1}(s η²)` in the direct sum.

use num_complex::Complex64;
use std::f64::consts::{PI, TAU};

use crate::error::LatticeError;
use crate::expint::expint_range;
use crate::specfun::{bessel_y_seq, EULER_GAMMA};

/// Default absolute accuracy target for lattice sums.
pub const DEFAULT_TOL: f64 = 1e-8;
/// Default exclusion radius (in wavenumber units) around empty-lattice resonances.
pub const DEFAULT_GUARD: f64 = 0.05;
/// Default maximal number of shells in either Ewald sum.
pub const DEFAULT_SHELL_BUDGET: usize = 600;

const ZONE_SLACK: f64 = 1e-12;

/// Quasi-momentum in the first Brillouin zone `[-π, π]²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochVector {
    x: f64,
    y: f64,
}

impl BlochVector {
    pub fn new(x: f64, y: f64) -> Result<Self, LatticeError> {
        let inside = |v: f64| v.is_finite() && v.abs() <= PI + ZONE_SLACK;
        if inside(x) && inside(y) {
            Ok(Self { x, y })
        } else {
            Err(LatticeError::OutOfZone(x, y))
        }
    }

    pub const fn gamma() -> Self {
        Self { x: 0.0, y: 0.0 }
    }

    pub const fn x_point() -> Self {
        Self { x: PI, y: 0.0 }
    }

    pub const fn m_point() -> Self {
        Self { x: PI, y: PI }
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    pub fn norm(&self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn is_zero(&self) -> bool {
        self.x == 0.0 && self.y == 0.0
    }

    pub fn neg(&self) -> Self {
        Self { x: -self.x, y: -self.y }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeOptions {
    pub tol: f64,
    pub guard: f64,
    pub shell_budget: usize,
}

impl Default for LatticeOptions {
    fn default() -> Self {
        Self { tol: DEFAULT_TOL, guard: DEFAULT_GUARD, shell_budget: DEFAULT_SHELL_BUDGET }
    }
}

impl LatticeOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self { tol, ..Self::default() }
    }
}

/// Distance `|k - |q||` from `k` to the nearest reciprocal point
/// `q ∈ 2πℤ² + α` with `|q| <= k + 2π`.
pub fn empty_lattice_margin(k: f64, alpha: &BlochVector) -> f64 {
    let reach = k + TAU;
    let lo_x = ((-reach - alpha.x) / TAU).floor() as i64;
    let hi_x = ((reach - alpha.x) / TAU).ceil() as i64;
    let lo_y = ((-reach - alpha.y) / TAU).floor() as i64;
    let hi_y = ((reach - alpha.y) / TAU).ceil() as i64;
    let mut best = reach;
    for px in lo_x..=hi_x {
        for py in lo_y..=hi_y {
            let q = (TAU * px as f64 + alpha.x).hypot(TAU * py as f64 + alpha.y);
            if q <= reach {
                best = best.min((k - q).abs());
            }
        }
    }
    best
}

/// `Q_n` for `|n| <= order_max` at one `(k, α)`.
#[derive(Debug, Clone)]
pub struct LatticeSumTable {
    pub k: f64,
    pub alpha: BlochVector,
    pub order_max: usize,
    /// `Q_{-order_max} ..= Q_{order_max}`.
    pub values: Vec<Complex64>,
    /// Absolute error estimate per stored order, same layout as `values`.
    pub errors: Vec<f64>,
    /// Largest per-order error estimate relative to `max(1, |Q_n|, |Y_n(k)|)`,
    /// the last being the size of a single nearest-image term.
    pub est_error: f64,
}

impl LatticeSumTable {
    pub fn compute(
        order_max: usize,
        k: f64,
        alpha: &BlochVector,
        opts: &LatticeOptions,
    ) -> Result<Self, LatticeError> {
        if !(k > 0.0 && k.is_finite()) {
            return Err(LatticeError::BadWavenumber(k));
        }
        let margin = empty_lattice_margin(k, alpha);
        if margin <= opts.guard {
            return Err(LatticeError::NearEmptyResonance { k, margin, guard: opts.guard });
        }
        let sums = ewald_sums(order_max, k, alpha, opts.shell_budget);
        // High orders at small k cancel between images far below the size of
        // a single term, so the error is judged against that size as well.
        let nearest = bessel_y_seq(order_max, k).map_err(|_| LatticeError::BadWavenumber(k))?;
        let est_error = sums
            .values
            .iter()
            .zip(&sums.errors)
            .enumerate()
            .map(|(i, (v, e))| {
                let order = i.abs_diff(order_max);
                e / v.norm().max(1.0).max(nearest[order].abs())
            })
            .fold(0.0, f64::max);
        if !sums.converged || est_error > opts.tol {
            return Err(LatticeError::NonConvergence {
                tol: opts.tol,
                budget: opts.shell_budget,
                est: est_error,
            });
        }
        Ok(Self { k, alpha: *alpha, order_max, values: sums.values, errors: sums.errors, est_error })
    }

    /// `Q_n`, or `None` when `|n|` exceeds the table.
    pub fn get(&self, n: i32) -> Option<Complex64> {
        let i = n.unsigned_abs() as usize;
        (i <= self.order_max).then(|| self.values[(n + self.order_max as i32) as usize])
    }

    pub fn error(&self, n: i32) -> Option<f64> {
        let i = n.unsigned_abs() as usize;
        (i <= self.order_max).then(|| self.errors[(n + self.order_max as i32) as usize])
    }
}

/// Single lattice sum `Q_n(k, α)` with the default guard.
pub fn lattice_sum(n: i32, k: f64, alpha: &BlochVector, tol: f64) -> Result<Complex64, LatticeError> {
    let table = lattice_sum_table(n.unsigned_abs() as usize, k, alpha, tol)?;
    Ok(table.get(n).expect("order inside table"))
}

/// All `Q_n`, `|n| <= order_max`, sharing one traversal of both lattices.
pub fn lattice_sum_table(
    order_max: usize,
    k: f64,
    alpha: &BlochVector,
    tol: f64,
) -> Result<LatticeSumTable, LatticeError> {
    LatticeSumTable::compute(order_max, k, alpha, &LatticeOptions::with_tol(tol))
}

/// Ewald splitting parameter; `√π` balances the two sums for a unit cell.
pub(crate) const EWALD_ETA: f64 = 1.772_453_850_905_516;

pub(crate) struct EwaldSums {
    pub values: Vec<Complex64>,
    pub errors: Vec<f64>,
    pub converged: bool,
}

/// Integer points with `max(|px|, |py|) == r`.
pub(crate) fn ring(r: i64) -> impl Iterator<Item = (i64, i64)> {
    let side: Box<dyn Iterator<Item = (i64, i64)>> = if r == 0 {
        Box::new(std::iter::once((0, 0)))
    } else {
        Box::new(
            (-r..=r)
                .flat_map(move |a| [(a, -r), (a, r)])
                .chain((-r + 1..r).flat_map(move |b| [(-r, b), (r, b)])),
        )
    };
    side
}

struct Accumulator {
    sum: Vec<Complex64>,
    abs: Vec<f64>,
}

impl Accumulator {
    fn new(len: usize) -> Self {
        Self { sum: vec![Complex64::new(0.0, 0.0); len], abs: vec![0.0; len] }
    }

    fn add(&mut self, i: usize, v: Complex64) {
        self.sum[i] += v;
        self.abs[i] += v.norm();
    }
}

fn ewald_sums(order_max: usize, k: f64, alpha: &BlochVector, budget: usize) -> EwaldSums {
    let big_l = order_max as i32;
    let len = 2 * order_max + 1;
    let center = order_max;
    let eta2 = EWALD_ETA * EWALD_ETA;
    let i = Complex64::new(0.0, 1.0);

    // reciprocal-space sum
    let mut spectral = Accumulator::new(len);
    let mut spectral_tail = vec![0.0; len];
    let mut converged_spec = false;
    let peak = 2.0 * EWALD_ETA * (order_max.max(2) as f64).sqrt() + k;
    for r in 0..=budget as i64 {
        let mut shell = Accumulator::new(len);
        for (px, py) in ring(r) {
            let qx = TAU * px as f64 + alpha.x;
            let qy = TAU * py as f64 + alpha.y;
            let q2 = qx * qx + qy * qy;
            let w = ((k * k - q2) / (4.0 * eta2)).exp() / (q2 - k * k);
            let zq = Complex64::new(qx, qy);
            let up = i * zq / k;
            let down = -i * zq.conj() / k;
            let mut pos = Complex64::new(w, 0.0);
            let mut neg = pos;
            shell.add(center, pos);
            for l in 1..=order_max {
                pos *= up;
                neg *= down;
                shell.add(center + l, pos);
                shell.add(center - l, neg);
            }
        }
        for idx in 0..len {
            spectral.sum[idx] += shell.sum[idx];
            spectral.abs[idx] += shell.abs[idx];
        }
        let q_min = TAU * r as f64 - PI * 2f64.sqrt();
        if r >= 2 && q_min > peak {
            let small = (0..len).all(|idx| shell.abs[idx] <= 1e-17 * spectral.abs[idx]);
            if small {
                spectral_tail.copy_from_slice(&shell.abs);
                converged_spec = true;
                break;
            }
        }
    }

    // direct-space sum, m ≠ 0
    let kk = k * k / (4.0 * eta2);
    let mut coeffs = vec![1.0];
    loop {
        let j = coeffs.len();
        let next = coeffs[j - 1] * kk / j as f64;
        coeffs.push(next);
        if j as f64 > kk && next < 1e-18 * coeffs.iter().cloned().fold(0.0, f64::max) {
            break;
        }
    }
    let j_max = coeffs.len() as i32 - 1;
    let mut direct = Accumulator::new(len);
    let mut direct_tail = vec![0.0; len];
    let mut converged_direct = false;
    for s in 1..=budget as i64 {
        let mut shell = Accumulator::new(len);
        for (mx, my) in ring(s) {
            let (mxf, myf) = (mx as f64, my as f64);
            let x = eta2 * (mxf * mxf + myf * myf);
            // E_n(x) for n = 1 - L ..= j_max + 1
            let e = expint_range(1 - big_l, j_max + 1, x);
            let at = |n: i32| e[(n - (1 - big_l)) as usize];
            let phase = Complex64::from_polar(1.0 / (4.0 * PI), mxf * alpha.x + myf * alpha.y);
            let mu = Complex64::new(mxf, myf);
            let up = 2.0 * eta2 * mu / k;
            let down = -2.0 * eta2 * mu.conj() / k;
            let mut pos = phase;
            let mut neg = phase;
            for p in 0..=big_l {
                let s_p: f64 = coeffs.iter().enumerate().map(|(j, c)| c * at(j as i32 + 1 - p)).sum();
                if p == 0 {
                    shell.add(center, pos * s_p);
                } else {
                    pos *= up;
                    neg *= down;
                    shell.add(center + p as usize, pos * s_p);
                    shell.add(center - p as usize, neg * s_p);
                }
            }
        }
        for idx in 0..len {
            direct.sum[idx] += shell.sum[idx];
            direct.abs[idx] += shell.abs[idx];
        }
        let x_min = eta2 * (s * s) as f64;
        if x_min > (order_max + j_max as usize + 2) as f64 {
            let small = (0..len).all(|idx| shell.abs[idx] <= 1e-17 * direct.abs[idx]);
            if small {
                direct_tail.copy_from_slice(&shell.abs);
                converged_direct = true;
                break;
            }
        }
    }

    // self term h(0) = lim_{r→0} [(i/4) H_0(kr) - (1/4π) Σ_j c_j E_{j+1}(r²η²)]
    let ein_like: f64 = coeffs.iter().enumerate().skip(1).map(|(j, c)| c / j as f64).sum();
    let h0 = Complex64::new(
        (-2.0 * (k / (2.0 * EWALD_ETA)).ln() - EULER_GAMMA - ein_like) / (4.0 * PI),
        0.25,
    );

    let scale = Complex64::new(0.0, -4.0);
    let mut values = Vec::with_capacity(len);
    let mut errors = Vec::with_capacity(len);
    for idx in 0..len {
        let mut g = spectral.sum[idx] + direct.sum[idx];
        if idx == center {
            g -= h0;
        }
        values.push(scale * g);
        let rounding = 32.0 * f64::EPSILON * (spectral.abs[idx] + direct.abs[idx] + h0.norm());
        errors.push(4.0 * (rounding + spectral_tail[idx] + direct_tail[idx]));
    }
    EwaldSums { values, errors, converged: converged_spec && converged_direct }
}
