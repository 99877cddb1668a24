//! Truncated multipole matrices of the single-layer potentials on a disk.
//!
//! Densities are expanded as `φ = Σ a_n e^{inθ}` (no normalization factor)
//! and every block is written in that basis, row index `m` for the Fourier
//! mode of the trace and column index `n` for the density mode, both running
//! over `-N..=N`. With `c = -iπR/2`:
//!
//! * free space, order `n`: trace `c J_n(kR) H_n(kR)`; interior normal
//!   derivative `c k H_n(kR) J_n'(kR)`; exterior `c k J_n(kR) H_n'(kR)`;
//! * quasi-periodic: the free-space diagonal plus the image contribution
//!   `c J_n(kR) (-1)^{n-m} Q_{n-m} J_m(kR)` (and `k J_m'(kR)` for the
//!   derivative).

use nalgebra::DMatrix;
use num_complex::Complex64;
use std::f64::consts::{PI, TAU};

use crate::error::OperatorError;
use crate::lattice::{ring, BlochVector, LatticeOptions, LatticeSumTable, EWALD_ETA};
use crate::expint::expint_range;
use crate::specfun::{CylSeq, EULER_GAMMA};

/// Densities and bulk moduli of the host fluid and of the bubbles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaterialParams {
    pub rho: f64,
    pub kappa: f64,
    pub rho_b: f64,
    pub kappa_b: f64,
}

impl MaterialParams {
    pub fn new(rho: f64, kappa: f64, rho_b: f64, kappa_b: f64) -> Result<Self, OperatorError> {
        for (name, v) in [("rho", rho), ("kappa", kappa), ("rho_b", rho_b), ("kappa_b", kappa_b)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(OperatorError::Material(format!("{name} = {v} must be positive")));
            }
        }
        Ok(Self { rho, kappa, rho_b, kappa_b })
    }

    /// Host density and modulus both equal to `contrast` times the bubble's.
    pub fn with_contrast(contrast: f64, rho_b: f64, kappa_b: f64) -> Result<Self, OperatorError> {
        Self::new(contrast * rho_b, contrast * kappa_b, rho_b, kappa_b)
    }

    /// Density contrast `ρ_b / ρ`.
    pub fn delta(&self) -> f64 {
        self.rho_b / self.rho
    }

    /// Sound speed in the host.
    pub fn v(&self) -> f64 {
        (self.kappa / self.rho).sqrt()
    }

    /// Sound speed in the bubble.
    pub fn v_b(&self) -> f64 {
        (self.kappa_b / self.rho_b).sqrt()
    }

    pub fn tau(&self) -> f64 {
        self.v() / self.v_b()
    }
}

/// One disk of radius `R` centred in the unit cell `[-1/2, 1/2]²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiskCrystal {
    radius: f64,
}

impl DiskCrystal {
    pub fn new(radius: f64) -> Result<Self, OperatorError> {
        if radius > 0.0 && radius < 0.5 {
            Ok(Self { radius })
        } else {
            Err(OperatorError::Radius(radius))
        }
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn area(&self) -> f64 {
        PI * self.radius * self.radius
    }
}

fn layer_constant(radius: f64) -> Complex64 {
    Complex64::new(0.0, -PI * radius / 2.0)
}

/// Free-space single layer at wavenumber `k_b` acting on `e^{inθ}`: the trace
/// on the circle and the interior normal derivative.
pub fn inner_block_diag(n: i32, k_b: f64, radius: f64) -> Result<(Complex64, Complex64), OperatorError> {
    let seq = CylSeq::new(n.unsigned_abs() as usize, k_b * radius)?;
    Ok(inner_from_seq(&seq, n, k_b, radius))
}

fn inner_from_seq(seq: &CylSeq, n: i32, k: f64, radius: f64) -> (Complex64, Complex64) {
    let c = layer_constant(radius);
    (c * seq.j(n) * seq.h(n), c * k * seq.h(n) * seq.dj(n))
}

/// Exterior normal derivative of the free-space single layer on `e^{inθ}`.
pub fn outer_free_derivative(n: i32, k: f64, radius: f64) -> Result<Complex64, OperatorError> {
    let seq = CylSeq::new(n.unsigned_abs() as usize, k * radius)?;
    Ok(layer_constant(radius) * k * seq.j(n) * seq.dh(n))
}

/// Entry `(m, n)` of the quasi-periodic single layer at the table's `(k, α)`:
/// trace and exterior normal derivative.
pub fn outer_block_entries(
    m: i32,
    n: i32,
    radius: f64,
    table: &LatticeSumTable,
) -> Result<(Complex64, Complex64), OperatorError> {
    let needed = (n - m).unsigned_abs() as usize;
    if needed > table.order_max {
        return Err(OperatorError::MissingLatticeOrder { needed, available: table.order_max });
    }
    let k = table.k;
    let order = m.unsigned_abs().max(n.unsigned_abs()) as usize;
    let seq = CylSeq::new(order, k * radius)?;
    Ok(outer_from_seq(&seq, m, n, k, radius, table))
}

fn outer_from_seq(
    seq: &CylSeq,
    m: i32,
    n: i32,
    k: f64,
    radius: f64,
    table: &LatticeSumTable,
) -> (Complex64, Complex64) {
    let c = layer_constant(radius);
    let sign = if (n - m).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    let q = table.get(n - m).expect("order checked by caller");
    let coupling = c * seq.j(n) * sign * q;
    let mut s = coupling * seq.j(m);
    let mut ds = coupling * k * seq.dj(m);
    if m == n {
        s += c * seq.j(n) * seq.h(n);
        ds += c * k * seq.j(n) * seq.dh(n);
    }
    (s, ds)
}

/// Dense realization of the boundary-integral operator in the harmonic
/// basis. Rows: continuity of the trace, then continuity of the scaled
/// flux. Columns: inner density coefficients, then outer ones.
#[derive(Debug, Clone)]
pub struct CharacteristicMatrix {
    pub omega: f64,
    pub alpha: BlochVector,
    pub truncation: usize,
    pub radius: f64,
    pub k: f64,
    pub k_b: f64,
    pub entries: DMatrix<Complex64>,
}

impl CharacteristicMatrix {
    pub fn size(&self) -> usize {
        self.entries.nrows()
    }
}

/// Assembles the characteristic matrix from explicit wavenumbers and density
/// contrast; `table` must hold `Q_n` for `|n| <= 2N` at wavenumber `k`.
pub fn assemble_blocks(
    omega: f64,
    k: f64,
    k_b: f64,
    delta: f64,
    radius: f64,
    truncation: usize,
    table: &LatticeSumTable,
) -> Result<CharacteristicMatrix, OperatorError> {
    if table.order_max < 2 * truncation {
        return Err(OperatorError::MissingLatticeOrder {
            needed: 2 * truncation,
            available: table.order_max,
        });
    }
    let n_max = truncation as i32;
    let size = 2 * truncation + 1;
    let inner = CylSeq::new(truncation, k_b * radius)?;
    let outer = CylSeq::new(truncation, k * radius)?;
    let mut a = DMatrix::<Complex64>::zeros(2 * size, 2 * size);
    for (col, n) in (-n_max..=n_max).enumerate() {
        let (s_in, ds_in) = inner_from_seq(&inner, n, k_b, radius);
        a[(col, col)] = s_in;
        a[(size + col, col)] = ds_in;
        for (row, m) in (-n_max..=n_max).enumerate() {
            let (s_out, ds_out) = outer_from_seq(&outer, m, n, k, radius, table);
            a[(row, size + col)] = -s_out;
            a[(size + row, size + col)] = -delta * ds_out;
        }
    }
    Ok(CharacteristicMatrix {
        omega,
        alpha: table.alpha,
        truncation,
        radius,
        k,
        k_b,
        entries: a,
    })
}

/// `A(ω, δ)` for the given material and crystal.
pub fn assemble_characteristic_matrix(
    omega: f64,
    mat: &MaterialParams,
    alpha: &BlochVector,
    crystal: &DiskCrystal,
    truncation: usize,
    opts: &LatticeOptions,
) -> Result<CharacteristicMatrix, OperatorError> {
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(OperatorError::Frequency(omega));
    }
    let k = omega / mat.v();
    let k_b = omega / mat.v_b();
    let table = LatticeSumTable::compute(2 * truncation, k, alpha, opts)?;
    assemble_blocks(omega, k, k_b, mat.delta(), crystal.radius(), truncation, &table)
}

/// Taylor coefficients of the regular part of the quasi-periodic Laplace
/// Green's function, `G(d) - (1/2π) ln|d| = β_0 + Σ_{l≥1} (β_l z^l + β_{-l} z̄^l)`
/// with `z = d_x + i d_y`; returned as `β_{-l_max} ..= β_{l_max}`.
///
/// Both halves of the Ewald splitting are differentiated in closed form, so
/// `budget` only caps the number of shells; convergence is Gaussian.
pub(crate) fn laplace_regular_coefficients(
    alpha: &BlochVector,
    l_max: usize,
    budget: usize,
) -> Vec<Complex64> {
    let len = 2 * l_max + 1;
    let center = l_max;
    let eta2 = EWALD_ETA * EWALD_ETA;
    let i = Complex64::new(0.0, 1.0);
    let mut acc = vec![Complex64::new(0.0, 0.0); len];

    let peak = 2.0 * EWALD_ETA * (l_max.max(2) as f64).sqrt();
    for r in 0..=budget as i64 {
        let mut shell_abs = 0.0f64;
        let mut total_abs = 0.0f64;
        for (px, py) in ring(r) {
            let qx = TAU * px as f64 + alpha.x();
            let qy = TAU * py as f64 + alpha.y();
            let q2 = qx * qx + qy * qy;
            let w = -(-q2 / (4.0 * eta2)).exp() / q2;
            let zq = Complex64::new(qx, qy);
            let up = i * zq.conj() / 2.0;
            let down = i * zq / 2.0;
            let mut pos = Complex64::new(w, 0.0);
            let mut neg = pos;
            acc[center] += pos;
            shell_abs += pos.norm();
            for l in 1..=l_max {
                pos *= up / l as f64;
                neg *= down / l as f64;
                acc[center + l] += pos;
                acc[center - l] += neg;
                shell_abs += pos.norm() + neg.norm();
            }
        }
        for v in &acc {
            total_abs += v.norm();
        }
        if r >= 2 && TAU * r as f64 - PI * 2f64.sqrt() > peak && shell_abs <= 1e-18 * total_abs {
            break;
        }
    }

    let lo = 1 - l_max as i32;
    for s in 1..=budget as i64 {
        let mut shell_abs = 0.0f64;
        for (mx, my) in ring(s) {
            let (x, y) = (mx as f64, my as f64);
            let arg = eta2 * (x * x + y * y);
            let e = expint_range(lo, 1, arg);
            let phase = -Complex64::from_polar(1.0 / (4.0 * PI), x * alpha.x() + y * alpha.y());
            let mu = Complex64::new(x, y);
            let up = eta2 * mu.conj();
            let down = eta2 * mu;
            let mut pos = phase;
            let mut neg = phase;
            let at = |l: usize| e[(1 - l as i32 - lo) as usize];
            acc[center] += pos * at(0);
            shell_abs += (pos * at(0)).norm();
            for l in 1..=l_max {
                pos *= up / l as f64;
                neg *= down / l as f64;
                acc[center + l] += pos * at(l);
                acc[center - l] += neg * at(l);
                shell_abs += (pos * at(l)).norm() + (neg * at(l)).norm();
            }
        }
        let total_abs: f64 = acc.iter().map(|v| v.norm()).sum();
        if arg_min(s, eta2) > (l_max + 2) as f64 && shell_abs <= 1e-18 * total_abs {
            break;
        }
    }

    acc[center] += (EULER_GAMMA + 2.0 * EWALD_ETA.ln()) / (4.0 * PI);
    acc
}

fn arg_min(s: i64, eta2: f64) -> f64 {
    eta2 * (s * s) as f64
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Matrix of the quasi-periodic single layer at zero frequency, `S_D^{α,0}`,
/// in the harmonic basis of the circle of radius `R`.
///
/// The logarithmic part of the kernel is projected exactly
/// (`R ln R` on order 0, `-R/(2|n|)` otherwise); the harmonic remainder is
/// projected through its Taylor coefficients, which couple `(m, n)` only
/// when `m` and `n` have opposite signs (or one vanishes).
pub fn quasistatic_matrix(
    alpha: &BlochVector,
    radius: f64,
    truncation: usize,
    cutoff: usize,
) -> Result<DMatrix<Complex64>, OperatorError> {
    if alpha.is_zero() {
        return Err(OperatorError::ZeroAlpha);
    }
    if !(radius > 0.0 && radius < 0.5) {
        return Err(OperatorError::Radius(radius));
    }
    let l_max = 2 * truncation;
    let beta = laplace_regular_coefficients(alpha, l_max, cutoff.max(20));
    let center = l_max as i32;
    let b = |l: i32| beta[(center + l) as usize];
    let n_max = truncation as i32;
    let size = 2 * truncation + 1;
    let mut s = DMatrix::<Complex64>::zeros(size, size);
    for (row, m) in (-n_max..=n_max).enumerate() {
        for (col, n) in (-n_max..=n_max).enumerate() {
            let mut v = Complex64::new(0.0, 0.0);
            if m == n {
                v += if n == 0 { radius * radius.ln() } else { -radius / (2.0 * n.abs() as f64) };
            }
            let parity = if n.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            if m >= 0 && n <= 0 {
                let l = (m - n) as usize;
                v += TAU * radius.powi(l as i32 + 1) * binomial(l, m as usize) * parity * b(l as i32);
            } else if m <= 0 && n >= 0 {
                let l = (n - m) as usize;
                v += TAU * radius.powi(l as i32 + 1) * binomial(l, n as usize) * parity * b(-(l as i32));
            }
            s[(row, col)] = v;
        }
    }
    Ok(s)
}
