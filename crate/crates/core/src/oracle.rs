//! Slow, transparent reference computations used only to check the fast
//! paths in the test suite: unaccelerated lattice sums, Nyström quadrature
//! of free-space layer potentials on the circle, and direct quadrature of
//! the quasi-periodic kernel.

use num_complex::Complex64;
use std::f64::consts::{PI, TAU};

use crate::error::LatticeError;
use crate::expint::{ein, expint};
use crate::lattice::{empty_lattice_margin, ring, BlochVector, LatticeOptions};
use crate::specfun::{bessel_j_seq, hankel1, EULER_GAMMA};

/// Equispaced nodes on `[0, 2π)` with trapezoid weights and the product
/// weights for a `ln(4 sin²((t - τ)/2))` factor centred at `t = 0`.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub log_weights: Vec<f64>,
}

impl QuadratureRule {
    /// Panics unless `node_count` is even and at least 64.
    pub fn new(node_count: usize) -> Self {
        assert!(node_count >= 64 && node_count.is_multiple_of(2), "need an even node count >= 64");
        let half = node_count / 2;
        let nodes: Vec<f64> = (0..node_count).map(|j| TAU * j as f64 / node_count as f64).collect();
        let weights = vec![TAU / node_count as f64; node_count];
        let log_weights = nodes
            .iter()
            .map(|&t| {
                let harmonics: f64 = (1..half).map(|m| (m as f64 * t).cos() / m as f64).sum();
                -TAU / half as f64 * harmonics - PI / (half * half) as f64 * (half as f64 * t).cos()
            })
            .collect();
        Self { nodes, weights, log_weights }
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }
}

/// Result of a Nyström evaluation with its node-doubling self-check.
#[derive(Debug, Clone, Copy)]
pub struct NystromValue {
    pub value: Complex64,
    pub self_convergence: f64,
    pub degraded: bool,
}

/// `-(i/4) H_0(kρ)` with the `(1/4π) J_0(kρ) ln(4 sin²(t/2))` part removed,
/// at chord length `ρ = 2R|sin(t/2)|`; the `t = 0` value is the limit.
fn helmholtz_smooth_kernel(t: f64, k: f64, radius: f64) -> Complex64 {
    let s2 = 4.0 * (t / 2.0).sin().powi(2);
    let rho = radius * s2.sqrt();
    if rho < 1e-14 * radius {
        return Complex64::new((EULER_GAMMA + (k * radius / 2.0).ln()) / TAU, -0.25);
    }
    let z = k * rho;
    let h0 = hankel1(0, z).expect("positive chord");
    let j0 = bessel_j_seq(0, z)[0];
    Complex64::new(0.0, -0.25) * h0 - j0 * s2.ln() / (4.0 * PI)
}

/// Samples of `S[e^{inθ}]` at the rule's nodes, where `S` is the free-space
/// Helmholtz single layer on the circle of radius `R`.
pub fn nystrom_apply(n: i32, k: f64, radius: f64, rule: &QuadratureRule) -> Vec<Complex64> {
    assert!(k * radius > 0.0, "nystrom oracle needs kR > 0");
    let count = rule.node_count();
    // the kernel depends on θ_x - θ_y only
    let row: Vec<(f64, Complex64)> = rule
        .nodes
        .iter()
        .map(|&t| {
            let rho = 2.0 * radius * (t / 2.0).sin().abs();
            let j0 = if rho == 0.0 { 1.0 } else { bessel_j_seq(0, k * rho)[0] };
            (j0 / (4.0 * PI), helmholtz_smooth_kernel(t, k, radius))
        })
        .collect();
    (0..count)
        .map(|i| {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 0..count {
                let offset = (i + count - j) % count;
                let (log_coef, smooth) = row[offset];
                let w = rule.log_weights[offset] * log_coef + rule.weights[j] * smooth;
                acc += w * Complex64::from_polar(1.0, n as f64 * rule.nodes[j]);
            }
            acc * radius
        })
        .collect()
}

/// Fourier coefficient of order `m` of nodal samples: `(1/N) Σ v_j e^{-imθ_j}`.
pub fn project_onto_order(values: &[Complex64], m: i32, rule: &QuadratureRule) -> Complex64 {
    let sum: Complex64 = values
        .iter()
        .zip(&rule.nodes)
        .map(|(v, &t)| v * Complex64::from_polar(1.0, -m as f64 * t))
        .sum();
    sum / values.len() as f64
}

/// Order-`n` diagonal of the free-space Helmholtz single layer on the circle,
/// by Nyström quadrature with logarithmic product weights. The value is
/// flagged as degraded if doubling the nodes moves it by more than `1e-7`.
pub fn nystrom_free_space(n: i32, k: f64, radius: f64, rule: &QuadratureRule) -> NystromValue {
    let coarse = project_onto_order(&nystrom_apply(n, k, radius, rule), n, rule);
    let fine_rule = QuadratureRule::new(2 * rule.node_count());
    let fine = project_onto_order(&nystrom_apply(n, k, radius, &fine_rule), n, &fine_rule);
    let self_convergence = (fine - coarse).norm();
    NystromValue { value: coarse, self_convergence, degraded: self_convergence > 1e-7 }
}

/// Samples of `S_0[e^{inθ}]` for the Laplace kernel `(1/2π) ln|x - y|`.
pub fn nystrom_laplace_apply(n: i32, radius: f64, rule: &QuadratureRule) -> Vec<Complex64> {
    let count = rule.node_count();
    (0..count)
        .map(|i| {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 0..count {
                let offset = (i + count - j) % count;
                let w = rule.log_weights[offset] / (4.0 * PI) + rule.weights[j] * radius.ln() / TAU;
                acc += w * Complex64::from_polar(1.0, n as f64 * rule.nodes[j]);
            }
            acc * radius
        })
        .collect()
}

/// Splitting parameter of the reference kernel, deliberately different
/// from the production lattice sums.
const REFERENCE_ETA: f64 = 4.0;
const REFERENCE_NODES: usize = 512;

/// Entry `(m, n)` of the quasi-periodic single layer at wavenumber `k`
/// (`k = 0` allowed for `α ≠ 0`), computed by 512-node trapezoid
/// quadrature in both angles of the kernel
/// `Σ_{q ∈ 2πℤ²+α} e^{iq·(x-y)} / (k² - |q|²)`.
///
/// The kernel is evaluated pointwise through its Gaussian splitting with
/// reciprocal terms restricted to `|q|_∞ <= 2π cutoff`; the `(1/2π) ln|x-y|`
/// singularity is projected in closed form.
pub fn spectral_reference_entry(
    m: i32,
    n: i32,
    k: f64,
    alpha: &BlochVector,
    radius: f64,
    cutoff: usize,
) -> Result<Complex64, LatticeError> {
    if !(k >= 0.0 && k.is_finite()) {
        return Err(LatticeError::BadWavenumber(k));
    }
    if k == 0.0 && alpha.is_zero() {
        return Err(LatticeError::BadWavenumber(k));
    }
    let guard = LatticeOptions::default().guard;
    if k > 0.0 {
        let margin = empty_lattice_margin(k, alpha);
        if margin <= guard {
            return Err(LatticeError::NearEmptyResonance { k, margin, guard });
        }
    }
    let count = REFERENCE_NODES;
    let theta: Vec<f64> = (0..count).map(|j| TAU * j as f64 / count as f64).collect();
    let pts: Vec<(f64, f64)> = theta.iter().map(|t| (radius * t.cos(), radius * t.sin())).collect();
    let eta2 = REFERENCE_ETA * REFERENCE_ETA;
    let k2 = k * k;

    let mut spectral = Complex64::new(0.0, 0.0);
    for r in 0..=cutoff as i64 {
        for (px, py) in ring(r) {
            let qx = TAU * px as f64 + alpha.x();
            let qy = TAU * py as f64 + alpha.y();
            let q2 = qx * qx + qy * qy;
            let w = ((k2 - q2) / (4.0 * eta2)).exp() / (k2 - q2);
            if w.abs() < 1e-300 {
                continue;
            }
            let mut a = Complex64::new(0.0, 0.0);
            let mut b = Complex64::new(0.0, 0.0);
            for (&(x, y), &t) in pts.iter().zip(&theta) {
                let phase = qx * x + qy * y;
                a += Complex64::from_polar(1.0, phase - m as f64 * t);
                b += Complex64::from_polar(1.0, n as f64 * t - phase);
            }
            spectral += w * a * b;
        }
    }
    spectral *= TAU * radius / (count * count) as f64;

    // c_j = (k²/4η²)^j / j! until negligible
    let mut coeffs = vec![1.0];
    while coeffs.len() < 60 {
        let j = coeffs.len();
        let next = coeffs[j - 1] * k2 / (4.0 * eta2) / j as f64;
        if next < 1e-18 {
            break;
        }
        coeffs.push(next);
    }
    let reach = (2.0 * radius + (41.0f64).sqrt() / REFERENCE_ETA).ceil() as i64;
    let images: Vec<(f64, f64, Complex64)> = (1..=reach)
        .flat_map(ring)
        .map(|(mx, my)| {
            let (x, y) = (mx as f64, my as f64);
            (x, y, Complex64::from_polar(1.0, x * alpha.x() + y * alpha.y()))
        })
        .collect();
    let constant = (EULER_GAMMA + 2.0 * REFERENCE_ETA.ln()) / (4.0 * PI);

    let mut spatial = Complex64::new(0.0, 0.0);
    for (i, &(xi, yi)) in pts.iter().enumerate() {
        let mut row = Complex64::new(0.0, 0.0);
        for (j, &(xj, yj)) in pts.iter().enumerate() {
            let (dx, dy) = (xi - xj, yi - yj);
            let arg0 = eta2 * (dx * dx + dy * dy);
            let mut g = Complex64::new(constant - ein(arg0) / (4.0 * PI), 0.0);
            for (jj, c) in coeffs.iter().enumerate().skip(1) {
                g -= c * expint(jj as i32 + 1, arg0) / (4.0 * PI);
            }
            for &(mx, my, phase) in &images {
                let (ex, ey) = (dx - mx, dy - my);
                let arg = eta2 * (ex * ex + ey * ey);
                if arg > 45.0 {
                    continue;
                }
                let tail: f64 = coeffs
                    .iter()
                    .enumerate()
                    .map(|(jj, c)| c * expint(jj as i32 + 1, arg))
                    .sum();
                g -= phase * tail / (4.0 * PI);
            }
            row += g * Complex64::from_polar(1.0, n as f64 * theta[j]);
        }
        spatial += row * Complex64::from_polar(1.0, -m as f64 * theta[i]);
    }
    spatial *= TAU * radius / (count * count) as f64;

    let log_part = if m != n {
        0.0
    } else if n == 0 {
        radius * radius.ln()
    } else {
        -radius / (2.0 * n.abs() as f64)
    };
    Ok(spectral + spatial + log_part)
}

const BRUTE_TAIL: usize = 40;

/// Raw lattice sum with an error estimate.
#[derive(Debug, Clone, Copy)]
pub struct BruteSum {
    pub value: Complex64,
    pub dispersion: f64,
}

/// `Q_n` summed shell by shell up to `shell_count` (≥ 100), with one
/// terminal Shanks-type extrapolation (Wynn's epsilon algorithm) over the
/// last `BRUTE_TAIL` shell partial sums. Above `k ≈ 2π` the partial sums
/// carry many undamped oscillation modes and a 20-term tail stalls near `1e-5`.
pub fn brute_lattice_sum(n: i32, k: f64, alpha: &BlochVector, shell_count: usize) -> BruteSum {
    assert!(shell_count >= 100, "brute lattice sum needs at least 100 shells");
    let mut partial = Vec::with_capacity(shell_count);
    let mut acc = Complex64::new(0.0, 0.0);
    for s in 1..=shell_count as i64 {
        for (mx, my) in ring(s) {
            let (x, y) = (mx as f64, my as f64);
            let r = x.hypot(y);
            let h = hankel1(n, k * r).expect("positive argument");
            let angle = n as f64 * y.atan2(x) + x * alpha.x() + y * alpha.y();
            acc += h * Complex64::from_polar(1.0, angle);
        }
        partial.push(acc);
    }
    let tail = &partial[partial.len() - BRUTE_TAIL..];
    let (value, dispersion) = wynn_epsilon(tail);
    BruteSum { value, dispersion }
}

/// Wynn's epsilon table over `seq`; returns the deepest even-column estimate
/// and the spread of the last few estimates as an error bar.
pub fn wynn_epsilon(seq: &[Complex64]) -> (Complex64, f64) {
    let n = seq.len();
    let mut prev = vec![Complex64::new(0.0, 0.0); n + 1];
    let mut cur: Vec<Complex64> = seq.to_vec();
    let mut estimates = vec![*cur.last().unwrap()];
    let mut column = 0;
    while cur.len() > 1 {
        let mut next = Vec::with_capacity(cur.len() - 1);
        for i in 0..cur.len() - 1 {
            let diff = cur[i + 1] - cur[i];
            if diff.norm() == 0.0 {
                return (cur[i + 1], spread(&estimates));
            }
            next.push(prev[i + 1] + diff.inv());
        }
        prev = cur;
        cur = next;
        column += 1;
        if column % 2 == 0 {
            estimates.push(*cur.last().unwrap());
        }
    }
    let best = *estimates.last().unwrap();
    (best, spread(&estimates))
}

fn spread(estimates: &[Complex64]) -> f64 {
    let m = estimates.len();
    if m < 2 {
        return f64::INFINITY;
    }
    let last = estimates[m - 1];
    estimates[m.saturating_sub(3)..m - 1].iter().map(|e| (e - last).norm()).fold(0.0, f64::max)
}
