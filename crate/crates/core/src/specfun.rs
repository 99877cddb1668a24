//! Cylindrical Bessel and Hankel functions of integer order.
//!
//! `J_n` is computed by Miller's downward recurrence normalized with
//! `J_0 + 2 Σ J_{2k} = 1`, which is stable for every order and argument.
//! `Y_0` and `Y_1` come from Neumann series in those same `J` values and
//! `Y_n` is then carried upward, the stable direction for the second kind.
//! For large arguments the Hankel function has a cheap asymptotic path.

use num_complex::Complex64;
use std::f64::consts::{FRAC_2_PI, FRAC_PI_2, FRAC_PI_4, PI};

use crate::error::SpecFunError;

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

const RESCALE_LIMIT: f64 = 1e250;
// complex division squares the modulus of the divisor
const COMPLEX_RESCALE_LIMIT: f64 = 1e100;

/// Largest imaginary part accepted by the complex evaluation.
pub const COMPLEX_MAX_IMAG: f64 = 1.0;
/// Largest modulus accepted by the complex evaluation.
pub const COMPLEX_MAX_ABS: f64 = 30.0;

/// Which cylinder function a derivative is requested for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CylKind {
    J,
    H1,
}

fn miller_start(order_max: usize, x: f64) -> usize {
    let m = order_max.max(x.ceil() as usize);
    let start = m + 20 + (40.0 * m as f64).sqrt() as usize;
    start + (start & 1)
}

/// `J_0(x) ..= J_start(x)` with `start` the Miller starting index, so that
/// the tail is available to the Neumann series for `Y`.
fn miller_full(order_max: usize, x: f64) -> Vec<f64> {
    let start = miller_start(order_max, x);
    let mut j = vec![0.0; start + 2];
    j[start] = 1e-30;
    let mut k = start;
    while k > 0 {
        let next = (2.0 * k as f64 / x) * j[k] - j[k + 1];
        j[k - 1] = next;
        if next.abs() > RESCALE_LIMIT {
            for v in j[k - 1..].iter_mut() {
                *v /= RESCALE_LIMIT;
            }
        }
        k -= 1;
    }
    let mut norm = j[0];
    let mut i = 2;
    while i <= start {
        norm += 2.0 * j[i];
        i += 2;
    }
    j.truncate(start + 1);
    for v in j.iter_mut() {
        *v /= norm;
    }
    j
}

/// `J_0(x) ..= J_{order_max}(x)`.
pub fn bessel_j_seq(order_max: usize, x: f64) -> Vec<f64> {
    if x == 0.0 {
        let mut out = vec![0.0; order_max + 1];
        out[0] = 1.0;
        return out;
    }
    if x < 0.0 {
        // J_n(-x) = (-1)^n J_n(x)
        let mut out = bessel_j_seq(order_max, -x);
        for (n, v) in out.iter_mut().enumerate() {
            if n % 2 == 1 {
                *v = -*v;
            }
        }
        return out;
    }
    let mut j = miller_full(order_max, x);
    j.truncate(order_max + 1);
    j
}

fn neumann_y01(j: &[f64], x: f64) -> (f64, f64) {
    let lg = (0.5 * x).ln() + EULER_GAMMA;
    let mut sum0 = 0.0;
    let mut sum1 = 0.0;
    let mut k = 1;
    while 2 * k + 1 < j.len() {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        sum0 += sign * j[2 * k] / k as f64;
        sum1 += sign * (j[2 * k - 1] - j[2 * k + 1]) / (2 * k) as f64;
        k += 1;
    }
    let y0 = FRAC_2_PI * lg * j[0] - 2.0 * FRAC_2_PI * sum0;
    // Y_1 = -Y_0', differentiating the series term by term.
    let dy0 = FRAC_2_PI * (j[0] / x - lg * j[1]) - 2.0 * FRAC_2_PI * sum1;
    (y0, -dy0)
}

fn upward_y(order_max: usize, x: f64, y0: f64, y1: f64) -> Vec<f64> {
    let mut y = Vec::with_capacity(order_max + 1);
    y.push(y0);
    if order_max == 0 {
        return y;
    }
    y.push(y1);
    for n in 1..order_max {
        let prev = y[n];
        let next = if prev.is_finite() {
            (2.0 * n as f64 / x) * prev - y[n - 1]
        } else {
            prev
        };
        y.push(next);
    }
    y
}

/// `Y_0(x) ..= Y_{order_max}(x)` for `x > 0`.
///
/// Orders whose magnitude exceeds the floating-point range come back as
/// infinities of the correct sign.
pub fn bessel_y_seq(order_max: usize, x: f64) -> Result<Vec<f64>, SpecFunError> {
    if !(x > 0.0) {
        return Err(SpecFunError::Domain { x });
    }
    let j = miller_full(order_max.max(1), x);
    let (y0, y1) = neumann_y01(&j, x);
    Ok(upward_y(order_max, x, y0, y1))
}

/// Hankel function of the first kind `H_n^{(1)}(x) = J_n(x) + i Y_n(x)`.
pub fn hankel1(n: i32, x: f64) -> Result<Complex64, SpecFunError> {
    if !(x > 0.0) {
        return Err(SpecFunError::Domain { x });
    }
    let order = n.unsigned_abs() as usize;
    let value = if use_asymptotic(order, x) {
        hankel1_asymptotic(order, x)
    } else {
        let seq = CylSeq::new(order, x)?;
        seq.h(order as i32)
    };
    Ok(if n < 0 && order % 2 == 1 { -value } else { value })
}

fn use_asymptotic(order: usize, x: f64) -> bool {
    x >= 30.0 && x >= (order * order) as f64
}

/// Hankel's large-argument expansion; only called when `x >= max(30, n^2)`,
/// where the smallest term is far below double precision.
fn hankel1_asymptotic(order: usize, x: f64) -> Complex64 {
    let mu = 4.0 * (order * order) as f64;
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    let mut prev_abs = f64::INFINITY;
    for k in 1..60 {
        let odd = (2 * k - 1) as f64;
        term *= Complex64::new(0.0, 1.0) * ((mu - odd * odd) / (k as f64 * 8.0 * x));
        let a = term.norm();
        if a > prev_abs {
            break;
        }
        sum += term;
        prev_abs = a;
        if a < 1e-17 * sum.norm() {
            break;
        }
    }
    let chi = x - order as f64 * FRAC_PI_2 - FRAC_PI_4;
    (2.0 / (PI * x)).sqrt() * Complex64::from_polar(1.0, chi) * sum
}

/// Derivative of `J_n` or `H_n^{(1)}` at `x > 0`.
pub fn cyl_derivative(kind: CylKind, n: i32, x: f64) -> Result<Complex64, SpecFunError> {
    let seq = CylSeq::new(n.unsigned_abs() as usize + 1, x)?;
    Ok(match kind {
        CylKind::J => Complex64::new(seq.dj(n), 0.0),
        CylKind::H1 => seq.dh(n),
    })
}

/// Values of `J_n` and `Y_n` at a fixed positive argument, orders
/// `0..=order_max + 1` so that derivatives up to `order_max` are available.
#[derive(Debug, Clone)]
pub struct CylSeq {
    pub order_max: usize,
    pub argument: f64,
    pub values_j: Vec<f64>,
    pub values_y: Vec<f64>,
}

impl CylSeq {
    pub fn new(order_max: usize, x: f64) -> Result<Self, SpecFunError> {
        if !(x > 0.0) {
            return Err(SpecFunError::Domain { x });
        }
        let full = miller_full(order_max + 1, x);
        let (y0, y1) = neumann_y01(&full, x);
        let values_y = upward_y(order_max + 1, x, y0, y1);
        let mut values_j = full;
        values_j.truncate(order_max + 2);
        Ok(Self { order_max, argument: x, values_j, values_y })
    }

    fn sign(n: i32) -> f64 {
        if n < 0 && n % 2 != 0 {
            -1.0
        } else {
            1.0
        }
    }

    fn index(&self, n: i32) -> usize {
        let i = n.unsigned_abs() as usize;
        assert!(i <= self.order_max + 1, "order {n} outside the computed range");
        i
    }

    pub fn j(&self, n: i32) -> f64 {
        Self::sign(n) * self.values_j[self.index(n)]
    }

    pub fn y(&self, n: i32) -> f64 {
        Self::sign(n) * self.values_y[self.index(n)]
    }

    pub fn h(&self, n: i32) -> Complex64 {
        Complex64::new(self.j(n), self.y(n))
    }

    pub fn dj(&self, n: i32) -> f64 {
        0.5 * (self.j(n - 1) - self.j(n + 1))
    }

    pub fn dy(&self, n: i32) -> f64 {
        0.5 * (self.y(n - 1) - self.y(n + 1))
    }

    pub fn dh(&self, n: i32) -> Complex64 {
        Complex64::new(self.dj(n), self.dy(n))
    }
}

/// `J_0(z) ..= J_{order_max}(z)` for complex `z` close to the real axis
/// (`|Im z| <= 1`, `|z| <= 30`), by the same normalized downward recurrence.
pub fn bessel_j_seq_complex(order_max: usize, z: Complex64) -> Result<Vec<Complex64>, SpecFunError> {
    if z.im.abs() > COMPLEX_MAX_IMAG || z.norm() > COMPLEX_MAX_ABS {
        return Err(SpecFunError::ComplexRange { re: z.re, im: z.im });
    }
    if z.norm() == 0.0 {
        let mut out = vec![Complex64::new(0.0, 0.0); order_max + 1];
        out[0] = Complex64::new(1.0, 0.0);
        return Ok(out);
    }
    let start = miller_start(order_max, z.norm() + 2.0);
    let mut j = vec![Complex64::new(0.0, 0.0); start + 2];
    j[start] = Complex64::new(1e-30, 0.0);
    for k in (1..=start).rev() {
        let next = (2.0 * k as f64 / z) * j[k] - j[k + 1];
        j[k - 1] = next;
        if next.norm() > COMPLEX_RESCALE_LIMIT {
            for v in j[k - 1..].iter_mut() {
                *v /= COMPLEX_RESCALE_LIMIT;
            }
        }
    }
    let mut norm = j[0];
    for i in (2..=start).step_by(2) {
        norm += 2.0 * j[i];
    }
    j.truncate(order_max + 1);
    for v in j.iter_mut() {
        *v /= norm;
    }
    Ok(j)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Ascending power series, only trusted for small arguments.
    fn j_series(n: u32, x: f64) -> f64 {
        let mut term = (0.5 * x).powi(n as i32) / (1..=n).map(f64::from).product::<f64>();
        let mut sum = term;
        for k in 1..30 {
            term *= -(0.25 * x * x) / (k as f64 * (k + n) as f64);
            sum += term;
        }
        sum
    }

    /// Y_0 from its ascending series.
    fn y0_series(x: f64) -> f64 {
        let mut term = 1.0;
        let mut harmonic = 0.0;
        let mut sum = 0.0;
        for k in 1..30 {
            term *= -(0.25 * x * x) / (k as f64 * k as f64);
            harmonic += 1.0 / k as f64;
            sum += -term * harmonic;
        }
        FRAC_2_PI * (((0.5 * x).ln() + EULER_GAMMA) * j_series(0, x) + sum)
    }

    #[test]
    fn j_values_against_series() {
        assert!((bessel_j_seq(0, 1.0)[0] - 0.765_197_686_6).abs() < 1e-10);
        assert!((bessel_j_seq(0, 1.0)[0] - j_series(0, 1.0)).abs() < 1e-14);
        let j = bessel_j_seq(3, 2.0);
        assert!((j[3] - 0.128_943_249_5).abs() < 1e-10);
        for n in 0..=3 {
            assert!((j[n] - j_series(n as u32, 2.0)).abs() < 1e-14);
        }
    }

    #[test]
    fn j_at_zero_is_kronecker() {
        assert_eq!(bessel_j_seq(2, 0.0), vec![1.0, 0.0, 0.0]);
    }

    #[test]
    fn y_values_against_series() {
        let y = bessel_y_seq(1, 1.0).unwrap();
        assert!((y[0] - 0.088_256_964_2).abs() < 1e-10);
        assert!((y[0] - y0_series(1.0)).abs() < 1e-13);
        let y = bessel_y_seq(1, 2.0).unwrap();
        assert!((y[1] + 0.107_032_431_5).abs() < 1e-10);
    }

    #[test]
    fn y_rejects_nonpositive_and_overflows_to_infinity() {
        assert!(bessel_y_seq(3, 0.0).is_err());
        assert!(bessel_y_seq(3, -1.0).is_err());
        let y = bessel_y_seq(200, 1e-3).unwrap();
        assert!(y.iter().all(|v| !v.is_nan()));
        assert_eq!(*y.last().unwrap(), f64::NEG_INFINITY);
    }

    #[test]
    fn hankel_values() {
        let h = hankel1(0, 1.0).unwrap();
        assert!((h - Complex64::new(0.765_197_686_6, 0.088_256_964_2)).norm() < 1e-10);
        let h = hankel1(1, 2.0).unwrap();
        assert!((h - Complex64::new(0.576_724_807_8, -0.107_032_431_5)).norm() < 1e-10);
        let y = bessel_y_seq(4, 3.5).unwrap();
        assert_eq!(hankel1(4, 3.5).unwrap().im, y[4]);
        assert_eq!(hankel1(-3, 3.5).unwrap(), -hankel1(3, 3.5).unwrap());
    }

    #[test]
    fn asymptotic_branch_matches_recurrence() {
        for &x in &[30.0, 50.0, 300.0] {
            for n in 0..5 {
                let seq = CylSeq::new(n, x).unwrap();
                let a = hankel1_asymptotic(n, x);
                assert!((a - seq.h(n as i32)).norm() < 1e-13, "n={n} x={x}");
            }
        }
    }

    #[test]
    fn derivative_identities() {
        for &x in &[0.3, 2.0, 17.0] {
            let seq = CylSeq::new(2, x).unwrap();
            assert!((cyl_derivative(CylKind::J, 0, x).unwrap().re + seq.j(1)).abs() < 1e-15);
        }
        let x: f64 = 2.0;
        for n in 0..8 {
            let seq = CylSeq::new(n, x).unwrap();
            let n = n as i32;
            let w = seq.j(n) * seq.dy(n) - seq.dj(n) * seq.y(n);
            assert!((w - 2.0 / (PI * x)).abs() < 1e-12);
        }
        let step = 1e-6;
        let fd = (hankel1(1, 1.0 + step).unwrap() - hankel1(1, 1.0 - step).unwrap()) / (2.0 * step);
        assert!((cyl_derivative(CylKind::H1, 1, 1.0).unwrap() - fd).norm() < 1e-7);
    }

    #[test]
    fn complex_matches_real_axis() {
        for &x in &[0.01, 1.0, 7.5, 29.0] {
            let real = bessel_j_seq(12, x);
            let cplx = bessel_j_seq_complex(12, Complex64::new(x, 0.0)).unwrap();
            for (a, b) in real.iter().zip(&cplx) {
                assert!((a - b.re).abs() < 1e-12 && b.im.abs() < 1e-12, "x={x}: {a} vs {b}");
            }
        }
        assert!(bessel_j_seq_complex(3, Complex64::new(1.0, 2.0)).is_err());
    }

    #[test]
    fn complex_satisfies_recurrence() {
        let z = Complex64::new(2.5, 0.7);
        let j = bessel_j_seq_complex(10, z).unwrap();
        for n in 1..10 {
            let r = j[n - 1] + j[n + 1] - (2.0 * n as f64 / z) * j[n];
            assert!(r.norm() < 1e-12);
        }
    }
}
