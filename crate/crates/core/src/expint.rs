//! Generalized exponential integrals `E_n(x) = ∫_1^∞ e^{-xt} t^{-n} dt` for
//! integer `n` of either sign, as needed by the Ewald splittings.

use crate::specfun::EULER_GAMMA;

const EPS: f64 = 1e-16;

pub fn expint(n: i32, x: f64) -> f64 {
    if n <= 0 {
        return expint_nonpositive(n, x);
    }
    if x == 0.0 {
        return if n == 1 { f64::INFINITY } else { 1.0 / (n - 1) as f64 };
    }
    if x > 1.0 {
        continued_fraction(n, x)
    } else {
        series(n, x)
    }
}

/// `E_{-p}(x) = (e^{-x} + p E_{1-p}(x)) / x`, starting from `E_0 = e^{-x}/x`.
fn expint_nonpositive(n: i32, x: f64) -> f64 {
    let ex = (-x).exp();
    let mut e = ex / x;
    for p in 1..=(-n) {
        e = (ex + p as f64 * e) / x;
    }
    e
}

/// `E_n(x)` for `n` in `lo..=hi`, sharing work across orders.
pub fn expint_range(lo: i32, hi: i32, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity((hi - lo + 1) as usize);
    let ex = (-x).exp();
    let mut neg = ex / x;
    let mut neg_cache = vec![neg];
    for p in 1..=(-lo).max(0) {
        neg = (ex + p as f64 * neg) / x;
        neg_cache.push(neg);
    }
    for n in lo..=hi {
        if n <= 0 {
            out.push(neg_cache[(-n) as usize]);
        } else {
            out.push(expint(n, x));
        }
    }
    out
}

fn continued_fraction(n: i32, x: f64) -> f64 {
    let tiny = 1e-300;
    let nm1 = (n - 1) as f64;
    let mut b = x + n as f64;
    let mut c = 1.0 / tiny;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..500 {
        let a = -(i as f64) * (nm1 + i as f64);
        b += 2.0;
        d = 1.0 / (a * d + b);
        c = b + a / c;
        let del = c * d;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h * (-x).exp()
}

fn series(n: i32, x: f64) -> f64 {
    let nm1 = n - 1;
    let mut ans = if nm1 != 0 { 1.0 / nm1 as f64 } else { -x.ln() - EULER_GAMMA };
    let mut fact = 1.0;
    for i in 1..500 {
        fact *= -x / i as f64;
        let del = if i != nm1 {
            -fact / (i - nm1) as f64
        } else {
            let psi = -EULER_GAMMA + (1..=nm1).map(|k| 1.0 / k as f64).sum::<f64>();
            fact * (-x.ln() + psi)
        };
        ans += del;
        if del.abs() < ans.abs() * EPS {
            break;
        }
    }
    ans
}

/// Entire part of `E_1`: `Ein(x) = Σ_{j≥1} (-1)^{j+1} x^j / (j j!)`, so that
/// `E_1(x) = -γ - ln x + Ein(x)`.
pub fn ein(x: f64) -> f64 {
    if x > 1.0 {
        // the alternating series cancels badly past x = 1
        return expint(1, x) + EULER_GAMMA + x.ln();
    }
    let mut term = 1.0;
    let mut sum = 0.0;
    for j in 1..200 {
        term *= -x / j as f64;
        let add = -term / j as f64;
        sum += add;
        if add.abs() <= 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}
