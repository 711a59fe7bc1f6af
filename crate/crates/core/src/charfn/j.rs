//! The single-prime factor
//! J(u, v, w) = E[exp(2i(u·Re F + v·Im F))], F = −log(1 − wX), X uniform on the circle.

use super::coeffs::{neg_log1m, CoefficientTable};
use crate::error::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::{PI, TAU};

/// Periodic trapezoid rule with `n` nodes, using F(−θ) = conj F(θ).
pub fn j_trapezoid(u: f64, v: f64, w: f64, n: usize) -> Complex64 {
    let n = n.max(2);
    let f_at = |theta: f64| -> Complex64 {
        let (s, c) = theta.sin_cos();
        -Complex64::new(1.0 - w * c, -w * s).ln()
    };
    let mut acc = Complex64::new(0.0, 0.0);
    // θ = 0 and, for even n, θ = π are their own mirror images
    let f0 = f_at(0.0);
    acc += Complex64::from_polar(1.0, 2.0 * (u * f0.re + v * f0.im));
    let half = (n - 1) / 2;
    for j in 1..=half {
        let f = f_at(TAU * j as f64 / n as f64);
        acc += Complex64::from_polar(2.0 * (2.0 * v * f.im).cos(), 2.0 * u * f.re);
    }
    if n % 2 == 0 {
        let f = f_at(PI);
        acc += Complex64::from_polar(1.0, 2.0 * (u * f.re + v * f.im));
    }
    acc / n as f64
}

/// J by node doubling until successive trapezoid values differ by < 1e-12.
pub fn j_quadrature(u: f64, v: f64, w: f64) -> Result<Complex64> {
    if !(w > 0.0 && w < 1.0) {
        return Err(Error::Domain(format!("w = {w} must lie in (0, 1)")));
    }
    let mut n = 16;
    let mut prev = j_trapezoid(u, v, w, n);
    while n < 1 << 22 {
        n *= 2;
        let next = j_trapezoid(u, v, w, n);
        if (next - prev).norm() < 1e-12 {
            return Ok(next);
        }
        prev = next;
    }
    Err(Error::Precision { target: 1e-12, achieved: f64::NAN })
}

/// Node count making the trapezoid error below `tol` for every |z| ≤ `z_abs`.
///
/// The integrand extends analytically to the strip |Im θ| < η for w·e^η < 1,
/// where it is bounded by exp(2|z|·L(η)), L(η) = −log(1 − w e^η); the
/// trapezoid error is then ≤ 2·exp(2|z|L(η) − Nη). η is optimised on a grid.
pub fn j_nodes(z_abs: f64, w: f64, tol: f64) -> usize {
    let eta_max = -w.ln();
    let log_tol = -(tol / 2.0).ln();
    let mut best = f64::INFINITY;
    for i in 1..200 {
        let eta = eta_max * i as f64 / 200.0;
        let lam = neg_log1m(w * eta.exp());
        let n = (2.0 * z_abs * lam + log_tol) / eta;
        best = best.min(n);
    }
    (best.ceil() as usize).max(8)
}

/// J with an a-priori node count for error ≤ 1e-15.
pub fn j_fast(u: f64, v: f64, w: f64) -> Complex64 {
    j_trapezoid(u, v, w, j_nodes(u.hypot(v), w, 1e-15))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeriesValue {
    pub value: Complex64,
    pub tail_bound: f64,
}

pub const SERIES_TOLERANCE: f64 = 1e-9;

/// J from the truncated double series Σ_{k,l≤K} i^{k+l} a_{k,l} z^k z̄^l/(k!l!).
///
/// With x = |z|·(−log(1−w)) ≥ |z|·|F|, the omitted terms are bounded by
/// 2eˣ·Σ_{n>K} xⁿ/n!; the a_{k,l} truncation error is added on top.
pub fn j_series(u: f64, v: f64, table: &CoefficientTable) -> Result<SeriesValue> {
    let z = Complex64::new(u, v);
    let r = z.norm();
    let kk = table.k_max;
    let x = r * neg_log1m(table.w);
    let mut tail = 0.0;
    let mut term = 1.0;
    for n in 1..=kk + 40 {
        term *= x / n as f64;
        if n > kk {
            tail += term;
        }
    }
    let mut bound = 2.0 * x.exp() * tail;
    let mut zk = vec![Complex64::new(1.0, 0.0); kk + 1];
    let mut zbl = vec![Complex64::new(1.0, 0.0); kk + 1];
    let mut fact = vec![1.0; kk + 1];
    for n in 1..=kk {
        zk[n] = zk[n - 1] * z;
        zbl[n] = zbl[n - 1] * z.conj();
        fact[n] = fact[n - 1] * n as f64;
    }
    let i_pow = [
        Complex64::new(1.0, 0.0),
        Complex64::new(0.0, 1.0),
        Complex64::new(-1.0, 0.0),
        Complex64::new(0.0, -1.0),
    ];
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 0..=kk {
        for l in 0..=kk {
            let c = table.a[k][l] / (fact[k] * fact[l]);
            acc += i_pow[(k + l) % 4] * c * zk[k] * zbl[l];
            if k + l > 0 {
                bound += table.a_tail_bound(k, l) * r.powi((k + l) as i32) / (fact[k] * fact[l]);
            }
        }
    }
    if bound > SERIES_TOLERANCE {
        return Err(Error::TailTooLarge { bound, tolerance: SERIES_TOLERANCE });
    }
    Ok(SeriesValue { value: acc, tail_bound: bound })
}
