//! ζ(s) by Euler–Maclaurin summation, log ζ by horizontal continuation, and
//! the prime-power Dirichlet polynomial R_Y(s).

use crate::error::{Error, Result};
use crate::primes::PrimeTable;
use crate::summation::ComplexSum;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};
use std::io::Write;
use std::sync::OnceLock;

pub const SIGMA_MIN: f64 = 0.4;
pub const SIGMA_MAX: f64 = 10.0;
pub const T_MAX: f64 = 1e7;

const MAX_BERNOULLI: usize = 60;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexPoint {
    pub sigma: f64,
    pub t: f64,
}

impl ComplexPoint {
    pub fn new(sigma: f64, t: f64) -> Self {
        Self { sigma, t }
    }

    pub fn s(&self) -> Complex64 {
        Complex64::new(self.sigma, self.t)
    }

    fn check(&self) -> Result<()> {
        if !(self.sigma.is_finite() && self.t.is_finite())
            || !(SIGMA_MIN..=SIGMA_MAX).contains(&self.sigma)
            || self.t.abs() > T_MAX
        {
            return Err(Error::Domain(format!(
                "s = {} + {}i outside [{SIGMA_MIN}, {SIGMA_MAX}] x [-1e7, 1e7]",
                self.sigma, self.t
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ZetaValue {
    pub value: Complex64,
    /// Euler–Maclaurin remainder bound.
    pub truncation: f64,
    /// Heuristic floating-point error estimate of the main sum.
    pub rounding: f64,
    pub terms: usize,
}

impl ZetaValue {
    pub fn error_bound(&self) -> f64 {
        self.truncation + self.rounding
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogZetaSample {
    pub point: ComplexPoint,
    pub log_zeta: Complex64,
    pub zeta: Complex64,
    pub branch_ok: bool,
}

/// B_{2k}/(2k)! for k = 1..=MAX_BERNOULLI, via (−1)^{k+1}·2ζ(2k)/(2π)^{2k}.
fn bernoulli_ratios() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        (1..=MAX_BERNOULLI)
            .map(|k| {
                let e = 2 * k;
                let z = match e {
                    2 => PI * PI / 6.0,
                    4 => PI.powi(4) / 90.0,
                    6 => PI.powi(6) / 945.0,
                    _ => {
                        let m = 40.0f64;
                        let head: f64 = (1..40).rev().map(|n| (n as f64).powi(-(e as i32))).sum();
                        head + m.powi(1 - e as i32) / (e as f64 - 1.0) + 0.5 * m.powi(-(e as i32))
                    }
                };
                let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
                sign * 2.0 * z / TAU.powi(e as i32)
            })
            .collect()
    })
}

/// Main-sum data for a fixed height t: ln n and n^{-it} for n < N.
///
/// Reusing this across many σ makes a horizontal sweep cost one real
/// exponential per term.
#[derive(Clone, Debug)]
pub struct LineEvaluator {
    t: f64,
    n: usize,
    ln_n: Vec<f64>,
    phases: Vec<Complex64>,
}

fn default_terms(sigma: f64, t: f64) -> usize {
    let modulus = Complex64::new(sigma, t).norm().max(20.0);
    (1.4 * modulus / TAU).ceil() as usize + 10
}

impl LineEvaluator {
    /// Evaluator adequate for every σ in [`SIGMA_MIN`, `sigma_max`] at height `t`.
    pub fn new(t: f64, sigma_max: f64) -> Self {
        Self::with_terms(t, default_terms(sigma_max, t))
    }

    pub fn with_terms(t: f64, n: usize) -> Self {
        let n = n.max(2);
        let mut ln_n = Vec::with_capacity(n);
        let mut phases = Vec::with_capacity(n);
        for k in 1..n {
            let l = (k as f64).ln();
            let (sn, cs) = (t * l).sin_cos();
            ln_n.push(l);
            phases.push(Complex64::new(cs, -sn));
        }
        Self { t, n, ln_n, phases }
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn terms(&self) -> usize {
        self.n
    }

    /// ζ(σ + it) with Bernoulli corrections added until the remainder bound
    /// falls below `target` or stops shrinking.
    pub fn eval(&self, sigma: f64, target: f64) -> ZetaValue {
        let s = Complex64::new(sigma, self.t);
        let mut main = ComplexSum::new();
        for (l, ph) in self.ln_n.iter().zip(&self.phases) {
            main.add(ph * (-sigma * l).exp());
        }
        let nf = self.n as f64;
        let ln_nf = nf.ln();
        let n_pow = (-s * ln_nf).exp(); // N^{-s}
        let mut acc = main.value() + n_pow * nf / (s - 1.0) + 0.5 * n_pow;

        let b = bernoulli_ratios();
        let mut v = s * (b[0] / nf); // c_1 · s / N
        let mut truncation = f64::INFINITY;
        for k in 1..=MAX_BERNOULLI {
            let term = v * n_pow;
            // next term, used both as the correction and for the remainder bound
            let kf = k as f64;
            let next = if k < MAX_BERNOULLI {
                v * (b[k] / b[k - 1]) * (s + 2.0 * kf - 1.0) * (s + 2.0 * kf) / (nf * nf)
            } else {
                Complex64::new(f64::INFINITY, 0.0)
            };
            acc += term;
            let bound = (next * n_pow).norm() * (s + 2.0 * kf + 1.0).norm() / (sigma + 2.0 * kf + 1.0);
            if bound < truncation {
                truncation = bound;
            } else {
                // asymptotic series has started to diverge; undo and stop
                acc -= term;
                break;
            }
            if truncation < 0.25 * target {
                break;
            }
            v = next;
        }

        let sq = if (2.0 * sigma - 1.0).abs() < 1e-9 {
            1.0 + ln_nf
        } else {
            1.0 + (nf.powf(1.0 - 2.0 * sigma) - 1.0) / (1.0 - 2.0 * sigma)
        };
        let rounding = f64::EPSILON * (self.t.abs() * ln_nf + 10.0) * sq.max(1.0).sqrt()
            + f64::EPSILON * acc.norm();
        ZetaValue { value: acc, truncation, rounding, terms: self.n }
    }
}

/// ζ(s) with its error budget; no validity-box check, but rejects the pole.
pub fn zeta_detailed(s: Complex64, target: f64) -> Result<ZetaValue> {
    if (s - 1.0).norm() < 1e-12 {
        return Err(Error::Pole);
    }
    let mut n = default_terms(s.re, s.im);
    let mut best: Option<ZetaValue> = None;
    for _ in 0..8 {
        let v = LineEvaluator::with_terms(s.im, n).eval(s.re, target);
        if v.error_bound() <= target {
            return Ok(v);
        }
        let rounding_bound = v.truncation < v.rounding;
        if best.is_none_or(|b| v.error_bound() < b.error_bound()) {
            best = Some(v);
        }
        if rounding_bound {
            break;
        }
        n = n * 3 / 2 + 10;
    }
    Err(Error::Precision { target, achieved: best.map_or(f64::INFINITY, |b| b.error_bound()) })
}

/// ζ at a point of the validity box, to within `precision_target`.
pub fn zeta(point: ComplexPoint, precision_target: f64) -> Result<Complex64> {
    point.check()?;
    zeta_detailed(point.s(), precision_target).map(|v| v.value)
}

/// ζ'(s) from a 16-point trapezoid on a circle of radius r ≤ 0.01 around s;
/// each ζ value is computed to `target`, so the result is good to about target/r.
pub fn zeta_derivative(s: Complex64, target: f64) -> Result<Complex64> {
    let dist = (s - 1.0).norm();
    if dist < 1e-9 {
        return Err(Error::Pole);
    }
    let r = (0.5 * dist).min(0.01);
    let m = 16;
    let mut acc = ComplexSum::new();
    for j in 0..m {
        let e = Complex64::from_polar(1.0, TAU * j as f64 / m as f64);
        acc.add(zeta_detailed(s + e * r, target)?.value / e);
    }
    Ok(acc.value() / (m as f64 * r))
}

/// log ζ(σ+it) continued leftward along Im s = t from the principal branch
/// at Re s = 2 (where |ζ − 1| < 1, so this agrees with continuation from any
/// larger real part).
///
/// Steps are halved whenever the argument moves by more than π/4; the
/// sample is flagged when |ζ| gets too small on the path or the step
/// underflows.
pub fn log_zeta_track(sigma: f64, t: f64, precision_target: f64) -> Result<LogZetaSample> {
    let point = ComplexPoint::new(sigma, t);
    point.check()?;
    let line = LineEvaluator::new(t, sigma.max(2.0));
    Ok(track_on_line(&line, sigma, precision_target))
}

const START_SIGMA: f64 = 2.0;
const ZERO_THRESHOLD: f64 = 1e-6;
const MIN_STEP: f64 = 1e-7;

fn track_on_line(line: &LineEvaluator, sigma: f64, target: f64) -> LogZetaSample {
    let t = line.t();
    let point = ComplexPoint::new(sigma, t);
    let eval = |x: f64| line.eval(x, target).value;
    let start = sigma.max(START_SIGMA);
    let z0 = eval(start);
    let mut log = z0.ln();
    if sigma >= START_SIGMA {
        return LogZetaSample { point, log_zeta: log, zeta: z0, branch_ok: true };
    }
    let mut x = start;
    let mut z = z0;
    let mut h: f64 = 0.25;
    let mut ok = true;
    while x > sigma {
        let step = h.min(x - sigma);
        let x_next = if step == x - sigma { sigma } else { x - step };
        let z_next = eval(x_next);
        if z_next.norm() < ZERO_THRESHOLD {
            ok = false;
            z = z_next;
            x = x_next;
            continue;
        }
        let d = (z_next / z).arg();
        if d.abs() > PI / 4.0 {
            if h * 0.5 < MIN_STEP {
                ok = false;
            } else {
                h *= 0.5;
                continue;
            }
        }
        log.im += d;
        x = x_next;
        z = z_next;
        if d.abs() < PI / 16.0 {
            h = (h * 2.0).min(0.25);
        }
    }
    log.re = z.norm().ln();
    LogZetaSample { point, log_zeta: log, zeta: z, branch_ok: ok }
}

/// Samples at fixed σ for many heights, in input order.
pub fn sample_log_zeta_batch(sigma: f64, ts: &[f64], precision_target: f64) -> Result<Vec<LogZetaSample>> {
    for &t in ts {
        ComplexPoint::new(sigma, t).check()?;
    }
    Ok(ts
        .par_iter()
        .map(|&t| {
            let line = LineEvaluator::new(t, START_SIGMA);
            track_on_line(&line, sigma, precision_target)
        })
        .collect())
}

pub fn write_samples_csv<W: Write>(mut out: W, samples: &[LogZetaSample]) -> Result<()> {
    writeln!(out, "t,sigma,re_log_zeta,im_log_zeta,branch_ok")?;
    for s in samples {
        writeln!(
            out,
            "{:?},{:?},{:?},{:?},{}",
            s.point.t, s.point.sigma, s.log_zeta.re, s.log_zeta.im, s.branch_ok
        )?;
    }
    Ok(())
}

/// R_Y(s) = Σ_{p^k ≤ Y} p^{-ks}/k.
pub fn dirichlet_r_y(point: ComplexPoint, y: f64, table: &PrimeTable) -> Result<Complex64> {
    let s = point.s();
    let mut acc = ComplexSum::new();
    for pp in table.prime_powers_up_to(y)? {
        let lp = (pp.p as f64).ln();
        acc.add((-s * (pp.k as f64 * lp)).exp() / pp.k as f64);
    }
    Ok(acc.value())
}
