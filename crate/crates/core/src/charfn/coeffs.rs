//! The coefficient arrays a_{k,l}(w), b_{k,l}(w) of the single-prime factor.
//!
//! With F = −log(1 − wX) = Σ wⁿXⁿ/n,
//! a_{k,l}(w) = E[F^k F̄^l] = Σ_t C_k(t) C_l(t) w^{2t}, where C_k(t) is the sum
//! of 1/(n₁⋯n_k) over compositions of t into k positive parts, and
//! b_{k,l} are the matching coefficients of log J.

use crate::error::{Error, Result};
use std::io::Write;
use std::ops::{AddAssign, Mul};

/// Arithmetic needed by the bivariate logarithm: reals, or power series in
/// s = w² truncated at a fixed length.
pub trait Coefficient: Clone + for<'a> AddAssign<&'a Self> {
    fn zero_like(&self) -> Self;
    fn scale(&self, c: f64) -> Self;
    fn mul(&self, other: &Self) -> Self;
}

impl Coefficient for f64 {
    fn zero_like(&self) -> Self {
        0.0
    }
    fn scale(&self, c: f64) -> Self {
        self * c
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
}

/// Power series Σ_t c_t s^t truncated after `len` coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct Series(pub Vec<f64>);

impl Series {
    pub fn eval(&self, s: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, c| acc * s + c)
    }
}

impl<'a> AddAssign<&'a Series> for Series {
    fn add_assign(&mut self, rhs: &'a Series) {
        for (a, b) in self.0.iter_mut().zip(&rhs.0) {
            *a += b;
        }
    }
}

impl Coefficient for Series {
    fn zero_like(&self) -> Self {
        Series(vec![0.0; self.0.len()])
    }
    fn scale(&self, c: f64) -> Self {
        Series(self.0.iter().map(|x| x * c).collect())
    }
    fn mul(&self, other: &Self) -> Self {
        let n = self.0.len();
        let mut out = vec![0.0; n];
        for (i, &a) in self.0.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            for (j, &b) in other.0[..n - i].iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Series(out)
    }
}

impl Mul for &Series {
    type Output = Series;
    fn mul(self, rhs: &Series) -> Series {
        Coefficient::mul(self, rhs)
    }
}

/// Square array indexed [k][l], 0 ≤ k, l ≤ K.
pub type Grid<T> = Vec<Vec<T>>;

/// C_k(t) for 0 ≤ k ≤ k_max, 0 ≤ t ≤ t_max, by C_k(t) = Σ_n C_{k−1}(t−n)/n.
pub fn composition_sums(k_max: usize, t_max: usize) -> Grid<f64> {
    let mut c = vec![vec![0.0; t_max + 1]; k_max + 1];
    c[0][0] = 1.0;
    for k in 1..=k_max {
        for t in k..=t_max {
            let mut acc = 0.0;
            for n in 1..=t + 1 - k {
                acc += c[k - 1][t - n] / n as f64;
            }
            c[k][t] = acc;
        }
    }
    c
}

/// Coefficients α_{k,l,t} = C_k(t)C_l(t) of a_{k,l} as series in s = w².
pub fn a_series(k_max: usize, len: usize) -> Grid<Series> {
    let c = composition_sums(k_max, len - 1);
    (0..=k_max)
        .map(|k| (0..=k_max).map(|l| Series((0..len).map(|t| c[k][t] * c[l][t]).collect())).collect())
        .collect()
}

/// Given J = Σ â_{k,l} x^k y^l with â₀₀ = 1 and â_{k,0} = â_{0,l} = 0, return the
/// coefficients of log J in the same monomials, keeping k, l ≤ K.
pub fn bivariate_log<T: Coefficient>(a_hat: &Grid<T>) -> Grid<T> {
    let kk = a_hat.len() - 1;
    let zero = a_hat[0][0].zero_like();
    let mut d = a_hat.clone();
    d[0][0] = zero.clone();
    let mut out = vec![vec![zero.clone(); kk + 1]; kk + 1];
    let mut power = d.clone();
    for n in 1..=kk {
        let sign = if n % 2 == 1 { 1.0 } else { -1.0 } / n as f64;
        for k in n..=kk {
            for l in n..=kk {
                out[k][l] += &power[k][l].scale(sign);
            }
        }
        if n == kk {
            break;
        }
        // D^{n+1}: entries of D^n live on k, l ≥ n, those of D on k, l ≥ 1
        let mut next = vec![vec![zero.clone(); kk + 1]; kk + 1];
        for k1 in n..=kk {
            for l1 in n..=kk {
                for k2 in 1..=kk - k1 {
                    for l2 in 1..=kk - l1 {
                        let prod = power[k1][l1].mul(&d[k2][l2]);
                        next[k1 + k2][l1 + l2] += &prod;
                    }
                }
            }
        }
        power = next;
    }
    out
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|j| j as f64).product()
}

/// b_{k,l} from a_{k,l}: b = k!l!·[x^k y^l] log(Σ a_{k,l} x^k y^l/(k!l!)).
pub fn b_from_a<T: Coefficient>(a: &Grid<T>) -> Grid<T> {
    let kk = a.len() - 1;
    let a_hat: Grid<T> = (0..=kk)
        .map(|k| (0..=kk).map(|l| a[k][l].scale(1.0 / (factorial(k) * factorial(l)))).collect())
        .collect();
    let mut b = bivariate_log(&a_hat);
    for (k, row) in b.iter_mut().enumerate() {
        for (l, x) in row.iter_mut().enumerate() {
            *x = x.scale(factorial(k) * factorial(l));
        }
    }
    b
}

/// β_{k,l,t}: the coefficients of b_{k,l}(w) as series in s = w².
pub fn b_series(k_max: usize, len: usize) -> Grid<Series> {
    b_from_a(&a_series(k_max, len))
}

/// −log(1 − x).
pub(crate) fn neg_log1m(x: f64) -> f64 {
    -(-x).ln_1p()
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientTable {
    pub w: f64,
    pub k_max: usize,
    pub t_max: usize,
    /// a[k][l] for 0 ≤ k, l ≤ K.
    pub a: Grid<f64>,
    /// b[k][l] for 1 ≤ k, l ≤ K (row and column 0 are zero).
    pub b: Grid<f64>,
}

pub const MAX_K: usize = 12;

impl CoefficientTable {
    /// Tables to index `k_max`. `t_max` is raised if needed so that the
    /// truncation bound of every a_{k,l} is below 1e-17.
    pub fn new(w: f64, k_max: usize, t_max: usize) -> Result<Self> {
        if !(w > 0.0 && w < 1.0) {
            return Err(Error::Domain(format!("w = {w} must lie in (0, 1)")));
        }
        if k_max == 0 || k_max > MAX_K {
            return Err(Error::Domain(format!("K = {k_max} must be in 1..={MAX_K}")));
        }
        let lam = neg_log1m(w.sqrt());
        let mut t_auto = k_max;
        while lam.powi(2 * k_max as i32) * w.powi(t_auto as i32 + 1) / (1.0 - w) > 1e-17 && t_auto < 5000 {
            t_auto += 1;
        }
        let t_max = t_max.max(t_auto).max(k_max);
        let c = composition_sums(k_max, t_max);
        let w2 = w * w;
        let a: Grid<f64> = (0..=k_max)
            .map(|k| {
                (0..=k_max)
                    .map(|l| {
                        let mut acc = 0.0;
                        let mut pw = w2.powi(k.max(l) as i32);
                        for t in k.max(l)..=t_max {
                            acc += c[k][t] * c[l][t] * pw;
                            pw *= w2;
                        }
                        acc
                    })
                    .collect()
            })
            .collect();
        let b = b_from_a(&a);
        Ok(Self { w, k_max, t_max, a, b })
    }

    /// Bound on the a_{k,l} truncation error: L^{k+l} w^{t_max+1}/(1−w), L = −log(1−√w).
    pub fn a_tail_bound(&self, k: usize, l: usize) -> f64 {
        let lam = neg_log1m(self.w.sqrt());
        lam.powi((k + l) as i32) * self.w.powi(self.t_max as i32 + 1) / (1.0 - self.w)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "w,k,l,a,b")?;
        for k in 0..=self.k_max {
            for l in 0..=self.k_max {
                writeln!(out, "{:?},{k},{l},{:?},{:?}", self.w, self.a[k][l], self.b[k][l])?;
            }
        }
        Ok(())
    }
}
