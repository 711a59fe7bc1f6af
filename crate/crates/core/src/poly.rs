//! Dense bivariate polynomials Σ c[i][j] x^i y^j of bounded total degree.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::ops::{Add, Mul};

pub trait Field: Copy + Add<Output = Self> + Mul<Output = Self> + Mul<f64, Output = Self> + PartialEq {
    fn zero() -> Self;
    fn one() -> Self;
}

impl Field for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
}

impl Field for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BiPoly<T> {
    /// coeffs[i][j] multiplies x^i y^j; only i + j ≤ degree is used.
    pub coeffs: Vec<Vec<T>>,
}

impl<T: Field> BiPoly<T> {
    pub fn zero(degree: usize) -> Self {
        Self { coeffs: vec![vec![T::zero(); degree + 1]; degree + 1] }
    }

    pub fn constant(c: T, degree: usize) -> Self {
        let mut p = Self::zero(degree);
        p.coeffs[0][0] = c;
        p
    }

    pub fn degree_bound(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.coeffs.get(i).and_then(|r| r.get(j)).copied().unwrap_or_else(T::zero)
    }

    /// Highest total degree with a nonzero coefficient (0 for the zero polynomial).
    pub fn degree(&self) -> usize {
        let d = self.degree_bound();
        let mut best = 0;
        for i in 0..=d {
            for j in 0..=d - i {
                if self.coeffs[i][j] != T::zero() {
                    best = best.max(i + j);
                }
            }
        }
        best
    }

    pub fn add_term(&mut self, i: usize, j: usize, c: T) {
        self.coeffs[i][j] = self.coeffs[i][j] + c;
    }

    pub fn eval(&self, x: T, y: T) -> T {
        let d = self.degree_bound();
        let mut acc = T::zero();
        let mut xi = T::one();
        for i in 0..=d {
            let mut yj = T::one();
            for j in 0..=d - i {
                acc = acc + self.coeffs[i][j] * xi * yj;
                yj = yj * y;
            }
            xi = xi * x;
        }
        acc
    }

    /// Product truncated at the larger of the two degree bounds.
    pub fn mul_trunc(&self, other: &Self) -> Self {
        let d = self.degree_bound().max(other.degree_bound());
        let mut out = Self::zero(d);
        for i1 in 0..=self.degree_bound() {
            for j1 in 0..=self.degree_bound() - i1 {
                let a = self.coeffs[i1][j1];
                if a == T::zero() {
                    continue;
                }
                for i2 in 0..=other.degree_bound() {
                    for j2 in 0..=other.degree_bound() - i2 {
                        if i1 + i2 + j1 + j2 <= d {
                            out.add_term(i1 + i2, j1 + j2, a * other.coeffs[i2][j2]);
                        }
                    }
                }
            }
        }
        out
    }

    /// ∂^{m+n}/∂x^m ∂y^n.
    pub fn derivative(&self, m: usize, n: usize) -> Self {
        let d = self.degree_bound();
        let mut out = Self::zero(d);
        for i in m..=d {
            for j in n..=d - i {
                let f: f64 = ((i - m + 1)..=i).map(|k| k as f64).product::<f64>()
                    * ((j - n + 1)..=j).map(|k| k as f64).product::<f64>();
                out.coeffs[i - m][j - n] = self.coeffs[i][j] * f;
            }
        }
        out
    }

    pub fn scale(&self, c: T) -> Self {
        Self { coeffs: self.coeffs.iter().map(|r| r.iter().map(|&x| x * c).collect()).collect() }
    }
}

/// (x + iy)^k (x − iy)^l as a complex polynomial in real x, y.
pub fn z_power(k: usize, l: usize, degree: usize) -> BiPoly<Complex64> {
    let i = Complex64::new(0.0, 1.0);
    let mut zp = BiPoly::zero(degree);
    zp.coeffs[1][0] = Complex64::new(1.0, 0.0);
    zp.coeffs[0][1] = i;
    let mut zb = BiPoly::zero(degree);
    zb.coeffs[1][0] = Complex64::new(1.0, 0.0);
    zb.coeffs[0][1] = -i;
    let mut out = BiPoly::constant(Complex64::new(1.0, 0.0), degree);
    for _ in 0..k {
        out = out.mul_trunc(&zp);
    }
    for _ in 0..l {
        out = out.mul_trunc(&zb);
    }
    out
}
