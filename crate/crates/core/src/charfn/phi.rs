//! Φ̂_rand(u, v) = Π_p J(πu, πv, p^{-σ}) and its small-(u, v) expansion.

use super::coeffs::{b_series, CoefficientTable, Grid};
use super::j::j_nodes;
use crate::error::{Error, Result};
use crate::primes::PrimeTable;
use crate::summation::{ComplexSum, NeumaierSum};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::io::Write;

/// Per-prime series in z are used once w·π|z| drops below this.
const SERIES_SWITCH: f64 = 0.1;
const SERIES_K: usize = 12;
const SERIES_LEN: usize = 17;
/// Default radius of the expansion disc, u² + v² ≤ δ.
pub const EXPANSION_RADIUS_SQ: f64 = 0.04;
/// Primes up to here get an exact coefficient table in [`aggregated_b`].
const DIRECT_PRIMES: f64 = 100.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhiHatValue {
    pub value: Complex64,
    pub error: f64,
}

/// Trapezoid nodes of one prime factor: (Re F, Im F, multiplicity).
struct PrimeNodes {
    n: usize,
    nodes: Vec<(f64, f64, f64)>,
}

impl PrimeNodes {
    fn new(w: f64, n: usize) -> Self {
        let mut nodes = Vec::with_capacity(n / 2 + 2);
        let push = |theta: f64, mult: f64, nodes: &mut Vec<(f64, f64, f64)>| {
            let (s, c) = theta.sin_cos();
            let f = -Complex64::new(1.0 - w * c, -w * s).ln();
            nodes.push((f.re, f.im, mult));
        };
        push(0.0, 1.0, &mut nodes);
        for j in 1..=(n - 1) / 2 {
            push(std::f64::consts::TAU * j as f64 / n as f64, 2.0, &mut nodes);
        }
        if n % 2 == 0 {
            push(PI, 1.0, &mut nodes);
        }
        Self { n, nodes }
    }

    /// J(πu, πv, w).
    fn eval(&self, u: f64, v: f64) -> Complex64 {
        let (a, b) = (2.0 * PI * u, 2.0 * PI * v);
        let mut acc = Complex64::new(0.0, 0.0);
        for &(re, im, m) in &self.nodes {
            acc += Complex64::from_polar(m * (b * im).cos(), a * re);
        }
        acc / self.n as f64
    }
}

/// Φ̂_rand for |z| ≤ `z_max` at a fixed σ.
///
/// Primes with p^{-σ}·π·z_max > 0.1 are integrated directly. The rest enter
/// through exp(Σ_{k,l} i^{k+l}(πz)^k(πz̄)^l/(k!l!) Σ_t β_{k,l,t} S_t), where
/// S_t sums p^{-2tσ} exactly up to `p_cut` and by the prime number theorem beyond.
pub struct PhiHatModel {
    pub sigma: f64,
    pub z_max: f64,
    pub p_cut: u64,
    /// Number of primes treated by quadrature.
    pub n_direct: usize,
    direct: Vec<PrimeNodes>,
    /// g[k][l] = Σ_t β_{k,l,t} S_t/(k!l!).
    g: Grid<f64>,
    /// Σ_t |β_{k,l,t}|·err(S_t)/(k!l!).
    g_err: Grid<f64>,
    /// Σ_{p > split} (1.06·w_p)^{K+1}, for the series truncation estimate.
    trunc_sum: f64,
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|j| j as f64).product()
}

impl PhiHatModel {
    pub fn new(sigma: f64, table: &PrimeTable, p_cut: u64, z_max: f64) -> Result<Self> {
        if sigma <= 0.5 {
            return Err(Error::Divergent { sigma });
        }
        let primes = table.primes_up_to(p_cut as f64)?;
        let ln_p = &table.ln_primes()[..primes.len()];
        let threshold = SERIES_SWITCH / (PI * z_max.max(1e-12));
        let n_direct = ln_p.iter().take_while(|&&l| (-sigma * l).exp() > threshold).count();
        if n_direct == primes.len() && primes.len() < table.primes().len() {
            return Err(Error::TableTooSmall { limit: p_cut, requested: primes.len() as f64 });
        }
        let direct = ln_p[..n_direct]
            .iter()
            .map(|&l| {
                let w = (-sigma * l).exp();
                PrimeNodes::new(w, j_nodes(PI * z_max, w, 1e-16))
            })
            .collect();

        let beta = b_series(SERIES_K, SERIES_LEN);
        let split = if n_direct == 0 { 1.0 } else { primes[n_direct - 1] as f64 };
        let mut s = [0.0; SERIES_LEN];
        let mut s_err = [0.0; SERIES_LEN];
        for t in 1..SERIES_LEN {
            let e = table.prime_zeta_tail(2.0 * t as f64 * sigma, split, p_cut as f64)?;
            s[t] = e.value;
            s_err[t] = e.error;
        }
        let mut g = vec![vec![0.0; SERIES_K + 1]; SERIES_K + 1];
        let mut g_err = g.clone();
        for k in 1..=SERIES_K {
            for l in 1..=SERIES_K {
                let f = factorial(k) * factorial(l);
                let mut acc = NeumaierSum::new();
                let mut err = 0.0;
                for t in 1..SERIES_LEN {
                    acc.add(beta[k][l].0[t] * s[t]);
                    err += beta[k][l].0[t].abs() * s_err[t];
                }
                g[k][l] = acc.value() / f;
                g_err[k][l] = err / f;
            }
        }
        let trunc_sum = table
            .prime_zeta_tail((SERIES_K + 1) as f64 * sigma, split, p_cut as f64)?
            .value
            * 1.06f64.powi(SERIES_K as i32 + 1);
        Ok(Self { sigma, z_max, p_cut, n_direct, direct, g, g_err, trunc_sum })
    }

    /// Exponent of the aggregated factor for primes beyond the direct range.
    fn series_exponent(&self, u: f64, v: f64) -> (Complex64, f64) {
        let iz = Complex64::new(0.0, PI) * Complex64::new(u, v);
        let izb = Complex64::new(0.0, PI) * Complex64::new(u, -v);
        let r = PI * u.hypot(v);
        let mut pk = vec![Complex64::new(1.0, 0.0); SERIES_K + 1];
        let mut pl = pk.clone();
        for n in 1..=SERIES_K {
            pk[n] = pk[n - 1] * iz;
            pl[n] = pl[n - 1] * izb;
        }
        let mut acc = ComplexSum::new();
        let mut err = 0.0;
        for k in 1..=SERIES_K {
            for l in 1..=SERIES_K {
                acc.add(pk[k] * pl[l] * self.g[k][l]);
                err += self.g_err[k][l] * r.powi((k + l) as i32);
            }
        }
        let x = r;
        err += 2.0 * std::f64::consts::E * x.powi(SERIES_K as i32 + 1) / factorial(SERIES_K + 1) * self.trunc_sum;
        (acc.value(), err)
    }

    pub fn eval(&self, u: f64, v: f64) -> Result<PhiHatValue> {
        if u.hypot(v) > self.z_max * (1.0 + 1e-12) {
            return Err(Error::Domain(format!("|z| = {} exceeds model radius {}", u.hypot(v), self.z_max)));
        }
        Ok(self.eval_unchecked(u, v))
    }

    pub(crate) fn eval_unchecked(&self, u: f64, v: f64) -> PhiHatValue {
        let mut prod = Complex64::new(1.0, 0.0);
        for p in &self.direct {
            prod *= p.eval(u, v);
        }
        let (e, err) = self.series_exponent(u, v);
        let value = prod * e.exp();
        PhiHatValue { value, error: value.norm() * err + 1e-16 * self.direct.len() as f64 }
    }

    /// Values on the grid u_i × v_j, row-major in u.
    pub fn eval_grid(&self, us: &[f64], vs: &[f64]) -> Vec<Complex64> {
        us.par_iter()
            .flat_map_iter(|&u| vs.iter().map(move |&v| (u, v)).collect::<Vec<_>>())
            .map(|(u, v)| self.eval_unchecked(u, v).value)
            .collect()
    }
}

/// Φ̂_rand(u, v) at σ, with primes above `p_cut` handled analytically.
pub fn phi_hat_rand(u: f64, v: f64, sigma: f64, table: &PrimeTable, p_cut: u64) -> Result<PhiHatValue> {
    PhiHatModel::new(sigma, table, p_cut, u.hypot(v))?.eval(u, v)
}

pub fn write_phi_grid_csv<W: Write>(mut out: W, us: &[f64], vs: &[f64], values: &[Complex64]) -> Result<()> {
    writeln!(out, "u,v,re,im")?;
    let mut it = values.iter();
    for &u in us {
        for &v in vs {
            let z = it.next().ok_or_else(|| Error::Format("grid shorter than axes".into()))?;
            writeln!(out, "{u:?},{v:?},{:?},{:?}", z.re, z.im)?;
        }
    }
    Ok(())
}

/// Σ_p b_{k,l}(p^{-σ}) over all primes, for 1 ≤ k, l ≤ `k_max`.
///
/// Small primes use an exact coefficient table; the others use the series
/// in s = w² with prime sums S_t from the table and a PNT tail.
pub fn aggregated_b(sigma: f64, table: &PrimeTable, k_max: usize) -> Result<Grid<f64>> {
    if sigma <= 0.5 {
        return Err(Error::Divergent { sigma });
    }
    let mut out = vec![vec![NeumaierSum::new(); k_max + 1]; k_max + 1];
    let small = table.primes_up_to(DIRECT_PRIMES.min(table.limit() as f64))?;
    for &p in small {
        let ct = CoefficientTable::new((p as f64).powf(-sigma), k_max, 0)?;
        for k in 1..=k_max {
            for l in 1..=k_max {
                out[k][l].add(ct.b[k][l]);
            }
        }
    }
    let beta = b_series(k_max, SERIES_LEN);
    let split = *small.last().unwrap_or(&1) as f64;
    for t in 1..SERIES_LEN {
        let st = table.prime_zeta_tail(2.0 * t as f64 * sigma, split, table.limit() as f64)?.value;
        for k in 1..=k_max {
            for l in 1..=k_max {
                out[k][l].add(beta[k][l].0[t] * st);
            }
        }
    }
    Ok(out.into_iter().map(|row| row.into_iter().map(|s| s.value()).collect()).collect())
}

/// ã_{k,l}(σ) = (πi)^{k+l}/(k!l!)·Σ_p b_{k,l}(p^{-σ}) for 3 ≤ k + l ≤ order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpansionCoefficients {
    pub sigma: f64,
    pub order: usize,
    pub psi: f64,
    pub a_tilde: Vec<((usize, usize), Complex64)>,
    pub radius_sq: f64,
}

impl ExpansionCoefficients {
    pub fn new(sigma: f64, table: &PrimeTable, order: usize) -> Result<Self> {
        if !(3..=10).contains(&order) {
            return Err(Error::Domain(format!("expansion order {order} outside 3..=10")));
        }
        let b = aggregated_b(sigma, table, order - 1)?;
        let mut a_tilde = Vec::new();
        for n in 3..=order {
            for k in 1..n {
                let l = n - k;
                let pi_i_n = Complex64::new(0.0, PI).powu(n as u32);
                a_tilde.push(((k, l), pi_i_n * b[k][l] / (factorial(k) * factorial(l))));
            }
        }
        Ok(Self { sigma, order, psi: b[1][1], a_tilde, radius_sq: EXPANSION_RADIUS_SQ })
    }

    pub fn get(&self, k: usize, l: usize) -> Option<Complex64> {
        self.a_tilde.iter().find(|(kl, _)| *kl == (k, l)).map(|(_, v)| *v)
    }

    /// P(u, v) = 1 + Σ ã_{k,l} z^k z̄^l.
    pub fn polynomial(&self, u: f64, v: f64) -> Complex64 {
        let z = Complex64::new(u, v);
        let mut acc = Complex64::new(1.0, 0.0);
        for &((k, l), a) in &self.a_tilde {
            acc += a * z.powu(k as u32) * z.conj().powu(l as u32);
        }
        acc
    }
}

/// e^{−π²(u²+v²)ψ(σ)}·P(u, v), valid inside the disc u² + v² ≤ δ.
pub fn phi_hat_expansion(u: f64, v: f64, coeffs: &ExpansionCoefficients) -> Result<Complex64> {
    let r2 = u * u + v * v;
    if r2 > coeffs.radius_sq {
        return Err(Error::Refused {
            reason: format!("u^2 + v^2 = {r2} lies outside the expansion disc"),
            requirement: format!("u^2 + v^2 <= {}", coeffs.radius_sq),
        });
    }
    Ok((-PI * PI * r2 * coeffs.psi).exp() * coeffs.polynomial(u, v))
}

/// J₀(2w|z|), the small-w limit of J(u, v, w); used for reporting only.
pub fn j0_surrogate(z_abs: f64, w: f64) -> f64 {
    bessel_j0(2.0 * z_abs * w)
}

fn bessel_j0(x: f64) -> f64 {
    // power series for moderate x, asymptotic form beyond
    if x.abs() < 12.0 {
        let q = -0.25 * x * x;
        let mut term = 1.0;
        let mut acc = 1.0;
        for m in 1..80 {
            term *= q / (m * m) as f64;
            acc += term;
            if term.abs() < 1e-17 {
                break;
            }
        }
        acc
    } else {
        let ax = x.abs();
        let chi = ax - PI / 4.0;
        let p = 1.0 - 9.0 / (128.0 * ax * ax);
        let q = -1.0 / (8.0 * ax);
        (2.0 / (PI * ax)).sqrt() * (p * chi.cos() - q * chi.sin())
    }
}
