//! The density F_σ(x, y) of log ζ(σ, X), its Gaussian expansion, and CLT box
//! probabilities for κ = log ζ(σ_T, X)/√(πψ_T).

use crate::charfn::{ExpansionCoefficients, PhiHatModel};
use crate::error::{Error, Result};
use crate::poly::{z_power, BiPoly};
use crate::primes::PrimeTable;
use crate::random_model::{LogZetaSampler, SamplerConfig};
use crate::special::{gaussian_moment, scaled_gaussian_moments};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};
use std::f64::consts::PI;
use std::io::Write;

pub const SIGMA_DENSITY_MAX: f64 = 0.75;
/// Below this σ − ½, inversion is refused.
pub const MIN_OFFSET: f64 = 1e-5;
/// |Φ̂| below this is treated as zero.
const SPECTRUM_FLOOR: f64 = 1e-16;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Output grid covers [−h, h]²; default 5√ψ + 1.
    pub half_width: Option<f64>,
    /// Points per axis (odd keeps 0 on the grid).
    pub points: usize,
    /// Primes above this enter Φ̂ analytically.
    pub p_cut: u64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { half_width: None, points: 161, p_cut: 1_000_000 }
    }
}

/// F_σ on a uniform grid, plus the half-plane spectrum it came from.
#[derive(Clone, Debug)]
pub struct DensityGrid {
    pub sigma: f64,
    pub psi: f64,
    pub x_nodes: Vec<f64>,
    pub y_nodes: Vec<f64>,
    /// values[i][j] = F(x_i, y_j).
    pub values: Vec<Vec<f64>>,
    pub mesh_step: f64,
    /// Radius of the disc outside which |Φ̂| < 1e-16.
    pub domain_radius: f64,
    /// |1 − trapezoid mass over the output grid|.
    pub mass_defect: f64,
    /// Frequency step; F is computed as a 1/h-periodic function.
    pub freq_step: f64,
    /// Largest frequency index J; u_j = j·h for 0 ≤ j ≤ J, v_k = (k − J)·h.
    pub n_freq: usize,
    /// Re and Im of Φ̂ on the half plane, row-major (J+1)×(2J+1), weighted
    /// by 2 for j > 0 to account for the mirrored half.
    spec_re: Vec<f64>,
    spec_im: Vec<f64>,
}

fn cos_sin(freqs: &[f64], x: f64) -> (Vec<f64>, Vec<f64>) {
    freqs.iter().map(|&u| (2.0 * PI * u * x).sin_cos()).map(|(s, c)| (c, s)).unzip()
}

/// ∫_{x0}^{x1} cos(2πux) dx and ∫ sin(2πux) dx for each u.
fn cos_sin_integrals(freqs: &[f64], x0: f64, x1: f64) -> (Vec<f64>, Vec<f64>) {
    freqs
        .iter()
        .map(|&u| {
            if u == 0.0 {
                return (x1 - x0, 0.0);
            }
            let w = 2.0 * PI * u;
            let (s1, c1) = (w * x1).sin_cos();
            let (s0, c0) = (w * x0).sin_cos();
            ((s1 - s0) / w, (c0 - c1) / w)
        })
        .unzip()
}

impl DensityGrid {
    fn u_freqs(&self) -> Vec<f64> {
        (0..=self.n_freq).map(|j| j as f64 * self.freq_step).collect()
    }

    fn v_freqs(&self) -> Vec<f64> {
        let j = self.n_freq as f64;
        (0..=2 * self.n_freq).map(|k| (k as f64 - j) * self.freq_step).collect()
    }

    /// h²·Σ_j Σ_k [A(cx·cy − sx·sy) + B(sx·cy + cx·sy)] with A, B the spectrum.
    fn contract(&self, cx: &[f64], sx: &[f64], cy: &[f64], sy: &[f64]) -> f64 {
        let nv = 2 * self.n_freq + 1;
        let mut acc = 0.0;
        for k in 0..nv {
            let (mut p, mut q) = (0.0, 0.0);
            for j in 0..=self.n_freq {
                let a = self.spec_re[j * nv + k];
                let b = self.spec_im[j * nv + k];
                p += a * cx[j] + b * sx[j];
                q += b * cx[j] - a * sx[j];
            }
            acc += p * cy[k] + q * sy[k];
        }
        acc * self.freq_step * self.freq_step
    }

    /// F at an arbitrary point, from the spectrum.
    pub fn value_at(&self, x: f64, y: f64) -> f64 {
        let (cx, sx) = cos_sin(&self.u_freqs(), x);
        let (cy, sy) = cos_sin(&self.v_freqs(), y);
        self.contract(&cx, &sx, &cy, &sy)
    }

    /// ∬ F over [x0, x1]×[y0, y1], integrating the spectrum exactly.
    pub fn rect_mass(&self, x0: f64, x1: f64, y0: f64, y1: f64) -> f64 {
        let (cx, sx) = cos_sin_integrals(&self.u_freqs(), x0, x1);
        let (cy, sy) = cos_sin_integrals(&self.v_freqs(), y0, y1);
        self.contract(&cx, &sx, &cy, &sy)
    }

    /// Period of the computed (periodised) density.
    pub fn period(&self) -> f64 {
        1.0 / self.freq_step
    }

    /// P[Re ≤ x, Im ≤ y], integrating from the edge of the period window.
    pub fn cdf(&self, x: f64, y: f64) -> f64 {
        let l = -0.5 * self.period();
        self.rect_mass(l, x, l, y)
    }

    /// cdf(x_i, y_j) for all pairs; infinite or out-of-window coordinates are
    /// clamped to the period window, where the mass is exactly 1.
    pub fn cdf_table(&self, xs: &[f64], ys: &[f64]) -> Vec<Vec<f64>> {
        let l = 0.5 * self.period();
        let clamp = |x: f64| x.clamp(-l, l);
        let (uf, vf) = (self.u_freqs(), self.v_freqs());
        let nv = 2 * self.n_freq + 1;
        // p[i][k] + i·q[i][k] is the x-contracted spectrum for cut x_i
        let pq: Vec<(Vec<f64>, Vec<f64>)> = xs
            .iter()
            .map(|&x| {
                let (cx, sx) = cos_sin_integrals(&uf, -l, clamp(x));
                let mut p = vec![0.0; nv];
                let mut q = vec![0.0; nv];
                for k in 0..nv {
                    for j in 0..=self.n_freq {
                        let a = self.spec_re[j * nv + k];
                        let b = self.spec_im[j * nv + k];
                        p[k] += a * cx[j] + b * sx[j];
                        q[k] += b * cx[j] - a * sx[j];
                    }
                }
                (p, q)
            })
            .collect();
        let cs: Vec<(Vec<f64>, Vec<f64>)> = ys.iter().map(|&y| cos_sin_integrals(&vf, -l, clamp(y))).collect();
        let h2 = self.freq_step * self.freq_step;
        pq.iter()
            .map(|(p, q)| {
                cs.iter()
                    .map(|(cy, sy)| h2 * (0..nv).map(|k| p[k] * cy[k] + q[k] * sy[k]).sum::<f64>())
                    .collect()
            })
            .collect()
    }

    /// (∬|Φ̂|², ∬F²) by trapezoid sums on the frequency and output grids.
    pub fn plancherel(&self) -> (f64, f64) {
        let spectral: f64 = self
            .spec_re
            .iter()
            .zip(&self.spec_im)
            .enumerate()
            .map(|(idx, (a, b))| {
                let j = idx / (2 * self.n_freq + 1);
                // stored values carry the mirror weight 2 for j > 0
                let w = if j == 0 { 1.0 } else { 2.0 };
                (a * a + b * b) / w
            })
            .sum::<f64>()
            * self.freq_step
            * self.freq_step;
        let spatial = trapezoid_2d(&self.values, self.mesh_step, |f| f * f);
        (spectral, spatial)
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().flatten().copied().fold(f64::INFINITY, f64::min)
    }

    /// max |F(x, y) − F(x, −y)| over the grid.
    pub fn symmetry_defect(&self) -> f64 {
        let n = self.y_nodes.len();
        self.values
            .iter()
            .flat_map(|row| (0..n).map(move |j| (row[j] - row[n - 1 - j]).abs()))
            .fold(0.0, f64::max)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "x,y,f")?;
        for (i, &x) in self.x_nodes.iter().enumerate() {
            for (j, &y) in self.y_nodes.iter().enumerate() {
                writeln!(out, "{x:?},{y:?},{:?}", self.values[i][j])?;
            }
        }
        Ok(())
    }

    /// Gnuplot `matrix nonuniform` layout: first row `n x_0 … x_{n−1}`, then
    /// one row per y: `y_j F(x_0, y_j) …`.
    pub fn write_matrix<W: Write>(&self, mut out: W) -> Result<()> {
        write!(out, "{}", self.x_nodes.len())?;
        for x in &self.x_nodes {
            write!(out, " {x:?}")?;
        }
        writeln!(out)?;
        for (j, y) in self.y_nodes.iter().enumerate() {
            write!(out, "{y:?}")?;
            for row in &self.values {
                write!(out, " {:?}", row[j])?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

fn trapezoid_2d(values: &[Vec<f64>], step: f64, f: impl Fn(f64) -> f64) -> f64 {
    let n = values.len();
    let mut acc = 0.0;
    for (i, row) in values.iter().enumerate() {
        let wi = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
        let m = row.len();
        for (j, &v) in row.iter().enumerate() {
            let wj = if j == 0 || j == m - 1 { 0.5 } else { 1.0 };
            acc += wi * wj * f(v);
        }
    }
    acc * step * step
}

fn uniform(half: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![0.0];
    }
    (0..n).map(|i| -half + 2.0 * half * i as f64 / (n - 1) as f64).collect()
}

/// Smallest r with max_θ |Φ̂(r e^{iθ})| below the floor at r and 1.1r.
fn spectrum_radius(sigma: f64, psi: f64, table: &PrimeTable, p_cut: u64) -> Result<(f64, PhiHatModel)> {
    let r_gauss = ((1.0 / SPECTRUM_FLOOR).ln() / (PI * PI * psi)).sqrt();
    let angles: Vec<f64> = (0..=24).map(|i| -0.5 * PI + PI * i as f64 / 24.0).collect();
    let mut cap = 3.0 * r_gauss;
    for _ in 0..6 {
        let model = PhiHatModel::new(sigma, table, p_cut, cap)?;
        let max_abs = |r: f64| -> f64 {
            angles
                .par_iter()
                .map(|&a| model.eval_unchecked(r * a.cos(), r * a.sin()).value.norm())
                .reduce(|| 0.0, f64::max)
        };
        let dr = r_gauss / 20.0;
        let mut r = 0.5 * r_gauss;
        while 1.1 * r <= cap {
            if max_abs(r) < SPECTRUM_FLOOR && max_abs(1.1 * r) < SPECTRUM_FLOOR {
                let model = PhiHatModel::new(sigma, table, p_cut, r)?;
                return Ok((r, model));
            }
            r += dr;
        }
        cap *= 2.0;
    }
    Err(Error::RefinementExhausted(format!("|Φ̂| stays above {SPECTRUM_FLOOR} out to |z| = {cap}")))
}

/// F_σ(x, y) = ∬ Φ̂(u, v) e^{−2πi(ux+vy)} du dv by the trapezoid rule over
/// the disc where |Φ̂| ≥ 1e-16.
///
/// The frequency step h is set so that the period 1/h exceeds the output
/// half-width plus 7√ψ + 2, beyond which F is negligible; the aliased copies
/// then contribute well below 1e-6.
pub fn invert_density(sigma: f64, spec: &GridSpec, table: &PrimeTable) -> Result<DensityGrid> {
    if sigma <= 0.5 {
        return Err(Error::Divergent { sigma });
    }
    if sigma > SIGMA_DENSITY_MAX {
        return Err(Error::Domain(format!("density inversion needs sigma <= {SIGMA_DENSITY_MAX}, got {sigma}")));
    }
    if spec.points < 2 {
        return Err(Error::Domain("grid needs at least 2 points per axis".into()));
    }
    let psi = table.psi(sigma, spec.p_cut.min(table.limit()))?.value;
    if sigma - 0.5 < MIN_OFFSET {
        let x_ext = 7.0 * psi.sqrt() + 2.0;
        let j = 2.0 * x_ext * ((1.0 / SPECTRUM_FLOOR).ln() / (PI * PI * psi)).sqrt();
        return Err(Error::Refused {
            reason: format!("sigma - 1/2 = {:e} is below {MIN_OFFSET:e}", sigma - 0.5),
            requirement: format!(
                "psi = {psi:.3}; about {:.0} spectrum nodes, and prime-sum tails resolving 2sigma - 1 = {:e}",
                2.0 * j * j,
                2.0 * sigma - 1.0
            ),
        });
    }
    let half = spec.half_width.unwrap_or(5.0 * psi.sqrt() + 1.0);
    let x_ext = 7.0 * psi.sqrt() + 2.0;
    let h = 1.0 / (half + x_ext);
    let (radius, model) = spectrum_radius(sigma, psi, table, spec.p_cut)?;
    let jmax = (radius / h).ceil() as usize;
    let nv = 2 * jmax + 1;

    let cells: Vec<(f64, f64)> = (0..(jmax + 1) * nv)
        .into_par_iter()
        .map(|idx| {
            let (j, k) = (idx / nv, idx % nv);
            let (u, v) = (j as f64 * h, (k as f64 - jmax as f64) * h);
            if u.hypot(v) > radius {
                return (0.0, 0.0);
            }
            let w = if j == 0 { 1.0 } else { 2.0 };
            let z = model.eval_unchecked(u, v).value;
            (w * z.re, w * z.im)
        })
        .collect();
    let (spec_re, spec_im): (Vec<f64>, Vec<f64>) = cells.into_iter().unzip();

    let x_nodes = uniform(half, spec.points);
    let y_nodes = x_nodes.clone();
    let mut grid = DensityGrid {
        sigma,
        psi,
        x_nodes,
        y_nodes,
        values: Vec::new(),
        mesh_step: if spec.points > 1 { 2.0 * half / (spec.points - 1) as f64 } else { 0.0 },
        domain_radius: radius,
        mass_defect: 0.0,
        freq_step: h,
        n_freq: jmax,
        spec_re,
        spec_im,
    };
    let us = grid.u_freqs();
    let vs = grid.v_freqs();
    let ys: Vec<(Vec<f64>, Vec<f64>)> = grid.y_nodes.iter().map(|&y| cos_sin(&vs, y)).collect();
    let values: Vec<Vec<f64>> = grid
        .x_nodes
        .par_iter()
        .map(|&x| {
            let (cx, sx) = cos_sin(&us, x);
            // contract over j once, then over k for every y
            let mut p = vec![0.0; nv];
            let mut q = vec![0.0; nv];
            for j in 0..=jmax {
                let row = j * nv;
                for k in 0..nv {
                    let a = grid.spec_re[row + k];
                    let b = grid.spec_im[row + k];
                    p[k] += a * cx[j] + b * sx[j];
                    q[k] += b * cx[j] - a * sx[j];
                }
            }
            ys.iter()
                .map(|(cy, sy)| {
                    let s: f64 = (0..nv).map(|k| p[k] * cy[k] + q[k] * sy[k]).sum();
                    s * h * h
                })
                .collect()
        })
        .collect();
    grid.values = values;
    grid.mass_defect = (1.0 - trapezoid_2d(&grid.values, grid.mesh_step, |f| f)).abs();
    Ok(grid)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChiSquareReport {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
    /// Cells with expected count ≥ 5; the rest are pooled into one cell.
    pub cells: usize,
}

/// Pearson χ² of `samples` binned on `bins`×`bins` squares covering
/// [−half, half]², against masses integrated from the density spectrum.
pub fn histogram_chi_square(grid: &DensityGrid, samples: &[Complex64], bins: usize, half: f64) -> ChiSquareReport {
    let n = samples.len() as f64;
    let edges = uniform(half, bins + 1);
    let width = 2.0 * half / bins as f64;
    let mut counts = vec![0u64; bins * bins];
    let mut outside = 0u64;
    for z in samples {
        let i = ((z.re + half) / width).floor();
        let j = ((z.im + half) / width).floor();
        if i >= 0.0 && j >= 0.0 && (i as usize) < bins && (j as usize) < bins {
            counts[i as usize * bins + j as usize] += 1;
        } else {
            outside += 1;
        }
    }
    let masses: Vec<f64> = (0..bins * bins)
        .into_par_iter()
        .map(|idx| {
            let (i, j) = (idx / bins, idx % bins);
            grid.rect_mass(edges[i], edges[i + 1], edges[j], edges[j + 1])
        })
        .collect();
    let mut stat = 0.0;
    let mut cells = 0usize;
    let mut pooled_obs = outside as f64;
    let mut pooled_exp = n * (1.0 - masses.iter().sum::<f64>()).max(0.0);
    for (&c, &m) in counts.iter().zip(&masses) {
        let e = n * m;
        if e >= 5.0 {
            stat += (c as f64 - e).powi(2) / e;
            cells += 1;
        } else {
            pooled_obs += c as f64;
            pooled_exp += e.max(0.0);
        }
    }
    if pooled_exp > 0.0 {
        stat += (pooled_obs - pooled_exp).powi(2) / pooled_exp;
        cells += 1;
    }
    let dof = cells.saturating_sub(1).max(1);
    let p_value = ChiSquared::new(dof as f64).map(|d| d.sf(stat)).unwrap_or(f64::NAN);
    ChiSquareReport { statistic: stat, dof, p_value, cells }
}

/// ã_{k,l}, P, its scaled derivatives P^{(m,n)}, the Gaussian averages
/// c_{m,n}(α) and the correction polynomials g_k at one σ.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpansionPolynomials {
    pub sigma: f64,
    pub order: usize,
    pub psi: f64,
    pub a_tilde: Vec<((usize, usize), Complex64)>,
    /// P(u, v) = 1 + Σ ã_{k,l}(u+iv)^k(u−iv)^l.
    pub p: BiPoly<Complex64>,
    /// P^{(m,n)} = ∂_u^m ∂_v^n P/(m!n!(πi)^{m+n}) for m + n ≤ order.
    pub p_derivs: Vec<((usize, usize), BiPoly<Complex64>)>,
    /// c_{m,n}(α) = Σ_ℓ c[ℓ] α^ℓ.
    pub c: Vec<((usize, usize), Vec<f64>)>,
    /// g_k(x, y) for 0 ≤ k ≤ order.
    pub g: Vec<BiPoly<f64>>,
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|j| j as f64).product()
}

/// ∫ u^r e^{−π²u²} du = Γ((r+1)/2)/π^{r+1} (zero for odd r).
fn pi2_moment(r: usize) -> f64 {
    gaussian_moment(r) / PI.powi(r as i32 + 1)
}

impl ExpansionPolynomials {
    pub fn from_coefficients(coeffs: &ExpansionCoefficients) -> Self {
        let d = coeffs.order;
        let mut p = BiPoly::constant(Complex64::new(1.0, 0.0), d);
        for &((k, l), a) in &coeffs.a_tilde {
            let zp = z_power(k, l, d).scale(a);
            for i in 0..=d {
                for j in 0..=d - i {
                    p.add_term(i, j, zp.coeffs[i][j]);
                }
            }
        }
        let mut p_derivs = Vec::new();
        let mut c = Vec::new();
        for total in 0..=d {
            for m in 0..=total {
                let n = total - m;
                let scale = Complex64::new(0.0, PI).powu(total as u32).inv() / (factorial(m) * factorial(n));
                let q = p.derivative(m, n).scale(scale);
                let mut cl = vec![0.0; d + 1];
                for r in 0..=d {
                    for s in 0..=d - r {
                        // only even r, s survive; the coefficient there is real
                        cl[r + s] += q.coeffs[r][s].re * pi2_moment(r) * pi2_moment(s);
                    }
                }
                p_derivs.push(((m, n), q));
                c.push(((m, n), cl));
            }
        }
        let mut g = Vec::new();
        for k in 0..=d {
            let mut gk = BiPoly::zero(d);
            for &((m, n), ref cl) in &c {
                if m + n <= k {
                    gk.coeffs[m][n] = cl[k - m - n] * PI.sqrt().powi((m + n + 2) as i32);
                }
            }
            g.push(gk);
        }
        Self { sigma: coeffs.sigma, order: d, psi: coeffs.psi, a_tilde: coeffs.a_tilde.clone(), p, p_derivs, c, g }
    }

    pub fn c_poly(&self, m: usize, n: usize) -> Option<&[f64]> {
        self.c.iter().find(|(mn, _)| *mn == (m, n)).map(|(_, v)| v.as_slice())
    }

    pub fn p_deriv(&self, m: usize, n: usize) -> Option<&BiPoly<Complex64>> {
        self.p_derivs.iter().find(|(mn, _)| *mn == (m, n)).map(|(_, v)| v)
    }

    /// c_{m,n}(α).
    pub fn c_at(&self, m: usize, n: usize, alpha: f64) -> f64 {
        self.c_poly(m, n).map_or(0.0, |cl| cl.iter().rev().fold(0.0, |acc, c| acc * alpha + c))
    }

    /// max |Im| over the coefficients of every P^{(m,n)} that meet an even
    /// Gaussian moment; zero up to rounding.
    pub fn imaginary_residue(&self) -> f64 {
        let d = self.order;
        let mut worst = 0.0f64;
        for (_, q) in &self.p_derivs {
            for r in (0..=d).step_by(2) {
                for s in (0..=d - r).step_by(2) {
                    worst = worst.max(q.coeffs[r][s].im.abs());
                }
            }
        }
        worst
    }

    pub fn write_json<W: Write>(&self, out: W) -> Result<()> {
        serde_json::to_writer_pretty(out, self).map_err(|e| Error::Format(e.to_string()))
    }
}

/// Expansion data at σ with P of degree ≤ `order` (default 5).
pub fn build_expansion(sigma: f64, table: &PrimeTable, order: usize) -> Result<ExpansionPolynomials> {
    Ok(ExpansionPolynomials::from_coefficients(&ExpansionCoefficients::new(sigma, table, order)?))
}

/// Σ_{m+n ≤ order} c_{m,n}(1/√ψ)/ψ^{m+n+1} x^m y^n e^{−(x²+y²)/ψ}.
pub fn density_expansion_eval(x: f64, y: f64, poly: &ExpansionPolynomials) -> f64 {
    let psi = poly.psi;
    let alpha = 1.0 / psi.sqrt();
    let mut acc = 0.0;
    for &((m, n), _) in &poly.c {
        acc += poly.c_at(m, n, alpha) / psi.powi((m + n + 1) as i32) * x.powi(m as i32) * y.powi(n as i32);
    }
    acc * (-(x * x + y * y) / psi).exp()
}

/// σ_T = ½ + (log T)^{−θ}.
pub fn sigma_t(theta: f64, t: f64) -> f64 {
    0.5 + t.ln().powf(-theta)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxRegion {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CltPrediction {
    pub sigma_t: f64,
    pub psi_t: f64,
    /// ψ_T^{−k/2} ∬_box g_k e^{−π(x²+y²)} for each k.
    pub terms: Vec<f64>,
    pub total: f64,
}

/// ∬_box g_k(x, y) e^{−π(x²+y²)} dx dy in closed form.
pub fn gaussian_box_integral(g: &BiPoly<f64>, region: &BoxRegion) -> f64 {
    let d = g.degree_bound();
    let mx = scaled_gaussian_moments(region.a, region.b, 1.0 / PI, d);
    let my = scaled_gaussian_moments(region.c, region.d, 1.0 / PI, d);
    let mut acc = 0.0;
    for m in 0..=d {
        for n in 0..=d - m {
            acc += g.coeffs[m][n] * mx[m] * my[n];
        }
    }
    acc
}

/// Σ_{k ≤ order} ψ_T^{−k/2} ∬_box g_k e^{−π(x²+y²)} for κ(σ_T, X) at the given θ, T.
pub fn clt_box_probability(
    theta: f64,
    t: f64,
    region: &BoxRegion,
    table: &PrimeTable,
    order: usize,
) -> Result<CltPrediction> {
    if t < 10.0 {
        return Err(Error::Domain(format!("T = {t} must be >= 10")));
    }
    if !(theta > 0.0 && theta < 0.5) {
        return Err(Error::Domain(format!("theta = {theta} must lie in (0, 1/2)")));
    }
    let sigma = sigma_t(theta, t);
    let poly = build_expansion(sigma, table, order)?;
    Ok(clt_from_polynomials(&poly, region))
}

pub fn clt_from_polynomials(poly: &ExpansionPolynomials, region: &BoxRegion) -> CltPrediction {
    let terms: Vec<f64> = poly
        .g
        .iter()
        .enumerate()
        .map(|(k, g)| poly.psi.powf(-(k as f64) / 2.0) * gaussian_box_integral(g, region))
        .collect();
    let total = terms.iter().sum();
    CltPrediction { sigma_t: poly.sigma, psi_t: poly.psi, terms, total }
}

impl BoxRegion {
    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.a && x <= self.b && y >= self.c && y <= self.d
    }

    /// Parses `a,b,c,d`; `inf` and `-inf` are accepted.
    pub fn parse(text: &str) -> Result<Self> {
        let v: Vec<f64> = text
            .split(',')
            .map(|x| x.trim().parse::<f64>().map_err(|e| Error::Format(format!("box '{text}': {e}"))))
            .collect::<Result<_>>()?;
        match v[..] {
            [a, b, c, d] if a < b && c < d => Ok(Self { a, b, c, d }),
            _ => Err(Error::Format(format!("box '{text}' needs a < b, c < d"))),
        }
    }
}

/// Monte Carlo frequency of one box with its binomial standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxFrequency {
    pub region: BoxRegion,
    pub frequency: f64,
    pub std_error: f64,
}

/// P[κ ∈ box] for κ = log ζ(σ_T, X)/√(πψ_T), sampled over primes up to
/// `cutoff` with the omitted primes replaced by a Gaussian of equal variance.
pub fn clt_monte_carlo(
    theta: f64,
    t: f64,
    regions: &[BoxRegion],
    n: usize,
    seed: u64,
    cutoff: f64,
    table: &PrimeTable,
) -> Result<Vec<BoxFrequency>> {
    if n == 0 {
        return Err(Error::InvalidExperiment("need at least one sample".into()));
    }
    let sigma = sigma_t(theta, t);
    let psi = table.psi(sigma, table.limit())?.value;
    let sampler = LogZetaSampler::new(SamplerConfig { sigma, cutoff, gaussian_tail: true }, table)?;
    let scale = 1.0 / (PI * psi).sqrt();
    let values = sampler.sample_set(seed, n).values;
    Ok(regions
        .iter()
        .map(|r| {
            let hits = values.iter().filter(|z| r.contains(z.re * scale, z.im * scale)).count();
            let p = hits as f64 / n as f64;
            BoxFrequency { region: *r, frequency: p, std_error: (p * (1.0 - p) / n as f64).sqrt() }
        })
        .collect())
}
