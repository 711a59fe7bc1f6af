//! Empirical law of log ζ(σ+it), t ∈ [T, 2T], against the random model:
//! rectangle discrepancy and characteristic-function gaps.

use crate::charfn::PhiHatModel;
use crate::density::DensityGrid;
use crate::error::{Error, Result};
use crate::rng::mix64;
use crate::zeta::sample_log_zeta_batch;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::io::Write;

/// Largest tolerated fraction of samples whose branch tracking failed.
pub const MAX_EXCLUDED: f64 = 0.01;
/// Model mass allowed outside the density grid.
pub const COVERAGE_MASS: f64 = 1e-4;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalDistribution2D {
    pub sigma: f64,
    /// [T, 2T].
    pub window: (f64, f64),
    /// Heights actually sampled, including excluded ones.
    pub ts: Vec<f64>,
    /// log ζ at the retained heights.
    pub samples: Vec<Complex64>,
    pub n_total: usize,
    pub n_excluded: usize,
    pub seed: u64,
}

/// Phase offset in [0, 1) derived from the experiment seed.
pub fn grid_offset(seed: u64) -> f64 {
    (mix64(seed) >> 11) as f64 / (1u64 << 53) as f64
}

/// t_k = T + (k + offset)·T/n for k < n.
pub fn t_grid(t: f64, n: usize, seed: u64) -> Vec<f64> {
    let off = grid_offset(seed);
    (0..n).map(|k| t + (k as f64 + off) * t / n as f64).collect()
}

impl EmpiricalDistribution2D {
    /// Samples log ζ(σ+it) on the equally spaced grid of [`t_grid`]. Samples
    /// with failed branch tracking are dropped and counted.
    pub fn from_zeta(sigma: f64, t: f64, n: usize, seed: u64, precision: f64) -> Result<Self> {
        if n == 0 || !(t > 0.0) {
            return Err(Error::InvalidExperiment(format!("need n > 0 and T > 0, got n = {n}, T = {t}")));
        }
        let ts = t_grid(t, n, seed);
        let raw = sample_log_zeta_batch(sigma, &ts, precision)?;
        let samples: Vec<Complex64> = raw.iter().filter(|s| s.branch_ok).map(|s| s.log_zeta).collect();
        let out = Self { sigma, window: (t, 2.0 * t), ts, n_excluded: n - samples.len(), n_total: n, samples, seed };
        out.validate()?;
        Ok(out)
    }

    /// Wraps values from another source, e.g. model Monte Carlo draws.
    pub fn from_values(sigma: f64, window: (f64, f64), samples: Vec<Complex64>, seed: u64) -> Self {
        let n = samples.len();
        Self { sigma, window, ts: Vec::new(), samples, n_total: n, n_excluded: 0, seed }
    }

    pub fn excluded_fraction(&self) -> f64 {
        if self.n_total == 0 {
            0.0
        } else {
            self.n_excluded as f64 / self.n_total as f64
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples.is_empty() {
            return Err(Error::InvalidExperiment("no usable samples".into()));
        }
        if self.excluded_fraction() > MAX_EXCLUDED {
            return Err(Error::InvalidExperiment(format!(
                "{} of {} samples excluded (limit {})",
                self.n_excluded, self.n_total, MAX_EXCLUDED
            )));
        }
        Ok(())
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "re,im")?;
        for z in &self.samples {
            writeln!(out, "{:?},{:?}", z.re, z.im)?;
        }
        Ok(())
    }
}

/// A law on ℝ² that can report P[X ≤ x, Y ≤ y] on a grid of cuts.
pub trait CdfModel {
    /// table[i][j] = P[X ≤ xs[i], Y ≤ ys[j]]; coordinates may be ±∞.
    fn cdf_table(&self, xs: &[f64], ys: &[f64]) -> Vec<Vec<f64>>;
}

impl CdfModel for DensityGrid {
    fn cdf_table(&self, xs: &[f64], ys: &[f64]) -> Vec<Vec<f64>> {
        DensityGrid::cdf_table(self, xs, ys)
    }
}

impl CdfModel for EmpiricalDistribution2D {
    fn cdf_table(&self, xs: &[f64], ys: &[f64]) -> Vec<Vec<f64>> {
        // cell (i, j) of the counts holds xs[i−1] < re ≤ xs[i]
        let counts = cell_counts(&self.samples, xs, ys);
        let n = self.samples.len() as f64;
        let mut out = vec![vec![0.0; ys.len()]; xs.len()];
        for i in 0..xs.len() {
            for j in 0..ys.len() {
                let left = if i > 0 { out[i - 1][j] } else { 0.0 };
                let down = if j > 0 { out[i][j - 1] } else { 0.0 };
                let diag = if i > 0 && j > 0 { out[i - 1][j - 1] } else { 0.0 };
                out[i][j] = left + down - diag + counts[i][j] as f64 / n;
            }
        }
        out
    }
}

/// counts[i][j] = #{x_{i−1} < re ≤ x_i, y_{j−1} < im ≤ y_j}, with the last
/// cell on each axis unbounded above.
fn cell_counts(samples: &[Complex64], xs: &[f64], ys: &[f64]) -> Vec<Vec<u64>> {
    let mut c = vec![vec![0u64; ys.len() + 1]; xs.len() + 1];
    for z in samples {
        let i = xs.partition_point(|&x| x < z.re);
        let j = ys.partition_point(|&y| y < z.im);
        c[i][j] += 1;
    }
    c
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
    pub empirical_mass: f64,
    pub model_mass: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscrepancyReport {
    /// sup |empirical − model| over rectangles with corners on the cut grid.
    pub d_hat: f64,
    /// The maximising rectangle; |empirical_mass − model_mass| = d_hat.
    pub certificate: Certificate,
    /// Binomial standard error of the certificate's empirical mass.
    pub sampling_error: f64,
    /// 1/√n, the scale of D̂ when the samples come from the model itself.
    pub null_scale: f64,
    pub n: usize,
    pub cuts_x: usize,
    pub cuts_y: usize,
}

impl DiscrepancyReport {
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "d_hat,sampling_error,null_scale,n,cuts_x,cuts_y,x0,x1,y0,y1,empirical_mass,model_mass")?;
        let c = &self.certificate;
        writeln!(
            out,
            "{:?},{:?},{:?},{},{},{},{:?},{:?},{:?},{:?},{:?},{:?}",
            self.d_hat,
            self.sampling_error,
            self.null_scale,
            self.n,
            self.cuts_x,
            self.cuts_y,
            c.x0,
            c.x1,
            c.y0,
            c.y1,
            c.empirical_mass,
            c.model_mass
        )?;
        Ok(())
    }
}

/// At most `k` cuts strictly between sample values, at evenly spaced order
/// statistics; all samples are used when n ≤ k + 1.
pub fn quantile_cuts(values: &mut [f64], k: usize) -> Vec<f64> {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    let mut cuts = Vec::new();
    if n < 2 {
        return cuts;
    }
    let k = k.min(n - 1);
    for q in 1..=k {
        let idx = (q * n / (k + 1)).clamp(1, n - 1);
        let (a, b) = (values[idx - 1], values[idx]);
        if b > a {
            cuts.push(0.5 * (a + b));
        }
    }
    cuts.dedup();
    cuts
}

/// Maximum and minimum of contiguous subarray sums with their index ranges.
fn kadane(xs: &[f64]) -> ((f64, usize, usize), (f64, usize, usize)) {
    let mut best_max = (f64::NEG_INFINITY, 0, 0);
    let mut best_min = (f64::INFINITY, 0, 0);
    let (mut cur_max, mut start_max) = (0.0, 0);
    let (mut cur_min, mut start_min) = (0.0, 0);
    for (i, &x) in xs.iter().enumerate() {
        if cur_max <= 0.0 {
            cur_max = x;
            start_max = i;
        } else {
            cur_max += x;
        }
        if cur_max > best_max.0 {
            best_max = (cur_max, start_max, i);
        }
        if cur_min >= 0.0 {
            cur_min = x;
            start_min = i;
        } else {
            cur_min += x;
        }
        if cur_min < best_min.0 {
            best_min = (cur_min, start_min, i);
        }
    }
    (best_max, best_min)
}

/// D̂ = sup over rectangles with corners on the cut grid of
/// |empirical mass − model mass|.
///
/// Cuts are taken at up to `cuts` sample quantiles per axis (plus ±∞), the
/// cell-wise mass differences are formed, and the best rectangle is found by
/// a 2-D maximum-subarray scan in O(cuts³).
pub fn estimate_discrepancy<M: CdfModel>(
    emp: &EmpiricalDistribution2D,
    model: &M,
    cuts: usize,
) -> Result<DiscrepancyReport> {
    emp.validate()?;
    let xs_inner = quantile_cuts(&mut emp.samples.iter().map(|z| z.re).collect::<Vec<_>>(), cuts);
    let ys_inner = quantile_cuts(&mut emp.samples.iter().map(|z| z.im).collect::<Vec<_>>(), cuts);
    let mut xs = vec![f64::NEG_INFINITY];
    xs.extend(&xs_inner);
    xs.push(f64::INFINITY);
    let mut ys = vec![f64::NEG_INFINITY];
    ys.extend(&ys_inner);
    ys.push(f64::INFINITY);
    let cdf = model.cdf_table(&xs, &ys);
    let counts = cell_counts(&emp.samples, &xs_inner, &ys_inner);
    let n = emp.samples.len() as f64;
    let (nx, ny) = (xs.len() - 1, ys.len() - 1);
    // cell (i, j) spans (xs[i], xs[i+1]] × (ys[j], ys[j+1]]
    let mut diff = vec![vec![0.0; ny]; nx];
    for i in 0..nx {
        for j in 0..ny {
            let m = cdf[i + 1][j + 1] - cdf[i][j + 1] - cdf[i + 1][j] + cdf[i][j];
            diff[i][j] = counts[i][j] as f64 / n - m;
        }
    }
    let mut best = (0.0f64, 0, 0, 0, 0);
    let mut col = vec![0.0; ny];
    for i0 in 0..nx {
        col.iter_mut().for_each(|c| *c = 0.0);
        for i1 in i0..nx {
            for j in 0..ny {
                col[j] += diff[i1][j];
            }
            let (mx, mn) = kadane(&col);
            if mx.0 > best.0 {
                best = (mx.0, i0, i1, mx.1, mx.2);
            }
            if -mn.0 > best.0 {
                best = (-mn.0, i0, i1, mn.1, mn.2);
            }
        }
    }
    let (_, i0, i1, j0, j1) = best;
    let (x0, x1, y0, y1) = (xs[i0], xs[i1 + 1], ys[j0], ys[j1 + 1]);
    let model_mass = cdf[i1 + 1][j1 + 1] - cdf[i0][j1 + 1] - cdf[i1 + 1][j0] + cdf[i0][j0];
    let hits: u64 = (i0..=i1).flat_map(|i| (j0..=j1).map(move |j| (i, j))).map(|(i, j)| counts[i][j]).sum();
    let empirical_mass = hits as f64 / n;
    Ok(DiscrepancyReport {
        d_hat: (empirical_mass - model_mass).abs(),
        certificate: Certificate { x0, x1, y0, y1, empirical_mass, model_mass },
        sampling_error: (empirical_mass * (1.0 - empirical_mass) / n).sqrt(),
        null_scale: 1.0 / n.sqrt(),
        n: emp.samples.len(),
        cuts_x: xs_inner.len(),
        cuts_y: ys_inner.len(),
    })
}

/// Fails when the model puts more than [`COVERAGE_MASS`] outside its output grid.
pub fn check_coverage(model: &DensityGrid) -> Result<f64> {
    let (lo, hi) = (model.x_nodes[0], model.x_nodes[model.x_nodes.len() - 1]);
    let (ylo, yhi) = (model.y_nodes[0], model.y_nodes[model.y_nodes.len() - 1]);
    let outside = (1.0 - model.rect_mass(lo, hi, ylo, yhi)).abs();
    if outside > COVERAGE_MASS {
        return Err(Error::Coverage(format!("model mass {outside:e} outside the grid exceeds {COVERAGE_MASS:e}")));
    }
    Ok(outside)
}

/// [`estimate_discrepancy`] against an inverted density, after the coverage check.
pub fn discrepancy_against_density(
    emp: &EmpiricalDistribution2D,
    model: &DensityGrid,
    cuts: usize,
) -> Result<DiscrepancyReport> {
    check_coverage(model)?;
    estimate_discrepancy(emp, model, cuts)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CharGap {
    pub u: f64,
    pub v: f64,
    /// (1/n) Σ e^{2πi(u Re + v Im)} over the samples.
    pub empirical: Complex64,
    /// Standard error of the sample mean, √((1 − |Φ̂_T|²)/n).
    pub se: f64,
    pub model: Complex64,
    pub model_error: f64,
    pub gap: f64,
}

/// Frequency bound (log T)^{θ_L}, which needs θ_L < (1 − θ)/4.
pub fn frequency_limit(t: f64, theta: f64, theta_l: f64) -> Result<f64> {
    if !(theta_l > 0.0 && theta_l < (1.0 - theta) / 4.0) {
        return Err(Error::Domain(format!("theta_L = {theta_l} must lie in (0, (1 - theta)/4)")));
    }
    Ok(t.ln().powf(theta_l))
}

/// The empirical transform at one point.
pub fn empirical_char(samples: &[Complex64], u: f64, v: f64) -> Complex64 {
    let n = samples.len() as f64;
    let (mut c, mut s) = (0.0, 0.0);
    for z in samples {
        let (si, co) = (2.0 * PI * (u * z.re + v * z.im)).sin_cos();
        c += co;
        s += si;
    }
    Complex64::new(c / n, s / n)
}

/// Empirical transform against Φ̂_rand at each (u, v), with |u|, |v| ≤ `limit`.
pub fn compare_char_functions(
    emp: &EmpiricalDistribution2D,
    model: &PhiHatModel,
    uv: &[(f64, f64)],
    limit: f64,
) -> Result<Vec<CharGap>> {
    emp.validate()?;
    let n = emp.samples.len() as f64;
    uv.iter()
        .map(|&(u, v)| {
            if u.abs() > limit || v.abs() > limit {
                return Err(Error::Domain(format!("(u, v) = ({u}, {v}) beyond the frequency limit {limit}")));
            }
            let e = empirical_char(&emp.samples, u, v);
            let m = model.eval(u, v)?;
            Ok(CharGap {
                u,
                v,
                empirical: e,
                se: ((1.0 - e.norm_sqr()).max(0.0) / n).sqrt(),
                model: m.value,
                model_error: m.error,
                gap: (e - m.value).norm(),
            })
        })
        .collect()
}

pub fn write_char_gaps_csv<W: Write>(mut out: W, gaps: &[CharGap]) -> Result<()> {
    writeln!(out, "u,v,emp_re,emp_im,se,model_re,model_im,model_error,gap")?;
    for g in gaps {
        writeln!(
            out,
            "{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?}",
            g.u, g.v, g.empirical.re, g.empirical.im, g.se, g.model.re, g.model.im, g.model_error, g.gap
        )?;
    }
    Ok(())
}
