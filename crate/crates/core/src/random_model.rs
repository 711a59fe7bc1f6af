//! The random Euler product ζ(σ, X) = Π_p (1 − X(p) p^{-σ})^{-1} with i.i.d.
//! uniform phases X(p), its Dirichlet-polynomial analogue R_Y(σ, X), and
//! Monte Carlo checks of their moments and tails.

use crate::error::{Error, Result};
use crate::primes::PrimeTable;
use crate::rng::{derive_seed, gaussian_stream, standard_normal, PhaseStream};
use crate::summation::{ComplexSum, NeumaierSum};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;
use std::io::{BufRead, Write};

/// One realisation of the phases: `phases[i]` belongs to the i-th prime.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseAssignment {
    pub seed: u64,
    phases: Vec<f64>,
}

impl PhaseAssignment {
    /// Phases for the first `n_primes` primes, drawn from the stream of `seed`.
    pub fn from_seed(seed: u64, n_primes: usize) -> Self {
        let mut stream = PhaseStream::new(seed);
        Self { seed, phases: (0..n_primes).map(|_| stream.next_phase()).collect() }
    }

    pub fn from_phases(seed: u64, phases: Vec<f64>) -> Self {
        Self { seed, phases }
    }

    pub fn constant(angle: f64, n_primes: usize) -> Self {
        Self { seed: 0, phases: vec![angle.rem_euclid(TAU); n_primes] }
    }

    /// θ_p → −θ_p for every prime.
    pub fn conjugate(&self) -> Self {
        let phases = self.phases.iter().map(|&t| if t == 0.0 { 0.0 } else { TAU - t }).collect();
        Self { seed: self.seed, phases }
    }

    pub fn len(&self) -> usize {
        self.phases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phases.is_empty()
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }
}

/// Size of the part of the Euler product beyond the cutoff.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailBound {
    /// √(E|tail|²) = √(Σ_{p>cutoff} Σ_k k^{-2} p^{-2kσ}).
    pub rms: f64,
    /// Level exceeded with probability below 1e-9 (sub-Gaussian estimate).
    pub high_probability: f64,
}

impl TailBound {
    fn from_variance(v: f64) -> Self {
        // P(|G| > A) ≤ 4 exp(−A²/(2V)) for a sum of bounded isotropic terms
        let hp = (2.0 * v * (4e9f64).ln()).sqrt();
        Self { rms: v.sqrt(), high_probability: hp }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RandomSample {
    pub value: Complex64,
    pub tail: TailBound,
}

/// E|Σ_{p > cutoff} −log(1 − X(p)p^{-σ})|².
pub fn tail_variance(table: &PrimeTable, sigma: f64, cutoff: f64) -> Result<f64> {
    if sigma <= 0.5 {
        return Err(Error::Divergent { sigma });
    }
    let full = table.psi(sigma, table.limit().max(100))?;
    let mut head = NeumaierSum::new();
    for &l in &table.ln_primes()[..table.count_up_to(cutoff)] {
        let w2 = (-2.0 * sigma * l).exp();
        let (mut pw, mut k) = (w2, 1.0f64);
        while pw > 1e-22 * w2 {
            head.add(pw / (k * k));
            pw *= w2;
            k += 1.0;
        }
    }
    Ok((full.value - head.value()).max(0.0))
}

#[inline]
fn neg_log_factor(theta: f64, w: f64) -> Complex64 {
    let (s, c) = theta.sin_cos();
    let one_minus = Complex64::new(1.0 - w * c, -w * s);
    -one_minus.ln()
}

fn check_inputs(sigma: f64, cutoff: f64, table: &PrimeTable, n_phases: usize) -> Result<usize> {
    if sigma <= 0.5 {
        return Err(Error::Divergent { sigma });
    }
    let n = table.primes_up_to(cutoff)?.len();
    if n > n_phases {
        return Err(Error::Domain(format!("assignment covers {n_phases} primes, cutoff needs {n}")));
    }
    Ok(n)
}

/// Σ_{p ≤ cutoff} −log(1 − e^{iθ_p} p^{-σ}) with principal logs.
pub fn sample_log_zeta_rand(
    sigma: f64,
    cutoff: f64,
    assignment: &PhaseAssignment,
    table: &PrimeTable,
) -> Result<RandomSample> {
    let n = check_inputs(sigma, cutoff, table, assignment.len())?;
    let mut acc = ComplexSum::new();
    for (&l, &theta) in table.ln_primes()[..n].iter().zip(assignment.phases()) {
        acc.add(neg_log_factor(theta, (-sigma * l).exp()));
    }
    let v = tail_variance(table, sigma, cutoff)?;
    Ok(RandomSample { value: acc.value(), tail: TailBound::from_variance(v) })
}

/// R_Y(σ, X) = Σ_{p^k ≤ Y} X(p)^k/(k p^{kσ}).
pub fn sample_r_y_rand(sigma: f64, y: f64, assignment: &PhaseAssignment, table: &PrimeTable) -> Result<Complex64> {
    check_inputs(sigma, y, table, assignment.len())?;
    let mut acc = ComplexSum::new();
    for pp in table.prime_powers_up_to(y)? {
        let idx = table.index_of(pp.p).expect("prime power base is tabulated");
        let k = pp.k as f64;
        let mag = (-(sigma * k) * (pp.p as f64).ln()).exp() / k;
        acc.add(Complex64::from_polar(mag, k * assignment.phases()[idx]));
    }
    Ok(acc.value())
}

/// Parameters of a Monte Carlo run of ζ(σ, X).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub sigma: f64,
    pub cutoff: f64,
    /// Add a complex normal with the variance of the omitted primes.
    pub gaussian_tail: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SampleSet {
    pub config: SamplerConfig,
    pub values: Vec<Complex64>,
    pub seeds: Vec<u64>,
    pub tail: TailBound,
}

/// Precomputed per-prime data so that a sample is one pass over the phases.
pub struct LogZetaSampler {
    config: SamplerConfig,
    weights: Vec<f64>,
    tail_sd: f64,
    tail: TailBound,
}

impl LogZetaSampler {
    pub fn new(config: SamplerConfig, table: &PrimeTable) -> Result<Self> {
        check_inputs(config.sigma, config.cutoff, table, usize::MAX)?;
        let n = table.count_up_to(config.cutoff);
        let weights = table.ln_primes()[..n].iter().map(|&l| (-config.sigma * l).exp()).collect();
        let v = tail_variance(table, config.sigma, config.cutoff)?;
        Ok(Self { config, weights, tail_sd: (0.5 * v).sqrt(), tail: TailBound::from_variance(v) })
    }

    pub fn tail(&self) -> TailBound {
        self.tail
    }

    pub fn n_primes(&self) -> usize {
        self.weights.len()
    }

    /// The sample with phases from `seed`; equal to [`sample_log_zeta_rand`]
    /// on `PhaseAssignment::from_seed(seed, ..)`, plus the optional Gaussian tail.
    pub fn sample(&self, seed: u64) -> Complex64 {
        let mut stream = PhaseStream::new(seed);
        let mut acc = ComplexSum::new();
        for &w in &self.weights {
            acc.add(neg_log_factor(stream.next_phase(), w));
        }
        let mut z = acc.value();
        if self.config.gaussian_tail && self.tail_sd > 0.0 {
            let mut g = gaussian_stream(seed);
            z += Complex64::new(standard_normal(&mut g), standard_normal(&mut g)) * self.tail_sd;
        }
        z
    }

    pub fn sample_set(&self, base_seed: u64, n: usize) -> SampleSet {
        let seeds: Vec<u64> = (0..n as u64).map(|i| derive_seed(base_seed, i)).collect();
        let values = seeds.par_iter().map(|&s| self.sample(s)).collect();
        SampleSet { config: self.config, values, seeds, tail: self.tail }
    }
}

impl SampleSet {
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "seed,re,im")?;
        for (s, v) in self.seeds.iter().zip(&self.values) {
            writeln!(out, "{s},{:?},{:?}", v.re, v.im)?;
        }
        Ok(())
    }

    /// Reads (seed, value) rows; the config is supplied by the caller.
    pub fn read_csv<R: BufRead>(input: R, config: SamplerConfig, tail: TailBound) -> Result<Self> {
        let mut seeds = Vec::new();
        let mut values = Vec::new();
        for (i, line) in input.lines().enumerate() {
            let line = line?;
            if i == 0 || line.trim().is_empty() {
                continue;
            }
            let mut it = line.split(',');
            let mut next = || it.next().ok_or_else(|| Error::Format(format!("short row {i}")));
            let seed = next()?.trim().parse::<u64>().map_err(|e| Error::Format(e.to_string()))?;
            let re = next()?.trim().parse::<f64>().map_err(|e| Error::Format(e.to_string()))?;
            let im = next()?.trim().parse::<f64>().map_err(|e| Error::Format(e.to_string()))?;
            seeds.push(seed);
            values.push(Complex64::new(re, im));
        }
        Ok(Self { config, values, seeds, tail })
    }
}

/// Monte Carlo mean and its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
}

pub fn estimate(xs: impl IntoIterator<Item = f64>) -> Estimate {
    let mut n = 0.0;
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for x in xs {
        n += 1.0;
        let d = x - mean;
        mean += d / n;
        m2 += d * (x - mean);
    }
    let var = if n > 1.0 { m2 / (n - 1.0) } else { 0.0 };
    Estimate { mean, std_error: (var / n).sqrt() }
}

/// Both the prime-only sum S = Σ_{p≤Y} X(p)p^{-σ} and R_Y(σ, X) for one seed.
fn prime_sums(
    seed: u64,
    weights: &[f64],
    powers: &[(usize, f64, f64)], // (prime index, k, p^{-kσ}/k) for k ≥ 2
) -> (Complex64, Complex64) {
    let mut stream = PhaseStream::new(seed);
    let phases: Vec<f64> = (0..weights.len()).map(|_| stream.next_phase()).collect();
    let mut s = ComplexSum::new();
    for (&w, &th) in weights.iter().zip(&phases) {
        s.add(Complex64::from_polar(w, th));
    }
    let mut r = s;
    for &(i, k, m) in powers {
        r.add(Complex64::from_polar(m, k * phases[i]));
    }
    (s.value(), r.value())
}

struct PrimeSumSampler {
    weights: Vec<f64>,
    powers: Vec<(usize, f64, f64)>,
}

impl PrimeSumSampler {
    fn new(sigma: f64, y: f64, table: &PrimeTable) -> Result<Self> {
        check_inputs(sigma, y, table, usize::MAX)?;
        let n = table.count_up_to(y);
        let weights = table.ln_primes()[..n].iter().map(|&l| (-sigma * l).exp()).collect();
        let powers = table
            .prime_powers_up_to(y)?
            .iter()
            .filter(|pp| pp.k >= 2)
            .map(|pp| {
                let k = pp.k as f64;
                (table.index_of(pp.p).unwrap(), k, (pp.p as f64).powf(-sigma * k) / k)
            })
            .collect();
        Ok(Self { weights, powers })
    }

    fn draw(&self, base_seed: u64, n: usize) -> Vec<(Complex64, Complex64)> {
        (0..n as u64)
            .into_par_iter()
            .map(|i| prime_sums(derive_seed(base_seed, i), &self.weights, &self.powers))
            .collect()
    }
}

/// E|Σ c_p X(p)|^{2k} = (k!)² [x^k] Π_p Σ_m c_p^{2m} x^m/(m!)², exactly.
pub fn exact_prime_sum_moment(weights: &[f64], k: usize) -> f64 {
    let mut poly = vec![0.0; k + 1];
    poly[0] = 1.0;
    for &c in weights {
        let c2 = c * c;
        for deg in (1..=k).rev() {
            let mut add = 0.0;
            let mut coef = 1.0;
            for m in 1..=deg {
                coef *= c2 / (m * m) as f64;
                add += coef * poly[deg - m];
            }
            poly[deg] += add;
        }
    }
    let kf: f64 = (1..=k).map(|j| j as f64).product();
    kf * kf * poly[k]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub sigma: f64,
    pub y: f64,
    pub k: usize,
    pub n_samples: usize,
    /// S(σ, Y) = Σ_{p≤Y} p^{-2σ}.
    pub prime_sum: f64,
    /// Monte Carlo E|Σ_{p≤Y} X(p)p^{-σ}|^{2k}.
    pub prime_moment: Estimate,
    /// The same moment computed exactly.
    pub prime_moment_exact: f64,
    /// k!·S^k.
    pub factorial_bound: f64,
    /// Monte Carlo E|R_Y(σ, X)|^{2k}.
    pub r_y_moment: Estimate,
    /// Smallest C with E|R_Y|^{2k} ≤ (C·k·S)^k, from the estimate.
    pub implied_c1: f64,
    /// prime_moment ≤ factorial_bound + 3 SE.
    pub pass: bool,
}

pub fn check_moment_bound(
    sigma: f64,
    y: f64,
    k: usize,
    n_samples: usize,
    seed: u64,
    table: &PrimeTable,
) -> Result<MomentReport> {
    Ok(check_moment_bounds(sigma, y, &[k], n_samples, seed, table)?.remove(0))
}

/// Moment reports for several k from one shared sample set.
pub fn check_moment_bounds(
    sigma: f64,
    y: f64,
    ks: &[usize],
    n_samples: usize,
    seed: u64,
    table: &PrimeTable,
) -> Result<Vec<MomentReport>> {
    if let Some(&k) = ks.iter().find(|&&k| k == 0 || k > 6) {
        return Err(Error::Domain(format!("moment order k = {k} outside 1..=6")));
    }
    let sampler = PrimeSumSampler::new(sigma, y, table)?;
    let draws = sampler.draw(seed, n_samples);
    let s = table.prime_sum(sigma, y)?;
    Ok(ks
        .iter()
        .map(|&k| {
            let prime_moment = estimate(draws.iter().map(|(p, _)| p.norm_sqr().powi(k as i32)));
            let r_y_moment = estimate(draws.iter().map(|(_, r)| r.norm_sqr().powi(k as i32)));
            let kf: f64 = (1..=k).map(|j| j as f64).product();
            let factorial_bound = kf * s.powi(k as i32);
            MomentReport {
                sigma,
                y,
                k,
                n_samples,
                prime_sum: s,
                prime_moment,
                prime_moment_exact: exact_prime_sum_moment(&sampler.weights, k),
                factorial_bound,
                r_y_moment,
                implied_c1: if s > 0.0 { r_y_moment.mean.powf(1.0 / k as f64) / (k as f64 * s) } else { 0.0 },
                pass: prime_moment.mean <= factorial_bound + 3.0 * prime_moment.std_error,
            }
        })
        .collect())
}

/// Wilson score interval for a binomial proportion at z standard errors.
pub fn wilson_interval(hits: usize, n: usize, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let nf = n as f64;
    let p = hits as f64 / nf;
    let z2 = z * z;
    let denom = 1.0 + z2 / nf;
    let centre = (p + z2 / (2.0 * nf)) / denom;
    let half = z * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt() / denom;
    // the bounds are exactly 0 and 1 at the extremes; avoid rounding there
    let lo = if hits == 0 { 0.0 } else { (centre - half).max(0.0) };
    let hi = if hits == n { 1.0 } else { (centre + half).min(1.0) };
    (lo, hi)
}

pub const TAIL_CONSTANTS: [f64; 3] = [1.0, 4.0, 10.0];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailPoint {
    pub a: f64,
    pub frequency: f64,
    pub wilson: (f64, f64),
    /// exp(−A²/(c·S)) for each c in [`TAIL_CONSTANTS`].
    pub bounds: Vec<f64>,
    /// Constants c whose bound is not contradicted (Wilson lower end ≤ bound).
    pub consistent: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailReport {
    pub sigma: f64,
    pub y: f64,
    pub n_samples: usize,
    pub prime_sum: f64,
    /// Deterministic sup of |R_Y|: Σ_{p^k≤Y} k^{-1}p^{-kσ}.
    pub support_bound: f64,
    pub points: Vec<TailPoint>,
    /// Least-squares slope of ln(frequency) against A², over points with hits.
    pub log_slope: Option<f64>,
}

/// Empirical P[|R_Y(σ, X)| ≥ A] for each A.
pub fn check_tail_bound(
    sigma: f64,
    y: f64,
    a_values: &[f64],
    n_samples: usize,
    seed: u64,
    table: &PrimeTable,
) -> Result<TailReport> {
    if let Some(&a) = a_values.iter().find(|&&a| !(a >= 0.0)) {
        return Err(Error::Domain(format!("tail level A = {a} must be nonnegative")));
    }
    let sampler = PrimeSumSampler::new(sigma, y, table)?;
    let mags: Vec<f64> = sampler.draw(seed, n_samples).into_iter().map(|(_, r)| r.norm()).collect();
    let s = table.prime_sum(sigma, y)?;
    let support_bound: f64 =
        sampler.weights.iter().sum::<f64>() + sampler.powers.iter().map(|&(_, _, m)| m).sum::<f64>();
    let points: Vec<TailPoint> = a_values
        .iter()
        .map(|&a| {
            let hits = mags.iter().filter(|&&m| m >= a).count();
            let wilson = wilson_interval(hits, n_samples, 3.0);
            let bounds: Vec<f64> = TAIL_CONSTANTS.iter().map(|c| (-a * a / (c * s)).exp()).collect();
            let consistent =
                TAIL_CONSTANTS.iter().zip(&bounds).filter(|(_, &b)| wilson.0 <= b).map(|(&c, _)| c).collect();
            TailPoint { a, frequency: hits as f64 / n_samples.max(1) as f64, wilson, bounds, consistent }
        })
        .collect();
    let fit: Vec<(f64, f64)> =
        points.iter().filter(|p| p.frequency > 0.0 && p.a > 0.0).map(|p| (p.a * p.a, p.frequency.ln())).collect();
    let log_slope = (fit.len() >= 2).then(|| {
        let n = fit.len() as f64;
        let mx = fit.iter().map(|p| p.0).sum::<f64>() / n;
        let my = fit.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = fit.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = fit.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
        sxy / sxx
    });
    Ok(TailReport { sigma, y, n_samples, prime_sum: s, support_bound, points, log_slope })
}

/// (z₁, z₂) with exp(z₁L + z₂L̄) = exp(2πi(u·Re L + v·Im L)).
pub fn char_fn_parameters(u: f64, v: f64) -> (Complex64, Complex64) {
    let pi_i = Complex64::new(0.0, std::f64::consts::PI);
    (pi_i * Complex64::new(u, -v), pi_i * Complex64::new(u, v))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpMomentReport {
    pub time_average: Complex64,
    /// |trapezoid(n_t) − trapezoid(n_t/2)|.
    pub quadrature_error: f64,
    pub expectation: Complex64,
    pub expectation_se: f64,
    pub gap: f64,
}

/// (1/(T₂−T₁))∫ exp(z₁R_Y(σ+it) + z₂R̄_Y(σ+it)) dt against E[exp(z₁R_Y(σ,X) + z₂R̄_Y(σ,X))].
#[allow(clippy::too_many_arguments)]
pub fn compare_exp_moments(
    z1: Complex64,
    z2: Complex64,
    sigma: f64,
    y: f64,
    t1: f64,
    t2: f64,
    n_t: usize,
    n_mc: usize,
    seed: u64,
    table: &PrimeTable,
) -> Result<ExpMomentReport> {
    if z1.norm() > 5.0 || z2.norm() > 5.0 {
        return Err(Error::Domain("|z1|, |z2| must be at most 5".into()));
    }
    if !(t2 > t1) || n_t < 4 {
        return Err(Error::Domain("need T2 > T1 and at least 4 time nodes".into()));
    }
    let pps = table.prime_powers_up_to(y)?;
    let terms: Vec<(f64, f64)> = pps
        .iter()
        .map(|pp| {
            let kl = pp.k as f64 * (pp.p as f64).ln();
            ((-sigma * kl).exp() / pp.k as f64, kl)
        })
        .collect();
    let f = |t: f64| {
        let r: Complex64 = crate::summation::sum_complex(terms.iter().map(|&(m, kl)| Complex64::from_polar(m, -t * kl)));
        (z1 * r + z2 * r.conj()).exp()
    };
    let trapezoid = |n: usize| {
        let h = (t2 - t1) / n as f64;
        let inner: Complex64 =
            crate::summation::sum_complex((1..n).into_par_iter().map(|j| f(t1 + j as f64 * h)).collect::<Vec<_>>());
        (inner + 0.5 * (f(t1) + f(t2))) / n as f64
    };
    let fine = trapezoid(n_t);
    let coarse = trapezoid(n_t / 2);

    let sampler = PrimeSumSampler::new(sigma, y, table)?;
    let vals: Vec<Complex64> =
        sampler.draw(seed, n_mc).into_iter().map(|(_, r)| (z1 * r + z2 * r.conj()).exp()).collect();
    let re = estimate(vals.iter().map(|v| v.re));
    let im = estimate(vals.iter().map(|v| v.im));
    let expectation = Complex64::new(re.mean, im.mean);
    Ok(ExpMomentReport {
        time_average: fine,
        quadrature_error: (fine - coarse).norm(),
        expectation,
        expectation_se: re.std_error.hypot(im.std_error),
        gap: (fine - expectation).norm(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_moment_small_cases() {
        let w = [0.5, 0.3, 0.2];
        let s2: f64 = w.iter().map(|c| c * c).sum();
        let s4: f64 = w.iter().map(|c| c.powi(4)).sum();
        assert!((exact_prime_sum_moment(&w, 1) - s2).abs() < 1e-15);
        assert!((exact_prime_sum_moment(&w, 2) - (2.0 * s2 * s2 - s4)).abs() < 1e-15);
        assert!((exact_prime_sum_moment(&[0.7], 3) - 0.7f64.powi(6)).abs() < 1e-15);
    }

    #[test]
    fn wilson_edges() {
        let (lo, hi) = wilson_interval(0, 100, 3.0);
        assert_eq!(lo, 0.0);
        assert!(hi > 0.0 && hi < 0.1);
        let (lo, hi) = wilson_interval(100, 100, 3.0);
        assert!(lo > 0.9 && hi == 1.0);
    }

    #[test]
    fn char_fn_parameters_identity() {
        let l = Complex64::new(0.3, -1.1);
        let (u, v) = (0.7, -0.2);
        let (z1, z2) = char_fn_parameters(u, v);
        let lhs = (z1 * l + z2 * l.conj()).exp();
        let rhs = Complex64::new(0.0, TAU * (u * l.re + v * l.im)).exp();
        assert!((lhs - rhs).norm() < 1e-15);
    }
}
