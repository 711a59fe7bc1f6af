//! Prime and prime-power enumeration, plus the prime sums that parameterise
//! every Euler-product quantity in the crate.

use crate::error::{Error, Result};
use crate::special::exp_integral_e1;
use crate::summation::NeumaierSum;
use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

const CACHE_MAGIC: &[u8; 8] = b"ZLPRIME\0";
const CACHE_VERSION: u32 = 1;

/// Below this point the RH-conditional bound |π(x) − li(x)| ≤ √x·ln x/(8π)
/// is not available and a cruder constant is used.
const SCHOENFELD_START: f64 = 2657.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PrimePower {
    pub p: u64,
    pub k: u32,
    pub value: u64,
}

/// Sieved primes up to `limit` and all prime powers `p^k ≤ limit`.
///
/// Immutable after construction; share it freely between threads.
#[derive(Clone, Debug, PartialEq)]
pub struct PrimeTable {
    limit: u64,
    primes: Vec<u64>,
    ln_primes: Vec<f64>,
    prime_powers: Vec<PrimePower>,
}

/// ψ(σ) split into the finite prime sum and the analytic tail.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PsiValue {
    pub value: f64,
    pub finite_part: f64,
    pub tail: f64,
    /// Bound on |true tail − `tail`|; conditional on the Riemann hypothesis
    /// (the underlying π(x) − li(x) estimate is verified unconditionally up to 1e19).
    pub tail_error: f64,
}

/// A sum over primes beyond a cutoff, estimated through the prime number theorem.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TailEstimate {
    pub value: f64,
    pub error: f64,
}

fn sieve(limit: u64) -> Vec<u64> {
    let n = limit as usize;
    let mut composite = vec![false; n + 1];
    let mut primes = Vec::with_capacity(if n > 10 { (1.3 * n as f64 / (n as f64).ln()) as usize } else { 8 });
    for i in 2..=n {
        if !composite[i] {
            primes.push(i as u64);
            let mut j = i.saturating_mul(i);
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    primes
}

impl PrimeTable {
    pub fn new(limit: u64) -> Result<Self> {
        if limit < 2 {
            return Err(Error::EmptyTable(limit));
        }
        Ok(Self::from_primes(limit, sieve(limit)))
    }

    fn from_primes(limit: u64, primes: Vec<u64>) -> Self {
        let ln_primes = primes.iter().map(|&p| (p as f64).ln()).collect();
        let mut prime_powers = Vec::new();
        for &p in &primes {
            let mut value = p;
            let mut k = 1;
            loop {
                prime_powers.push(PrimePower { p, k, value });
                match value.checked_mul(p) {
                    Some(v) if v <= limit => {
                        value = v;
                        k += 1;
                    }
                    _ => break,
                }
            }
        }
        prime_powers.sort_by_key(|pp| pp.value);
        Self { limit, primes, ln_primes, prime_powers }
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    pub fn ln_primes(&self) -> &[f64] {
        &self.ln_primes
    }

    pub fn prime_powers(&self) -> &[PrimePower] {
        &self.prime_powers
    }

    /// Number of primes `p ≤ y` (y clipped to the table).
    pub fn count_up_to(&self, y: f64) -> usize {
        if y < 2.0 {
            return 0;
        }
        let bound = if y >= self.limit as f64 { self.limit } else { y.floor() as u64 };
        self.primes.partition_point(|&p| p <= bound)
    }

    /// Index of `p` in the prime list, if it is a tabulated prime.
    pub fn index_of(&self, p: u64) -> Option<usize> {
        self.primes.binary_search(&p).ok()
    }

    pub fn primes_up_to(&self, y: f64) -> Result<&[u64]> {
        self.check_bound(y)?;
        Ok(&self.primes[..self.count_up_to(y)])
    }

    pub fn prime_powers_up_to(&self, y: f64) -> Result<&[PrimePower]> {
        self.check_bound(y)?;
        let bound = if y < 1.0 { 0 } else { y.floor() as u64 };
        let n = self.prime_powers.partition_point(|pp| pp.value <= bound);
        Ok(&self.prime_powers[..n])
    }

    fn check_bound(&self, y: f64) -> Result<()> {
        if y > self.limit as f64 {
            Err(Error::TableTooSmall { limit: self.limit, requested: y })
        } else {
            Ok(())
        }
    }

    /// Σ_{p ≤ y} p^{-2σ}, accumulated with compensated summation.
    pub fn prime_sum(&self, sigma: f64, y: f64) -> Result<f64> {
        self.power_sum(2.0 * sigma, y)
    }

    /// Σ_{p ≤ y} p^{-exponent}.
    pub fn power_sum(&self, exponent: f64, y: f64) -> Result<f64> {
        self.check_bound(y)?;
        let n = self.count_up_to(y);
        let acc: NeumaierSum = self.ln_primes[..n].iter().map(|&l| (-exponent * l).exp()).sum();
        Ok(acc.value())
    }

    /// Σ_{p > x} p^{-exponent} for exponent > 1, from
    /// ∫_x^∞ u^{-exponent} d(li(u) − li(√u)/2) = E1((e − 1) ln x) − E1((e − ½) ln x)/2.
    ///
    /// The error bound integrates |π(u) − li(u)| ≤ c·√u·ln u by parts with
    /// c = 1/(8π) (RH-conditional, x ≥ 2657) or c = 2 below that.
    pub fn pnt_tail(exponent: f64, x: f64) -> TailEstimate {
        assert!(exponent > 1.0 && x > 2.0);
        let lx = x.ln();
        // li(u) − li(√u)/2 as the smooth prime count; the second term is the
        // mean bias from prime squares
        let correction = 0.5 * exp_integral_e1((exponent - 0.5) * lx);
        let value = exp_integral_e1((exponent - 1.0) * lx) - correction;
        let c = if x >= SCHOENFELD_START { 1.0 / (8.0 * std::f64::consts::PI) } else { 2.0 };
        let q = exponent - 0.5;
        let boundary = c * x.powf(0.5 - exponent) * lx;
        let slope = c * exponent * x.powf(-q) * (lx / q + 1.0 / (q * q));
        TailEstimate { value, error: boundary + slope + correction }
    }

    /// Σ_{p > from} p^{-exponent}: exact over the table up to `cutoff`, PNT tail beyond.
    pub fn prime_zeta_tail(&self, exponent: f64, from: f64, cutoff: f64) -> Result<TailEstimate> {
        self.check_bound(cutoff)?;
        let lo = self.count_up_to(from);
        let hi = self.count_up_to(cutoff);
        let mut acc = NeumaierSum::new();
        for &l in &self.ln_primes[lo.min(hi)..hi] {
            acc.add((-exponent * l).exp());
        }
        let tail = Self::pnt_tail(exponent, cutoff.max(from).max(3.0));
        acc.add(tail.value);
        Ok(TailEstimate { value: acc.value(), error: tail.error })
    }

    /// ψ(σ) = Σ_{p,k} k^{-2} p^{-2kσ}: finite sum over p ≤ `tail_cutoff`, PNT tail beyond.
    pub fn psi(&self, sigma: f64, tail_cutoff: u64) -> Result<PsiValue> {
        if sigma <= 0.5 {
            return Err(Error::Divergent { sigma });
        }
        if tail_cutoff < 100 {
            return Err(Error::Domain(format!("psi tail cutoff must be >= 100, got {tail_cutoff}")));
        }
        let cutoff = tail_cutoff as f64;
        self.check_bound(cutoff)?;
        let n = self.count_up_to(cutoff);
        let mut finite = NeumaierSum::new();
        for &l in &self.ln_primes[..n] {
            let w2 = (-2.0 * sigma * l).exp();
            let mut power = w2;
            let mut k = 1.0f64;
            while power > 1e-22 * w2 {
                finite.add(power / (k * k));
                power *= w2;
                k += 1.0;
            }
        }
        let mut tail = NeumaierSum::new();
        let mut tail_error = 0.0;
        let mut k = 1.0f64;
        loop {
            let t = Self::pnt_tail(2.0 * k * sigma, cutoff);
            tail.add(t.value / (k * k));
            tail_error += t.error / (k * k);
            if t.value / (k * k) < 1e-18 || k > 60.0 {
                break;
            }
            k += 1.0;
        }
        let finite_part = finite.value();
        let tail = tail.value();
        Ok(PsiValue { value: finite_part + tail, finite_part, tail, tail_error })
    }

    /// Serialize as: magic, version (u32 LE), limit (u64 LE), count (u64 LE),
    /// then LEB128 varints of successive prime gaps (first gap from 0).
    pub fn write_cache<W: Write>(&self, mut out: W) -> Result<()> {
        out.write_all(CACHE_MAGIC)?;
        out.write_all(&CACHE_VERSION.to_le_bytes())?;
        out.write_all(&self.limit.to_le_bytes())?;
        out.write_all(&(self.primes.len() as u64).to_le_bytes())?;
        let mut prev = 0u64;
        let mut buf = Vec::with_capacity(self.primes.len());
        for &p in &self.primes {
            let mut gap = p - prev;
            prev = p;
            loop {
                let byte = (gap & 0x7f) as u8;
                gap >>= 7;
                if gap == 0 {
                    buf.push(byte);
                    break;
                }
                buf.push(byte | 0x80);
            }
        }
        out.write_all(&buf)?;
        Ok(())
    }

    pub fn read_cache<R: Read>(mut input: R) -> Result<Self> {
        let mut header = [0u8; 28];
        input.read_exact(&mut header).map_err(|e| Error::Format(format!("cache header: {e}")))?;
        if &header[..8] != CACHE_MAGIC {
            return Err(Error::Format("bad cache magic".into()));
        }
        let version = u32::from_le_bytes(header[8..12].try_into().unwrap());
        if version != CACHE_VERSION {
            return Err(Error::Format(format!("unsupported cache version {version}")));
        }
        let limit = u64::from_le_bytes(header[12..20].try_into().unwrap());
        let count = u64::from_le_bytes(header[20..28].try_into().unwrap()) as usize;
        let mut body = Vec::new();
        input.read_to_end(&mut body)?;
        let mut primes = Vec::with_capacity(count);
        let (mut acc, mut shift, mut prev) = (0u64, 0u32, 0u64);
        for byte in body {
            acc |= ((byte & 0x7f) as u64) << shift;
            if byte & 0x80 == 0 {
                prev += acc;
                primes.push(prev);
                acc = 0;
                shift = 0;
            } else {
                shift += 7;
                if shift > 63 {
                    return Err(Error::Format("varint overflow".into()));
                }
            }
        }
        if primes.len() != count || primes.last().is_some_and(|&p| p > limit) {
            return Err(Error::Format("cache body does not match header".into()));
        }
        Ok(Self::from_primes(limit, primes))
    }

    pub fn cache_path(dir: &Path, limit: u64) -> PathBuf {
        dir.join(format!("primes-{limit}.bin"))
    }

    /// Load the sieve from `dir` when a cache for this limit exists, otherwise
    /// build it and try to store it there.
    pub fn load_or_build(limit: u64, dir: Option<&Path>) -> Result<Self> {
        let Some(dir) = dir else {
            return Self::new(limit);
        };
        let path = Self::cache_path(dir, limit);
        if let Ok(file) = fs::File::open(&path) {
            if let Ok(table) = Self::read_cache(std::io::BufReader::new(file)) {
                if table.limit == limit {
                    return Ok(table);
                }
            }
        }
        let table = Self::new(limit)?;
        if fs::create_dir_all(dir).is_ok() {
            if let Ok(file) = fs::File::create(&path) {
                let _ = table.write_cache(std::io::BufWriter::new(file));
            }
        }
        Ok(table)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn is_prime(n: u64) -> bool {
        n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| n % d != 0)
    }

    #[test]
    fn small_tables() {
        let t = PrimeTable::new(10).unwrap();
        assert_eq!(t.primes(), &[2, 3, 5, 7]);
        let pp = t.prime_powers();
        assert!(pp.contains(&PrimePower { p: 2, k: 3, value: 8 }));
        assert!(pp.contains(&PrimePower { p: 3, k: 2, value: 9 }));
        assert_eq!(pp.len(), 7); // 2 3 4 5 7 8 9
        assert_eq!(PrimeTable::new(2).unwrap().primes(), &[2]);
        assert_eq!(PrimeTable::new(1), Err(Error::EmptyTable(1)));
    }

    #[test]
    fn entries_are_prime_and_increasing() {
        let t = PrimeTable::new(100_000).unwrap();
        assert_eq!(&t.primes()[..5], &[2, 3, 5, 7, 11]);
        assert!(t.primes().windows(2).all(|w| w[0] < w[1]));
        for &p in t.primes().iter().step_by(97) {
            assert!(is_prime(p), "{p}");
        }
        // prime powers: exactly those p^k <= limit
        let brute: usize = (2..=100_000u64)
            .filter(|&n| {
                let p = (2..=n).find(|d| n % d == 0).unwrap();
                let mut m = n;
                while m % p == 0 {
                    m /= p;
                }
                m == 1
            })
            .count();
        assert_eq!(t.prime_powers().len(), brute);
    }

    #[test]
    fn prime_sum_examples() {
        let t = PrimeTable::new(1000).unwrap();
        let s = t.prime_sum(0.5, 10.0).unwrap();
        assert!((s - (0.5 + 1.0 / 3.0 + 0.2 + 1.0 / 7.0)).abs() < 1e-15);
        assert_eq!(t.prime_sum(0.5, 1.5).unwrap(), 0.0);
        assert!(matches!(t.prime_sum(0.5, 2000.0), Err(Error::TableTooSmall { .. })));
    }

    #[test]
    fn psi_errors() {
        let t = PrimeTable::new(1000).unwrap();
        assert_eq!(t.psi(0.5, 1000), Err(Error::Divergent { sigma: 0.5 }));
        assert!(t.psi(0.7, 50).is_err());
    }

    #[test]
    fn cache_round_trip_and_corruption() {
        let t = PrimeTable::new(5000).unwrap();
        let mut buf = Vec::new();
        t.write_cache(&mut buf).unwrap();
        assert_eq!(PrimeTable::read_cache(&buf[..]).unwrap(), t);
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(PrimeTable::read_cache(&bad[..]).is_err());
        assert!(PrimeTable::read_cache(&buf[..buf.len() - 3]).is_err());
    }
}
