use num_complex::Complex64;
use proptest::prelude::*;
use std::f64::consts::PI;
use std::sync::OnceLock;
use zetalab::charfn::*;
use zetalab::primes::PrimeTable;
use zetalab::random_model::{estimate, LogZetaSampler, SamplerConfig};

fn table() -> &'static PrimeTable {
    static T: OnceLock<PrimeTable> = OnceLock::new();
    T.get_or_init(|| PrimeTable::new(1_000_000).unwrap())
}

fn dilog_partial(w: f64) -> f64 {
    (1..2000).map(|m| w.powi(2 * m) / (m * m) as f64).take_while(|x| *x > 0.0).sum()
}

#[test]
fn a11_and_b11_are_the_dilogarithm() {
    for w in [0.1, 0.3, 0.5] {
        let t = CoefficientTable::new(w, 8, 0).unwrap();
        assert!((t.a[1][1] - dilog_partial(w)).abs() < 1e-12);
        assert!((t.b[1][1] - t.a[1][1]).abs() < 1e-15);
    }
}

#[test]
fn a_structure() {
    let t = CoefficientTable::new(0.4, 8, 0).unwrap();
    assert_eq!(t.a[0][0], 1.0);
    for k in 1..=8 {
        assert_eq!(t.a[k][0], 0.0);
        assert_eq!(t.a[0][k], 0.0);
        for l in 1..=8 {
            assert_eq!(t.a[k][l], t.a[l][k]);
            assert!(t.a[k][l] > 0.0);
        }
    }
}

#[test]
fn a21_leading_term() {
    for w in [0.05, 0.02] {
        let t = CoefficientTable::new(w, 3, 0).unwrap();
        assert!((t.a[2][1] / w.powi(4) / 0.5 - 1.0).abs() < 0.05);
    }
}

#[test]
fn a_bound_with_explicit_constant() {
    for w in [0.1f64, 0.3, 0.5] {
        let r = w.max(0.5f64.sqrt());
        let cr = -(1.0 - r).ln() / r;
        let t = CoefficientTable::new(w, 8, 0).unwrap();
        for k in 0..=8 {
            for l in 0..=8 {
                assert!(t.a[k][l].abs() <= (cr * w).powi((k + l) as i32) * (1.0 + 1e-12));
            }
        }
    }
}

#[test]
fn vanishing_order_in_w() {
    // a_{k,l}/w^{2 max(k,l)} and b_{k,l}/w^{2 max(k,l)} stay bounded as w → 0
    for k in 1..=4 {
        for l in 1..=4 {
            let m = 2 * k.max(l) as i32;
            let ratios: Vec<(f64, f64)> = [0.1, 0.03, 0.01]
                .iter()
                .map(|&w| {
                    let t = CoefficientTable::new(w, 4, 0).unwrap();
                    (t.a[k][l] / w.powi(m), t.b[k][l].abs() / w.powi(m))
                })
                .collect();
            for (ra, rb) in &ratios {
                assert!(*ra < 2.0 * ratios[2].0 + 1.0 && *rb < 2.0 * ratios[2].1 + 1.0, "{k},{l} {ratios:?}");
            }
        }
    }
}

/// Coefficient of r⁴ in log J along the ray z = r e^{iφ}, from a univariate
/// series logarithm of J's restriction.
fn ray_log_coefficient(t: &CoefficientTable, phi: f64, n: usize) -> f64 {
    let fact = |m: usize| (1..=m).map(|j| j as f64).product::<f64>();
    // J(r) = Σ_m c_m r^m, c_m = i^m Σ_{k+l=m} a_kl e^{i(k−l)φ}/(k!l!)
    let c: Vec<Complex64> = (0..=n)
        .map(|m| {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..=m {
                let l = m - k;
                if k <= t.k_max && l <= t.k_max {
                    acc += Complex64::from_polar(t.a[k][l] / (fact(k) * fact(l)), (k as f64 - l as f64) * phi);
                }
            }
            acc * Complex64::new(0.0, 1.0).powu(m as u32)
        })
        .collect();
    // log series: m d_m = m c_m − Σ_{j=1}^{m−1} j d_j c_{m−j}
    let mut d = vec![Complex64::new(0.0, 0.0); n + 1];
    for m in 1..=n {
        let mut acc = c[m] * m as f64;
        for j in 1..m {
            acc -= d[j] * c[m - j] * j as f64;
        }
        d[m] = acc / m as f64;
    }
    (d[n] / Complex64::new(0.0, 1.0).powu(n as u32)).re
}

#[test]
fn b22_matches_series_log_oracle() {
    for w in [0.2, 0.5, 0.7] {
        let t = CoefficientTable::new(w, 6, 0).unwrap();
        let oracle = 2.0 * (ray_log_coefficient(&t, 0.0, 4) + ray_log_coefficient(&t, PI / 2.0, 4));
        assert!((t.b[2][2] - oracle).abs() < 1e-13 * oracle.abs().max(1.0), "{} vs {oracle}", t.b[2][2]);
        // n ≤ 2 terms: a22 − 2·a11²
        assert!((t.b[2][2] - (t.a[2][2] - 2.0 * t.a[1][1].powi(2))).abs() < 1e-14);
    }
}

#[test]
fn b_bound_at_r_one_over_root_two() {
    let r = 0.5f64.sqrt();
    let cr = -(1.0 - r).ln() / r;
    for w in [0.1, 0.3, 0.5, r] {
        let t = CoefficientTable::new(w, 6, 0).unwrap();
        for k in 1..=6 {
            for l in 1..=6 {
                let m = k.min(l) as f64;
                let bound = (cr * m * w).powi((k + l) as i32);
                assert!(t.b[k][l].abs() <= bound, "{k},{l} w={w}");
            }
        }
    }
}

#[test]
fn series_in_s_matches_numeric_tables() {
    let beta = b_series(6, 120);
    for w in [0.1, 0.4] {
        let t = CoefficientTable::new(w, 6, 0).unwrap();
        for k in 1..=6 {
            for l in 1..=6 {
                let v = beta[k][l].eval(w * w);
                assert!((v - t.b[k][l]).abs() < 1e-14, "{k},{l}");
            }
        }
    }
}

#[test]
fn j_series_matches_quadrature() {
    for wi in 1..=5 {
        let w = 0.1 * wi as f64;
        let t = CoefficientTable::new(w, 8, 0).unwrap();
        for r in [0.05, 0.2, 0.35, 0.5] {
            for ang in 0..8 {
                let (u, v) = (r * (ang as f64 * 0.785).cos(), r * (ang as f64 * 0.785).sin());
                let s = j_series(u, v, &t).unwrap();
                let q = j_quadrature(u, v, w).unwrap();
                assert!((s.value - q).norm() <= 1e-8, "w={w} r={r}");
                let s2 = j_series(-u, -v, &t).unwrap();
                assert!((s2.value - s.value.conj()).norm() < 1e-15);
                let q2 = j_quadrature(-u, -v, w).unwrap();
                assert!((q2 - q.conj()).norm() < 1e-14);
            }
        }
    }
}

#[test]
fn j_series_refuses_large_arguments() {
    let t = CoefficientTable::new(0.5, 8, 0).unwrap();
    assert!(matches!(j_series(3.0, 0.0, &t), Err(zetalab::Error::TailTooLarge { .. })));
}

#[test]
fn j_decay() {
    let mut worst: f64 = 0.0;
    for w in [0.3, 0.5] {
        for i in 0..40 {
            let r = 2.0 * (50.0f64).powf(i as f64 / 39.0);
            for ang in [0.0, 0.4, 1.1, std::f64::consts::FRAC_PI_2] {
                let j = j_quadrature(r * f64::cos(ang), r * f64::sin(ang), w).unwrap();
                assert!(j.norm() <= 1.0 + 1e-12);
                if w * r >= 1.0 {
                    worst = worst.max(j.norm() * (w * r).sqrt());
                }
            }
        }
    }
    eprintln!("max |J|·(w|z|)^(1/2) = {worst:.4}");
    assert!(worst <= 3.0);
}

#[test]
fn j_is_near_bessel_for_small_w() {
    let j = j_quadrature(10.0, 4.0, 0.01).unwrap();
    let r = (10.0f64).hypot(4.0);
    assert!((j.re - j0_surrogate(r, 0.01)).abs() < 0.01);
}

#[test]
fn phi_hat_basic_properties() {
    let m = PhiHatModel::new(0.7, table(), 100_000, 3.0).unwrap();
    assert!((m.eval(0.0, 0.0).unwrap().value - Complex64::new(1.0, 0.0)).norm() < 1e-15);
    let psi = table().psi(0.7, 1_000_000).unwrap().value;
    for &(u, v) in &[(0.3, 0.1), (1.0, -0.5), (2.0, 2.0), (-0.7, 1.2)] {
        let a = m.eval(u, v).unwrap().value;
        let b = m.eval(-u, -v).unwrap().value;
        assert!((a - b.conj()).norm() < 1e-14);
        let c = m.eval(u, -v).unwrap().value;
        assert!((a - c).norm() < 1e-14);
        let decay = -a.norm().ln() / ((u * u + v * v) * psi);
        assert!(decay > 0.5, "{u} {v}: {decay}");
    }
    assert!(m.eval(3.0, 1.0).is_err());
}

#[test]
fn phi_hat_matches_direct_product() {
    // direct product of J over all primes to 1e6 plus the Gaussian tail estimate
    let (sigma, u, v) = (0.75, 0.4, -0.3);
    let mut prod = Complex64::new(1.0, 0.0);
    for &p in table().primes() {
        let w = (p as f64).powf(-sigma);
        prod *= if w * PI * 0.5 > 1e-3 { j_fast(PI * u, PI * v, w) } else {
            Complex64::new(-(PI * PI) * (u * u + v * v) * w * w, 0.0).exp()
        };
    }
    let tail = zetalab::primes::PrimeTable::pnt_tail(2.0 * sigma, 1e6).value;
    prod *= (-(PI * PI) * (u * u + v * v) * tail).exp();
    let model = phi_hat_rand(u, v, sigma, table(), 1_000_000).unwrap();
    assert!((model.value - prod).norm() < 1e-10, "{} vs {prod}", model.value);
    let coarse = phi_hat_rand(u, v, sigma, table(), 100_000).unwrap();
    assert!((coarse.value - prod).norm() <= coarse.error);
}

#[test]
fn phi_hat_matches_monte_carlo() {
    let cfg = SamplerConfig { sigma: 0.75, cutoff: 1000.0, gaussian_tail: true };
    let set = LogZetaSampler::new(cfg, table()).unwrap().sample_set(77, 1_000_000);
    let (u, v) = (0.2, 0.1);
    let vals: Vec<Complex64> =
        set.values.iter().map(|z| Complex64::new(0.0, 2.0 * PI * (u * z.re + v * z.im)).exp()).collect();
    let re = estimate(vals.iter().map(|c| c.re));
    let im = estimate(vals.iter().map(|c| c.im));
    let model = phi_hat_rand(u, v, 0.75, table(), 100_000).unwrap().value;
    assert!((re.mean - model.re).abs() < 3.0 * re.std_error, "{re:?} {model}");
    assert!((im.mean - model.im).abs() < 3.0 * im.std_error + 1e-12, "{im:?} {model}");
}

#[test]
fn expansion_against_exact() {
    let c = ExpansionCoefficients::new(0.7, table(), 5).unwrap();
    let psi = table().psi(0.7, 1_000_000).unwrap();
    assert!((c.psi - psi.value).abs() < 1e-9);
    assert_eq!(phi_hat_expansion(0.0, 0.0, &c).unwrap(), Complex64::new(1.0, 0.0));
    for &((k, l), a) in &c.a_tilde {
        let sign = if (k + l) % 2 == 0 { 1.0 } else { -1.0 };
        assert!((a - c.get(l, k).unwrap().conj() * sign).norm() < 1e-15);
    }
    let dev = |r: f64| {
        let mut worst: f64 = 0.0;
        for i in 0..8 {
            let ang = i as f64 * PI / 4.0 + 0.1;
            let (u, v) = (r * ang.cos(), r * ang.sin());
            let exact = phi_hat_rand(u, v, 0.7, table(), 100_000).unwrap().value;
            let approx = phi_hat_expansion(u, v, &c).unwrap();
            worst = worst.max((exact / approx - 1.0).norm());
        }
        worst
    };
    let (d1, d2) = (dev(0.1), dev(0.05));
    eprintln!("expansion deviation: |z|=0.1 → {d1:e}, |z|=0.05 → {d2:e}, ratio {}", d1 / d2);
    assert!(d1 <= 1e-4);
    let ratio = d1 / d2;
    assert!(ratio > 16.0 && ratio < 256.0, "{ratio}");
    assert!(matches!(phi_hat_expansion(0.3, 0.0, &c), Err(zetalab::Error::Refused { .. })));
}

#[test]
fn coefficient_csv_export() {
    let t = CoefficientTable::new(0.3, 3, 0).unwrap();
    let mut buf = Vec::new();
    t.write_csv(&mut buf).unwrap();
    let s = String::from_utf8(buf).unwrap();
    assert!(s.starts_with("w,k,l,a,b\n"));
    assert_eq!(s.lines().count(), 1 + 16);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn j_bounded_and_evaluators_agree(u in -20.0f64..20.0, v in -20.0f64..20.0, w in 0.01f64..0.95) {
        let q = j_quadrature(u, v, w).unwrap();
        prop_assert!(q.norm() <= 1.0 + 1e-12);
        prop_assert!((j_fast(u, v, w) - q).norm() < 1e-11);
    }
}
