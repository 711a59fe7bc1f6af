mod common;

use common::{brute_force_roots, count_inside};
use num_complex::Complex64;
use proptest::prelude::*;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Mutex, OnceLock};
use zetalab::avalues::*;
use zetalab::special::{gauss_legendre, gaussian_moment, incomplete_gaussian_moments};
use zetalab::Error;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn rect(s0: f64, s1: f64, t0: f64, t1: f64) -> ComplexRect {
    ComplexRect::new(s0, s1, t0, t1).unwrap()
}

/// Oracle roots over a margin around [0.5, 2]×[0, 100], cached per a.
fn oracle(a: Complex64) -> Vec<Complex64> {
    static CACHE: OnceLock<Mutex<HashMap<String, Vec<Complex64>>>> = OnceLock::new();
    let key = format!("{a}");
    let mut m = CACHE.get_or_init(Default::default).lock().unwrap();
    m.entry(key).or_insert_with(|| brute_force_roots(a, 0.4, 2.1, -0.5, 100.5, 0.02)).clone()
}

#[test]
fn a2_count_matches_brute_force() {
    let a = c(2.0, 0.0);
    let rep = count_avalues(a, &rect(0.5, 2.0, 0.5, 50.0), &CountOptions::default()).unwrap();
    let want = count_inside(&oracle(a), &rep.rect);
    assert_eq!(rep.count, want);
    assert_eq!(rep.roots.len(), rep.count);
    assert!(rep.winding_residual < 1e-3);
    for r in &rep.roots {
        assert!(r.residual <= 1e-8);
        assert!(rep.rect.contains(c(r.beta, r.gamma)));
        assert!(oracle(a).iter().any(|q| (q - c(r.beta, r.gamma)).norm() < 1e-7));
    }
}

#[test]
fn real_axis_edge_is_perturbed() {
    // t_min = 0 runs through the pole and through the real solution near 1.73
    let a = c(2.0, 0.0);
    let r = rect(0.5, 2.0, 0.0, 50.0);
    assert!(matches!(count_avalues(a, &r, &CountOptions::default()), Err(Error::BoundaryTooClose { .. })));
    let rep = count_avalues_perturbed(a, &r, &CountOptions::default()).unwrap();
    assert!(rep.perturbation > 0.0 && rep.rect.t_min > 0.0);
    assert_eq!(rep.count, count_inside(&oracle(a), &rep.rect));
}

#[test]
fn counts_on_many_rectangles() {
    let rects = [
        (0.5, 2.0, 0.0, 100.0),
        (0.5, 1.0, 10.0, 40.0),
        (1.0, 2.0, 0.5, 60.0),
        (0.6, 1.5, 50.0, 100.0),
        (0.5, 0.8, 60.0, 95.0),
    ];
    for a in [c(2.0, 0.0), c(1.0, 1.0), c(0.0, 0.5)] {
        let roots = oracle(a);
        for &(s0, s1, t0, t1) in &rects {
            let rep = count_avalues_perturbed(a, &rect(s0, s1, t0, t1), &CountOptions::default()).unwrap();
            assert!(rep.winding_residual < 1e-3);
            assert_eq!(rep.count, count_inside(&roots, &rep.rect), "a = {a}, rect {:?}", rep.rect);
            assert_eq!(rep.roots.len(), rep.count);
        }
    }
}

#[test]
fn far_right_is_empty() {
    for a in [c(2.0, 0.0), c(0.5, 0.5), c(1.2, 0.0)] {
        let rep = count_avalues(a, &rect(5.0, 6.0, 0.5, 40.0), &CountOptions::default()).unwrap();
        assert_eq!(rep.count, 0);
    }
}

#[test]
fn subdivision_is_additive() {
    let opts = CountOptions { refine_roots: false, ..Default::default() };
    for a in [c(2.0, 0.0), c(1.0, 1.0)] {
        let whole = rect(0.5, 2.0, 10.0, 90.0);
        let n = count_avalues(a, &whole, &opts).unwrap().count;
        let parts: usize = whole.split(1.13, 47.3).iter().map(|r| count_avalues(a, r, &opts).unwrap().count).sum();
        assert_eq!(n, parts);
    }
}

#[test]
fn conjugate_symmetry() {
    let opts = CountOptions { refine_roots: false, ..Default::default() };
    for a in [c(1.0, 1.0), c(0.0, 0.5), c(2.0, 0.0)] {
        let r = rect(0.5, 2.0, 5.0, 70.0);
        let n = count_avalues(a, &r, &opts).unwrap().count;
        let m = count_avalues(a.conj(), &r.reflect(), &opts).unwrap().count;
        assert_eq!(n, m);
    }
}

#[test]
fn small_perturbation_keeps_count() {
    let opts = CountOptions { refine_roots: false, ..Default::default() };
    let a = c(1.0, 1.0);
    let r = rect(0.5, 2.0, 5.0, 70.0);
    let rep = count_avalues(a, &r, &opts).unwrap();
    let d = 0.1 * rep.clearance.min(1e-2);
    let moved = ComplexRect { sigma_min: r.sigma_min + d, t_max: r.t_max - d, ..r };
    assert_eq!(count_avalues(a, &moved, &opts).unwrap().count, rep.count);
}

#[test]
fn rejects_bad_input() {
    assert!(matches!(
        count_avalues(c(0.0, 0.0), &rect(0.5, 2.0, 1.0, 2.0), &CountOptions::default()),
        Err(Error::Domain(_))
    ));
    assert!(ComplexRect::new(0.3, 2.0, 1.0, 2.0).is_err());
    assert!(ComplexRect::new(0.5, 2.0, 2.0, 1.0).is_err());
    // pole on the contour
    assert!(matches!(
        count_avalues(c(2.0, 0.0), &rect(1.0, 2.0, -1.0, 1.0), &CountOptions::default()),
        Err(Error::BoundaryTooClose { .. })
    ));
}

#[test]
fn pole_inside_is_compensated() {
    // winding of ζ − a around the pole alone is −1; the count must be the
    // number of genuine solutions
    let a = c(0.5, 3.0);
    let r = rect(0.8, 1.3, -0.2, 0.3);
    let rep = count_avalues(a, &r, &CountOptions::default()).unwrap();
    assert_eq!(rep.count, rep.roots.len());
}

#[test]
fn littlewood_balance_holds() {
    let b = littlewood_balance(c(2.0, 0.0), &rect(0.55, 2.0, 100.0, 130.0), &CountOptions::default()).unwrap();
    assert!(!b.roots.is_empty());
    assert!((b.lhs - b.rhs).abs() <= b.error.max(1e-8), "{} vs {} (error {})", b.lhs, b.rhs, b.error);
    assert!(b.error <= 1e-2);
}

#[test]
fn littlewood_balance_other_a() {
    let b = littlewood_balance(c(1.0, 1.0), &rect(0.6, 1.8, 20.0, 45.0), &CountOptions::default()).unwrap();
    assert!((b.lhs - b.rhs).abs() <= b.error.max(1e-8), "{} vs {}", b.lhs, b.rhs);
}

#[test]
fn large_a_gives_log_a() {
    let a = c(1000.0, 0.0);
    let li = littlewood_integral(a, 0.75, 100.0, 200.0).unwrap();
    assert!((li.mean / a.norm().ln() - 1.0).abs() < 1e-2);
}

#[test]
fn singular_line_is_continuous() {
    // a line passing exactly through a solution: the integral is continuous in σ
    let a = c(2.0, 0.0);
    let root = oracle(a).into_iter().find(|r| r.im > 40.0).unwrap();
    let (t1, t2) = (root.im - 2.0, root.im + 3.0);
    let on = littlewood_integral(a, root.re, t1, t2).unwrap();
    assert!(on.singularities >= 1);
    assert!(on.error < 1e-6);
    // I(σ) has a kink π|σ − β| at the root, so the symmetric average exceeds
    // the central value by πδ to first order
    let d = 1e-5;
    let left = littlewood_integral(a, root.re - d, t1, t2).unwrap();
    let right = littlewood_integral(a, root.re + d, t1, t2).unwrap();
    let kink = 0.5 * (left.integral + right.integral) - on.integral;
    assert!((kink - PI * d).abs() < 1e-7, "{kink}");
}

#[test]
fn mean_prediction_expansion() {
    let psi = 3.0;
    for a in [c(2.0, 0.0), c(0.5, 0.5), c(1.0, 0.0)] {
        let (exact, series) = littlewood_mean_prediction(a, psi);
        let l = a.norm().ln();
        // the exact form is E max(X, log|a|) for X ~ N(0, ψ/2)
        // split at the kink y = log|a|
        let (x, w) = gauss_legendre(120);
        let mut q = 0.0;
        for (lo, hi) in [(-20.0, l), (l, 20.0)] {
            let (c0, h) = (0.5 * (lo + hi), 0.5 * (hi - lo));
            for (xi, wi) in x.iter().zip(&w) {
                let y = c0 + h * xi;
                q += h * wi * y.max(l) * (-y * y / psi).exp() / (PI * psi).sqrt();
            }
        }
        assert!((q - exact).abs() < 1e-12);
        assert!((exact - series).abs() <= l.powi(4) / psi.powf(1.5) + 1e-15);
    }
}

#[test]
fn prediction_arithmetic() {
    let (theta, t) = (0.05f64, 1e6f64);
    let p = predict_count(theta, t, false).unwrap();
    let lt = t.ln();
    let want = t * lt.powf(theta) / (8.0 * PI.powf(1.5) * theta.sqrt() * lt.ln().sqrt());
    assert!((p.main / want - 1.0).abs() < 1e-12);
    assert!((p.error_scale / (t * lt.powf(theta) / lt.ln().powf(0.75)) - 1.0).abs() < 1e-12);
    let band = predict_band(1.0, 2.0, theta, t, false).unwrap();
    assert!((band.main / p.main - 0.5).abs() < 1e-12);
    let q = predict_count(theta, 1e12, false).unwrap();
    assert!(q.main / q.error_scale > p.main / p.error_scale);
    assert!(matches!(predict_count(0.1, t, false), Err(Error::Domain(_))));
    assert!(predict_count(0.1, t, true).is_ok());
    assert!(predict_count(theta, 2.0, true).is_err());
}

fn region(a: Complex64, psi: f64, l: f64) -> Vec<RegionIntegral> {
    region_decomposition_integrals(&RegionParams { a, psi, big_a: 3.0, l, max_degree: 5 }).unwrap()
}

#[test]
fn region_series_matches_direct() {
    for a in [c(2.0, 1.0), c(0.3, 0.0), c(-1.5, 0.2)] {
        for r in region(a, 2.5, 10.0) {
            assert!(r.gap <= 1e-8 * (1.0 + r.direct.abs()), "{r:?}");
            assert!(r.series_tail_bound < 1e-15);
        }
    }
}

#[test]
fn region_main_term_limit() {
    let psi = 4.0f64;
    let a = c(2.0, 0.0);
    let la = 2f64.ln();
    let sp = psi.sqrt();
    let l = 1e6;
    let w = 3.0 * psi;
    let (x, wt) = gauss_legendre(60);
    let rule = |lo: f64, hi: f64| -> Vec<(f64, f64)> {
        let n = ((hi - lo) / 0.5).ceil() as usize;
        let h = (hi - lo) / n as f64;
        (0..n)
            .flat_map(|k| {
                let c0 = lo + (k as f64 + 0.5) * h;
                x.iter().zip(&wt).map(move |(xi, wi)| (c0 + 0.5 * h * xi, 0.5 * h * wi))
            })
            .collect()
    };
    let (xr, yr) = (rule(la + 1.0 / l, w), rule(-w, w));
    for r in region(a, psi, l).iter().filter(|r| r.region == 1) {
        // (√ψ)^{m+n+3} ∫_{log|a|/√ψ}^∞ x^{m+1} e^{−x²} dx ∫ y^n e^{−y²} dy
        let xm = incomplete_gaussian_moments(la / sp, f64::INFINITY, r.m + 1)[r.m + 1];
        let want = sp.powi((r.m + r.n + 3) as i32) * xm * gaussian_moment(r.n);
        assert!((r.limit - want).abs() < 1e-12 * (1.0 + want.abs()));
        // the main term x·x^m y^n e^{−(x²+y²)/ψ} by direct quadrature over R₁
        let qx: f64 = xr.iter().map(|&(x, w)| w * x.powi(r.m as i32 + 1) * (-x * x / psi).exp()).sum();
        let qy: f64 = yr.iter().map(|&(y, w)| w * y.powi(r.n as i32) * (-y * y / psi).exp()).sum();
        assert!((qx * qy - r.main).abs() < 1e-10 * (1.0 + want.abs()));
        assert!((qx * qy - want).abs() < 1e-3, "{r:?}");
    }
}

#[test]
fn region_odd_n_vanishes_for_real_a() {
    for r in region(c(2.0, 0.0), 3.0, 10.0) {
        if r.n % 2 == 1 {
            assert_eq!(r.main, 0.0);
            assert!(r.direct.abs() < 1e-10 && r.series.abs() < 1e-10, "{r:?}");
        }
    }
}

#[test]
fn report_exports() {
    let rep = count_avalues(c(2.0, 0.0), &rect(0.6, 2.0, 10.0, 40.0), &CountOptions::default()).unwrap();
    let mut buf = Vec::new();
    rep.write_roots_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().count(), rep.roots.len() + 1);
    assert!(text.starts_with("beta,gamma,residual,multiplicity"));
    let mut rep2 = rep.clone();
    rep2.attach_prediction(0.05, false).unwrap();
    assert!(rep2.prediction_main.unwrap() > 0.0);
    let json = serde_json::to_string(&rep2).unwrap();
    let back: AValueReport = serde_json::from_str(&json).unwrap();
    assert_eq!(back, rep2);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn additivity_random_splits(fs in 0.2f64..0.8, ft in 0.2f64..0.8, t0 in 5.0f64..60.0) {
        let opts = CountOptions { refine_roots: false, ..Default::default() };
        let a = c(2.0, 0.0);
        let whole = rect(0.5, 2.0, t0, t0 + 25.0);
        let n = count_avalues(a, &whole, &opts).unwrap().count;
        let parts: Result<Vec<_>, _> = whole
            .split(0.5 + 1.5 * fs, t0 + 25.0 * ft)
            .iter()
            .map(|r| count_avalues(a, r, &opts).map(|x| x.count))
            .collect();
        // a split line that grazes a solution is rejected, not miscounted
        if let Ok(p) = parts {
            prop_assert_eq!(n, p.iter().sum::<usize>());
        }
    }
}
