use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use zetalab::primes::PrimeTable;
use zetalab::zeta::*;

// Values from an independent 30-digit evaluator.
const REFERENCE: [(f64, f64, f64, f64); 6] = [
    (0.7, 50.0, 0.186_428_549_149_155_4, 0.323_461_184_379_179_35),
    (0.5, 100.0, 2.692_619_885_681_324, -0.020_386_029_602_598_16),
    (0.75, 10000.0, 0.164_019_044_705_205_64, -0.614_687_529_658_280_4),
    (0.55, 1000.0, 0.511_379_697_430_339_9, 0.748_334_873_918_846),
    (0.6, 123_456.5, 0.140_556_309_188_432_2, -0.192_068_021_550_766_7),
    (3.0, 7.0, 1.014_200_368_971_115_9, 0.096_125_395_858_022_43),
];
const FIRST_ZERO: f64 = 14.134_725_141_734_693_790_457_251_983_6;

#[test]
fn reference_values() {
    for (sigma, t, re, im) in REFERENCE {
        let v = zeta_detailed(Complex64::new(sigma, t), 1e-9).unwrap();
        let err = (v.value - Complex64::new(re, im)).norm();
        assert!(err < 1e-9, "s={sigma}+{t}i err={err:e}");
        assert!(err <= v.error_bound() + 1e-14, "s={sigma}+{t}i err={err:e} bound={:e}", v.error_bound());
    }
}

#[test]
fn first_zero() {
    let z = zeta(ComplexPoint::new(0.5, FIRST_ZERO), 1e-12).unwrap();
    assert!(z.norm() < 1e-6, "{z}");
}

#[test]
fn conjugate_symmetry() {
    let a = zeta(ComplexPoint::new(0.7, 50.0), 1e-13).unwrap();
    let b = zeta(ComplexPoint::new(0.7, -50.0), 1e-13).unwrap();
    assert!((a - b.conj()).norm() < 1e-12);
}

#[test]
fn doubling_terms_within_remainder() {
    for &(sigma, t) in &[(0.5, 30.0), (0.6, 200.0), (0.9, 1500.0), (2.0, 10.0), (0.45, 77.0)] {
        let base = LineEvaluator::new(t, sigma);
        let a = base.eval(sigma, 1e-30);
        let b = LineEvaluator::with_terms(t, 2 * base.terms()).eval(sigma, 1e-30);
        assert!((a.value - b.value).norm() <= a.error_bound() + b.error_bound(), "{sigma} {t}");
    }
}

#[test]
fn branch_matches_zeta() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    for _ in 0..1000 {
        let sigma = rng.gen_range(0.6..0.9);
        let t = rng.gen_range(100.0..1000.0);
        let s = log_zeta_track(sigma, t, 1e-11).unwrap();
        if !s.branch_ok {
            continue;
        }
        let z = zeta(ComplexPoint::new(sigma, t), 1e-11).unwrap();
        assert!((s.log_zeta.exp() - z).norm() <= 1e-9 * z.norm(), "{sigma} {t}");
    }
}

#[test]
fn branch_agrees_with_integrated_log_derivative() {
    // Im log ζ(σ+it) = Im log ζ(2+it) − ∫_σ^2 Im ζ'/ζ(x+it) dx
    for &(sigma, t) in &[(0.6, 123.0), (0.55, 321.5), (0.8, 47.0)] {
        let s = log_zeta_track(sigma, t, 1e-12).unwrap();
        assert!(s.branch_ok);
        let start = zeta(ComplexPoint::new(2.0, t), 1e-12).unwrap().ln().im;
        let r = zetalab::quadrature::integrate(
            |x| {
                let p = Complex64::new(x, t);
                let z = zeta_detailed(p, 1e-12).unwrap().value;
                (zeta_derivative(p, 1e-12).unwrap() / z).im
            },
            sigma,
            2.0,
            1e-9,
            0.0,
        )
        .unwrap();
        assert!((s.log_zeta.im - (start - r.value)).abs() < 1e-6, "{sigma} {t}");
    }
}

#[test]
fn step_halving_self_convergence() {
    let a = log_zeta_track(0.55, 1000.0, 1e-12).unwrap();
    let b = log_zeta_track(0.55, 1000.0, 1e-13).unwrap();
    assert!(a.branch_ok && b.branch_ok);
    assert!((a.log_zeta.im - b.log_zeta.im).abs() < 1e-6);
}

#[test]
fn zero_on_path_is_flagged() {
    // the path at the height of the first zero crosses it at σ = 1/2
    let s = log_zeta_track(0.4, FIRST_ZERO, 1e-12).unwrap();
    assert!(!s.branch_ok);
}

#[test]
fn batch_csv() {
    let ts = [100.0, 200.0, 300.0];
    let samples = sample_log_zeta_batch(0.7, &ts, 1e-10).unwrap();
    let mut out = Vec::new();
    write_samples_csv(&mut out, &samples).unwrap();
    let text = String::from_utf8(out).unwrap();
    assert!(text.starts_with("t,sigma,re_log_zeta,im_log_zeta,branch_ok\n"));
    assert_eq!(text.lines().count(), 4);
}

#[test]
fn r_y_tracks_log_zeta_off_exceptional_set() {
    let table = PrimeTable::new(10_000).unwrap();
    let mut dev: Vec<f64> = (0..500)
        .map(|i| {
            let t = 1e4 + 20.0 * i as f64 + 0.37;
            let s = log_zeta_track(0.75, t, 1e-10).unwrap();
            (s.log_zeta - dirichlet_r_y(ComplexPoint::new(0.75, t), 1e4, &table).unwrap()).norm()
        })
        .collect();
    dev.sort_by(f64::total_cmp);
    let q90 = dev[450];
    eprintln!("0.9-quantile of |log zeta - R_Y| at sigma=0.75, Y=1e4: {q90:.4}");
    assert!(q90.is_finite());
}

#[test]
fn r_y_conjugate_symmetry() {
    let table = PrimeTable::new(1000).unwrap();
    for &(sigma, t) in &[(0.6, 31.0), (1.3, -7.5), (0.51, 1234.0)] {
        let a = dirichlet_r_y(ComplexPoint::new(sigma, t), 1000.0, &table).unwrap();
        let b = dirichlet_r_y(ComplexPoint::new(sigma, -t), 1000.0, &table).unwrap();
        assert_eq!(a, b.conj());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn remainder_bound_is_honest(sigma in 0.45f64..3.0, t in 0.0f64..3000.0) {
        let v = zeta_detailed(Complex64::new(sigma, t), 1e-10).unwrap();
        let w = LineEvaluator::with_terms(t, 3 * v.terms + 7).eval(sigma, 1e-14);
        prop_assert!((v.value - w.value).norm() <= v.error_bound() + w.error_bound());
    }
}
