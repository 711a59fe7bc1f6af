//! Special functions and Gaussian integrals used across the crate.

use std::f64::consts::PI;

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

pub use libm::{erf, erfc};

/// Exponential integral E1(x) = ∫_x^∞ e^{-u}/u du for x > 0.
pub fn exp_integral_e1(x: f64) -> f64 {
    assert!(x > 0.0, "E1 needs a positive argument");
    if x <= 1.0 {
        // -γ - ln x - Σ (-x)^k / (k k!)
        let mut term = 1.0;
        let mut acc = 0.0;
        for k in 1..60 {
            term *= -x / k as f64;
            let add = term / k as f64;
            acc += add;
            if add.abs() < 1e-18 * acc.abs().max(1e-300) {
                break;
            }
        }
        -EULER_GAMMA - x.ln() - acc
    } else {
        // modified Lentz on the continued fraction e^{-x} / (x + 1 - 1/(x + 3 - 4/(x + 5 - ...)))
        let tiny = 1e-300;
        let mut b = x + 1.0;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..500 {
            let an = -((i * i) as f64);
            b += 2.0;
            d = 1.0 / (an * d + b);
            c = b + an / c;
            let del = c * d;
            h *= del;
            if (del - 1.0).abs() < 1e-16 {
                break;
            }
        }
        h * (-x).exp()
    }
}

/// ∫_{-∞}^{∞} x^m e^{-x²} dx.
pub fn gaussian_moment(m: usize) -> f64 {
    if m % 2 == 1 {
        return 0.0;
    }
    // Γ((m+1)/2) = (m-1)!! √π / 2^{m/2}
    let mut v = PI.sqrt();
    let mut j = 1;
    while j < m {
        v *= j as f64 / 2.0;
        j += 2;
    }
    v
}

/// ∫_a^b x^m e^{-x²} dx for every m in 0..=max_m; infinite endpoints allowed.
pub fn incomplete_gaussian_moments(a: f64, b: f64, max_m: usize) -> Vec<f64> {
    let edge = |x: f64, p: usize| -> f64 {
        if x.is_infinite() {
            0.0
        } else {
            x.powi(p as i32) * (-x * x).exp()
        }
    };
    let mut out = vec![0.0; max_m + 1];
    let erf_diff = if a.is_sign_negative() && b.is_sign_positive() {
        erf(b) - erf(a)
    } else if a >= 0.0 {
        erfc(a) - erfc(b)
    } else {
        erfc(-b) - erfc(-a)
    };
    out[0] = 0.5 * PI.sqrt() * erf_diff;
    if max_m >= 1 {
        out[1] = 0.5 * (edge(a, 0) - edge(b, 0));
    }
    for m in 2..=max_m {
        out[m] = 0.5 * (m - 1) as f64 * out[m - 2] + 0.5 * (edge(a, m - 1) - edge(b, m - 1));
    }
    out
}

/// ∫_a^b x^m e^{-x²/scale} dx for m in 0..=max_m.
pub fn scaled_gaussian_moments(a: f64, b: f64, scale: f64, max_m: usize) -> Vec<f64> {
    let r = scale.sqrt();
    incomplete_gaussian_moments(a / r, b / r, max_m)
        .into_iter()
        .enumerate()
        .map(|(m, v)| v * r.powi(m as i32 + 1))
        .collect()
}

/// Nodes and weights of the n-point Gauss–Legendre rule on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else if n == 1 { x } else { p1 };
            let pn1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * pn - pn1) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}
