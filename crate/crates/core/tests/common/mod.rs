//! Brute-force a-value oracle shared by the integration tests.
#![allow(dead_code)]

use num_complex::Complex64;
use rayon::prelude::*;
use zetalab::zeta::zeta_detailed;

fn f(s: Complex64, a: Complex64) -> Option<Complex64> {
    zeta_detailed(s, 1e-12).ok().map(|z| z.value - a)
}

/// Newton with a central-difference derivative.
fn newton_fd(a: Complex64, mut s: Complex64) -> Option<Complex64> {
    let h = 1e-6;
    for _ in 0..50 {
        let v = f(s, a)?;
        let d = (f(s + h, a)? - f(s - h, a)?) / (2.0 * h);
        let step = v / d;
        s -= step;
        if !(s.re.is_finite() && s.im.is_finite()) || s.re < 0.4 || s.re > 10.0 {
            return None;
        }
        if step.norm() < 1e-12 {
            break;
        }
    }
    (f(s, a)?.norm() < 1e-9).then_some(s)
}

/// All solutions of ζ(s) = a found from local minima of |ζ − a| on a grid
/// of spacing `h` over [s0, s1]×[t0, t1], refined by Newton and deduplicated.
pub fn brute_force_roots(a: Complex64, s0: f64, s1: f64, t0: f64, t1: f64, h: f64) -> Vec<Complex64> {
    let ns = ((s1 - s0) / h).ceil() as usize + 1;
    let nt = ((t1 - t0) / h).ceil() as usize + 1;
    let grid: Vec<Vec<f64>> = (0..nt)
        .into_par_iter()
        .map(|j| {
            (0..ns)
                .map(|i| {
                    let s = Complex64::new(s0 + i as f64 * h, t0 + j as f64 * h);
                    f(s, a).map_or(f64::INFINITY, |v| v.norm())
                })
                .collect()
        })
        .collect();
    let mut found: Vec<Complex64> = Vec::new();
    for j in 1..nt - 1 {
        for i in 1..ns - 1 {
            let v = grid[j][i];
            let is_min = (-1i64..=1).all(|dj| {
                (-1i64..=1).all(|di| {
                    (di == 0 && dj == 0) || v <= grid[(j as i64 + dj) as usize][(i as i64 + di) as usize]
                })
            });
            if is_min && v < 0.5 {
                let start = Complex64::new(s0 + i as f64 * h, t0 + j as f64 * h);
                if let Some(r) = newton_fd(a, start) {
                    if !found.iter().any(|q| (q - r).norm() < 1e-7) {
                        found.push(r);
                    }
                }
            }
        }
    }
    found.sort_by(|x, y| x.im.total_cmp(&y.im));
    found
}

pub fn count_inside(roots: &[Complex64], r: &zetalab::avalues::ComplexRect) -> usize {
    roots.iter().filter(|s| r.contains(**s)).count()
}
