//! Solutions of ζ(s) = a: counting by argument tracking, root location,
//! Littlewood-lemma integrals, and the asymptotic count predictions.
//!
//! For a = 1 the classical count T/(2π)·log(T/(4πe)) of a-values up to height
//! T is not treated separately; every a ≠ 0 goes through the same machinery.

use crate::error::{Error, Result};
use crate::quadrature::integrate_with_breaks;
use crate::special::{erf, gauss_legendre, scaled_gaussian_moments};
use crate::zeta::{zeta_derivative, zeta_detailed, SIGMA_MAX, SIGMA_MIN, T_MAX};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_4, PI, TAU};
use std::io::Write;

/// Accuracy requested from every ζ evaluation here.
const ZETA_TARGET: f64 = 1e-10;
const MAX_DEPTH: usize = 40;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexRect {
    pub sigma_min: f64,
    pub sigma_max: f64,
    pub t_min: f64,
    pub t_max: f64,
}

impl ComplexRect {
    pub fn new(sigma_min: f64, sigma_max: f64, t_min: f64, t_max: f64) -> Result<Self> {
        let r = Self { sigma_min, sigma_max, t_min, t_max };
        r.check()?;
        Ok(r)
    }

    pub fn check(&self) -> Result<()> {
        if !(self.sigma_min < self.sigma_max && self.t_min < self.t_max) {
            return Err(Error::Domain(format!("degenerate rectangle {self:?}")));
        }
        if self.sigma_min < SIGMA_MIN || self.sigma_max > SIGMA_MAX || self.t_min.abs().max(self.t_max.abs()) > T_MAX {
            return Err(Error::Domain(format!("rectangle {self:?} leaves the evaluation box")));
        }
        Ok(())
    }

    /// Parses `sigma_min,sigma_max,t_min,t_max`.
    pub fn parse(text: &str) -> Result<Self> {
        let v: Vec<f64> = text
            .split(',')
            .map(|x| x.trim().parse::<f64>().map_err(|e| Error::Format(format!("rectangle '{text}': {e}"))))
            .collect::<Result<_>>()?;
        if v.len() != 4 {
            return Err(Error::Format(format!("rectangle '{text}' needs four numbers")));
        }
        Self::new(v[0], v[1], v[2], v[3])
    }

    pub fn contains(&self, s: Complex64) -> bool {
        s.re > self.sigma_min && s.re < self.sigma_max && s.im > self.t_min && s.im < self.t_max
    }

    pub fn width(&self) -> f64 {
        self.sigma_max - self.sigma_min
    }

    pub fn height(&self) -> f64 {
        self.t_max - self.t_min
    }

    /// The image under t → −t.
    pub fn reflect(&self) -> Self {
        Self { t_min: -self.t_max, t_max: -self.t_min, ..*self }
    }

    /// Split at σ = `sigma` and t = `t` into four pieces.
    pub fn split(&self, sigma: f64, t: f64) -> [Self; 4] {
        let r = *self;
        [
            Self { sigma_max: sigma, t_max: t, ..r },
            Self { sigma_min: sigma, t_max: t, ..r },
            Self { sigma_max: sigma, t_min: t, ..r },
            Self { sigma_min: sigma, t_min: t, ..r },
        ]
    }

    /// Corners in counter-clockwise order from (σ_min, t_min).
    fn corners(&self) -> [Complex64; 4] {
        [
            Complex64::new(self.sigma_min, self.t_min),
            Complex64::new(self.sigma_max, self.t_min),
            Complex64::new(self.sigma_max, self.t_max),
            Complex64::new(self.sigma_min, self.t_max),
        ]
    }

    fn pole_position(&self) -> PolePosition {
        let (s, t) = (1.0, 0.0);
        let inside_closed = s >= self.sigma_min && s <= self.sigma_max && t >= self.t_min && t <= self.t_max;
        if !inside_closed {
            PolePosition::Outside
        } else if s == self.sigma_min || s == self.sigma_max || t == self.t_min || t == self.t_max {
            PolePosition::OnBoundary
        } else {
            PolePosition::Inside
        }
    }
}

enum PolePosition {
    Outside,
    Inside,
    OnBoundary,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountOptions {
    /// Initial spacing of boundary samples.
    pub base_step: f64,
    /// Winding is recomputed with the base step halved until two runs agree;
    /// at most this many halvings.
    pub max_halvings: usize,
    /// Minimum |ζ − a| allowed on the boundary.
    pub clearance: f64,
    pub refine_roots: bool,
}

impl Default for CountOptions {
    fn default() -> Self {
        Self { base_step: 0.05, max_halvings: 6, clearance: 1e-6, refine_roots: true }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Root {
    pub beta: f64,
    pub gamma: f64,
    /// |ζ(ρ) − a|.
    pub residual: f64,
    /// Winding count of the smallest box isolating this root; > 1 means
    /// several roots could not be separated.
    pub multiplicity: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AValueReport {
    pub a: Complex64,
    /// The rectangle actually counted (after any boundary perturbation).
    pub rect: ComplexRect,
    pub count: usize,
    /// |winding − nearest integer| before rounding.
    pub winding_residual: f64,
    /// min |ζ − a| over the evaluated boundary points.
    pub clearance: f64,
    pub roots: Vec<Root>,
    /// Band prediction for this rectangle, when a θ was supplied.
    pub prediction_main: Option<f64>,
    pub prediction_error_scale: Option<f64>,
    /// Inward shift applied to one edge by [`count_avalues_perturbed`].
    pub perturbation: f64,
}

impl AValueReport {
    pub fn write_roots_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "beta,gamma,residual,multiplicity")?;
        for r in &self.roots {
            writeln!(out, "{:?},{:?},{:?},{}", r.beta, r.gamma, r.residual, r.multiplicity)?;
        }
        Ok(())
    }

    /// Fill the prediction fields from the band formula with T = t_min,
    /// h_i = (σ_i − ½)(log T)^θ, scaled by (t_max − t_min)/T.
    pub fn attach_prediction(&mut self, theta: f64, allow_out_of_range: bool) -> Result<()> {
        let t = self.rect.t_min.max(3.0);
        let scale = t.ln().powf(theta);
        let h1 = (self.rect.sigma_min - 0.5) * scale;
        let h2 = (self.rect.sigma_max - 0.5) * scale;
        if h1 <= 0.0 {
            return Err(Error::Domain("band prediction needs sigma_min > 1/2".into()));
        }
        let p = predict_band(h1, h2, theta, t, allow_out_of_range)?;
        let f = self.rect.height() / t;
        self.prediction_main = Some(p.main * f);
        self.prediction_error_scale = Some(p.error_scale * f);
        Ok(())
    }
}

fn f_minus_a(s: Complex64, a: Complex64) -> Result<Complex64> {
    Ok(zeta_detailed(s, ZETA_TARGET)?.value - a)
}

/// Running minimum of |f| along a path, with its location.
#[derive(Clone, Copy, Debug)]
struct Clearance {
    value: f64,
    at: Complex64,
}

impl Clearance {
    fn new() -> Self {
        Self { value: f64::INFINITY, at: Complex64::new(0.0, 0.0) }
    }

    fn see(&mut self, s: Complex64, f: Complex64) {
        if f.norm() < self.value {
            self.value = f.norm();
            self.at = s;
        }
    }
}

/// Change of arg f along the segment s0 → s1, refined until every step moves
/// the argument by at most π/4 and the midpoint agrees with linear
/// interpolation to half the smaller endpoint modulus.
fn track_segment(
    eval: &dyn Fn(Complex64) -> Result<Complex64>,
    s0: Complex64,
    f0: Complex64,
    s1: Complex64,
    f1: Complex64,
    depth: usize,
    clear: &mut Clearance,
) -> Result<f64> {
    if depth > MAX_DEPTH {
        return Err(Error::RefinementExhausted(format!("argument tracking near s = {s0}")));
    }
    let sm = 0.5 * (s0 + s1);
    let fm = eval(sm)?;
    clear.see(sm, fm);
    let d = (f1 / f0).arg();
    let d1 = (fm / f0).arg();
    let d2 = (f1 / fm).arg();
    let smooth = (fm - 0.5 * (f0 + f1)).norm() <= 0.5 * f0.norm().min(f1.norm());
    if d.abs() <= FRAC_PI_4 && (d1 + d2 - d).abs() < 1e-9 && smooth {
        return Ok(d1 + d2);
    }
    Ok(track_segment(eval, s0, f0, sm, fm, depth + 1, clear)? + track_segment(eval, sm, fm, s1, f1, depth + 1, clear)?)
}

/// Total change of arg f along the polyline through `points`, starting from
/// base steps of at most `step`.
fn track_path(
    eval: &dyn Fn(Complex64) -> Result<Complex64>,
    points: &[Complex64],
    step: f64,
    clear: &mut Clearance,
) -> Result<f64> {
    let mut total = 0.0;
    let mut prev_s = points[0];
    let mut prev_f = eval(prev_s)?;
    clear.see(prev_s, prev_f);
    for w in points.windows(2) {
        let n = ((w[1] - w[0]).norm() / step).ceil().max(1.0) as usize;
        for k in 1..=n {
            let s = if k == n { w[1] } else { w[0] + (w[1] - w[0]) * (k as f64 / n as f64) };
            let f = eval(s)?;
            clear.see(s, f);
            total += track_segment(eval, prev_s, prev_f, s, f, 0, clear)?;
            prev_s = s;
            prev_f = f;
        }
    }
    Ok(total)
}

struct Winding {
    count: i64,
    residual: f64,
    clearance: Clearance,
}

fn winding_once(a: Complex64, rect: &ComplexRect, step: f64, min_clearance: f64) -> Result<Winding> {
    let eval = |s: Complex64| f_minus_a(s, a);
    let c = rect.corners();
    let mut clear = Clearance::new();
    let total = match track_path(&eval, &[c[0], c[1], c[2], c[3], c[0]], step, &mut clear) {
        Err(Error::Pole) => {
            return Err(Error::BoundaryTooClose { clearance: 0.0, sigma: 1.0, t: 0.0 });
        }
        other => other?,
    };
    if clear.value < min_clearance {
        return Err(Error::BoundaryTooClose { clearance: clear.value, sigma: clear.at.re, t: clear.at.im });
    }
    let w = total / TAU;
    let count = w.round() as i64;
    Ok(Winding { count, residual: (w - count as f64).abs(), clearance: clear })
}

/// Winding number of ζ − a around the rectangle, repeated with the base step
/// halved until two successive runs agree.
fn stable_winding(a: Complex64, rect: &ComplexRect, opts: &CountOptions) -> Result<Winding> {
    if let PolePosition::OnBoundary = rect.pole_position() {
        return Err(Error::BoundaryTooClose { clearance: 0.0, sigma: 1.0, t: 0.0 });
    }
    let mut step = opts.base_step.min(rect.width().min(rect.height()) / 2.0);
    let mut prev = winding_once(a, rect, step, opts.clearance)?;
    for _ in 0..opts.max_halvings {
        step /= 2.0;
        let next = winding_once(a, rect, step, opts.clearance)?;
        if next.count == prev.count {
            if next.residual > 1e-3 {
                return Err(Error::RefinementExhausted(format!("winding residual {}", next.residual)));
            }
            return Ok(next);
        }
        prev = next;
    }
    Err(Error::RefinementExhausted(format!("winding did not stabilise for {rect:?}")))
}

/// Number of a-values in the open rectangle (poles of ζ − a inside are added back).
fn raw_count(a: Complex64, rect: &ComplexRect, opts: &CountOptions) -> Result<(usize, Winding)> {
    let w = stable_winding(a, rect, opts)?;
    let poles = matches!(rect.pole_position(), PolePosition::Inside) as i64;
    let n = w.count + poles;
    if n < 0 {
        return Err(Error::RefinementExhausted(format!("negative a-value count {n}")));
    }
    Ok((n as usize, w))
}

/// Count the solutions of ζ(s) = a inside `rect` by the argument principle.
pub fn count_avalues(a: Complex64, rect: &ComplexRect, opts: &CountOptions) -> Result<AValueReport> {
    if a == Complex64::new(0.0, 0.0) {
        return Err(Error::Domain("a must be nonzero".into()));
    }
    rect.check()?;
    let (count, w) = raw_count(a, rect, opts)?;
    let roots = if opts.refine_roots { locate_roots(a, rect, count, opts, 0)? } else { Vec::new() };
    Ok(AValueReport {
        a,
        rect: *rect,
        count,
        winding_residual: w.residual,
        clearance: w.clearance.value,
        roots,
        prediction_main: None,
        prediction_error_scale: None,
        perturbation: 0.0,
    })
}

/// [`count_avalues`], moving an edge inward when it passes too close to an
/// a-value or to the pole. Shifts of 1e-3, 3e-3, 1e-2 and 3e-2 are tried.
pub fn count_avalues_perturbed(a: Complex64, rect: &ComplexRect, opts: &CountOptions) -> Result<AValueReport> {
    let mut current = *rect;
    let mut shift_total = 0.0;
    for _ in 0..4 {
        match count_avalues(a, &current, opts) {
            Err(Error::BoundaryTooClose { sigma, t, .. }) => {
                let mut moved = false;
                for delta in [1e-3, 3e-3, 1e-2, 3e-2] {
                    let candidate = shift_nearest_edge(&current, sigma, t, delta);
                    if candidate.check().is_ok() && stable_winding(a, &candidate, opts).is_ok() {
                        current = candidate;
                        shift_total += delta;
                        moved = true;
                        break;
                    }
                }
                if !moved {
                    return Err(Error::BoundaryTooClose { clearance: 0.0, sigma, t });
                }
            }
            Ok(mut report) => {
                report.perturbation = shift_total;
                return Ok(report);
            }
            Err(e) => return Err(e),
        }
    }
    Err(Error::RefinementExhausted("boundary perturbation did not clear the contour".into()))
}

fn shift_nearest_edge(r: &ComplexRect, sigma: f64, t: f64, delta: f64) -> ComplexRect {
    let d = [
        (sigma - r.sigma_min).abs(),
        (sigma - r.sigma_max).abs(),
        (t - r.t_min).abs(),
        (t - r.t_max).abs(),
    ];
    let k = (0..4).min_by(|&i, &j| d[i].total_cmp(&d[j])).unwrap_or(0);
    let mut out = *r;
    match k {
        0 => out.sigma_min += delta,
        1 => out.sigma_max -= delta,
        2 => out.t_min += delta,
        _ => out.t_max -= delta,
    }
    out
}

fn newton(a: Complex64, start: Complex64) -> Option<Complex64> {
    let mut s = start;
    for _ in 0..60 {
        let f = f_minus_a(s, a).ok()?;
        let d = zeta_derivative(s, ZETA_TARGET).ok()?;
        if d.norm() == 0.0 {
            return None;
        }
        let step = f / d;
        s -= step;
        // stay near the start and inside the evaluation box
        if !((s - start).norm() <= 2.0 && s.re >= SIGMA_MIN && s.re <= SIGMA_MAX) {
            return None;
        }
        if step.norm() < 1e-13 * s.norm().max(1.0) {
            return Some(s);
        }
    }
    let f = f_minus_a(s, a).ok()?;
    (f.norm() < 1e-10).then_some(s)
}

fn make_root(a: Complex64, s: Complex64, multiplicity: usize) -> Result<Root> {
    Ok(Root { beta: s.re, gamma: s.im, residual: f_minus_a(s, a)?.norm(), multiplicity })
}

/// Roots inside `rect`, which holds `count` of them, by bisection of the
/// longer side and Newton's method once a piece holds a single root.
fn locate_roots(a: Complex64, rect: &ComplexRect, count: usize, opts: &CountOptions, depth: usize) -> Result<Vec<Root>> {
    if count == 0 {
        return Ok(Vec::new());
    }
    let centre = Complex64::new(0.5 * (rect.sigma_min + rect.sigma_max), 0.5 * (rect.t_min + rect.t_max));
    let small = rect.width() <= 0.25 && rect.height() <= 0.5;
    if count == 1 && (small || depth > 4) {
        if let Some(s) = newton(a, centre) {
            if rect.contains(s) {
                return Ok(vec![make_root(a, s, 1)?]);
            }
        }
    }
    if rect.width().max(rect.height()) < 1e-7 || depth > 60 {
        let s = newton(a, centre).filter(|s| rect.contains(*s)).unwrap_or(centre);
        return Ok(vec![make_root(a, s, count)?]);
    }
    let split_t = rect.height() >= rect.width();
    let sub_opts = CountOptions { base_step: opts.base_step.min(0.25 * rect.width().min(rect.height())), ..*opts };
    // try the midpoint first, then nearby cuts if the cut passes too close to a root
    for off in [0.0, 0.013, -0.017, 0.031, -0.037, 0.07, -0.09] {
        let frac = 0.5 + off;
        let (lo, hi) = if split_t {
            let t = rect.t_min + frac * rect.height();
            (ComplexRect { t_max: t, ..*rect }, ComplexRect { t_min: t, ..*rect })
        } else {
            let s = rect.sigma_min + frac * rect.width();
            (ComplexRect { sigma_max: s, ..*rect }, ComplexRect { sigma_min: s, ..*rect })
        };
        let counts = raw_count(a, &lo, &sub_opts).and_then(|c1| raw_count(a, &hi, &sub_opts).map(|c2| (c1.0, c2.0)));
        match counts {
            Ok((c1, c2)) if c1 + c2 == count => {
                let mut out = locate_roots(a, &lo, c1, opts, depth + 1)?;
                out.extend(locate_roots(a, &hi, c2, opts, depth + 1)?);
                return Ok(out);
            }
            Ok(_) | Err(Error::BoundaryTooClose { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::RefinementExhausted(format!("could not split {rect:?} holding {count} roots")))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LittlewoodIntegral {
    /// ∫_{T1}^{T2} log|ζ(σ+it) − a| dt.
    pub integral: f64,
    /// integral/(T2 − T1).
    pub mean: f64,
    pub error: f64,
    /// Roots within 0.01 of the line, handled by the analytic local model.
    pub singularities: usize,
}

/// ∫ ½ log(d² + u²) du from u0 to u1.
fn log_hypot_integral(d: f64, u0: f64, u1: f64) -> f64 {
    let prim = |u: f64| -> f64 {
        let r2 = u * u + d * d;
        let log_part = if r2 > 0.0 { 0.5 * u * r2.ln() } else { 0.0 };
        let atan_part = if d == 0.0 { 0.0 } else { d * (u / d).atan() };
        log_part - u + atan_part
    };
    prim(u1) - prim(u0)
}

/// Scan step for near-root detection along a vertical line.
const SCAN_STEP: f64 = 0.01;
/// Roots closer than this to the line get the local model.
const SINGULAR_BAND: f64 = 0.01;

/// ∫_{T1}^{T2} log|ζ(σ+it) − a| dt.
///
/// Local minima of |ζ − a| on a 0.01-spaced scan are refined to roots ρ by
/// Newton's method. Within 0.02 of a root with |β − σ| < 0.01 the integrand
/// is split as log|(ζ − a)/(s − ρ)| + log|s − ρ|; the first part is smooth
/// and the second is integrated in closed form.
pub fn littlewood_integral(a: Complex64, sigma: f64, t1: f64, t2: f64) -> Result<LittlewoodIntegral> {
    if a == Complex64::new(0.0, 0.0) {
        return Err(Error::Domain("a must be nonzero".into()));
    }
    if !(t2 > t1) {
        return Err(Error::Domain(format!("empty window [{t1}, {t2}]")));
    }
    let n = ((t2 - t1) / SCAN_STEP).ceil() as usize;
    let ts: Vec<f64> = (0..=n).map(|k| t1 + (t2 - t1) * k as f64 / n as f64).collect();
    let mods: Vec<f64> = ts
        .iter()
        .map(|&t| f_minus_a(Complex64::new(sigma, t), a).map(|f| f.norm()))
        .collect::<Result<_>>()?;
    let mut roots: Vec<Complex64> = Vec::new();
    for k in 0..=n {
        let left = if k > 0 { mods[k - 1] } else { f64::INFINITY };
        let right = if k < n { mods[k + 1] } else { f64::INFINITY };
        if mods[k] <= left && mods[k] <= right {
            if let Some(r) = newton(a, Complex64::new(sigma, ts[k])) {
                if (r.re - sigma).abs() < SINGULAR_BAND
                    && (r.im - ts[k]).abs() < 2.0 * SCAN_STEP
                    && !roots.iter().any(|q| (q - r).norm() < 1e-8)
                {
                    roots.push(r);
                }
            }
        }
    }
    if roots.len() > 10_000 {
        return Err(Error::PartialResult { covered: 0.0 });
    }
    roots.sort_by(|x, y| x.im.total_cmp(&y.im));
    // windows [γ − w, γ + w] clipped to [t1, t2], merged when overlapping
    let half = 2.0 * SCAN_STEP;
    let mut windows: Vec<(f64, f64, Vec<Complex64>)> = Vec::new();
    for r in &roots {
        let (lo, hi) = ((r.im - half).max(t1), (r.im + half).min(t2));
        match windows.last_mut() {
            Some(w) if lo <= w.1 => {
                w.1 = w.1.max(hi);
                w.2.push(*r);
            }
            _ => windows.push((lo, hi, vec![*r])),
        }
    }
    let mut total = 0.0;
    let mut error = 0.0;
    let mut cursor = t1;
    for w in windows.iter().map(|w| (w.0, w.1)).chain(std::iter::once((t2, t2))) {
        if w.0 > cursor {
            let pieces = ((w.0 - cursor) / 1.0).ceil().max(1.0) as usize;
            let br: Vec<f64> = (0..=pieces).map(|k| cursor + (w.0 - cursor) * k as f64 / pieces as f64).collect();
            let q = integrate_with_breaks(
                |t| f_minus_a(Complex64::new(sigma, t), a).map(|f| f.norm().ln()).unwrap_or(f64::NAN),
                &br,
                1e-9 * (w.0 - cursor),
                1e-12,
                20 * pieces + 2000,
            )?;
            total += q.value;
            error += q.error;
        }
        cursor = cursor.max(w.1);
    }
    // windows with the local model
    for (lo, hi, rs) in &windows {
        let smooth = |t: f64| -> f64 {
            let s = Complex64::new(sigma, t);
            let f = match f_minus_a(s, a) {
                Ok(f) => f,
                Err(_) => return f64::NAN,
            };
            let mut v = f.norm().ln();
            for r in rs {
                v -= (s - r).norm().ln();
            }
            v
        };
        let q = integrate_with_breaks(smooth, &[*lo, *hi], 1e-11, 1e-12, 400)?;
        total += q.value;
        error += q.error;
        for r in rs {
            total += log_hypot_integral(sigma - r.re, lo - r.im, hi - r.im);
        }
    }
    Ok(LittlewoodIntegral { integral: total, mean: total / (t2 - t1), error, singularities: roots.len() })
}

/// ∫_{σ1}^{σ2} arg(ζ − a)(σ + it) dσ with the argument continued leftward from σ2.
fn arg_integral(a: Complex64, t: f64, sigma1: f64, sigma2: f64, arg_at_right: f64, nodes: usize) -> Result<f64> {
    let (x, w) = gauss_legendre(nodes);
    let panels = ((sigma2 - sigma1) / 0.02).ceil() as usize;
    let width = (sigma2 - sigma1) / panels as f64;
    let eval = |s: Complex64| f_minus_a(s, a);
    let mut s_prev = Complex64::new(sigma2, t);
    let mut f_prev = eval(s_prev)?;
    let mut arg = arg_at_right;
    let mut clear = Clearance::new();
    let mut acc = 0.0;
    for p in (0..panels).rev() {
        let (lo, hi) = (sigma1 + p as f64 * width, sigma1 + (p + 1) as f64 * width);
        // Gauss nodes in decreasing σ
        let mut pts: Vec<(f64, f64)> =
            x.iter().zip(&w).map(|(&xi, &wi)| (0.5 * (lo + hi) + 0.5 * (hi - lo) * xi, 0.5 * (hi - lo) * wi)).collect();
        pts.sort_by(|u, v| v.0.total_cmp(&u.0));
        for (sg, wt) in pts {
            let s = Complex64::new(sg, t);
            let f = eval(s)?;
            arg += track_segment(&eval, s_prev, f_prev, s, f, 0, &mut clear)?;
            acc += wt * arg;
            s_prev = s;
            f_prev = f;
        }
    }
    Ok(acc)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LittlewoodBalance {
    pub a: Complex64,
    pub rect: ComplexRect,
    /// ∫ log|ζ − a| on the left and right edges.
    pub left_log: LittlewoodIntegral,
    pub right_log: LittlewoodIntegral,
    /// ∫ arg(ζ − a) dσ along the top and bottom edges.
    pub top_arg: f64,
    pub bottom_arg: f64,
    /// (left − right + top − bottom)/2π.
    pub lhs: f64,
    /// Σ_ρ (β − σ1) = ∫_{σ1}^{σ2} N_a(w) dw.
    pub rhs: f64,
    /// Combined quadrature error estimate of the left side.
    pub error: f64,
    pub roots: Vec<Root>,
}

/// Both sides of Littlewood's lemma for ζ − a on `rect`:
/// 2π ∫_{σ1}^{σ2} N(w) dw = ∫ log|f(σ1+it)| dt − ∫ log|f(σ2+it)| dt
///                         + ∫ arg f(σ+iT2) dσ − ∫ arg f(σ+iT1) dσ,
/// with arg f continued from the right edge.
pub fn littlewood_balance(a: Complex64, rect: &ComplexRect, opts: &CountOptions) -> Result<LittlewoodBalance> {
    let report = count_avalues(a, rect, &CountOptions { refine_roots: true, ..*opts })?;
    if report.roots.iter().map(|r| r.multiplicity).sum::<usize>() != report.count {
        return Err(Error::RefinementExhausted("roots could not all be located".into()));
    }
    let left_log = littlewood_integral(a, rect.sigma_min, rect.t_min, rect.t_max)?;
    let right_log = littlewood_integral(a, rect.sigma_max, rect.t_min, rect.t_max)?;
    let eval = |s: Complex64| f_minus_a(s, a);
    let bottom_right = Complex64::new(rect.sigma_max, rect.t_min);
    let top_right = Complex64::new(rect.sigma_max, rect.t_max);
    let f0 = eval(bottom_right)?;
    let arg0 = f0.arg();
    let mut clear = Clearance::new();
    let arg1 = arg0 + track_path(&eval, &[bottom_right, top_right], opts.base_step, &mut clear)?;
    let mut args = [0.0; 4];
    for (i, nodes) in [8usize, 12].into_iter().enumerate() {
        args[2 * i] = arg_integral(a, rect.t_max, rect.sigma_min, rect.sigma_max, arg1, nodes)?;
        args[2 * i + 1] = arg_integral(a, rect.t_min, rect.sigma_min, rect.sigma_max, arg0, nodes)?;
    }
    let (top_arg, bottom_arg) = (args[2], args[3]);
    let arg_err = (args[2] - args[0]).abs() + (args[3] - args[1]).abs();
    let lhs = (left_log.integral - right_log.integral + top_arg - bottom_arg) / TAU;
    let rhs: f64 = report.roots.iter().map(|r| r.multiplicity as f64 * (r.beta - rect.sigma_min)).sum();
    Ok(LittlewoodBalance {
        a,
        rect: *rect,
        left_log,
        right_log,
        top_arg,
        bottom_arg,
        lhs,
        rhs,
        error: (left_log.error + right_log.error + arg_err) / TAU,
        roots: report.roots,
    })
}

/// The mean of log|ζ(σ_T+it) − a| predicted from the Gaussian main term:
/// √ψ/(2√π)·e^{−ℓ²/ψ} + (ℓ/2)(1 + erf(ℓ/√ψ)), ℓ = log|a|; and its three-term
/// expansion √ψ/(2√π) + ℓ/2 + ℓ²/(2√(πψ)).
pub fn littlewood_mean_prediction(a: Complex64, psi: f64) -> (f64, f64) {
    let l = a.norm().ln();
    let sp = psi.sqrt();
    let exact = sp / (2.0 * PI.sqrt()) * (-l * l / psi).exp() + 0.5 * l * (1.0 + erf(l / sp));
    let expansion = sp / (2.0 * PI.sqrt()) + 0.5 * l + l * l / (2.0 * PI.sqrt() * sp);
    (exact, expansion)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountPrediction {
    pub main: f64,
    /// T(log T)^θ/(log log T)^{3/4}, without its unknown constant.
    pub error_scale: f64,
}

/// Main term T(log T)^θ/(8π^{3/2}√θ√(log log T)) for the number of a-values
/// with β > σ_T and T < γ < 2T; the same for every a ≠ 0.
pub fn predict_count(theta: f64, t: f64, allow_out_of_range: bool) -> Result<CountPrediction> {
    if t < 3.0 {
        return Err(Error::Domain(format!("T = {t} must be >= 3")));
    }
    if !(theta > 0.0) {
        return Err(Error::Domain(format!("theta = {theta} must be positive")));
    }
    if theta >= 1.0 / 13.0 && !allow_out_of_range {
        return Err(Error::Domain(format!("theta = {theta} is outside (0, 1/13) where the count is proven")));
    }
    let lt = t.ln();
    let llt = lt.ln();
    let base = t * lt.powf(theta);
    Ok(CountPrediction {
        main: base / (8.0 * PI.powf(1.5) * theta.sqrt() * llt.sqrt()),
        error_scale: base / llt.powf(0.75),
    })
}

/// Band count between σ_i = ½ + h_i/(log T)^θ: (1/h1 − 1/h2) times the main term.
pub fn predict_band(h1: f64, h2: f64, theta: f64, t: f64, allow_out_of_range: bool) -> Result<CountPrediction> {
    if !(0.0 < h1 && h1 < h2) {
        return Err(Error::Domain(format!("need 0 < h1 < h2, got {h1}, {h2}")));
    }
    let p = predict_count(theta, t, allow_out_of_range)?;
    Ok(CountPrediction { main: (1.0 / h1 - 1.0 / h2) * p.main, error_scale: p.error_scale })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionParams {
    pub a: Complex64,
    pub psi: f64,
    /// The regions reach out to W = A·ψ in both coordinates.
    pub big_a: f64,
    /// Gap 1/L around x = log|a|.
    pub l: f64,
    /// Largest m + n.
    pub max_degree: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionIntegral {
    /// 1 or 2.
    pub region: usize,
    pub m: usize,
    pub n: usize,
    /// Tensor Gauss–Legendre quadrature of the full integrand.
    pub direct: f64,
    pub direct_error: f64,
    /// Main term plus the summed geometric-series remainder.
    pub series: f64,
    /// The main term alone, over the finite region.
    pub main: f64,
    /// The main term extended to x from log|a| and y over ℝ.
    pub limit: f64,
    /// Number of series terms used and the bound on the omitted ones.
    pub series_terms: usize,
    pub series_tail_bound: f64,
    /// |direct − series|.
    pub gap: f64,
}

/// Gauss–Legendre nodes (`gl` on [−1, 1]) on every panel between sorted breaks.
fn panel_rule(mut br: Vec<f64>, gl: &(Vec<f64>, Vec<f64>)) -> Vec<(f64, f64)> {
    br.sort_by(f64::total_cmp);
    br.dedup_by(|p, q| (*p - *q).abs() < 1e-14);
    let mut out = Vec::with_capacity(br.len() * gl.0.len());
    for pair in br.windows(2) {
        let (c, h) = (0.5 * (pair[0] + pair[1]), 0.5 * (pair[1] - pair[0]));
        for (xi, wi) in gl.0.iter().zip(&gl.1) {
            out.push((c + h * xi, h * wi));
        }
    }
    out
}

/// Uniform panels of width ≤ `panel` on [lo, hi], plus breaks at distances
/// panel/3^j from each point in `centres`, down to `finest`.
fn graded_breaks(lo: f64, hi: f64, panel: f64, centres: &[f64], finest: f64) -> Vec<f64> {
    let len = hi - lo;
    let uniform = (len / panel).ceil() as usize;
    let mut br: Vec<f64> = (0..=uniform).map(|k| lo + len * k as f64 / uniform as f64).collect();
    for &c in centres {
        let mut g = 0.5 * panel;
        while g > finest {
            for x in [c - g, c + g] {
                if x > lo && x < hi {
                    br.push(x);
                }
            }
            g /= 3.0;
        }
        if c > lo && c < hi {
            br.push(c);
        }
    }
    br
}

/// ∫_{lo}^{hi} x^m e^{sx − x²/ψ} dx for m ≤ max and complex s, by Gauss–Legendre on panels.
fn exp_moments(lo: f64, hi: f64, s: Complex64, psi: f64, max: usize) -> Vec<Complex64> {
    let rule = panel_rule(graded_breaks(lo, hi, 0.5, &[], 1.0), &gauss_legendre(20));
    let mut out = vec![Complex64::new(0.0, 0.0); max + 1];
    for (x, w) in rule {
        let g = w * (s * x - x * x / psi).exp();
        let mut xp = 1.0;
        for o in out.iter_mut() {
            *o += g * xp;
            xp *= x;
        }
    }
    out
}

/// ∬_{R_j} log|e^{x+iy} − a| x^m y^n e^{−(x²+y²)/ψ} dx dy over
/// R₁ = [log|a| + 1/L, W]×[−W, W] and R₂ = [−W, log|a| − 1/L]×[−W, W],
/// W = A·ψ, computed by direct quadrature and by expanding the logarithm in
/// powers of a·e^{−(x+iy)} (R₁) or e^{x+iy}/a (R₂).
pub fn region_decomposition_integrals(p: &RegionParams) -> Result<Vec<RegionIntegral>> {
    if p.a == Complex64::new(0.0, 0.0) || !(p.psi > 0.0) || !(p.l > 0.0) || !(p.big_a > 0.0) {
        return Err(Error::Domain("need a != 0 and psi, A, L > 0".into()));
    }
    let la = p.a.norm().ln();
    let w = p.big_a * p.psi;
    let x1 = la + 1.0 / p.l;
    let x2 = la - 1.0 / p.l;
    if x1 >= w || x2 <= -w {
        return Err(Error::Domain(format!("regions are empty: log|a| = {la}, W = {w}")));
    }
    let d = p.max_degree;
    let psi = p.psi;
    let gl_fine = gauss_legendre(16);
    let gl_coarse = gauss_legendre(10);
    // log|e^{x+iy} − a| is singular at y = arg a + 2πk − i(x − log|a|)
    let centres: Vec<f64> = {
        let base = p.a.arg();
        let k0 = ((-w - base) / TAU).floor() as i64;
        let k1 = ((w - base) / TAU).ceil() as i64;
        (k0..=k1).map(|k| base + TAU * k as f64).filter(|y| y.abs() < w).collect()
    };
    let mut out = Vec::new();
    for region in [1usize, 2] {
        let (lo, hi) = if region == 1 { (x1, w) } else { (-w, x2) };
        let edge = if region == 1 { lo } else { hi };
        let x_breaks = graded_breaks(lo, hi, 0.5, &[edge], 0.3 / p.l);
        let direct = |gl: &(Vec<f64>, Vec<f64>)| -> Vec<Vec<f64>> {
            let mut acc = vec![vec![0.0; d + 1]; d + 1];
            for (x, wx) in panel_rule(x_breaks.clone(), gl) {
                let ex = (-x * x / psi).exp();
                let yr = panel_rule(graded_breaks(-w, w, 0.5, &centres, 0.3 * (x - la).abs()), gl);
                for (y, wy) in yr {
                    let z = Complex64::new(x, y).exp() - p.a;
                    let g = wx * wy * ex * (-y * y / psi).exp() * z.norm().ln();
                    let mut xp = 1.0;
                    for row in acc.iter_mut() {
                        let mut yp = 1.0;
                        for v in row.iter_mut() {
                            *v += g * xp * yp;
                            yp *= y;
                        }
                        xp *= x;
                    }
                }
            }
            acc
        };
        let fine = direct(&gl_fine);
        let coarse = direct(&gl_coarse);

        // main terms
        let my = scaled_gaussian_moments(-w, w, psi, d + 1);
        let my_inf = scaled_gaussian_moments(f64::NEG_INFINITY, f64::INFINITY, psi, d + 1);
        let (main_x, limit_x): (Vec<f64>, Vec<f64>) = if region == 1 {
            let mx = scaled_gaussian_moments(lo, hi, psi, d + 2);
            let lim = scaled_gaussian_moments(la, f64::INFINITY, psi, d + 2);
            ((0..=d).map(|m| mx[m + 1]).collect(), (0..=d).map(|m| lim[m + 1]).collect())
        } else {
            let mx = scaled_gaussian_moments(lo, hi, psi, d + 1);
            let lim = scaled_gaussian_moments(f64::NEG_INFINITY, la, psi, d + 1);
            ((0..=d).map(|m| la * mx[m]).collect(), (0..=d).map(|m| la * lim[m]).collect())
        };

        // series remainder: Σ_k c_k ∫ x^m e^{∓kx − x²/ψ} ∫ y^n e^{∓iky − y²/ψ}
        let mut series = vec![vec![Complex64::new(0.0, 0.0); d + 1]; d + 1];
        let mut k = 1usize;
        let mut tail_bound;
        loop {
            let kf = k as f64;
            let (coef, sx, sy) = if region == 1 {
                (p.a.powi(k as i32) / kf, -kf, -kf)
            } else {
                (p.a.inv().powi(k as i32) / kf, kf, kf)
            };
            let xm = exp_moments(lo, hi, Complex64::new(sx, 0.0), psi, d);
            let ym = exp_moments(-w, w, Complex64::new(0.0, sy), psi, d);
            let mut term_max = 0.0f64;
            for m in 0..=d {
                for n in 0..=d - m {
                    let t = coef * xm[m] * ym[n];
                    series[m][n] += t;
                    term_max = term_max.max(t.norm());
                }
            }
            // |a^k e^{−kx}| ≤ e^{−k/L} on R₁ (likewise on R₂), so later terms
            // are bounded by a geometric series in e^{−1/L} times the y-decay
            let r = (-1.0 / p.l).exp();
            let yd = (-(kf + 1.0).powi(2) * psi / 4.0).exp() / (-kf * kf * psi / 4.0).exp();
            tail_bound = term_max * r * yd / (1.0 - r * yd);
            if tail_bound < 1e-17 || k >= 400 {
                break;
            }
            k += 1;
        }
        for m in 0..=d {
            for n in 0..=d - m {
                let main = main_x[m] * my[n];
                let limit = limit_x[m] * my_inf[n];
                let series_value = main - series[m][n].re;
                out.push(RegionIntegral {
                    region,
                    m,
                    n,
                    direct: fine[m][n],
                    direct_error: (fine[m][n] - coarse[m][n]).abs(),
                    series: series_value,
                    main,
                    limit,
                    series_terms: k,
                    series_tail_bound: tail_bound,
                    gap: (fine[m][n] - series_value).abs(),
                });
            }
        }
    }
    Ok(out)
}
