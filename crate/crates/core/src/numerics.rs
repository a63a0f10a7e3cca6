//! Numeric kernels shared by the geometry modules: central finite
//! differences, fixed-step RK4, the normal CDF, closed-form complex
//! Gaussian integrals and sub-level sets of quadratics.

use std::f64::consts::{PI, SQRT_2};
use std::fmt;

use nalgebra::{DMatrix, DVector, SVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default step for first-order central differences.
pub const GRADIENT_STEP: f64 = 1e-5;
/// Default step for second-order central differences.
pub const HESSIAN_STEP: f64 = 1e-4;

/// Uniformly spaced sample points on `[lo, hi]`, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    lo: f64,
    hi: f64,
    n: usize,
}

impl Grid1D {
    pub fn new(lo: f64, hi: f64, n: usize) -> Result<Self> {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "grid bounds must satisfy lo < hi, got [{lo}, {hi}]"
            )));
        }
        if n < 2 {
            return Err(Error::InvalidParameter(format!(
                "grid needs at least 2 points, got {n}"
            )));
        }
        Ok(Self { lo, hi, n })
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        (self.hi - self.lo) / (self.n - 1) as f64
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        let h = self.spacing();
        (0..self.n).map(move |i| {
            if i + 1 == self.n {
                self.hi
            } else {
                self.lo + h * i as f64
            }
        })
    }
}

/// Step size and tolerances used when comparing numeric results.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToleranceConfig {
    pub fd_step: f64,
    pub abs_tol: f64,
    pub rel_tol: f64,
}

impl ToleranceConfig {
    pub fn new(fd_step: f64, abs_tol: f64, rel_tol: f64) -> Result<Self> {
        for (name, v) in [("fd_step", fd_step), ("abs_tol", abs_tol), ("rel_tol", rel_tol)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be strictly positive, got {v}"
                )));
            }
        }
        Ok(Self {
            fd_step,
            abs_tol,
            rel_tol,
        })
    }

    /// `|a - b| <= abs_tol + rel_tol * max(|a|, |b|)`
    pub fn close(&self, a: f64, b: f64) -> bool {
        (a - b).abs() <= self.abs_tol + self.rel_tol * a.abs().max(b.abs())
    }
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self {
            fd_step: GRADIENT_STEP,
            abs_tol: 1e-10,
            rel_tol: 1e-8,
        }
    }
}

/// Which derivative [`finite_difference`] computes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FdOrder {
    Gradient,
    Hessian,
}

/// Output of [`finite_difference`].
#[derive(Debug, Clone, PartialEq)]
pub enum Derivative {
    Gradient(DVector<f64>),
    Hessian(DMatrix<f64>),
}

impl Derivative {
    pub fn into_gradient(self) -> Option<DVector<f64>> {
        match self {
            Derivative::Gradient(g) => Some(g),
            Derivative::Hessian(_) => None,
        }
    }

    pub fn into_hessian(self) -> Option<DMatrix<f64>> {
        match self {
            Derivative::Hessian(h) => Some(h),
            Derivative::Gradient(_) => None,
        }
    }
}

/// Central-difference gradient or (symmetrized) Hessian of `f` at `x`.
pub fn finite_difference<F>(f: F, x: &[f64], order: FdOrder, step: f64) -> Result<Derivative>
where
    F: Fn(&[f64]) -> f64,
{
    match order {
        FdOrder::Gradient => fd_gradient(f, x, step).map(Derivative::Gradient),
        FdOrder::Hessian => fd_hessian(f, x, step).map(Derivative::Hessian),
    }
}

fn check_step(step: f64) -> Result<()> {
    if step > 0.0 && step.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "finite-difference step must be positive, got {step}"
        )))
    }
}

fn eval_at<F>(f: &F, x: &[f64], offset: &[f64], buf: &mut [f64]) -> Result<f64>
where
    F: Fn(&[f64]) -> f64,
{
    for ((b, xi), oi) in buf.iter_mut().zip(x).zip(offset) {
        *b = xi + oi;
    }
    let v = f(buf);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Evaluation {
            offset: offset.to_vec(),
        })
    }
}

pub fn fd_gradient<F>(f: F, x: &[f64], step: f64) -> Result<DVector<f64>>
where
    F: Fn(&[f64]) -> f64,
{
    check_step(step)?;
    let n = x.len();
    let mut buf = vec![0.0; n];
    let mut offset = vec![0.0; n];
    let mut grad = DVector::zeros(n);
    for i in 0..n {
        offset[i] = step;
        let fp = eval_at(&f, x, &offset, &mut buf)?;
        offset[i] = -step;
        let fm = eval_at(&f, x, &offset, &mut buf)?;
        offset[i] = 0.0;
        grad[i] = (fp - fm) / (2.0 * step);
    }
    Ok(grad)
}

pub fn fd_hessian<F>(f: F, x: &[f64], step: f64) -> Result<DMatrix<f64>>
where
    F: Fn(&[f64]) -> f64,
{
    check_step(step)?;
    let n = x.len();
    let mut buf = vec![0.0; n];
    let mut offset = vec![0.0; n];
    let f0 = eval_at(&f, x, &offset, &mut buf)?;
    let mut hess = DMatrix::zeros(n, n);
    let h2 = step * step;
    for i in 0..n {
        // diagonal on the same 2h-wide stencil as the mixed entries
        offset[i] = 2.0 * step;
        let fp = eval_at(&f, x, &offset, &mut buf)?;
        offset[i] = -2.0 * step;
        let fm = eval_at(&f, x, &offset, &mut buf)?;
        offset[i] = 0.0;
        hess[(i, i)] = (fp - 2.0 * f0 + fm) / (4.0 * h2);
        for j in (i + 1)..n {
            let mut corner = |si: f64, sj: f64| {
                offset[i] = si * step;
                offset[j] = sj * step;
                let v = eval_at(&f, x, &offset, &mut buf);
                offset[i] = 0.0;
                offset[j] = 0.0;
                v
            };
            let fpp = corner(1.0, 1.0)?;
            let fpm = corner(1.0, -1.0)?;
            let fmp = corner(-1.0, 1.0)?;
            let fmm = corner(-1.0, -1.0)?;
            let v = (fpp - fpm - fmp + fmm) / (4.0 * h2);
            hess[(i, j)] = v;
            hess[(j, i)] = v;
        }
    }
    // symmetrize; the stencil above is already symmetric entry-wise
    Ok((&hess + hess.transpose()) * 0.5)
}

/// Samples of an RK4 run. `escaped_at` is set when the state left the
/// admissible domain; `samples` then ends at the last admissible state.
#[derive(Debug, Clone, PartialEq)]
pub struct Rk4Run<const N: usize> {
    pub samples: Vec<(f64, SVector<f64, N>)>,
    pub escaped_at: Option<f64>,
}

/// Number of full steps and the trailing partial step for `[0, t_end]`.
pub fn step_schedule(t_end: f64, dt: f64) -> (usize, f64) {
    let ratio = t_end / dt;
    let full = (ratio + 1e-9).floor();
    let rest = t_end - full * dt;
    let rest = if rest.abs() <= 1e-9 * dt { 0.0 } else { rest.max(0.0) };
    (full as usize, rest)
}

/// Classical fixed-step RK4; stops early when `admissible` fails or the
/// field turns non-finite.
pub fn rk4_run<const N: usize, F, A>(
    field: F,
    x0: SVector<f64, N>,
    t_end: f64,
    dt: f64,
    admissible: A,
) -> Result<Rk4Run<N>>
where
    F: Fn(&SVector<f64, N>) -> SVector<f64, N>,
    A: Fn(&SVector<f64, N>) -> bool,
{
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidParameter(format!("dt must be positive, got {dt}")));
    }
    if !(t_end >= 0.0) || !t_end.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "t_end must be non-negative, got {t_end}"
        )));
    }
    let (full, rest) = step_schedule(t_end, dt);
    let mut samples = Vec::with_capacity(full + 2);
    let mut x = x0;
    let mut t = 0.0;
    samples.push((t, x));
    let step = |x: &SVector<f64, N>, h: f64| {
        let k1 = field(x);
        let k2 = field(&(x + k1 * (h / 2.0)));
        let k3 = field(&(x + k2 * (h / 2.0)));
        let k4 = field(&(x + k3 * h));
        x + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0)
    };
    let steps = (0..full).map(|_| dt).chain((rest > 0.0).then_some(rest));
    for (i, h) in steps.enumerate() {
        let next = step(&x, h);
        let t_next = if i < full { (i + 1) as f64 * dt } else { t_end };
        if next.iter().any(|v| !v.is_finite()) || !admissible(&next) {
            return Ok(Rk4Run {
                samples,
                escaped_at: Some(t_next),
            });
        }
        x = next;
        t = t_next;
        samples.push((t, x));
    }
    Ok(Rk4Run {
        samples,
        escaped_at: None,
    })
}

/// RK4 over `[0, t_end]` with the whole space admissible.
pub fn rk4_integrate<const N: usize, F>(
    field: F,
    x0: SVector<f64, N>,
    t_end: f64,
    dt: f64,
) -> Result<Vec<(f64, SVector<f64, N>)>>
where
    F: Fn(&SVector<f64, N>) -> SVector<f64, N>,
{
    rk4_integrate_in(field, x0, t_end, dt, |_| true)
}

/// RK4 restricted to a domain; leaving it is an error carrying the escape time.
pub fn rk4_integrate_in<const N: usize, F, A>(
    field: F,
    x0: SVector<f64, N>,
    t_end: f64,
    dt: f64,
    admissible: A,
) -> Result<Vec<(f64, SVector<f64, N>)>>
where
    F: Fn(&SVector<f64, N>) -> SVector<f64, N>,
    A: Fn(&SVector<f64, N>) -> bool,
{
    let run = rk4_run(field, x0, t_end, dt, admissible)?;
    match run.escaped_at {
        Some(time) => Err(Error::DomainEscape { time }),
        None => Ok(run.samples),
    }
}

/// Standard normal CDF.
pub fn normal_cdf(t: f64) -> f64 {
    0.5 * libm::erfc(-t / SQRT_2)
}

fn check_convergent(a: Complex64) -> Result<()> {
    if a.re < 0.0 {
        Ok(())
    } else {
        Err(Error::Divergence { re_a: a.re })
    }
}

/// `∫ exp(a x² + b x + c) dx` over the real line, `Re a < 0`.
pub fn complex_gaussian_integral(a: Complex64, b: Complex64, c: Complex64) -> Result<Complex64> {
    check_convergent(a)?;
    let root = (Complex64::from(PI) / (-a)).sqrt();
    Ok(root * (c - b * b / (a * 4.0)).exp())
}

/// `∫ xⁿ exp(a x² + b x + c) dx`, via the moments of the (complex) normal
/// law with mean `-b/2a` and variance `-1/2a`.
pub fn complex_gaussian_moment(
    n: u32,
    a: Complex64,
    b: Complex64,
    c: Complex64,
) -> Result<Complex64> {
    let mass = complex_gaussian_integral(a, b, c)?;
    Ok(mass * normal_moment(n, -b / (a * 2.0), -(a * 2.0).inv()))
}

/// `E[Xⁿ]` for `X ~ N(mean, var)`, analytically continued to complex parameters.
pub fn normal_moment(n: u32, mean: Complex64, var: Complex64) -> Complex64 {
    let mut total = Complex64::new(0.0, 0.0);
    let mut binom = 1.0_f64; // C(n, 2k)
    let mut double_fact = 1.0_f64; // (2k-1)!!
    let mut var_pow = Complex64::new(1.0, 0.0);
    let mut k = 0u32;
    while 2 * k <= n {
        total += mean.powu(n - 2 * k) * var_pow * (binom * double_fact);
        let m = 2 * k;
        if m + 2 <= n {
            binom *= ((n - m) * (n - m - 1)) as f64 / ((m + 1) * (m + 2)) as f64;
        }
        double_fact *= (2 * k + 1) as f64;
        var_pow *= var;
        k += 1;
    }
    total
}

/// `k(x) = α x² + β x + γ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Polynomial2 {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl Polynomial2 {
    pub const fn new(alpha: f64, beta: f64, gamma: f64) -> Self {
        Self { alpha, beta, gamma }
    }

    pub fn eval(&self, x: f64) -> f64 {
        (self.alpha * x + self.beta) * x + self.gamma
    }

    pub fn is_constant(&self) -> bool {
        self.alpha == 0.0 && self.beta == 0.0
    }
}

impl fmt::Display for Polynomial2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x^2 + {}x + {}", self.alpha, self.beta, self.gamma)
    }
}

/// Closed interval with possibly infinite endpoints.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() || lo > hi {
            return Err(Error::InvalidParameter(format!("invalid interval [{lo}, {hi}]")));
        }
        Ok(Self { lo, hi })
    }

    pub const fn real_line() -> Self {
        Self {
            lo: f64::NEG_INFINITY,
            hi: f64::INFINITY,
        }
    }

    pub const fn point(v: f64) -> Self {
        Self { lo: v, hi: v }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        (lo <= hi).then_some(Interval { lo, hi })
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn end(v: f64) -> String {
            if v == f64::INFINITY {
                "inf".into()
            } else if v == f64::NEG_INFINITY {
                "-inf".into()
            } else {
                format!("{v}")
            }
        }
        if self.lo == self.hi {
            return write!(f, "{{{}}}", end(self.lo));
        }
        let open = if self.lo.is_infinite() { '(' } else { '[' };
        let close = if self.hi.is_infinite() { ')' } else { ']' };
        write!(f, "{open}{},{}{close}", end(self.lo), end(self.hi))
    }
}

// Roots of α x² + β x + c with α ≠ 0 and non-negative discriminant, ascending.
fn real_roots(alpha: f64, beta: f64, c: f64) -> Option<(f64, f64)> {
    let disc = beta * beta - 4.0 * alpha * c;
    if disc < 0.0 {
        return None;
    }
    let s = disc.sqrt();
    let sign = if beta >= 0.0 { 1.0 } else { -1.0 };
    let q = -0.5 * (beta + sign * s);
    let (r1, r2) = if q == 0.0 {
        (0.0, 0.0)
    } else {
        (q / alpha, c / q)
    };
    Some(if r1 <= r2 { (r1, r2) } else { (r2, r1) })
}

/// `{x : k(x) <= t}` as at most two disjoint closed intervals, ascending.
pub fn quadratic_sublevel(k: &Polynomial2, t: f64) -> Vec<Interval> {
    let Polynomial2 { alpha, beta, gamma } = *k;
    let c = gamma - t;
    if alpha == 0.0 {
        if beta == 0.0 {
            return if c <= 0.0 { vec![Interval::real_line()] } else { vec![] };
        }
        let root = -c / beta;
        return if beta > 0.0 {
            vec![Interval {
                lo: f64::NEG_INFINITY,
                hi: root,
            }]
        } else {
            vec![Interval {
                lo: root,
                hi: f64::INFINITY,
            }]
        };
    }
    match real_roots(alpha, beta, c) {
        None if alpha > 0.0 => vec![],
        None => vec![Interval::real_line()],
        Some((r1, r2)) if alpha > 0.0 => vec![Interval { lo: r1, hi: r2 }],
        Some((r1, r2)) if r1 == r2 => vec![Interval::real_line()],
        Some((r1, r2)) => vec![
            Interval {
                lo: f64::NEG_INFINITY,
                hi: r1,
            },
            Interval {
                lo: r2,
                hi: f64::INFINITY,
            },
        ],
    }
}

/// Integral over `[from, to]` of the quadratic interpolating three samples.
fn quadratic_piece(ts: [f64; 3], ys: [Complex64; 3], from: f64, to: f64) -> Complex64 {
    // Lagrange basis in coordinates local to ts[0], integrated exactly;
    // the antiderivative of (s - a)(s - b) is s³/3 - (a + b) s²/2 + a b s.
    let origin = ts[0];
    let node = ts.map(|t| t - origin);
    let (from, to) = (from - origin, to - origin);
    let anti = |a: f64, b: f64, s: f64| s * s * s / 3.0 - (a + b) * s * s / 2.0 + a * b * s;
    let w = |i: usize| {
        let (a, b) = match i {
            0 => (node[1], node[2]),
            1 => (node[0], node[2]),
            _ => (node[0], node[1]),
        };
        let denom = (node[i] - a) * (node[i] - b);
        (anti(a, b, to) - anti(a, b, from)) / denom
    };
    ys[0] * w(0) + ys[1] * w(1) + ys[2] * w(2)
}

/// Running integral `∫₀^{t_i} y` at every sample: composite Simpson on
/// pairs of intervals, with the quadratic interpolant closing an odd tail.
/// Works on non-uniform sample times.
pub fn cumulative_simpson(ts: &[f64], ys: &[Complex64]) -> Vec<Complex64> {
    assert_eq!(ts.len(), ys.len(), "sample length mismatch");
    let n = ts.len();
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    match n {
        0 | 1 => return out,
        2 => {
            out[1] = (ys[0] + ys[1]) * (0.5 * (ts[1] - ts[0]));
            return out;
        }
        _ => {}
    }
    let mut acc = Complex64::new(0.0, 0.0);
    let mut i = 0;
    while i + 2 < n {
        let tri_t = [ts[i], ts[i + 1], ts[i + 2]];
        let tri_y = [ys[i], ys[i + 1], ys[i + 2]];
        out[i + 1] = acc + quadratic_piece(tri_t, tri_y, ts[i], ts[i + 1]);
        acc += quadratic_piece(tri_t, tri_y, ts[i], ts[i + 2]);
        out[i + 2] = acc;
        i += 2;
    }
    if i + 1 < n {
        let tri_t = [ts[i - 1], ts[i], ts[i + 1]];
        let tri_y = [ys[i - 1], ys[i], ys[i + 1]];
        out[i + 1] = acc + quadratic_piece(tri_t, tri_y, ts[i], ts[i + 1]);
    }
    out
}
