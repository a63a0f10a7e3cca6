//! The embedding `p ↦ Ψ(p)` of the tangent bundle into `L²(ℝ)` by Gaussian
//! wave functions, and the operators `Q(L)` representing the Jacobi algebra.

use std::ops::{Add, Mul, Sub};

use nalgebra::{Matrix4, Vector4};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dombrowski::{kahler_tensors, TangentChart, TangentPoint};
use crate::error::{Error, Result};
use crate::gaussian_family as family;
use crate::jacobi_group::{AlgebraElement, Basis};
use crate::numerics::{complex_gaussian_integral, normal_moment, Grid1D};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Imaginary part allowed in `⟨Ψ, Q(L)Ψ⟩`, relative to the real part.
pub const HERMITICITY_TOL: f64 = 1e-12;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// `x ↦ exp(c0 + c1 x + c2 x²)` with `Re c2 < 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveFunction {
    c0: Complex64,
    c1: Complex64,
    c2: Complex64,
}

impl WaveFunction {
    pub fn new(c0: Complex64, c1: Complex64, c2: Complex64) -> Result<Self> {
        if !(c2.re < 0.0) || !(c0.is_finite() && c1.is_finite() && c2.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "wave function exponent needs finite coefficients and Re c2 < 0, got c2 = {c2}"
            )));
        }
        Ok(Self { c0, c1, c2 })
    }

    pub fn coefficients(&self) -> [Complex64; 3] {
        [self.c0, self.c1, self.c2]
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        (self.c0 + self.c1 * x + self.c2 * (x * x)).exp()
    }

    /// `e^{d} · w`.
    pub fn times_exp(&self, d: Complex64) -> Self {
        Self { c0: self.c0 + d, ..*self }
    }

    /// `∂/∂x` of the exponent, `c1 + 2c2 x`, as polynomial coefficients.
    fn log_derivative(&self) -> [Complex64; 2] {
        [self.c1, self.c2 * 2.0]
    }
}

/// `Ψ(p)(x) = exp(½(z₁x + z₂x² − ψ(θ)))` with `zₖ = θₖ + iθ̇ₖ`.
pub fn psi_map(p: &TangentPoint) -> WaveFunction {
    let (z1, z2) = p.to_complex();
    WaveFunction {
        c0: c(-0.5 * family::potential(&p.theta())),
        c1: z1 * 0.5,
        c2: z2 * 0.5,
    }
}

/// `⟨w1, w2⟩ = ∫ conj(w1) w2 dx`.
pub fn inner_product(w1: &WaveFunction, w2: &WaveFunction) -> Result<Complex64> {
    complex_gaussian_integral(w1.c2.conj() + w2.c2, w1.c1.conj() + w2.c1, w1.c0.conj() + w2.c0)
}

/// `Q(L)w = (q0 + q1 x + q2 x²) w`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolynomialOperatorAction {
    pub q0: Complex64,
    pub q1: Complex64,
    pub q2: Complex64,
}

impl PolynomialOperatorAction {
    pub fn eval(&self, x: f64) -> Complex64 {
        self.q0 + self.q1 * x + self.q2 * (x * x)
    }

    pub fn coefficients(&self) -> [Complex64; 3] {
        [self.q0, self.q1, self.q2]
    }
}

/// Closed-form action of `Q(L)` on a Gaussian wave function:
/// `F ↦ −x²`, `P ↦ −i∂`, `G ↦ −∂²`, `Q ↦ x`, `H ↦ 2i(x∂ + ½)`, `R ↦ −¼`.
pub fn q_apply(l: &AlgebraElement, w: &WaveFunction) -> PolynomialOperatorAction {
    let [a, b] = w.log_derivative();
    let zero = c(0.0);
    let table = [
        [zero, zero, c(-1.0)],
        [-(a * a + b), -(a * b * 2.0), -(b * b)],
        [I, I * a * 2.0, I * b * 2.0],
        [-I * a, -I * b, zero],
        [zero, c(1.0), zero],
        [c(-0.25), zero, zero],
    ];
    let mut q = [zero; 3];
    for (coef, row) in l.coeffs().iter().zip(table) {
        for (acc, v) in q.iter_mut().zip(row) {
            *acc += v * *coef;
        }
    }
    PolynomialOperatorAction {
        q0: q[0],
        q1: q[1],
        q2: q[2],
    }
}

/// `poly(x) · w(x)`, the family on which all six generators act in closed form.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyWave {
    pub poly: Vec<Complex64>,
    pub wave: WaveFunction,
}

impl PolyWave {
    pub fn new(wave: WaveFunction) -> Self {
        Self { poly: vec![c(1.0)], wave }
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        let p = self.poly.iter().rev().fold(c(0.0), |acc, a| acc * x + a);
        p * self.wave.eval(x)
    }

    fn with_poly(&self, poly: Vec<Complex64>) -> Self {
        Self { poly, wave: self.wave }
    }

    fn shift(&self) -> Self {
        let mut poly = vec![c(0.0)];
        poly.extend_from_slice(&self.poly);
        self.with_poly(poly)
    }

    fn scale(&self, s: Complex64) -> Self {
        self.with_poly(self.poly.iter().map(|a| a * s).collect())
    }

    pub fn derivative(&self) -> Self {
        let [a, b] = self.wave.log_derivative();
        let n = self.poly.len();
        let mut out = vec![c(0.0); n + 1];
        for (k, coef) in self.poly.iter().enumerate() {
            if k > 0 {
                out[k - 1] += coef * k as f64;
            }
            out[k] += coef * a;
            out[k + 1] += coef * b;
        }
        self.with_poly(out)
    }

    /// `Q(B)` for a single generator.
    pub fn apply_generator(&self, b: Basis) -> Self {
        match b {
            Basis::F => self.shift().shift().scale(c(-1.0)),
            Basis::G => self.derivative().derivative().scale(c(-1.0)),
            Basis::H => (self.derivative().shift() + self.scale(c(0.5))).scale(I * 2.0),
            Basis::P => self.derivative().scale(-I),
            Basis::Q => self.shift(),
            Basis::R => self.scale(c(-0.25)),
        }
    }

    pub fn apply(&self, l: &AlgebraElement) -> Self {
        Basis::ALL
            .iter()
            .filter(|b| l.coeff(**b) != 0.0)
            .fold(self.scale(c(0.0)), |acc, b| acc + self.apply_generator(*b).scale(c(l.coeff(*b))))
    }

    pub fn max_coeff(&self) -> f64 {
        self.poly.iter().map(|a| a.norm()).fold(0.0, f64::max)
    }
}

impl Add for PolyWave {
    type Output = PolyWave;

    fn add(self, rhs: PolyWave) -> PolyWave {
        let n = self.poly.len().max(rhs.poly.len());
        let at = |p: &[Complex64], k: usize| p.get(k).copied().unwrap_or_default();
        let poly = (0..n).map(|k| at(&self.poly, k) + at(&rhs.poly, k)).collect();
        self.with_poly(poly)
    }
}

impl Sub for PolyWave {
    type Output = PolyWave;

    fn sub(self, rhs: PolyWave) -> PolyWave {
        self + rhs.scale(c(-1.0))
    }
}

impl Mul<PolyWave> for Complex64 {
    type Output = PolyWave;

    fn mul(self, rhs: PolyWave) -> PolyWave {
        rhs.scale(self)
    }
}

/// Fixed-seed Gaussian wave functions used as probes.
pub fn probe_waves(count: usize, seed: u64) -> Vec<WaveFunction> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let mut draw = |lo: f64, hi: f64| rng.random_range(lo..hi);
            let c0 = Complex64::new(draw(-0.5, 0.5), draw(-1.0, 1.0));
            let c1 = Complex64::new(draw(-1.0, 1.0), draw(-1.0, 1.0));
            let c2 = Complex64::new(draw(-1.0, -0.2), draw(-1.0, 1.0));
            WaveFunction { c0, c1, c2 }
        })
        .collect()
}

/// `max |([Q(L1),Q(L2)] − 2iQ([L1,L2]))w(x)|` over the grid and three probe
/// wave functions.
pub fn commutator_residual(l1: &AlgebraElement, l2: &AlgebraElement, grid: &Grid1D) -> f64 {
    let bracket = l1.bracket(l2);
    probe_waves(3, 0x5eed)
        .into_iter()
        .map(|w| {
            let w = PolyWave::new(w);
            let lhs = w.apply(l2).apply(l1) - w.apply(l1).apply(l2);
            let diff = lhs - (I * 2.0) * w.apply(&bracket);
            grid.points().map(|x| diff.eval(x).norm()).fold(0.0, f64::max)
        })
        .fold(0.0, f64::max)
}

// ∫ xⁿ |Ψ(p)|² for n = 0..=4, the moments of N(μ, σ²)
fn density_moments(p: &TangentPoint) -> [f64; 5] {
    let m = p.theta().to_mean();
    let var = m.sigma() * m.sigma();
    std::array::from_fn(|n| normal_moment(n as u32, c(m.mu()), c(var)).re)
}

/// `⟨Ψ(p), Q(L)Ψ(p)⟩` before the reality check.
pub fn expectation_complex(l: &AlgebraElement, p: &TangentPoint) -> Complex64 {
    let q = q_apply(l, &psi_map(p)).coefficients();
    q.iter().zip(density_moments(p)).map(|(a, m)| a * m).sum()
}

/// `⟨Ψ(p), Q(L)Ψ(p)⟩`, required to be real.
pub fn expectation(l: &AlgebraElement, p: &TangentPoint) -> Result<f64> {
    let value = expectation_complex(l, p);
    if value.im.abs() > HERMITICITY_TOL * value.re.abs().max(1.0) {
        return Err(Error::Hermiticity { imag: value.im });
    }
    Ok(value.re)
}

/// Coefficients `(d0, d1, d2)` of `Ψ_*A = (d0 + d1 x + d2 x²) Ψ` for a
/// tangent vector `A` in the `(θ, θ̇)` frame.
pub fn pushforward(p: &TangentPoint, a: &Vector4<f64>) -> [Complex64; 3] {
    let eta = p.theta().to_expectation();
    [
        c(-0.5 * (eta.eta1() * a[0] + eta.eta2() * a[1])),
        Complex64::new(a[0], a[2]) * 0.5,
        Complex64::new(a[1], a[3]) * 0.5,
    ]
}

/// `⟨Ψ_*A, Ψ_*B⟩` from Gaussian moments.
pub fn pullback_inner(p: &TangentPoint, a: &Vector4<f64>, b: &Vector4<f64>) -> Complex64 {
    let (da, db) = (pushforward(p, a), pushforward(p, b));
    let moments = density_moments(p);
    let mut total = c(0.0);
    for (m, x) in da.iter().enumerate() {
        for (n, y) in db.iter().enumerate() {
            total += x.conj() * y * moments[m + n];
        }
    }
    total
}

/// `S = [[0, 0], [0, ηᵢηⱼ]]` in the `(θ, θ̇)` frame.
pub fn s_tensor(p: &TangentPoint) -> Matrix4<f64> {
    let eta = p.theta().to_expectation();
    let e = [eta.eta1(), eta.eta2()];
    Matrix4::from_fn(|i, j| if i >= 2 && j >= 2 { e[i - 2] * e[j - 2] } else { 0.0 })
}

/// `⟨Ψ_*A, Ψ_*B⟩ − ¼(g(A,B) + iω(A,B) + S(A,B))`.
pub fn pullback_residual(p: &TangentPoint, a: &Vector4<f64>, b: &Vector4<f64>) -> Complex64 {
    let t = kahler_tensors(p, TangentChart::Natural);
    let form = |m: &Matrix4<f64>| (a.transpose() * m * b)[0];
    let expected = Complex64::new(form(&t.g) + form(&s_tensor(p)), form(&t.omega)) * 0.25;
    pullback_inner(p, a, b) - expected
}

/// The phase map `κ(p, L)`, linear in `L`, for which `Ψ` along a flow of
/// `X_{J^L}` satisfies `i dΨ/dt = ½Q(L)Ψ + ½κΨ`.
pub fn kappa(p: &TangentPoint, l: &AlgebraElement) -> Complex64 {
    let [t1, t2, d1, d2] = p.as_array();
    let eta = p.theta().to_expectation();
    let (e1, e2) = (eta.eta1(), eta.eta2());
    let values = [
        c(0.0),
        I * e1 * (d1 * t2 + t1 * d2) + I * 2.0 * e2 * t2 * d2 - 0.25 * d1 * d1 + t2 + I * d2 + 0.25 * t1 * t1
            + I * 0.5 * t1 * d1,
        -I * (e1 * t1 + 2.0 * e2 * t2 + 1.0),
        I * (Complex64::new(t1, d1) * 0.5 + t2 * e1),
        c(0.0),
        c(0.25),
    ];
    l.coeffs().iter().zip(values).map(|(a, v)| v * *a).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::momentum::{hamiltonian_field, kahler_value};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn tp(c: [f64; 4]) -> TangentPoint {
        TangentPoint::from_array(c).unwrap()
    }

    fn point_strategy() -> impl Strategy<Value = TangentPoint> {
        (-2.0..2.0f64, -2.0..-0.1f64, -2.0..2.0f64, -2.0..2.0f64).prop_map(|(a, b, c, d)| tp([a, b, c, d]))
    }

    fn el(s: &str) -> AlgebraElement {
        s.parse().unwrap()
    }

    #[test]
    fn ground_state() {
        let w = psi_map(&TangentPoint::standard());
        let [c0, c1, c2] = w.coefficients();
        assert_abs_diff_eq!(c0.re, -0.25 * (2.0 * PI).ln(), epsilon = 1e-15);
        assert_eq!((c0.im, c1, c2), (0.0, c(0.0), c(-0.25)));
        assert_abs_diff_eq!(inner_product(&w, &w).unwrap().re, 1.0, epsilon = 1e-14);
        // x²·Ψ through the coefficient-shift trick
        let x2 = PolyWave::new(w).apply(&el("-F"));
        let m = complex_gaussian_integral(c2 * 2.0, c(0.0), c0 * 2.0).unwrap();
        assert_eq!(x2.poly, vec![c(0.0), c(0.0), c(1.0)]);
        let second = crate::numerics::complex_gaussian_moment(2, c2 * 2.0, c(0.0), c0 * 2.0).unwrap();
        assert_abs_diff_eq!(m.re, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(second.re, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn wave_validation() {
        assert!(WaveFunction::new(c(0.0), c(0.0), c(0.0)).is_err());
        assert!(WaveFunction::new(c(0.0), c(0.0), c(f64::NAN)).is_err());
        let a = WaveFunction { c0: c(0.0), c1: c(0.0), c2: c(-1.0) };
        let b = WaveFunction { c0: c(0.0), c1: c(0.0), c2: c(1.5) };
        assert!(matches!(inner_product(&a, &b), Err(Error::Divergence { .. })));
    }

    #[test]
    fn pullback_examples() {
        let p0 = TangentPoint::standard();
        let e = |i: usize| Vector4::from_fn(|k, _| if k == i { 1.0 } else { 0.0 });
        assert_abs_diff_eq!(pullback_inner(&p0, &e(0), &e(0)).re, 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(pullback_inner(&p0, &e(3), &e(3)).re, 0.75, epsilon = 1e-15);
        let mixed = pullback_inner(&p0, &e(1), &e(3));
        assert_abs_diff_eq!(mixed.re, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(mixed.im, 0.5, epsilon = 1e-15);
        for (i, j) in [(0, 0), (3, 3), (1, 3), (0, 2), (2, 1)] {
            assert!(pullback_residual(&p0, &e(i), &e(j)).norm() < 1e-14);
        }
    }

    #[test]
    fn q_apply_examples() {
        let w = probe_waves(1, 3)[0];
        let r = q_apply(&el("R"), &w);
        assert_eq!(r.coefficients(), [c(-0.25), c(0.0), c(0.0)]);
        assert_eq!(q_apply(&el("Q"), &w).coefficients(), [c(0.0), c(1.0), c(0.0)]);
        assert_eq!(q_apply(&el("F"), &w).coefficients(), [c(0.0), c(0.0), c(-1.0)]);
        let [_, c1, c2] = w.coefficients();
        let p = q_apply(&el("P"), &w).coefficients();
        assert_eq!(p, [-I * c1, -I * c2 * 2.0, c(0.0)]);
    }

    #[test]
    fn q_apply_matches_poly_wave() {
        for w in probe_waves(4, 11) {
            for b in Basis::ALL {
                let l = AlgebraElement::basis(b);
                let q = q_apply(&l, &w).coefficients();
                let pw = PolyWave::new(w).apply(&l);
                for (k, v) in q.iter().enumerate() {
                    let got = pw.poly.get(k).copied().unwrap_or_default();
                    assert!((got - v).norm() < 1e-14, "{b:?} {k}");
                }
            }
        }
    }

    #[test]
    fn derivative_against_finite_difference() {
        let w = PolyWave {
            poly: vec![c(0.3), Complex64::new(-1.0, 0.5), c(0.2)],
            wave: probe_waves(1, 9)[0],
        };
        let d = w.derivative();
        for x in [-1.5, 0.0, 0.7, 2.0] {
            let h = 1e-5;
            let fd = (w.eval(x + h) - w.eval(x - h)) / (2.0 * h);
            assert!((fd - d.eval(x)).norm() < 1e-8 * d.eval(x).norm().max(1.0));
        }
    }

    #[test]
    fn commutator_examples() {
        let grid = Grid1D::new(-8.0, 8.0, 100).unwrap();
        assert!(commutator_residual(&el("P"), &el("Q"), &grid) < 1e-12);
        assert!(commutator_residual(&el("F"), &el("P"), &grid) < 1e-12);
        for i in 0..6 {
            for j in (i + 1)..6 {
                let (a, b) = (AlgebraElement::basis(Basis::ALL[i]), AlgebraElement::basis(Basis::ALL[j]));
                let r = commutator_residual(&a, &b, &grid);
                assert!(r < 1e-9, "{:?} {:?}: {r}", Basis::ALL[i], Basis::ALL[j]);
            }
        }
        // a wrong sign in the bracket is detected
        let w = PolyWave::new(probe_waves(1, 0x5eed)[0]);
        let (p, q) = (el("P"), el("Q"));
        let lhs = w.apply(&q).apply(&p) - w.apply(&p).apply(&q);
        assert!((lhs + (I * 2.0) * w.apply(&p.bracket(&q))).max_coeff() > 0.1);
    }

    #[test]
    fn expectation_examples() {
        let p0 = TangentPoint::standard();
        assert_abs_diff_eq!(expectation(&el("F"), &p0).unwrap(), -1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(expectation(&el("G"), &p0).unwrap(), 0.25, epsilon = 1e-14);
        assert_abs_diff_eq!(expectation(&el("H"), &p0).unwrap(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn kappa_examples() {
        let p = tp([0.4, -0.7, 1.1, -0.3]);
        assert_eq!(kappa(&p, &el("R")), c(0.25));
        assert_eq!(kappa(&p, &el("F")), c(0.0));
        assert_eq!(kappa(&p, &el("Q")), c(0.0));
        assert!(kappa(&TangentPoint::standard(), &el("H")).norm() < 1e-15);
    }

    proptest! {
        #[test]
        fn psi_map_normalized(p in point_strategy()) {
            let w = psi_map(&p);
            let n = inner_product(&w, &w).unwrap();
            prop_assert!((n - c(1.0)).norm() < 1e-12);
            let theta = p.theta();
            for x in [-3.0, -0.5, 0.0, 1.2, 4.0] {
                let d = family::density(&theta, x);
                prop_assert!((w.eval(x).norm_sqr() - d).abs() < 1e-12 * d.max(1.0));
            }
        }

        #[test]
        fn inner_product_is_hermitian(s in any::<u64>()) {
            let [a, b] = <[WaveFunction; 2]>::try_from(probe_waves(2, s)).unwrap();
            prop_assert_eq!(inner_product(&a, &b).unwrap(), inner_product(&b, &a).unwrap().conj());
        }

        #[test]
        fn pullback_identity(
            p in point_strategy(),
            a in prop::array::uniform4(-1.0..1.0f64),
            b in prop::array::uniform4(-1.0..1.0f64),
        ) {
            let (a, b) = (Vector4::from(a), Vector4::from(b));
            let scale = pullback_inner(&p, &a, &a).norm().max(pullback_inner(&p, &b, &b).norm()).max(1.0);
            prop_assert!(pullback_residual(&p, &a, &b).norm() < 1e-9 * scale);
        }

        #[test]
        fn expectation_is_momentum(p in point_strategy()) {
            for b in Basis::ALL {
                let l = AlgebraElement::basis(b);
                let e = expectation(&l, &p).unwrap();
                let j = kahler_value(&l, &p);
                prop_assert!((e - j).abs() < 1e-10 * j.abs().max(1.0), "{b:?}: {e} vs {j}");
            }
        }

        #[test]
        fn kappa_from_flow_of_exponent(p in point_strategy(), coeffs in prop::array::uniform6(-1.0..1.0f64)) {
            // Along X = X_{J^L}, dΨ/dt = (ċ0 + ċ1 x + ċ2 x²)Ψ with ċ from the
            // pushforward. Matching against ½(Q(L) + κ)Ψ forces the x and x²
            // terms to agree and leaves κ = 2iċ0 − q0.
            let l = AlgebraElement::new(coeffs);
            let dc = pushforward(&p, &hamiltonian_field(&l, &p));
            let q = q_apply(&l, &psi_map(&p)).coefficients();
            let scale = q.iter().map(|v| v.norm()).fold(1.0, f64::max);
            prop_assert!((I * dc[1] * 2.0 - q[1]).norm() < 1e-12 * scale);
            prop_assert!((I * dc[2] * 2.0 - q[2]).norm() < 1e-12 * scale);
            let oracle = I * dc[0] * 2.0 - q[0];
            prop_assert!((kappa(&p, &l) - oracle).norm() < 1e-10 * scale);
        }
    }
}
