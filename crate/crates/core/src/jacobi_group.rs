//! The Jacobi group `SL(2,ℝ) ⋉ Heis(ℝ)`, its Lie algebra over the basis
//! `F, G, H, P, Q, R`, the adjoint action and the polynomial model of the
//! abelian subalgebra spanned by `F, Q, R`.
//!
//! Heisenberg vectors are row vectors `X = (λ, μ)` acted on from the right,
//! `X ↦ XM`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use nalgebra::{Matrix2, RowVector2, SMatrix};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
pub use crate::numerics::Polynomial2;

/// Tolerance on `det M = 1` for freshly built elements, relative to `‖M‖²`.
pub const DET_TOL: f64 = 1e-12;
/// Products drifting further than this are rejected instead of renormalized.
pub const DET_DRIFT_TOL: f64 = 1e-9;
/// Absolute tolerance on the `G, H, P` coefficients for membership in `𝔞`.
pub const SUBALGEBRA_TOL: f64 = 1e-12;
/// Tolerance on the lower-left entry for membership in the Borel subgroup.
pub const BOREL_TOL: f64 = 1e-12;

/// Symplectic form on Heisenberg vectors, `λ₁μ₂ − λ₂μ₁`.
pub fn symplectic(x1: &RowVector2<f64>, x2: &RowVector2<f64>) -> f64 {
    x1[0] * x2[1] - x2[0] * x1[1]
}

fn det_scale(m: &Matrix2<f64>) -> f64 {
    m.norm_squared().max(1.0)
}

/// `(M, X, κ)` with `det M = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroupElement {
    m: Matrix2<f64>,
    x: RowVector2<f64>,
    kappa: f64,
}

impl GroupElement {
    pub fn new(m: Matrix2<f64>, x: RowVector2<f64>, kappa: f64) -> Result<Self> {
        if m.iter().chain(x.iter()).any(|v| !v.is_finite()) || !kappa.is_finite() {
            return Err(Error::InvalidElement("non-finite entries".into()));
        }
        let det = m.determinant();
        if (det - 1.0).abs() > DET_TOL * det_scale(&m) {
            return Err(Error::InvalidElement(format!("det M = {det}, expected 1")));
        }
        Ok(Self { m, x, kappa })
    }

    /// `M = [[a, b], [c, d]]`, `X = (λ, μ)`.
    #[allow(clippy::too_many_arguments)]
    pub fn from_entries(a: f64, b: f64, c: f64, d: f64, lambda: f64, mu: f64, kappa: f64) -> Result<Self> {
        Self::new(Matrix2::new(a, b, c, d), RowVector2::new(lambda, mu), kappa)
    }

    pub fn identity() -> Self {
        Self {
            m: Matrix2::identity(),
            x: RowVector2::zeros(),
            kappa: 0.0,
        }
    }

    pub fn heisenberg(lambda: f64, mu: f64, kappa: f64) -> Self {
        Self {
            m: Matrix2::identity(),
            x: RowVector2::new(lambda, mu),
            kappa,
        }
    }

    pub fn matrix(&self) -> Matrix2<f64> {
        self.m
    }

    pub fn translation(&self) -> RowVector2<f64> {
        self.x
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// `(M₁M₂, X₁M₂ + X₂, κ₁ + κ₂ + Ω(X₁M₂, X₂))`. Determinant drift up to
    /// [`DET_DRIFT_TOL`] is renormalized away, larger drift is an error.
    pub fn multiply(&self, other: &GroupElement) -> Result<GroupElement> {
        let mut m = self.m * other.m;
        let moved = self.x * other.m;
        let x = moved + other.x;
        let kappa = self.kappa + other.kappa + symplectic(&moved, &other.x);
        let det = m.determinant();
        let drift = (det - 1.0).abs();
        if drift > DET_DRIFT_TOL * det_scale(&m) || !(det > 0.0) {
            return Err(Error::InvalidElement(format!(
                "product has det M = {det}, drift beyond {DET_DRIFT_TOL}"
            )));
        }
        if drift > 0.0 {
            m /= det.sqrt();
        }
        Ok(GroupElement { m, x, kappa })
    }

    /// `(M⁻¹, −XM⁻¹, −κ)`.
    pub fn inverse(&self) -> GroupElement {
        let inv = sl2_inverse(&self.m);
        GroupElement {
            m: inv,
            x: -(self.x * inv),
            kappa: -self.kappa,
        }
    }

    /// One-parameter subgroup `exp(tL)`.
    pub fn exp(l: &AlgebraElement, t: f64) -> GroupElement {
        let a = l.sl2_part();
        let xi = l.heisenberg_part();
        // A² = δI for traceless A
        let delta = -a.determinant();
        let [s0, s1, s2, s3] = exp_series(delta, t);
        let m = Matrix2::identity() * s0 + a * s1;
        let x = xi * s1 + xi * a * s2;
        let kappa = t * l.central() + s3 * symplectic(&(xi * a), &xi);
        GroupElement { m, x, kappa }
    }

    pub fn max_abs_diff(&self, other: &GroupElement) -> f64 {
        (self.m - other.m)
            .abs()
            .max()
            .max((self.x - other.x).abs().max())
            .max((self.kappa - other.kappa).abs())
    }
}

/// Inverse of a unimodular 2×2 matrix (adjugate).
fn sl2_inverse(m: &Matrix2<f64>) -> Matrix2<f64> {
    Matrix2::new(m[(1, 1)], -m[(0, 1)], -m[(1, 0)], m[(0, 0)])
}

/// `Sₖ(δ, t) = Σₙ δⁿ t^{2n+k} / (2n+k)!` for `k = 0..4`. Then
/// `exp(tA) = S₀I + S₁A`, `∫₀ᵗexp(sA)ds = S₁I + S₂A` and `S₃` is the
/// iterated integral entering the central coordinate.
fn exp_series(delta: f64, t: f64) -> [f64; 4] {
    let q = delta * t * t;
    if q.abs() < 1.0 {
        let mut out = [0.0; 4];
        for (k, slot) in out.iter_mut().enumerate() {
            let mut term = t.powi(k as i32) / (1..=k).product::<usize>().max(1) as f64;
            let mut n = 0;
            while term != 0.0 && n < 40 {
                *slot += term;
                let m = (2 * n + k) as f64;
                term *= q / ((m + 1.0) * (m + 2.0));
                n += 1;
            }
        }
        return out;
    }
    let k = delta.abs().sqrt();
    let kt = k * t;
    if delta > 0.0 {
        let (ch, sh) = (kt.cosh(), kt.sinh());
        [ch, sh / k, (ch - 1.0) / delta, (sh / k - t) / delta]
    } else {
        let (c, s) = (kt.cos(), kt.sin());
        // δ < 0, so the hyperbolic relations flip sign
        [c, s / k, (1.0 - c) / -delta, (t - s / k) / -delta]
    }
}

/// Basis labels in storage order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Basis {
    F,
    G,
    H,
    P,
    Q,
    R,
}

impl Basis {
    pub const ALL: [Basis; 6] = [Basis::F, Basis::G, Basis::H, Basis::P, Basis::Q, Basis::R];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn symbol(self) -> char {
        ['F', 'G', 'H', 'P', 'Q', 'R'][self.index()]
    }

    fn from_symbol(c: char) -> Option<Basis> {
        Basis::ALL.into_iter().find(|b| b.symbol() == c)
    }
}

/// `c_F F + c_G G + c_H H + c_P P + c_Q Q + c_R R`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct AlgebraElement {
    coeffs: [f64; 6],
}

impl AlgebraElement {
    pub const fn new(coeffs: [f64; 6]) -> Self {
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn basis(b: Basis) -> Self {
        let mut coeffs = [0.0; 6];
        coeffs[b.index()] = 1.0;
        Self { coeffs }
    }

    /// From `(A, ξ, r)`; only the traceless part of `A` is kept.
    pub fn from_parts(a: Matrix2<f64>, xi: RowVector2<f64>, r: f64) -> Self {
        let h = 0.5 * (a[(0, 0)] - a[(1, 1)]);
        Self {
            coeffs: [a[(0, 1)], a[(1, 0)], h, xi[0], xi[1], r],
        }
    }

    pub fn coeffs(&self) -> [f64; 6] {
        self.coeffs
    }

    pub fn coeff(&self, b: Basis) -> f64 {
        self.coeffs[b.index()]
    }

    /// `F ↦ [[0,1],[0,0]]`, `G ↦ [[0,0],[1,0]]`, `H ↦ diag(1,−1)`.
    pub fn sl2_part(&self) -> Matrix2<f64> {
        let [f, g, h, ..] = self.coeffs;
        Matrix2::new(h, f, g, -h)
    }

    /// `ξ = (c_P, c_Q)`.
    pub fn heisenberg_part(&self) -> RowVector2<f64> {
        RowVector2::new(self.coeffs[3], self.coeffs[4])
    }

    pub fn central(&self) -> f64 {
        self.coeffs[5]
    }

    /// `([A, B], ξB − ηA, 2Ω(ξ, η))`.
    pub fn bracket(&self, other: &AlgebraElement) -> AlgebraElement {
        let (a, b) = (self.sl2_part(), other.sl2_part());
        let (xi, eta) = (self.heisenberg_part(), other.heisenberg_part());
        AlgebraElement::from_parts(a * b - b * a, xi * b - eta * a, 2.0 * symplectic(&xi, &eta))
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.abs()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &AlgebraElement) -> f64 {
        (*self - *other).max_abs()
    }
}

impl Add for AlgebraElement {
    type Output = AlgebraElement;
    fn add(self, rhs: AlgebraElement) -> AlgebraElement {
        AlgebraElement::new(std::array::from_fn(|i| self.coeffs[i] + rhs.coeffs[i]))
    }
}

impl Sub for AlgebraElement {
    type Output = AlgebraElement;
    fn sub(self, rhs: AlgebraElement) -> AlgebraElement {
        AlgebraElement::new(std::array::from_fn(|i| self.coeffs[i] - rhs.coeffs[i]))
    }
}

impl Neg for AlgebraElement {
    type Output = AlgebraElement;
    fn neg(self) -> AlgebraElement {
        AlgebraElement::new(self.coeffs.map(|c| -c))
    }
}

impl Mul<AlgebraElement> for f64 {
    type Output = AlgebraElement;
    fn mul(self, rhs: AlgebraElement) -> AlgebraElement {
        AlgebraElement::new(rhs.coeffs.map(|c| self * c))
    }
}

impl fmt::Display for AlgebraElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for b in Basis::ALL {
            let c = self.coeff(b);
            if c == 0.0 {
                continue;
            }
            let sign = if c < 0.0 { "-" } else if first { "" } else { "+" };
            let mag = c.abs();
            if mag == 1.0 {
                write!(f, "{sign}{}", b.symbol())?;
            } else {
                write!(f, "{sign}{mag}*{}", b.symbol())?;
            }
            first = false;
        }
        if first {
            f.write_str("0")?;
        }
        Ok(())
    }
}

/// Grammar: a sum of signed terms `[±][number[*]]B` with `B ∈ {F,G,H,P,Q,R}`,
/// whitespace ignored; e.g. `G-F`, `2*P + 0.5Q`, `-R`, `0`.
impl FromStr for AlgebraElement {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let chars: Vec<(usize, char)> = s.char_indices().filter(|(_, c)| !c.is_whitespace()).collect();
        let err = |position: usize, message: &str| Error::Parse {
            position,
            message: message.to_string(),
        };
        if chars.is_empty() {
            return Err(err(0, "empty algebra element"));
        }
        if chars.len() == 1 && chars[0].1 == '0' {
            return Ok(AlgebraElement::zero());
        }
        let mut coeffs = [0.0; 6];
        let mut i = 0;
        let mut first = true;
        while i < chars.len() {
            let mut sign = 1.0;
            match chars[i].1 {
                '+' => i += 1,
                '-' => {
                    sign = -1.0;
                    i += 1;
                }
                _ if !first => return Err(err(chars[i].0, "expected `+` or `-` between terms")),
                _ => {}
            }
            first = false;
            let start = i;
            while i < chars.len() {
                let c = chars[i].1;
                let exp_sign = (c == '+' || c == '-')
                    && i > start
                    && matches!(chars[i - 1].1, 'e' | 'E');
                if c.is_ascii_digit() || c == '.' || c == 'e' || c == 'E' || exp_sign {
                    i += 1;
                } else {
                    break;
                }
            }
            let magnitude = if i > start {
                let text: String = chars[start..i].iter().map(|(_, c)| c).collect();
                text.parse::<f64>()
                    .map_err(|_| err(chars[start].0, &format!("bad coefficient `{text}`")))?
            } else {
                1.0
            };
            if i < chars.len() && chars[i].1 == '*' {
                i += 1;
            }
            let Some(&(pos, sym)) = chars.get(i) else {
                return Err(err(s.len(), "expected a basis symbol F, G, H, P, Q or R"));
            };
            let basis = Basis::from_symbol(sym)
                .ok_or_else(|| err(pos, &format!("unknown basis symbol `{sym}`")))?;
            coeffs[basis.index()] += sign * magnitude;
            i += 1;
        }
        Ok(AlgebraElement::new(coeffs))
    }
}

/// `Ad(M, X, κ)(A, ξ, r) = (MAM⁻¹, XAM⁻¹ + ξM⁻¹, r − 2Ω(ξ, X) − Ω(XA, X))`.
pub fn adjoint(g: &GroupElement, l: &AlgebraElement) -> AlgebraElement {
    let inv = sl2_inverse(&g.m);
    let a = l.sl2_part();
    let xi = l.heisenberg_part();
    let x = g.x;
    let xa = x * a;
    AlgebraElement::from_parts(
        g.m * a * inv,
        xa * inv + xi * inv,
        l.central() - 2.0 * symplectic(&xi, &x) - symplectic(&xa, &x),
    )
}

/// Columns `Ad(g)F, Ad(g)Q, Ad(g)R` in the basis `(F, G, H, P, Q, R)`.
pub fn ad_on_a(g: &GroupElement) -> SMatrix<f64, 6, 3> {
    let (a, c) = (g.m[(0, 0)], g.m[(1, 0)]);
    let lambda = g.x[0];
    SMatrix::<f64, 6, 3>::from_columns(&[
        [a * a, -c * c, -a * c, -c * lambda, a * lambda, lambda * lambda].into(),
        [0.0, 0.0, 0.0, -c, a, 2.0 * lambda].into(),
        [0.0, 0.0, 0.0, 0.0, 0.0, 1.0].into(),
    ])
}

/// Upper-triangular `M`.
pub fn borel_contains(g: &GroupElement) -> bool {
    g.m[(1, 0)].abs() <= BOREL_TOL
}

/// Right action of the Borel subgroup on the line, `x · b = ax − λ/2`.
pub fn borel_act(g: &GroupElement, x: f64) -> Result<f64> {
    if !borel_contains(g) {
        return Err(Error::Domain {
            chart: "borel",
            reason: format!("lower-left entry {} is not zero", g.m[(1, 0)]),
        });
    }
    Ok(g.m[(0, 0)] * x - g.x[0] / 2.0)
}

/// `−αF + βQ − 4γR ↦ αx² + βx + γ`; anything with `G, H, P` parts is rejected.
pub fn poly_from_algebra(l: &AlgebraElement) -> Result<Polynomial2> {
    let [f, g, h, p, q, r] = l.coeffs;
    if [g, h, p].iter().any(|v| v.abs() > SUBALGEBRA_TOL) {
        return Err(Error::NotInSubalgebra { residual: [g, h, p] });
    }
    Ok(Polynomial2::new(-f, q, -r / 4.0))
}

pub fn poly_to_algebra(k: &Polynomial2) -> AlgebraElement {
    AlgebraElement::new([-k.alpha, 0.0, 0.0, 0.0, k.beta, -4.0 * k.gamma])
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn el(s: &str) -> AlgebraElement {
        s.parse().unwrap()
    }

    // random SL(2) matrix built from a product of elementary factors
    fn group_strategy() -> impl Strategy<Value = GroupElement> {
        (
            0.3..3.0f64,
            -2.0..2.0f64,
            -2.0..2.0f64,
            -2.0..2.0f64,
            -2.0..2.0f64,
            -2.0..2.0f64,
        )
            .prop_map(|(a, b, c, l, m, k)| {
                let upper = Matrix2::new(a, b, 0.0, 1.0 / a);
                let lower = Matrix2::new(1.0, 0.0, c, 1.0);
                GroupElement::new(upper * lower, RowVector2::new(l, m), k).unwrap()
            })
    }

    fn borel_strategy() -> impl Strategy<Value = GroupElement> {
        (0.2..3.0f64, prop::bool::ANY, -2.0..2.0f64, -2.0..2.0f64, -2.0..2.0f64).prop_map(
            |(a, neg, b, l, m)| {
                let a = if neg { -a } else { a };
                GroupElement::from_entries(a, b, 0.0, 1.0 / a, l, m, 0.0).unwrap()
            },
        )
    }

    fn algebra_strategy() -> impl Strategy<Value = AlgebraElement> {
        prop::array::uniform6(-2.0..2.0f64).prop_map(AlgebraElement::new)
    }

    #[test]
    fn commutation_table() {
        let b = |s| AlgebraElement::basis(s);
        use Basis::*;
        let cases = [
            (F, G, el("H")),
            (F, H, el("-2F")),
            (G, H, el("2G")),
            (F, P, el("-Q")),
            (F, Q, el("0")),
            (G, P, el("0")),
            (G, Q, el("-P")),
            (H, P, el("-P")),
            (H, Q, el("Q")),
            (P, Q, el("2R")),
        ];
        for (x, y, expected) in cases {
            assert_eq!(b(x).bracket(&b(y)), expected, "[{x:?},{y:?}]");
            assert_eq!(b(y).bracket(&b(x)), -expected);
        }
        for x in Basis::ALL {
            assert_eq!(b(R).bracket(&b(x)).max_abs(), 0.0);
        }
    }

    #[test]
    fn jacobi_identity_on_basis_triples() {
        let b = |s| AlgebraElement::basis(s);
        for i in 0..6 {
            for j in (i + 1)..6 {
                for k in (j + 1)..6 {
                    let (x, y, z) = (b(Basis::ALL[i]), b(Basis::ALL[j]), b(Basis::ALL[k]));
                    let s = x.bracket(&y.bracket(&z))
                        + y.bracket(&z.bracket(&x))
                        + z.bracket(&x.bracket(&y));
                    assert!(s.max_abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn heisenberg_product_and_inverse() {
        let g1 = GroupElement::heisenberg(1.0, 2.0, 0.0);
        let g2 = GroupElement::heisenberg(-0.5, 3.0, 0.0);
        let p = g1.multiply(&g2).unwrap();
        assert_eq!(p.translation(), RowVector2::new(0.5, 5.0));
        assert_eq!(p.kappa(), 1.0 * 3.0 - (-0.5) * 2.0);
        assert_eq!(GroupElement::heisenberg(1.0, 0.0, 0.0).inverse(), GroupElement::heisenberg(-1.0, 0.0, 0.0));
        let e = GroupElement::identity();
        assert_eq!(e.inverse(), e);
        assert_eq!(p.multiply(&e).unwrap(), p);
    }

    #[test]
    fn row_vector_convention() {
        // (λ, μ) · [[a, b], [c, d]] = (λa + μc, λb + μd)
        let m = GroupElement::from_entries(2.0, 3.0, 1.0, 2.0, 0.0, 0.0, 0.0).unwrap();
        let x = GroupElement::heisenberg(1.0, 10.0, 0.0);
        let p = x.multiply(&m).unwrap();
        assert_eq!(p.translation(), RowVector2::new(12.0, 23.0));
    }

    #[test]
    fn rejects_bad_determinant() {
        assert!(GroupElement::from_entries(2.0, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0).is_err());
        assert!(GroupElement::from_entries(1.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn adjoint_examples() {
        let g = GroupElement::from_entries(1.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0).unwrap();
        assert_eq!(adjoint(&g, &el("F")), el("F-G-H"));
        let col = ad_on_a(&GroupElement::from_entries(1.0, 0.0, 0.0, 1.0, 2.0, 0.0, 0.0).unwrap());
        assert_eq!(col.column(0).iter().copied().collect::<Vec<_>>(), vec![1.0, 0.0, 0.0, 0.0, 2.0, 4.0]);
        let e = ad_on_a(&GroupElement::identity());
        assert_eq!(e.column(0).iter().copied().collect::<Vec<_>>(), vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(e.column(1).iter().copied().collect::<Vec<_>>(), vec![0.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        assert_eq!(e.column(2).iter().copied().collect::<Vec<_>>(), vec![0.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn borel_examples() {
        let b = GroupElement::from_entries(2.0, 0.0, 0.0, 0.5, 1.0, 0.0, 0.0).unwrap();
        assert_eq!(borel_act(&b, 0.0).unwrap(), -0.5);
        assert_eq!(borel_act(&b, 1.0).unwrap(), 1.5);
        assert_eq!(borel_act(&GroupElement::identity(), 0.7).unwrap(), 0.7);
        let not_borel = GroupElement::from_entries(1.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0).unwrap();
        assert!(!borel_contains(&not_borel));
        assert!(borel_act(&not_borel, 0.0).is_err());
    }

    #[test]
    fn polynomial_model() {
        assert_eq!(poly_from_algebra(&el("F")).unwrap(), Polynomial2::new(-1.0, 0.0, 0.0));
        assert_eq!(poly_from_algebra(&el("Q")).unwrap(), Polynomial2::new(0.0, 1.0, 0.0));
        assert_eq!(poly_from_algebra(&el("R")).unwrap(), Polynomial2::new(0.0, 0.0, -0.25));
        assert_eq!(poly_to_algebra(&Polynomial2::new(0.0, 0.0, 1.0)), el("-4R"));
        let err = poly_from_algebra(&el("F+1e-6*P")).unwrap_err();
        assert!(matches!(err, Error::NotInSubalgebra { residual } if residual[2] == 1e-6));
    }

    #[test]
    fn parse_and_display() {
        assert_eq!(el("G-F").coeffs(), [-1.0, 1.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(el(" 2*P + 0.5Q ").coeffs(), [0.0, 0.0, 0.0, 2.0, 0.5, 0.0]);
        assert_eq!(el("-R").coeffs(), [0.0, 0.0, 0.0, 0.0, 0.0, -1.0]);
        assert_eq!(el("1e-1*H").coeff(Basis::H), 0.1);
        assert_eq!(el("2.5e+1F").coeff(Basis::F), 25.0);
        for s in ["-F+G", "2*P+0.5*Q", "-R", "0", "F-G-H"] {
            assert_eq!(el(s).to_string(), s);
        }
        for (s, pos) in [("", 0), ("X", 0), ("F G", 2), ("2*", 2), ("F+1..2G", 2)] {
            match s.parse::<AlgebraElement>() {
                Err(Error::Parse { position, .. }) => assert_eq!(position, pos, "{s}"),
                other => panic!("{s}: {other:?}"),
            }
        }
    }

    #[test]
    fn exponential_regimes() {
        // nilpotent: exp(tF) = [[1, t], [0, 1]]
        let g = GroupElement::exp(&el("F"), 2.0);
        assert_eq!(g.matrix(), Matrix2::new(1.0, 2.0, 0.0, 1.0));
        // hyperbolic: exp(tH) = diag(eᵗ, e⁻ᵗ)
        let g = GroupElement::exp(&el("H"), 1.5);
        assert_abs_diff_eq!(g.matrix(), Matrix2::new(1.5f64.exp(), 0.0, 0.0, (-1.5f64).exp()), epsilon = 1e-13);
        // elliptic: exp(t(F − G)) is a rotation
        let g = GroupElement::exp(&el("F-G"), 0.7);
        let (c, s) = (0.7f64.cos(), 0.7f64.sin());
        assert_abs_diff_eq!(g.matrix(), Matrix2::new(c, s, -s, c), epsilon = 1e-14);
        let g = GroupElement::exp(&el("2P-R"), 0.5);
        assert_eq!(g, GroupElement::heisenberg(1.0, 0.0, -0.5));
    }

    // midpoint-refined product of short steps, an oracle for exp
    fn exp_by_products(l: &AlgebraElement, t: f64, n: usize) -> GroupElement {
        let h = t / n as f64;
        let a = l.sl2_part() * h;
        // second-order step: M ≈ I + A + A²/2, det renormalized by multiply
        let m = Matrix2::identity() + a + a * a * 0.5;
        let m = m / m.determinant().sqrt();
        let xi = l.heisenberg_part() * h;
        let x = xi + xi * a * 0.5;
        let step = GroupElement { m, x, kappa: l.central() * h + symplectic(&(xi * a), &xi) / 6.0 };
        let mut g = GroupElement::identity();
        for _ in 0..n {
            g = g.multiply(&step).unwrap();
        }
        g
    }

    #[test]
    fn exponential_against_product_oracle() {
        for s in ["F+0.3*G+0.2*H+P-0.5*Q+0.1*R", "G-2*F+0.7*P+Q", "H+P+Q", "0.9*F+0.1*G-P+2*Q"] {
            let l = el(s);
            let exact = GroupElement::exp(&l, 0.8);
            let approx = exp_by_products(&l, 0.8, 4000);
            assert!(exact.max_abs_diff(&approx) < 1e-6, "{s}: {}", exact.max_abs_diff(&approx));
        }
    }

    proptest! {
        #[test]
        fn associativity(a in group_strategy(), b in group_strategy(), c in group_strategy()) {
            let left = a.multiply(&b).unwrap().multiply(&c).unwrap();
            let right = a.multiply(&b.multiply(&c).unwrap()).unwrap();
            let scale = left.matrix().abs().max().max(left.translation().abs().max()).max(1.0);
            prop_assert!(left.max_abs_diff(&right) < 1e-12 * scale * scale);
        }

        #[test]
        fn inverse_cancels(g in group_strategy()) {
            let e = g.multiply(&g.inverse()).unwrap();
            let scale = g.matrix().abs().max().max(1.0);
            prop_assert!(e.max_abs_diff(&GroupElement::identity()) < 1e-12 * scale * scale);
        }

        #[test]
        fn adjoint_is_homomorphism(a in group_strategy(), b in group_strategy(), l in algebra_strategy()) {
            let ab = a.multiply(&b).unwrap();
            let lhs = adjoint(&ab, &l);
            let rhs = adjoint(&a, &adjoint(&b, &l));
            prop_assert!(lhs.max_abs_diff(&rhs) < 1e-10 * lhs.max_abs().max(1.0));
            prop_assert_eq!(adjoint(&GroupElement::identity(), &l), l);
            prop_assert_eq!(adjoint(&a, &el("R")), el("R"));
        }

        #[test]
        fn ad_on_a_matches_adjoint(g in group_strategy()) {
            let cols = ad_on_a(&g);
            for (j, b) in ["F", "Q", "R"].iter().enumerate() {
                let ad = adjoint(&g, &el(b)).coeffs();
                for i in 0..6 {
                    prop_assert!((cols[(i, j)] - ad[i]).abs() <= 1e-12 * cols.abs().max().max(1.0));
                }
            }
        }

        #[test]
        fn adjoint_differentiates_to_bracket(l1 in algebra_strategy(), l2 in algebra_strategy()) {
            let h = 1e-5;
            let plus = adjoint(&GroupElement::exp(&l1, h), &l2);
            let minus = adjoint(&GroupElement::exp(&l1, -h), &l2);
            let deriv = 1.0 / (2.0 * h) * (plus - minus);
            prop_assert!(deriv.max_abs_diff(&l1.bracket(&l2)) < 1e-5);
        }

        #[test]
        fn exp_is_one_parameter_subgroup(l in algebra_strategy(), s in -1.0..1.0f64, t in -1.0..1.0f64) {
            let lhs = GroupElement::exp(&l, s).multiply(&GroupElement::exp(&l, t)).unwrap();
            let rhs = GroupElement::exp(&l, s + t);
            prop_assert!(lhs.max_abs_diff(&rhs) < 1e-10 * rhs.matrix().abs().max().max(1.0).powi(2));
        }

        #[test]
        fn borel_right_action(b1 in borel_strategy(), b2 in borel_strategy(), x in -3.0..3.0f64) {
            let lhs = borel_act(&b1.multiply(&b2).unwrap(), x).unwrap();
            let rhs = borel_act(&b2, borel_act(&b1, x).unwrap()).unwrap();
            prop_assert!((lhs - rhs).abs() < 1e-12 * lhs.abs().max(1.0));
        }

        #[test]
        fn borel_adjoint_is_substitution(
            b in borel_strategy(),
            coeffs in prop::array::uniform3(-2.0..2.0f64),
            x in -2.0..2.0f64,
        ) {
            let k = Polynomial2::new(coeffs[0], coeffs[1], coeffs[2]);
            let moved = poly_from_algebra(&adjoint(&b, &poly_to_algebra(&k))).unwrap();
            let expected = k.eval(borel_act(&b, x).unwrap());
            prop_assert!((moved.eval(x) - expected).abs() < 1e-10 * expected.abs().max(1.0));
        }

        #[test]
        fn non_borel_moves_out_of_subalgebra(
            g in group_strategy().prop_filter("lower-left entry", |g| g.matrix()[(1, 0)].abs() > 1e-3),
            coeffs in prop::array::uniform3(-2.0..2.0f64)
                .prop_filter("non-constant", |c| c[0].abs() > 1e-2 || c[1].abs() > 1e-2),
        ) {
            let k = Polynomial2::new(coeffs[0], coeffs[1], coeffs[2]);
            let moved = adjoint(&g, &poly_to_algebra(&k));
            prop_assert!(poly_from_algebra(&moved).is_err());
            let constant = poly_to_algebra(&Polynomial2::new(0.0, 0.0, coeffs[2]));
            prop_assert!(poly_from_algebra(&adjoint(&g, &constant)).is_ok());
        }

        #[test]
        fn poly_round_trip(coeffs in prop::array::uniform3(-5.0..5.0f64)) {
            let k = Polynomial2::new(coeffs[0], coeffs[1], coeffs[2]);
            prop_assert_eq!(poly_from_algebra(&poly_to_algebra(&k)).unwrap(), k);
        }
    }
}
