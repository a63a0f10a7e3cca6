//! The product `ℍ × ℂ` with the Kähler-Berndt metrics, its identification
//! with the Gaussian tangent bundle, and the affine symplectic action.
//!
//! Real coordinates are always ordered `(u, v, x, y)` with `τ = u + iv`,
//! `z = x + iy`.

use nalgebra::{Matrix2, Matrix4, RowVector2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dombrowski::TangentPoint;
use crate::error::{Error, Result};
use crate::jacobi_group::GroupElement;
use crate::numerics::{fd_gradient, fd_hessian, HESSIAN_STEP};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// `(τ, z)` with `Im τ > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SJPoint {
    tau: Complex64,
    z: Complex64,
}

impl SJPoint {
    pub fn new(tau: Complex64, z: Complex64) -> Result<Self> {
        let finite = tau.re.is_finite() && tau.im.is_finite() && z.re.is_finite() && z.im.is_finite();
        if !finite || !(tau.im > 0.0) {
            return Err(Error::Domain {
                chart: "siegel-jacobi",
                reason: format!("need Im tau > 0, got tau = {tau}, z = {z}"),
            });
        }
        Ok(Self { tau, z })
    }

    /// `(i, 0)`.
    pub fn base() -> Self {
        Self {
            tau: I,
            z: Complex64::new(0.0, 0.0),
        }
    }

    pub fn tau(&self) -> Complex64 {
        self.tau
    }

    pub fn z(&self) -> Complex64 {
        self.z
    }

    /// `[u, v, x, y]`.
    pub fn as_real(&self) -> [f64; 4] {
        [self.tau.re, self.tau.im, self.z.re, self.z.im]
    }

    pub fn from_real(c: [f64; 4]) -> Result<Self> {
        Self::new(Complex64::new(c[0], c[1]), Complex64::new(c[2], c[3]))
    }

    pub fn max_abs_diff(&self, other: &SJPoint) -> f64 {
        self.as_real()
            .iter()
            .zip(other.as_real())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Weights of the Kähler-Berndt family `g_{A,B}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KBParams {
    a: f64,
    b: f64,
}

impl KBParams {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0 && b > 0.0) || !a.is_finite() || !b.is_finite() {
            return Err(Error::InvalidParameter(format!("need A, B > 0, got ({a}, {b})")));
        }
        Ok(Self { a, b })
    }

    pub const UNIT: KBParams = KBParams { a: 1.0, b: 1.0 };

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }
}

/// `g_{A,B}` in `(u, v, x, y)` coordinates.
pub fn kb_metric(pt: &SJPoint, params: KBParams) -> Matrix4<f64> {
    let [_, v, _, y] = pt.as_real();
    let (a, b) = (params.a, params.b);
    let d = (a * v + b * y * y) / (v * v * v);
    let off = -b * y / (v * v);
    let e = b / v;
    Matrix4::new(
        d, 0.0, off, 0.0, //
        0.0, d, 0.0, off, //
        off, 0.0, e, 0.0, //
        0.0, off, 0.0, e,
    )
}

/// The metric of the tangent bundle model, `½ g_{1,1}`.
pub fn g_kb(pt: &SJPoint) -> Matrix4<f64> {
    kb_metric(pt, KBParams::UNIT) * 0.5
}

/// Multiplication by `i` on `(δτ, δz)` in real coordinates.
pub fn complex_structure() -> Matrix4<f64> {
    Matrix4::new(
        0.0, -1.0, 0.0, 0.0, //
        1.0, 0.0, 0.0, 0.0, //
        0.0, 0.0, 0.0, -1.0, //
        0.0, 0.0, 1.0, 0.0,
    )
}

/// `ω_KB = g_KB(i·, ·)` as a matrix.
pub fn kb_kahler_form(pt: &SJPoint) -> Matrix4<f64> {
    complex_structure().transpose() * g_kb(pt)
}

/// `(τ, z) = (θ̇₂ − iθ₂, −θ̇₁ + iθ₁)`, i.e. `(−iz₂, iz₁)`.
pub fn chart_map(p: &TangentPoint) -> SJPoint {
    let [t1, t2, d1, d2] = p.as_array();
    SJPoint {
        tau: Complex64::new(d2, -t2),
        z: Complex64::new(-d1, t1),
    }
}

pub fn chart_map_inverse(pt: &SJPoint) -> Result<TangentPoint> {
    let [u, v, x, y] = pt.as_real();
    TangentPoint::from_array([y, -v, -x, u])
}

/// Constant Jacobian `∂(u, v, x, y)/∂(θ₁, θ₂, θ̇₁, θ̇₂)` of [`chart_map`].
pub fn chart_jacobian() -> Matrix4<f64> {
    Matrix4::new(
        0.0, 0.0, 0.0, 1.0, //
        0.0, -1.0, 0.0, 0.0, //
        0.0, 0.0, -1.0, 0.0, //
        1.0, 0.0, 0.0, 0.0,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    /// `det M = 1`, holomorphic.
    Preserving,
    /// `det M = −1`, acts after complex conjugation.
    Reversing,
}

impl Orientation {
    pub fn sign(self) -> f64 {
        match self {
            Orientation::Preserving => 1.0,
            Orientation::Reversing => -1.0,
        }
    }

    fn compose(self, other: Orientation) -> Orientation {
        if self == other {
            Orientation::Preserving
        } else {
            Orientation::Reversing
        }
    }
}

/// `(M, X)` in `SL±(2,ℝ) ⋉ ℝ²`; the branch is carried by an explicit flag.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AspElement {
    m: Matrix2<f64>,
    x: RowVector2<f64>,
    orientation: Orientation,
}

impl AspElement {
    pub fn new(m: Matrix2<f64>, x: RowVector2<f64>, orientation: Orientation) -> Result<Self> {
        if m.iter().chain(x.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidElement("non-finite entries".into()));
        }
        let det = m.determinant();
        let scale = m.norm_squared().max(1.0);
        if (det - orientation.sign()).abs() > 1e-12 * scale {
            return Err(Error::InvalidElement(format!(
                "det M = {det} does not match orientation {orientation:?}"
            )));
        }
        Ok(Self { m, x, orientation })
    }

    pub fn identity() -> Self {
        Self {
            m: Matrix2::identity(),
            x: RowVector2::zeros(),
            orientation: Orientation::Preserving,
        }
    }

    pub fn matrix(&self) -> Matrix2<f64> {
        self.m
    }

    pub fn translation(&self) -> RowVector2<f64> {
        self.x
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    /// `(M₁M₂, X₁M₂ + X₂)`.
    pub fn compose(&self, other: &AspElement) -> AspElement {
        AspElement {
            m: self.m * other.m,
            x: self.x * other.m + other.x,
            orientation: self.orientation.compose(other.orientation),
        }
    }

    /// The rotation fixing `(i, 0)`, `[[cos φ, sin φ], [−sin φ, cos φ]]`.
    pub fn rotation(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self {
            m: Matrix2::new(c, s, -s, c),
            x: RowVector2::zeros(),
            orientation: Orientation::Preserving,
        }
    }

    /// Element of the upper-triangular subgroup times translations taking
    /// `(i, 0)` to `target`.
    pub fn transitivity_witness(target: &SJPoint) -> Self {
        let [u, v, x, y] = target.as_real();
        let r = v.sqrt();
        Self {
            m: Matrix2::new(r, u / r, 0.0, 1.0 / r),
            x: RowVector2::new(y / r, x / r),
            orientation: Orientation::Preserving,
        }
    }
}

impl From<&GroupElement> for AspElement {
    fn from(g: &GroupElement) -> Self {
        Self {
            m: g.matrix(),
            x: g.translation(),
            orientation: Orientation::Preserving,
        }
    }
}

/// `(τ, z) ↦ ((aτ + b)/(cτ + d), (z + λτ + μ)/(cτ + d))`, after conjugating
/// `τ` and `z` on the orientation-reversing branch.
pub fn group_action(elem: &AspElement, pt: &SJPoint) -> Result<SJPoint> {
    let (mut tau, mut z) = (pt.tau, pt.z);
    if elem.orientation == Orientation::Reversing {
        tau = tau.conj();
        z = z.conj();
    }
    let [a, c, b, d] = [elem.m[(0, 0)], elem.m[(1, 0)], elem.m[(0, 1)], elem.m[(1, 1)]];
    let (lambda, mu) = (elem.x[0], elem.x[1]);
    let denom = tau * c + d;
    SJPoint::new((tau * a + b) / denom, (z + tau * lambda + mu) / denom)
}

/// The action transported to the tangent bundle through [`chart_map`].
pub fn tangent_action(elem: &AspElement, p: &TangentPoint) -> Result<TangentPoint> {
    chart_map_inverse(&group_action(elem, &chart_map(p))?)
}

/// The two families of holomorphic isometries written in `(z₁, z₂)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum HolomorphicIsometry {
    /// `(−ia(z₁ + ic)/(z₂ + ib) + id, a²/(z₂ + ib) + ie)`
    Inverting { a: f64, b: f64, c: f64, d: f64, e: f64 },
    /// `(az₁ + bz₂ + ic, a²z₂ + id)`
    Affine { a: f64, b: f64, c: f64, d: f64 },
}

/// Builds an isometry of the given form (1 inverting, 2 affine) from its
/// real parameters.
pub fn holomorphic_isometry(form: u8, params: &[f64]) -> Result<HolomorphicIsometry> {
    let iso = match (form, params) {
        (1, &[a, b, c, d, e]) => HolomorphicIsometry::Inverting { a, b, c, d, e },
        (2, &[a, b, c, d]) => HolomorphicIsometry::Affine { a, b, c, d },
        (1 | 2, _) => {
            return Err(Error::InvalidParameter(format!(
                "form {form} takes {} parameters, got {}",
                if form == 1 { 5 } else { 4 },
                params.len()
            )))
        }
        _ => return Err(Error::InvalidParameter(format!("unknown isometry form {form}"))),
    };
    if iso.scale() == 0.0 || !iso.scale().is_finite() {
        return Err(Error::InvalidParameter("isometry needs a ≠ 0".into()));
    }
    Ok(iso)
}

impl HolomorphicIsometry {
    fn scale(&self) -> f64 {
        match *self {
            HolomorphicIsometry::Inverting { a, .. } | HolomorphicIsometry::Affine { a, .. } => a,
        }
    }

    pub fn apply(&self, z1: Complex64, z2: Complex64) -> (Complex64, Complex64) {
        match *self {
            HolomorphicIsometry::Inverting { a, b, c, d, e } => {
                let w = z2 + I * b;
                (-I * a * (z1 + I * c) / w + I * d, a * a / w + I * e)
            }
            HolomorphicIsometry::Affine { a, b, c, d } => {
                (z1 * a + z2 * b + I * c, z2 * (a * a) + I * d)
            }
        }
    }

    /// The same map read in `(τ, z)`, i.e. `f ∘ φ ∘ f⁻¹`.
    pub fn apply_sj(&self, pt: &SJPoint) -> Result<SJPoint> {
        let (z1, z2) = (-I * pt.z, I * pt.tau);
        let (w1, w2) = self.apply(z1, z2);
        SJPoint::new(-I * w2, I * w1)
    }

    /// The affine symplectic element acting on `ℍ × ℂ` as [`Self::apply_sj`].
    pub fn conjugated_element(&self) -> AspElement {
        let (m, x) = match *self {
            HolomorphicIsometry::Inverting { a, b, c, d, e } => (
                Matrix2::new(e, e * b - a * a, 1.0, b) * (-1.0 / a),
                RowVector2::new(d / a, -c + b * d / a),
            ),
            HolomorphicIsometry::Affine { a, b, c, d } => (
                Matrix2::new(a * a, d, 0.0, 1.0) * (1.0 / a),
                RowVector2::new(-b / a, -c / a),
            ),
        };
        AspElement {
            m,
            x,
            orientation: Orientation::Preserving,
        }
    }
}

/// `‖φ*g_KB − g_KB‖∞` at `pt`. The Jacobian uses the fourth-order
/// five-point stencil, with the step scaled to the distance from `Im τ = 0`.
pub fn isometry_residual<F>(mapping: F, pt: &SJPoint) -> Result<f64>
where
    F: Fn(&SJPoint) -> Result<SJPoint>,
{
    let step = 1e-3 * pt.tau.im.min(1.0);
    let c = pt.as_real();
    let image = mapping(pt)?;
    let at = |k: usize, offset: f64| -> Result<[f64; 4]> {
        let mut q = c;
        q[k] += offset;
        Ok(mapping(&SJPoint::from_real(q)?)?.as_real())
    };
    let mut jac = Matrix4::zeros();
    for k in 0..4 {
        let (p2, p1) = (at(k, 2.0 * step)?, at(k, step)?);
        let (m1, m2) = (at(k, -step)?, at(k, -2.0 * step)?);
        for r in 0..4 {
            jac[(r, k)] = (-p2[r] + 8.0 * p1[r] - 8.0 * m1[r] + m2[r]) / (12.0 * step);
        }
    }
    let pulled = jac.transpose() * g_kb(&image) * jac;
    Ok((pulled - g_kb(pt)).abs().max())
}

/// Residuals of `u_x² + u_y² = (u/x)²` and `Δu = 0` at `(x, y)`, `x < 0`.
pub fn eikonal_residual<F>(u: F, x: f64, y: f64) -> Result<(f64, f64)>
where
    F: Fn(f64, f64) -> f64,
{
    if !(x < 0.0) {
        return Err(Error::Domain {
            chart: "left half-plane",
            reason: format!("need x < 0, got {x}"),
        });
    }
    let field = |p: &[f64]| u(p[0], p[1]);
    let grad = fd_gradient(field, &[x, y], 1e-5)?;
    let hess = fd_hessian(field, &[x, y], HESSIAN_STEP)?;
    let ratio = u(x, y) / x;
    let first = grad[0] * grad[0] + grad[1] * grad[1] - ratio * ratio;
    Ok((first, hess[(0, 0)] + hess[(1, 1)]))
}
