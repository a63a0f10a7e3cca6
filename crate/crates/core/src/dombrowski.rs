//! Kähler structure `(g, J, ω)` on the tangent bundle of the Gaussian
//! family, built from the Fisher metric and the flat exponential connection.

use nalgebra::{Matrix2, Matrix4, Vector4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian_family::{self as family, NaturalPoint};
use crate::numerics::{fd_gradient, fd_hessian, HESSIAN_STEP};

/// A point `(θ, θ̇)` of the tangent bundle; `θ̇` in the `∂/∂θᵢ` frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TangentPoint {
    theta: NaturalPoint,
    thetadot: [f64; 2],
}

impl TangentPoint {
    pub fn new(theta: NaturalPoint, thetadot: [f64; 2]) -> Result<Self> {
        if thetadot.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain {
                chart: "tangent",
                reason: format!("non-finite velocity {thetadot:?}"),
            });
        }
        Ok(Self { theta, thetadot })
    }

    /// `(θ₁, θ₂, θ̇₁, θ̇₂)`.
    pub fn from_array(c: [f64; 4]) -> Result<Self> {
        Self::new(NaturalPoint::new(c[0], c[1])?, [c[2], c[3]])
    }

    pub fn from_slice(c: &[f64]) -> Result<Self> {
        let arr: [f64; 4] = c.try_into().map_err(|_| {
            Error::InvalidParameter(format!("tangent point needs 4 coordinates, got {}", c.len()))
        })?;
        Self::from_array(arr)
    }

    /// The zero vector over the standard normal.
    pub fn standard() -> Self {
        Self {
            theta: NaturalPoint::standard(),
            thetadot: [0.0, 0.0],
        }
    }

    pub fn theta(&self) -> NaturalPoint {
        self.theta
    }

    pub fn thetadot(&self) -> [f64; 2] {
        self.thetadot
    }

    pub fn as_array(&self) -> [f64; 4] {
        [
            self.theta.theta1(),
            self.theta.theta2(),
            self.thetadot[0],
            self.thetadot[1],
        ]
    }

    pub fn as_vector(&self) -> Vector4<f64> {
        Vector4::from(self.as_array())
    }

    /// `(η₁, η₂, θ̇₁, θ̇₂)`.
    pub fn to_hybrid(&self) -> [f64; 4] {
        let eta = self.theta.to_expectation();
        [eta.eta1(), eta.eta2(), self.thetadot[0], self.thetadot[1]]
    }

    pub fn from_hybrid(c: [f64; 4]) -> Result<Self> {
        let theta = family::ExpectationPoint::new(c[0], c[1])?.to_natural()?;
        Self::new(theta, [c[2], c[3]])
    }

    /// `zₖ = θₖ + iθ̇ₖ`.
    pub fn to_complex(&self) -> (Complex64, Complex64) {
        (
            Complex64::new(self.theta.theta1(), self.thetadot[0]),
            Complex64::new(self.theta.theta2(), self.thetadot[1]),
        )
    }

    pub fn from_complex(z1: Complex64, z2: Complex64) -> Result<Self> {
        Self::from_array([z1.re, z2.re, z1.im, z2.im])
    }
}

/// Coordinate system on the tangent bundle: `(θ, θ̇)` or `(η, θ̇)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TangentChart {
    Natural,
    Hybrid,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KahlerTensors {
    pub g: Matrix4<f64>,
    pub j: Matrix4<f64>,
    pub omega: Matrix4<f64>,
    pub chart: TangentChart,
}

impl KahlerTensors {
    /// Largest entry among `ω − Jᵀg`, `JᵀgJ − g` and `J² + I`.
    pub fn compatibility_residual(&self) -> f64 {
        let jt = self.j.transpose();
        let a = (self.omega - jt * self.g).abs().max();
        let b = (jt * self.g * self.j - self.g).abs().max();
        let c = (self.j * self.j + Matrix4::identity()).abs().max();
        a.max(b).max(c)
    }
}

fn blocks(a: Matrix2<f64>, b: Matrix2<f64>, c: Matrix2<f64>, d: Matrix2<f64>) -> Matrix4<f64> {
    let mut m = Matrix4::zeros();
    m.fixed_view_mut::<2, 2>(0, 0).copy_from(&a);
    m.fixed_view_mut::<2, 2>(0, 2).copy_from(&b);
    m.fixed_view_mut::<2, 2>(2, 0).copy_from(&c);
    m.fixed_view_mut::<2, 2>(2, 2).copy_from(&d);
    m
}

/// Closed-form `(g, J, ω)` at `p`, in the coordinate basis of `chart`.
pub fn kahler_tensors(p: &TangentPoint, chart: TangentChart) -> KahlerTensors {
    let h = family::fisher_metric(&p.theta);
    let zero = Matrix2::zeros();
    let id = Matrix2::identity();
    match chart {
        TangentChart::Natural => KahlerTensors {
            g: blocks(h, zero, zero, h),
            j: blocks(zero, -id, id, zero),
            omega: blocks(zero, h, -h, zero),
            chart,
        },
        TangentChart::Hybrid => {
            let h_inv = family::inverse_fisher_metric(&p.theta);
            KahlerTensors {
                g: blocks(h_inv, zero, zero, h),
                j: blocks(zero, -h, h_inv, zero),
                omega: blocks(zero, id, -id, zero),
                chart,
            }
        }
    }
}

/// `∂² ln det h` in θ. With `det h = −1/(4θ₂³)` only the `θ₂θ₂` entry survives.
pub fn hessian_log_det(theta: &NaturalPoint) -> Matrix2<f64> {
    let t2 = theta.theta2();
    Matrix2::new(0.0, 0.0, 0.0, 3.0 / (t2 * t2))
}

/// The diagonal block `β = −½ ∂² ln det h` of the Ricci tensor.
pub fn ricci_block(theta: &NaturalPoint) -> Matrix2<f64> {
    hessian_log_det(theta) * -0.5
}

/// Ricci tensor in the natural chart, `diag(β, β)`.
pub fn ricci(p: &TangentPoint) -> Matrix4<f64> {
    let beta = ricci_block(&p.theta);
    blocks(beta, Matrix2::zeros(), Matrix2::zeros(), beta)
}

/// `−tr(h⁻¹ ∂² ln det h)`.
pub fn scalar_curvature(p: &TangentPoint) -> f64 {
    let h_inv = family::inverse_fisher_metric(&p.theta);
    -(h_inv * hessian_log_det(&p.theta)).trace()
}

/// Left-minus-right sides of the two second-order equations characterizing
/// functions whose Hamiltonian field is Killing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KahlerResidual {
    /// `f_{θᵢθⱼ} − f_{θ̇ᵢθ̇ⱼ} − 2Γᵇᵢⱼ f_{θ_b}`
    pub position: Matrix2<f64>,
    /// `f_{θᵢθ̇ⱼ} + f_{θⱼθ̇ᵢ} − 2Γᵇᵢⱼ f_{θ̇_b}`
    pub velocity: Matrix2<f64>,
}

impl KahlerResidual {
    pub fn max_abs(&self) -> f64 {
        self.position.abs().max().max(self.velocity.abs().max())
    }
}

/// Residual of the Kähler-function PDE. The difference step shrinks with
/// `|θ₂|` and two step sizes are Richardson-combined to cancel the `h²` term.
pub fn kahler_residual<F>(f: F, p: &TangentPoint) -> Result<KahlerResidual>
where
    F: Fn(&[f64]) -> f64,
{
    let step = 10.0 * HESSIAN_STEP * p.theta.theta2().abs().min(1.0);
    let coarse = kahler_residual_with_step(&f, p, step)?;
    let fine = kahler_residual_with_step(&f, p, step / 2.0)?;
    Ok(KahlerResidual {
        position: (fine.position * 4.0 - coarse.position) / 3.0,
        velocity: (fine.velocity * 4.0 - coarse.velocity) / 3.0,
    })
}

/// [`kahler_residual`] with an explicit difference step.
pub fn kahler_residual_with_step<F>(f: F, p: &TangentPoint, step: f64) -> Result<KahlerResidual>
where
    F: Fn(&[f64]) -> f64,
{
    let x = p.as_array();
    let hess = fd_hessian(&f, &x, step)?;
    let grad = fd_gradient(&f, &x, step * 0.1)?;
    let gamma = family::christoffels(&p.theta);
    let position = Matrix2::from_fn(|i, j| {
        let conn: f64 = (0..2).map(|b| gamma[(b, i, j)] * grad[b]).sum();
        hess[(i, j)] - hess[(i + 2, j + 2)] - 2.0 * conn
    });
    let velocity = Matrix2::from_fn(|i, j| {
        let conn: f64 = (0..2).map(|b| gamma[(b, i, j)] * grad[b + 2]).sum();
        hess[(i, j + 2)] + hess[(j, i + 2)] - 2.0 * conn
    });
    Ok(KahlerResidual { position, velocity })
}

/// Cyclic sum `∂ᵢω_{jk} + ∂ⱼω_{ki} + ∂ₖω_{ij}` maximized over index triples,
/// with ω differentiated in the coordinates of `chart`.
pub fn closedness_residual(p: &TangentPoint, chart: TangentChart, step: f64) -> Result<f64> {
    let coords = match chart {
        TangentChart::Natural => p.as_array(),
        TangentChart::Hybrid => p.to_hybrid(),
    };
    let omega_at = |c: [f64; 4]| -> Result<Matrix4<f64>> {
        let q = match chart {
            TangentChart::Natural => TangentPoint::from_array(c)?,
            TangentChart::Hybrid => TangentPoint::from_hybrid(c)?,
        };
        Ok(kahler_tensors(&q, chart).omega)
    };
    let d_omega = (0..4)
        .map(|a| {
            let mut up = coords;
            let mut dn = coords;
            up[a] += step;
            dn[a] -= step;
            Ok((omega_at(up)? - omega_at(dn)?) / (2.0 * step))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut worst = 0.0_f64;
    for i in 0..4 {
        for j in 0..4 {
            for k in 0..4 {
                let v = d_omega[i][(j, k)] + d_omega[j][(k, i)] + d_omega[k][(i, j)];
                worst = worst.max(v.abs());
            }
        }
    }
    Ok(worst)
}
