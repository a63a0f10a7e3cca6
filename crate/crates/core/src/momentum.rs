//! Momentum map of the Jacobi group action on the tangent bundle: the
//! Kähler functions `ψ(L)`, their Hamiltonian fields, Poisson brackets,
//! spectra and spectral measures.

use std::fmt;

use nalgebra::{Matrix4, Vector2, Vector4};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::dombrowski::{kahler_tensors, TangentChart, TangentPoint};
use crate::error::{Error, Result};
use crate::gaussian_family::{self as family, MeanPoint};
use crate::jacobi_group::{adjoint, borel_contains, poly_to_algebra, AlgebraElement, Basis, GroupElement};
use crate::numerics::{fd_gradient, normal_cdf, quadratic_sublevel, Interval, Polynomial2};
use crate::siegel_jacobi::{tangent_action, AspElement};

fn basis_values(p: &TangentPoint) -> [f64; 6] {
    let [e1, e2, d1, d2] = p.to_hybrid();
    [
        -e2,
        0.25 * d1 * d1 + e2 * d2 * d2 + e1 * d1 * d2 - 1.0 / (4.0 * (e1 * e1 - e2)),
        -e1 * d1 - 2.0 * e2 * d2,
        0.5 * d1 + e1 * d2,
        e1,
        -0.25,
    ]
}

/// `ψ(L)(p)`, linear in `L`.
pub fn kahler_value(l: &AlgebraElement, p: &TangentPoint) -> f64 {
    let values = basis_values(p);
    l.coeffs().iter().zip(values).map(|(c, v)| c * v).sum()
}

/// [`kahler_value`] on raw `(θ₁, θ₂, θ̇₁, θ̇₂)`, `NaN` off the domain.
pub fn kahler_value_raw(l: &AlgebraElement, c: &[f64]) -> f64 {
    TangentPoint::from_slice(c).map_or(f64::NAN, |p| kahler_value(l, &p))
}

/// `J(p)` evaluated on the basis `(F, G, H, P, Q, R)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentumVector {
    values: [f64; 6],
}

impl MomentumVector {
    pub fn values(&self) -> [f64; 6] {
        self.values
    }

    pub fn get(&self, b: Basis) -> f64 {
        self.values[b.index()]
    }

    /// `⟨J(p), L⟩`.
    pub fn pair(&self, l: &AlgebraElement) -> f64 {
        self.values.iter().zip(l.coeffs()).map(|(v, c)| v * c).sum()
    }

    pub fn max_abs_diff(&self, other: &MomentumVector) -> f64 {
        self.values
            .iter()
            .zip(other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

pub fn momentum_vector(p: &TangentPoint) -> MomentumVector {
    MomentumVector {
        values: basis_values(p),
    }
}

/// Closed-form Hamiltonian field of `ψ(L)` in the `(θ, θ̇)` frame,
/// with the convention `ω(X_f, ·) = df`.
pub fn hamiltonian_field(l: &AlgebraElement, p: &TangentPoint) -> Vector4<f64> {
    let [t1, t2, d1, d2] = p.as_array();
    let fields = [
        Vector4::new(0.0, 0.0, 0.0, 1.0),
        Vector4::new(-d1 * t2 - t1 * d2, -2.0 * t2 * d2, -d1 * d2 + t1 * t2, t2 * t2 - d2 * d2),
        Vector4::new(t1, 2.0 * t2, d1, 2.0 * d2),
        Vector4::new(-t2, 0.0, -d2, 0.0),
        Vector4::new(0.0, 0.0, -1.0, 0.0),
        Vector4::zeros(),
    ];
    l.coeffs()
        .iter()
        .zip(fields)
        .fold(Vector4::zeros(), |acc, (c, f)| acc + f * *c)
}

/// `X_f = (h⁻¹ ∂f/∂θ̇, −h⁻¹ ∂f/∂θ)` for an arbitrary function, gradient by
/// central differences.
pub fn hamiltonian_field_of<F>(f: F, p: &TangentPoint) -> Result<Vector4<f64>>
where
    F: Fn(&[f64]) -> f64,
{
    let grad = fd_gradient(f, &p.as_array(), 1e-6 * p.theta().theta2().abs().min(1.0))?;
    let h_inv = family::inverse_fisher_metric(&p.theta());
    let pos = h_inv * Vector2::new(grad[2], grad[3]);
    let vel = -(h_inv * Vector2::new(grad[0], grad[1]));
    Ok(Vector4::new(pos[0], pos[1], vel[0], vel[1]))
}

/// `d/dt|₀ exp(tL)·p`, five-point stencil in `t`.
pub fn fundamental_field(l: &AlgebraElement, p: &TangentPoint) -> Result<Vector4<f64>> {
    let h = 1e-3;
    let at = |t: f64| -> Result<Vector4<f64>> {
        let g = AspElement::from(&GroupElement::exp(l, t));
        Ok(tangent_action(&g, p)?.as_vector())
    };
    Ok((at(-2.0 * h)? - at(2.0 * h)? + (at(h)? - at(-h)?) * 8.0) / (12.0 * h))
}

fn omega_natural(p: &TangentPoint) -> Matrix4<f64> {
    kahler_tensors(p, TangentChart::Natural).omega
}

/// `{ψ(L₁), ψ(L₂)}(p) = ω(X₁, X₂)`.
pub fn poisson(l1: &AlgebraElement, l2: &AlgebraElement, p: &TangentPoint) -> f64 {
    let (x1, x2) = (hamiltonian_field(l1, p), hamiltonian_field(l2, p));
    (x1.transpose() * omega_natural(p) * x2)[0]
}

/// `|ψ(Ad(g⁻¹)L)(p) − ψ(L)(Φ_g p)|`.
pub fn equivariance_residual(g: &GroupElement, l: &AlgebraElement, p: &TangentPoint) -> Result<f64> {
    let moved = tangent_action(&AspElement::from(g), p)?;
    let lhs = kahler_value(&adjoint(&g.inverse(), l), p);
    Ok((lhs - kahler_value(l, &moved)).abs())
}

/// `f = J^{Ad(g)k}`, kept as the pair `(g, k)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObservableDecomposition {
    pub g: GroupElement,
    pub k: Polynomial2,
}

impl ObservableDecomposition {
    pub fn new(g: GroupElement, k: Polynomial2) -> Self {
        Self { g, k }
    }

    /// `f = J^k` with `g = e`.
    pub fn from_polynomial(k: Polynomial2) -> Self {
        Self {
            g: GroupElement::identity(),
            k,
        }
    }

    pub fn algebra_element(&self) -> AlgebraElement {
        adjoint(&self.g, &poly_to_algebra(&self.k))
    }

    pub fn value(&self, p: &TangentPoint) -> f64 {
        kahler_value(&self.algebra_element(), p)
    }
}

/// Image of a quadratic over the real line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Spectrum {
    Point { value: f64 },
    /// `(−∞, hi]`
    LowerRay { hi: f64 },
    /// `[lo, ∞)`
    UpperRay { lo: f64 },
    Line,
}

impl Spectrum {
    pub fn as_interval(&self) -> Interval {
        match *self {
            Spectrum::Point { value } => Interval::point(value),
            Spectrum::LowerRay { hi } => Interval { lo: f64::NEG_INFINITY, hi },
            Spectrum::UpperRay { lo } => Interval { lo, hi: f64::INFINITY },
            Spectrum::Line => Interval::real_line(),
        }
    }

    pub fn contains(&self, v: f64) -> bool {
        self.as_interval().contains(v)
    }
}

impl fmt::Display for Spectrum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.as_interval().fmt(f)
    }
}

/// `Spec(f) = k(ℝ)`, independent of `g`.
pub fn spectrum(obs: &ObservableDecomposition) -> Spectrum {
    let Polynomial2 { alpha, beta, gamma } = obs.k;
    if alpha != 0.0 {
        let vertex = gamma - beta * beta / (4.0 * alpha);
        if alpha > 0.0 {
            Spectrum::UpperRay { lo: vertex }
        } else {
            Spectrum::LowerRay { hi: vertex }
        }
    } else if beta != 0.0 {
        Spectrum::Line
    } else {
        Spectrum::Point { value: gamma }
    }
}

/// `π(Φ_g p)` for `g` in the Borel subgroup by the closed form
/// `μ' = (λ/2 + μ)/a`, `σ' = σ/|a|`; other elements go through the full
/// action on the tangent bundle.
pub fn transformed_gaussian(g: &GroupElement, p: &TangentPoint) -> Result<MeanPoint> {
    if !borel_contains(g) {
        return Ok(tangent_action(&AspElement::from(g), p)?.theta().to_mean());
    }
    let m = p.theta().to_mean();
    let a = g.matrix()[(0, 0)];
    let lambda = g.translation()[0];
    MeanPoint::new((lambda / 2.0 + m.mu()) / a, m.sigma() / a.abs())
}

/// Probability of `A` together with the part of `A` lying outside the spectrum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralMass {
    pub probability: f64,
    /// Pieces of the (merged) request disjoint from the spectrum; they carry no mass.
    pub outside_spectrum: Vec<Interval>,
}

/// Sort, validate and merge overlapping intervals.
pub fn normalize_intervals(set: &[Interval]) -> Result<Vec<Interval>> {
    for iv in set {
        if iv.lo.is_nan() || iv.hi.is_nan() || iv.lo > iv.hi {
            return Err(Error::InvalidParameter(format!("invalid interval [{}, {}]", iv.lo, iv.hi)));
        }
    }
    let mut sorted = set.to_vec();
    sorted.sort_by(|a, b| a.lo.total_cmp(&b.lo));
    let mut merged: Vec<Interval> = Vec::with_capacity(sorted.len());
    for iv in sorted {
        match merged.last_mut() {
            Some(last) if iv.lo <= last.hi => last.hi = last.hi.max(iv.hi),
            _ => merged.push(iv),
        }
    }
    Ok(merged)
}

// P(X ∈ S) for X ~ N(μ, σ²) and S a disjoint union of closed intervals
fn gaussian_mass(m: &MeanPoint, set: &[Interval]) -> f64 {
    set.iter()
        .map(|iv| {
            let cdf = |x: f64| {
                if x == f64::INFINITY {
                    1.0
                } else if x == f64::NEG_INFINITY {
                    0.0
                } else {
                    normal_cdf((x - m.mu()) / m.sigma())
                }
            };
            cdf(iv.hi) - cdf(iv.lo)
        })
        .sum()
}

// P(k(X) ≤ t)
fn mass_below(k: &Polynomial2, m: &MeanPoint, t: f64) -> f64 {
    if t == f64::INFINITY {
        return 1.0;
    }
    if t == f64::NEG_INFINITY {
        return 0.0;
    }
    gaussian_mass(m, &quadratic_sublevel(k, t))
}

// P(k(X) ≥ t)
fn mass_above(k: &Polynomial2, m: &MeanPoint, t: f64) -> f64 {
    let neg = Polynomial2::new(-k.alpha, -k.beta, -k.gamma);
    mass_below(&neg, m, -t)
}

/// `P_{f,p}(A)`: mass of `k⁻¹(A)` under the Gaussian `π(Φ_{g⁻¹} p)`.
pub fn spectral_measure(obs: &ObservableDecomposition, p: &TangentPoint, set: &[Interval]) -> Result<SpectralMass> {
    let set = normalize_intervals(set)?;
    let spec = spectrum(obs).as_interval();
    let outside = set
        .iter()
        .flat_map(|iv| {
            let mut pieces = Vec::new();
            if iv.lo < spec.lo {
                pieces.push(Interval { lo: iv.lo, hi: iv.hi.min(spec.lo) });
            }
            if iv.hi > spec.hi {
                pieces.push(Interval { lo: iv.lo.max(spec.hi), hi: iv.hi });
            }
            pieces
        })
        .filter(|piece| piece.lo < piece.hi || !spec.contains(piece.lo))
        .collect();
    let base = transformed_gaussian(&obs.g.inverse(), p)?;
    let k = &obs.k;
    let probability = if k.is_constant() {
        if set.iter().any(|iv| iv.contains(k.gamma)) {
            1.0
        } else {
            0.0
        }
    } else {
        // level sets of a non-constant quadratic are null; endpoints at or
        // past the spectrum are sent to infinity so no pre-image is solved
        // at the vertex, where the double root is ill-conditioned
        set.iter()
            .map(|iv| {
                let lo = if iv.lo <= spec.lo { f64::NEG_INFINITY } else { iv.lo };
                let hi = if iv.hi >= spec.hi { f64::INFINITY } else { iv.hi };
                (mass_below(k, &base, hi) + mass_above(k, &base, lo) - 1.0).max(0.0)
            })
            .sum::<f64>()
            .min(1.0)
    };
    Ok(SpectralMass {
        probability,
        outside_spectrum: outside,
    })
}

/// Monte-Carlo estimate of [`spectral_measure`] with its standard error.
pub fn monte_carlo_measure(
    obs: &ObservableDecomposition,
    p: &TangentPoint,
    set: &[Interval],
    samples: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    if samples < 2 {
        return Err(Error::InvalidParameter("need at least 2 samples".into()));
    }
    let set = normalize_intervals(set)?;
    let base = transformed_gaussian(&obs.g.inverse(), p)?;
    let normal = Normal::new(base.mu(), base.sigma())
        .map_err(|e| Error::InvalidParameter(format!("sampling distribution: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let hits = (0..samples)
        .filter(|_| {
            let v = obs.k.eval(normal.sample(&mut rng));
            set.iter().any(|iv| iv.contains(v))
        })
        .count();
    let n = samples as f64;
    let est = hits as f64 / n;
    Ok((est, (est * (1.0 - est) / n).sqrt()))
}
