//! The Gaussian family as a two-parameter exponential family with
//! sufficient statistics `(x, x²)`. Natural parameters are the working chart.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::Matrix2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::levi_civita::{self, Tensor3};

/// Smallest admissible `|θ₂|`; closer to the boundary curvature blows up.
pub const THETA2_GUARD: f64 = 1e-12;

/// `(μ, σ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanPoint {
    mu: f64,
    sigma: f64,
}

impl MeanPoint {
    pub fn new(mu: f64, sigma: f64) -> Result<Self> {
        if !(sigma > 0.0) || !sigma.is_finite() || !mu.is_finite() {
            return Err(Error::Domain {
                chart: "mean",
                reason: format!("need finite mu and sigma > 0, got ({mu}, {sigma})"),
            });
        }
        Ok(Self { mu, sigma })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn to_natural(&self) -> Result<NaturalPoint> {
        let var = self.sigma * self.sigma;
        NaturalPoint::new(self.mu / var, -0.5 / var)
    }

    pub fn to_expectation(&self) -> Result<ExpectationPoint> {
        ExpectationPoint::new(self.mu, self.mu * self.mu + self.sigma * self.sigma)
    }
}

/// `(θ₁, θ₂) = (μ/σ², −1/(2σ²))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NaturalPoint {
    theta1: f64,
    theta2: f64,
}

impl NaturalPoint {
    pub fn new(theta1: f64, theta2: f64) -> Result<Self> {
        if !theta1.is_finite() || !theta2.is_finite() || theta2 >= -THETA2_GUARD {
            return Err(Error::Domain {
                chart: "natural",
                reason: format!("need theta2 < -{THETA2_GUARD}, got ({theta1}, {theta2})"),
            });
        }
        Ok(Self { theta1, theta2 })
    }

    /// The standard normal, `θ = (0, −½)`.
    pub fn standard() -> Self {
        Self {
            theta1: 0.0,
            theta2: -0.5,
        }
    }

    pub fn theta1(&self) -> f64 {
        self.theta1
    }

    pub fn theta2(&self) -> f64 {
        self.theta2
    }

    pub fn as_array(&self) -> [f64; 2] {
        [self.theta1, self.theta2]
    }

    pub fn from_slice(v: &[f64]) -> Result<Self> {
        match v {
            [a, b] => Self::new(*a, *b),
            _ => Err(Error::InvalidParameter(format!(
                "natural point needs 2 coordinates, got {}",
                v.len()
            ))),
        }
    }

    pub fn to_mean(&self) -> MeanPoint {
        let var = -0.5 / self.theta2;
        MeanPoint {
            mu: self.theta1 * var,
            sigma: var.sqrt(),
        }
    }

    pub fn to_expectation(&self) -> ExpectationPoint {
        let (t1, t2) = (self.theta1, self.theta2);
        ExpectationPoint {
            eta1: -t1 / (2.0 * t2),
            eta2: (t1 * t1 - 2.0 * t2) / (4.0 * t2 * t2),
        }
    }
}

/// `(η₁, η₂) = (E[x], E[x²])`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpectationPoint {
    eta1: f64,
    eta2: f64,
}

impl ExpectationPoint {
    pub fn new(eta1: f64, eta2: f64) -> Result<Self> {
        if !eta1.is_finite() || !eta2.is_finite() || !(eta2 - eta1 * eta1 > 0.0) {
            return Err(Error::Domain {
                chart: "expectation",
                reason: format!("need eta2 > eta1^2, got ({eta1}, {eta2})"),
            });
        }
        Ok(Self { eta1, eta2 })
    }

    pub fn eta1(&self) -> f64 {
        self.eta1
    }

    pub fn eta2(&self) -> f64 {
        self.eta2
    }

    pub fn variance(&self) -> f64 {
        self.eta2 - self.eta1 * self.eta1
    }

    pub fn to_natural(&self) -> Result<NaturalPoint> {
        let var = self.variance();
        NaturalPoint::new(self.eta1 / var, -0.5 / var)
    }

    pub fn to_mean(&self) -> Result<MeanPoint> {
        MeanPoint::new(self.eta1, self.variance().sqrt())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Chart {
    Mean,
    Natural,
    Expectation,
}

impl FromStr for Chart {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mean" => Ok(Chart::Mean),
            "natural" => Ok(Chart::Natural),
            "expectation" => Ok(Chart::Expectation),
            other => Err(Error::InvalidParameter(format!("unknown chart `{other}`"))),
        }
    }
}

impl fmt::Display for Chart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Chart::Mean => "mean",
            Chart::Natural => "natural",
            Chart::Expectation => "expectation",
        })
    }
}

/// A Gaussian in any of the three charts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum FamilyPoint {
    Mean(MeanPoint),
    Natural(NaturalPoint),
    Expectation(ExpectationPoint),
}

impl FamilyPoint {
    pub fn chart(&self) -> Chart {
        match self {
            FamilyPoint::Mean(_) => Chart::Mean,
            FamilyPoint::Natural(_) => Chart::Natural,
            FamilyPoint::Expectation(_) => Chart::Expectation,
        }
    }

    pub fn to_natural(&self) -> Result<NaturalPoint> {
        match self {
            FamilyPoint::Mean(p) => p.to_natural(),
            FamilyPoint::Natural(p) => Ok(*p),
            FamilyPoint::Expectation(p) => p.to_natural(),
        }
    }
}

impl From<MeanPoint> for FamilyPoint {
    fn from(p: MeanPoint) -> Self {
        FamilyPoint::Mean(p)
    }
}

impl From<NaturalPoint> for FamilyPoint {
    fn from(p: NaturalPoint) -> Self {
        FamilyPoint::Natural(p)
    }
}

impl From<ExpectationPoint> for FamilyPoint {
    fn from(p: ExpectationPoint) -> Self {
        FamilyPoint::Expectation(p)
    }
}

/// Re-express a point in another chart.
pub fn convert(p: FamilyPoint, target: Chart) -> Result<FamilyPoint> {
    let theta = p.to_natural()?;
    Ok(match target {
        Chart::Natural => FamilyPoint::Natural(theta),
        Chart::Mean => match p {
            FamilyPoint::Mean(m) => FamilyPoint::Mean(m),
            FamilyPoint::Expectation(e) => FamilyPoint::Mean(e.to_mean()?),
            FamilyPoint::Natural(_) => FamilyPoint::Mean(theta.to_mean()),
        },
        Chart::Expectation => match p {
            FamilyPoint::Expectation(e) => FamilyPoint::Expectation(e),
            FamilyPoint::Mean(m) => FamilyPoint::Expectation(m.to_expectation()?),
            FamilyPoint::Natural(_) => FamilyPoint::Expectation(theta.to_expectation()),
        },
    })
}

/// A two-parameter exponential family `p(x; θ) = exp(C(x) + F(x)·θ − ψ(θ))`.
pub trait ExponentialFamily {
    fn statistics(&self, x: f64) -> [f64; 2];

    fn carrier(&self, _x: f64) -> f64 {
        0.0
    }

    fn potential(&self, theta: &NaturalPoint) -> f64;

    fn log_density(&self, theta: &NaturalPoint, x: f64) -> f64 {
        let [f1, f2] = self.statistics(x);
        self.carrier(x) + f1 * theta.theta1() + f2 * theta.theta2() - self.potential(theta)
    }

    fn density(&self, theta: &NaturalPoint, x: f64) -> f64 {
        self.log_density(theta, x).exp()
    }
}

/// The normal family with statistics `(x, x²)`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Gaussian;

impl ExponentialFamily for Gaussian {
    fn statistics(&self, x: f64) -> [f64; 2] {
        [x, x * x]
    }

    fn potential(&self, theta: &NaturalPoint) -> f64 {
        potential(theta)
    }
}

/// `ψ(θ) = −θ₁²/(4θ₂) + ½ ln(−π/θ₂)`.
pub fn potential(theta: &NaturalPoint) -> f64 {
    let (t1, t2) = (theta.theta1, theta.theta2);
    -t1 * t1 / (4.0 * t2) + 0.5 * (-PI / t2).ln()
}

/// Unchecked potential on raw coordinates, `NaN` outside the domain.
/// Convenient inside finite-difference stencils.
pub fn potential_raw(theta: &[f64]) -> f64 {
    match NaturalPoint::from_slice(theta) {
        Ok(p) => potential(&p),
        Err(_) => f64::NAN,
    }
}

pub fn density(theta: &NaturalPoint, x: f64) -> f64 {
    Gaussian.density(theta, x)
}

/// The Fisher metric, i.e. the Hessian of ψ.
pub fn fisher_metric(theta: &NaturalPoint) -> Matrix2<f64> {
    let (t1, t2) = (theta.theta1, theta.theta2);
    let s = 1.0 / (2.0 * t2 * t2);
    Matrix2::new(-t2, t1, t1, (t2 - t1 * t1) / t2) * s
}

/// Inverse of [`fisher_metric`], polynomial in θ.
pub fn inverse_fisher_metric(theta: &NaturalPoint) -> Matrix2<f64> {
    let (t1, t2) = (theta.theta1, theta.theta2);
    Matrix2::new(
        2.0 * t1 * t1 - 2.0 * t2,
        2.0 * t1 * t2,
        2.0 * t1 * t2,
        2.0 * t2 * t2,
    )
}

/// Levi-Civita symbols of the Fisher metric, stored `(k, i, j)` for Γᵏᵢⱼ.
pub fn christoffels(theta: &NaturalPoint) -> Tensor3 {
    let (t1, t2) = (theta.theta1, theta.theta2);
    let r = t1 / t2;
    let mut g = Tensor3::zeros(2);
    g[(0, 0, 0)] = r / 2.0;
    g[(0, 0, 1)] = -(t1 * t1 + t2) / (2.0 * t2 * t2);
    g[(0, 1, 0)] = g[(0, 0, 1)];
    g[(0, 1, 1)] = 0.5 * r * r * r;
    g[(1, 0, 0)] = 0.5;
    g[(1, 0, 1)] = -r / 2.0;
    g[(1, 1, 0)] = g[(1, 0, 1)];
    g[(1, 1, 1)] = (t1 * t1 - 2.0 * t2) / (2.0 * t2 * t2);
    g
}

/// `∂ᵢ∂ⱼ∂ₖψ`, totally symmetric.
pub fn potential_third_derivatives(theta: &NaturalPoint) -> Tensor3 {
    let (t1, t2) = (theta.theta1, theta.theta2);
    let t2_2 = t2 * t2;
    // indexed by how many of the three slots are θ₂
    let by_count = [
        0.0,
        1.0 / (2.0 * t2_2),
        -t1 / (t2_2 * t2),
        (3.0 * t1 * t1 - 2.0 * t2) / (2.0 * t2_2 * t2_2),
    ];
    Tensor3::from_fn(2, |i, j, k| by_count[i + j + k])
}

/// α-connection with lowered last index, `((1−α)/2) ∂ᵢ∂ⱼ∂ₖψ`.
/// `α = 1` is the flat exponential connection, `α = −1` the mixture one.
pub fn alpha_christoffels(theta: &NaturalPoint, alpha: f64) -> Tensor3 {
    potential_third_derivatives(theta).scale((1.0 - alpha) / 2.0)
}

/// `∫ xᵏ p(x; θ) dx` for `k ∈ 1..=4`.
pub fn moment(theta: &NaturalPoint, k: u32) -> Result<f64> {
    let eta = theta.to_expectation();
    let (e1, e2) = (eta.eta1, eta.eta2);
    let h = fisher_metric(theta);
    match k {
        1 => Ok(e1),
        2 => Ok(e2),
        3 => Ok(h[(0, 1)] + e1 * e2),
        4 => Ok(h[(1, 1)] + e2 * e2),
        _ => Err(Error::Unsupported(format!("moment of order {k}, only 1..=4"))),
    }
}

/// Sectional curvature of the Fisher metric at θ, assembled from the closed
/// form Christoffels and central differences of them.
pub fn base_sectional_curvature(theta: &NaturalPoint) -> Result<f64> {
    let step = 1e-4 * theta.theta2.abs();
    let riem = levi_civita::riemann(
        |y| NaturalPoint::from_slice(y).map(|p| christoffels(&p)),
        &theta.as_array(),
        step,
    )?;
    let h = fisher_metric(theta);
    let h = nalgebra::DMatrix::from_column_slice(2, 2, h.as_slice());
    Ok(levi_civita::surface_curvature(&riem, &h))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{fd_gradient, fd_hessian, HESSIAN_STEP};
    use approx::assert_abs_diff_eq;
    use nalgebra::DMatrix;
    use proptest::prelude::*;

    fn nat(t1: f64, t2: f64) -> NaturalPoint {
        NaturalPoint::new(t1, t2).unwrap()
    }

    fn dyn_fisher(y: &[f64]) -> Result<DMatrix<f64>> {
        let h = fisher_metric(&NaturalPoint::from_slice(y)?);
        Ok(DMatrix::from_column_slice(2, 2, h.as_slice()))
    }

    fn theta_strategy() -> impl Strategy<Value = NaturalPoint> {
        (-3.0..3.0f64, -3.0..-0.05f64).prop_map(|(a, b)| nat(a, b))
    }

    // away from the boundary, where the Fisher metric stays well conditioned
    fn moderate_theta() -> impl Strategy<Value = NaturalPoint> {
        (-2.0..2.0f64, -2.0..-0.2f64).prop_map(|(a, b)| nat(a, b))
    }

    #[test]
    fn chart_examples() {
        let m = MeanPoint::new(0.0, 1.0).unwrap();
        assert_eq!(m.to_natural().unwrap(), nat(0.0, -0.5));
        let e = nat(0.0, -0.5).to_expectation();
        assert_eq!((e.eta1(), e.eta2()), (0.0, 1.0));
        let e = MeanPoint::new(1.0, 2.0).unwrap().to_expectation().unwrap();
        assert_eq!((e.eta1(), e.eta2()), (1.0, 5.0));
        let e2 = convert(nat(0.25, -0.125).into(), Chart::Expectation).unwrap();
        assert_eq!(e2, FamilyPoint::Expectation(e));
    }

    #[test]
    fn domain_errors() {
        assert!(MeanPoint::new(0.0, 0.0).is_err());
        assert!(NaturalPoint::new(0.0, 0.0).is_err());
        assert!(NaturalPoint::new(0.0, -1e-13).is_err());
        assert!(ExpectationPoint::new(1.0, 1.0).is_err());
        assert!("polar".parse::<Chart>().is_err());
    }

    #[test]
    fn potential_examples() {
        assert_abs_diff_eq!(potential(&nat(0.0, -0.5)), 0.5 * (2.0 * PI).ln(), epsilon = 1e-15);
        assert_abs_diff_eq!(potential(&nat(0.0, -PI)), 0.0, epsilon = 1e-15);
        let grad = fd_gradient(potential_raw, &[0.0, -0.5], 1e-5).unwrap();
        assert_abs_diff_eq!(grad[0], 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(grad[1], 1.0, epsilon = 1e-9);
    }

    #[test]
    fn density_examples() {
        let p0 = NaturalPoint::standard();
        assert_abs_diff_eq!(density(&p0, 0.0), 0.398_942_280_401_432_7, epsilon = 1e-15);
        // e^{-1/2}/√(2π)
        assert_abs_diff_eq!(density(&p0, 1.0), 0.241_970_724_519_143_37, epsilon = 1e-15);
    }

    // composite Simpson on μ ± 14σ
    fn quad(theta: &NaturalPoint, f: impl Fn(f64) -> f64) -> f64 {
        let m = theta.to_mean();
        let (lo, hi) = (m.mu() - 14.0 * m.sigma(), m.mu() + 14.0 * m.sigma());
        let n = 4000;
        let h = (hi - lo) / n as f64;
        let mut s = f(lo) * density(theta, lo) + f(hi) * density(theta, hi);
        for i in 1..n {
            let x = lo + h * i as f64;
            s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(x) * density(theta, x);
        }
        s * h / 3.0
    }

    #[test]
    fn fisher_examples() {
        let h = fisher_metric(&nat(0.0, -0.5));
        assert_eq!(h, Matrix2::new(1.0, 0.0, 0.0, 2.0));
        let h = fisher_metric(&nat(1.0, -0.5));
        assert_eq!(h, Matrix2::new(1.0, 2.0, 2.0, 6.0));
        // Hessian oracle
        let fd = fd_hessian(potential_raw, &[1.0, -0.5], HESSIAN_STEP).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert_abs_diff_eq!(fd[(i, j)], h[(i, j)], epsilon = 1e-6);
            }
        }
        let p = nat(0.7, -1.3);
        assert_abs_diff_eq!(
            fisher_metric(&p) * inverse_fisher_metric(&p),
            Matrix2::identity(),
            epsilon = 1e-13
        );
    }

    #[test]
    fn christoffel_examples() {
        let g = christoffels(&nat(0.0, -0.5));
        for k in 0..2 {
            for i in 0..2 {
                for j in 0..2 {
                    let expected = match (k, i, j) {
                        (0, 0, 1) | (0, 1, 0) => 1.0,
                        (1, 0, 0) => 0.5,
                        (1, 1, 1) => 2.0,
                        _ => 0.0,
                    };
                    assert_abs_diff_eq!(g[(k, i, j)], expected, epsilon = 1e-15);
                }
            }
        }
        let fd = levi_civita::christoffels_from_metric(dyn_fisher, &[0.0, -0.5], 1e-5).unwrap();
        assert!(fd.max_abs_diff(&g) < 1e-5);
    }

    #[test]
    fn christoffels_from_one_metric_derivative() {
        // Hessian metrics satisfy Γᵇᵢⱼ = ½ h^{ab} ∂ₐh_{ij}
        for (t1, t2) in [(0.3, -0.8), (-2.0, -0.2), (1.5, -2.5)] {
            let p = nat(t1, t2);
            let h_inv = inverse_fisher_metric(&p);
            let step = 1e-6;
            let dh: Vec<Matrix2<f64>> = (0..2)
                .map(|a| {
                    let mut up = p.as_array();
                    let mut dn = p.as_array();
                    up[a] += step;
                    dn[a] -= step;
                    (fisher_metric(&NaturalPoint::from_slice(&up).unwrap())
                        - fisher_metric(&NaturalPoint::from_slice(&dn).unwrap()))
                        / (2.0 * step)
                })
                .collect();
            let g = christoffels(&p);
            for b in 0..2 {
                for i in 0..2 {
                    for j in 0..2 {
                        let v: f64 = (0..2).map(|a| 0.5 * h_inv[(a, b)] * dh[a][(i, j)]).sum();
                        let scale = g[(b, i, j)].abs().max(1.0);
                        assert!((v - g[(b, i, j)]).abs() < 1e-6 * scale, "{v} vs {}", g[(b, i, j)]);
                    }
                }
            }
        }
    }

    #[test]
    fn alpha_connection() {
        let p = nat(0.0, -0.5);
        assert_eq!(alpha_christoffels(&nat(2.0, -0.3), 1.0).max_abs(), 0.0);
        let mixture = alpha_christoffels(&p, -1.0);
        // third derivatives by central differences of the Hessian oracle
        let step = 1e-3;
        for k in 0..2 {
            let mut up = p.as_array();
            let mut dn = p.as_array();
            up[k] += step;
            dn[k] -= step;
            let hp = fd_hessian(potential_raw, &up, HESSIAN_STEP).unwrap();
            let hm = fd_hessian(potential_raw, &dn, HESSIAN_STEP).unwrap();
            for i in 0..2 {
                for j in 0..2 {
                    let fd = (hp[(i, j)] - hm[(i, j)]) / (2.0 * step);
                    assert_abs_diff_eq!(fd, mixture[(i, j, k)], epsilon = 1e-4);
                }
            }
        }
        let levi = alpha_christoffels(&p, 0.0);
        assert!(levi.max_abs_diff(&mixture.scale(0.5)) < 1e-15);
    }

    #[test]
    fn moment_examples() {
        let p0 = NaturalPoint::standard();
        assert_eq!(moment(&p0, 2).unwrap(), 1.0);
        assert_eq!(moment(&p0, 4).unwrap(), 3.0);
        assert_eq!(moment(&p0, 3).unwrap(), 0.0);
        assert!(matches!(moment(&p0, 5), Err(Error::Unsupported(_))));
        assert!(moment(&p0, 0).is_err());
    }

    #[test]
    fn moments_and_mass_by_quadrature() {
        for p in [nat(0.0, -0.5), nat(1.2, -0.7), nat(-3.0, -2.0), nat(0.4, -0.1)] {
            assert_abs_diff_eq!(quad(&p, |_| 1.0), 1.0, epsilon = 1e-10);
            for k in 1..=4 {
                let q = quad(&p, |x| x.powi(k as i32));
                let m = moment(&p, k).unwrap();
                assert!((q - m).abs() < 1e-8 * m.abs().max(1.0), "k={k}: {q} vs {m}");
            }
        }
    }

    #[test]
    fn sectional_curvature_examples() {
        assert_abs_diff_eq!(base_sectional_curvature(&nat(0.0, -0.5)).unwrap(), -0.5, epsilon = 1e-4);
        assert_abs_diff_eq!(base_sectional_curvature(&nat(3.0, -0.1)).unwrap(), -0.5, epsilon = 1e-4);
    }

    proptest! {
        #[test]
        fn fisher_is_potential_hessian(p in theta_strategy()) {
            let fd = fd_hessian(potential_raw, &p.as_array(), HESSIAN_STEP * p.theta2().abs()).unwrap();
            let h = fisher_metric(&p);
            let fd = Matrix2::from_column_slice(fd.as_slice());
            prop_assert!((fd - h).abs().max() < 1e-6 * h.abs().max().max(1.0));
        }

        #[test]
        fn fisher_positive_definite(p in theta_strategy()) {
            let h = fisher_metric(&p);
            prop_assert!(h[(0, 0)] > 0.0 && h.determinant() > 0.0);
            let expected = -1.0 / (4.0 * p.theta2().powi(3));
            prop_assert!((h.determinant() - expected).abs() < 1e-10 * expected);
        }

        #[test]
        fn charts_round_trip(mu in -5.0..5.0f64, sigma in 0.1..5.0f64) {
            let m = MeanPoint::new(mu, sigma).unwrap();
            for via in [Chart::Natural, Chart::Expectation] {
                let back = convert(convert(m.into(), via).unwrap(), Chart::Mean).unwrap();
                let FamilyPoint::Mean(b) = back else { unreachable!() };
                prop_assert!((b.mu() - mu).abs() < 1e-12 * mu.abs().max(1.0));
                prop_assert!((b.sigma() - sigma).abs() < 1e-12 * sigma.max(1.0));
            }
            let theta = m.to_natural().unwrap();
            let FamilyPoint::Natural(t) =
                convert(convert(theta.into(), Chart::Expectation).unwrap(), Chart::Natural).unwrap()
            else { unreachable!() };
            prop_assert!((t.theta1() - theta.theta1()).abs() < 1e-12 * theta.theta1().abs().max(1.0));
            prop_assert!((t.theta2() - theta.theta2()).abs() < 1e-12 * theta.theta2().abs().max(1.0));
        }

        #[test]
        fn dual_coordinate_jacobians_are_inverse(p in moderate_theta()) {
            // ∂η/∂θ by differences, ∂θ/∂η by differences, product = I
            let step = 1e-6 * p.theta2().abs();
            let eta_of = |v: &[f64]| NaturalPoint::from_slice(v).map(|q| q.to_expectation());
            let theta_of = |v: &[f64]| ExpectationPoint::new(v[0], v[1]).and_then(|q| q.to_natural());
            let mut d_eta = Matrix2::zeros();
            for i in 0..2 {
                let mut up = p.as_array();
                let mut dn = p.as_array();
                up[i] += step;
                dn[i] -= step;
                let (a, b) = (eta_of(&up).unwrap(), eta_of(&dn).unwrap());
                d_eta[(0, i)] = (a.eta1() - b.eta1()) / (2.0 * step);
                d_eta[(1, i)] = (a.eta2() - b.eta2()) / (2.0 * step);
            }
            let h = fisher_metric(&p);
            prop_assert!((d_eta - h).abs().max() < 1e-6 * h.abs().max().max(1.0));
            let e = p.to_expectation();
            let estep = 1e-6 * e.variance();
            let mut d_theta = Matrix2::zeros();
            for i in 0..2 {
                let mut up = [e.eta1(), e.eta2()];
                let mut dn = up;
                up[i] += estep;
                dn[i] -= estep;
                let (a, b) = (theta_of(&up).unwrap(), theta_of(&dn).unwrap());
                d_theta[(0, i)] = (a.theta1() - b.theta1()) / (2.0 * estep);
                d_theta[(1, i)] = (a.theta2() - b.theta2()) / (2.0 * estep);
            }
            prop_assert!((d_eta * d_theta - Matrix2::identity()).abs().max() < 1e-6);
        }

        #[test]
        fn curvature_is_constant(p in theta_strategy()) {
            prop_assert!((base_sectional_curvature(&p).unwrap() + 0.5).abs() < 1e-4);
        }
    }
}
