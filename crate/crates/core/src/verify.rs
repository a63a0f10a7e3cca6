//! Seeded verification suites. Each check draws its samples from its own
//! ChaCha stream, evaluates a residual on every sample and reports the
//! worst one against a tolerance.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, Matrix2, Matrix4, RowVector2, Vector4};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dombrowski::{closedness_residual, kahler_residual, kahler_tensors, scalar_curvature, TangentChart, TangentPoint};
use crate::dynamics::{integrate_flow, schrodinger_evolve, schrodinger_residual};
use crate::error::{Error, Result};
use crate::extrinsic::{
    commutator_residual, expectation_complex, inner_product, kappa, psi_map, pullback_inner, pullback_residual,
    pushforward, q_apply,
};
use crate::gaussian_family::{self as family, NaturalPoint};
use crate::jacobi_group::{AlgebraElement, Basis, GroupElement};
use crate::levi_civita;
use crate::momentum::{
    equivariance_residual, fundamental_field, hamiltonian_field, kahler_value, kahler_value_raw, momentum_vector,
    monte_carlo_measure, poisson, spectral_measure, spectrum, transformed_gaussian, ObservableDecomposition,
    Spectrum,
};
use crate::numerics::{Grid1D, Interval, Polynomial2};
use crate::parallel::{nan_max, Parallelism};
use crate::siegel_jacobi::{
    chart_jacobian, chart_map, chart_map_inverse, eikonal_residual, g_kb, group_action, holomorphic_isometry,
    isometry_residual, kb_kahler_form, kb_metric, AspElement, KBParams, Orientation, SJPoint,
};

pub const DEFAULT_SEED: u64 = 1;

/// One line of a verification report; `pass ⇔ max_residual ≤ tolerance`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRecord {
    pub check: String,
    pub samples: usize,
    pub max_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Curvature,
    Kahler,
    Isometry,
    Momentum,
    Extrinsic,
    Dynamics,
    All,
}

impl Suite {
    pub const NAMES: [&'static str; 7] = ["curvature", "kahler", "isometry", "momentum", "extrinsic", "dynamics", "all"];

    fn includes(self, other: Suite) -> bool {
        self == Suite::All || self == other
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "curvature" => Suite::Curvature,
            "kahler" => Suite::Kahler,
            "isometry" => Suite::Isometry,
            "momentum" => Suite::Momentum,
            "extrinsic" => Suite::Extrinsic,
            "dynamics" => Suite::Dynamics,
            "all" => Suite::All,
            other => return Err(Error::UnknownSuite(other.to_string())),
        })
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let i = *self as usize;
        f.write_str(Suite::NAMES[i])
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct VerifyConfig {
    pub seed: u64,
    pub parallelism: Parallelism,
    /// Per-check tolerance replacing the default.
    pub tolerances: BTreeMap<String, f64>,
}

impl VerifyConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }
}

/// Number of samples and the worst residual.
type Outcome = (usize, f64);

struct Check {
    suite: Suite,
    name: &'static str,
    tolerance: f64,
    run: fn(&mut ChaCha8Rng, Parallelism) -> Outcome,
}

const CHECKS: &[Check] = &[
    Check { suite: Suite::Curvature, name: "scalar_curvature_constant", tolerance: 1e-10, run: scalar_curvature_constant },
    Check { suite: Suite::Curvature, name: "scalar_curvature_fd", tolerance: 1e-3, run: scalar_curvature_fd },
    Check { suite: Suite::Curvature, name: "base_sectional_curvature", tolerance: 1e-4, run: base_sectional_curvature },
    Check { suite: Suite::Curvature, name: "weighted_kb_scalar_curvature", tolerance: 1e-3, run: weighted_kb_scalar_curvature },
    Check { suite: Suite::Kahler, name: "kahler_axioms_natural", tolerance: 0.0, run: kahler_axioms_natural },
    Check { suite: Suite::Kahler, name: "kahler_axioms_hybrid", tolerance: 1e-12, run: kahler_axioms_hybrid },
    Check { suite: Suite::Kahler, name: "symplectic_form_closed", tolerance: 1e-5, run: symplectic_form_closed },
    Check { suite: Suite::Isometry, name: "chart_map_pullback", tolerance: 1e-9, run: chart_map_pullback },
    Check { suite: Suite::Isometry, name: "asp_isometry", tolerance: 1e-6, run: asp_isometry },
    Check { suite: Suite::Isometry, name: "asp_reversing_isometry", tolerance: 1e-6, run: asp_reversing_isometry },
    Check { suite: Suite::Isometry, name: "non_isometry_detected", tolerance: 1.0, run: non_isometry_detected },
    Check { suite: Suite::Isometry, name: "holomorphic_conjugation", tolerance: 1e-10, run: holomorphic_conjugation },
    Check { suite: Suite::Isometry, name: "transitivity_witness", tolerance: 1e-10, run: transitivity_witness },
    Check { suite: Suite::Isometry, name: "isotropy_rotations", tolerance: 1e-12, run: isotropy_rotations },
    Check { suite: Suite::Isometry, name: "eikonal_linear_family", tolerance: 1e-5, run: eikonal_linear_family },
    Check { suite: Suite::Isometry, name: "eikonal_rational_family", tolerance: 1e-5, run: eikonal_rational_family },
    Check { suite: Suite::Momentum, name: "fundamental_equals_hamiltonian", tolerance: 1e-5, run: fundamental_equals_hamiltonian },
    Check { suite: Suite::Momentum, name: "poisson_structure", tolerance: 1e-9, run: poisson_structure },
    Check { suite: Suite::Momentum, name: "equivariance", tolerance: 1e-9, run: equivariance },
    Check { suite: Suite::Momentum, name: "point_separation", tolerance: 0.0, run: point_separation },
    Check { suite: Suite::Momentum, name: "kahler_function_pde", tolerance: 1e-5, run: kahler_function_pde },
    Check { suite: Suite::Momentum, name: "spectrum_table", tolerance: 0.0, run: spectrum_table },
    Check { suite: Suite::Momentum, name: "spectrum_invariance", tolerance: 1e-9, run: spectrum_invariance },
    Check { suite: Suite::Momentum, name: "spectral_total_mass", tolerance: 1e-10, run: spectral_total_mass },
    Check { suite: Suite::Momentum, name: "spectral_monte_carlo", tolerance: 3.0, run: spectral_monte_carlo },
    Check { suite: Suite::Momentum, name: "borel_gaussian_transform", tolerance: 1e-10, run: borel_gaussian_transform },
    Check { suite: Suite::Extrinsic, name: "psi_normalization", tolerance: 1e-12, run: psi_normalization },
    Check { suite: Suite::Extrinsic, name: "pullback_identity", tolerance: 1e-9, run: pullback_identity },
    Check { suite: Suite::Extrinsic, name: "expectation_identity", tolerance: 1e-10, run: expectation_identity },
    Check { suite: Suite::Extrinsic, name: "hermiticity", tolerance: 1e-12, run: hermiticity },
    Check { suite: Suite::Extrinsic, name: "commutator_table", tolerance: 1e-9, run: commutator_table },
    Check { suite: Suite::Extrinsic, name: "kappa_phase_identity", tolerance: 1e-10, run: kappa_phase_identity },
    Check { suite: Suite::Dynamics, name: "schrodinger_shadow", tolerance: 1e-4, run: schrodinger_shadow },
    Check { suite: Suite::Dynamics, name: "schrodinger_convergence", tolerance: 1.0, run: schrodinger_convergence },
    Check { suite: Suite::Dynamics, name: "wave_norm", tolerance: 1e-8, run: wave_norm },
    Check { suite: Suite::Dynamics, name: "energy_conservation", tolerance: 1e-7, run: energy_conservation },
    Check { suite: Suite::Dynamics, name: "flow_action_consistency", tolerance: 1e-5, run: flow_action_consistency },
    Check { suite: Suite::Dynamics, name: "flow_isometry", tolerance: 1e-5, run: flow_isometry },
];

/// Names of the checks making up a suite, in report order.
pub fn check_names(suite: Suite) -> Vec<&'static str> {
    CHECKS.iter().filter(|c| suite.includes(c.suite)).map(|c| c.name).collect()
}

/// Runs every check of `suite`. Reports are identical for a fixed seed
/// whatever the parallelism.
pub fn run_verify(suite: Suite, config: &VerifyConfig) -> Result<Vec<ReportRecord>> {
    run_filtered(config, |c| suite.includes(c.suite))
}

/// Runs the named checks, in table order.
pub fn run_checks(names: &[&str], config: &VerifyConfig) -> Result<Vec<ReportRecord>> {
    if let Some(unknown) = names.iter().find(|n| !CHECKS.iter().any(|c| c.name == **n)) {
        return Err(Error::InvalidParameter(format!("no check named `{unknown}`")));
    }
    run_filtered(config, |c| names.contains(&c.name))
}

fn run_filtered(config: &VerifyConfig, keep: impl Fn(&Check) -> bool) -> Result<Vec<ReportRecord>> {
    if let Some(unknown) = config.tolerances.keys().find(|k| !CHECKS.iter().any(|c| c.name == k.as_str())) {
        return Err(Error::InvalidParameter(format!("no check named `{unknown}`")));
    }
    Ok(CHECKS
        .iter()
        .enumerate()
        .filter(|(_, c)| keep(c))
        .map(|(stream, c)| {
            // the stream is the table index, so a check sees the same draws
            // whichever subset it runs in
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(stream as u64);
            let (samples, max_residual) = (c.run)(&mut rng, config.parallelism);
            let tolerance = config.tolerances.get(c.name).copied().unwrap_or(c.tolerance);
            ReportRecord {
                check: c.name.to_string(),
                samples,
                max_residual,
                tolerance,
                pass: max_residual <= tolerance,
                seed: config.seed,
            }
        })
        .collect())
}

/// Random draws shared by the suites and the benchmarks.
pub mod sampling {
    use super::*;

    pub fn tangent_point(rng: &mut impl Rng) -> TangentPoint {
        let c = [
            rng.random_range(-2.0..2.0),
            rng.random_range(-2.0..-0.2),
            rng.random_range(-2.0..2.0),
            rng.random_range(-2.0..2.0),
        ];
        TangentPoint::from_array(c).expect("θ₂ < 0 by construction")
    }

    pub fn tangent_points(rng: &mut impl Rng, n: usize) -> Vec<TangentPoint> {
        (0..n).map(|_| tangent_point(rng)).collect()
    }

    pub fn natural_point(rng: &mut impl Rng) -> NaturalPoint {
        NaturalPoint::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..-0.2)).expect("θ₂ < 0")
    }

    pub fn sj_point(rng: &mut impl Rng) -> SJPoint {
        let c = [
            rng.random_range(-2.0..2.0),
            rng.random_range(0.1..3.0),
            rng.random_range(-2.0..2.0),
            rng.random_range(-2.0..2.0),
        ];
        SJPoint::from_real(c).expect("Im τ > 0")
    }

    fn sl2(rng: &mut impl Rng) -> Matrix2<f64> {
        let a = rng.random_range(0.4..2.0);
        let b = rng.random_range(-1.0..1.0);
        let c = rng.random_range(-1.0..1.0);
        Matrix2::new(a, b, 0.0, 1.0 / a) * Matrix2::new(1.0, 0.0, c, 1.0)
    }

    fn translation(rng: &mut impl Rng) -> RowVector2<f64> {
        RowVector2::new(rng.random_range(-1.5..1.5), rng.random_range(-1.5..1.5))
    }

    pub fn asp_element(rng: &mut impl Rng, orientation: Orientation) -> AspElement {
        let flip = match orientation {
            Orientation::Preserving => Matrix2::identity(),
            Orientation::Reversing => Matrix2::new(1.0, 0.0, 0.0, -1.0),
        };
        AspElement::new(sl2(rng) * flip, translation(rng), orientation).expect("det = ±1 by construction")
    }

    pub fn group_element(rng: &mut impl Rng) -> GroupElement {
        GroupElement::new(sl2(rng), translation(rng), rng.random_range(-1.0..1.0)).expect("det = 1 by construction")
    }

    pub fn borel_element(rng: &mut impl Rng) -> GroupElement {
        let a: f64 = rng.random_range(0.3..3.0) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        let (b, l, m) = (rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
        GroupElement::from_entries(a, b, 0.0, 1.0 / a, l, m, 0.0).expect("det = 1 by construction")
    }

    pub fn algebra_element(rng: &mut impl Rng) -> AlgebraElement {
        AlgebraElement::new(std::array::from_fn(|_| rng.random_range(-1.0..1.0)))
    }

    pub fn polynomial(rng: &mut impl Rng) -> Polynomial2 {
        Polynomial2::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0))
    }
}

use sampling::*;

fn relative(diff: f64, scale: f64) -> f64 {
    diff / scale.abs().max(1.0)
}

fn basis_elements() -> [AlgebraElement; 6] {
    Basis::ALL.map(AlgebraElement::basis)
}

fn to_dmatrix(m: &Matrix4<f64>) -> DMatrix<f64> {
    DMatrix::from_column_slice(4, 4, m.as_slice())
}

// curvature

fn scalar_curvature_constant(rng: &mut ChaCha8Rng, par: Parallelism) -> Outcome {
    let pts = tangent_points(rng, 1000);
    (pts.len(), par.max(&pts, |p| (scalar_curvature(p) + 6.0).abs()))
}

fn scalar_curvature_fd(rng: &mut ChaCha8Rng, par: Parallelism) -> Outcome {
    let pts = tangent_points(rng, 1000);
    let metric = |q: &[f64]| -> Result<DMatrix<f64>> {
        Ok(to_dmatrix(&kahler_tensors(&TangentPoint::from_slice(q)?, TangentChart::Natural).g))
    };
    let r = par.max(&pts, |p| {
        let step = 1e-4 * p.theta().theta2().abs();
        levi_civita::scalar_curvature_fd(metric, &p.as_array(), step).map_or(f64::NAN, |s| (s + 6.0).abs())
    });
    (pts.len(), r)
}

fn base_sectional_curvature(rng: &mut ChaCha8Rng, par: Parallelism) -> Outcome {
    let pts: Vec<NaturalPoint> = (0..100).map(|_| natural_point(rng)).collect();
    let r = par.max(&pts, |t| family::base_sectional_curvature(t).map_or(f64::NAN, |k| (k + 0.5).abs()));
    (pts.len(), r)
}

fn weighted_kb_scalar_curvature(rng: &mut ChaCha8Rng, par: Parallelism) -> Outcome {
    let cases: Vec<(SJPoint, KBParams)> = (0..20)
        .map(|_| {
            let params = KBParams::new(rng.random_range(0.3..3.0), rng.random_range(0.3..3.0)).expect("positive");
            (sj_point(rng), params)
        })
        .collect();
    let r = par.max(&cases, |(pt, params)| {
        let metric = |q: &[f64]| -> Result<DMatrix<f64>> {
            Ok(to_dmatrix(&kb_metric(&SJPoint::from_real([q[0], q[1], q[2], q[3]])?, *params)))
        };
        let step = 1e-4 * pt.tau().im.min(1.0);
        levi_civita::scalar_curvature_fd(metric, &pt.as_real(), step)
            .map_or(f64::NAN, |s| relative((s + 3.0 / params.a()).abs(), 3.0 / params.a()))
    });
    (cases.len(), r)
}

// kahler

fn kahler_axioms_natural(rng: &mut ChaCha8Rng, par: Parallelism) -> Outcome {
    let pts = tangent_points(rng, 500);
    (pts.len(), par.max(&pts, |p| kahler_tensors(p, TangentChart::Natural).compatibility_residual()))
}

fn kahler_axioms_hybrid(rng: &mut ChaCha8Rng, par: Parallelism) -> Outcome {
    let pts = tangent_points(rng, 500);
    let r = par.max(&pts, |p| {
        let t = kahler_tensors(p, TangentChart::Hybrid);
        let theta = p.theta();
        let scale = family::fisher_metric(&theta).abs().max() * family::inverse_fisher_metric(&theta).abs().max();
        t.compatibility_residual() / scale.max(1.0)
    });
    (pts.len(), r)
}

fn symplectic_form_closed(rng: &mut ChaCha8Rng, par: Parallelism) -> Outcome {
    let pts = tangent_points(rng, 500);
    let r = par.max(&pts, |p| {
        let step = 1e-4 * p.theta().theta2().abs();
        [TangentChart::Natural, TangentChart::Hybrid]
            .iter()
            .map(|c| closedness_residual(p, *c, step).unwrap_or(f64::NAN))
            .fold(0.0, nan_max)
    });
    (pts.len(), r)
}

// isometry

fn chart_map_pullback(rng: &mut ChaCha8Rng, par: Parallelism) -> Outcome {
    let pts = tangent_points(rng, 200);
    let jac = chart_jacobian();
    let r = par.max(&pts, |p| {
        let pt = chart_map(p);
        let nat = kahler_tensors(p, TangentChart::Natural);
        let scale = nat.g.abs().max();
        let dg = (jac.transpose() * g_kb(&pt) * jac - nat.g).abs().max();
        let dw = (jac.transpose() * kb_kahler_form(&pt) * jac - nat.omega).abs().max();
        let back = chart_map_inverse(&pt).map_or(f64::NAN, |q| (q.as_vector() - p.as_vector()).abs().max());
        relative(dg.max(dw), scale).max(back)
    });
    (pts.len(), r)
}

fn isometry_samples(rng: &mut ChaCha8Rng, par: Parallelism, n: usize, orientation: Orientation) -> Outcome {
    let cases: Vec<(AspElement, SJPoint)> = (0..n).map(|_| (asp_element(rng, orientation), sj_point(rng))).collect();
    let r = par.max(&cases, |(g, pt)| isometry_residual(|q| group_action(g, q), pt).unwrap_or(f64::NAN));
    (cases.len(), r)
}

fn asp_isometry(rng: &mut ChaCha8Rng, par: Parallelism) -> Outcome {
    isometry_samples(rng, par, 200, Orientation::Preserving)
}

fn asp_reversing_isometry(rng: &mut ChaCha8Rng, par: Parallelism) -> Outcome {
    isometry_samples(rng, par, 50, Orientation::Reversing)
}

// reported as 0.1 / residual, so passing means the dilation is at least 0.1 away from isometric
fn non_isometry_detected(_: &mut ChaCha8Rng, _: Parallelism) -> Outcome {
    let dilate = |p: &SJPoint| SJPoint::new(p.tau() * 2.0, p.z());
    let r = isometry_residual(dilate, &SJPoint::base()).unwrap_or(0.0);
    (1, 0.1 / r)
}

fn holomorphic_conjugation(rng: &mut ChaCha8Rng, par: Parallelism) -> Outcome {
    let cases: Vec<([f64; 5], SJPoint)> = (0..100)
        .map(|_| {
            let a: f64 = rng.random_range(0.3..2.0) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            let rest: [f64; 4] = std::array::from_fn(|_| rng.random_range(-2.0..2.0));
            ([a, rest[0], rest[1], rest[2], rest[3]], sj_point(rng))
        })
        .collect();
    let r = par.max(&cases, |(params, pt)| {
        [holomorphic_isometry(1, params), holomorphic_isometry(2, &params[..4])]
            .into_iter()
            .map(|iso| {
                let iso = match iso {
                    Ok(iso) => iso,
                    Err(_) => return f64::NAN,
                };
                match (iso.apply_sj(pt), group_action(&iso.conjugated_element(), pt)) {
                    (Ok(direct), Ok(via)) => {
                        let scale = direct.as_real().iter().fold(1.0f64, |m, v| m.max(v.abs()));
                        direct.max_abs_diff(&via) / scale
                    }
                    _ => f64::NAN,
                }
            })
            .fold(0.0, nan_max)
    });
    (cases.len(), r)
}

fn transitivity_witness(rng: &mut ChaCha8Rng, par: Parallelism) -> Outcome {
    let pts: Vec<SJPoint> = (0..100).map(|_| sj_point(rng)).collect();
    let r = par.max(&pts, |target| {
        group_action(&AspElement::transitivity_witness(target), &SJPoint::base())
            .map_or(f64::NAN, |img| img.max_abs_diff(target))
    });
    (pts.len(), r)
}

fn isotropy_rotations(rng: &mut ChaCha8Rng, par: Parallelism) -> Outcome {
    let angles: Vec<f64> = (0..100).map(|_| rng.random_range(-7.0..7.0)).collect();
    let r = par.max(&angles, |a| {
        group_action(&AspElement::rotation(*a), &SJPoint::base()).map_or(f64::NAN, |img| img.max_abs_diff(&SJPoint::base()))
    });
    (angles.len(), r)
}

fn eikonal_grid() -> Vec<(f64, f64)> {
    let xs = Grid1D::new(-3.0, -0.5, 20).expect("valid grid");
    let ys = Grid1D::new(-2.0, 2.0, 20).expect("valid grid");
    xs.points().flat_map(|x| ys.points().map(move |y| (x, y))).collect()
}

fn eikonal_max<F: Fn(f64, f64) -> f64 + Sync + Send>(par: Parallelism, u: F) -> f64 {
    par.max(&eikonal_grid(), |(x, y)| {
        eikonal_residual(&u, *x, *y).map_or(f64::NAN, |(a, b)| a.abs().max(b.abs()))
    })
}

fn eikonal_linear_family(rng: &mut ChaCha8Rng, par: Parallelism) -> Outcome {
    let params = [3.0, rng.random_range(0.2..2.0)];
    let r = params.iter().map(|a| eikonal_max(par, |x, _| a * a * x)).fold(0.0, nan_max);
    (params.len() * 400, r)
}

fn eikonal_rational_family(rng: &mut ChaCha8Rng, par: Parallelism) -> Outcome {
    let params = [(1.0, 2.0), (rng.random_range(0.5..1.5), rng.random_range(-2.0..2.0))];
    let r = params
        .iter()
        .map(|(a, b)| eikonal_max(par, |x, y| a * a * x / ((y + b).powi(2) + x * x)))
        .fold(0.0, nan_max);
    (params.len() * 400, r)
}

// momentum

fn fundamental_equals_hamiltonian(rng: &mut ChaCha8Rng, par: Parallelism) -> Outcome {
    let pts = tangent_points(rng, 100);
    let r = par.max(&pts, |p| {
        basis_elements()
            .iter()
            .map(|l| {
                let x = hamiltonian_field(l, p);
                fundamental_field(l, p).map_or(f64::NAN, |y| relative((x - y).abs().max(), x.abs().max()))
            })
            .fold(0.0, nan_max)
    });
    (pts.len() * 6, r)
}

fn poisson_structure(rng: &mut ChaCha8Rng, par: Parallelism) -> Outcome {
    let pts = tangent_points(rng, 50);
    let basis = basis_elements();
    let r = par.max(&pts, |p| {
        let mut worst: f64 = 0.0;
        for i in 0..6 {
            for j in (i + 1)..6 {
                let rhs = kahler_value(&basis[i].bracket(&basis[j]), p);
                worst = nan_max(worst, relative((poisson(&basis[i], &basis[j], p) - rhs).abs(), rhs));
            }
        }
        worst
    });
    (pts.len() * 15, r)
}

fn equivariance(rng: &mut ChaCha8Rng, par: Parallelism) -> Outcome {
    let cases: Vec<_> = (0..500).map(|_| (group_element(rng), algebra_element(rng), tangent_point(rng))).collect();
    let r = par.max(&cases, |(g, l, p)| {
        equivariance_residual(g, l, p).map_or(f64::NAN, |d| relative(d, kahler_value(l, p)))
    });
    (cases.len(), r)
}

// number of pairs the momentum map fails to tell apart
fn point_separation(rng: &mut ChaCha8Rng, par: Parallelism) -> Outcome {
    let pairs: Vec<_> = (0..1000)
        .map(|_| loop {
            let (p, q) = (tangent_point(rng), tangent_point(rng));
            if (p.as_vector() - q.as_vector()).abs().max() > 1e-3 {
                break (p, q);
            }
        })
        .collect();
    let collisions = par.map(&pairs, |(p, q)| momentum_vector(p).max_abs_diff(&momentum_vector(q)) == 0.0);
    (pairs.len(), collisions.into_iter().filter(|c| *c).count() as f64)
}

fn kahler_function_pde(rng: &mut ChaCha8Rng, par: Parallelism) -> Outcome {
    let pts = tangent_points(rng, 50);
    let r = par.max(&pts, |p| {
        basis_elements()
            .iter()
            .map(|l| kahler_residual(|c| kahler_value_raw(l, c), p).map_or(f64::NAN, |r| r.max_abs()))
            .fold(0.0, nan_max)
    });
    (pts.len() * 6, r)
}

// number of mismatches against Spec(J^F) = (−∞,0], Spec(J^R) = {−¼}, Spec(J^Q) = ℝ
fn spectrum_table(_: &mut ChaCha8Rng, _: Parallelism) -> Outcome {
    let cases = [
        (Polynomial2::new(-1.0, 0.0, 0.0), Spectrum::LowerRay { hi: 0.0 }, "(-inf,0]"),
        (Polynomial2::new(0.0, 0.0, -0.25), Spectrum::Point { value: -0.25 }, "{-0.25}"),
        (Polynomial2::new(0.0, 1.0, 0.0), Spectrum::Line, "(-inf,inf)"),
    ];
    let misses = cases
        .iter()
        .filter(|(k, expected, text)| {
            let s = spectrum(&ObservableDecomposition::from_polynomial(*k));
            s != *expected || s.to_string() != *text
        })
        .count();
    (cases.len(), misses as f64)
}

// f∘Φ_h = J^{Ad(h⁻¹g)k} keeps k, so its values stay in Spec(f) and equal E[k]
fn spectrum_invariance(rng: &mut ChaCha8Rng, par: Parallelism) -> Outcome {
    let cases: Vec<_> = (0..200)
        .map(|_| (group_element(rng), group_element(rng), polynomial(rng), tangent_point(rng)))
        .collect();
    let r = par.max(&cases, |(g, h, k, p)| {
        let obs = ObservableDecomposition::new(*g, *k);
        let moved = match crate::siegel_jacobi::tangent_action(&AspElement::from(h), p) {
            Ok(q) => q,
            Err(_) => return f64::NAN,
        };
        let value = obs.value(&moved);
        let shifted = ObservableDecomposition::new(h.inverse().multiply(g).expect("valid product"), *k);
        let spec = spectrum(&obs).as_interval();
        let outside = (spec.lo - value).max(value - spec.hi).max(0.0);
        let base = match transformed_gaussian(&shifted.g.inverse(), p) {
            Ok(m) => m,
            Err(_) => return f64::NAN,
        };
        let var = base.sigma() * base.sigma();
        let mean = k.alpha * (base.mu() * base.mu() + var) + k.beta * base.mu() + k.gamma;
        let mismatch = (shifted.value(p) - value).abs().max((mean - value).abs());
        let same_spec = if spectrum(&shifted) == spectrum(&obs) { 0.0 } else { f64::INFINITY };
        relative(mismatch.max(outside), value).max(same_spec)
    });
    (cases.len(), r)
}

fn spectral_total_mass(rng: &mut ChaCha8Rng, par: Parallelism) -> Outcome {
    let cases: Vec<_> = (0..200).map(|_| (group_element(rng), polynomial(rng), tangent_point(rng))).collect();
    let r = par.max(&cases, |(g, k, p)| {
        let obs = ObservableDecomposition::new(*g, *k);
        spectral_measure(&obs, p, &[spectrum(&obs).as_interval()]).map_or(f64::NAN, |m| (m.probability - 1.0).abs())
    });
    (cases.len(), r)
}

// |exact − estimate| in units of the Monte-Carlo standard error
fn spectral_monte_carlo(rng: &mut ChaCha8Rng, par: Parallelism) -> Outcome {
    let cases: Vec<_> = (0..4)
        .map(|_| {
            let k = polynomial(rng);
            let c = rng.random_range(-1.0..1.0);
            let set = vec![Interval { lo: c - 0.5, hi: c + 1.0 }, Interval { lo: c + 2.0, hi: f64::INFINITY }];
            let seed: u64 = rng.random();
            (borel_element(rng), k, tangent_point(rng), set, seed)
        })
        .collect();
    let r = par.max(&cases, |(g, k, p, set, seed)| {
        let obs = ObservableDecomposition::new(*g, *k);
        match (spectral_measure(&obs, p, set), monte_carlo_measure(&obs, p, set, 100_000, *seed)) {
            (Ok(exact), Ok((est, se))) if se > 0.0 => (exact.probability - est).abs() / se,
            (Ok(exact), Ok((est, _))) => {
                if (exact.probability - est).abs() < 1e-12 {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            _ => f64::NAN,
        }
    });
    (cases.len(), r)
}

fn borel_gaussian_transform(rng: &mut ChaCha8Rng, par: Parallelism) -> Outcome {
    let cases: Vec<_> = (0..200).map(|_| (borel_element(rng), tangent_point(rng))).collect();
    let r = par.max(&cases, |(g, p)| {
        let closed = transformed_gaussian(g, p);
        let full = crate::siegel_jacobi::tangent_action(&AspElement::from(g), p).map(|q| q.theta().to_mean());
        match (closed, full) {
            (Ok(a), Ok(b)) => relative((a.mu() - b.mu()).abs(), b.mu()).max(relative((a.sigma() - b.sigma()).abs(), b.sigma())),
            _ => f64::NAN,
        }
    });
    (cases.len(), r)
}

// extrinsic

fn psi_normalization(rng: &mut ChaCha8Rng, par: Parallelism) -> Outcome {
    let pts = tangent_points(rng, 500);
    let r = par.max(&pts, |p| {
        let w = psi_map(p);
        inner_product(&w, &w).map_or(f64::NAN, |n| (n - 1.0).norm())
    });
    (pts.len(), r)
}

fn pullback_identity(rng: &mut ChaCha8Rng, par: Parallelism) -> Outcome {
    let cases: Vec<_> = (0..200)
        .map(|_| {
            let a = Vector4::from_fn(|_, _| rng.random_range(-1.0..1.0));
            let b = Vector4::from_fn(|_, _| rng.random_range(-1.0..1.0));
            (tangent_point(rng), a, b)
        })
        .collect();
    let r = par.max(&cases, |(p, a, b)| {
        let scale = pullback_inner(p, a, a).norm().max(pullback_inner(p, b, b).norm());
        relative(pullback_residual(p, a, b).norm(), scale)
    });
    (cases.len(), r)
}

fn expectation_identity(rng: &mut ChaCha8Rng, par: Parallelism) -> Outcome {
    let pts = tangent_points(rng, 100);
    let r = par.max(&pts, |p| {
        basis_elements()
            .iter()
            .map(|l| {
                let j = kahler_value(l, p);
                relative((expectation_complex(l, p).re - j).abs(), j)
            })
            .fold(0.0, nan_max)
    });
    (pts.len() * 6, r)
}

fn hermiticity(rng: &mut ChaCha8Rng, par: Parallelism) -> Outcome {
    let pts = tangent_points(rng, 100);
    let r = par.max(&pts, |p| {
        basis_elements()
            .iter()
            .map(|l| {
                let e = expectation_complex(l, p);
                relative(e.im.abs(), e.re)
            })
            .fold(0.0, nan_max)
    });
    (pts.len() * 6, r)
}

fn commutator_table(_: &mut ChaCha8Rng, par: Parallelism) -> Outcome {
    let grid = Grid1D::new(-8.0, 8.0, 100).expect("valid grid");
    let basis = basis_elements();
    let pairs: Vec<(usize, usize)> = (0..6).flat_map(|i| ((i + 1)..6).map(move |j| (i, j))).collect();
    let r = par.max(&pairs, |(i, j)| commutator_residual(&basis[*i], &basis[*j], &grid));
    (pairs.len(), r)
}

// κ against 2iċ0 − q0 along X_{J^L}, plus the x and x² terms that must cancel
fn kappa_phase_identity(rng: &mut ChaCha8Rng, par: Parallelism) -> Outcome {
    let cases: Vec<_> = (0..100).map(|_| (tangent_point(rng), algebra_element(rng))).collect();
    let i = Complex64::i();
    let r = par.max(&cases, |(p, l)| {
        let dc = pushforward(p, &hamiltonian_field(l, p));
        let q = q_apply(l, &psi_map(p)).coefficients();
        let scale = q.iter().map(|v| v.norm()).fold(1.0, f64::max);
        let oracle = i * dc[0] * 2.0 - q[0];
        let terms = [kappa(p, l) - oracle, i * dc[1] * 2.0 - q[1], i * dc[2] * 2.0 - q[2]];
        terms.iter().map(|t| t.norm() / scale).fold(0.0, nan_max)
    });
    (cases.len(), r)
}

// dynamics

const SHADOW_GENERATORS: [&str; 5] = ["F", "Q", "R", "H", "G-F"];

fn shadow_residuals(par: Parallelism, dt: f64) -> Vec<f64> {
    let grid = Grid1D::new(-6.0, 6.0, 121).expect("valid grid");
    let p0 = TangentPoint::standard();
    par.map(&SHADOW_GENERATORS, |l| {
        let l: AlgebraElement = l.parse().expect("fixed generator");
        integrate_flow(&l, &p0, 1.0, dt)
            .and_then(|traj| schrodinger_residual(&schrodinger_evolve(&traj), &grid))
            .unwrap_or(f64::NAN)
    })
}

fn schrodinger_shadow(_: &mut ChaCha8Rng, par: Parallelism) -> Outcome {
    let r = shadow_residuals(par, 1e-3);
    (r.len(), r.into_iter().fold(0.0, nan_max))
}

// reported as 3 / (residual ratio when dt is halved)
fn schrodinger_convergence(_: &mut ChaCha8Rng, par: Parallelism) -> Outcome {
    let coarse = shadow_residuals(par, 1e-3);
    let fine = shadow_residuals(par, 5e-4);
    let r = coarse.iter().zip(&fine).map(|(c, f)| 3.0 * f / c).fold(0.0, nan_max);
    (coarse.len(), r)
}

fn flow_cases(rng: &mut ChaCha8Rng, n: usize) -> Vec<(AlgebraElement, TangentPoint)> {
    (0..n)
        .map(|_| {
            let l = 0.5 * algebra_element(rng);
            let p = [
                rng.random_range(-1.5..1.5),
                rng.random_range(-1.5..-0.3),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            ];
            (l, TangentPoint::from_array(p).expect("θ₂ < 0"))
        })
        .collect()
}

fn wave_norm(rng: &mut ChaCha8Rng, par: Parallelism) -> Outcome {
    let cases = flow_cases(rng, 5);
    let r = par.max(&cases, |(l, p)| match integrate_flow(l, p, 1.0, 1e-3) {
        Ok(traj) if traj.escaped_at().is_none() => schrodinger_evolve(&traj)
            .samples
            .iter()
            .map(|s| inner_product(&s.wave, &s.wave).map_or(f64::NAN, |n| (n - 1.0).norm()))
            .fold(0.0, nan_max),
        _ => f64::NAN,
    });
    (cases.len(), r)
}

fn energy_conservation(rng: &mut ChaCha8Rng, par: Parallelism) -> Outcome {
    let pts: Vec<TangentPoint> = flow_cases(rng, 5).into_iter().map(|(_, p)| p).collect();
    let cases: Vec<_> = pts.iter().flat_map(|p| basis_elements().map(|l| (l, *p))).collect();
    let r = par.max(&cases, |(l, p)| match integrate_flow(l, p, 1.0, 1e-3) {
        Ok(traj) if traj.escaped_at().is_none() => traj.energy_drift(),
        _ => f64::NAN,
    });
    (cases.len(), r)
}

fn flow_action_consistency(rng: &mut ChaCha8Rng, par: Parallelism) -> Outcome {
    let cases = flow_cases(rng, 20);
    let t = 0.5;
    let r = par.max(&cases, |(l, p)| {
        let end = match integrate_flow(l, p, t, 1e-3) {
            Ok(traj) if traj.escaped_at().is_none() => traj.last().1,
            _ => return f64::NAN,
        };
        crate::siegel_jacobi::tangent_action(&AspElement::from(&GroupElement::exp(l, t)), p)
            .map_or(f64::NAN, |q| (q.as_vector() - end.as_vector()).abs().max())
    });
    (cases.len(), r)
}

fn flow_isometry(rng: &mut ChaCha8Rng, par: Parallelism) -> Outcome {
    let cases: Vec<_> = flow_cases(rng, 6)
        .into_iter()
        .enumerate()
        .map(|(i, (_, p))| (AlgebraElement::basis(Basis::ALL[i % 6]), p))
        .collect();
    let t = 0.5;
    let r = par.max(&cases, |(l, p)| {
        let flow = |x: [f64; 4]| -> Option<Vector4<f64>> {
            let traj = integrate_flow(l, &TangentPoint::from_array(x).ok()?, t, 1e-3).ok()?;
            traj.escaped_at().is_none().then(|| traj.last().1.as_vector())
        };
        let x = p.as_array();
        let h = 1e-5;
        let mut jac = Matrix4::zeros();
        for j in 0..4 {
            let (mut up, mut dn) = (x, x);
            up[j] += h;
            dn[j] -= h;
            match (flow(up), flow(dn)) {
                (Some(a), Some(b)) => jac.set_column(j, &((a - b) / (2.0 * h))),
                _ => return f64::NAN,
            }
        }
        let end = match flow(x).and_then(|v| TangentPoint::from_slice(v.as_slice()).ok()) {
            Some(e) => e,
            None => return f64::NAN,
        };
        let g0 = kahler_tensors(p, TangentChart::Natural).g;
        let g1 = kahler_tensors(&end, TangentChart::Natural).g;
        relative((jac.transpose() * g1 * jac - g0).abs().max(), g0.abs().max())
    });
    (cases.len(), r)
}
