//! Hamiltonian flows of the momentum functions on the tangent bundle and the
//! Schrödinger evolution they induce through the wave-function embedding.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dombrowski::TangentPoint;
use crate::error::{Error, Result};
use crate::extrinsic::{kappa, psi_map, q_apply, WaveFunction};
use crate::gaussian_family::THETA2_GUARD;
use crate::jacobi_group::AlgebraElement;
use crate::momentum::{hamiltonian_field, kahler_value};
use crate::numerics::{cumulative_simpson, rk4_run, Grid1D};

pub const DEFAULT_DT: f64 = 1e-3;
pub const DEFAULT_T_END: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowTrajectory {
    samples: Vec<(f64, TangentPoint)>,
    generator: AlgebraElement,
    dt: f64,
    /// Time of the first step that would have left `θ₂ < 0`.
    escaped_at: Option<f64>,
}

impl FlowTrajectory {
    pub fn samples(&self) -> &[(f64, TangentPoint)] {
        &self.samples
    }

    pub fn generator(&self) -> &AlgebraElement {
        &self.generator
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn escaped_at(&self) -> Option<f64> {
        self.escaped_at
    }

    pub fn last(&self) -> (f64, TangentPoint) {
        *self.samples.last().expect("trajectory holds the initial point")
    }

    /// `max_t |J^L(p(t)) − J^L(p(0))|`.
    pub fn energy_drift(&self) -> f64 {
        let e0 = kahler_value(&self.generator, &self.samples[0].1);
        self.samples
            .iter()
            .map(|(_, p)| (kahler_value(&self.generator, p) - e0).abs())
            .fold(0.0, f64::max)
    }
}

/// RK4 integration of `X_{J^L}` from `p0` over `[0, t_end]`. A trajectory
/// running into `θ₂ → 0` is truncated and the escape time recorded.
pub fn integrate_flow(l: &AlgebraElement, p0: &TangentPoint, t_end: f64, dt: f64) -> Result<FlowTrajectory> {
    let field = |x: &nalgebra::Vector4<f64>| match TangentPoint::from_slice(x.as_slice()) {
        Ok(p) => hamiltonian_field(l, &p),
        Err(_) => nalgebra::Vector4::repeat(f64::NAN),
    };
    let run = rk4_run(field, p0.as_vector(), t_end, dt, |x| x[1] < -THETA2_GUARD)?;
    let samples = run
        .samples
        .into_iter()
        .map(|(t, x)| Ok((t, TangentPoint::from_slice(x.as_slice())?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(FlowTrajectory {
        samples,
        generator: *l,
        dt,
        escaped_at: run.escaped_at,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveSample {
    pub t: f64,
    /// `e^{iF(t)/2} Ψ(α(t))`
    pub wave: WaveFunction,
    /// `F(t) = ∫₀ᵗ κ(α(s), L) ds`
    pub phase: Complex64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveTrajectory {
    pub samples: Vec<WaveSample>,
    pub generator: AlgebraElement,
}

/// Wave functions along a flow, with the phase integral folded into `c0`.
pub fn schrodinger_evolve(traj: &FlowTrajectory) -> WaveTrajectory {
    let l = traj.generator();
    let ts: Vec<f64> = traj.samples().iter().map(|(t, _)| *t).collect();
    let ks: Vec<Complex64> = traj.samples().iter().map(|(_, p)| kappa(p, l)).collect();
    let phases = cumulative_simpson(&ts, &ks);
    let samples = traj
        .samples()
        .iter()
        .zip(phases)
        .map(|((t, p), phase)| WaveSample {
            t: *t,
            wave: psi_map(p).times_exp(Complex64::i() * phase * 0.5),
            phase,
        })
        .collect();
    WaveTrajectory { samples, generator: *l }
}

/// `max |i ∂ₜψ − ½Q(L)ψ|` over the grid and the interior samples, with
/// `∂ₜ` taken by central differences. Samples whose neighbours are not
/// equally spaced (a trailing partial step) are skipped.
pub fn schrodinger_residual(wave: &WaveTrajectory, grid: &Grid1D) -> Result<f64> {
    let s = &wave.samples;
    if s.len() < 3 {
        return Err(Error::InvalidParameter(format!(
            "residual needs at least 3 samples, got {}",
            s.len()
        )));
    }
    let i = Complex64::i();
    let mut worst: f64 = 0.0;
    for k in 1..s.len() - 1 {
        let (back, fwd) = (s[k].t - s[k - 1].t, s[k + 1].t - s[k].t);
        if (fwd - back).abs() > 1e-9 * back {
            continue;
        }
        let q = q_apply(&wave.generator, &s[k].wave);
        for x in grid.points() {
            let dpsi = (s[k + 1].wave.eval(x) - s[k - 1].wave.eval(x)) / (fwd + back);
            let r = i * dpsi - q.eval(x) * s[k].wave.eval(x) * 0.5;
            worst = worst.max(r.norm());
        }
    }
    Ok(worst)
}
