//! Finite-difference Levi-Civita machinery for an arbitrary metric given as
//! a closure. Used as an independent oracle against the closed forms.

use std::ops::{Index, IndexMut};

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Rank-3 array indexed `(a, b, c)`. Christoffel symbols are stored as
/// `(k, i, j)` for Γᵏᵢⱼ.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor3 {
    dim: usize,
    data: Vec<f64>,
}

impl Tensor3 {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![0.0; dim * dim * dim],
        }
    }

    pub fn from_fn(dim: usize, f: impl Fn(usize, usize, usize) -> f64) -> Self {
        let mut t = Self::zeros(dim);
        for a in 0..dim {
            for b in 0..dim {
                for c in 0..dim {
                    t[(a, b, c)] = f(a, b, c);
                }
            }
        }
        t
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn max_abs_diff(&self, other: &Tensor3) -> f64 {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|x| x.abs()).fold(0.0, f64::max)
    }

    pub fn scale(&self, s: f64) -> Tensor3 {
        Tensor3 {
            dim: self.dim,
            data: self.data.iter().map(|x| x * s).collect(),
        }
    }
}

impl Index<(usize, usize, usize)> for Tensor3 {
    type Output = f64;
    fn index(&self, (a, b, c): (usize, usize, usize)) -> &f64 {
        &self.data[(a * self.dim + b) * self.dim + c]
    }
}

impl IndexMut<(usize, usize, usize)> for Tensor3 {
    fn index_mut(&mut self, (a, b, c): (usize, usize, usize)) -> &mut f64 {
        &mut self.data[(a * self.dim + b) * self.dim + c]
    }
}

/// Riemann tensor `R^a_{bcd}`, so that `R(∂c, ∂d)∂b = R^a_{bcd} ∂a`.
#[derive(Debug, Clone, PartialEq)]
pub struct Riemann {
    dim: usize,
    data: Vec<f64>,
}

impl Riemann {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, a: usize, b: usize, c: usize, d: usize) -> f64 {
        let n = self.dim;
        self.data[((a * n + b) * n + c) * n + d]
    }

    /// `R_{abcd} = g_{ae} R^e_{bcd}`.
    pub fn lowered(&self, metric: &DMatrix<f64>, a: usize, b: usize, c: usize, d: usize) -> f64 {
        (0..self.dim).map(|e| metric[(a, e)] * self.get(e, b, c, d)).sum()
    }

    /// `Ric_{bd} = R^a_{bad}`.
    pub fn ricci(&self) -> DMatrix<f64> {
        let n = self.dim;
        DMatrix::from_fn(n, n, |b, d| (0..n).map(|a| self.get(a, b, a, d)).sum())
    }
}

fn shifted(x: &[f64], axis: usize, delta: f64) -> Vec<f64> {
    let mut y = x.to_vec();
    y[axis] += delta;
    y
}

fn finite_or_err(offset_axis: usize, delta: f64, dim: usize, v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        let mut offset = vec![0.0; dim];
        offset[offset_axis] = delta;
        Err(Error::Evaluation { offset })
    }
}

/// Γᵏᵢⱼ = ½ g^{kl}(∂ᵢg_{jl} + ∂ⱼg_{il} − ∂ₗg_{ij}) with the metric
/// derivatives taken by central differences.
pub fn christoffels_from_metric<M>(metric: M, x: &[f64], step: f64) -> Result<Tensor3>
where
    M: Fn(&[f64]) -> Result<DMatrix<f64>>,
{
    let n = x.len();
    let g = metric(x)?;
    let g_inv = g
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::InvalidParameter("metric is singular".into()))?;
    // dg[(a, i, j)] = ∂ₐ g_ij
    let mut dg = Tensor3::zeros(n);
    for a in 0..n {
        let gp = metric(&shifted(x, a, step))?;
        let gm = metric(&shifted(x, a, -step))?;
        for i in 0..n {
            for j in 0..n {
                let v = (gp[(i, j)] - gm[(i, j)]) / (2.0 * step);
                dg[(a, i, j)] = finite_or_err(a, step, n, v)?;
            }
        }
    }
    Ok(Tensor3::from_fn(n, |k, i, j| {
        0.5 * (0..n)
            .map(|l| g_inv[(k, l)] * (dg[(i, j, l)] + dg[(j, i, l)] - dg[(l, i, j)]))
            .sum::<f64>()
    }))
}

/// Riemann tensor from a Christoffel field; derivatives of Γ by central
/// differences with the given step.
pub fn riemann<C>(christoffels: C, x: &[f64], step: f64) -> Result<Riemann>
where
    C: Fn(&[f64]) -> Result<Tensor3>,
{
    let n = x.len();
    let gamma = christoffels(x)?;
    // d_gamma[c] = ∂_c Γ
    let d_gamma = (0..n)
        .map(|c| {
            let gp = christoffels(&shifted(x, c, step))?;
            let gm = christoffels(&shifted(x, c, -step))?;
            Ok(Tensor3::from_fn(n, |a, b, e| {
                (gp[(a, b, e)] - gm[(a, b, e)]) / (2.0 * step)
            }))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut data = vec![0.0; n * n * n * n];
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    let mut v = d_gamma[c][(a, d, b)] - d_gamma[d][(a, c, b)];
                    for e in 0..n {
                        v += gamma[(a, c, e)] * gamma[(e, d, b)]
                            - gamma[(a, d, e)] * gamma[(e, c, b)];
                    }
                    data[((a * n + b) * n + c) * n + d] = v;
                }
            }
        }
    }
    Ok(Riemann { dim: n, data })
}

/// `g^{bd} Ric_{bd}`.
pub fn scalar_from_ricci(ricci: &DMatrix<f64>, metric: &DMatrix<f64>) -> Result<f64> {
    let g_inv = metric
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::InvalidParameter("metric is singular".into()))?;
    Ok((g_inv * ricci).trace())
}

/// Entirely numeric scalar curvature: nested central differences on the
/// metric closure.
pub fn scalar_curvature_fd<M>(metric: M, x: &[f64], step: f64) -> Result<f64>
where
    M: Fn(&[f64]) -> Result<DMatrix<f64>>,
{
    let riem = riemann(|y| christoffels_from_metric(&metric, y, step), x, step)?;
    scalar_from_ricci(&riem.ricci(), &metric(x)?)
}

/// Sectional curvature of a 2-dimensional metric, `R_{1212} / det g`.
pub fn surface_curvature(riem: &Riemann, metric: &DMatrix<f64>) -> f64 {
    assert_eq!(riem.dim(), 2, "surface curvature needs a 2-dimensional metric");
    riem.lowered(metric, 0, 1, 0, 1) / metric.determinant()
}
