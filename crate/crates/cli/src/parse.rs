//! Value parsers for command-line arguments.

use anyhow::{anyhow, bail, Context, Result};
use gaussian_kahler::jacobi_group::{AlgebraElement, GroupElement};
use gaussian_kahler::numerics::Interval;
use gaussian_kahler::Error;

pub fn floats<const N: usize>(s: &str) -> Result<[f64; N]> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != N {
        bail!("expected {N} comma-separated numbers, got {}", parts.len());
    }
    let mut out = [0.0; N];
    for (slot, part) in out.iter_mut().zip(&parts) {
        *slot = part.parse().with_context(|| format!("bad number `{part}`"))?;
    }
    Ok(out)
}

/// Algebra element; parse failures point at the offending character.
pub fn generator(s: &str) -> Result<AlgebraElement> {
    s.parse().map_err(|e| match e {
        Error::Parse { position, .. } => {
            let column = s[..position.min(s.len())].chars().count();
            anyhow!("{e}\n  {s}\n  {}^", " ".repeat(column))
        }
        other => anyhow!(other),
    })
}

/// `a,b,c,d,lambda,mu,kappa`
pub fn group_element(s: &str) -> Result<GroupElement> {
    let [a, b, c, d, lambda, mu, kappa] = floats::<7>(s)?;
    Ok(GroupElement::from_entries(a, b, c, d, lambda, mu, kappa)?)
}

fn endpoint(s: &str) -> Result<f64> {
    match s.trim() {
        "inf" | "+inf" => Ok(f64::INFINITY),
        "-inf" => Ok(f64::NEG_INFINITY),
        t => t.parse().with_context(|| format!("bad endpoint `{t}`")),
    }
}

/// `[a,b]`, `(a,b)`, `(-inf,b]`, `{v}` or bare `a,b`. Brackets are accepted
/// in either style but every interval is treated as closed.
pub fn interval(s: &str) -> Result<Interval> {
    let t = s.trim();
    if let Some(inner) = t.strip_prefix('{').and_then(|r| r.strip_suffix('}')) {
        return Ok(Interval::point(endpoint(inner)?));
    }
    let inner = t
        .strip_prefix(['[', '('])
        .and_then(|r| r.strip_suffix([']', ')']))
        .unwrap_or(t);
    let (lo, hi) = inner
        .split_once(',')
        .ok_or_else(|| anyhow!("interval `{t}` needs two endpoints"))?;
    Ok(Interval::new(endpoint(lo)?, endpoint(hi)?)?)
}

/// `name=value` tolerance override.
pub fn tolerance(s: &str) -> Result<(String, f64)> {
    let (name, value) = s.split_once('=').ok_or_else(|| anyhow!("expected name=value, got `{s}`"))?;
    let value: f64 = value.trim().parse().with_context(|| format!("bad tolerance `{value}`"))?;
    if !(value >= 0.0) {
        bail!("tolerance must be non-negative, got {value}");
    }
    Ok((name.trim().to_string(), value))
}
