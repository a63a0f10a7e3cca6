//! Data-parallel evaluation over sample sets. Without the `parallel`
//! feature every mode runs sequentially.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parallelism {
    Sequential,
    Parallel,
}

impl Default for Parallelism {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Parallelism::Parallel
        } else {
            Parallelism::Sequential
        }
    }
}

impl Parallelism {
    /// Ordered map; results come back in input order in both modes.
    pub fn map<T, R, F>(self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Parallelism::Parallel => {
                use rayon::prelude::*;
                items.par_iter().map(f).collect()
            }
            _ => items.iter().map(f).collect(),
        }
    }

    /// `max f(item)`, `0` on an empty set, NaN-propagating.
    pub fn max<T, F>(self, items: &[T], f: F) -> f64
    where
        T: Sync,
        F: Fn(&T) -> f64 + Sync + Send,
    {
        self.map(items, f).into_iter().fold(0.0, nan_max)
    }
}

/// Like `f64::max` but a NaN wins, so a broken sample never hides.
pub fn nan_max(a: f64, b: f64) -> f64 {
    if a.is_nan() || b.is_nan() {
        f64::NAN
    } else {
        a.max(b)
    }
}
