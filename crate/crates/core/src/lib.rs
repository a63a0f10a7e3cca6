#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(a < b)` rejects NaN on purpose

pub mod dombrowski;
pub mod dynamics;
pub mod error;
pub mod extrinsic;
pub mod gaussian_family;
pub mod jacobi_group;
pub mod levi_civita;
pub mod momentum;
pub mod numerics;
pub mod parallel;
pub mod siegel_jacobi;
pub mod verify;

pub use error::{Error, Result};
