//! Special functions for the free-space and Ewald-split Green functions.

mod bessel;
mod expint;
mod faddeeva;

pub use bessel::{bessel_j01, bessel_jn_y01, bessel_y01, hankel1};
pub use expint::{expint, expint_sequence};
pub use faddeeva::{erfc, erfc_series, faddeeva};

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
