pub mod average;
pub mod bem;
pub mod error;
pub mod exec;
pub mod farfield;
pub mod greens;
pub mod jets;
pub mod linalg;
pub mod pade;
pub mod poly;
pub mod quadrature;
pub mod reference;
pub mod specfun;
pub mod sweep;

pub use error::{Error, Result};
