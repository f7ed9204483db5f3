//! Dense complex LU factorization: LAPACK `zgetrf`/`zgetrs` from the system
//! OpenBLAS with the `openblas` feature, nalgebra otherwise.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

#[cfg(feature = "openblas")]
#[link(name = "openblas")]
extern "C" {}

/// LU factors of a square matrix.
pub struct LuFactor {
    #[cfg(feature = "openblas")]
    a: DMatrix<C64>,
    #[cfg(feature = "openblas")]
    ipiv: Vec<i32>,
    #[cfg(not(feature = "openblas"))]
    lu: nalgebra::LU<C64, nalgebra::Dyn, nalgebra::Dyn>,
}

impl LuFactor {
    /// Factors `a`; `omega` only labels the error.
    pub fn new(a: DMatrix<C64>, omega: f64) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::usage("LU needs a square matrix"));
        }
        Self::factor(a, omega)
    }

    #[cfg(feature = "openblas")]
    fn factor(mut a: DMatrix<C64>, omega: f64) -> Result<Self> {
        let n = a.nrows() as i32;
        let mut ipiv = vec![0i32; a.nrows()];
        let mut info = 0;
        // SAFETY: `a` is column-major with leading dimension n; `ipiv` has n slots.
        unsafe {
            lapack_sys::zgetrf_(&n, &n, a.as_mut_ptr() as *mut _, &n, ipiv.as_mut_ptr(), &mut info);
        }
        if info != 0 {
            return Err(Error::SingularMatrix { omega });
        }
        Ok(Self { a, ipiv })
    }

    #[cfg(not(feature = "openblas"))]
    fn factor(a: DMatrix<C64>, omega: f64) -> Result<Self> {
        let lu = a.lu();
        if !lu.is_invertible() {
            return Err(Error::SingularMatrix { omega });
        }
        Ok(Self { lu })
    }

    #[cfg(feature = "openblas")]
    pub fn solve(&self, b: &DVector<C64>) -> DVector<C64> {
        let n = self.a.nrows() as i32;
        let mut x = b.clone();
        let mut info = 0;
        let trans = b'N' as std::ffi::c_char;
        let one = 1;
        // SAFETY: factors and pivots come from zgetrf on an n x n matrix; x has n rows.
        unsafe {
            lapack_sys::zgetrs_(
                &trans,
                &n,
                &one,
                self.a.as_ptr() as *const _,
                &n,
                self.ipiv.as_ptr(),
                x.as_mut_ptr() as *mut _,
                &n,
                &mut info,
            );
        }
        debug_assert_eq!(info, 0);
        x
    }

    #[cfg(not(feature = "openblas"))]
    pub fn solve(&self, b: &DVector<C64>) -> DVector<C64> {
        self.lu.solve(b).expect("invertibility checked at factorization")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_small_system() {
        let a = DMatrix::from_row_slice(
            3,
            3,
            &[
                C64::new(2.0, 1.0),
                C64::new(0.0, 0.0),
                C64::new(1.0, 0.0),
                C64::new(1.0, -1.0),
                C64::new(3.0, 0.0),
                C64::new(0.0, 2.0),
                C64::new(0.0, 0.0),
                C64::new(1.0, 0.0),
                C64::new(4.0, 0.0),
            ],
        );
        let x = DVector::from_vec(vec![C64::new(1.0, 0.0), C64::new(0.0, 1.0), C64::new(-1.0, 2.0)]);
        let b = &a * &x;
        let lu = LuFactor::new(a, 1.0).unwrap();
        assert!((lu.solve(&b) - x).norm() < 1e-14);
    }

    #[test]
    fn singular_matrix_is_reported() {
        let a = DMatrix::from_element(2, 2, C64::new(1.0, 0.0));
        assert!(matches!(LuFactor::new(a, 0.5), Err(Error::SingularMatrix { .. })));
    }
}
