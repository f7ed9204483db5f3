//! Truncated Taylor series ("jets") in the angular frequency.
//!
//! A [`Jet`] of order `n` about a centre `w0` stores the *scaled* Taylor
//! coefficients `f^(i)(w0) / i!` for `i = 0..=n`. Arithmetic on jets is
//! forward-mode automatic differentiation: every operation propagates all
//! derivatives up to order `n` exactly (up to rounding).
//!
//! The slice kernels in [`series`] do the actual work and are used directly
//! by the hot loops of the Green-function evaluator, which cannot afford one
//! allocation per operation.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported jet order: `2(M+N)` with `M, N <= 10`.
pub const MAX_ORDER: usize = 40;

/// Coefficient-slice kernels for truncated power series.
///
/// All kernels truncate to `out.len()` coefficients; inputs must be at least
/// that long.
pub mod series {
    use num_complex::Complex64 as C64;

    /// `out = a * b` (truncated Cauchy product).
    #[inline]
    pub fn mul_into(a: &[C64], b: &[C64], out: &mut [C64]) {
        for k in 0..out.len() {
            let mut s = C64::new(0.0, 0.0);
            for j in 0..=k {
                s += a[j] * b[k - j];
            }
            out[k] = s;
        }
    }

    /// `out += a * b`.
    #[inline]
    pub fn mul_acc(a: &[C64], b: &[C64], out: &mut [C64]) {
        for k in 0..out.len() {
            let mut s = C64::new(0.0, 0.0);
            for j in 0..=k {
                s += a[j] * b[k - j];
            }
            out[k] += s;
        }
    }

    /// `out = a / b` by forward substitution. Returns `false` if `b[0] == 0`.
    pub fn div_into(a: &[C64], b: &[C64], out: &mut [C64]) -> bool {
        if b[0] == C64::new(0.0, 0.0) {
            return false;
        }
        let inv = 1.0 / b[0];
        for k in 0..out.len() {
            let mut s = a[k];
            for j in 1..=k {
                s -= b[j] * out[k - j];
            }
            out[k] = s * inv;
        }
        true
    }

    /// `out = exp(a)`.
    pub fn exp_into(a: &[C64], out: &mut [C64]) {
        out[0] = a[0].exp();
        for k in 1..out.len() {
            let mut s = C64::new(0.0, 0.0);
            for j in 1..=k {
                s += a[j] * out[k - j] * j as f64;
            }
            out[k] = s / k as f64;
        }
    }

    /// `out = sqrt(a)` on the principal branch of the value part.
    /// Returns `false` at the branch point `a[0] == 0`.
    pub fn sqrt_into(a: &[C64], out: &mut [C64]) -> bool {
        if a[0] == C64::new(0.0, 0.0) {
            return false;
        }
        out[0] = a[0].sqrt();
        let inv2 = 0.5 / out[0];
        for k in 1..out.len() {
            let mut s = a[k];
            for j in 1..k {
                s -= out[j] * out[k - j];
            }
            out[k] = s * inv2;
        }
        true
    }

    /// `out = a^p` (principal branch). Returns `false` if `a[0] == 0`.
    pub fn pow_into(a: &[C64], p: f64, out: &mut [C64]) -> bool {
        if a[0] == C64::new(0.0, 0.0) {
            return false;
        }
        out[0] = a[0].powf(p);
        let inv = 1.0 / a[0];
        for k in 1..out.len() {
            let mut s = C64::new(0.0, 0.0);
            for j in 1..=k {
                s += a[j] * out[k - j] * (p * j as f64 - (k - j) as f64);
            }
            out[k] = s * inv / k as f64;
        }
        true
    }

    /// `(sin a, cos a)`.
    pub fn sin_cos_into(a: &[C64], sin: &mut [C64], cos: &mut [C64]) {
        sin[0] = a[0].sin();
        cos[0] = a[0].cos();
        for k in 1..sin.len() {
            let mut s = C64::new(0.0, 0.0);
            let mut c = C64::new(0.0, 0.0);
            for j in 1..=k {
                let w = a[j] * j as f64;
                s += w * cos[k - j];
                c -= w * sin[k - j];
            }
            sin[k] = s / k as f64;
            cos[k] = c / k as f64;
        }
    }

    /// Composition `out = F(a)` given `F(a[0])` and the jet of `F'(a)`
    /// (which needs `out.len() - 1` valid coefficients).
    pub fn compose_into(a: &[C64], value: C64, dfa: &[C64], out: &mut [C64]) {
        out[0] = value;
        for k in 1..out.len() {
            let mut s = C64::new(0.0, 0.0);
            for j in 1..=k {
                s += a[j] * dfa[k - j] * j as f64;
            }
            out[k] = s / k as f64;
        }
    }

    /// Scaled Taylor coefficients of `x^p` about `x0` (integer `p >= 0`).
    pub fn monomial(x0: f64, p: u32, out: &mut [f64]) {
        let mut binom = 1.0;
        for (i, o) in out.iter_mut().enumerate() {
            if i as u32 > p {
                *o = 0.0;
                continue;
            }
            *o = binom * x0.powi((p - i as u32) as i32);
            binom *= (p - i as u32) as f64 / (i + 1) as f64;
        }
    }
}

/// Supported univariate lifts for [`Jet::lift`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Lift {
    Exp,
    Sqrt,
    Sin,
    Cos,
    Erfc,
    Pow(f64),
}

/// Truncated Taylor series of a complex function of the angular frequency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Jet {
    centre: f64,
    coeffs: Vec<C64>,
}

impl Jet {
    /// Builds a jet from scaled coefficients `f^(i)/i!`.
    pub fn new(centre: f64, coeffs: Vec<C64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::usage("a jet needs at least one coefficient"));
        }
        if coeffs.len() > MAX_ORDER + 1 {
            return Err(Error::usage(format!(
                "jet order {} exceeds the supported maximum {MAX_ORDER}",
                coeffs.len() - 1
            )));
        }
        Ok(Self { centre, coeffs })
    }

    /// Builds a jet from raw derivatives `f^(i)`.
    pub fn from_derivatives(centre: f64, derivs: &[C64]) -> Result<Self> {
        let mut fact = 1.0;
        let coeffs = derivs
            .iter()
            .enumerate()
            .map(|(i, d)| {
                if i > 0 {
                    fact *= i as f64;
                }
                d / fact
            })
            .collect();
        Self::new(centre, coeffs)
    }

    pub fn constant(centre: f64, order: usize, value: C64) -> Self {
        assert!(order <= MAX_ORDER, "jet order {order} > {MAX_ORDER}");
        let mut coeffs = vec![C64::new(0.0, 0.0); order + 1];
        coeffs[0] = value;
        Self { centre, coeffs }
    }

    pub fn zero(centre: f64, order: usize) -> Self {
        Self::constant(centre, order, C64::new(0.0, 0.0))
    }

    /// The independent variable `f(w) = w` expanded about `centre`.
    pub fn variable(centre: f64, order: usize) -> Self {
        let mut j = Self::constant(centre, order, C64::new(centre, 0.0));
        if order >= 1 {
            j.coeffs[1] = C64::new(1.0, 0.0);
        }
        j
    }

    /// `scale * w + offset` as a jet.
    pub fn affine(centre: f64, order: usize, scale: C64, offset: C64) -> Self {
        let mut j = Self::constant(centre, order, scale * centre + offset);
        if order >= 1 {
            j.coeffs[1] = scale;
        }
        j
    }

    pub fn centre(&self) -> f64 {
        self.centre
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [C64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<C64> {
        self.coeffs
    }

    pub fn value(&self) -> C64 {
        self.coeffs[0]
    }

    /// Raw derivative `f^(i)(centre) = i! * coeffs[i]`.
    pub fn derivative(&self, i: usize) -> C64 {
        self.coeffs[i] * factorial(i)
    }

    pub fn derivatives(&self) -> Vec<C64> {
        (0..self.coeffs.len()).map(|i| self.derivative(i)).collect()
    }

    /// Evaluates the truncated Taylor polynomial at `omega`.
    pub fn eval(&self, omega: f64) -> C64 {
        let dx = omega - self.centre;
        self.coeffs
            .iter()
            .rev()
            .fold(C64::new(0.0, 0.0), |acc, &c| acc * dx + c)
    }

    /// Drops coefficients above `order`.
    pub fn truncate(&self, order: usize) -> Jet {
        let n = order.min(self.order());
        Self {
            centre: self.centre,
            coeffs: self.coeffs[..=n].to_vec(),
        }
    }

    fn check(&self, other: &Jet) -> Result<()> {
        if self.coeffs.len() != other.coeffs.len() {
            return Err(Error::usage(format!(
                "jet order mismatch: {} vs {}",
                self.order(),
                other.order()
            )));
        }
        if self.centre != other.centre {
            return Err(Error::usage(format!(
                "jet centre mismatch: {} vs {}",
                self.centre, other.centre
            )));
        }
        Ok(())
    }

    fn with_coeffs(&self, coeffs: Vec<C64>) -> Jet {
        Jet {
            centre: self.centre,
            coeffs,
        }
    }

    pub fn checked_add(&self, other: &Jet) -> Result<Jet> {
        self.check(other)?;
        Ok(self.with_coeffs(
            self.coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        ))
    }

    pub fn checked_sub(&self, other: &Jet) -> Result<Jet> {
        self.check(other)?;
        Ok(self.with_coeffs(
            self.coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a - b)
                .collect(),
        ))
    }

    pub fn checked_mul(&self, other: &Jet) -> Result<Jet> {
        self.check(other)?;
        let mut out = vec![C64::new(0.0, 0.0); self.coeffs.len()];
        series::mul_into(&self.coeffs, &other.coeffs, &mut out);
        Ok(self.with_coeffs(out))
    }

    pub fn checked_div(&self, other: &Jet) -> Result<Jet> {
        self.check(other)?;
        let mut out = vec![C64::new(0.0, 0.0); self.coeffs.len()];
        if !series::div_into(&self.coeffs, &other.coeffs, &mut out) {
            return Err(Error::DivisionByZero);
        }
        Ok(self.with_coeffs(out))
    }

    pub fn scale(&self, c: C64) -> Jet {
        self.with_coeffs(self.coeffs.iter().map(|a| a * c).collect())
    }

    pub fn add_scalar(&self, c: C64) -> Jet {
        let mut out = self.clone();
        out.coeffs[0] += c;
        out
    }

    /// `1 / self`.
    pub fn recip(&self) -> Result<Jet> {
        Jet::constant(self.centre, self.order(), C64::new(1.0, 0.0)).checked_div(self)
    }

    /// Conjugate jet. Valid because the expansion variable is real.
    pub fn conj(&self) -> Jet {
        self.with_coeffs(self.coeffs.iter().map(|a| a.conj()).collect())
    }

    /// `|f|^2 = f * conj(f)` as a jet.
    pub fn abs_sqr(&self) -> Jet {
        let conj = self.conj();
        let mut out = vec![C64::new(0.0, 0.0); self.coeffs.len()];
        series::mul_into(&self.coeffs, &conj.coeffs, &mut out);
        self.with_coeffs(out)
    }

    pub fn lift(&self, f: Lift) -> Result<Jet> {
        let n = self.coeffs.len();
        let mut out = vec![C64::new(0.0, 0.0); n];
        match f {
            Lift::Exp => series::exp_into(&self.coeffs, &mut out),
            Lift::Sqrt => {
                if !series::sqrt_into(&self.coeffs, &mut out) {
                    return Err(Error::BranchPoint("sqrt of a jet with zero value".into()));
                }
            }
            Lift::Pow(p) => {
                if !series::pow_into(&self.coeffs, p, &mut out) {
                    return Err(Error::BranchPoint("power of a jet with zero value".into()));
                }
            }
            Lift::Sin | Lift::Cos => {
                let mut other = vec![C64::new(0.0, 0.0); n];
                series::sin_cos_into(&self.coeffs, &mut out, &mut other);
                if f == Lift::Cos {
                    out = other;
                }
            }
            Lift::Erfc => crate::specfun::erfc_series(&self.coeffs, &mut out),
        }
        Ok(self.with_coeffs(out))
    }

    pub fn exp(&self) -> Jet {
        self.lift(Lift::Exp).expect("exp lift is total")
    }

    pub fn sqrt(&self) -> Result<Jet> {
        self.lift(Lift::Sqrt)
    }

    pub fn erfc(&self) -> Jet {
        self.lift(Lift::Erfc).expect("erfc lift is total")
    }

    /// Largest coefficient magnitude.
    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

/// `i!` as a float.
pub fn factorial(i: usize) -> f64 {
    (1..=i).fold(1.0, |acc, k| acc * k as f64)
}

impl Add for &Jet {
    type Output = Jet;
    fn add(self, rhs: &Jet) -> Jet {
        self.checked_add(rhs).expect("jet addition")
    }
}

impl Sub for &Jet {
    type Output = Jet;
    fn sub(self, rhs: &Jet) -> Jet {
        self.checked_sub(rhs).expect("jet subtraction")
    }
}

impl Mul for &Jet {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        self.checked_mul(rhs).expect("jet multiplication")
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(C64::new(-1.0, 0.0))
    }
}
