//! Dense complex polynomials in ascending coefficient order, and the
//! Aberth–Ehrlich simultaneous root finder.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

pub const ABERTH_MAX_ITER: usize = 200;
/// Backward-error target of each root.
pub const ABERTH_TOL: f64 = 1e-12;

/// `p(z)` by Horner's rule.
pub fn eval(p: &[C64], z: C64) -> C64 {
    p.iter().rev().fold(ZERO, |acc, &c| acc * z + c)
}

/// `sum |p_i| |z|^i`, the scale of the rounding error of [`eval`].
pub fn eval_scale(p: &[C64], z: C64) -> f64 {
    let r = z.norm();
    p.iter().rev().fold(0.0, |acc, c| acc * r + c.norm())
}

pub fn mul(a: &[C64], b: &[C64]) -> Vec<C64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![ZERO; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Taylor coefficients of `p` about `z`, truncated to `len` terms.
pub fn shifted(p: &[C64], z: C64, len: usize) -> Vec<C64> {
    let mut c = p.to_vec();
    // Repeated synthetic division.
    let n = c.len();
    for k in 0..n.min(len) {
        for i in (k..n - 1).rev() {
            let t = c[i + 1] * z;
            c[i] += t;
        }
    }
    c.resize(len, ZERO);
    c
}

/// Drops trailing coefficients with `|p_i| <= rel * max |p|`.
pub fn trimmed(p: &[C64], rel: f64) -> &[C64] {
    let big = p.iter().fold(0.0f64, |m, c| m.max(c.norm()));
    let mut n = p.len();
    while n > 1 && p[n - 1].norm() <= rel * big {
        n -= 1;
    }
    &p[..n]
}

/// Polynomial quotient and remainder.
pub fn divrem(num: &[C64], den: &[C64]) -> (Vec<C64>, Vec<C64>) {
    let dn = den.len() - 1;
    if num.len() <= dn {
        return (Vec::new(), num.to_vec());
    }
    let mut r = num.to_vec();
    let mut q = vec![ZERO; num.len() - dn];
    let lead = den[dn];
    for k in (0..q.len()).rev() {
        let c = r[k + dn] / lead;
        q[k] = c;
        for (i, d) in den.iter().enumerate() {
            r[k + i] -= c * d;
        }
    }
    r.truncate(dn);
    (q, r)
}

/// All roots of `p` (leading coefficient nonzero) by the Aberth–Ehrlich
/// iteration started from a circle of radius `1.2 |p_0/p_n|^(1/n)`.
pub fn roots(p: &[C64]) -> Result<Vec<C64>> {
    let n = p.len().saturating_sub(1);
    if n == 0 {
        return Ok(Vec::new());
    }
    if p[n] == ZERO {
        return Err(Error::usage("leading coefficient is zero"));
    }
    if n == 1 {
        return Ok(vec![-p[0] / p[1]]);
    }
    let dp: Vec<C64> = p[1..].iter().enumerate().map(|(i, c)| c * (i + 1) as f64).collect();
    let mut r = 1.2 * (p[0] / p[n]).norm().powf(1.0 / n as f64);
    if !(r > 0.0 && r.is_finite()) {
        r = 1.0;
    }
    let mut z: Vec<C64> = (0..n)
        .map(|k| C64::from_polar(r, 2.0 * std::f64::consts::PI * k as f64 / n as f64 + 0.4))
        .collect();
    let mut done = vec![false; n];
    for _ in 0..ABERTH_MAX_ITER {
        let mut all = true;
        for k in 0..n {
            if done[k] {
                continue;
            }
            let v = eval(p, z[k]);
            if v.norm() <= ABERTH_TOL * eval_scale(p, z[k]) {
                done[k] = true;
                continue;
            }
            all = false;
            let ratio = v / eval(&dp, z[k]);
            let sum: C64 = (0..n).filter(|&j| j != k).map(|j| 1.0 / (z[k] - z[j])).sum();
            let w = ratio / (1.0 - ratio * sum);
            if !(w.re.is_finite() && w.im.is_finite()) {
                return Err(Error::RootFinder { iterations: ABERTH_MAX_ITER });
            }
            z[k] -= w;
            if w.norm() <= 4.0 * f64::EPSILON * z[k].norm() {
                done[k] = true;
            }
        }
        if all {
            return Ok(z);
        }
    }
    Err(Error::RootFinder { iterations: ABERTH_MAX_ITER })
}
