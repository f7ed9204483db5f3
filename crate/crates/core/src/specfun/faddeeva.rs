//! Faddeeva function `w(z) = e^{-z^2} erfc(-iz)` and the complex `erfc`.
//!
//! Inside `|z| < 8` (upper half plane) Weideman's rational expansion with 40
//! terms; outside, the Laplace continued fraction. The lower half plane is
//! reached through `w(z) = 2 e^{-z^2} - w(-z)`.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64 as C64;

use crate::jets::{series, MAX_ORDER};

const WEIDEMAN_N: usize = 40;
const CF_FROM: f64 = 8.0;
const CF_TERMS: usize = 24;
const FRAC_1_SQRT_PI: f64 = 0.564_189_583_547_756_3;

struct Weideman {
    l: f64,
    coeffs: [f64; WEIDEMAN_N],
}

fn weideman() -> &'static Weideman {
    static TABLE: OnceLock<Weideman> = OnceLock::new();
    TABLE.get_or_init(|| {
        let n = WEIDEMAN_N;
        let m = 2 * n;
        let m2 = 2 * m;
        let l = (n as f64 / 2f64.sqrt()).sqrt();
        // Samples at theta_k = k pi / M, k = -M+1..M-1, with a leading zero,
        // then rotated by M (the fftshift of the reference algorithm).
        let mut f = vec![0.0; m2];
        for (idx, k) in (-(m as i64) + 1..m as i64).enumerate() {
            let t = l * (k as f64 * PI / m as f64 / 2.0).tan();
            f[idx + 1] = (-t * t).exp() * (l * l + t * t);
        }
        let shifted: Vec<f64> = (0..m2).map(|i| f[(i + m) % m2]).collect();
        let mut coeffs = [0.0; WEIDEMAN_N];
        for (k, c) in coeffs.iter_mut().enumerate() {
            let freq = (k + 1) as f64;
            let s: f64 = shifted
                .iter()
                .enumerate()
                .map(|(j, v)| v * (2.0 * PI * freq * j as f64 / m2 as f64).cos())
                .sum();
            *c = s / m2 as f64;
        }
        Weideman { l, coeffs }
    })
}

fn w_upper(z: C64) -> C64 {
    let i = C64::new(0.0, 1.0);
    if z.norm() < CF_FROM {
        let tab = weideman();
        let l = C64::new(tab.l, 0.0);
        let den = l - i * z;
        let zz = (l + i * z) / den;
        let p = tab
            .coeffs
            .iter()
            .rev()
            .fold(C64::new(0.0, 0.0), |acc, &c| acc * zz + c);
        2.0 * p / (den * den) + FRAC_1_SQRT_PI / den
    } else {
        let mut r = C64::new(0.0, 0.0);
        for k in (1..=CF_TERMS).rev() {
            r = (k as f64 / 2.0) / (z - r);
        }
        i * FRAC_1_SQRT_PI / (z - r)
    }
}

/// Faddeeva function `w(z) = e^{-z^2} erfc(-iz)` for any complex `z`.
pub fn faddeeva(z: C64) -> C64 {
    if z.im >= 0.0 {
        w_upper(z)
    } else {
        2.0 * (-z * z).exp() - w_upper(-z)
    }
}

/// Complementary error function of complex argument.
pub fn erfc(z: C64) -> C64 {
    if z.re >= 0.0 {
        (-z * z).exp() * w_upper(C64::new(-z.im, z.re))
    } else {
        2.0 - erfc(-z)
    }
}

/// Jet lift of `erfc`: `out = erfc(a)` using `erfc' = -(2/sqrt(pi)) e^{-a^2}`.
pub fn erfc_series(a: &[C64], out: &mut [C64]) {
    let n = out.len();
    let value = erfc(a[0]);
    if n == 1 {
        out[0] = value;
        return;
    }
    let mut sq = [C64::new(0.0, 0.0); MAX_ORDER + 1];
    let mut d = [C64::new(0.0, 0.0); MAX_ORDER + 1];
    series::mul_into(a, a, &mut sq[..n - 1]);
    for v in sq[..n - 1].iter_mut() {
        *v = -*v;
    }
    series::exp_into(&sq[..n - 1], &mut d[..n - 1]);
    for v in d[..n - 1].iter_mut() {
        *v *= -2.0 * FRAC_1_SQRT_PI;
    }
    series::compose_into(a, value, &d[..n - 1], out);
}
