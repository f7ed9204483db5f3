//! Bessel functions J0, J1, Y0, Y1 of positive real argument.
//!
//! Below `ASYMPTOTIC_FROM` the J's come from Miller's backward recurrence
//! normalised with `J0 + 2 sum J_2k = 1`, and the Y's from the Neumann
//! series over the same sequence. Above it the Hankel asymptotic expansion
//! is accurate to full double precision.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use num_complex::Complex64 as C64;

use super::EULER_GAMMA;
use crate::error::{Error, Result};

const ASYMPTOTIC_FROM: f64 = 25.0;

/// `J_0(x) + i Y_0(x)` or `J_1(x) + i Y_1(x)`.
pub fn hankel1(n: u32, x: f64) -> Result<C64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("hankel1 needs x > 0, got {x}")));
    }
    if n > 1 {
        return Err(Error::Domain(format!("hankel1 order {n} not supported")));
    }
    let (j, y) = if x >= ASYMPTOTIC_FROM {
        let h = asymptotic(n, x);
        (h.re, h.im)
    } else {
        let (j0, j1, y0, y1) = miller_neumann(x);
        if n == 0 {
            (j0, y0)
        } else {
            (j1, y1)
        }
    };
    Ok(C64::new(j, y))
}

/// `(J_0(x), J_1(x))` for `x >= 0`.
pub fn bessel_j01(x: f64) -> (f64, f64) {
    if x == 0.0 {
        return (1.0, 0.0);
    }
    if x >= ASYMPTOTIC_FROM {
        (asymptotic(0, x).re, asymptotic(1, x).re)
    } else {
        let (j0, j1, _, _) = miller_neumann(x);
        (j0, j1)
    }
}

/// `(Y_0(x), Y_1(x))` for `x > 0`.
pub fn bessel_y01(x: f64) -> (f64, f64) {
    if x >= ASYMPTOTIC_FROM {
        (asymptotic(0, x).im, asymptotic(1, x).im)
    } else {
        let (_, _, y0, y1) = miller_neumann(x);
        (y0, y1)
    }
}

fn miller_neumann(x: f64) -> (f64, f64, f64, f64) {
    let mut j = [0.0; 2];
    let (y0, y1) = miller_fill(x, &mut j);
    (j[0], j[1], y0, y1)
}

/// `J_0(x) .. J_{n-1}(x)` into `jn`, returning `(Y_0(x), Y_1(x))`.
///
/// Only for `0 < x < 25`; the orders must fit the backward recurrence.
pub fn bessel_jn_y01(x: f64, jn: &mut [f64]) -> Result<(f64, f64)> {
    if !(x > 0.0) || x >= ASYMPTOTIC_FROM {
        return Err(Error::Domain(format!("bessel_jn_y01 needs 0 < x < {ASYMPTOTIC_FROM}, got {x}")));
    }
    if jn.len() > MAX_START - 40 {
        return Err(Error::Domain(format!("bessel_jn_y01: {} orders requested", jn.len())));
    }
    Ok(miller_fill(x, jn))
}

const MAX_START: usize = 200;

fn miller_fill(x: f64, jn: &mut [f64]) -> (f64, f64) {
    let base = x + 24.0 + 10.0 * x.sqrt();
    let want = jn.len().max(2) as f64 + 16.0 + x;
    let m = (2 * (base.max(want) as usize / 2)).min(MAX_START);
    let mut j = [0.0f64; MAX_START + 2];
    j[m] = 1.0;
    for k in (1..=m).rev() {
        j[k - 1] = 2.0 * k as f64 / x * j[k] - j[k + 1];
        if j[k - 1].abs() > 1e200 {
            for v in j[k - 1..=m].iter_mut() {
                *v *= 1e-200;
            }
        }
    }
    let norm = j[0] + 2.0 * j[2..=m].iter().step_by(2).sum::<f64>();
    for v in j[..=m].iter_mut() {
        *v /= norm;
    }

    let log_term = (x / 2.0).ln() + EULER_GAMMA;
    let mut s0 = 0.0;
    let mut s1 = 0.0;
    let mut sign = -1.0;
    for k in 1..=m / 2 {
        let kf = k as f64;
        s0 += sign * j[2 * k] / kf;
        s1 += sign * (j[2 * k - 1] - j[2 * k + 1]) / kf;
        sign = -sign;
    }
    let y0 = 2.0 / PI * (log_term * j[0] - 2.0 * s0);
    let y1 = 2.0 / PI * (-j[0] / x + log_term * j[1] + s1);
    let n = jn.len();
    jn.copy_from_slice(&j[..n]);
    (y0, y1)
}

fn asymptotic(n: u32, x: f64) -> C64 {
    let nu2 = 4.0 * (n * n) as f64;
    let mut term = C64::new(1.0, 0.0);
    let mut sum = term;
    let i = C64::new(0.0, 1.0);
    let mut last = f64::INFINITY;
    for k in 1..60 {
        let kf = k as f64;
        term *= i * (nu2 - (2.0 * kf - 1.0).powi(2)) / (8.0 * kf * x);
        let t = term.norm();
        if t > last {
            break;
        }
        sum += term;
        if t < 1e-17 {
            break;
        }
        last = t;
    }
    let phase = x - n as f64 * FRAC_PI_2 - FRAC_PI_4;
    C64::from_polar((2.0 / (PI * x)).sqrt(), phase) * sum
}

#[cfg(test)]
mod tests {
    use super::*;

    // (x, J0, Y0, J1, Y1), 20-digit reference values from an independent
    // arbitrary-precision library.
    const TABLE: &[(f64, f64, f64, f64, f64)] = &[
        (1.0e-6, 0.99999999999975, -8.8690314816594437029, 4.999999999999375e-7, -636619.77237217501376),
        (0.01, 0.99997500015624956597, -3.0054556370836459578, 0.0049999375002604161241, -63.678596282060656374),
        (0.5, 0.93846980724081290423, -0.44451873350670655715, 0.24226845767487388638, -1.4714723926702430692),
        (1.0, 0.76519768655796655145, 0.088256964215676957983, 0.44005058574493351596, -0.78121282130028871655),
        (2.5, -0.048383776468197996327, 0.49807035961523188783, 0.49709410246427403801, 0.14591813796678579888),
        (7.3, 0.28821694763501438437, 0.062773886374037648286, 0.08257043049325788024, -0.28459437186807209037),
        (12.0, 0.047689310796833536624, -0.22523731263436143369, -0.22344710449062761237, -0.05709921826089652105),
        (19.9, 0.17287775639261839113, 0.045762094159385722832, 0.050117424807379983018, -0.17178303121049248727),
        (24.9, 0.083245968353015681694, -0.13649918399676511316, -0.13485569953140874334, -0.086002557595554441547),
        (25.1, 0.10827567149994928907, -0.11676770763803710441, -0.11463478413442272782, -0.11062223322783082844),
        (40.0, 0.0073668905842372895535, 0.12593641705826092925, 0.12603831803758499921, -0.0057935058215496329412),
        (133.7, 0.039191137745291413368, 0.056794149771615502527, 0.056941108550402140446, -0.03897902076635245864),
        (500.0, -0.034100556880731998265, 0.0105067087398313741, 0.010472613470372292844, 0.034111080629137135895),
    ];

    #[test]
    fn matches_reference_table() {
        for &(x, j0, y0, j1, y1) in TABLE {
            let h0 = hankel1(0, x).unwrap();
            let h1 = hankel1(1, x).unwrap();
            let e0 = (h0 - C64::new(j0, y0)).norm() / C64::new(j0, y0).norm();
            let e1 = (h1 - C64::new(j1, y1)).norm() / C64::new(j1, y1).norm();
            assert!(e0 < 1e-12, "H0({x}): rel err {e0:e}");
            assert!(e1 < 1e-12, "H1({x}): rel err {e1:e}");
        }
    }

    #[test]
    fn higher_orders_match_recurrence_free_values() {
        // J_n(x) for n = 0..6 at x = 0.3, 2.7, 9.5 from an independent library.
        let table: &[(f64, [f64; 7])] = &[
            (0.3, [0.97762624653829609, 0.14831881627310401, 0.011165861949063964, 0.00055934304774884612, 2.0999005912958371e-5, 6.3044326337710723e-7, 1.5769532945203228e-8]),
            (2.7, [-0.14244937004601182, 0.44160137911825311, 0.46956150272619931, 0.25404529158722735, 0.09498358968986147, 0.02738756675310293, 0.0064518427290382727]),
            (9.5, [-0.19392874768742236, 0.16126443075752985, 0.2278791541626918, -0.065315313215343831, -0.26913093093027738, -0.16132126019962659, 0.099319078088565175]),
        ];
        for (x, row) in table {
            let mut j = [0.0; 7];
            let (y0, y1) = bessel_jn_y01(*x, &mut j).unwrap();
            for (n, (a, b)) in j.iter().zip(row).enumerate() {
                assert!((a - b).abs() < 1e-13 * b.abs().max(1e-3), "J_{n}({x}) = {a}, want {b}");
            }
            let (ry0, ry1) = bessel_y01(*x);
            assert_eq!((y0, y1), (ry0, ry1));
        }
        assert!(bessel_jn_y01(0.0, &mut [0.0; 3]).is_err());
        assert!(bessel_jn_y01(30.0, &mut [0.0; 3]).is_err());
    }

    #[test]
    fn domain_errors() {
        assert!(matches!(hankel1(0, 0.0), Err(Error::Domain(_))));
        assert!(matches!(hankel1(1, -2.0), Err(Error::Domain(_))));
        assert!(matches!(hankel1(2, 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn log_singularity() {
        let x = 1e-9;
        let ratio = hankel1(0, x).unwrap().im / (2.0 / PI * (x / 2.0).ln());
        assert!((ratio - 1.0).abs() < 0.03);
    }

    #[test]
    fn wronskian() {
        let mut x = 0.01;
        while x < 500.0 {
            let (j0, j1) = bessel_j01(x);
            let (y0, y1) = bessel_y01(x);
            let w = j1 * y0 - j0 * y1;
            let expect = 2.0 / (PI * x);
            assert!((w - expect).abs() < 1e-12 * expect.max(1e-3), "x={x}");
            x *= 1.37;
        }
    }

    #[test]
    fn bessel_ode_residual() {
        for &x in &[0.7f64, 3.0, 11.0, 24.0, 26.0, 80.0] {
            for n in 0..=1u32 {
                let f = |t: f64| hankel1(n, t).unwrap();
                let fd1 = |h: f64| (f(x + h) - f(x - h)) / (2.0 * h);
                let fd2 = |h: f64| (f(x + h) - f(x) * 2.0 + f(x - h)) / (h * h);
                let h = 2e-3 * x.min(1.0);
                let d1 = (fd1(h / 2.0) * 4.0 - fd1(h)) / 3.0;
                let d2 = (fd2(h / 2.0) * 4.0 - fd2(h)) / 3.0;
                let r = d2 * x * x + d1 * x + f(x) * (x * x - (n * n) as f64);
                assert!(r.norm() < 1e-8 * f(x).norm() * x.max(1.0).powi(2), "n={n} x={x}: {r}");
            }
        }
    }

    #[test]
    fn branch_switch_is_continuous() {
        let below = miller_neumann(ASYMPTOTIC_FROM);
        let above = (asymptotic(0, ASYMPTOTIC_FROM), asymptotic(1, ASYMPTOTIC_FROM));
        assert!((below.0 - above.0.re).abs() < 1e-14);
        assert!((below.1 - above.1.re).abs() < 1e-14);
        assert!((below.2 - above.0.im).abs() < 1e-14);
        assert!((below.3 - above.1.im).abs() < 1e-14);
    }
}
