//! Generalised exponential integrals `E_n(x) = int_1^inf e^{-xt} t^{-n} dt`.

use super::EULER_GAMMA;
use crate::error::{Error, Result};

const EPS: f64 = 1e-16;
const MAX_ITER: usize = 500;

/// `E_n(x)` for `n >= 1`, `x > 0` (series for `x <= 1`, continued fraction
/// otherwise).
pub fn expint(n: u32, x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("expint needs x > 0, got {x}")));
    }
    if n == 0 {
        return Ok((-x).exp() / x);
    }
    let nm1 = n as i64 - 1;
    if x > 1.0 {
        // Modified Lentz on the even form of the continued fraction.
        let tiny = 1e-300;
        let mut b = x + n as f64;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..=MAX_ITER {
            let an = -(i as f64) * (nm1 as f64 + i as f64);
            b += 2.0;
            d = 1.0 / (an * d + b);
            c = b + an / c;
            let del = c * d;
            h *= del;
            if (del - 1.0).abs() < EPS {
                return Ok(h * (-x).exp());
            }
        }
        Err(Error::Convergence {
            what: "expint continued fraction".into(),
            terms: MAX_ITER,
        })
    } else {
        let mut ans = if nm1 != 0 {
            1.0 / nm1 as f64
        } else {
            -x.ln() - EULER_GAMMA
        };
        let mut fact = 1.0;
        for i in 1..=MAX_ITER as i64 {
            fact *= -x / i as f64;
            let del = if i != nm1 {
                -fact / (i - nm1) as f64
            } else {
                let psi = -EULER_GAMMA + (1..=nm1).map(|k| 1.0 / k as f64).sum::<f64>();
                fact * (-x.ln() + psi)
            };
            ans += del;
            if del.abs() < ans.abs() * EPS {
                return Ok(ans);
            }
        }
        Err(Error::Convergence {
            what: "expint series".into(),
            terms: MAX_ITER,
        })
    }
}

/// Fills `out[k] = E_{k-1}(x)` for `k = 0..out.len()`, i.e. the orders
/// `-1, 0, 1, ..., out.len() - 2`.
///
/// One direct evaluation at the order nearest `x`, then the three-term
/// recurrence is run away from it in whichever direction is stable:
/// upward for `n > x`, downward for `n < x`.
pub fn expint_sequence(x: f64, out: &mut [f64]) -> Result<()> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("expint needs x > 0, got {x}")));
    }
    let top = out.len() as i64 - 2;
    if top < 0 {
        return Ok(());
    }
    let ex = (-x).exp();
    if ex == 0.0 {
        out.fill(0.0);
        return Ok(());
    }
    let idx = |n: i64| (n + 1) as usize;
    out[idx(-1)] = ex * (1.0 / x + 1.0 / (x * x));
    if top >= 0 {
        out[idx(0)] = ex / x;
    }
    if top < 1 {
        return Ok(());
    }
    let pivot = (x.ceil() as i64).clamp(1, top);
    out[idx(pivot)] = expint(pivot as u32, x)?;
    for n in pivot..top {
        // E_{n+1} = (e^{-x} - x E_n) / n
        out[idx(n + 1)] = (ex - x * out[idx(n)]) / n as f64;
    }
    for n in (1..pivot).rev() {
        // E_n = (e^{-x} - n E_{n+1}) / x
        out[idx(n)] = (ex - n as f64 * out[idx(n + 1)]) / x;
    }
    Ok(())
}
