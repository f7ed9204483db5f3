//! Cell expansion of the quasi-periodic Green function at one frequency.
//!
//! Inside the reference cell `G_p = (i/4) H_0(k rho) + R` where `R` is a
//! regular Helmholtz solution, `R = sum_q c_q J_q(k rho) e^{i q phi}`. The
//! coefficients are fitted once from Ewald samples of `R` and `dR/drho` on the
//! circle `rho = L/2`; afterwards a point costs one Bessel recurrence.
//! Targets with `|x1 - y1| > L/2` are moved into the cell with the Bloch phase.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use super::{EwaldConfig, GreenFunction, GreenJets, LatticeParams, Method};
use crate::error::{Error, Result};
use crate::specfun::{bessel_jn_y01, hankel1};

const SAMPLES: usize = 128;
const Q_CAP: usize = 56;
const PAD: usize = 4;
const MAX_ARG: f64 = 20.0;
const FIT_TOL: f64 = 1e-13;
const CUT: f64 = 1e-15;

/// Order-0 evaluator of `G_p` and its derivatives near the origin of the cell.
#[derive(Debug, Clone)]
pub struct CellExpansion {
    k: f64,
    l: f64,
    beta: f64,
    rho0: f64,
    rho_max: f64,
    q_max: usize,
    /// `c_q` at index `q + q_max + PAD`, zero padded.
    coeffs: Vec<C64>,
    /// `max(|a_q|, |a_-q|)`, the size of the `q`-th terms on the fit circle.
    amp: Vec<f64>,
    threshold: f64,
}

impl CellExpansion {
    /// Fits the expansion at `omega`. `None` when `k L / 2` is too large for it.
    pub fn new(params: &LatticeParams, omega: f64, cfg: &EwaldConfig) -> Result<Option<Self>> {
        let k = params.wavenumber(omega);
        let l = params.l;
        let rho0 = 0.5 * l;
        if !(k > 0.0) || k * rho0 >= MAX_ARG {
            return Ok(None);
        }
        let mut tight = *cfg;
        tight.trunc_rel_tol = tight.trunc_rel_tol.min(FIT_TOL);
        let gf = GreenFunction::new(*params, omega, 0, &tight)?;

        let h0 = C64::new(0.0, 0.25) * hankel1(0, k * rho0)?;
        let h1 = C64::new(0.0, -0.25 * k) * hankel1(1, k * rho0)?;
        let mut g = GreenJets::new(0);
        let mut r = vec![C64::new(0.0, 0.0); SAMPLES];
        let mut dr = vec![C64::new(0.0, 0.0); SAMPLES];
        for s in 0..SAMPLES {
            let phi = 2.0 * PI * s as f64 / SAMPLES as f64;
            let (sn, cs) = phi.sin_cos();
            gf.eval([rho0 * cs, rho0 * sn], &mut g, Method::Auto)?;
            r[s] = g.parts[0][0] - h0;
            dr[s] = g.parts[1][0] * cs + g.parts[2][0] * sn - h1;
        }

        let q_cap = Q_CAP as i64;
        let mut jn = [0.0; Q_CAP + 2];
        bessel_jn_y01(k * rho0, &mut jn)?;
        let mut a = vec![C64::new(0.0, 0.0); 2 * Q_CAP + 1];
        let mut c = vec![C64::new(0.0, 0.0); 2 * Q_CAP + 1];
        for q in -q_cap..=q_cap {
            let mut sa = C64::new(0.0, 0.0);
            let mut sb = C64::new(0.0, 0.0);
            for s in 0..SAMPLES {
                let ph = C64::from_polar(1.0, -2.0 * PI * (q * s as i64) as f64 / SAMPLES as f64);
                sa += r[s] * ph;
                sb += dr[s] * ph;
            }
            sa /= SAMPLES as f64;
            sb /= SAMPLES as f64;
            let n = q.unsigned_abs() as usize;
            let sign = if q < 0 && n % 2 == 1 { -1.0 } else { 1.0 };
            let jq = sign * jn[n];
            let djq = sign * if n == 0 { -jn[1] } else { 0.5 * (jn[n - 1] - jn[n + 1]) } * k;
            let idx = (q + q_cap) as usize;
            a[idx] = sa;
            c[idx] = (sa * jq + sb * djq) / (jq * jq + djq * djq);
        }

        let amax = a.iter().fold(0.0f64, |m, v| m.max(v.norm()));
        let threshold = CUT * amax.max(h0.norm());
        let mut amp = vec![0.0; Q_CAP + 1];
        for (n, v) in amp.iter_mut().enumerate() {
            *v = a[Q_CAP + n].norm().max(a[Q_CAP - n].norm());
        }
        let q_max = amp.iter().rposition(|&v| v > threshold).unwrap_or(0);
        let width = 2 * (q_max + PAD) + 1;
        let mut coeffs = vec![C64::new(0.0, 0.0); width];
        for q in -(q_max as i64)..=q_max as i64 {
            coeffs[(q + (q_max + PAD) as i64) as usize] = c[(q + q_cap) as usize];
        }
        amp.truncate(q_max + 1);
        Ok(Some(Self {
            k,
            l,
            beta: params.beta(omega),
            rho0,
            rho_max: 0.45 * l,
            q_max,
            coeffs,
            amp,
            threshold,
        }))
    }

    /// Radius around each lattice image inside which [`eval`](Self::eval) applies.
    pub fn radius(&self) -> f64 {
        self.rho_max
    }

    /// Writes `G_p(delta)` and its derivatives into `out`; `false` when
    /// `delta`, after the shift into the cell, is outside the radius or at
    /// the singularity.
    pub fn eval(&self, delta: [f64; 2], out: &mut GreenJets) -> Result<bool> {
        if out.order != 0 {
            return Err(Error::usage("cell expansion is order 0 only"));
        }
        let n = (delta[0] / self.l).round();
        let d1 = delta[0] - n * self.l;
        let d2 = delta[1];
        let rho = d1.hypot(d2);
        if !(rho > 0.0) || rho > self.rho_max {
            return Ok(false);
        }
        let x = self.k * rho;
        let ratio = rho / self.rho0;
        let mut qe = 0;
        let mut pw = 1.0;
        for (q, &v) in self.amp.iter().enumerate() {
            if v * pw > self.threshold {
                qe = q;
            }
            pw *= ratio;
        }
        let top = qe + 2;
        let mut jn = [0.0; Q_CAP + PAD + 1];
        let (y0, y1) = bessel_jn_y01(x, &mut jn[..=top])?;

        // Phi_q = J_q(k rho) e^{i q phi} for |q| <= top.
        let u = C64::new(d1 / rho, d2 / rho);
        let off = (self.q_max + PAD) as i64;
        let mut sums = [C64::new(0.0, 0.0); 5];
        let mut up = C64::new(1.0, 0.0);
        for q in 0..=top as i64 {
            let j = jn[q as usize];
            let phis: &[(i64, C64)] = if q == 0 {
                &[(0, up * j)]
            } else {
                let sign = if q % 2 == 1 { -j } else { j };
                &[(q, up * j), (-q, up.conj() * sign)]
            };
            for &(qq, phi) in phis {
                for (s, sum) in sums.iter_mut().enumerate() {
                    let idx = qq - (s as i64 - 2) + off;
                    *sum += self.coeffs[idx as usize] * phi;
                }
            }
            up *= u;
        }
        // sums[s] = sum_q c_{q - (s - 2)} Phi_q
        let k = self.k;
        let r0 = sums[2];
        let dp = -k * sums[3];
        let dm = k * sums[1];
        let dpp = k * k * sums[4];
        let dmm = k * k * sums[0];
        let dpm = -k * k * r0;
        let i = C64::new(0.0, 1.0);

        let h0 = C64::new(jn[0], y0);
        let h1 = C64::new(jn[1], y1);
        let dh1 = h0 - h1 / x;
        let (e1, e2) = (d1 / rho, d2 / rho);
        let g0 = 0.25 * i * h0;
        let gr = -0.25 * i * k * h1;
        let a = -0.25 * i * k * k * dh1;
        let b = -0.25 * i * k * h1 / rho;

        let p = &mut out.parts;
        p[0][0] = g0 + r0;
        p[1][0] = gr * e1 + 0.5 * (dp + dm);
        p[2][0] = gr * e2 + (dp - dm) / (2.0 * i);
        p[3][0] = a * e1 * e1 + b * (1.0 - e1 * e1) + 0.25 * (dpp + 2.0 * dpm + dmm);
        p[4][0] = (a - b) * e1 * e2 + (dpp - dmm) / (4.0 * i);
        p[5][0] = a * e2 * e2 + b * (1.0 - e2 * e2) - 0.25 * (dpp - 2.0 * dpm + dmm);
        if n != 0.0 {
            let ph = C64::from_polar(1.0, self.beta * n);
            for part in p.iter_mut() {
                part[0] *= ph;
            }
        }
        Ok(true)
    }
}
