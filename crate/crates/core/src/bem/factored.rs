//! Separable evaluation of matrix entries between elements that are
//! separated along `x2`.
//!
//! For `s (x2 - y2) > 0` the Rayleigh series of the Burton–Miller kernel
//! factors mode by mode,
//!
//! `W = (i/2L) sum_m A_m^s(x) B_m^s(y)`,
//! `A_m^s(x) = e^{i xi x1 + i s k~ x2} (-i + alpha (xi n_x1 + s k~ n_x2))`,
//! `B_m^s(y) = e^{-i xi y1 - i s k~ y2} (xi n_y1 + s k~ n_y2) / k~`,
//!
//! so an element integral of `B` is computed once per element and every
//! entry costs one jet product per retained mode. Coordinates are taken
//! relative to each scatterer's centre to keep the evanescent factors finite.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use super::{BoundaryMesh, Element};
use crate::error::Result;
use crate::greens::{ktilde_jet, LatticeParams};
use crate::jets::series;
use crate::quadrature::gl_rule;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const I: C64 = C64 { re: 0.0, im: 1.0 };
/// Evanescent modes kept beyond the propagating ones, per side.
const EXTRA_MODES: f64 = 40.0;
/// Cap on `kappa * radius` so that `e^{kappa r}` stays representable.
const MAX_GROWTH: f64 = 300.0;

pub(crate) struct Factored {
    n1: usize,
    m_lo: i64,
    nm: usize,
    /// `xi_m` at the centre frequency.
    xi0: Vec<f64>,
    dxi: f64,
    kt: Vec<Vec<C64>>,
    beta0: f64,
    l: f64,
    thr: f64,
    pub delta_min: f64,
    /// `[(element * 2 + sign) * nm + mode] * n1 + coefficient`
    a_fac: Vec<C64>,
    b_fac: Vec<C64>,
}

impl Factored {
    pub fn new(
        params: &LatticeParams,
        centre: f64,
        order: usize,
        mesh: &BoundaryMesh,
        tol: f64,
        alpha: C64,
    ) -> Result<Self> {
        let n1 = order + 1;
        let l = params.l;
        let k0 = params.wavenumber(centre);
        let thr = (1.0 / tol).ln() + 3.0;
        let r_max = mesh.scatterers.iter().map(|s| s.radius).fold(0.0, f64::max);
        let kappa = (2.0 * PI * EXTRA_MODES / l).min(MAX_GROWTH / r_max.max(1e-300));
        let x_max = (k0 * k0 + kappa * kappa).sqrt();
        let beta0 = params.beta(centre);
        let m_lo = ((-x_max * l - beta0) / (2.0 * PI)).floor() as i64;
        let m_hi = ((x_max * l - beta0) / (2.0 * PI)).ceil() as i64;
        let nm = (m_hi - m_lo + 1) as usize;
        let dxi = params.dbeta() / l;
        let mut xi0 = Vec::with_capacity(nm);
        let mut kt = Vec::with_capacity(nm);
        for m in m_lo..=m_hi {
            xi0.push(params.xi(m, centre));
            kt.push(ktilde_jet(params, m, centre, order)?.into_coeffs());
        }
        let mut f = Self {
            n1,
            m_lo,
            nm,
            xi0,
            dxi,
            kt,
            beta0,
            l,
            thr,
            delta_min: thr / kappa,
            a_fac: vec![ZERO; mesh.len() * 2 * nm * n1],
            b_fac: vec![ZERO; mesh.len() * 2 * nm * n1],
        };
        let h_max = mesh.elements.iter().map(|e| e.length).fold(0.0, f64::max);
        let osc = x_max * h_max;
        let (panels, points) = if osc <= 2.0 {
            (1, 6)
        } else if osc <= 6.0 {
            (1, 10)
        } else {
            ((osc / 12.0).ceil() as usize, 16)
        };
        let mut buf = vec![ZERO; 2 * nm * n1];
        for (idx, e) in mesh.elements.iter().enumerate() {
            let c = mesh.scatterers[e.scatterer].centre;
            f.target_factors(e, c, alpha, &mut buf);
            f.a_fac[idx * 2 * nm * n1..(idx + 1) * 2 * nm * n1].copy_from_slice(&buf);
            f.source_factors(e, c, panels, points, &mut buf);
            f.b_fac[idx * 2 * nm * n1..(idx + 1) * 2 * nm * n1].copy_from_slice(&buf);
        }
        Ok(f)
    }

    fn phase(&self, m: usize, s: f64, p: [f64; 2], sign: f64, out: &mut [C64]) {
        // exp(sign * i (xi p1 + s k~ p2))
        let n1 = self.n1;
        let mut arg = [ZERO; crate::jets::MAX_ORDER + 1];
        for i in 0..n1 {
            arg[i] = I * sign * s * p[1] * self.kt[m][i];
        }
        arg[0] += I * sign * self.xi0[m] * p[0];
        if n1 > 1 {
            arg[1] += I * sign * self.dxi * p[0];
        }
        series::exp_into(&arg[..n1], out);
    }

    fn target_factors(&self, e: &Element, c: [f64; 2], alpha: C64, out: &mut [C64]) {
        let n1 = self.n1;
        let p = [e.mid[0] - c[0], e.mid[1] - c[1]];
        if n1 == 1 {
            for m in 0..self.nm {
                let (xi, kt) = (self.xi0[m], self.kt[m][0]);
                let e1 = (I * xi * p[0]).exp();
                let e2 = (I * kt * p[1]).exp();
                for (si, s, ph) in [(0, 1.0, e1 * e2), (1, -1.0, e1 / e2)] {
                    out[si * self.nm + m] = ph * (-I + alpha * (xi * e.normal[0] + s * kt * e.normal[1]));
                }
            }
            return;
        }
        let mut ph = [ZERO; crate::jets::MAX_ORDER + 1];
        let mut f = [ZERO; crate::jets::MAX_ORDER + 1];
        for (si, s) in [1.0, -1.0].into_iter().enumerate() {
            for m in 0..self.nm {
                self.phase(m, s, p, 1.0, &mut ph[..n1]);
                for i in 0..n1 {
                    f[i] = alpha * s * self.kt[m][i] * e.normal[1];
                }
                f[0] += -I + alpha * self.xi0[m] * e.normal[0];
                if n1 > 1 {
                    f[1] += alpha * self.dxi * e.normal[0];
                }
                let o = (si * self.nm + m) * n1;
                series::mul_into(&ph[..n1], &f[..n1], &mut out[o..o + n1]);
            }
        }
    }

    fn source_factors(&self, e: &Element, c: [f64; 2], panels: usize, points: usize, out: &mut [C64]) {
        let n1 = self.n1;
        if n1 == 1 {
            return self.source_factors_exact(e, c, out);
        }
        let rule = gl_rule(points);
        let hp = 2.0 / panels as f64;
        let mut ph = [ZERO; crate::jets::MAX_ORDER + 1];
        let mut acc = [ZERO; crate::jets::MAX_ORDER + 1];
        let mut f = [ZERO; crate::jets::MAX_ORDER + 1];
        let mut g = [ZERO; crate::jets::MAX_ORDER + 1];
        let mut inv = [ZERO; crate::jets::MAX_ORDER + 1];
        let mut one = [ZERO; crate::jets::MAX_ORDER + 1];
        one[0] = C64::new(1.0, 0.0);
        let half = 0.5 * e.length;
        for (si, s) in [1.0, -1.0].into_iter().enumerate() {
            for m in 0..self.nm {
                acc[..n1].fill(ZERO);
                for p in 0..panels {
                    let a = -1.0 + p as f64 * hp;
                    for (t, w) in rule.mapped(a, a + hp) {
                        let y = e.point(t);
                        self.phase(m, s, [y[0] - c[0], y[1] - c[1]], -1.0, &mut ph[..n1]);
                        for i in 0..n1 {
                            acc[i] += ph[i] * (w * half);
                        }
                    }
                }
                for i in 0..n1 {
                    f[i] = s * self.kt[m][i] * e.normal[1];
                }
                f[0] += self.xi0[m] * e.normal[0];
                if n1 > 1 {
                    f[1] += self.dxi * e.normal[0];
                }
                series::div_into(&one[..n1], &self.kt[m][..n1], &mut inv[..n1]);
                series::mul_into(&f[..n1], &inv[..n1], &mut g[..n1]);
                let o = (si * self.nm + m) * n1;
                series::mul_into(&acc[..n1], &g[..n1], &mut out[o..o + n1]);
            }
        }
    }

    /// Order 0: the phase is linear along the chord, so the element integral
    /// is `e^{z_mid} sinh(z_half) / z_half` times the length.
    fn source_factors_exact(&self, e: &Element, c: [f64; 2], out: &mut [C64]) {
        let p = [e.mid[0] - c[0], e.mid[1] - c[1]];
        let h = [0.5 * (e.end[0] - e.start[0]), 0.5 * (e.end[1] - e.start[1])];
        for (si, s) in [1.0, -1.0].into_iter().enumerate() {
            for m in 0..self.nm {
                let (xi, kt) = (self.xi0[m], self.kt[m][0]);
                let zm = -I * (xi * p[0] + s * kt * p[1]);
                let zh = -I * (xi * h[0] + s * kt * h[1]);
                let shc = if zh.norm() < 1e-4 {
                    1.0 + zh * zh / 6.0
                } else {
                    zh.sinh() / zh
                };
                let g = (s * kt * e.normal[1] + xi * e.normal[0]) / kt;
                out[si * self.nm + m] = zm.exp() * shc * e.length * g;
            }
        }
    }

    /// Source factors of element `b` times the inter-centre phase
    /// `exp(i xi dc1 + i s k~ dc2)`, for both signs.
    pub fn shifted_source(&self, b: usize, dc: [f64; 2], out: &mut Vec<C64>) {
        let n1 = self.n1;
        let len = 2 * self.nm * n1;
        out.resize(len, ZERO);
        let src = &self.b_fac[b * len..(b + 1) * len];
        if dc == [0.0, 0.0] {
            out.copy_from_slice(src);
            return;
        }
        let mut ph = [ZERO; crate::jets::MAX_ORDER + 1];
        for (si, s) in [1.0, -1.0].into_iter().enumerate() {
            for m in 0..self.nm {
                self.phase(m, s, dc, 1.0, &mut ph[..n1]);
                let o = (si * self.nm + m) * n1;
                series::mul_into(&ph[..n1], &src[o..o + n1], &mut out[o..o + n1]);
            }
        }
    }

    /// Sign and separation if the pair can use the factored form.
    pub fn separation(&self, x: &Element, y: &Element) -> Option<(usize, f64)> {
        let (lo, hi) = if y.start[1] < y.end[1] {
            (y.start[1], y.end[1])
        } else {
            (y.end[1], y.start[1])
        };
        let up = x.mid[1] - hi;
        let down = lo - x.mid[1];
        if up >= self.delta_min {
            Some((0, up))
        } else if down >= self.delta_min {
            Some((1, down))
        } else {
            None
        }
    }

    /// `(i/2L) sum_m A_m^s(a) Btil_m^s(b)` over the modes that matter at
    /// separation `delta`.
    pub fn entry(&self, a: usize, sign: usize, delta: f64, bsh: &[C64], k0: f64, out: &mut [C64]) {
        let n1 = self.n1;
        let x = (k0 * k0 + (self.thr / delta).powi(2)).sqrt();
        let lo = (((-x * self.l - self.beta0) / (2.0 * PI)).floor() as i64).max(self.m_lo);
        let hi = (((x * self.l - self.beta0) / (2.0 * PI)).ceil() as i64).min(self.m_lo + self.nm as i64 - 1);
        let base = (a * 2 + sign) * self.nm * n1;
        let bbase = sign * self.nm * n1;
        out[..n1].fill(ZERO);
        for m in lo..=hi {
            let mi = (m - self.m_lo) as usize;
            let af = &self.a_fac[base + mi * n1..base + (mi + 1) * n1];
            let bf = &bsh[bbase + mi * n1..bbase + (mi + 1) * n1];
            series::mul_acc(af, bf, &mut out[..n1]);
        }
        let s = I / (2.0 * self.l);
        for v in out[..n1].iter_mut() {
            *v *= s;
        }
    }
}
