use std::borrow::Cow;
use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use super::{ktilde_sq, splitting_parameter, EwaldConfig, GreenJets, LatticeParams, JL, WOOD_GUARD};
use crate::error::{Error, Result};
use crate::jets::{series, MAX_ORDER};
use crate::specfun::{erfc_series, expint_sequence};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const I: C64 = C64 { re: 0.0, im: 1.0 };
const TERM_CAP: usize = 10_000;
const J_CAP: usize = 500;

/// Evaluation path for [`GreenFunction::eval`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Spectral series when `|x2 - y2|` is large enough, Ewald otherwise.
    Auto,
    Ewald,
    Spectral,
}

/// Number of lattice terms used by one evaluation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EvalStats {
    /// Spatial images `n`.
    pub spatial: usize,
    /// Spectral orders `m`.
    pub spectral: usize,
}

#[derive(Clone)]
struct Mode {
    xi0: f64,
    kt: [C64; JL],
    inv_kt: [C64; JL],
    /// `-i k~ / (2E)`
    z_off: [C64; JL],
    /// `(2E / sqrt(pi)) exp(k~^2 / 4E^2)`
    gam: [C64; JL],
    evanescent: bool,
}

/// Precomputed evaluator of `G_p` and its spatial derivatives as jets about
/// a fixed frequency. `E` is frozen at construction.
pub struct GreenFunction {
    params: LatticeParams,
    centre: f64,
    order: usize,
    e: f64,
    tol: f64,
    spectral_min: f64,
    beta0: f64,
    dxi: f64,
    /// `(k / 2E)^{2j} / j!`, real jets.
    w: Vec<[f64; JL]>,
    m_table: i64,
    modes: Vec<Mode>,
}

impl GreenFunction {
    pub fn new(params: LatticeParams, centre: f64, order: usize, cfg: &EwaldConfig) -> Result<Self> {
        let e = splitting_parameter(params.wavenumber(centre), &params, cfg);
        Self::with_splitting(params, centre, order, cfg, e)
    }

    /// As [`GreenFunction::new`] with an explicit splitting parameter.
    pub fn with_splitting(params: LatticeParams, centre: f64, order: usize, cfg: &EwaldConfig, e: f64) -> Result<Self> {
        if !(e > 0.0) {
            return Err(Error::usage(format!("splitting parameter must be positive, got {e}")));
        }
        if order > MAX_ORDER {
            return Err(Error::usage(format!("order {order} exceeds {MAX_ORDER}")));
        }
        if !(centre > 0.0) {
            return Err(Error::Domain(format!("omega must be positive, got {centre}")));
        }
        if !(cfg.trunc_rel_tol > 0.0) {
            return Err(Error::usage("trunc_rel_tol must be positive"));
        }
        let k0 = params.wavenumber(centre);
        let tol = cfg.trunc_rel_tol;
        let n1 = order + 1;

        let inv4e2 = 1.0 / (4.0 * e * e);
        let dk = 1.0 / params.c;
        let mut q = [0.0; JL];
        q[0] = k0 * k0 * inv4e2;
        if n1 > 1 {
            q[1] = 2.0 * k0 * dk * inv4e2;
        }
        if n1 > 2 {
            q[2] = dk * dk * inv4e2;
        }
        let mut w = vec![[0.0; JL]];
        w[0][0] = 1.0;
        loop {
            let j = w.len();
            let prev = &w[j - 1];
            let mut next = [0.0; JL];
            for i in 0..n1 {
                let mut s = 0.0;
                for l in 0..=i.min(2) {
                    s += q[l] * prev[i - l];
                }
                next[i] = s / j as f64;
            }
            let size = next[..n1].iter().fold(0.0f64, |a, v| a.max(v.abs()));
            w.push(next);
            if (j as f64) > q[0] && size <= tol * 1e-3 {
                break;
            }
            if j >= J_CAP {
                return Err(Error::Convergence {
                    what: "Ewald spatial j-series (E too small for k)".into(),
                    terms: j,
                });
            }
        }

        let log_tol = (1.0 / tol).ln();
        let kappa_ewald = 2.0 * e * (log_tol.sqrt() + 3.0);
        let kappa_spec = if cfg.spectral_min > 0.0 {
            (log_tol + 5.0) / (cfg.spectral_min * params.l)
        } else {
            0.0
        };
        let m_table = (((k0 + kappa_ewald.max(kappa_spec)) * params.l / (2.0 * PI)).ceil() as i64 + 2).min(10_000);

        let mut gf = Self {
            params,
            centre,
            order,
            e,
            tol,
            spectral_min: cfg.spectral_min,
            beta0: params.beta(centre),
            dxi: params.dbeta() / params.l,
            w,
            m_table,
            modes: Vec::new(),
        };
        let mut modes = Vec::with_capacity((2 * m_table + 1) as usize);
        for m in -m_table..=m_table {
            modes.push(gf.build_mode(m)?);
        }
        gf.modes = modes;
        Ok(gf)
    }

    pub fn splitting(&self) -> f64 {
        self.e
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn centre(&self) -> f64 {
        self.centre
    }

    pub fn params(&self) -> &LatticeParams {
        &self.params
    }

    fn build_mode(&self, m: i64) -> Result<Mode> {
        let n1 = self.order + 1;
        let k0 = self.params.wavenumber(self.centre);
        let mut kt2 = [0.0; JL];
        ktilde_sq(&self.params, m, self.centre, &mut kt2[..n1]);
        if kt2[0].abs().sqrt() < WOOD_GUARD * k0 {
            return Err(Error::WoodAnomaly {
                m,
                magnitude: kt2[0].abs().sqrt(),
                omega: self.centre,
            });
        }
        let evanescent = kt2[0] < 0.0;
        let sign = if evanescent { -1.0 } else { 1.0 };
        let mut a = [ZERO; JL];
        for i in 0..n1 {
            a[i] = C64::new(sign * kt2[i], 0.0);
        }
        let mut kt = [ZERO; JL];
        series::sqrt_into(&a[..n1], &mut kt[..n1]);
        if evanescent {
            for v in kt[..n1].iter_mut() {
                *v *= I;
            }
        }
        let mut one = [ZERO; JL];
        one[0] = C64::new(1.0, 0.0);
        let mut inv_kt = [ZERO; JL];
        series::div_into(&one[..n1], &kt[..n1], &mut inv_kt[..n1]);
        let mut z_off = [ZERO; JL];
        for i in 0..n1 {
            z_off[i] = -I * kt[i] / (2.0 * self.e);
        }
        let inv4e2 = 1.0 / (4.0 * self.e * self.e);
        for i in 0..n1 {
            a[i] = C64::new(kt2[i] * inv4e2, 0.0);
        }
        let mut gam = [ZERO; JL];
        series::exp_into(&a[..n1], &mut gam[..n1]);
        let s = 2.0 * self.e / PI.sqrt();
        for v in gam[..n1].iter_mut() {
            *v *= s;
        }
        Ok(Mode {
            xi0: self.params.xi(m, self.centre),
            kt,
            inv_kt,
            z_off,
            gam,
            evanescent,
        })
    }

    fn mode(&self, m: i64) -> Result<Cow<'_, Mode>> {
        if m.abs() <= self.m_table {
            Ok(Cow::Borrowed(&self.modes[(m + self.m_table) as usize]))
        } else {
            Ok(Cow::Owned(self.build_mode(m)?))
        }
    }

    /// Jet of `exp(i a xi(omega))` for the affine `xi` of this lattice, offset by `m`.
    fn phase_xi(&self, xi0: f64, a: f64, out: &mut [C64]) {
        let base = C64::from_polar(1.0, xi0 * a);
        let step = I * (a * self.dxi);
        out[0] = base;
        for i in 1..out.len() {
            out[i] = out[i - 1] * step / i as f64;
        }
    }

    /// Multiplies a jet by the affine `xi` jet with value `xi0`.
    fn mul_xi(&self, xi0: f64, a: &[C64], out: &mut [C64]) {
        for i in (0..out.len()).rev() {
            out[i] = a[i] * xi0 + if i > 0 { a[i - 1] * self.dxi } else { ZERO };
        }
    }

    /// `G_p` at `delta = x - y`.
    pub fn eval(&self, delta: [f64; 2], out: &mut GreenJets, method: Method) -> Result<EvalStats> {
        let spectral = match method {
            Method::Spectral => true,
            Method::Ewald => false,
            Method::Auto => self.spectral_min > 0.0 && delta[1].abs() >= self.spectral_min * self.params.l,
        };
        if spectral {
            return self.spectral(delta, out);
        }
        let s1 = self.gp1(delta, out)?;
        let mut tmp = GreenJets::new(self.order);
        let s2 = self.gp2(delta, &mut tmp)?;
        out.add_assign(&tmp);
        Ok(EvalStats {
            spatial: s1.spatial,
            spectral: s2.spectral,
        })
    }

    /// Spatial Ewald series.
    pub fn gp1(&self, delta: [f64; 2], out: &mut GreenJets) -> Result<EvalStats> {
        check_order(out, self.order)?;
        out.clear();
        let n1 = self.order + 1;
        let l = self.params.l;
        let e2 = self.e * self.e;
        let jn = self.w.len();
        let mut ev = [0.0f64; J_CAP + 4];
        let mut pair = GreenJets::new(self.order);
        let mut s = [[0.0f64; JL]; 3];
        let mut ph = [ZERO; JL];
        let mut c = [[ZERO; JL]; 3];
        let dbeta = self.params.dbeta();

        let mut count = 0;
        let mut n: i64 = 0;
        loop {
            pair.clear();
            let images: &[i64] = if n == 0 { &[0] } else { &[n, -n] };
            for &nn in images {
                let rho = [delta[0] - nn as f64 * l, delta[1]];
                let r2 = rho[0] * rho[0] + rho[1] * rho[1];
                if r2 == 0.0 {
                    return Err(Error::Domain("G_p evaluated at a lattice image of the source".into()));
                }
                let u = e2 * r2;
                expint_sequence(u, &mut ev[..jn + 2])?;
                for row in s.iter_mut() {
                    row[..n1].fill(0.0);
                }
                for (j, wj) in self.w.iter().enumerate() {
                    let (a0, a1, a2) = (ev[j + 2], ev[j + 1], ev[j]);
                    if a2 == 0.0 {
                        break;
                    }
                    for i in 0..n1 {
                        s[0][i] += wj[i] * a0;
                        s[1][i] += wj[i] * a1;
                        s[2][i] += wj[i] * a2;
                    }
                }
                let base = C64::from_polar(1.0, nn as f64 * self.beta0);
                let step = I * (nn as f64 * dbeta);
                ph[0] = base;
                for i in 1..n1 {
                    ph[i] = ph[i - 1] * step / i as f64;
                }
                for q in 0..3 {
                    mul_cr(&ph[..n1], &s[q][..n1], &mut c[q][..n1]);
                }
                let a = -2.0 * e2;
                let b = 4.0 * e2 * e2;
                let p = &mut pair.parts;
                for i in 0..n1 {
                    p[0][i] += c[0][i];
                    p[1][i] += a * rho[0] * c[1][i];
                    p[2][i] += a * rho[1] * c[1][i];
                    p[3][i] += a * c[1][i] + b * rho[0] * rho[0] * c[2][i];
                    p[4][i] += b * rho[0] * rho[1] * c[2][i];
                    p[5][i] += a * c[1][i] + b * rho[1] * rho[1] * c[2][i];
                }
                count += 1;
            }
            out.add_assign(&pair);
            let decaying = (n as f64) * l > delta[0].abs() + l;
            if decaying && out.negligible(&pair, self.tol) {
                break;
            }
            n += 1;
            if count > TERM_CAP {
                return Err(Error::Convergence {
                    what: "Ewald spatial series".into(),
                    terms: count,
                });
            }
        }
        out.scale(C64::new(1.0 / (4.0 * PI), 0.0));
        Ok(EvalStats {
            spatial: count,
            spectral: 0,
        })
    }

    /// Spectral Ewald series.
    pub fn gp2(&self, delta: [f64; 2], out: &mut GreenJets) -> Result<EvalStats> {
        check_order(out, self.order)?;
        out.clear();
        let n1 = self.order + 1;
        let (d1, d2) = (delta[0], delta[1]);
        let e = self.e;
        let gauss = (-e * e * d2 * d2).exp();
        let mut pair = GreenJets::new(self.order);
        let mut b = [[ZERO; JL]; 8];

        let mut count = 0;
        let mut m: i64 = 0;
        loop {
            pair.clear();
            let orders: &[i64] = if m == 0 { &[0] } else { &[m, -m] };
            let mut all_evanescent = true;
            for &mm in orders {
                let md = self.mode(mm)?;
                all_evanescent &= md.evanescent;
                let [ph, ep, em, zp, zm, sum, diff, t] = &mut b;
                // exp(+-i k~ d2)
                for i in 0..n1 {
                    zp[i] = I * md.kt[i] * d2;
                    zm[i] = -zp[i];
                }
                series::exp_into(&zp[..n1], &mut ep[..n1]);
                series::exp_into(&zm[..n1], &mut em[..n1]);
                // erfc(-E d2 - i k~/2E), erfc(E d2 - i k~/2E)
                for i in 0..n1 {
                    zp[i] = md.z_off[i];
                    zm[i] = md.z_off[i];
                }
                zp[0] -= e * d2;
                zm[0] += e * d2;
                erfc_series(&zp[..n1], &mut sum[..n1]);
                erfc_series(&zm[..n1], &mut diff[..n1]);
                series::mul_into(&ep[..n1], &sum[..n1], &mut zp[..n1]);
                series::mul_into(&em[..n1], &diff[..n1], &mut zm[..n1]);
                for i in 0..n1 {
                    sum[i] = zp[i] + zm[i];
                    diff[i] = I * (zp[i] - zm[i]);
                }
                self.phase_xi(md.xi0, d1, &mut ph[..n1]);
                let p = &mut pair.parts;
                // g
                series::mul_into(&sum[..n1], &md.inv_kt[..n1], &mut t[..n1]);
                series::mul_into(&ph[..n1], &t[..n1], &mut ep[..n1]);
                add(&mut p[0][..n1], &ep[..n1]);
                // d1, d11
                self.mul_xi(md.xi0, &ep[..n1], &mut em[..n1]);
                add_scaled(&mut p[1][..n1], &em[..n1], I);
                self.mul_xi(md.xi0, &em[..n1], &mut t[..n1]);
                add_scaled(&mut p[3][..n1], &t[..n1], C64::new(-1.0, 0.0));
                // d2, d12
                series::mul_into(&ph[..n1], &diff[..n1], &mut ep[..n1]);
                add(&mut p[2][..n1], &ep[..n1]);
                self.mul_xi(md.xi0, &ep[..n1], &mut em[..n1]);
                add_scaled(&mut p[4][..n1], &em[..n1], I);
                // d22
                series::mul_into(&md.kt[..n1], &sum[..n1], &mut t[..n1]);
                for i in 0..n1 {
                    t[i] = 2.0 * I * gauss * md.gam[i] - t[i];
                }
                series::mul_into(&ph[..n1], &t[..n1], &mut ep[..n1]);
                add(&mut p[5][..n1], &ep[..n1]);
                count += 1;
            }
            out.add_assign(&pair);
            if all_evanescent && out.negligible(&pair, self.tol) {
                break;
            }
            m += 1;
            if count > TERM_CAP {
                return Err(Error::Convergence {
                    what: "Ewald spectral series".into(),
                    terms: count,
                });
            }
        }
        out.scale(I / (4.0 * self.params.l));
        Ok(EvalStats {
            spatial: 0,
            spectral: count,
        })
    }

    /// Plain spectral (Rayleigh) series; needs `x2 != y2`.
    pub fn spectral(&self, delta: [f64; 2], out: &mut GreenJets) -> Result<EvalStats> {
        check_order(out, self.order)?;
        out.clear();
        let (d1, d2) = (delta[0], delta[1]);
        if d2 == 0.0 {
            return Err(Error::Domain("spectral series needs x2 != y2".into()));
        }
        let sgn = d2.signum();
        let a2 = d2.abs();
        let n1 = self.order + 1;
        let mut pair = GreenJets::new(self.order);
        let mut arg = [ZERO; JL];
        let mut ex = [ZERO; JL];
        let mut t = [ZERO; JL];
        let mut u = [ZERO; JL];

        let mut count = 0;
        let mut m: i64 = 0;
        loop {
            pair.clear();
            let orders: &[i64] = if m == 0 { &[0] } else { &[m, -m] };
            let mut all_evanescent = true;
            for &mm in orders {
                let md = self.mode(mm)?;
                all_evanescent &= md.evanescent;
                for i in 0..n1 {
                    arg[i] = I * md.kt[i] * a2;
                }
                arg[0] += I * md.xi0 * d1;
                if n1 > 1 {
                    arg[1] += I * self.dxi * d1;
                }
                series::exp_into(&arg[..n1], &mut ex[..n1]);
                let p = &mut pair.parts;
                series::mul_into(&ex[..n1], &md.inv_kt[..n1], &mut t[..n1]);
                add(&mut p[0][..n1], &t[..n1]);
                self.mul_xi(md.xi0, &t[..n1], &mut u[..n1]);
                add_scaled(&mut p[1][..n1], &u[..n1], I);
                self.mul_xi(md.xi0, &u[..n1], &mut t[..n1]);
                add_scaled(&mut p[3][..n1], &t[..n1], C64::new(-1.0, 0.0));
                add_scaled(&mut p[2][..n1], &ex[..n1], I * sgn);
                self.mul_xi(md.xi0, &ex[..n1], &mut u[..n1]);
                add_scaled(&mut p[4][..n1], &u[..n1], C64::new(-sgn, 0.0));
                series::mul_into(&md.kt[..n1], &ex[..n1], &mut t[..n1]);
                add_scaled(&mut p[5][..n1], &t[..n1], C64::new(-1.0, 0.0));
                count += 1;
            }
            out.add_assign(&pair);
            if all_evanescent && out.negligible(&pair, self.tol) {
                break;
            }
            m += 1;
            if count > TERM_CAP {
                return Err(Error::Convergence {
                    what: "spectral series".into(),
                    terms: count,
                });
            }
        }
        out.scale(I / (2.0 * self.params.l));
        Ok(EvalStats {
            spatial: 0,
            spectral: count,
        })
    }
}

fn check_order(out: &GreenJets, order: usize) -> Result<()> {
    if out.order != order {
        return Err(Error::usage(format!("output order {} != evaluator order {order}", out.order)));
    }
    Ok(())
}

#[inline]
fn mul_cr(a: &[C64], b: &[f64], out: &mut [C64]) {
    for k in 0..out.len() {
        let mut s = ZERO;
        for j in 0..=k {
            s += a[j] * b[k - j];
        }
        out[k] = s;
    }
}

#[inline]
fn add(acc: &mut [C64], a: &[C64]) {
    for (x, y) in acc.iter_mut().zip(a) {
        *x += *y;
    }
}

#[inline]
fn add_scaled(acc: &mut [C64], a: &[C64], s: C64) {
    for (x, y) in acc.iter_mut().zip(a) {
        *x += *y * s;
    }
}
