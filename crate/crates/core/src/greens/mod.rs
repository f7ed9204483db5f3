//! Quasi-periodic Green function of the 2D Helmholtz equation and its
//! spatial derivatives, as jets in the angular frequency.
//!
//! The lattice sum is evaluated by Ewald's split into a spatial series
//! (`gp1`, exponential integrals) and a spectral series (`gp2`, complementary
//! error functions). For source/target pairs well separated along `x2` the
//! plain spectral (Rayleigh) expansion converges geometrically and is used
//! instead unless disabled.

mod cell;
mod ewald;
mod kernel;

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jets::{series, Jet, MAX_ORDER};

pub use cell::CellExpansion;
pub use ewald::{EvalStats, GreenFunction, Method};
pub use kernel::{kernel_value, normal_derivative_y};

/// Jet storage length.
pub(crate) const JL: usize = MAX_ORDER + 1;

/// Wood-anomaly guard: `|k~_m| < WOOD_GUARD * k` is refused.
pub const WOOD_GUARD: f64 = 1e-8;

/// Geometry of the periodic lattice and the incident wave.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticeParams {
    /// Period along `x1`.
    pub l: f64,
    /// Phase velocity.
    pub c: f64,
    /// Incident angle in radians, `0 < theta <= pi/2`.
    pub theta: f64,
}

impl LatticeParams {
    pub fn new(l: f64, c: f64, theta: f64) -> Result<Self> {
        if !(l > 0.0) || !(c > 0.0) {
            return Err(Error::usage(format!("need L > 0 and c > 0, got L={l}, c={c}")));
        }
        if !(theta > 0.0 && theta <= PI / 2.0 + 1e-15) {
            return Err(Error::usage(format!("theta must lie in (0, pi/2], got {theta}")));
        }
        Ok(Self { l, c, theta })
    }

    pub fn wavenumber(&self, omega: f64) -> f64 {
        omega / self.c
    }

    /// Bloch phase `beta = k L cos(theta)`.
    pub fn beta(&self, omega: f64) -> f64 {
        self.wavenumber(omega) * self.l * self.theta.cos()
    }

    /// `d beta / d omega`.
    pub fn dbeta(&self) -> f64 {
        self.l * self.theta.cos() / self.c
    }

    /// `xi_m(omega) = (beta + 2 m pi) / L`.
    pub fn xi(&self, m: i64, omega: f64) -> f64 {
        (self.beta(omega) + 2.0 * PI * m as f64) / self.l
    }

    /// Propagating index range `(m_min, m_max)`.
    pub fn mode_range(&self, omega: f64) -> (i64, i64) {
        let kl = self.wavenumber(omega) * self.l;
        let beta = self.beta(omega);
        let m_min = -((kl + beta) / (2.0 * PI)).floor() as i64;
        let m_max = ((kl - beta) / (2.0 * PI)).floor() as i64;
        (m_min, m_max)
    }
}

/// How the splitting parameter is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplittingMode {
    Optimal,
    Adaptive,
}

/// Parameters of the Ewald evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EwaldConfig {
    pub mode: SplittingMode,
    /// Series truncation threshold relative to the partial sum.
    pub trunc_rel_tol: f64,
    /// Overflow guard `H` of the adaptive rule.
    pub h: f64,
    /// Term count `K` of the adaptive rule.
    pub k: u32,
    /// Tolerance `eps` of the adaptive rule.
    pub eps: f64,
    /// Use the plain spectral series when `|x2 - y2| >= spectral_min * L`.
    /// Values `<= 0` disable it.
    #[serde(default = "default_spectral_min")]
    pub spectral_min: f64,
}

fn default_spectral_min() -> f64 {
    0.25
}

impl Default for EwaldConfig {
    fn default() -> Self {
        Self {
            mode: SplittingMode::Adaptive,
            trunc_rel_tol: 1e-7,
            h: 9.0,
            k: 13,
            eps: 1e-16,
            spectral_min: default_spectral_min(),
        }
    }
}

impl EwaldConfig {
    /// Settings of the Green function reference tables.
    pub fn tables(mode: SplittingMode) -> Self {
        Self {
            mode,
            trunc_rel_tol: 1e-16,
            spectral_min: 0.0,
            ..Self::default()
        }
    }
}

/// Splitting parameter `E` at wavenumber `k`.
pub fn splitting_parameter(k: f64, params: &LatticeParams, cfg: &EwaldConfig) -> f64 {
    let e_opt = PI.sqrt() / params.l;
    match cfg.mode {
        SplittingMode::Optimal => e_opt,
        SplittingMode::Adaptive => {
            if k < 2.0 * PI / params.l {
                return e_opt;
            }
            let xi0 = k * params.theta.cos();
            let kt0 = (k * k - xi0 * xi0).max(0.0).sqrt();
            let kfact: f64 = (1..=cfg.k).map(f64::from).product();
            let third = k / (2.0 * (cfg.eps * kfact).powf(1.0 / (2.0 * cfg.k as f64)));
            e_opt.max(kt0 / (2.0 * cfg.h)).max(third)
        }
    }
}

/// `xi_m` as a jet in `omega` (affine).
pub fn xi_jet(params: &LatticeParams, m: i64, centre: f64, order: usize) -> Jet {
    Jet::affine(
        centre,
        order,
        C64::new(params.dbeta() / params.l, 0.0),
        C64::new(2.0 * PI * m as f64 / params.l, 0.0),
    )
}

/// `k~_m` as a jet; the propagating/evanescent branch is fixed by the value
/// part. Errors at a Wood anomaly.
pub fn ktilde_jet(params: &LatticeParams, m: i64, centre: f64, order: usize) -> Result<Jet> {
    let n1 = order + 1;
    let mut kt2 = [0.0f64; JL];
    ktilde_sq(params, m, centre, &mut kt2[..n1]);
    let k0 = params.wavenumber(centre);
    if kt2[0].abs().sqrt() < WOOD_GUARD * k0 {
        return Err(Error::WoodAnomaly {
            m,
            magnitude: kt2[0].abs().sqrt(),
            omega: centre,
        });
    }
    let sign = if kt2[0] >= 0.0 { 1.0 } else { -1.0 };
    let a: Vec<C64> = kt2[..n1].iter().map(|&v| C64::new(sign * v, 0.0)).collect();
    let mut out = vec![C64::new(0.0, 0.0); n1];
    series::sqrt_into(&a, &mut out);
    if sign < 0.0 {
        for v in out.iter_mut() {
            *v *= C64::new(0.0, 1.0);
        }
    }
    Jet::new(centre, out)
}

/// Coefficients of the quadratic `k^2 - xi_m^2` about `centre`.
pub(crate) fn ktilde_sq(params: &LatticeParams, m: i64, centre: f64, out: &mut [f64]) {
    let dk = 1.0 / params.c;
    let dxi = params.dbeta() / params.l;
    let k0 = centre * dk;
    let xi0 = params.xi(m, centre);
    out.fill(0.0);
    out[0] = k0 * k0 - xi0 * xi0;
    if out.len() > 1 {
        out[1] = 2.0 * (k0 * dk - xi0 * dxi);
    }
    if out.len() > 2 {
        out[2] = dk * dk - dxi * dxi;
    }
}

/// Diffraction-order data at one frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralIndexSet {
    pub beta: Jet,
    pub m_min: i64,
    pub m_max: i64,
    /// `xi_m` for `m = m_min..=m_max`.
    pub xi: Vec<Jet>,
    /// `k~_m` for `m = m_min..=m_max`.
    pub ktilde: Vec<Jet>,
}

impl SpectralIndexSet {
    pub fn modes(&self) -> impl Iterator<Item = i64> {
        self.m_min..=self.m_max
    }

    pub fn index(&self, m: i64) -> Option<usize> {
        (m >= self.m_min && m <= self.m_max).then(|| (m - self.m_min) as usize)
    }
}

/// Propagating diffraction orders and their wavenumber jets.
pub fn spectral_index_set(omega: &Jet, params: &LatticeParams) -> Result<SpectralIndexSet> {
    let w0 = omega.value().re;
    if !(w0 > 0.0) {
        return Err(Error::Domain(format!("omega must be positive, got {w0}")));
    }
    let (m_min, m_max) = params.mode_range(w0);
    let order = omega.order();
    let beta = Jet::affine(w0, order, C64::new(params.dbeta(), 0.0), C64::new(0.0, 0.0));
    let mut xi = Vec::new();
    let mut ktilde = Vec::new();
    for m in m_min..=m_max {
        xi.push(xi_jet(params, m, w0, order));
        ktilde.push(ktilde_jet(params, m, w0, order)?);
    }
    // The first evanescent orders on either side also diverge at an anomaly.
    for m in [m_min - 1, m_max + 1] {
        ktilde_jet(params, m, w0, 0)?;
    }
    Ok(SpectralIndexSet {
        beta,
        m_min,
        m_max,
        xi,
        ktilde,
    })
}

/// Value, gradient and Hessian of `G_p` with respect to `x - y`, as jets.
#[derive(Clone, Debug)]
pub struct GreenJets {
    pub order: usize,
    /// `g, d1, d2, d11, d12, d22`.
    pub parts: [[C64; JL]; 6],
}

impl GreenJets {
    pub const VALUE: usize = 0;
    pub const D1: usize = 1;
    pub const D2: usize = 2;
    pub const D11: usize = 3;
    pub const D12: usize = 4;
    pub const D22: usize = 5;

    pub fn new(order: usize) -> Self {
        assert!(order <= MAX_ORDER);
        Self {
            order,
            parts: [[C64::new(0.0, 0.0); JL]; 6],
        }
    }

    pub fn clear(&mut self) {
        let n1 = self.order + 1;
        for p in self.parts.iter_mut() {
            p[..n1].fill(C64::new(0.0, 0.0));
        }
    }

    pub fn part(&self, which: usize) -> &[C64] {
        &self.parts[which][..=self.order]
    }

    pub fn jet(&self, which: usize, centre: f64) -> Jet {
        Jet::new(centre, self.part(which).to_vec()).expect("valid order")
    }

    pub(crate) fn add_assign(&mut self, other: &GreenJets) {
        let n1 = self.order + 1;
        for (a, b) in self.parts.iter_mut().zip(&other.parts) {
            for i in 0..n1 {
                a[i] += b[i];
            }
        }
    }

    pub(crate) fn scale(&mut self, s: C64) {
        let n1 = self.order + 1;
        for p in self.parts.iter_mut() {
            for v in p[..n1].iter_mut() {
                *v *= s;
            }
        }
    }

    pub(crate) fn max_abs(&self, which: usize) -> f64 {
        self.part(which).iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// True when every component of `term` is below `tol` times the
    /// corresponding component of `self`.
    pub(crate) fn negligible(&self, term: &GreenJets, tol: f64) -> bool {
        (0..6).all(|q| {
            let t = term.max_abs(q);
            t == 0.0 || t <= tol * self.max_abs(q)
        })
    }
}

/// Spatial series `G_p1` at `x - y = delta`, Ewald path only.
pub fn greens_gp1(delta: [f64; 2], omega: &Jet, params: &LatticeParams, cfg: &EwaldConfig) -> Result<Jet> {
    let gf = GreenFunction::new(*params, omega.value().re, omega.order(), cfg)?;
    let mut out = GreenJets::new(omega.order());
    gf.gp1(delta, &mut out)?;
    Ok(out.jet(GreenJets::VALUE, omega.value().re))
}

/// Spectral series `G_p2` at `x - y = delta`, Ewald path only.
pub fn greens_gp2(delta: [f64; 2], omega: &Jet, params: &LatticeParams, cfg: &EwaldConfig) -> Result<Jet> {
    let gf = GreenFunction::new(*params, omega.value().re, omega.order(), cfg)?;
    let mut out = GreenJets::new(omega.order());
    gf.gp2(delta, &mut out)?;
    Ok(out.jet(GreenJets::VALUE, omega.value().re))
}

/// `G_p = G_p1 + G_p2` (or the spectral series when it applies).
pub fn greens_periodic(delta: [f64; 2], omega: &Jet, params: &LatticeParams, cfg: &EwaldConfig) -> Result<Jet> {
    let gf = GreenFunction::new(*params, omega.value().re, omega.order(), cfg)?;
    let mut out = GreenJets::new(omega.order());
    gf.eval(delta, &mut out, Method::Auto)?;
    Ok(out.jet(GreenJets::VALUE, omega.value().re))
}

/// Burton–Miller kernel `W_p = dG/dn_y + alpha d2G/dn_x dn_y` as a jet.
#[allow(clippy::too_many_arguments)]
pub fn greens_kernel_derivs(
    x: [f64; 2],
    y: [f64; 2],
    n_x: [f64; 2],
    n_y: [f64; 2],
    omega: &Jet,
    alpha: &Jet,
    params: &LatticeParams,
    cfg: &EwaldConfig,
) -> Result<Jet> {
    let w0 = omega.value().re;
    let gf = GreenFunction::new(*params, w0, omega.order(), cfg)?;
    let mut g = GreenJets::new(omega.order());
    gf.eval([x[0] - y[0], x[1] - y[1]], &mut g, Method::Auto)?;
    let mut out = vec![C64::new(0.0, 0.0); omega.order() + 1];
    kernel_value(&g, n_x, n_y, alpha.coeffs(), &mut out);
    Jet::new(w0, out)
}

#[cfg(test)]
mod tests;
