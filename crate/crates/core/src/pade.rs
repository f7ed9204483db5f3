//! Complex Padé approximants of the far-field coefficients, fitted from their
//! frequency jets, and the transmittance surrogate built from them.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::greens::LatticeParams;
use crate::jets::Jet;
use crate::poly;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Trailing denominator coefficients below this fraction of the largest
/// (in the scaled frame) are treated as zero.
pub const DEGREE_TRIM: f64 = 1e-13;
/// Fits whose relative residual exceeds this are flagged as degenerate.
pub const FIT_RESIDUAL: f64 = 1e-10;
/// `|den| < POLE_HIT * sum |q_i||dx|^i` counts as evaluating at a pole.
pub const POLE_HIT: f64 = 1e-14;
/// Pole and zero closer than this (scaled frame) form a Froissart doublet.
pub const DOUBLET: f64 = 1e-8;
const REFINE: usize = 3;

/// `sum p_i (w - w0)^i / sum q_i (w - w0)^i` with `q_0 = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PadeModel {
    pub centre: f64,
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub p: Vec<C64>,
    pub q: Vec<C64>,
    /// Roots of the denominator, absolute frequencies.
    pub poles: Vec<C64>,
    /// Relative residual of the coefficient equations.
    pub residual: f64,
    /// Frequency unit of the fit; coefficients are balanced in `(w - w0)/scale`.
    pub scale: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl PadeModel {
    /// Denominator without negligible trailing coefficients.
    pub fn denominator(&self) -> &[C64] {
        let big = self
            .q
            .iter()
            .enumerate()
            .fold(0.0f64, |m, (i, c)| m.max(c.norm() * self.scale.powi(i as i32)));
        let mut n = self.q.len();
        while n > 1 && self.q[n - 1].norm() * self.scale.powi(n as i32 - 1) <= DEGREE_TRIM * big {
            n -= 1;
        }
        &self.q[..n]
    }

    /// Numerator without exactly vanishing trailing coefficients.
    pub fn numerator(&self) -> &[C64] {
        poly::trimmed(&self.p, 0.0)
    }

    /// A model that is constant in frequency.
    pub fn constant(centre: f64, value: C64) -> Self {
        Self {
            centre,
            m: 0,
            n: 0,
            p: vec![value],
            q: vec![C64::new(1.0, 0.0)],
            poles: Vec::new(),
            residual: 0.0,
            scale: 1.0,
            warnings: Vec::new(),
        }
    }
}

/// Fits `[M, N]` to the scaled Taylor coefficients of `jet`.
///
/// The coefficient equations `p_i = a_i + sum_j a_(i-j) q_j` (`i <= M+N`) are
/// solved by unrestarted GMRES from zero, at most `M+N+1` steps, after
/// rescaling the frequency so that the coefficients have comparable size.
pub fn fit(jet: &Jet, m: usize, n: usize) -> Result<PadeModel> {
    let len = m + n + 1;
    if jet.order() + 1 < len {
        return Err(Error::usage(format!("[{m},{n}] needs a jet of order {}, got {}", m + n, jet.order())));
    }
    let a = &jet.coeffs()[..len];
    let scale = balance_scale(a);
    let b: Vec<C64> = a.iter().enumerate().map(|(i, c)| c * scale.powi(i as i32)).collect();
    let mut k = DMatrix::<C64>::zeros(len, len);
    for i in 0..len {
        if i <= m {
            k[(i, i)] = C64::new(1.0, 0.0);
        }
        for j in 1..=i.min(n) {
            k[(i, m + j)] = -b[i - j];
        }
    }
    let rhs = DVector::from_column_slice(&b);
    let bn = rhs.norm();
    let mut x = gmres(&k, &rhs, len);
    let mut residual = if bn > 0.0 { (&k * &x - &rhs).norm() / bn } else { 0.0 };
    // Iterative refinement.
    for _ in 0..REFINE {
        if residual <= 1e-15 {
            break;
        }
        let r = &rhs - &k * &x;
        let y = &x + gmres(&k, &r, len);
        let ry = (&k * &y - &rhs).norm() / bn;
        if ry >= residual {
            break;
        }
        x = y;
        residual = ry;
    }
    let mut warnings = Vec::new();
    if residual > FIT_RESIDUAL {
        warnings.push(format!("degenerate [{m},{n}] fit at {}: residual {residual:.2e}", jet.centre()));
    }
    let ps: Vec<C64> = (0..=m).map(|i| x[i]).collect();
    let mut qs = vec![C64::new(1.0, 0.0)];
    qs.extend((1..=n).map(|j| x[m + j]));
    let dq = poly::trimmed(&qs, DEGREE_TRIM);
    let tp = poly::roots(dq)?;
    let zp = poly::roots(poly::trimmed(&ps, DEGREE_TRIM)).unwrap_or_default();
    if tp.iter().any(|t| zp.iter().any(|z| (t - z).norm() < DOUBLET)) {
        warnings.push(format!("Froissart doublet in the [{m},{n}] fit at {}", jet.centre()));
    }
    let w0 = jet.centre();
    Ok(PadeModel {
        centre: w0,
        m,
        n,
        p: ps.iter().enumerate().map(|(i, c)| c / scale.powi(i as i32)).collect(),
        q: qs.iter().enumerate().map(|(i, c)| c / scale.powi(i as i32)).collect(),
        poles: tp.iter().map(|t| t * scale + w0).collect(),
        residual,
        scale,
        warnings,
    })
}

/// Estimated radius of convergence of the series, or 1 if it is undefined.
fn balance_scale(a: &[C64]) -> f64 {
    let base = if a[0].norm() > 0.0 { a[0].norm() } else { a.iter().fold(0.0f64, |m, c| m.max(c.norm())) };
    if base == 0.0 {
        return 1.0;
    }
    let r = a
        .iter()
        .enumerate()
        .skip(1)
        .fold(0.0f64, |m, (i, c)| m.max((c.norm() / base).powf(1.0 / i as f64)));
    if r > 0.0 && r.is_finite() {
        1.0 / r
    } else {
        1.0
    }
}

/// Unrestarted GMRES from a zero start.
fn gmres(a: &DMatrix<C64>, b: &DVector<C64>, steps: usize) -> DVector<C64> {
    let n = b.len();
    let beta = b.norm();
    if beta == 0.0 {
        return DVector::zeros(n);
    }
    let mut v = vec![b / C64::new(beta, 0.0)];
    let mut h = DMatrix::<C64>::zeros(steps + 1, steps);
    let mut rot: Vec<(f64, C64)> = Vec::with_capacity(steps);
    let mut g = DVector::<C64>::zeros(steps + 1);
    g[0] = C64::new(beta, 0.0);
    let mut used = 0;
    for k in 0..steps {
        let mut w = a * &v[k];
        // Gram–Schmidt twice.
        for _ in 0..2 {
            for (j, vj) in v.iter().enumerate() {
                let c = vj.dotc(&w);
                h[(j, k)] += c;
                w -= vj * c;
            }
        }
        let hn = w.norm();
        h[(k + 1, k)] = C64::new(hn, 0.0);
        for (j, &(c, s)) in rot.iter().enumerate() {
            let (x, y) = (h[(j, k)], h[(j + 1, k)]);
            h[(j, k)] = x * c + s * y;
            h[(j + 1, k)] = -s.conj() * x + y * c;
        }
        let (x, y) = (h[(k, k)], h[(k + 1, k)]);
        let r = x.norm().hypot(y.norm());
        let (c, s) = if r == 0.0 {
            (1.0, ZERO)
        } else if x.norm() == 0.0 {
            (0.0, y.conj() / r)
        } else {
            (x.norm() / r, (x / x.norm()) * y.conj() / r)
        };
        rot.push((c, s));
        h[(k, k)] = x * c + s * y;
        h[(k + 1, k)] = ZERO;
        let gk = g[k];
        g[k] = gk * c;
        g[k + 1] = -s.conj() * gk;
        used = k + 1;
        if hn <= 1e-14 * beta || g[k + 1].norm() <= 1e-15 * beta {
            break;
        }
        v.push(w / C64::new(hn, 0.0));
    }
    // Back substitution; singular directions get a zero component.
    let mut y = vec![ZERO; used];
    let big = (0..used).fold(0.0f64, |m, i| m.max(h[(i, i)].norm()));
    for i in (0..used).rev() {
        let mut s = g[i];
        for j in i + 1..used {
            s -= h[(i, j)] * y[j];
        }
        y[i] = if h[(i, i)].norm() > 1e-14 * big { s / h[(i, i)] } else { ZERO };
    }
    let mut x = DVector::<C64>::zeros(n);
    for (vi, yi) in v.iter().zip(&y) {
        x += vi * *yi;
    }
    x
}

/// Horner evaluation of the model at `omega`.
pub fn evaluate(model: &PadeModel, omega: f64) -> Result<C64> {
    let dx = C64::new(omega - model.centre, 0.0);
    let den = poly::eval(&model.q, dx);
    if den.norm() <= POLE_HIT * poly::eval_scale(&model.q, dx) {
        return Err(Error::PoleHit { omega });
    }
    Ok(poly::eval(&model.p, dx) / den)
}

/// Denominator roots (absolute frequencies); recomputed from `q`.
pub fn poles(model: &PadeModel) -> Result<Vec<C64>> {
    let s = model.scale;
    let q: Vec<C64> = model.denominator().iter().enumerate().map(|(i, c)| c * s.powi(i as i32)).collect();
    Ok(poly::roots(&q)?.into_iter().map(|t| t * s + model.centre).collect())
}

/// `d_m2(w) = sqrt(1 - (cos theta + 2 m c pi / (w L))^2)`, zero when evanescent.
pub fn direction_cosine(m: i64, omega: f64, params: &LatticeParams) -> f64 {
    if m == 0 {
        return params.theta.sin();
    }
    if omega <= 0.0 {
        return 0.0;
    }
    let x = params.theta.cos() + 2.0 * std::f64::consts::PI * m as f64 * params.c / (omega * params.l);
    let rad = 1.0 - x * x;
    if rad > 0.0 {
        rad.sqrt()
    } else {
        0.0
    }
}

/// `(1/sin theta) sum_m |C_m(w)|^2 d_m2(w)` over one model per mode.
pub fn transmittance_estimate(models: &[PadeModel], modes: &[i64], omega: f64, params: &LatticeParams) -> Result<f64> {
    let mut t = 0.0;
    for (model, &m) in models.iter().zip(modes) {
        let d = direction_cosine(m, omega, params);
        if d > 0.0 {
            t += evaluate(model, omega)?.norm_sqr() * d;
        }
    }
    Ok(t / params.theta.sin())
}

/// Padé models of every propagating mode about one centre.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PadeFamily {
    pub centre: f64,
    pub modes: Vec<i64>,
    /// `[M, N]` models of the transmitted amplitudes `C_m`.
    pub transmitted: Vec<PadeModel>,
    /// `[M-1, N]` companions of `transmitted`.
    pub lower: Vec<PadeModel>,
    /// `[M, N]` models of the reflected amplitudes `C_m^-`.
    pub reflected: Vec<PadeModel>,
}

impl PadeFamily {
    /// Fits all models from the amplitude jets (`M >= 1`).
    pub fn fit(modes: Vec<i64>, transmitted: &[Jet], reflected: &[Jet], m: usize, n: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::usage("the sweep needs M >= 1 for the [M-1, N] companions"));
        }
        if transmitted.is_empty() || transmitted.len() != modes.len() || reflected.len() != modes.len() {
            return Err(Error::usage("one transmitted and one reflected jet per mode"));
        }
        let fam = |jets: &[Jet], mm: usize| jets.iter().map(|j| fit(j, mm, n)).collect::<Result<Vec<_>>>();
        Ok(Self {
            centre: transmitted[0].centre(),
            transmitted: fam(transmitted, m)?,
            lower: fam(transmitted, m - 1)?,
            reflected: fam(reflected, m)?,
            modes,
        })
    }

    /// `T^(M,N)(w)`.
    pub fn transmittance(&self, omega: f64, params: &LatticeParams) -> Result<f64> {
        transmittance_estimate(&self.transmitted, &self.modes, omega, params)
    }

    /// `T^(M-1,N)(w)`.
    pub fn transmittance_lower(&self, omega: f64, params: &LatticeParams) -> Result<f64> {
        transmittance_estimate(&self.lower, &self.modes, omega, params)
    }

    pub fn reflectance(&self, omega: f64, params: &LatticeParams) -> Result<f64> {
        transmittance_estimate(&self.reflected, &self.modes, omega, params)
    }

    /// Poles of all transmitted models.
    pub fn poles(&self) -> impl Iterator<Item = C64> + '_ {
        self.transmitted.iter().flat_map(|m| m.poles.iter().copied())
    }

    pub fn warnings(&self) -> impl Iterator<Item = &String> + '_ {
        self.transmitted
            .iter()
            .chain(&self.lower)
            .chain(&self.reflected)
            .flat_map(|m| m.warnings.iter())
    }
}
