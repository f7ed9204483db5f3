//! Band-averaged transmittance `J` from the Padé surrogates, integrated in
//! closed form by partial fractions.
//!
//! For `m != 0` the substitutions `cos t = a + b/w`, `s = tan(t/2)` remove
//! the square root of `d_m2` and leave a rational function of `s`:
//!
//! `8 b s^2 sum_i phat_i U^i D^(K-i) / (qhat (1+s^2) D^(K-2N+2) prod_j V_j)`
//!
//! with `D = (1-a) - (1+a) s^2`, `U = b - w0(1-a) + (b + w0(1+a)) s^2`,
//! `V_j = b - alphahat_j(1-a) + (b + alphahat_j(1+a)) s^2` and
//! `K = max(2M, 2N-2)`. The sign of `(a, b)` is flipped for `m < 0` so that
//! `b > 0`; this maps the anomaly to `s = 0` instead of `s = infinity`.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::greens::LatticeParams;
use crate::jets::series;
use crate::pade::{self, direction_cosine, PadeModel};
use crate::poly;
use crate::quadrature::adaptive_gk;
use crate::sweep::BandPartition;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };
const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Poles closer than this are merged into one of higher multiplicity.
pub const CLUSTER_TOL: f64 = 1e-8;
/// A pole this close to the integration segment forces quadrature.
pub const SEGMENT_GUARD: f64 = 1e-10;
/// Relative tolerance of the fallback quadrature.
pub const FALLBACK_TOL: f64 = 1e-12;
/// Largest accepted `sum |term| / |sum term|` of the partial fractions.
pub const CANCELLATION_LIMIT: f64 = 1e4;

/// `|C(w)|^2 = sum phat_i (w - w0)^i / (qhat prod (w - alphahat_j))`.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalIntegrand {
    pub omega0: f64,
    pub phat: Vec<C64>,
    pub qhat: f64,
    pub alphahat: Vec<C64>,
}

impl RationalIntegrand {
    pub fn eval(&self, omega: f64) -> C64 {
        let num = poly::eval(&self.phat, C64::new(omega - self.omega0, 0.0));
        let den = self.alphahat.iter().fold(C64::new(self.qhat, 0.0), |acc, a| acc * (omega - a));
        num / den
    }

    /// `M` and `N` of the underlying model.
    fn degrees(&self) -> (usize, usize) {
        ((self.phat.len() - 1) / 2, self.alphahat.len() / 2)
    }
}

/// `C conj(C)` of a model, as a rational function on the real axis.
pub fn abs_square_rational(model: &PadeModel) -> Result<RationalIntegrand> {
    let p = model.numerator();
    let q = model.denominator();
    let n = q.len() - 1;
    let qn = q[n];
    if qn == ZERO {
        return Err(Error::DegenerateDegree("q_N = 0".into()));
    }
    let m = p.len() - 1;
    let phat = (0..=2 * m)
        .map(|i| {
            let lo = i.saturating_sub(m);
            (lo..=i.min(m)).map(|j| p[j] * p[i - j].conj()).sum()
        })
        .collect();
    let poles = pade::poles(model)?;
    let mut alphahat = poles.clone();
    alphahat.extend(poles.iter().map(|a| a.conj()));
    Ok(RationalIntegrand {
        omega0: model.centre,
        phat,
        qhat: qn.norm_sqr(),
        alphahat,
    })
}

/// Partial-fraction coefficients `A_j / (s - pole)^j`, `j = 1..=coeffs.len()`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartialFractionTerm {
    pub pole: C64,
    pub coeffs: Vec<C64>,
}

/// Merges poles within [`CLUSTER_TOL`], summing multiplicities.
pub fn cluster_poles(poles: &[(C64, usize)]) -> Vec<(C64, usize)> {
    let mut out: Vec<(C64, usize)> = Vec::new();
    for &(z, m) in poles {
        match out.iter_mut().find(|(w, _)| (w - z).norm() <= CLUSTER_TOL) {
            Some((w, k)) => {
                *w = (*w * *k as f64 + z * m as f64) / (*k + m) as f64;
                *k += m;
            }
            None => out.push((z, m)),
        }
    }
    out
}

/// `P(s) / (lead prod (s - pole_i)^m_i)` split by the cover-up rule; the
/// derivatives of `P / Q_i` come from truncated series arithmetic.
pub fn heaviside_coefficients(p: &[C64], poles: &[(C64, usize)], lead: C64) -> Result<Vec<PartialFractionTerm>> {
    let total: usize = poles.iter().map(|x| x.1).sum();
    if poly::trimmed(p, 0.0).len() > total {
        return Err(Error::Invariant(format!(
            "numerator degree {} is not below the denominator degree {total}",
            p.len() - 1
        )));
    }
    let mut out = Vec::with_capacity(poles.len());
    for (i, &(z, mi)) in poles.iter().enumerate() {
        let ps = poly::shifted(p, z, mi);
        let mut qs = vec![ZERO; mi];
        qs[0] = lead;
        let mut tmp = vec![ZERO; mi];
        for (k, &(w, mk)) in poles.iter().enumerate() {
            if k == i {
                continue;
            }
            let mut factor = vec![ZERO; mi];
            factor[0] = z - w;
            if mi > 1 {
                factor[1] = ONE;
            }
            for _ in 0..mk {
                series::mul_into(&qs, &factor, &mut tmp);
                qs.copy_from_slice(&tmp);
            }
        }
        let mut quot = vec![ZERO; mi];
        if !series::div_into(&ps, &qs, &mut quot) {
            return Err(Error::Invariant("coincident poles after clustering".into()));
        }
        out.push(PartialFractionTerm {
            pole: z,
            coeffs: (1..=mi).map(|j| quot[mi - j]).collect(),
        });
    }
    Ok(out)
}

/// `integral_{s1}^{s2} A / (s - pole)^j ds` along the real segment.
pub fn integrate_term(pole: C64, a: C64, j: usize, s1: f64, s2: f64) -> C64 {
    let (d1, d2) = (s1 - pole, s2 - pole);
    if j == 1 {
        // Continuous argument along the segment.
        let r = d2 / d1;
        a * C64::new(d2.norm().ln() - d1.norm().ln(), r.arg())
    } else {
        let k = (j - 1) as i32;
        -a / (j - 1) as f64 * (d2.powi(-k) - d1.powi(-k))
    }
}

/// Sum of the term integrals and the sum of their moduli.
fn integrate_terms(terms: &[PartialFractionTerm], s1: f64, s2: f64) -> (C64, f64) {
    terms
        .iter()
        .flat_map(|t| t.coeffs.iter().enumerate().map(move |(j, a)| integrate_term(t.pole, *a, j + 1, s1, s2)))
        .fold((ZERO, 0.0), |(s, n), v| (s + v, n + v.norm()))
}

fn near_segment(poles: &[(C64, usize)], s1: f64, s2: f64) -> bool {
    poles
        .iter()
        .any(|(z, _)| z.im.abs() <= SEGMENT_GUARD && z.re >= s1 - SEGMENT_GUARD && z.re <= s2 + SEGMENT_GUARD)
}

/// `(a, b)` of the substitution with `b > 0`.
fn frame(m: i64, params: &LatticeParams) -> (f64, f64) {
    let a = params.theta.cos();
    let b = 2.0 * m as f64 * std::f64::consts::PI * params.c / params.l;
    if b < 0.0 {
        (-a, -b)
    } else {
        (a, b)
    }
}

/// Lower edge of the propagating range of mode `m`.
pub fn cutoff(m: i64, params: &LatticeParams) -> f64 {
    if m == 0 {
        return 0.0;
    }
    let (a, b) = frame(m, params);
    b / (1.0 - a)
}

/// How a mode integral was evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ClosedForm,
    /// The partial fractions cancelled beyond [`CANCELLATION_LIMIT`].
    Cancellation,
    /// A pole lies on the integration path.
    PoleOnPath,
}

/// Result of one mode integral.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeIntegral {
    pub value: C64,
    pub method: Method,
    /// Set when a pole on the path forced quadrature.
    pub warning: Option<String>,
}

enum Closed {
    Value { value: C64, moduli: f64 },
    PoleOnPath,
}

/// `I_m = integral_{wa}^{wb} |C_m|^2 d_m2 dw` in closed form.
///
/// When the partial-fraction terms cancel by more than
/// [`CANCELLATION_LIMIT`] the smooth integrand of the substituted variable
/// is integrated by adaptive quadrature instead. This happens for
/// `M >= N` well away from the cutoff, where the polynomial part in
/// `w - w0` is written through poles at `w = infinity`.
pub fn mode_integral(integ: &RationalIntegrand, wa: f64, wb: f64, m: i64, params: &LatticeParams) -> Result<ModeIntegral> {
    if !(wb > wa) {
        return Ok(ModeIntegral { value: ZERO, method: Method::ClosedForm, warning: None });
    }
    if wa < cutoff(m, params) * (1.0 - 1e-12) {
        return Err(Error::usage(format!("mode {m} is evanescent below {}", cutoff(m, params))));
    }
    let closed = if m == 0 { direct_integral(integ, wa, wb, params) } else { s_frame_integral(integ, wa, wb, m, params) };
    match closed? {
        Closed::Value { value, moduli } if moduli <= CANCELLATION_LIMIT * value.norm() => {
            Ok(ModeIntegral { value, method: Method::ClosedForm, warning: None })
        }
        Closed::Value { .. } => Ok(ModeIntegral {
            value: smooth_quadrature(integ, wa, wb, m, params)?,
            method: Method::Cancellation,
            warning: None,
        }),
        Closed::PoleOnPath => {
            let value = mode_integral_quadrature(integ, wa, wb, m, params, FALLBACK_TOL)?;
            Ok(ModeIntegral {
                value,
                method: Method::PoleOnPath,
                warning: Some(format!(
                    "mode {m} on [{wa}, {wb}]: pole on the integration path, used adaptive quadrature"
                )),
            })
        }
    }
}

/// Quadrature in `s`, where the square root of `d_m2` is gone.
fn smooth_quadrature(integ: &RationalIntegrand, wa: f64, wb: f64, m: i64, params: &LatticeParams) -> Result<C64> {
    if m == 0 {
        return mode_integral_quadrature(integ, wa, wb, m, params, FALLBACK_TOL);
    }
    let (a, b) = frame(m, params);
    let f = |s: f64| {
        let d = (1.0 - a) - (1.0 + a) * s * s;
        let w = b * (1.0 + s * s) / d;
        integ.eval(w) * (8.0 * b * s * s / ((1.0 + s * s) * d * d))
    };
    adaptive_gk(f, s_of(wa, a, b), s_of(wb, a, b), FALLBACK_TOL, 0.0)
}

/// Adaptive Gauss–Kronrod quadrature of the same integrand.
pub fn mode_integral_quadrature(
    integ: &RationalIntegrand,
    wa: f64,
    wb: f64,
    m: i64,
    params: &LatticeParams,
    rel_tol: f64,
) -> Result<C64> {
    adaptive_gk(|w| integ.eval(w) * direction_cosine(m, w, params), wa, wb, rel_tol, 0.0)
}

/// `m = 0`: `d_02 = sin theta`, integrate in `x = w - w0` directly.
fn direct_integral(integ: &RationalIntegrand, wa: f64, wb: f64, params: &LatticeParams) -> Result<Closed> {
    let (xa, xb) = (wa - integ.omega0, wb - integ.omega0);
    let beta: Vec<C64> = integ.alphahat.iter().map(|a| a - integ.omega0).collect();
    let den = beta
        .iter()
        .fold(vec![C64::new(integ.qhat, 0.0)], |acc, b| poly::mul(&acc, &[-b, ONE]));
    let (quot, rem) = poly::divrem(&integ.phat, &den);
    let (mut value, mut moduli) = quot
        .iter()
        .enumerate()
        .map(|(k, c)| c * (xb.powi(k as i32 + 1) - xa.powi(k as i32 + 1)) / (k + 1) as f64)
        .fold((ZERO, 0.0), |(s, n), v| (s + v, n + v.norm()));
    if !beta.is_empty() {
        let poles = cluster_poles(&beta.iter().map(|b| (*b, 1)).collect::<Vec<_>>());
        if near_segment(&poles, xa, xb) {
            return Ok(Closed::PoleOnPath);
        }
        let terms = heaviside_coefficients(&rem, &poles, C64::new(integ.qhat, 0.0))?;
        let (v, n) = integrate_terms(&terms, xa, xb);
        value += v;
        moduli += n;
    }
    let st = params.theta.sin();
    Ok(Closed::Value { value: value * st, moduli: moduli * st })
}

/// `s = tan(t/2)` with `cos t = a + b/w`, clipped to the propagating range.
fn s_of(w: f64, a: f64, b: f64) -> f64 {
    let x = (a + b / w).clamp(-1.0, 1.0);
    ((1.0 - x) / (1.0 + x)).sqrt()
}

fn s_frame_integral(
    integ: &RationalIntegrand,
    wa: f64,
    wb: f64,
    m: i64,
    params: &LatticeParams,
) -> Result<Closed> {
    let (a, b) = frame(m, params);
    let (mdeg, ndeg) = integ.degrees();
    let w0 = integ.omega0;
    let k = (2 * mdeg).max((2 * ndeg).saturating_sub(2));
    let e = k + 2 - 2 * ndeg;
    let d = [C64::new(1.0 - a, 0.0), ZERO, C64::new(-(1.0 + a), 0.0)];
    let u = [C64::new(b - w0 * (1.0 - a), 0.0), ZERO, C64::new(b + w0 * (1.0 + a), 0.0)];
    let mut upow = vec![vec![ONE]];
    let mut dpow = vec![vec![ONE]];
    for i in 1..=k {
        upow.push(poly::mul(&upow[i - 1], &u));
        dpow.push(poly::mul(&dpow[i - 1], &d));
    }
    let mut num = vec![ZERO; 2 * k + 3];
    for (i, ph) in integ.phat.iter().enumerate() {
        let t = poly::mul(&upow[i], &dpow[k - i]);
        for (j, c) in t.iter().enumerate() {
            num[j + 2] += c * ph * (8.0 * b);
        }
    }
    let mut raw = vec![(I, 1), (-I, 1)];
    if e > 0 {
        let r0 = ((1.0 - a) / (1.0 + a)).sqrt();
        raw.push((C64::new(r0, 0.0), e));
        raw.push((C64::new(-r0, 0.0), e));
    }
    let mut lead = C64::new(integ.qhat * (1.0 + a).powi(e as i32), 0.0);
    for al in &integ.alphahat {
        let c2 = b + al * (1.0 + a);
        if c2.norm() == 0.0 {
            return Ok(Closed::PoleOnPath);
        }
        lead *= c2;
        let r = ((al * (1.0 - a) - b) / c2).sqrt();
        raw.push((r, 1));
        raw.push((-r, 1));
    }
    let poles = cluster_poles(&raw);
    let (s1, s2) = (s_of(wa, a, b), s_of(wb, a, b));
    if near_segment(&poles, s1, s2) {
        return Ok(Closed::PoleOnPath);
    }
    let terms = heaviside_coefficients(&num, &poles, lead)?;
    let (value, moduli) = integrate_terms(&terms, s1, s2);
    Ok(Closed::Value { value, moduli })
}

/// `J` and its pieces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandAverage {
    #[serde(rename = "J")]
    pub j: f64,
    /// Contribution of each subband to `J`.
    pub contributions: Vec<f64>,
    /// Largest `|Im I_m| / |Re I_m|` met.
    pub max_imag_ratio: f64,
    /// Mode integrals done in closed form and by quadrature.
    pub closed_form: usize,
    pub quadrature: usize,
    pub warnings: Vec<String>,
}

/// `J = (1 / ((w2 - w1) sin theta)) sum over subbands and modes of I_m`.
pub fn band_average(partition: &BandPartition, params: &LatticeParams) -> Result<BandAverage> {
    let [w1, w2] = partition.band;
    let norm = 1.0 / ((w2 - w1) * params.theta.sin());
    let mut out = BandAverage {
        j: 0.0,
        contributions: Vec::with_capacity(partition.len()),
        max_imag_ratio: 0.0,
        closed_form: 0,
        quadrature: 0,
        warnings: Vec::new(),
    };
    for (i, fam) in partition.families.iter().enumerate() {
        let (lo, hi) = (partition.borders[i], partition.borders[i + 1]);
        let mut sum = 0.0;
        for (model, &m) in fam.transmitted.iter().zip(&fam.modes) {
            let a = lo.max(cutoff(m, params));
            if a >= hi {
                continue;
            }
            let integ = abs_square_rational(model)?;
            let r = mode_integral(&integ, a, hi, m, params)?;
            if r.method == Method::ClosedForm {
                out.closed_form += 1;
            } else {
                out.quadrature += 1;
            }
            if let Some(w) = r.warning {
                out.warnings.push(w);
            }
            if r.value.re != 0.0 {
                out.max_imag_ratio = out.max_imag_ratio.max(r.value.im.abs() / r.value.re.abs());
            }
            sum += r.value.re;
        }
        out.contributions.push(sum * norm);
        out.j += sum * norm;
    }
    Ok(out)
}
