//! Far-field amplitudes of the diffracted plane waves, transmittance and
//! reflectance, all as jets in the angular frequency.

use num_complex::Complex64 as C64;

use crate::bem::{BoundaryMesh, SolveResult};
use crate::error::{Error, Result};
use crate::greens::{spectral_index_set, LatticeParams, SpectralIndexSet};
use crate::jets::{factorial, series, Jet, MAX_ORDER};
use crate::quadrature::gl_rule;

const JL: usize = MAX_ORDER + 1;
const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const POINTS: usize = 4;

/// Plane-wave amplitudes above (`+`) and below (`-`) the array.
#[derive(Debug, Clone)]
pub struct FarField {
    pub centre: f64,
    pub modes: Vec<i64>,
    pub c_plus: Vec<Jet>,
    pub c_minus: Vec<Jet>,
    /// `C_m = C_m^+ + delta_m0`: the transmitted amplitude.
    pub c_shifted: Vec<Jet>,
    /// `d_m^+` at the centre frequency.
    pub d_plus: Vec<[f64; 2]>,
    /// `d_m2 = k~_m / k` as jets.
    pub d2: Vec<Jet>,
}

/// `C_m^(+-) = -(1 / (2 L k~_m)) integral (xi_m n1 +- k~_m n2) u exp(-i(xi_m x1 +- k~_m x2))`.
pub fn far_coeffs(
    result: &SolveResult,
    modes: &SpectralIndexSet,
    mesh: &BoundaryMesh,
    params: &LatticeParams,
) -> Result<FarField> {
    let w0 = result.centre;
    let order = result.order;
    let n1 = order + 1;
    if modes.xi.is_empty() {
        return Err(Error::usage("no propagating modes"));
    }
    if modes.xi[0].order() < order {
        return Err(Error::usage("mode jets are shorter than the solve order"));
    }
    if result.traces.len() != mesh.len() {
        return Err(Error::usage("solve result does not belong to this mesh"));
    }
    let k = Jet::affine(w0, order, C64::new(1.0 / params.c, 0.0), ZERO);
    let rule = gl_rule(POINTS);
    let mut out = FarField {
        centre: w0,
        modes: modes.modes().collect(),
        c_plus: Vec::new(),
        c_minus: Vec::new(),
        c_shifted: Vec::new(),
        d_plus: Vec::new(),
        d2: Vec::new(),
    };
    let mut arg = [ZERO; JL];
    let mut ph = [ZERO; JL];
    let mut f = [ZERO; JL];
    let mut t = [ZERO; JL];
    for (idx, m) in modes.modes().enumerate() {
        let xi = modes.xi[idx].truncate(order);
        let kt = modes.ktilde[idx].truncate(order);
        let (xc, kc) = (xi.coeffs(), kt.coeffs());
        let mut sums = [[ZERO; JL]; 2];
        for (e, trace) in mesh.elements.iter().zip(&result.traces) {
            let half = 0.5 * e.length;
            for (s, sum) in [1.0, -1.0].iter().zip(sums.iter_mut()) {
                // Element integral of the phase factor.
                let mut acc = [ZERO; JL];
                for (tq, wq) in rule.nodes.iter().zip(&rule.weights) {
                    let y = e.point(*tq);
                    for i in 0..n1 {
                        arg[i] = C64::new(0.0, -1.0) * (xc[i] * y[0] + s * kc[i] * y[1]);
                    }
                    series::exp_into(&arg[..n1], &mut ph[..n1]);
                    for i in 0..n1 {
                        acc[i] += ph[i] * (wq * half);
                    }
                }
                for i in 0..n1 {
                    f[i] = xc[i] * e.normal[0] + s * kc[i] * e.normal[1];
                }
                series::mul_into(&f[..n1], &acc[..n1], &mut t[..n1]);
                series::mul_acc(&t[..n1], trace.coeffs(), &mut sum[..n1]);
            }
        }
        let scale = kt.scale(C64::new(-2.0 * params.l, 0.0));
        let cp = Jet::new(w0, sums[0][..n1].to_vec())?.checked_div(&scale)?;
        let cm = Jet::new(w0, sums[1][..n1].to_vec())?.checked_div(&scale)?;
        let shifted = if m == 0 { cp.add_scalar(C64::new(1.0, 0.0)) } else { cp.clone() };
        let d2 = kt.checked_div(&k)?;
        out.d_plus.push([xi.value().re / k.value().re, d2.value().re]);
        out.d2.push(d2);
        out.c_plus.push(cp);
        out.c_minus.push(cm);
        out.c_shifted.push(shifted);
    }
    Ok(out)
}

/// `T = (1/sin theta) sum |C_m|^2 d_m2`, `R = (1/sin theta) sum |C_m^-|^2 d_m2`.
pub fn transmittance(ff: &FarField, theta: f64) -> (Jet, Jet) {
    let order = ff.d2[0].order();
    let mut t = Jet::zero(ff.centre, order);
    let mut r = Jet::zero(ff.centre, order);
    for ((c, cm), d2) in ff.c_shifted.iter().zip(&ff.c_minus).zip(&ff.d2) {
        t = &t + &(&c.abs_sqr() * d2);
        r = &r + &(&cm.abs_sqr() * d2);
    }
    let s = C64::new(1.0 / theta.sin(), 0.0);
    (t.scale(s), r.scale(s))
}

/// Far field and `(T, R)` straight from a solve.
pub fn far_field(result: &SolveResult, mesh: &BoundaryMesh, params: &LatticeParams) -> Result<(FarField, Jet, Jet)> {
    let modes = spectral_index_set(&Jet::variable(result.centre, result.order), params)?;
    let ff = if mesh.is_empty() {
        empty_far_field(&modes, result.order, params)?
    } else {
        far_coeffs(result, &modes, mesh, params)?
    };
    let (t, r) = transmittance(&ff, params.theta);
    Ok((ff, t, r))
}

fn empty_far_field(modes: &SpectralIndexSet, order: usize, params: &LatticeParams) -> Result<FarField> {
    let w0 = modes.beta.centre();
    let k = Jet::affine(w0, order, C64::new(1.0 / params.c, 0.0), ZERO);
    let mut ff = FarField {
        centre: w0,
        modes: modes.modes().collect(),
        c_plus: Vec::new(),
        c_minus: Vec::new(),
        c_shifted: Vec::new(),
        d_plus: Vec::new(),
        d2: Vec::new(),
    };
    for (idx, m) in modes.modes().enumerate() {
        let d2 = modes.ktilde[idx].truncate(order).checked_div(&k)?;
        ff.d_plus.push([modes.xi[idx].value().re / k.value().re, d2.value().re]);
        ff.d2.push(d2);
        ff.c_plus.push(Jet::zero(w0, order));
        ff.c_minus.push(Jet::zero(w0, order));
        let c = if m == 0 { 1.0 } else { 0.0 };
        ff.c_shifted.push(Jet::constant(w0, order, C64::new(c, 0.0)));
    }
    Ok(ff)
}

/// `e_i = |(T + R)^(i) - delta_i0| / |T^(i)|`.
pub fn accuracy_indicator(t: &Jet, r: &Jet, i: usize) -> Result<f64> {
    if i > t.order() {
        return Err(Error::usage(format!("order {i} exceeds jet order {}", t.order())));
    }
    let ti = t.coeffs()[i] * factorial(i);
    if ti.norm() == 0.0 {
        return Err(Error::IndicatorUndefined { order: i });
    }
    let exact = if i == 0 { 1.0 } else { 0.0 };
    let s = (t.coeffs()[i] + r.coeffs()[i]) * factorial(i);
    Ok((s - exact).norm() / ti.norm())
}
