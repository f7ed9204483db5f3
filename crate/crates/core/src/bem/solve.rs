use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use super::assemble::{assemble_rows, for_each_node, rule_for};
use super::mirror::{self, Mirror};
use super::{incident_coeffs, BemConfig, BoundaryMesh};
use crate::error::{Error, Result};
use crate::greens::{GreenFunction, GreenJets, LatticeParams, Method};
use crate::jets::Jet;
use crate::linalg::LuFactor;

/// Boundary traces `u^(i)` about one frequency.
#[derive(Debug, Clone)]
pub struct SolveResult {
    pub centre: f64,
    pub order: usize,
    /// Per-element jet of the trace.
    pub traces: Vec<Jet>,
    /// Coupling constant, frozen at the centre.
    pub alpha: Jet,
    /// `|A_0 u_i - rhs_i| / |rhs_i|` for every order.
    pub residuals: Vec<f64>,
}

/// One LU factorization of `A_0`, then `A_0 u_i = b_i - sum_{j=1..i} A_j u_{i-j}`.
pub fn solve_derivatives(
    mesh: &BoundaryMesh,
    omega0: f64,
    order: usize,
    params: &LatticeParams,
    cfg: &BemConfig,
) -> Result<SolveResult> {
    let k0 = params.wavenumber(omega0);
    let alpha = if cfg.burton_miller { C64::new(0.0, -1.0 / k0) } else { C64::new(0.0, 0.0) };
    let alpha = Jet::constant(omega0, order, alpha);
    if mesh.is_empty() {
        return Ok(SolveResult {
            centre: omega0,
            order,
            traces: Vec::new(),
            alpha,
            residuals: vec![0.0; order + 1],
        });
    }
    let sym = if cfg.mirror { mirror::detect(mesh, params) } else { None };
    let mask = sym.as_ref().map(Mirror::row_mask);
    let asm = assemble_rows(mesh, &Jet::variable(omega0, order), params, cfg, mask.as_deref())?;
    let (matrices, rhs) = match &sym {
        Some(m) => fold(m, asm.matrices, asm.rhs),
        None => (asm.matrices, asm.rhs),
    };
    let a0 = &matrices[0];
    let lu = LuFactor::new(a0.clone(), omega0)?;
    let mut us: Vec<DVector<C64>> = Vec::with_capacity(order + 1);
    let mut residuals = Vec::with_capacity(order + 1);
    for i in 0..=order {
        let mut b = rhs[i].clone();
        for j in 1..=i {
            b -= &matrices[j] * &us[i - j];
        }
        let u = lu.solve(&b);
        if u.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::SingularMatrix { omega: omega0 });
        }
        let r = (a0 * &u - &b).norm() / b.norm().max(f64::MIN_POSITIVE);
        residuals.push(r);
        us.push(u);
    }
    let slot = |a: usize| sym.as_ref().map_or(a, |m| m.orbit[a]);
    let traces = (0..mesh.len())
        .map(|a| Jet::new(omega0, us.iter().map(|u| u[slot(a)]).collect()).expect("order bounded"))
        .collect();
    Ok(SolveResult {
        centre: omega0,
        order,
        traces,
        alpha,
        residuals,
    })
}

/// Representative rows, columns summed over each orbit.
fn fold(m: &Mirror, matrices: Vec<DMatrix<C64>>, rhs: Vec<DVector<C64>>) -> (Vec<DMatrix<C64>>, Vec<DVector<C64>>) {
    let nr = m.reps.len();
    let folded = matrices
        .iter()
        .map(|a| {
            let mut f = DMatrix::<C64>::zeros(nr, nr);
            for (b, &o) in m.orbit.iter().enumerate() {
                for (r, &row) in m.reps.iter().enumerate() {
                    f[(r, o)] += a[(row, b)];
                }
            }
            f
        })
        .collect();
    let rhs = rhs
        .iter()
        .map(|v| DVector::from_iterator(nr, m.reps.iter().map(|&r| v[r])))
        .collect();
    (folded, rhs)
}

/// `u(x) = u_in(x) - integral over Gamma of dG/dn_y u`, value part only.
pub fn interior_field(
    x: [f64; 2],
    result: &SolveResult,
    mesh: &BoundaryMesh,
    params: &LatticeParams,
    cfg: &BemConfig,
) -> Result<C64> {
    let w0 = result.centre;
    let d = [params.theta.cos(), params.theta.sin()];
    let mut u = [C64::new(0.0, 0.0)];
    incident_coeffs(d[0] * x[0] + d[1] * x[1], w0, params.c, &mut u);
    if mesh.is_empty() {
        return Ok(u[0]);
    }
    if result.traces.len() != mesh.len() {
        return Err(Error::usage("solve result does not belong to this mesh"));
    }
    let gf = GreenFunction::new(*params, w0, 0, &cfg.ewald)?;
    let mut g = GreenJets::new(0);
    let mut sum = C64::new(0.0, 0.0);
    let mut warned = false;
    for (e, trace) in mesh.elements.iter().zip(&result.traces) {
        let dist = (x[0] - e.mid[0]).hypot(x[1] - e.mid[1]);
        if dist < e.length && !warned {
            log::warn!("interior_field: point within one element length of the boundary");
            warned = true;
        }
        let (panels, points) = rule_for(dist / e.length);
        let mut acc = C64::new(0.0, 0.0);
        for_each_node(panels, points, |t, w| {
            let y = e.point(t);
            gf.eval([x[0] - y[0], x[1] - y[1]], &mut g, Method::Auto)?;
            let p = &g.parts;
            // dG/dn_y = -n_y . grad g
            acc += (p[1][0] * e.normal[0] + p[2][0] * e.normal[1]) * w;
            Ok(())
        })?;
        sum += acc * (0.5 * e.length) * trace.value();
    }
    Ok(u[0] + sum)
}
