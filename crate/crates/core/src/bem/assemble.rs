use std::collections::HashMap;
use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use super::factored::Factored;
use super::{incident_coeffs, BemConfig, BoundaryMesh, Element};
use crate::error::{Error, Result};
use crate::greens::{CellExpansion, GreenFunction, GreenJets, LatticeParams, Method};
use crate::jets::{series, Jet, MAX_ORDER};
use crate::quadrature::gl_rule;

const JL: usize = MAX_ORDER + 1;
const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const SELF_POINTS: usize = 16;
const LOG_TERMS: usize = 60;

/// Taylor coefficients of the discretized system `A(omega) u = b(omega)`.
#[derive(Debug, Clone)]
pub struct Assembly {
    pub centre: f64,
    pub order: usize,
    /// Frozen coupling constant `alpha = -i/k(centre)` (zero without Burton–Miller).
    pub alpha: C64,
    /// `A_i`, the scaled `i`-th coefficients of the matrix.
    pub matrices: Vec<DMatrix<C64>>,
    /// `b_i`, the scaled coefficients of the right-hand side.
    pub rhs: Vec<DVector<C64>>,
}

pub(crate) struct Ctx {
    pub gf: GreenFunction,
    cell: Option<CellExpansion>,
    pub alpha: C64,
    pub n1: usize,
    /// `c_l(omega) = (-k^2/4)^l / (l!)^2`, the series of `J0(kr)` in `r^2`.
    cl: Vec<[f64; JL]>,
}

impl Ctx {
    pub fn new(params: &LatticeParams, centre: f64, order: usize, cfg: &BemConfig) -> Result<Self> {
        let gf = GreenFunction::new(*params, centre, order, &cfg.ewald)?;
        let k0 = params.wavenumber(centre);
        let alpha = if cfg.burton_miller {
            C64::new(0.0, -1.0 / k0)
        } else {
            ZERO
        };
        let n1 = order + 1;
        let g = -0.25 / (params.c * params.c);
        let mut cl = Vec::with_capacity(LOG_TERMS);
        let mut scale = 1.0;
        for l in 0..LOG_TERMS {
            if l > 0 {
                scale *= g / (l * l) as f64;
            }
            let mut c = [0.0; JL];
            series::monomial(centre, 2 * l as u32, &mut c[..n1]);
            for v in c[..n1].iter_mut() {
                *v *= scale;
            }
            cl.push(c);
        }
        let cell = if order == 0 && cfg.cell_expansion {
            CellExpansion::new(params, centre, &cfg.ewald)?
        } else {
            None
        };
        Ok(Self { gf, cell, alpha, n1, cl })
    }

    fn green(&self, delta: [f64; 2], g: &mut GreenJets, method: Method) -> Result<()> {
        if let Some(cell) = &self.cell {
            if cell.eval(delta, g)? {
                return Ok(());
            }
        }
        self.gf.eval(delta, g, method).map(|_| ())
    }

    fn cl_size(&self, l: usize) -> f64 {
        self.cl[l][..self.n1].iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// Points per panel and panel count by distance-to-length ratio.
pub(crate) fn rule_for(ratio: f64) -> (usize, usize) {
    if ratio < 1.5 {
        (2, 8)
    } else if ratio < 3.0 {
        (1, 8)
    } else if ratio < 12.0 {
        (1, 4)
    } else {
        (1, 2)
    }
}

/// Calls `f(t, weight)` for the panel rule over `[-1, 1]`.
pub(crate) fn for_each_node(panels: usize, points: usize, mut f: impl FnMut(f64, f64) -> Result<()>) -> Result<()> {
    let rule = gl_rule(points);
    let h = 2.0 / panels as f64;
    for p in 0..panels {
        let a = -1.0 + p as f64 * h;
        for (t, w) in rule.mapped(a, a + h) {
            f(t, w)?;
        }
    }
    Ok(())
}

#[inline]
fn kernel(g: &GreenJets, nx: [f64; 2], ny: [f64; 2], alpha: C64, n1: usize, out: &mut [C64]) {
    let p = &g.parts;
    let c11 = nx[0] * ny[0];
    let c12 = nx[0] * ny[1] + nx[1] * ny[0];
    let c22 = nx[1] * ny[1];
    for i in 0..n1 {
        let dn = p[1][i] * ny[0] + p[2][i] * ny[1];
        let h = p[3][i] * c11 + p[4][i] * c12 + p[5][i] * c22;
        out[i] = -dn - alpha * h;
    }
}

fn entry(ctx: &Ctx, xa: &Element, eb: &Element, same: bool, g: &mut GreenJets, out: &mut [C64]) -> Result<()> {
    let n1 = ctx.n1;
    out[..n1].fill(ZERO);
    let mut w_buf = [ZERO; JL];
    let half = 0.5 * eb.length;
    if same {
        return self_entry(ctx, xa, g, out);
    }
    let ratio = (xa.mid[0] - eb.mid[0]).hypot(xa.mid[1] - eb.mid[1]) / eb.length;
    let (panels, points) = rule_for(ratio);
    for_each_node(panels, points, |t, w| {
        let y = eb.point(t);
        ctx.green([xa.mid[0] - y[0], xa.mid[1] - y[1]], g, Method::Auto)?;
        kernel(g, xa.normal, eb.normal, ctx.alpha, n1, &mut w_buf);
        for i in 0..n1 {
            out[i] += w_buf[i] * (w * half);
        }
        Ok(())
    })
}

/// Diagonal entry: `1/2 + p.f. integral over the element itself`.
///
/// The log-singular part `S = -(1/2pi) J0(kr) ln r` of the free-space Green
/// function is removed from the integrand and its hypersingular normal-normal
/// derivative is integrated in closed form.
fn self_entry(ctx: &Ctx, e: &Element, g: &mut GreenJets, out: &mut [C64]) -> Result<()> {
    let n1 = ctx.n1;
    let a = 0.5 * e.length;
    let bm = ctx.alpha != ZERO;
    let mut w_buf = [ZERO; JL];
    let mut s_buf = [0.0f64; JL];
    for (t, w) in gl_rule(SELF_POINTS).mapped(-1.0, 1.0) {
        let y = e.point(t);
        ctx.green([e.mid[0] - y[0], e.mid[1] - y[1]], g, Method::Ewald)?;
        kernel(g, e.normal, e.normal, ctx.alpha, n1, &mut w_buf);
        if bm {
            hyper_log_kernel(ctx, a * t.abs(), &mut s_buf[..n1]);
            for i in 0..n1 {
                w_buf[i] -= ctx.alpha * s_buf[i];
            }
        }
        for i in 0..n1 {
            out[i] += w_buf[i] * (w * a);
        }
    }
    if bm {
        hyper_log_finite_part(ctx, a, &mut s_buf[..n1]);
        for i in 0..n1 {
            out[i] += ctx.alpha * s_buf[i];
        }
    }
    out[0] += 0.5;
    Ok(())
}

/// `-(dS/dr)/r = (1/2pi) sum_l c_l (2l r^{2l-2} ln r + r^{2l-2})`.
fn hyper_log_kernel(ctx: &Ctx, r: f64, out: &mut [f64]) {
    out.fill(0.0);
    let lr = r.ln();
    let r2 = r * r;
    let lead = 1.0 / r2;
    let mut pw = lead;
    for l in 0..LOG_TERMS {
        let f = (2 * l) as f64 * pw * lr + pw;
        let size = ctx.cl_size(l) * f.abs();
        for (o, c) in out.iter_mut().zip(&ctx.cl[l]) {
            *o += c * f;
        }
        if l > 1 && size < 1e-18 * lead {
            break;
        }
        pw *= r2;
    }
    for o in out.iter_mut() {
        *o /= 2.0 * PI;
    }
}

/// Finite-part integral of [`hyper_log_kernel`] over `[-a, a]`.
fn hyper_log_finite_part(ctx: &Ctx, a: f64, out: &mut [f64]) {
    out.fill(0.0);
    out[0] = -1.0 / (PI * a);
    let la = a.ln();
    let lead = 1.0 / a;
    let mut pw = a;
    for l in 1..LOG_TERMS {
        let m = (2 * l - 1) as f64;
        let f = (2.0 * l as f64 * pw * (la / m - 1.0 / (m * m)) + pw / m) / PI;
        let size = ctx.cl_size(l) * f.abs();
        for (o, c) in out.iter_mut().zip(&ctx.cl[l]) {
            *o += c * f;
        }
        if l > 1 && size < 1e-18 * lead {
            break;
        }
        pw *= a * a;
    }
}

fn block_key(mesh: &BoundaryMesh, i: usize, j: usize) -> (u64, usize, u64, usize, i64, i64) {
    let (a, b) = (&mesh.scatterers[i], &mesh.scatterers[j]);
    let q = |v: f64| (v * 1e9).round() as i64;
    (
        a.radius.to_bits(),
        a.elements,
        b.radius.to_bits(),
        b.elements,
        q(a.centre[0] - b.centre[0]),
        q(a.centre[1] - b.centre[1]),
    )
}

/// Assembles the matrix and right-hand-side jets about `omega`.
pub fn assemble(mesh: &BoundaryMesh, omega: &Jet, params: &LatticeParams, cfg: &BemConfig) -> Result<Assembly> {
    assemble_rows(mesh, omega, params, cfg, None)
}

/// As [`assemble`], filling only the rows flagged in `rows` (others stay zero).
pub(crate) fn assemble_rows(
    mesh: &BoundaryMesh,
    omega: &Jet,
    params: &LatticeParams,
    cfg: &BemConfig,
    rows: Option<&[bool]>,
) -> Result<Assembly> {
    let centre = omega.value().re;
    let order = omega.order();
    if mesh.is_empty() {
        return Err(Error::usage("cannot assemble an empty mesh"));
    }
    let ctx = Ctx::new(params, centre, order, cfg)?;
    let n1 = order + 1;
    let k0 = params.wavenumber(centre);
    let fac = if cfg.factored {
        Some(Factored::new(params, centre, order, mesh, cfg.ewald.trunc_rel_tol, ctx.alpha)?)
    } else {
        None
    };
    let ns = mesh.scatterers.len();

    // Unique blocks: congruent scatterer pairs with equal offsets share entries.
    let mut block_of = vec![0usize; ns * ns];
    let mut reps: Vec<(usize, usize)> = Vec::new();
    let mut seen = HashMap::new();
    for i in 0..ns {
        for j in 0..ns {
            let id = if cfg.reuse_blocks {
                *seen.entry(block_key(mesh, i, j)).or_insert_with(|| {
                    reps.push((i, j));
                    reps.len() - 1
                })
            } else {
                reps.push((i, j));
                reps.len() - 1
            };
            block_of[i * ns + j] = id;
        }
    }
    // Local rows each unique block has to provide.
    let mut needed: Vec<Vec<bool>> = reps
        .iter()
        .map(|&(i, _)| vec![rows.is_none(); mesh.offsets[i + 1] - mesh.offsets[i]])
        .collect();
    if let Some(mask) = rows {
        for i in 0..ns {
            for j in 0..ns {
                let need = &mut needed[block_of[i * ns + j]];
                for (r, flag) in need.iter_mut().enumerate() {
                    *flag |= mask[mesh.offsets[i] + r];
                }
            }
        }
    }
    let tasks: Vec<(usize, usize)> = reps
        .iter()
        .enumerate()
        .flat_map(|(id, &(_, j))| (mesh.offsets[j]..mesh.offsets[j + 1]).map(move |b| (id, b)))
        .collect();
    let columns = cfg.exec.map(tasks.len(), |t| -> Result<Vec<C64>> {
        let (id, b) = tasks[t];
        let (i, j) = reps[id];
        let rows = mesh.offsets[i]..mesh.offsets[i + 1];
        let mut col = vec![ZERO; rows.len() * n1];
        let mut g = GreenJets::new(order);
        let eb = &mesh.elements[b];
        let mut bsh = Vec::new();
        if let Some(f) = &fac {
            let (ci, cj) = (mesh.scatterers[i].centre, mesh.scatterers[j].centre);
            f.shifted_source(b, [ci[0] - cj[0], ci[1] - cj[1]], &mut bsh);
        }
        for (r, a) in rows.enumerate() {
            if !needed[id][r] {
                continue;
            }
            let ea = &mesh.elements[a];
            let out = &mut col[r * n1..(r + 1) * n1];
            match fac.as_ref().and_then(|f| (a != b).then(|| f.separation(ea, eb)).flatten().map(|sd| (f, sd))) {
                Some((f, (sign, delta))) => f.entry(a, sign, delta, &bsh, k0, out),
                None => entry(&ctx, ea, eb, a == b, &mut g, out)?,
            }
        }
        Ok(col)
    });
    let mut start = vec![0usize; reps.len() + 1];
    for &(id, _) in &tasks {
        start[id + 1] += 1;
    }
    for id in 0..reps.len() {
        start[id + 1] += start[id];
    }
    let columns = columns.into_iter().collect::<Result<Vec<_>>>()?;

    let n = mesh.len();
    let mut matrices = vec![DMatrix::<C64>::zeros(n, n); n1];
    for i in 0..ns {
        for j in 0..ns {
            let id = block_of[i * ns + j];
            let (ri, rj) = (mesh.offsets[i], mesh.offsets[j]);
            let ncols = mesh.offsets[j + 1] - rj;
            let nrows = mesh.offsets[i + 1] - ri;
            for cb in 0..ncols {
                let col = &columns[start[id] + cb];
                for ra in 0..nrows {
                    for (k, m) in matrices.iter_mut().enumerate() {
                        m[(ri + ra, rj + cb)] = col[ra * n1 + k];
                    }
                }
            }
        }
    }

    let mut rhs = vec![DVector::<C64>::zeros(n); n1];
    let d = [params.theta.cos(), params.theta.sin()];
    let mut u = [ZERO; JL];
    for (a, e) in mesh.elements.iter().enumerate() {
        incident_coeffs(d[0] * e.mid[0] + d[1] * e.mid[1], centre, params.c, &mut u[..n1]);
        let dn = C64::new(0.0, (d[0] * e.normal[0] + d[1] * e.normal[1]) / params.c);
        for i in 0..n1 {
            let q = dn * (centre * u[i] + if i > 0 { u[i - 1] } else { ZERO });
            rhs[i][a] = u[i] + ctx.alpha * q;
        }
    }
    Ok(Assembly {
        centre,
        order,
        alpha: ctx.alpha,
        matrices,
        rhs,
    })
}
