//! Constant-element collocation of the Burton–Miller boundary integral
//! equation for rigid scatterers in a periodic array, and the sequential
//! solve for the frequency derivatives of the boundary trace.

mod assemble;
mod factored;
mod mirror;
mod solve;

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::ExecMode;
use crate::greens::{EwaldConfig, LatticeParams};
use crate::jets::Jet;

pub use assemble::{assemble, Assembly};
pub use solve::{interior_field, solve_derivatives, SolveResult};

/// A circular scatterer and its element count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScattererSpec {
    pub centre: [f64; 2],
    pub radius: f64,
    pub elements: usize,
}

/// Straight constant element; the midpoint is the collocation point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Element {
    pub start: [f64; 2],
    pub end: [f64; 2],
    pub mid: [f64; 2],
    /// Unit normal pointing from the fluid into the scatterer.
    pub normal: [f64; 2],
    pub length: f64,
    pub scatterer: usize,
}

impl Element {
    /// Point at local coordinate `t` in `[-1, 1]`.
    pub fn point(&self, t: f64) -> [f64; 2] {
        [
            self.mid[0] + 0.5 * t * (self.end[0] - self.start[0]),
            self.mid[1] + 0.5 * t * (self.end[1] - self.start[1]),
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryMesh {
    pub elements: Vec<Element>,
    pub scatterers: Vec<ScattererSpec>,
    /// First element index of each scatterer, plus the total at the end.
    pub offsets: Vec<usize>,
}

impl BoundaryMesh {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn empty() -> Self {
        Self {
            elements: Vec::new(),
            scatterers: Vec::new(),
            offsets: vec![0],
        }
    }
}

/// Splits each circle into equal chords.
pub fn build_mesh(specs: &[ScattererSpec], l: f64) -> Result<BoundaryMesh> {
    for (i, s) in specs.iter().enumerate() {
        if !(s.radius > 0.0) {
            return Err(Error::Geometry(format!("scatterer {i}: radius must be positive")));
        }
        if s.elements < 8 {
            return Err(Error::Geometry(format!("scatterer {i}: need at least 8 elements")));
        }
        if !(s.centre[0] - s.radius > 0.0 && s.centre[0] + s.radius < l) {
            return Err(Error::Geometry(format!("scatterer {i} crosses the cell boundary x1 in {{0, L}}")));
        }
        for (j, t) in specs.iter().enumerate().take(i) {
            let d = (s.centre[0] - t.centre[0]).hypot(s.centre[1] - t.centre[1]);
            if d <= s.radius + t.radius {
                return Err(Error::Geometry(format!("scatterers {j} and {i} overlap")));
            }
        }
    }
    let mut elements = Vec::new();
    let mut offsets = vec![0];
    for (i, s) in specs.iter().enumerate() {
        let n = s.elements;
        let vertex = |e: usize| {
            let phi = 2.0 * PI * e as f64 / n as f64;
            [s.centre[0] + s.radius * phi.cos(), s.centre[1] + s.radius * phi.sin()]
        };
        for e in 0..n {
            let a = vertex(e);
            let b = vertex(e + 1);
            let mid = [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])];
            let (dx, dy) = (s.centre[0] - mid[0], s.centre[1] - mid[1]);
            let h = dx.hypot(dy);
            elements.push(Element {
                start: a,
                end: b,
                mid,
                normal: [dx / h, dy / h],
                length: (b[0] - a[0]).hypot(b[1] - a[1]),
                scatterer: i,
            });
        }
        offsets.push(elements.len());
    }
    Ok(BoundaryMesh {
        elements,
        scatterers: specs.to_vec(),
        offsets,
    })
}

/// Plane wave `u_in = exp(i k d.x)` and its normal derivative
/// `q_in = i k (d.n) u_in` as jets in `omega`.
pub fn incident_jets(x: [f64; 2], n: Option<[f64; 2]>, omega: &Jet, params: &LatticeParams) -> (Jet, Jet) {
    let w0 = omega.value().re;
    let order = omega.order();
    let d = [params.theta.cos(), params.theta.sin()];
    let dx = d[0] * x[0] + d[1] * x[1];
    let mut u = vec![C64::new(0.0, 0.0); order + 1];
    incident_coeffs(dx, w0, params.c, &mut u);
    let u_in = Jet::new(w0, u).expect("order checked by omega");
    let q_in = match n {
        Some(n) => {
            let dn = d[0] * n[0] + d[1] * n[1];
            let k = Jet::affine(w0, order, C64::new(0.0, dn / params.c), C64::new(0.0, 0.0));
            &k * &u_in
        }
        None => Jet::zero(w0, order),
    };
    (u_in, q_in)
}

/// Scaled coefficients of `exp(i omega dx / c)` about `w0`.
pub(crate) fn incident_coeffs(dx: f64, w0: f64, c: f64, out: &mut [C64]) {
    let step = C64::new(0.0, dx / c);
    out[0] = (step * w0).exp();
    for i in 1..out.len() {
        out[i] = out[i - 1] * step / i as f64;
    }
}

/// Options of the discretized boundary integral equation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BemConfig {
    pub ewald: EwaldConfig,
    #[serde(default)]
    pub exec: ExecMode,
    /// Burton–Miller coupling `alpha = -i/k`; `false` solves the plain
    /// double-layer equation.
    #[serde(default = "yes")]
    pub burton_miller: bool,
    /// Reuse matrix blocks between congruent scatterers with equal offsets.
    #[serde(default = "yes")]
    pub reuse_blocks: bool,
    /// Separable mode-by-mode evaluation for pairs separated along `x2`.
    #[serde(default = "yes")]
    pub factored: bool,
    /// Order-0 solves evaluate nearby pairs from a per-frequency cell
    /// expansion instead of the Ewald sums.
    #[serde(default = "yes")]
    pub cell_expansion: bool,
    /// Fold the system onto mirror orbits when the problem is symmetric.
    #[serde(default = "yes")]
    pub mirror: bool,
}

fn yes() -> bool {
    true
}

impl Default for BemConfig {
    fn default() -> Self {
        Self {
            ewald: EwaldConfig::default(),
            exec: ExecMode::default(),
            burton_miller: true,
            reuse_blocks: true,
            factored: true,
            cell_expansion: true,
            mirror: true,
        }
    }
}
