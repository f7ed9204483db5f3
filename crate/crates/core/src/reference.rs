//! Direct reference: one order-0 solve per Gauss–Legendre node.

use serde::{Deserialize, Serialize};

use crate::bem::{solve_derivatives, BemConfig, BoundaryMesh};
use crate::error::{Error, Result};
use crate::farfield::far_field;
use crate::greens::LatticeParams;
use crate::quadrature::gl_rule;
use crate::sweep::rayleigh_anomalies;

/// Composite Gauss–Legendre rule over the band.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ReferenceConfig {
    pub panels: usize,
    pub points_per_panel: usize,
}

impl Default for ReferenceConfig {
    fn default() -> Self {
        Self {
            panels: 200,
            points_per_panel: 10,
        }
    }
}

impl ReferenceConfig {
    pub fn validate(&self) -> Result<()> {
        if self.panels == 0 {
            return Err(Error::usage("reference needs at least one panel"));
        }
        if !(2..=64).contains(&self.points_per_panel) {
            return Err(Error::usage("points_per_panel must be in 2..=64"));
        }
        Ok(())
    }

    pub fn nodes(&self) -> usize {
        self.panels * self.points_per_panel
    }
}

/// Panel ends, with every Rayleigh anomaly in the band among them.
///
/// Panels go to the anomaly-free pieces in proportion to their length,
/// at least one each, remainders by largest fraction.
pub fn reference_panels(band: [f64; 2], params: &LatticeParams, panels: usize) -> Vec<f64> {
    let [w1, w2] = band;
    let mut cuts = vec![w1];
    cuts.extend(rayleigh_anomalies(w1, w2, params));
    cuts.push(w2);
    let pieces = cuts.len() - 1;
    let total = panels.max(pieces);
    let width = w2 - w1;
    let share: Vec<f64> = cuts.windows(2).map(|c| (c[1] - c[0]) / width * (total - pieces) as f64).collect();
    let mut count: Vec<usize> = share.iter().map(|s| 1 + s.floor() as usize).collect();
    let left = total - count.iter().sum::<usize>();
    let mut order: Vec<usize> = (0..pieces).collect();
    order.sort_by(|&a, &b| (share[b] - share[b].floor()).total_cmp(&(share[a] - share[a].floor())));
    for &i in order.iter().cycle().take(left) {
        count[i] += 1;
    }
    let mut out = vec![w1];
    for (c, &n) in cuts.windows(2).zip(&count) {
        out.extend((1..=n).map(|k| if k == n { c[1] } else { c[0] + (c[1] - c[0]) * k as f64 / n as f64 }));
    }
    out
}

/// `(omega, weight, panel)` of the composite rule.
pub fn reference_nodes(band: [f64; 2], params: &LatticeParams, cfg: &ReferenceConfig) -> Result<Vec<(f64, f64, usize)>> {
    cfg.validate()?;
    if !(band[0] >= 0.0 && band[1] > band[0]) {
        return Err(Error::usage(format!("need 0 <= omega_min < omega_max, got {band:?}")));
    }
    let rule = gl_rule(cfg.points_per_panel);
    let ends = reference_panels(band, params, cfg.panels);
    Ok(ends
        .windows(2)
        .enumerate()
        .flat_map(|(i, p)| rule.mapped(p[0], p[1]).map(move |(x, w)| (x, w, i)))
        .collect())
}

/// `T` and `R` from an order-0 solve.
pub fn solve_point(mesh: &BoundaryMesh, omega: f64, params: &LatticeParams, cfg: &BemConfig) -> Result<(f64, f64)> {
    let run = || {
        let res = solve_derivatives(mesh, omega, 0, params, cfg)?;
        let (_, t, r) = far_field(&res, mesh, params)?;
        Ok((t.value().re, r.value().re))
    };
    run().map_err(|e: Error| e.at(omega))
}

/// One quadrature node and the solve there.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReferenceNode {
    pub omega: f64,
    pub weight: f64,
    pub t: f64,
    pub r: f64,
    pub panel: usize,
}

/// Reference band average with the node values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceAverage {
    #[serde(rename = "J")]
    pub j: f64,
    /// Panel ends.
    pub panels: Vec<f64>,
    pub nodes: Vec<ReferenceNode>,
}

impl ReferenceAverage {
    /// One order-0 solve per node.
    pub fn solves(&self) -> usize {
        self.nodes.len()
    }
}

/// `J = sum w_k T(omega_k) / (omega2 - omega1)`.
pub fn reference_j(
    mesh: &BoundaryMesh,
    band: [f64; 2],
    params: &LatticeParams,
    bem: &BemConfig,
    cfg: &ReferenceConfig,
) -> Result<ReferenceAverage> {
    let nodes = reference_nodes(band, params, cfg)?;
    let vals = bem.exec.map(nodes.len(), |k| solve_point(mesh, nodes[k].0, params, bem));
    let mut out = Vec::with_capacity(nodes.len());
    let mut sum = 0.0;
    for (&(omega, weight, panel), v) in nodes.iter().zip(vals) {
        let (t, r) = v?;
        sum += weight * t;
        out.push(ReferenceNode { omega, weight, t, r, panel });
    }
    Ok(ReferenceAverage {
        j: sum / (band[1] - band[0]),
        panels: reference_panels(band, params, cfg.panels),
        nodes: out,
    })
}

/// `(T, R)` at each grid frequency.
pub fn reference_curve(mesh: &BoundaryMesh, grid: &[f64], params: &LatticeParams, bem: &BemConfig) -> Result<Vec<(f64, f64)>> {
    bem.exec.map(grid.len(), |k| solve_point(mesh, grid[k], params, bem)).into_iter().collect()
}
