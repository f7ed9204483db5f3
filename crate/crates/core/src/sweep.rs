//! Adaptive subdivision of a frequency band into subbands, each served by
//! one family of Padé models about its centre.

use std::collections::VecDeque;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::bem::{solve_derivatives, BemConfig, BoundaryMesh};
use crate::error::{Error, Result};
use crate::farfield::far_field;
use crate::greens::LatticeParams;
use crate::jets::Jet;
use crate::pade::PadeFamily;

/// Hard cap on the number of subbands.
pub const MAX_SUBBANDS: usize = 10_000;
/// Lowest solve frequency as a fraction of the band top.
pub const CLAMP: f64 = 1e-3;
/// No solve closer than this (relative) to an anomaly.
pub const ANOMALY_GUARD: f64 = 1e-8;

/// Padé degrees and the subdivision thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub m: usize,
    pub n: usize,
    pub eps_t: f64,
    pub i_min: f64,
    pub i_max: f64,
}

impl SweepConfig {
    /// `I_min = fmin (M+N)^2`, `I_max = fmax (M+N)^2`.
    pub fn with_factors(m: usize, n: usize, eps_t: f64, fmin: f64, fmax: f64) -> Result<Self> {
        let s = ((m + n) * (m + n)) as f64;
        let cfg = Self {
            m,
            n,
            eps_t,
            i_min: fmin * s,
            i_max: fmax * s,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(Error::usage("M must be at least 1"));
        }
        if !(self.eps_t > 0.0) {
            return Err(Error::usage("eps_T must be positive"));
        }
        if !(self.i_min > 0.0 && self.i_min < self.i_max) {
            return Err(Error::usage(format!("need 0 < I_min < I_max, got {} and {}", self.i_min, self.i_max)));
        }
        Ok(())
    }

    pub fn order(&self) -> usize {
        self.m + self.n
    }
}

/// Rayleigh anomalies strictly inside `(w1, w2)`, ascending.
pub fn rayleigh_anomalies(w1: f64, w2: f64, params: &LatticeParams) -> Vec<f64> {
    let ct = params.theta.cos();
    let unit = 2.0 * PI * params.c / params.l;
    let mut out = Vec::new();
    for denom in [1.0 - ct, 1.0 + ct] {
        if denom <= 0.0 {
            continue;
        }
        for m in 1.. {
            let w = unit * m as f64 / denom;
            if w >= w2 {
                break;
            }
            if w > w1 {
                out.push(w);
            }
        }
    }
    out.sort_by(f64::total_cmp);
    out.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs().max(1.0));
    out.retain(|w| (w - w1).abs() > 1e-12 * w.abs().max(1.0) && (w2 - w).abs() > 1e-12 * w.abs().max(1.0));
    out
}

/// Transmitted and reflected amplitude jets about one frequency.
#[derive(Debug, Clone)]
pub struct CentreData {
    pub modes: Vec<i64>,
    pub transmitted: Vec<Jet>,
    pub reflected: Vec<Jet>,
}

/// Source of amplitude jets for the sweep.
pub trait CentreSolver {
    fn solve(&self, omega: f64, order: usize) -> Result<CentreData>;
}

/// Amplitude jets from the boundary element solver.
pub struct BemSolver<'a> {
    pub mesh: &'a BoundaryMesh,
    pub params: LatticeParams,
    pub cfg: BemConfig,
}

impl CentreSolver for BemSolver<'_> {
    fn solve(&self, omega: f64, order: usize) -> Result<CentreData> {
        let run = || {
            let res = solve_derivatives(self.mesh, omega, order, &self.params, &self.cfg)?;
            let (ff, _, _) = far_field(&res, self.mesh, &self.params)?;
            Ok(CentreData {
                modes: ff.modes,
                transmitted: ff.c_shifted,
                reflected: ff.c_minus,
            })
        };
        run().map_err(|e: Error| e.at(omega))
    }
}

/// `|T(b; fam) - T(b; neighbour or [M-1,N])| >= eps`, plus the pole checkpoints.
/// Any pole hit counts as a failed check.
pub fn need_split(
    family: &PadeFamily,
    neighbour: Option<&PadeFamily>,
    border: f64,
    params: &LatticeParams,
    eps_t: f64,
) -> bool {
    let check = || -> Result<bool> {
        let t = family.transmittance(border, params)?;
        let other = match neighbour {
            Some(nb) => nb.transmittance(border, params)?,
            None => family.transmittance_lower(border, params)?,
        };
        if !((t - other).abs() < eps_t) {
            return Ok(true);
        }
        let (lo, hi) = if border < family.centre { (border, family.centre) } else { (family.centre, border) };
        for pole in family.poles() {
            let w = pole.re;
            if w >= lo && w <= hi {
                let d = family.transmittance(w, params)? - family.transmittance_lower(w, params)?;
                if !(d.abs() < eps_t) {
                    return Ok(true);
                }
            }
        }
        Ok(false)
    };
    check().unwrap_or(true)
}

/// Subbands, their centres and the fitted families.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BandPartition {
    pub band: [f64; 2],
    pub borders: Vec<f64>,
    pub centres: Vec<f64>,
    pub families: Vec<PadeFamily>,
    /// Borders that are Rayleigh anomalies.
    pub anomalies: Vec<f64>,
    /// Derivative order of the solve at each centre.
    pub solve_orders: Vec<usize>,
    pub warnings: Vec<String>,
    pub config: SweepConfig,
}

impl BandPartition {
    pub fn len(&self) -> usize {
        self.centres.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centres.is_empty()
    }

    pub fn solves(&self) -> usize {
        self.solve_orders.len()
    }

    /// Subband holding `omega`; borders belong to the subband on their left.
    pub fn subband_of(&self, omega: f64) -> usize {
        let inner = &self.borders[1..self.borders.len() - 1];
        inner.partition_point(|&b| b < omega)
    }
}

/// Algorithm 1: FIFO queue of centres, right side first, trisection on split.
pub fn adaptive_partition(
    band: [f64; 2],
    params: &LatticeParams,
    cfg: &SweepConfig,
    solver: &dyn CentreSolver,
) -> Result<BandPartition> {
    cfg.validate()?;
    let [w1, w2] = band;
    if !(w1 >= 0.0 && w2 > w1) {
        return Err(Error::usage(format!("need 0 <= omega_min < omega_max, got [{w1}, {w2}]")));
    }
    let anomalies = rayleigh_anomalies(w1, w2, params);
    let mut borders = vec![w1];
    borders.extend(&anomalies);
    borders.push(w2);
    let mut centres: Vec<f64> = borders.windows(2).map(|b| 0.5 * (b[0] + b[1])).collect();
    let mut fams: Vec<Option<PadeFamily>> = vec![None; centres.len()];
    let mut queue: VecDeque<f64> = centres.iter().copied().collect();
    let mut warnings = Vec::new();
    let mut solve_orders = Vec::new();
    let order = cfg.order();
    let clamp = CLAMP * w2;
    let mut right = true;
    while let Some(&c) = queue.front() {
        let i = centres.partition_point(|&x| x < c);
        let side = if right { i + 1 } else { i };
        let b = borders[side];
        // The neighbour across `b` is compared whenever it exists.
        let nb_idx = if right { (i + 1 < centres.len()).then_some(i + 1) } else { i.checked_sub(1) };
        for j in std::iter::once(i).chain(nb_idx) {
            if fams[j].is_none() {
                let w = centres[j].max(clamp);
                if let Some(a) = anomalies.iter().find(|&&a| (w - a).abs() <= ANOMALY_GUARD * a) {
                    return Err(Error::usage(format!("centre {w} sits on the anomaly {a}")));
                }
                let data = solver.solve(w, order)?;
                let fam = PadeFamily::fit(data.modes, &data.transmitted, &data.reflected, cfg.m, cfg.n)
                    .map_err(|e| e.at(w))?;
                warnings.extend(fam.warnings().cloned());
                solve_orders.push(order);
                fams[j] = Some(fam);
            }
        }
        let fam = fams[i].as_ref().expect("fitted above");
        let neighbour = nb_idx.and_then(|j| fams[j].as_ref());
        let need = need_split(fam, neighbour, b, params, cfg.eps_t);
        let dist = (c - b).abs();
        if (need && dist > cfg.i_min) || dist > cfg.i_max {
            let nc = b + (c - b) / 3.0;
            let nborder = 0.5 * (c + nc);
            borders.insert(i + 1, nborder);
            let at = if right { i + 1 } else { i };
            centres.insert(at, nc);
            fams.insert(at, None);
            queue.push_back(nc);
            if centres.len() > MAX_SUBBANDS {
                return Err(Error::Runaway { cap: MAX_SUBBANDS });
            }
        } else {
            if need {
                let msg = format!("criteria fail between centre {c} and border {b}, accepted at the minimum width");
                log::warn!("{msg}");
                warnings.push(msg);
            }
            if right {
                right = false;
            } else {
                queue.pop_front();
                right = true;
            }
        }
    }
    Ok(BandPartition {
        band,
        borders,
        centres,
        families: fams.into_iter().map(|f| f.expect("every queued centre is fitted")).collect(),
        anomalies,
        solve_orders,
        warnings,
        config: *cfg,
    })
}

/// One surrogate sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub omega: f64,
    pub t: f64,
    pub r: f64,
    pub subband: usize,
}

/// `T` and `R` from each frequency's subband family; NaN at poles.
pub fn sweep_eval(partition: &BandPartition, grid: &[f64], params: &LatticeParams) -> Vec<SweepPoint> {
    grid.iter()
        .map(|&w| {
            let i = partition.subband_of(w);
            let fam = &partition.families[i];
            SweepPoint {
                omega: w,
                t: fam.transmittance(w, params).unwrap_or(f64::NAN),
                r: fam.reflectance(w, params).unwrap_or(f64::NAN),
                subband: i,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests;
