//! The subcommands. Each returns a serializable summary; files are written
//! once, after all computation.

use std::io;
use std::path::{Path, PathBuf};
use std::time::Instant;

use grating_core::average::band_average;
use grating_core::bem::solve_derivatives;
use grating_core::farfield::{accuracy_indicator, far_field};
use grating_core::greens::{splitting_parameter, EwaldConfig, GreenFunction, GreenJets, LatticeParams, SplittingMode};
use grating_core::jets::{factorial, Jet, MAX_ORDER};
use grating_core::pade::PadeModel;
use grating_core::reference::reference_j;
use grating_core::sweep::{adaptive_partition, sweep_eval, BemSolver};
use grating_core::Error;
use serde::Serialize;
use serde_json::json;

use crate::config::{ConfigError, RunConfig};
use crate::output::{self, Row};

pub const WALL_TIME_NOTE: &str = "Elapsed time of this run with a dense LU solver and no fast multipole or \
hierarchical matrix acceleration. Absolute times are not comparable with those of accelerated solvers.";

/// Offset `x - y` used by the Green function tables.
pub const GREENS_DELTA: [f64; 2] = [0.2, 0.0];

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("numerical failure: {0}")]
    Numerical(#[from] Error),
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Numerical(_) => 3,
            _ => 2,
        }
    }

    pub fn report(&self) -> serde_json::Value {
        let (kind, omega) = match self {
            CliError::Config(_) => ("config", None),
            CliError::Write { .. } => ("output", None),
            CliError::Numerical(Error::AtFrequency { omega, .. } | Error::WoodAnomaly { omega, .. }) => {
                ("numerical", Some(*omega))
            }
            CliError::Numerical(_) => ("numerical", None),
        };
        json!({
            "status": "error",
            "kind": kind,
            "exit_code": self.exit_code(),
            "message": self.to_string(),
            "omega": omega,
        })
    }
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Config(ConfigError::Invalid(msg.into()))
}

/// Command-line overrides.
#[derive(Debug, Clone, Default)]
pub struct Options {
    pub out_csv: Option<PathBuf>,
    pub out_json: Option<PathBuf>,
    pub order: Option<usize>,
    pub omega: Option<f64>,
    pub case: Option<u32>,
}

impl Options {
    pub fn csv_path(&self, cfg: &RunConfig) -> Option<PathBuf> {
        self.out_csv.clone().or_else(|| cfg.output.csv_path.clone())
    }

    pub fn json_path(&self, cfg: &RunConfig) -> Option<PathBuf> {
        self.out_json.clone().or_else(|| cfg.output.json_path.clone())
    }
}

pub fn write_json<T: Serialize>(path: Option<&Path>, value: &T) -> Result<(), CliError> {
    match path {
        Some(p) => output::write_json(p, value).map_err(|source| CliError::Write { path: p.to_owned(), source }),
        None => Ok(()),
    }
}

pub fn write_csv(path: Option<&Path>, rows: &[Row]) -> Result<(), CliError> {
    match path {
        Some(p) => output::write_csv(p, rows).map_err(|source| CliError::Write { path: p.to_owned(), source }),
        None => Ok(()),
    }
}

fn omega_arg(opts: &Options) -> Result<f64, CliError> {
    match opts.omega {
        Some(w) if w > 0.0 && w.is_finite() => Ok(w),
        Some(w) => Err(invalid(format!("--omega must be positive, got {w}"))),
        None => Err(invalid("--omega is required")),
    }
}

fn order_arg(opts: &Options, default: usize) -> Result<usize, CliError> {
    let order = opts.order.unwrap_or(default);
    if order > MAX_ORDER {
        return Err(invalid(format!("--order must be at most {MAX_ORDER}")));
    }
    Ok(order)
}

// ---------------------------------------------------------------- solve

#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    pub omega: f64,
    pub order: usize,
    pub elements: usize,
    pub modes: Vec<i64>,
    /// `T^(i)`, `R^(i)`: derivatives, not Taylor coefficients.
    #[serde(rename = "T")]
    pub t: Vec<f64>,
    #[serde(rename = "R")]
    pub r: Vec<f64>,
    /// Accuracy indicators; `None` where `T^(i)` vanishes but `(T+R)^(i)` does not.
    pub e: Vec<Option<f64>>,
    pub wall_time_seconds: f64,
    pub wall_time_note: &'static str,
}

pub fn solve(cfg: &RunConfig, opts: &Options) -> Result<SolveReport, CliError> {
    let start = Instant::now();
    let omega = omega_arg(opts)?;
    let order = order_arg(opts, 0)?;
    let params = cfg.lattice();
    let mesh = cfg.mesh()?;
    let res = solve_derivatives(&mesh, omega, order, &params, &cfg.bem_config())?;
    let (ff, t, r) = far_field(&res, &mesh, &params)?;
    let e = indicators(&t, &r, omega)?;
    let report = SolveReport {
        omega,
        order,
        elements: mesh.len(),
        modes: ff.modes,
        t: (0..=order).map(|i| t.derivative(i).re).collect(),
        r: (0..=order).map(|i| r.derivative(i).re).collect(),
        e,
        wall_time_seconds: start.elapsed().as_secs_f64(),
        wall_time_note: WALL_TIME_NOTE,
    };
    write_json(opts.json_path(cfg).as_deref(), &report)?;
    Ok(report)
}

/// Derivatives below this fraction of `(|T| + |R|) i! / omega^i` are roundoff.
const NEGLIGIBLE: f64 = 1e-12;

/// `e_i`, with both parts of a vanishing ratio read as zero.
fn indicators(t: &Jet, r: &Jet, omega: f64) -> Result<Vec<Option<f64>>, CliError> {
    let base = t.value().norm() + r.value().norm();
    let mut out = Vec::with_capacity(t.order() + 1);
    for i in 0..=t.order() {
        let scale = NEGLIGIBLE * base * factorial(i) / omega.powi(i as i32);
        let exact = if i == 0 { 1.0 } else { 0.0 };
        let num = ((t.coeffs()[i] + r.coeffs()[i]) * factorial(i) - exact).norm();
        let den = (t.coeffs()[i] * factorial(i)).norm();
        out.push(if den > scale {
            Some(accuracy_indicator(t, r, i)?)
        } else if num <= scale {
            Some(0.0)
        } else {
            None
        });
    }
    Ok(out)
}

pub fn print_solve(rep: &SolveReport) {
    println!("omega = {}  elements = {}  modes = {:?}", output::fmt(rep.omega), rep.elements, rep.modes);
    println!("{:>3}  {:>24}  {:>24}  {:>24}", "i", "T^(i)", "R^(i)", "e_i");
    for i in 0..=rep.order {
        let e = rep.e[i].map_or_else(|| "-".to_string(), output::fmt);
        println!("{i:>3}  {:>24}  {:>24}  {e:>24}", output::fmt(rep.t[i]), output::fmt(rep.r[i]));
    }
}

// ---------------------------------------------------------------- sweep

#[derive(Debug, Clone, Serialize)]
pub struct PartitionSummary {
    pub band: [f64; 2],
    pub borders: Vec<f64>,
    pub centres: Vec<f64>,
    pub anomalies: Vec<f64>,
    /// Derivative order of each solve, in solve order.
    pub solve_orders: Vec<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SubbandModels {
    pub subband: usize,
    pub centre: f64,
    pub modes: Vec<i64>,
    pub transmitted: Vec<PadeModel>,
    pub reflected: Vec<PadeModel>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepSummary {
    pub command: &'static str,
    pub config: RunConfig,
    pub partition: PartitionSummary,
    pub models: Vec<SubbandModels>,
    #[serde(rename = "J")]
    pub j: f64,
    /// Contribution of each subband to `J`.
    pub contributions: Vec<f64>,
    pub closed_form_integrals: usize,
    pub quadrature_integrals: usize,
    pub max_imag_ratio: f64,
    pub warnings: Vec<String>,
    pub solves: usize,
    pub wall_time_seconds: f64,
    pub wall_time_note: &'static str,
}

/// Partition, models and `J`, plus the CSV rows when `with_grid`.
pub fn run_sweep(cfg: &RunConfig, command: &'static str, with_grid: bool) -> Result<(SweepSummary, Vec<Row>), CliError> {
    let start = Instant::now();
    let params = cfg.lattice();
    let mesh = cfg.mesh()?;
    let solver = BemSolver {
        mesh: &mesh,
        params,
        cfg: cfg.bem_config(),
    };
    let scfg = cfg.sweep_config().map_err(|e| invalid(e.to_string()))?;
    let part = adaptive_partition(cfg.band(), &params, &scfg, &solver)?;
    let avg = band_average(&part, &params)?;
    let rows = if with_grid && cfg.output.grid_points > 0 {
        grid_rows(&part, cfg, &params)
    } else {
        Vec::new()
    };
    let mut warnings = part.warnings.clone();
    warnings.extend(avg.warnings.iter().cloned());
    let models = part
        .families
        .iter()
        .enumerate()
        .map(|(i, f)| SubbandModels {
            subband: i,
            centre: part.centres[i],
            modes: f.modes.clone(),
            transmitted: f.transmitted.clone(),
            reflected: f.reflected.clone(),
        })
        .collect();
    let summary = SweepSummary {
        command,
        config: cfg.clone(),
        solves: part.solves(),
        partition: PartitionSummary {
            band: part.band,
            borders: part.borders.clone(),
            centres: part.centres.clone(),
            anomalies: part.anomalies.clone(),
            solve_orders: part.solve_orders.clone(),
        },
        models,
        j: avg.j,
        contributions: avg.contributions,
        closed_form_integrals: avg.closed_form,
        quadrature_integrals: avg.quadrature,
        max_imag_ratio: avg.max_imag_ratio,
        warnings,
        wall_time_seconds: start.elapsed().as_secs_f64(),
        wall_time_note: WALL_TIME_NOTE,
    };
    Ok((summary, rows))
}

/// Surrogate values on the uniform grid and at every centre.
fn grid_rows(part: &grating_core::sweep::BandPartition, cfg: &RunConfig, params: &LatticeParams) -> Vec<Row> {
    let [a, b] = cfg.band();
    let mut pts: Vec<(f64, bool)> = output::linspace(a, b, cfg.output.grid_points)
        .into_iter()
        .map(|w| (w, false))
        .chain(part.centres.iter().map(|&w| (w, true)))
        .collect();
    pts.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
    let omegas: Vec<f64> = pts.iter().map(|p| p.0).collect();
    sweep_eval(part, &omegas, params)
        .into_iter()
        .zip(&pts)
        .map(|(s, &(_, is_center))| Row {
            omega: s.omega,
            t: s.t,
            r: s.r,
            subband: s.subband,
            is_center,
        })
        .collect()
}

pub fn sweep(cfg: &RunConfig, opts: &Options) -> Result<SweepSummary, CliError> {
    let (summary, rows) = run_sweep(cfg, "sweep", true)?;
    if cfg.output.grid_points > 0 {
        write_csv(opts.csv_path(cfg).as_deref(), &rows)?;
    }
    write_json(opts.json_path(cfg).as_deref(), &summary)?;
    Ok(summary)
}

pub fn average(cfg: &RunConfig, opts: &Options) -> Result<SweepSummary, CliError> {
    let (summary, _) = run_sweep(cfg, "average", false)?;
    write_json(opts.json_path(cfg).as_deref(), &summary)?;
    Ok(summary)
}

// ---------------------------------------------------------------- reference

#[derive(Debug, Clone, Serialize)]
pub struct ReferenceSummary {
    pub command: &'static str,
    pub config: RunConfig,
    #[serde(rename = "J")]
    pub j: f64,
    /// Panel ends.
    pub panels: Vec<f64>,
    pub nodes: usize,
    pub solves: usize,
    pub warnings: Vec<String>,
    pub wall_time_seconds: f64,
    pub wall_time_note: &'static str,
}

pub fn reference(cfg: &RunConfig, opts: &Options) -> Result<ReferenceSummary, CliError> {
    let start = Instant::now();
    let params = cfg.lattice();
    let mesh = cfg.mesh()?;
    let avg = reference_j(&mesh, cfg.band(), &params, &cfg.bem_config(), &cfg.reference)?;
    let rows: Vec<Row> = avg
        .nodes
        .iter()
        .map(|n| Row {
            omega: n.omega,
            t: n.t,
            r: n.r,
            subband: n.panel,
            is_center: false,
        })
        .collect();
    let summary = ReferenceSummary {
        command: "reference",
        config: cfg.clone(),
        j: avg.j,
        nodes: avg.nodes.len(),
        solves: avg.solves(),
        panels: avg.panels,
        warnings: Vec::new(),
        wall_time_seconds: start.elapsed().as_secs_f64(),
        wall_time_note: WALL_TIME_NOTE,
    };
    write_csv(opts.csv_path(cfg).as_deref(), &rows)?;
    write_json(opts.json_path(cfg).as_deref(), &summary)?;
    Ok(summary)
}

// ---------------------------------------------------------------- greens

/// Lattice, frequency and splitting rule of one table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreensCase {
    pub params: LatticeParams,
    pub omega: f64,
    pub ewald: EwaldConfig,
}

/// The three tabulated cases: `L = 2.2`, `theta = 60 deg`, `c = 1`.
pub fn greens_case(case: u32) -> Option<GreensCase> {
    let (omega, mode) = match case {
        1 => (1.3, SplittingMode::Optimal),
        2 => (8.3, SplittingMode::Optimal),
        3 => (8.3, SplittingMode::Adaptive),
        _ => return None,
    };
    Some(GreensCase {
        params: LatticeParams::new(2.2, 1.0, 60f64.to_radians()).expect("valid lattice"),
        omega,
        ewald: EwaldConfig::tables(mode),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct GreensReport {
    pub case: Option<u32>,
    pub omega: f64,
    #[serde(rename = "L")]
    pub l: f64,
    pub c: f64,
    pub theta_degrees: f64,
    pub delta: [f64; 2],
    pub mode: SplittingMode,
    /// Splitting parameter `E`.
    pub splitting: f64,
    pub order: usize,
    /// `d^i G_p1 / d omega^i` as `[re, im]`.
    pub gp1: Vec<[f64; 2]>,
    pub gp2: Vec<[f64; 2]>,
    /// Spatial images used by `G_p1` and spectral orders used by `G_p2`.
    pub gp1_terms: usize,
    pub gp2_terms: usize,
    pub wall_time_seconds: f64,
    pub wall_time_note: &'static str,
}

/// `G_p1`, `G_p2` derivative tables at `GREENS_DELTA`.
pub fn greens_table(case: &GreensCase, order: usize) -> Result<(Vec<[f64; 2]>, Vec<[f64; 2]>, usize, usize), Error> {
    let gf = GreenFunction::new(case.params, case.omega, order, &case.ewald)?;
    let mut g1 = GreenJets::new(order);
    let mut g2 = GreenJets::new(order);
    let s1 = gf.gp1(GREENS_DELTA, &mut g1)?;
    let s2 = gf.gp2(GREENS_DELTA, &mut g2)?;
    let rows = |g: &GreenJets| {
        let jet = g.jet(GreenJets::VALUE, case.omega);
        (0..=order)
            .map(|i| {
                let d = jet.derivative(i);
                [d.re, d.im]
            })
            .collect()
    };
    Ok((rows(&g1), rows(&g2), s1.spatial, s2.spectral))
}

pub fn greens(cfg: &RunConfig, opts: &Options) -> Result<GreensReport, CliError> {
    let start = Instant::now();
    let case = match opts.case {
        Some(n) => greens_case(n).ok_or_else(|| invalid(format!("--case must be 1, 2 or 3, got {n}")))?,
        None => GreensCase {
            params: cfg.lattice(),
            omega: omega_arg(opts)?,
            ewald: cfg.ewald_config(),
        },
    };
    let order = order_arg(opts, 6)?;
    let (gp1, gp2, n1, n2) = greens_table(&case, order)?;
    let p = &case.params;
    let report = GreensReport {
        case: opts.case,
        omega: case.omega,
        l: p.l,
        c: p.c,
        theta_degrees: p.theta.to_degrees(),
        delta: GREENS_DELTA,
        mode: case.ewald.mode,
        splitting: splitting_parameter(p.wavenumber(case.omega), p, &case.ewald),
        order,
        gp1,
        gp2,
        gp1_terms: n1,
        gp2_terms: n2,
        wall_time_seconds: start.elapsed().as_secs_f64(),
        wall_time_note: WALL_TIME_NOTE,
    };
    write_json(opts.json_path(cfg).as_deref(), &report)?;
    Ok(report)
}

fn complex(v: [f64; 2]) -> String {
    let sign = if v[1].is_sign_negative() { '-' } else { '+' };
    format!("{} {sign} {}i", output::fmt(v[0]), output::fmt(v[1].abs()))
}

pub fn print_greens(rep: &GreensReport) {
    let label = rep.case.map_or_else(|| "custom".to_string(), |n| format!("Case {n}"));
    println!(
        "{label}: L = {}, theta = {:.12} deg, c = {}, omega = {}, x - y = ({}, {}), E = {} ({:?})",
        rep.l, rep.theta_degrees, rep.c, rep.omega, rep.delta[0], rep.delta[1], rep.splitting, rep.mode
    );
    println!("\n{label}: G_p1^(i)");
    for (i, v) in rep.gp1.iter().enumerate() {
        println!("{i}  {}", complex(*v));
    }
    println!("\n{label}: G_p2^(i)");
    for (i, v) in rep.gp2.iter().enumerate() {
        println!("{i}  {}", complex(*v));
    }
    println!("\nterms: G_p1 {} spatial, G_p2 {} spectral", rep.gp1_terms, rep.gp2_terms);
}
