//! Run configuration file.

use std::path::{Path, PathBuf};

use grating_core::bem::{build_mesh, BemConfig, BoundaryMesh, ScattererSpec};
use grating_core::greens::{EwaldConfig, LatticeParams, SplittingMode};
use grating_core::reference::ReferenceConfig;
use grating_core::sweep::SweepConfig;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub geometry: Geometry,
    pub band: Band,
    #[serde(default)]
    pub pade: PadeSettings,
    #[serde(default)]
    pub ewald: EwaldSettings,
    #[serde(default)]
    pub reference: ReferenceConfig,
    #[serde(default)]
    pub output: Output,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Geometry {
    #[serde(rename = "L")]
    pub l: f64,
    #[serde(default = "one")]
    pub c: f64,
    pub theta_degrees: f64,
    pub scatterers: Vec<Scatterer>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scatterer {
    pub cx: f64,
    pub cy: f64,
    pub r: f64,
    pub elements: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Band {
    pub omega_min: f64,
    pub omega_max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PadeSettings {
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "eps_T")]
    pub eps_t: f64,
    #[serde(rename = "Imin_factor", default = "imin")]
    pub imin_factor: f64,
    #[serde(rename = "Imax_factor", default = "imax")]
    pub imax_factor: f64,
}

impl Default for PadeSettings {
    fn default() -> Self {
        Self {
            m: 3,
            n: 3,
            eps_t: 1e-3,
            imin_factor: imin(),
            imax_factor: imax(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EwaldSettings {
    pub mode: SplittingMode,
    pub trunc_rel_tol: f64,
    #[serde(rename = "H")]
    pub h: f64,
    #[serde(rename = "K")]
    pub k: u32,
    pub eps: f64,
}

impl Default for EwaldSettings {
    fn default() -> Self {
        let e = EwaldConfig::default();
        Self {
            mode: e.mode,
            trunc_rel_tol: e.trunc_rel_tol,
            h: e.h,
            k: e.k,
            eps: e.eps,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Output {
    #[serde(default)]
    pub csv_path: Option<PathBuf>,
    #[serde(default)]
    pub json_path: Option<PathBuf>,
    #[serde(default = "grid")]
    pub grid_points: usize,
}

fn one() -> f64 {
    1.0
}

fn imin() -> f64 {
    1e-3
}

fn imax() -> f64 {
    1e-2
}

fn grid() -> usize {
    200
}

/// Problems with the configuration; exit code 2.
#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("cannot parse {path}: {source}")]
    Parse { path: PathBuf, source: serde_json::Error },
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

fn invalid<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError::Invalid(msg.into()))
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_owned(),
            source,
        })?;
        let cfg: RunConfig = serde_json::from_str(&text).map_err(|source| ConfigError::Parse {
            path: path.to_owned(),
            source,
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let g = &self.geometry;
        if !(g.l > 0.0 && g.l.is_finite()) {
            return invalid("geometry.L must be positive");
        }
        if !(g.c > 0.0 && g.c.is_finite()) {
            return invalid("geometry.c must be positive");
        }
        if !(g.theta_degrees > 0.0 && g.theta_degrees <= 90.0) {
            return invalid("geometry.theta_degrees must be in (0, 90]");
        }
        for (i, s) in g.scatterers.iter().enumerate() {
            if !(s.r > 0.0 && s.r.is_finite()) || !s.cx.is_finite() || !s.cy.is_finite() {
                return invalid(format!("scatterer {i}: need finite centre and positive radius"));
            }
            if s.elements < 3 {
                return invalid(format!("scatterer {i}: at least 3 elements"));
            }
        }
        let b = &self.band;
        if !(b.omega_min >= 0.0 && b.omega_max > b.omega_min && b.omega_max.is_finite()) {
            return invalid("band needs 0 <= omega_min < omega_max");
        }
        self.sweep_config().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        if !(self.ewald.trunc_rel_tol > 0.0 && self.ewald.h > 0.0 && self.ewald.eps > 0.0 && self.ewald.k > 0) {
            return invalid("ewald parameters must be positive");
        }
        if self.reference.points_per_panel < 2 {
            return invalid("reference.points_per_panel must be at least 2");
        }
        self.reference.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        self.mesh()?;
        Ok(())
    }

    pub fn lattice(&self) -> LatticeParams {
        let g = &self.geometry;
        LatticeParams::new(g.l, g.c, g.theta_degrees.to_radians()).expect("validated")
    }

    pub fn mesh(&self) -> Result<BoundaryMesh, ConfigError> {
        let specs: Vec<ScattererSpec> = self
            .geometry
            .scatterers
            .iter()
            .map(|s| ScattererSpec {
                centre: [s.cx, s.cy],
                radius: s.r,
                elements: s.elements,
            })
            .collect();
        build_mesh(&specs, self.geometry.l).map_err(|e| ConfigError::Invalid(e.to_string()))
    }

    pub fn ewald_config(&self) -> EwaldConfig {
        EwaldConfig {
            mode: self.ewald.mode,
            trunc_rel_tol: self.ewald.trunc_rel_tol,
            h: self.ewald.h,
            k: self.ewald.k,
            eps: self.ewald.eps,
            ..EwaldConfig::default()
        }
    }

    pub fn bem_config(&self) -> BemConfig {
        BemConfig {
            ewald: self.ewald_config(),
            ..BemConfig::default()
        }
    }

    pub fn sweep_config(&self) -> grating_core::Result<SweepConfig> {
        let p = &self.pade;
        SweepConfig::with_factors(p.m, p.n, p.eps_t, p.imin_factor, p.imax_factor)
    }

    pub fn band(&self) -> [f64; 2] {
        [self.band.omega_min, self.band.omega_max]
    }
}
