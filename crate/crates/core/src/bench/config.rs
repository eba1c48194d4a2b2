//! Benchmark configuration. Lengths in the file are millimetres; everything
//! is converted to micrometres and newtons when the run is assembled.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::coupling::Strategy;
use crate::error::{Error, Result};

pub const MM_TO_UM: f64 = 1.0e3;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MacroConfig {
    /// Side of each square block (mm).
    pub block_size_mm: f64,
    pub e1: f64,
    pub nu1: f64,
    pub e2: f64,
    pub nu2: f64,
}

impl Default for MacroConfig {
    fn default() -> Self {
        Self {
            block_size_mm: 10.0,
            e1: 1.0,
            nu1: 0.3,
            e2: 1.0,
            nu2: 0.3,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MicroConfig {
    /// Surface refinement level; the grid has (2ⁿ + 1)² points.
    pub n: u32,
    pub hurst: f64,
    pub seed: u64,
    /// Peak-to-valley height of the generated topography (mm).
    pub max_height_mm: f64,
    /// Side of the square micro patch (mm).
    pub lateral_size_mm: f64,
}

impl Default for MicroConfig {
    fn default() -> Self {
        Self {
            n: 6,
            hurst: 0.8,
            seed: 5,
            max_height_mm: 0.05,
            lateral_size_mm: 1.0,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LoadingConfig {
    /// Number of uniform displacement increments.
    pub steps: usize,
    /// Final platen displacement as a multiple of the RMS roughness.
    pub delta_max_rms: f64,
}

impl Default for LoadingConfig {
    fn default() -> Self {
        Self {
            steps: 30,
            delta_max_rms: 3.0,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub strategy: Strategy,
    pub tol_newton: f64,
    pub tol_correction: f64,
    /// Micro sweep resolution behind the semi-analytical fit.
    pub offline_steps: usize,
    /// Sweep end as a multiple of the RMS roughness.
    pub offline_delta_rms: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            strategy: Strategy::Qn,
            tol_newton: crate::fem::newton::TOL_NEWTON,
            tol_correction: crate::bem::correction::TOL_CORRECTION,
            offline_steps: 100,
            offline_delta_rms: 3.0,
        }
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchmarkConfig {
    #[serde(rename = "macro")]
    pub macro_scale: MacroConfig,
    pub micro: MicroConfig,
    pub loading: LoadingConfig,
    pub solver: SolverConfig,
}

impl BenchmarkConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let cfg: Self = toml::from_str(&text).map_err(|e| Error::Format {
            path: path.display().to_string(),
            line: e.span().map(|s| 1 + text[..s.start].matches('\n').count()).unwrap_or(0),
            message: e.message().to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let m = &self.macro_scale;
        if m.block_size_mm <= 0.0 {
            return Err(Error::Parameter("block size must be positive".into()));
        }
        let mi = &self.micro;
        if mi.lateral_size_mm <= 0.0 || mi.max_height_mm < 0.0 {
            return Err(Error::Parameter("micro patch dimensions must be positive".into()));
        }
        if self.loading.steps == 0 {
            return Err(Error::Parameter("loading needs at least one step".into()));
        }
        if self.loading.delta_max_rms <= 0.0 || self.solver.offline_delta_rms <= 0.0 {
            return Err(Error::Parameter("displacement targets must be positive".into()));
        }
        if !(self.solver.tol_newton > 0.0 && self.solver.tol_correction > 0.0) {
            return Err(Error::Parameter("tolerances must be positive".into()));
        }
        Ok(())
    }

    pub fn block_size_um(&self) -> f64 {
        self.macro_scale.block_size_mm * MM_TO_UM
    }

    pub fn lateral_size_um(&self) -> f64 {
        self.micro.lateral_size_mm * MM_TO_UM
    }

    pub fn max_height_um(&self) -> f64 {
        self.micro.max_height_mm * MM_TO_UM
    }

    /// Scale separation check: the homogenized law assumes the micro patch is
    /// much smaller than the interface it represents.
    pub fn scale_ratio(&self) -> f64 {
        self.micro.lateral_size_mm / self.macro_scale.block_size_mm
    }
}
