//! CSV output, 12 significant digits throughout.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::coupling::OfflineCurve;
use crate::error::Result;
use crate::fem::newton::StepRecord;
use crate::fit::PowerLawFit;
use crate::surface::RoughSurface;

fn sig(x: f64) -> String {
    format!("{x:.11e}")
}

/// One row of the macroscopic response curve.
pub struct CurveRow {
    pub step: usize,
    /// Imposed displacement (µm).
    pub delta: f64,
    /// Gauss-averaged interface approach (µm).
    pub g_n: f64,
    /// Transmitted load (N).
    pub load: f64,
    /// Load normalized by composite modulus times nominal area.
    pub p_over_ea: f64,
    /// Mean plane separation normalized by the RMS roughness.
    pub h_star_over_s: f64,
    /// Gauss-averaged interface stiffness, normalized by E/s.
    pub stiffness_s_over_e: f64,
}

pub fn write_curve(path: &Path, rows: &[CurveRow]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "step,delta_um,g_n_um,load_n,p_over_ea,h_star_over_s,c_s_over_e")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            r.step,
            sig(r.delta),
            sig(r.g_n),
            sig(r.load),
            sig(r.p_over_ea),
            sig(r.h_star_over_s),
            sig(r.stiffness_s_over_e),
        )?;
    }
    Ok(())
}

/// Newton residual norms, one row per iteration of every step.
pub fn write_residuals(path: &Path, steps: &[StepRecord]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "step,iteration,residual")?;
    for s in steps {
        for (i, r) in s.residuals.iter().enumerate() {
            writeln!(w, "{},{},{}", s.step, i, sig(*r))?;
        }
    }
    Ok(())
}

/// Wall-clock seconds per load step. An offline precomputation, when
/// present, appears as step 0 so it stays separate from the stepping cost.
pub fn write_timing(path: &Path, steps: &[StepRecord], offline_seconds: Option<f64>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "step,wall_seconds")?;
    if let Some(t) = offline_seconds {
        writeln!(w, "0,{}", sig(t))?;
    }
    for s in steps {
        writeln!(w, "{},{}", s.step, sig(s.wall_seconds))?;
    }
    Ok(())
}

pub fn write_fit(path: &Path, fit: &PowerLawFit) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "a,b,sse,ssr,sst,r2")?;
    writeln!(
        w,
        "{},{},{},{},{},{}",
        sig(fit.a),
        sig(fit.b),
        sig(fit.sse),
        sig(fit.ssr),
        sig(fit.sst),
        sig(fit.r2),
    )?;
    Ok(())
}

/// Raw and corrected offline samples side by side.
pub fn write_offline(path: &Path, curve: &OfflineCurve) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "delta_um,g_n_um,pressure")?;
    for (raw, corr) in curve.raw.iter().zip(&curve.corrected.samples) {
        writeln!(w, "{},{},{}", sig(raw.0), sig(corr.0), sig(corr.1))?;
    }
    Ok(())
}

pub fn write_alpha(path: &Path, rows: &[(u32, f64)]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "n,alpha")?;
    for &(n, alpha) in rows {
        writeln!(w, "{},{}", n, sig(alpha))?;
    }
    Ok(())
}

/// Pressure map over the micro grid.
pub fn write_map(path: &Path, surface: &RoughSurface, pressures: &[f64]) -> Result<()> {
    let grid = surface.grid();
    let a = surface.cell_size();
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "i,j,x_um,y_um,pressure")?;
    for i in 0..grid {
        for j in 0..grid {
            writeln!(
                w,
                "{},{},{},{},{}",
                i,
                j,
                sig(j as f64 * a),
                sig(i as f64 * a),
                sig(pressures[i * grid + j]),
            )?;
        }
    }
    Ok(())
}
