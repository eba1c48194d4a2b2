//! Benchmark drivers tying the layers together.

use std::path::Path;
use std::sync::Arc;

use crate::bem::correction::{corrected_pressure, flat_punch_alpha, MAX_CORRECTION_ITERATIONS};
use crate::bem::solver::MicroSolver;
use crate::bench::config::BenchmarkConfig;
use crate::bench::csv;
use crate::coupling::{build_offline_curve, CqnLaw, OfflineCurve, QnLaw, SanLaw, Strategy};
use crate::elastic::{composite_moduli, CompositeElastic};
use crate::error::Result;
use crate::fem::model::{InterfaceLaw, MacroModel};
use crate::fem::newton::{newton_solve, SolveHistory, MAX_NEWTON_ITERATIONS};
use crate::surface::{generate_rmd, surface_stats, RoughSurface, SurfaceStats};

/// Everything a benchmark run produced, ready for output or assertions.
pub struct BenchmarkRun {
    pub config: BenchmarkConfig,
    pub surface: Arc<RoughSurface>,
    pub stats: SurfaceStats,
    pub elastic: CompositeElastic,
    pub alpha: f64,
    pub deltas: Vec<f64>,
    /// Present for the semi-analytical strategy.
    pub offline: Option<OfflineCurve>,
    pub history: SolveHistory,
}

impl BenchmarkRun {
    /// Gauss-averaged interface approach of a converged step.
    pub fn mean_gap(&self, step_index: usize) -> f64 {
        let gauss = &self.history.steps[step_index].gauss;
        gauss.iter().map(|g| g.g_n).sum::<f64>() / gauss.len() as f64
    }

    /// Gauss-averaged interface stiffness of a converged step.
    pub fn mean_tangent(&self, step_index: usize) -> f64 {
        let gauss = &self.history.steps[step_index].gauss;
        gauss.iter().map(|g| g.tangent).sum::<f64>() / gauss.len() as f64
    }

    pub fn curve_rows(&self) -> Vec<csv::CurveRow> {
        let area = self.config.block_size_um() * 1.0;
        let e = self.elastic.e;
        let s = self.stats.rms;
        self.history
            .steps
            .iter()
            .enumerate()
            .map(|(k, rec)| {
                let g_n = self.mean_gap(k);
                csv::CurveRow {
                    step: rec.step,
                    delta: rec.delta,
                    g_n,
                    load: rec.reaction,
                    p_over_ea: rec.reaction / (e * area),
                    h_star_over_s: (self.stats.max - self.stats.mean - g_n) / s,
                    stiffness_s_over_e: self.mean_tangent(k) * s / e,
                }
            })
            .collect()
    }
}

/// Builds the surface, moduli, and flat-punch factor shared by all runs.
pub fn prepare_surface(config: &BenchmarkConfig) -> Result<(Arc<RoughSurface>, CompositeElastic, f64, SurfaceStats)> {
    config.validate()?;
    let surface = Arc::new(
        generate_rmd(
            config.micro.n,
            config.micro.hurst,
            config.micro.seed,
            config.max_height_um(),
        )?
        .with_lateral_size(config.lateral_size_um()),
    );
    let m = &config.macro_scale;
    let elastic = composite_moduli(m.e1, m.nu1, m.e2, m.nu2)?;
    let alpha = flat_punch_alpha(config.micro.n)?;
    let stats = surface_stats(&surface);
    Ok((surface, elastic, alpha, stats))
}

/// Runs the configured strategy over the displacement ramp.
pub fn run_benchmark(config: &BenchmarkConfig) -> Result<BenchmarkRun> {
    if config.scale_ratio() > 0.2 {
        eprintln!(
            "warning: micro patch is {:.0}% of the interface; the scale separation \
             behind the homogenized law is weak",
            100.0 * config.scale_ratio()
        );
    }
    let (surface, elastic, alpha, stats) = prepare_surface(config)?;
    let m = &config.macro_scale;
    let model = MacroModel::benchmark(config.block_size_um(), m.e1, m.nu1, m.e2, m.nu2);

    let delta_max = config.loading.delta_max_rms * stats.rms;
    let steps = config.loading.steps;
    let deltas: Vec<f64> = (1..=steps)
        .map(|k| delta_max * k as f64 / steps as f64)
        .collect();

    let gauss_points = model.gauss_point_count();
    let tol_corr = config.solver.tol_correction;
    let mut offline = None;
    let mut law: Box<dyn InterfaceLaw> = match config.solver.strategy {
        Strategy::Qn => Box::new(QnLaw::new(
            surface.clone(),
            &elastic,
            alpha,
            gauss_points,
            tol_corr,
        )?),
        Strategy::Cqn => Box::new(CqnLaw::new(
            surface.clone(),
            &elastic,
            alpha,
            gauss_points,
            tol_corr,
        )?),
        Strategy::San => {
            let curve = build_offline_curve(
                surface.clone(),
                &elastic,
                alpha,
                config.solver.offline_delta_rms * stats.rms,
                config.solver.offline_steps,
            )?;
            let law = SanLaw::from_fit(&curve.fit)?;
            offline = Some(curve);
            Box::new(law)
        }
    };

    let history = newton_solve(
        &model,
        law.as_mut(),
        &deltas,
        config.solver.tol_newton,
        MAX_NEWTON_ITERATIONS,
    )?;

    Ok(BenchmarkRun {
        config: config.clone(),
        surface,
        stats,
        elastic,
        alpha,
        deltas,
        offline,
        history,
    })
}

/// Flat-punch factors for n = 1..=n_max (matrix-free automatically beyond
/// the dense grid limit).
pub fn run_alpha_table(n_max: u32) -> Result<Vec<(u32, f64)>> {
    (1..=n_max).map(|n| Ok((n, flat_punch_alpha(n)?))).collect()
}

/// Offline sweep and power-law fit without the macro stage.
pub fn run_offline_fit(config: &BenchmarkConfig, steps: usize) -> Result<(BenchmarkConfig, SurfaceStats, OfflineCurve)> {
    let (surface, elastic, alpha, stats) = prepare_surface(config)?;
    let curve = build_offline_curve(
        surface,
        &elastic,
        alpha,
        config.solver.offline_delta_rms * stats.rms,
        steps,
    )?;
    Ok((config.clone(), stats, curve))
}

/// Writes the run's artifacts into `dir`: response curve, residual history,
/// timings, and for the semi-analytical strategy the offline curve and fit.
/// With `dump_maps` the micro pressure field is re-solved at every step's
/// mean gap and written under maps/.
pub fn write_run_outputs(dir: &Path, run: &BenchmarkRun, dump_maps: bool) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    csv::write_curve(&dir.join("curve.csv"), &run.curve_rows())?;
    csv::write_residuals(&dir.join("residuals.csv"), &run.history.steps)?;
    csv::write_timing(
        &dir.join("timing.csv"),
        &run.history.steps,
        run.offline.as_ref().map(|o| o.wall_seconds),
    )?;
    if let Some(offline) = &run.offline {
        csv::write_offline(&dir.join("offline.csv"), offline)?;
        csv::write_fit(&dir.join("fit.csv"), &offline.fit)?;
    }

    if dump_maps {
        let maps = dir.join("maps");
        std::fs::create_dir_all(&maps)?;
        let mut solver = MicroSolver::new(run.surface.clone(), &run.elastic)?;
        for (k, rec) in run.history.steps.iter().enumerate() {
            let g_n = run.mean_gap(k);
            let pressures = if g_n > 0.0 {
                corrected_pressure(
                    &mut solver,
                    run.alpha,
                    g_n,
                    run.config.solver.tol_correction,
                    MAX_CORRECTION_ITERATIONS,
                )?
                .solution
                .pressures
            } else {
                vec![0.0; run.surface.grid() * run.surface.grid()]
            };
            csv::write_map(
                &maps.join(format!("step_{:04}.csv", rec.step)),
                &run.surface,
                &pressures,
            )?;
        }
    }
    Ok(())
}
