//! Load stepping and the Newton loop on the reduced system.

use std::time::Instant;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::fem::model::{
    restrict, restrict_matrix, scatter_add, GaussState, InterfaceLaw, MacroModel,
};

/// Absolute Euclidean tolerance on the reduced residual (N).
pub const TOL_NEWTON: f64 = 1e-9;

pub const MAX_NEWTON_ITERATIONS: usize = 30;

/// One converged load step.
pub struct StepRecord {
    pub step: usize,
    /// Imposed platen displacement Δ (µm).
    pub delta: f64,
    /// Transmitted normal load (N), positive in compression.
    pub reaction: f64,
    /// Reduced residual norm before every Newton update and at convergence.
    pub residuals: Vec<f64>,
    /// Interface state at convergence, one entry per Gauss point.
    pub gauss: Vec<GaussState>,
    /// Wall-clock time of the step's Newton loop (s).
    pub wall_seconds: f64,
}

impl StepRecord {
    /// Newton iterations spent (linear solves).
    pub fn iterations(&self) -> usize {
        self.residuals.len() - 1
    }
}

pub struct SolveHistory {
    pub steps: Vec<StepRecord>,
    /// Converged dofs of the final step.
    pub dofs: DVector<f64>,
}

/// Runs displacement-controlled load steps and returns the per-step records.
///
/// Every step starts from the previous converged state (the constrained dofs
/// jump to the new imposed values). The law's `commit` hook fires after each
/// converged step so history-dependent laws can advance.
pub fn newton_solve(
    model: &MacroModel,
    law: &mut dyn InterfaceLaw,
    deltas: &[f64],
    tol: f64,
    max_iterations: usize,
) -> Result<SolveHistory> {
    let k_bulk = model.bulk_stiffness()?;
    let free = model.free_dofs();
    let mut d = DVector::zeros(model.dof_count());
    let mut steps = Vec::with_capacity(deltas.len());

    for (k, &delta) in deltas.iter().enumerate() {
        let step = k + 1;
        let start = Instant::now();
        model.apply_constraints(&mut d, delta);

        let mut residuals = Vec::new();
        let mut gauss: Vec<GaussState>;
        loop {
            let (r, kt, states) = model.assemble(&k_bulk, &d, law, step)?;
            let r_red = restrict(&r, &free);
            let norm = r_red.norm();
            residuals.push(norm);
            gauss = states;

            if norm <= tol {
                let reaction = model.reaction(&r);
                law.commit(step);
                steps.push(StepRecord {
                    step,
                    delta,
                    reaction,
                    residuals,
                    gauss,
                    wall_seconds: start.elapsed().as_secs_f64(),
                });
                break;
            }
            if residuals.len() > max_iterations {
                return Err(Error::Nonconvergence {
                    step,
                    trace: residuals,
                });
            }

            let k_red = restrict_matrix(&kt, &free);
            let update = k_red.lu().solve(&(-&r_red)).ok_or(Error::Nonconvergence {
                step,
                trace: residuals.clone(),
            })?;
            scatter_add(&mut d, &free, &update);
        }
    }

    Ok(SolveHistory { steps, dofs: d })
}
