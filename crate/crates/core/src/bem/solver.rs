//! Displacement-controlled normal contact of a rigid rough topography on an
//! elastic half-space.

use std::sync::Arc;

use crate::bem::cg::FftKernel;
use crate::bem::influence::{InfluenceOperator, DENSE_GRID_LIMIT};
use crate::bem::nnls::{solve_nnls, NnlsWorkspace};
use crate::elastic::CompositeElastic;
use crate::error::Result;
use crate::surface::RoughSurface;

/// Pressure/gap state of one solved micro contact.
#[derive(Debug, Clone)]
pub struct MicroContactSolution {
    /// Per-cell pressures, full grid, ≥ 0, N/µm².
    pub pressures: Vec<f64>,
    /// Per-cell residual gaps w = Hp − ū, ≥ 0 (up to the KKT tolerance), µm.
    pub gaps: Vec<f64>,
    /// Per-cell indentations ū = gₙ − (e*max − e*), µm; negative out of reach.
    pub indentations: Vec<f64>,
    /// Active cells, flat row-major indices.
    pub active: Vec<usize>,
    /// Total normal force P = Σ p·a², N.
    pub total_force: f64,
    /// Mean pressure p̄ = P / l², N/µm².
    pub mean_pressure: f64,
    /// Contact area fraction |active| / N².
    pub area_fraction: f64,
    /// Working-set (or CG outer) iterations of the underlying solve.
    pub iterations: usize,
}

enum Backend {
    Dense(NnlsWorkspace),
    MatrixFree(FftKernel),
}

/// Stateful micro solver: owns the warm start and factorization cache for
/// one loading history (one Gauss point). The influence kernel is shared.
pub struct MicroSolver {
    surface: Arc<RoughSurface>,
    operator: Arc<InfluenceOperator>,
    warm_active: Vec<usize>,
    warm_pressures: Vec<f64>,
    backend: Backend,
    max_iterations: usize,
}

impl MicroSolver {
    /// Builds the influence kernel for the surface resolution and picks the
    /// dense path when it fits in desk memory, the FFT path otherwise.
    pub fn new(surface: Arc<RoughSurface>, elastic: &CompositeElastic) -> Result<Self> {
        let operator = Arc::new(InfluenceOperator::new(
            surface.grid(),
            surface.cell_size(),
            elastic.e,
        )?);
        Ok(Self::with_operator(surface, operator))
    }

    /// Shares a prebuilt kernel between solver instances.
    pub fn with_operator(surface: Arc<RoughSurface>, operator: Arc<InfluenceOperator>) -> Self {
        let grid = surface.grid();
        let backend = if grid <= DENSE_GRID_LIMIT {
            Backend::Dense(NnlsWorkspace::default())
        } else {
            Backend::MatrixFree(FftKernel::new(&operator))
        };
        let cells = grid * grid;
        Self {
            surface,
            operator,
            warm_active: Vec::new(),
            warm_pressures: vec![0.0; cells],
            backend,
            max_iterations: 10 * cells,
        }
    }

    pub fn surface(&self) -> &RoughSurface {
        &self.surface
    }

    pub fn operator(&self) -> &Arc<InfluenceOperator> {
        &self.operator
    }

    /// Forgets warm-start state (fresh loading history).
    pub fn reset_warm_start(&mut self) {
        self.warm_active.clear();
        self.warm_pressures.iter_mut().for_each(|p| *p = 0.0);
        if let Backend::Dense(ws) = &mut self.backend {
            ws.clear();
        }
    }

    /// Solves the contact at far-field approach `g_n` (µm). The indentation
    /// of cell (i, j) is ū = gₙ − (e*max − e*ᵢⱼ); cells without geometric
    /// overlap (ū ≤ 0) are excluded up front.
    pub fn solve(&mut self, g_n: f64) -> Result<MicroContactSolution> {
        let grid = self.surface.grid();
        let cells = grid * grid;
        let heights = self.surface.heights();
        let e_max = heights.iter().cloned().fold(f64::NEG_INFINITY, f64::max);

        let mut indentations = vec![0.0; cells];
        let mut candidates = Vec::new();
        let mut ubar = Vec::new();
        for (idx, &h) in heights.iter().enumerate() {
            let u = g_n - (e_max - h);
            indentations[idx] = u;
            if u > 0.0 {
                candidates.push(idx);
                ubar.push(u);
            }
        }

        let (active, active_pressures, iterations) = match &mut self.backend {
            Backend::Dense(ws) => {
                let sol = solve_nnls(
                    &self.operator,
                    &candidates,
                    &ubar,
                    &self.warm_active,
                    ws,
                    self.max_iterations,
                )?;
                (sol.active, sol.pressures, sol.iterations)
            }
            Backend::MatrixFree(kernel) => {
                let sol = kernel.solve_projected_cg(
                    &self.operator,
                    &candidates,
                    &ubar,
                    &self.warm_pressures,
                    self.max_iterations,
                )?;
                (sol.active, sol.pressures, sol.iterations)
            }
        };

        let mut pressures = vec![0.0; cells];
        for (&cell, &p) in active.iter().zip(&active_pressures) {
            pressures[cell] = p;
        }

        // Residual gaps w = Hp − ū on the whole grid.
        let gaps = match &mut self.backend {
            Backend::Dense(_) => {
                let mut w = Vec::with_capacity(cells);
                for idx in 0..cells {
                    let mut hp = 0.0;
                    for (&cell, &p) in active.iter().zip(&active_pressures) {
                        hp += self.operator.entry(idx, cell) * p;
                    }
                    w.push(hp - indentations[idx]);
                }
                w
            }
            Backend::MatrixFree(kernel) => {
                let hp = kernel.matvec(&self.operator, &pressures);
                hp.iter()
                    .zip(&indentations)
                    .map(|(hp, u)| hp - u)
                    .collect()
            }
        };

        self.warm_active = active.clone();
        self.warm_pressures.copy_from_slice(&pressures);

        let a = self.surface.cell_size();
        let l = self.surface.lateral_size();
        let total_force = active_pressures.iter().sum::<f64>() * a * a;
        let contact_cells = pressures.iter().filter(|&&p| p > 0.0).count();
        Ok(MicroContactSolution {
            pressures,
            gaps,
            indentations,
            active,
            total_force,
            mean_pressure: total_force / (l * l),
            area_fraction: contact_cells as f64 / cells as f64,
            iterations,
        })
    }
}
