//! Non-negative least squares over the influence kernel.
//!
//! Solves min ½pᵀHp − ūᵀp subject to p ≥ 0, the KKT conditions of the
//! unilateral contact problem, with a block working-set strategy: all
//! strictly negative pressures leave the working set at once and all dual
//! violators enter at once. The active-submatrix Cholesky factor is cached
//! between calls so repeated solves with an unchanged contact patch cost a
//! single triangular solve.

use nalgebra::{Cholesky, DVector, Dyn};

use crate::bem::influence::InfluenceOperator;
use crate::error::{Error, Result};

/// Relative KKT tolerance (dual feasibility, scaled by max indentation).
pub const TOL_KKT: f64 = 1e-10;

#[derive(Default)]
pub struct NnlsWorkspace {
    cached_cells: Vec<usize>,
    cached_factor: Option<Cholesky<f64, Dyn>>,
}

impl NnlsWorkspace {
    pub fn clear(&mut self) {
        self.cached_cells.clear();
        self.cached_factor = None;
    }

    fn factor(&mut self, op: &InfluenceOperator, cells: &[usize]) -> Result<&Cholesky<f64, Dyn>> {
        if self.cached_factor.is_none() || self.cached_cells != cells {
            let h = op.submatrix(cells);
            let chol = h.cholesky().ok_or_else(|| Error::Parameter(
                "influence submatrix lost positive definiteness".into(),
            ))?;
            self.cached_cells = cells.to_vec();
            self.cached_factor = Some(chol);
        }
        Ok(self.cached_factor.as_ref().unwrap())
    }
}

/// Result of one NNLS solve, indexed by cells of the full grid.
pub struct NnlsSolution {
    /// Active cells (flat grid indices, ascending).
    pub active: Vec<usize>,
    /// Pressures aligned with `active`, all > 0.
    pub pressures: Vec<f64>,
    /// Working-set iterations used.
    pub iterations: usize,
}

/// Solves the contact QP restricted to `candidates` (cells with positive
/// geometric overlap; all other cells provably carry zero pressure).
///
/// `ubar` holds the indentations aligned with `candidates`. `warm` seeds the
/// working set with the previous solve's active cells.
pub fn solve_nnls(
    op: &InfluenceOperator,
    candidates: &[usize],
    ubar: &[f64],
    warm: &[usize],
    workspace: &mut NnlsWorkspace,
    max_iterations: usize,
) -> Result<NnlsSolution> {
    debug_assert_eq!(candidates.len(), ubar.len());
    if candidates.is_empty() {
        return Ok(NnlsSolution {
            active: Vec::new(),
            pressures: Vec::new(),
            iterations: 0,
        });
    }

    let scale = ubar.iter().cloned().fold(0.0f64, f64::max);
    let dual_tol = TOL_KKT * scale.max(f64::MIN_POSITIVE);

    // Position of each candidate in the candidate list.
    let pos_of: std::collections::HashMap<usize, usize> = candidates
        .iter()
        .enumerate()
        .map(|(k, &c)| (c, k))
        .collect();

    // Working set as candidate positions, kept sorted.
    let mut working: Vec<usize> = warm.iter().filter_map(|c| pos_of.get(c).copied()).collect();
    working.sort_unstable();
    working.dedup();
    if working.is_empty() {
        let argmax = ubar
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(k, _)| k)
            .unwrap();
        working.push(argmax);
    }

    let pressures: Vec<f64>;
    let mut iterations = 0;
    loop {
        iterations += 1;
        if iterations > max_iterations {
            return Err(Error::Solver {
                iterations: iterations - 1,
                residual: f64::NAN,
            });
        }

        let cells: Vec<usize> = working.iter().map(|&k| candidates[k]).collect();
        let rhs = DVector::from_iterator(working.len(), working.iter().map(|&k| ubar[k]));
        let x = workspace.factor(op, &cells)?.solve(&rhs);

        // Drop every strictly negative pressure in one block.
        let negatives: Vec<usize> = (0..working.len()).filter(|&i| x[i] < 0.0).collect();
        if !negatives.is_empty() {
            for &i in negatives.iter().rev() {
                working.remove(i);
            }
            if working.is_empty() {
                // All candidates expelled; restart from the deepest indentation.
                let argmax = ubar
                    .iter()
                    .enumerate()
                    .max_by(|a, b| a.1.total_cmp(b.1))
                    .map(|(k, _)| k)
                    .unwrap();
                working.push(argmax);
            }
            continue;
        }

        // Dual feasibility on the remaining candidates:
        // w = H[cand, W]·x − ū must be ≥ −tol everywhere outside W.
        let in_working: Vec<bool> = {
            let mut mask = vec![false; candidates.len()];
            for &k in &working {
                mask[k] = true;
            }
            mask
        };
        let mut violators: Vec<usize> = Vec::new();
        for (k, &cell) in candidates.iter().enumerate() {
            if in_working[k] {
                continue;
            }
            let mut w = -ubar[k];
            for (i, &wcell) in cells.iter().enumerate() {
                w += op.entry(cell, wcell) * x[i];
            }
            if w < -dual_tol {
                violators.push(k);
            }
        }

        if violators.is_empty() {
            pressures = x.iter().cloned().collect();
            break;
        }
        working.extend(violators);
        working.sort_unstable();
    }

    let active: Vec<usize> = working.iter().map(|&k| candidates[k]).collect();
    Ok(NnlsSolution {
        active,
        pressures,
        iterations,
    })
}

/// Exhaustive reference solver for tiny grids: enumerates every active set
/// over the candidates and returns the unique KKT-feasible one.
pub fn solve_exhaustive(
    op: &InfluenceOperator,
    candidates: &[usize],
    ubar: &[f64],
) -> Option<(Vec<usize>, Vec<f64>)> {
    let m = candidates.len();
    assert!(m <= 20, "exhaustive oracle is exponential in the candidate count");
    let scale = ubar.iter().cloned().fold(0.0f64, f64::max);
    let tol = 1e-9 * scale.max(f64::MIN_POSITIVE);

    'sets: for mask in 0u32..(1 << m) {
        let set: Vec<usize> = (0..m).filter(|&k| mask >> k & 1 == 1).collect();
        let cells: Vec<usize> = set.iter().map(|&k| candidates[k]).collect();
        let x = if set.is_empty() {
            DVector::zeros(0)
        } else {
            let h = op.submatrix(&cells);
            let rhs = DVector::from_iterator(set.len(), set.iter().map(|&k| ubar[k]));
            match h.cholesky() {
                Some(c) => c.solve(&rhs),
                None => continue,
            }
        };
        for i in 0..set.len() {
            if x[i] < -tol {
                continue 'sets;
            }
        }
        for (k, &cell) in candidates.iter().enumerate() {
            if set.contains(&k) {
                continue;
            }
            let mut w = -ubar[k];
            for (i, &wcell) in cells.iter().enumerate() {
                w += op.entry(cell, wcell) * x[i];
            }
            if w < -tol {
                continue 'sets;
            }
        }
        let kept: Vec<(usize, f64)> = set
            .iter()
            .zip(x.iter())
            .filter(|(_, &p)| p > 0.0)
            .map(|(&k, &p)| (candidates[k], p))
            .collect();
        return Some((
            kept.iter().map(|(c, _)| *c).collect(),
            kept.iter().map(|(_, p)| *p).collect(),
        ));
    }
    None
}

/// QP objective ½pᵀHp − ūᵀp for pressures given on `cells`.
pub fn qp_objective(
    op: &InfluenceOperator,
    cells: &[usize],
    pressures: &[f64],
    candidates: &[usize],
    ubar: &[f64],
) -> f64 {
    let h = op.submatrix(cells);
    let p = DVector::from_column_slice(pressures);
    let mut linear = 0.0;
    for (i, &cell) in cells.iter().enumerate() {
        let k = candidates.iter().position(|&c| c == cell).unwrap();
        linear += ubar[k] * pressures[i];
    }
    0.5 * (&p.transpose() * &h * &p)[(0, 0)] - linear
}
