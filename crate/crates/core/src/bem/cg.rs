//! Matrix-free contact solves for grids whose dense influence matrix would
//! not fit in memory.
//!
//! The kernel is block-Toeplitz (translation invariant), so H·p is a 2D
//! convolution evaluated through a circulant embedding and FFTs. The
//! constrained QP is solved by a projected conjugate-gradient iteration that
//! re-conjugates whenever the contact set changes.

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

use crate::bem::influence::InfluenceOperator;
use crate::bem::nnls::{NnlsSolution, TOL_KKT};
use crate::error::{Error, Result};

/// Precomputed circulant spectrum of the influence kernel.
pub struct FftKernel {
    grid: usize,
    size: usize,
    spectrum: Vec<Complex<f64>>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl FftKernel {
    pub fn new(op: &InfluenceOperator) -> Self {
        let grid = op.grid();
        let size = (2 * grid - 1).next_power_of_two();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(size);
        let inverse = planner.plan_fft_inverse(size);

        // Wrap signed offsets into the embedding torus.
        let mut spectrum = vec![Complex::new(0.0, 0.0); size * size];
        let half = size as isize / 2;
        for u in 0..size {
            let du = wrap_offset(u, size, half);
            if du.unsigned_abs() >= grid {
                continue;
            }
            for v in 0..size {
                let dv = wrap_offset(v, size, half);
                if dv.unsigned_abs() >= grid {
                    continue;
                }
                spectrum[u * size + v] = Complex::new(op.coefficient(du, dv), 0.0);
            }
        }
        fft_2d(&mut spectrum, size, &forward);

        Self {
            grid,
            size,
            spectrum,
            forward,
            inverse,
        }
    }

    /// H·p for a full-grid pressure vector.
    pub fn matvec(&self, _op: &InfluenceOperator, p: &[f64]) -> Vec<f64> {
        let (grid, size) = (self.grid, self.size);
        debug_assert_eq!(p.len(), grid * grid);

        let mut buf = vec![Complex::new(0.0, 0.0); size * size];
        for i in 0..grid {
            for j in 0..grid {
                buf[i * size + j] = Complex::new(p[i * grid + j], 0.0);
            }
        }
        fft_2d(&mut buf, size, &self.forward);
        for (b, s) in buf.iter_mut().zip(&self.spectrum) {
            *b *= s;
        }
        fft_2d(&mut buf, size, &self.inverse);

        let norm = 1.0 / (size * size) as f64;
        let mut out = vec![0.0; grid * grid];
        for i in 0..grid {
            for j in 0..grid {
                out[i * grid + j] = buf[i * size + j].re * norm;
            }
        }
        out
    }

    /// Projected CG for min ½pᵀHp − ūᵀp, p ≥ 0 on the candidate cells.
    ///
    /// The conjugacy coefficient is reset whenever cells enter or leave the
    /// contact set; the gradient is refreshed from an exact matvec
    /// periodically to cancel incremental-update drift.
    pub fn solve_projected_cg(
        &self,
        op: &InfluenceOperator,
        candidates: &[usize],
        ubar: &[f64],
        warm_pressures: &[f64],
        max_iterations: usize,
    ) -> Result<NnlsSolution> {
        let cells = self.grid * self.grid;
        if candidates.is_empty() {
            return Ok(NnlsSolution {
                active: Vec::new(),
                pressures: Vec::new(),
                iterations: 0,
            });
        }

        let mut is_candidate = vec![false; cells];
        let mut ubar_full = vec![0.0; cells];
        for (&c, &u) in candidates.iter().zip(ubar) {
            is_candidate[c] = true;
            ubar_full[c] = u;
        }
        let scale = ubar.iter().cloned().fold(0.0f64, f64::max);
        let tol = TOL_KKT * scale.max(f64::MIN_POSITIVE);

        let mut p = vec![0.0; cells];
        for &c in candidates {
            p[c] = warm_pressures[c].max(0.0);
        }

        let mut grad: Vec<f64> = self
            .matvec(op, &p)
            .iter()
            .zip(&ubar_full)
            .map(|(hp, u)| hp - u)
            .collect();
        let mut dir = vec![0.0; cells];
        let mut g_old = f64::INFINITY;
        let mut conjugate = false;

        for iteration in 1..=max_iterations {
            // Contact set: positive pressure, plus violated candidates.
            let mut in_set = vec![false; cells];
            let mut g_norm = 0.0;
            for &c in candidates {
                if p[c] > 0.0 || grad[c] < -tol {
                    in_set[c] = true;
                    g_norm += grad[c] * grad[c];
                }
            }

            // KKT check on the exact gradient every cycle start.
            let mut worst = 0.0f64;
            for &c in candidates {
                if p[c] > 0.0 {
                    worst = worst.max(grad[c].abs());
                } else {
                    worst = worst.max(-grad[c]);
                }
            }
            if worst <= tol {
                let mut active = Vec::new();
                let mut pressures = Vec::new();
                for &c in candidates {
                    if p[c] > 0.0 {
                        active.push(c);
                        pressures.push(p[c]);
                    }
                }
                return Ok(NnlsSolution {
                    active,
                    pressures,
                    iterations: iteration,
                });
            }

            let beta = if conjugate { g_norm / g_old } else { 0.0 };
            g_old = g_norm;
            for c in 0..cells {
                dir[c] = if in_set[c] { -grad[c] + beta * dir[c] } else { 0.0 };
            }

            let h_dir = self.matvec(op, &dir);
            let mut num = 0.0;
            let mut den = 0.0;
            for c in 0..cells {
                if in_set[c] {
                    num += grad[c] * dir[c];
                    den += h_dir[c] * dir[c];
                }
            }
            if den <= 0.0 {
                return Err(Error::Solver {
                    iterations: iteration,
                    residual: worst,
                });
            }
            let tau = -num / den;

            let mut clamped = false;
            for c in 0..cells {
                if !in_set[c] {
                    continue;
                }
                let next = p[c] + tau * dir[c];
                if next < 0.0 {
                    p[c] = 0.0;
                    clamped = true;
                } else {
                    p[c] = next;
                }
            }

            if clamped || iteration % 50 == 0 {
                // Set changed (or drift refresh): exact gradient, restart CG.
                grad = self
                    .matvec(op, &p)
                    .iter()
                    .zip(&ubar_full)
                    .map(|(hp, u)| hp - u)
                    .collect();
                conjugate = false;
            } else {
                for c in 0..cells {
                    grad[c] += tau * h_dir[c];
                }
                conjugate = true;
            }
        }

        let worst = candidates
            .iter()
            .map(|&c| if p[c] > 0.0 { grad[c].abs() } else { -grad[c] })
            .fold(0.0f64, f64::max);
        Err(Error::Solver {
            iterations: max_iterations,
            residual: worst,
        })
    }
}

fn wrap_offset(u: usize, size: usize, half: isize) -> isize {
    let u = u as isize;
    if u <= half {
        u
    } else {
        u - size as isize
    }
}

/// In-place 2D FFT: rows, then columns through a scratch column buffer.
fn fft_2d(buf: &mut [Complex<f64>], size: usize, fft: &Arc<dyn Fft<f64>>) {
    for row in buf.chunks_exact_mut(size) {
        fft.process(row);
    }
    let mut column = vec![Complex::new(0.0, 0.0); size];
    for j in 0..size {
        for i in 0..size {
            column[i] = buf[i * size + j];
        }
        fft.process(&mut column);
        for i in 0..size {
            buf[i * size + j] = column[i];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bem::nnls::{solve_nnls, NnlsWorkspace};
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    #[test]
    fn matvec_matches_dense_multiply() {
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        for grid in [3usize, 5, 9, 17] {
            let op = InfluenceOperator::new(grid, 0.7, 1.3).unwrap();
            let kernel = FftKernel::new(&op);
            let p: Vec<f64> = (0..grid * grid)
                .map(|_| rng.random_range(0.0..2.0))
                .collect();
            let fast = kernel.matvec(&op, &p);
            let h = op.dense_matrix().unwrap();
            for i in 0..grid * grid {
                let direct: f64 = (0..grid * grid).map(|j| h[(i, j)] * p[j]).sum();
                assert_relative_eq!(fast[i], direct, max_relative = 1e-11, epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn projected_cg_matches_dense_nnls() {
        let mut rng = ChaCha12Rng::seed_from_u64(17);
        for grid in [4usize, 7] {
            let op = InfluenceOperator::new(grid, 1.0, 1.0).unwrap();
            let kernel = FftKernel::new(&op);
            for case in 0..5 {
                let mut candidates = Vec::new();
                let mut ubar = Vec::new();
                for cell in 0..grid * grid {
                    let u: f64 = rng.random_range(-0.5..1.0);
                    if u > 0.0 {
                        candidates.push(cell);
                        ubar.push(u);
                    }
                }
                if candidates.is_empty() {
                    continue;
                }
                let mut ws = NnlsWorkspace::default();
                let dense = solve_nnls(&op, &candidates, &ubar, &[], &mut ws, 10_000).unwrap();
                let warm = vec![0.0; grid * grid];
                let cg = kernel
                    .solve_projected_cg(&op, &candidates, &ubar, &warm, 200_000)
                    .unwrap();

                let mut p_dense = vec![0.0; grid * grid];
                for (&c, &p) in dense.active.iter().zip(&dense.pressures) {
                    p_dense[c] = p;
                }
                let mut p_cg = vec![0.0; grid * grid];
                for (&c, &p) in cg.active.iter().zip(&cg.pressures) {
                    p_cg[c] = p;
                }
                let pmax = p_dense.iter().cloned().fold(0.0f64, f64::max);
                for cell in 0..grid * grid {
                    assert!(
                        (p_dense[cell] - p_cg[cell]).abs() <= 1e-7 * pmax,
                        "grid {grid} case {case} cell {cell}: dense {} vs cg {}",
                        p_dense[cell],
                        p_cg[cell]
                    );
                }
            }
        }
    }

    #[test]
    fn full_contact_linear_solve() {
        // All candidates active: projected CG reduces to plain CG on Hp = ū.
        let grid = 9;
        let op = InfluenceOperator::new(grid, 1.0, 1.0).unwrap();
        let kernel = FftKernel::new(&op);
        let candidates: Vec<usize> = (0..grid * grid).collect();
        let ubar = vec![1.0; grid * grid];
        let warm = vec![0.0; grid * grid];
        let cg = kernel
            .solve_projected_cg(&op, &candidates, &ubar, &warm, 100_000)
            .unwrap();
        assert_eq!(cg.active.len(), grid * grid);

        let h = op.dense_matrix().unwrap();
        let rhs = nalgebra::DVector::from_element(grid * grid, 1.0);
        let x = h.cholesky().unwrap().solve(&rhs);
        let mut p_cg = vec![0.0; grid * grid];
        for (&c, &p) in cg.active.iter().zip(&cg.pressures) {
            p_cg[c] = p;
        }
        for cell in 0..grid * grid {
            assert_relative_eq!(p_cg[cell], x[cell], max_relative = 1e-7);
        }
    }
}
