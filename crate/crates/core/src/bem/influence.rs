//! Discretized half-space compliance kernel.
//!
//! The kernel maps cell pressures to cell surface displacements. It is
//! translation invariant: the coefficient depends only on the integer offset
//! between two cells. The self term is 2a/(πE) and the interaction term is
//! (2a/(πE))·arcsin(1/(2r)) with r the center distance in cell units; this
//! normalization is calibrated so the flat-punch shape factor α reproduces
//! its published resolution dependence (see `correction::flat_punch_alpha`).

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Largest grid side for which the dense N²×N² matrix path is allowed.
/// 65 heights per side (n = 6) needs ~143 MB; 129 would need ~2.2 GB.
pub const DENSE_GRID_LIMIT: usize = 100;

/// Translation-invariant compliance coefficients for one grid resolution.
#[derive(Debug, Clone)]
pub struct InfluenceOperator {
    grid: usize,
    cell: f64,
    e: f64,
    /// Coefficient per absolute offset, quadrant table of size grid².
    table: Vec<f64>,
}

impl InfluenceOperator {
    pub fn new(grid: usize, cell: f64, e: f64) -> Result<Self> {
        if grid < 1 {
            return Err(Error::Parameter("grid must have at least one cell".into()));
        }
        if !(cell > 0.0) || !(e > 0.0) {
            return Err(Error::Parameter(format!(
                "cell size and modulus must be positive (a = {cell}, E = {e})"
            )));
        }
        let lead = 2.0 * cell / (std::f64::consts::PI * e);
        let mut table = vec![0.0; grid * grid];
        for di in 0..grid {
            for dj in 0..grid {
                table[di * grid + dj] = if di == 0 && dj == 0 {
                    lead
                } else {
                    let r = ((di * di + dj * dj) as f64).sqrt();
                    lead * (0.5 / r).min(1.0).asin()
                };
            }
        }
        Ok(Self { grid, cell, e, table })
    }

    pub fn grid(&self) -> usize {
        self.grid
    }

    pub fn cell_size(&self) -> f64 {
        self.cell
    }

    pub fn modulus(&self) -> f64 {
        self.e
    }

    /// Compliance coefficient for the signed offset (di, dj), µm³/N per µm².
    #[inline]
    pub fn coefficient(&self, di: isize, dj: isize) -> f64 {
        let di = di.unsigned_abs();
        let dj = dj.unsigned_abs();
        self.table[di * self.grid + dj]
    }

    /// Coefficient between two cells given by flat row-major indices.
    #[inline]
    pub fn entry(&self, p: usize, q: usize) -> f64 {
        let (pi, pj) = (p / self.grid, p % self.grid);
        let (qi, qj) = (q / self.grid, q % self.grid);
        let di = pi.abs_diff(qi);
        let dj = pj.abs_diff(qj);
        self.table[di * self.grid + dj]
    }

    /// Dense symmetric submatrix H[cells, cells].
    pub fn submatrix(&self, cells: &[usize]) -> DMatrix<f64> {
        let m = cells.len();
        let mut h = DMatrix::zeros(m, m);
        for (row, &p) in cells.iter().enumerate() {
            for (col, &q) in cells.iter().enumerate().skip(row) {
                let v = self.entry(p, q);
                h[(row, col)] = v;
                h[(col, row)] = v;
            }
        }
        h
    }

    /// Full dense matrix over all grid cells; refused above
    /// [`DENSE_GRID_LIMIT`] since the footprint grows like the fourth power
    /// of the grid side.
    pub fn dense_matrix(&self) -> Result<DMatrix<f64>> {
        self.check_dense()?;
        let cells: Vec<usize> = (0..self.grid * self.grid).collect();
        Ok(self.submatrix(&cells))
    }

    /// Errors out when the dense path would exceed desk memory.
    pub fn check_dense(&self) -> Result<()> {
        if self.grid > DENSE_GRID_LIMIT {
            let cells = self.grid * self.grid;
            let gib = (cells * cells * 8) as f64 / (1u64 << 30) as f64;
            let n = (self.grid - 1).trailing_zeros();
            return Err(Error::DensePathRefused { n, cells, gib });
        }
        Ok(())
    }
}
