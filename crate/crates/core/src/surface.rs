//! Rough height fields on square (2^n + 1)² grids.
//!
//! Surfaces are stored row-major with the datum at the deepest valley, so
//! `min(heights) == 0` always holds. All lengths are in µm.

use std::fmt::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Default lateral size of a generated patch, µm (1 mm).
pub const DEFAULT_LATERAL_SIZE: f64 = 1000.0;

/// Square rough height field with its physical cell size.
#[derive(Debug, Clone)]
pub struct RoughSurface {
    n: u32,
    l: f64,
    heights: Vec<f64>,
}

/// Mean, maximum and RMS elevation of a surface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceStats {
    pub mean: f64,
    pub max: f64,
    pub rms: f64,
}

impl RoughSurface {
    /// Builds a surface from raw heights, re-datuming so the minimum is zero.
    pub fn from_heights(n: u32, l: f64, mut heights: Vec<f64>) -> Result<Self> {
        let grid = grid_size(n);
        if heights.len() != grid * grid {
            return Err(Error::Shape(format!(
                "expected {}x{} = {} heights, got {}",
                grid,
                grid,
                grid * grid,
                heights.len()
            )));
        }
        if l <= 0.0 {
            return Err(Error::Parameter(format!("lateral size must be > 0, got {l}")));
        }
        if heights.iter().any(|h| !h.is_finite()) {
            return Err(Error::Parameter("non-finite height".into()));
        }
        let min = heights.iter().cloned().fold(f64::INFINITY, f64::min);
        for h in &mut heights {
            *h -= min;
        }
        Ok(Self { n, l, heights })
    }

    /// Perfectly flat surface (all heights zero).
    pub fn flat(n: u32, l: f64) -> Self {
        let grid = grid_size(n);
        Self {
            n,
            l,
            heights: vec![0.0; grid * grid],
        }
    }

    /// Resolution exponent; the grid has 2^n + 1 heights per side.
    pub fn n(&self) -> u32 {
        self.n
    }

    /// Heights per side.
    pub fn grid(&self) -> usize {
        grid_size(self.n)
    }

    /// Lateral size l, µm.
    pub fn lateral_size(&self) -> f64 {
        self.l
    }

    /// Returns the surface with a different lateral size, same heights.
    pub fn with_lateral_size(mut self, l: f64) -> Self {
        self.l = l;
        self
    }

    /// Boundary-element cell size a = l / (2^n + 1), µm.
    pub fn cell_size(&self) -> f64 {
        self.l / self.grid() as f64
    }

    /// Row-major heights, µm.
    pub fn heights(&self) -> &[f64] {
        &self.heights
    }

    pub fn height(&self, i: usize, j: usize) -> f64 {
        self.heights[i * self.grid() + j]
    }
}

/// Side length of the height grid at refinement level `n`.
pub fn grid_size(n: u32) -> usize {
    (1usize << n) + 1
}

/// Generates a fractal surface by random midpoint displacement on a
/// (2^n + 1)² grid (diamond-square with per-level Gaussian perturbations,
/// amplitude scaled by 2^(-hurst) per subdivision level, corners seeded at
/// zero). Heights are rescaled affinely to [0, max_height].
///
/// The generator is a ChaCha12 stream seeded with `seed`; draws happen in a
/// fixed order (diamond pass then square pass, row-major within each level),
/// so results are bit-reproducible for equal inputs.
pub fn generate_rmd(n: u32, hurst: f64, seed: u64, max_height: f64) -> Result<RoughSurface> {
    if !(1..=10).contains(&n) {
        return Err(Error::Parameter(format!("resolution exponent n = {n} outside 1..=10")));
    }
    if !(hurst > 0.0 && hurst < 1.0) {
        return Err(Error::Parameter(format!("hurst exponent {hurst} outside (0, 1)")));
    }
    if !(max_height > 0.0) {
        return Err(Error::Parameter(format!("max_height must be > 0, got {max_height}")));
    }

    let grid = grid_size(n);
    let mut z = vec![0.0f64; grid * grid];
    let mut rng = ChaCha12Rng::seed_from_u64(seed);

    let mut step = grid - 1;
    let mut sigma = 1.0f64;
    while step > 1 {
        let half = step / 2;
        sigma *= (-hurst).exp2();

        // Diamond pass: centers of the current squares.
        let mut i = half;
        while i < grid {
            let mut j = half;
            while j < grid {
                let avg = (z[(i - half) * grid + (j - half)]
                    + z[(i - half) * grid + (j + half)]
                    + z[(i + half) * grid + (j - half)]
                    + z[(i + half) * grid + (j + half)])
                    / 4.0;
                let noise: f64 = rng.sample(StandardNormal);
                z[i * grid + j] = avg + sigma * noise;
                j += step;
            }
            i += step;
        }

        // Square pass: edge midpoints, averaging the available lattice
        // neighbours (3 on the domain boundary, 4 inside).
        let mut i = 0;
        while i < grid {
            let mut j = (i + half) % step;
            while j < grid {
                let mut sum = 0.0;
                let mut count = 0u32;
                if i >= half {
                    sum += z[(i - half) * grid + j];
                    count += 1;
                }
                if i + half < grid {
                    sum += z[(i + half) * grid + j];
                    count += 1;
                }
                if j >= half {
                    sum += z[i * grid + (j - half)];
                    count += 1;
                }
                if j + half < grid {
                    sum += z[i * grid + (j + half)];
                    count += 1;
                }
                let noise: f64 = rng.sample(StandardNormal);
                z[i * grid + j] = sum / count as f64 + sigma * noise;
                j += step;
            }
            i += step;
        }

        step = half;
    }

    // Affine rescale to [0, max_height]; t = (z - min)/(max - min) hits the
    // endpoints exactly in floating point.
    let min = z.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let span = max - min;
    for h in &mut z {
        *h = (*h - min) / span * max_height;
    }

    Ok(RoughSurface {
        n,
        l: DEFAULT_LATERAL_SIZE,
        heights: z,
    })
}

/// Sum of two rough surfaces re-datumed at the deepest valley of the sum.
pub fn composite_topography(s1: &RoughSurface, s2: &RoughSurface) -> Result<RoughSurface> {
    if s1.n != s2.n {
        return Err(Error::Shape(format!(
            "surfaces have different resolutions n = {} and {}",
            s1.n, s2.n
        )));
    }
    if s1.l != s2.l {
        return Err(Error::Shape(format!(
            "surfaces have different lateral sizes {} and {}",
            s1.l, s2.l
        )));
    }
    let sum: Vec<f64> = s1
        .heights
        .iter()
        .zip(&s2.heights)
        .map(|(a, b)| a + b)
        .collect();
    RoughSurface::from_heights(s1.n, s1.l, sum)
}

/// Mean, maximum and population RMS about the mean.
pub fn surface_stats(s: &RoughSurface) -> SurfaceStats {
    let count = s.heights.len() as f64;
    let mean = s.heights.iter().sum::<f64>() / count;
    let max = s.heights.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let var = s.heights.iter().map(|h| (h - mean).powi(2)).sum::<f64>() / count;
    SurfaceStats {
        mean,
        max,
        rms: var.sqrt(),
    }
}

/// Writes a surface as x/y/z triplets, row-major with x fastest, µm.
pub fn write_surface_xyz(s: &RoughSurface, path: &Path) -> Result<()> {
    let a = s.cell_size();
    let grid = s.grid();
    let mut out = String::new();
    let _ = writeln!(out, "# rough surface, {grid}x{grid} heights, spacing {a} um");
    let _ = writeln!(out, "# columns: x y z (um), row-major, x fastest");
    for i in 0..grid {
        for j in 0..grid {
            let _ = writeln!(out, "{} {} {}", j as f64 * a, i as f64 * a, s.height(i, j));
        }
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Reads a surface written by [`write_surface_xyz`] (or any uniform square
/// x/y/z grid). Heights are re-datumed so the minimum is zero.
pub fn read_surface_xyz(path: &Path) -> Result<RoughSurface> {
    let text = std::fs::read_to_string(path)?;
    let display = path.display().to_string();
    let format_err = |line: usize, message: String| Error::Format {
        path: display.clone(),
        line,
        message,
    };

    let mut points = Vec::new();
    let mut last_line = 0;
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        let body = line.trim();
        if body.is_empty() || body.starts_with('#') {
            continue;
        }
        let mut fields = body.split_whitespace();
        let mut next = |name: &str| -> Result<f64> {
            fields
                .next()
                .ok_or_else(|| format_err(lineno, format!("missing {name} column")))?
                .parse::<f64>()
                .map_err(|e| format_err(lineno, format!("bad {name} value: {e}")))
        };
        let x = next("x")?;
        let y = next("y")?;
        let z = next("z")?;
        if fields.next().is_some() {
            return Err(format_err(lineno, "more than three columns".into()));
        }
        points.push((x, y, z));
        last_line = lineno;
    }

    let count = points.len();
    let grid = (count as f64).sqrt().round() as usize;
    if grid * grid != count || grid < 2 {
        return Err(format_err(
            last_line,
            format!("{count} points do not form a square grid"),
        ));
    }
    let n = (grid - 1).trailing_zeros();
    if grid_size(n) != grid {
        return Err(format_err(
            last_line,
            format!("{grid} points per side is not 2^n + 1"),
        ));
    }

    let a = points[1].0 - points[0].0;
    if !(a > 0.0) {
        return Err(format_err(last_line, "non-positive grid spacing".into()));
    }
    let tol = 1e-9 * a;
    for (k, &(x, y, _)) in points.iter().enumerate() {
        let (i, j) = (k / grid, k % grid);
        if (x - j as f64 * a).abs() > tol || (y - i as f64 * a).abs() > tol {
            return Err(format_err(
                k + 1,
                format!("point {k} off the uniform grid (spacing {a})"),
            ));
        }
    }

    let heights: Vec<f64> = points.iter().map(|p| p.2).collect();
    RoughSurface::from_heights(n, a * grid as f64, heights)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use proptest::prelude::*;

    #[test]
    fn rmd_shape_and_extremes() {
        let s = generate_rmd(6, 0.7, 42, 50.0).unwrap();
        assert_eq!(s.grid(), 65);
        assert_eq!(s.heights().len(), 65 * 65);
        let min = s.heights().iter().cloned().fold(f64::INFINITY, f64::min);
        let max = s.heights().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(min, 0.0);
        assert_eq!(max, 50.0);
    }

    #[test]
    fn rmd_small_grid() {
        let s = generate_rmd(1, 0.7, 0, 1.0).unwrap();
        assert_eq!(s.grid(), 3);
        let min = s.heights().iter().cloned().fold(f64::INFINITY, f64::min);
        let max = s.heights().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(min, 0.0);
        assert_eq!(max, 1.0);
    }

    #[test]
    fn rmd_deterministic() {
        let a = generate_rmd(4, 0.5, 7, 10.0).unwrap();
        let b = generate_rmd(4, 0.5, 7, 10.0).unwrap();
        assert_eq!(a.heights(), b.heights());
    }

    #[test]
    fn rmd_seed_changes_field() {
        let a = generate_rmd(4, 0.5, 7, 10.0).unwrap();
        let b = generate_rmd(4, 0.5, 8, 10.0).unwrap();
        assert_ne!(a.heights(), b.heights());
    }

    #[test]
    fn rmd_rejects_bad_parameters() {
        assert!(generate_rmd(0, 0.7, 1, 1.0).is_err());
        assert!(generate_rmd(11, 0.7, 1, 1.0).is_err());
        assert!(generate_rmd(4, 0.0, 1, 1.0).is_err());
        assert!(generate_rmd(4, 1.0, 1, 1.0).is_err());
        assert!(generate_rmd(4, 0.7, 1, 0.0).is_err());
    }

    #[test]
    fn stats_hand_grid() {
        // 3x3 grid with heights 0..8: mean 4, max 8, rms sqrt(60/9).
        let s = RoughSurface::from_heights(1, 3.0, (0..9).map(f64::from).collect()).unwrap();
        let st = surface_stats(&s);
        assert_abs_diff_eq!(st.mean, 4.0);
        assert_abs_diff_eq!(st.max, 8.0);
        assert_relative_eq!(st.rms, (60.0f64 / 9.0).sqrt(), max_relative = 1e-15);
    }

    #[test]
    fn stats_constant_grid() {
        let s = RoughSurface::from_heights(1, 3.0, vec![5.0; 9]).unwrap();
        // Re-datum moves the constant to zero; rms must vanish.
        let st = surface_stats(&s);
        assert_eq!(st.rms, 0.0);
        assert_eq!(st.mean, st.max);
    }

    #[test]
    fn composite_with_flat_is_identity() {
        let s = generate_rmd(3, 0.7, 3, 5.0).unwrap();
        let flat = RoughSurface::flat(3, s.lateral_size());
        let c = composite_topography(&s, &flat).unwrap();
        assert_eq!(c.heights(), s.heights());
    }

    #[test]
    fn composite_with_itself_doubles() {
        let s = generate_rmd(3, 0.7, 5, 5.0).unwrap();
        let c = composite_topography(&s, &s).unwrap();
        for (ci, si) in c.heights().iter().zip(s.heights()) {
            assert_abs_diff_eq!(*ci, 2.0 * si);
        }
    }

    #[test]
    fn composite_matches_direct_formula() {
        let s1 = generate_rmd(3, 0.7, 11, 5.0).unwrap();
        let s2 = generate_rmd(3, 0.4, 12, 3.0).unwrap();
        let c = composite_topography(&s1, &s2).unwrap();
        let sums: Vec<f64> = s1
            .heights()
            .iter()
            .zip(s2.heights())
            .map(|(a, b)| a + b)
            .collect();
        let min = sums.iter().cloned().fold(f64::INFINITY, f64::min);
        for (ci, si) in c.heights().iter().zip(&sums) {
            assert_abs_diff_eq!(*ci, si - min, epsilon = 1e-15);
        }
    }

    #[test]
    fn composite_rejects_mismatched_grids() {
        let s1 = generate_rmd(3, 0.7, 1, 5.0).unwrap();
        let s2 = generate_rmd(4, 0.7, 1, 5.0).unwrap();
        assert!(composite_topography(&s1, &s2).is_err());
    }

    #[test]
    fn xyz_round_trip() {
        let dir = std::env::temp_dir().join("rough_contact_xyz_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("roundtrip.xyz");
        let s = generate_rmd(4, 0.6, 9, 25.0).unwrap();
        write_surface_xyz(&s, &path).unwrap();
        let r = read_surface_xyz(&path).unwrap();
        assert_eq!(r.grid(), s.grid());
        assert_relative_eq!(r.lateral_size(), s.lateral_size(), max_relative = 1e-12);
        for (a, b) in r.heights().iter().zip(s.heights()) {
            assert_abs_diff_eq!(*a, *b, epsilon = 1e-12);
        }
    }

    #[test]
    fn xyz_hand_grid() {
        let dir = std::env::temp_dir().join("rough_contact_xyz_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("hand.xyz");
        std::fs::write(
            &path,
            "# hand-built 3x3 grid\n\
             0 0 1\n2 0 2\n4 0 3\n\
             0 2 4\n2 2 5\n4 2 6\n\
             0 4 7\n2 4 8\n4 4 9\n",
        )
        .unwrap();
        let s = read_surface_xyz(&path).unwrap();
        assert_eq!(s.grid(), 3);
        assert_abs_diff_eq!(s.cell_size(), 2.0);
        // Datum shifts to the minimum height 1.
        assert_abs_diff_eq!(s.height(0, 0), 0.0);
        assert_abs_diff_eq!(s.height(2, 2), 8.0);
    }

    #[test]
    fn xyz_rejects_non_square() {
        let dir = std::env::temp_dir().join("rough_contact_xyz_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("bad.xyz");
        let body: String = (0..10).map(|k| format!("{k} 0 1\n")).collect();
        std::fs::write(&path, body).unwrap();
        match read_surface_xyz(&path) {
            Err(Error::Format { .. }) => {}
            other => panic!("expected format error, got {other:?}"),
        }
    }

    #[test]
    fn xyz_rejects_unparsable_line() {
        let dir = std::env::temp_dir().join("rough_contact_xyz_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("parse.xyz");
        std::fs::write(&path, "0 0 1\nnot a number here\n").unwrap();
        match read_surface_xyz(&path) {
            Err(Error::Format { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected format error, got {other:?}"),
        }
    }

    proptest! {
        #[test]
        fn rmd_min_is_zero_max_is_target(seed in 0u64..500, n in 1u32..6) {
            let s = generate_rmd(n, 0.7, seed, 50.0).unwrap();
            let min = s.heights().iter().cloned().fold(f64::INFINITY, f64::min);
            let max = s.heights().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            prop_assert_eq!(min, 0.0);
            prop_assert_eq!(max, 50.0);
        }

        #[test]
        fn rms_scales_affinely(seed in 0u64..200, scale in 0.1f64..10.0) {
            let s = generate_rmd(3, 0.7, seed, 10.0).unwrap();
            let scaled = RoughSurface::from_heights(
                3,
                s.lateral_size(),
                s.heights().iter().map(|h| h * scale).collect(),
            )
            .unwrap();
            let st = surface_stats(&s);
            let su = surface_stats(&scaled);
            prop_assert!((su.rms - scale * st.rms).abs() <= 1e-12 * su.rms.max(1.0));
        }

        #[test]
        fn composite_is_symmetric(sa in 0u64..100, sb in 0u64..100) {
            let s1 = generate_rmd(3, 0.7, sa, 5.0).unwrap();
            let s2 = generate_rmd(3, 0.5, sb, 8.0).unwrap();
            let c12 = composite_topography(&s1, &s2).unwrap();
            let c21 = composite_topography(&s2, &s1).unwrap();
            prop_assert_eq!(c12.heights(), c21.heights());
        }
    }
}
