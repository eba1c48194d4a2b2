//! Four-node, zero-thickness interface element.
//!
//! Nodes (n₁, n₂) run along the lower face and (n₄, n₃) sit above them, so
//! the relative displacement at end A is d(n₄) − d(n₁) and at end B is
//! d(n₃) − d(n₂). The local frame has the tangent from n₁ to n₂ and the
//! normal rotated 90° counter-clockwise from it (pointing into the upper
//! body). The normal gap is gₙ = −n·(relative displacement): closing the
//! interface gives positive approach.

use nalgebra::{RowSVector, SMatrix, SVector};

use crate::error::{Error, Result};
use crate::fem::quad4::GAUSS_1D;

pub struct InterfaceGeometry {
    pub tangent: [f64; 2],
    pub normal: [f64; 2],
    pub length: f64,
}

/// Local frame from the lower-face end coordinates.
pub fn geometry(c1: [f64; 2], c2: [f64; 2]) -> Result<InterfaceGeometry> {
    let dx = c2[0] - c1[0];
    let dy = c2[1] - c1[1];
    let length = (dx * dx + dy * dy).sqrt();
    if length <= 0.0 {
        return Err(Error::Mesh("interface element has zero length".into()));
    }
    let tangent = [dx / length, dy / length];
    Ok(InterfaceGeometry {
        tangent,
        normal: [-tangent[1], tangent[0]],
        length,
    })
}

/// Row vector bₙ = ∂gₙ/∂d at parent coordinate ξ, with d ordered
/// (u₁, v₁, u₂, v₂, u₃, v₃, u₄, v₄).
fn normal_gap_row(geom: &InterfaceGeometry, xi: f64) -> RowSVector<f64, 8> {
    let n1 = (1.0 - xi) / 2.0;
    let n2 = (1.0 + xi) / 2.0;
    let (nx, ny) = (geom.normal[0], geom.normal[1]);
    // gₙ = −n·[N₁(d₄ − d₁) + N₂(d₃ − d₂)]
    RowSVector::<f64, 8>::from_row_slice(&[
        n1 * nx,
        n1 * ny,
        n2 * nx,
        n2 * ny,
        -n2 * nx,
        -n2 * ny,
        -n1 * nx,
        -n1 * ny,
    ])
}

/// Normal gaps at the two Gauss points for element displacements `d`.
pub fn gauss_gaps(geom: &InterfaceGeometry, d: &SVector<f64, 8>) -> [f64; 2] {
    [normal_gap_row(geom, GAUSS_1D[0]) * d, normal_gap_row(geom, GAUSS_1D[1]) * d].map(|g| g[0])
}

/// Internal force and consistent tangent from Gauss-point pressures and
/// pressure derivatives dp/dgₙ. Integration uses detJ = ℓ/2 and unit weights.
pub fn force_and_stiffness(
    geom: &InterfaceGeometry,
    pressures: &[f64; 2],
    tangents: &[f64; 2],
) -> (SVector<f64, 8>, SMatrix<f64, 8, 8>) {
    let det_j = geom.length / 2.0;
    let mut f = SVector::<f64, 8>::zeros();
    let mut k = SMatrix::<f64, 8, 8>::zeros();
    for gp in 0..2 {
        let b = normal_gap_row(geom, GAUSS_1D[gp]);
        f += det_j * pressures[gp] * b.transpose();
        k += det_j * tangents[gp] * b.transpose() * b;
    }
    (f, k)
}
