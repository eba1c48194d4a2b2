//! Plane-strain four-node quadrilateral, 2×2 Gauss integration, unit
//! out-of-plane depth. Node order is counter-clockwise starting at the
//! element's lower-left corner.

use nalgebra::{Matrix2, SMatrix};

use crate::error::{Error, Result};

/// 1D Gauss abscissae for the 2-point rule (weights are 1).
pub const GAUSS_1D: [f64; 2] = [-0.577_350_269_189_625_8, 0.577_350_269_189_625_8];

/// Element stiffness for nodal coordinates `coords` (CCW) and bulk material
/// (e, nu). Dof order is (u₁, v₁, …, u₄, v₄).
pub fn stiffness(coords: &[[f64; 2]; 4], e: f64, nu: f64) -> Result<SMatrix<f64, 8, 8>> {
    if e <= 0.0 {
        return Err(Error::Parameter(format!("bulk modulus must be positive, got {e}")));
    }
    if !(-1.0 < nu && nu < 0.5) {
        return Err(Error::Parameter(format!(
            "bulk Poisson ratio must lie in (-1, 0.5), got {nu}"
        )));
    }

    let c = e / ((1.0 + nu) * (1.0 - 2.0 * nu));
    let d = SMatrix::<f64, 3, 3>::new(
        c * (1.0 - nu),
        c * nu,
        0.0,
        c * nu,
        c * (1.0 - nu),
        0.0,
        0.0,
        0.0,
        c * (1.0 - 2.0 * nu) / 2.0,
    );

    let mut k = SMatrix::<f64, 8, 8>::zeros();
    for &xi in &GAUSS_1D {
        for &eta in &GAUSS_1D {
            let dn = shape_gradients(xi, eta);
            let mut jac = Matrix2::zeros();
            for a in 0..4 {
                jac[(0, 0)] += dn[(0, a)] * coords[a][0];
                jac[(0, 1)] += dn[(0, a)] * coords[a][1];
                jac[(1, 0)] += dn[(1, a)] * coords[a][0];
                jac[(1, 1)] += dn[(1, a)] * coords[a][1];
            }
            let det = jac.determinant();
            if det <= 0.0 {
                return Err(Error::Mesh(format!(
                    "quad element has non-positive Jacobian ({det}) at gauss point ({xi}, {eta})"
                )));
            }
            let inv = jac.try_inverse().unwrap();
            let dxy = inv * dn;

            let mut b = SMatrix::<f64, 3, 8>::zeros();
            for a in 0..4 {
                b[(0, 2 * a)] = dxy[(0, a)];
                b[(1, 2 * a + 1)] = dxy[(1, a)];
                b[(2, 2 * a)] = dxy[(1, a)];
                b[(2, 2 * a + 1)] = dxy[(0, a)];
            }
            k += b.transpose() * d * b * det;
        }
    }
    Ok(k)
}

/// Parent-space shape function gradients [∂N/∂ξ; ∂N/∂η] (2×4).
fn shape_gradients(xi: f64, eta: f64) -> SMatrix<f64, 2, 4> {
    SMatrix::<f64, 2, 4>::new(
        -(1.0 - eta) / 4.0,
        (1.0 - eta) / 4.0,
        (1.0 + eta) / 4.0,
        -(1.0 + eta) / 4.0,
        -(1.0 - xi) / 4.0,
        -(1.0 + xi) / 4.0,
        (1.0 + xi) / 4.0,
        (1.0 - xi) / 4.0,
    )
}
