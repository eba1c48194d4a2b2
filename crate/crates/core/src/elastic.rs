//! Composite elastic parameters reducing two deformable bodies to a single
//! elastic half-space under a rigid indenter.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Effective Young's modulus, shear modulus and Poisson ratio of the
/// equivalent half-space. Moduli in N/µm².
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompositeElastic {
    pub e: f64,
    pub g: f64,
    pub nu: f64,
}

/// Combines the two bodies' elastic constants:
///
/// E = [(1-ν₁²)/E₁ + (1-ν₂²)/E₂]⁻¹
/// G = [(2-ν₁)/(4G₁) + (2-ν₂)/(4G₂)]⁻¹ with Gᵢ = Eᵢ/[2(1+νᵢ)]
/// ν = E/(2G) - 1
pub fn composite_moduli(e1: f64, nu1: f64, e2: f64, nu2: f64) -> Result<CompositeElastic> {
    for (label, e) in [("E1", e1), ("E2", e2)] {
        if !(e > 0.0) || !e.is_finite() {
            return Err(Error::Parameter(format!("{label} must be positive, got {e}")));
        }
    }
    for (label, nu) in [("nu1", nu1), ("nu2", nu2)] {
        if !(-1.0 < nu && nu < 0.5) {
            return Err(Error::Parameter(format!(
                "{label} must lie in (-1, 0.5), got {nu}"
            )));
        }
    }
    let e = 1.0 / ((1.0 - nu1 * nu1) / e1 + (1.0 - nu2 * nu2) / e2);
    let g1 = e1 / (2.0 * (1.0 + nu1));
    let g2 = e2 / (2.0 * (1.0 + nu2));
    let g = 1.0 / ((2.0 - nu1) / (4.0 * g1) + (2.0 - nu2) / (4.0 * g2));
    Ok(CompositeElastic {
        e,
        g,
        nu: e / (2.0 * g) - 1.0,
    })
}
