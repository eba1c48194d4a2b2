//! Macroscopic model: bulk quads, interface elements, displacement control.
//!
//! The load is applied by scaling constrained dofs with the step's imposed
//! displacement Δ, so a constraint with scale 0 is a fixed support and one
//! with scale −1 follows the loading platen downward.

use nalgebra::{DMatrix, DVector, SVector};

use crate::error::Result;
use crate::fem::interface::{self, InterfaceGeometry};
use crate::fem::quad4;

/// Pressure and algorithmic tangent returned by a constitutive call.
#[derive(Clone, Copy, Debug)]
pub struct ConstitutiveResponse {
    pub pressure: f64,
    /// dp/dgₙ used to assemble the interface stiffness.
    pub tangent: f64,
}

/// Interface constitutive law evaluated per Gauss point.
///
/// Implementations may keep per-point state (warm starts, secant memories);
/// `commit` is called once after each converged load step.
pub trait InterfaceLaw {
    fn response(&mut self, gp: usize, step: usize, g_n: f64) -> Result<ConstitutiveResponse>;

    fn commit(&mut self, _step: usize) {}

    fn name(&self) -> &'static str {
        "interface law"
    }
}

#[derive(Clone, Copy)]
pub struct BulkElement {
    pub nodes: [usize; 4],
    pub e: f64,
    pub nu: f64,
}

#[derive(Clone, Copy)]
pub struct InterfaceElement {
    /// (n₁, n₂) lower face, (n₃, n₄) upper face with n₄ above n₁.
    pub nodes: [usize; 4],
}

#[derive(Clone, Copy)]
pub struct Constraint {
    pub dof: usize,
    /// Imposed value is scale·Δ.
    pub scale: f64,
}

/// Per-Gauss-point state sampled during assembly.
#[derive(Clone, Copy, Debug)]
pub struct GaussState {
    pub g_n: f64,
    pub pressure: f64,
    pub tangent: f64,
}

pub struct MacroModel {
    pub nodes: Vec<[f64; 2]>,
    pub bulk: Vec<BulkElement>,
    pub interface: Vec<InterfaceElement>,
    pub constraints: Vec<Constraint>,
    /// Dofs whose internal forces sum to the transmitted normal load.
    pub reaction_dofs: Vec<usize>,
}

impl MacroModel {
    /// Two stacked square blocks of side `l` (µm) joined by one interface
    /// element, loaded by pushing the top edge down. The lower block's bottom
    /// edge is vertically supported; each block is pinned horizontally at its
    /// top-left node.
    pub fn benchmark(l: f64, e1: f64, nu1: f64, e2: f64, nu2: f64) -> Self {
        let nodes = vec![
            [0.0, 0.0],     // 0: lower block
            [l, 0.0],       // 1
            [l, l],         // 2
            [0.0, l],       // 3
            [0.0, l],       // 4: upper block
            [l, l],         // 5
            [l, 2.0 * l],   // 6
            [0.0, 2.0 * l], // 7
        ];
        let bulk = vec![
            BulkElement { nodes: [0, 1, 2, 3], e: e1, nu: nu1 },
            BulkElement { nodes: [4, 5, 6, 7], e: e2, nu: nu2 },
        ];
        let interface = vec![InterfaceElement { nodes: [3, 2, 5, 4] }];
        let constraints = vec![
            Constraint { dof: 2 * 0 + 1, scale: 0.0 },  // v at lower-left support
            Constraint { dof: 2 * 1 + 1, scale: 0.0 },  // v at lower-right support
            Constraint { dof: 2 * 3, scale: 0.0 },      // u pin, lower block
            Constraint { dof: 2 * 7, scale: 0.0 },      // u pin, upper block
            Constraint { dof: 2 * 6 + 1, scale: -1.0 }, // platen, right
            Constraint { dof: 2 * 7 + 1, scale: -1.0 }, // platen, left
        ];
        Self {
            nodes,
            bulk,
            interface,
            constraints,
            reaction_dofs: vec![2 * 0 + 1, 2 * 1 + 1],
        }
    }

    pub fn dof_count(&self) -> usize {
        2 * self.nodes.len()
    }

    pub fn gauss_point_count(&self) -> usize {
        2 * self.interface.len()
    }

    /// Nominal contact area (interface length × unit depth).
    pub fn interface_area(&self) -> f64 {
        self.interface
            .iter()
            .map(|el| {
                let [n1, n2, _, _] = el.nodes;
                let (a, b) = (self.nodes[n1], self.nodes[n2]);
                ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt()
            })
            .sum()
    }

    /// Free dofs in ascending order.
    pub fn free_dofs(&self) -> Vec<usize> {
        let mut constrained = vec![false; self.dof_count()];
        for c in &self.constraints {
            constrained[c.dof] = true;
        }
        (0..self.dof_count()).filter(|&d| !constrained[d]).collect()
    }

    /// Writes the imposed values scale·Δ into the constrained dofs of `d`.
    pub fn apply_constraints(&self, d: &mut DVector<f64>, delta: f64) {
        for c in &self.constraints {
            d[c.dof] = c.scale * delta;
        }
    }

    /// Assembles the (constant) bulk stiffness once per model.
    pub fn bulk_stiffness(&self) -> Result<DMatrix<f64>> {
        let ndof = self.dof_count();
        let mut k = DMatrix::zeros(ndof, ndof);
        for el in &self.bulk {
            let coords = el.nodes.map(|n| self.nodes[n]);
            let ke = quad4::stiffness(&coords, el.e, el.nu)?;
            for (a, &na) in el.nodes.iter().enumerate() {
                for (b, &nb) in el.nodes.iter().enumerate() {
                    for i in 0..2 {
                        for j in 0..2 {
                            k[(2 * na + i, 2 * nb + j)] += ke[(2 * a + i, 2 * b + j)];
                        }
                    }
                }
            }
        }
        Ok(k)
    }

    fn interface_geometry(&self, el: &InterfaceElement) -> Result<InterfaceGeometry> {
        interface::geometry(self.nodes[el.nodes[0]], self.nodes[el.nodes[1]])
    }

    /// Residual R = K_bulk·d + f_interface(d) and consistent tangent at `d`.
    /// The law is queried at every interface Gauss point; the sampled states
    /// come back for recording.
    pub fn assemble(
        &self,
        k_bulk: &DMatrix<f64>,
        d: &DVector<f64>,
        law: &mut dyn InterfaceLaw,
        step: usize,
    ) -> Result<(DVector<f64>, DMatrix<f64>, Vec<GaussState>)> {
        let mut residual = k_bulk * d;
        let mut k = k_bulk.clone();
        let mut states = Vec::with_capacity(self.gauss_point_count());

        for (ei, el) in self.interface.iter().enumerate() {
            let geom = self.interface_geometry(el)?;
            let mut d_el = SVector::<f64, 8>::zeros();
            for (a, &n) in el.nodes.iter().enumerate() {
                d_el[2 * a] = d[2 * n];
                d_el[2 * a + 1] = d[2 * n + 1];
            }
            let gaps = interface::gauss_gaps(&geom, &d_el);

            let mut pressures = [0.0; 2];
            let mut tangents = [0.0; 2];
            for gp in 0..2 {
                let r = law.response(2 * ei + gp, step, gaps[gp])?;
                pressures[gp] = r.pressure;
                tangents[gp] = r.tangent;
                states.push(GaussState {
                    g_n: gaps[gp],
                    pressure: r.pressure,
                    tangent: r.tangent,
                });
            }

            let (f_el, k_el) = interface::force_and_stiffness(&geom, &pressures, &tangents);
            for (a, &na) in el.nodes.iter().enumerate() {
                for i in 0..2 {
                    residual[2 * na + i] += f_el[2 * a + i];
                }
                for (b, &nb) in el.nodes.iter().enumerate() {
                    for i in 0..2 {
                        for j in 0..2 {
                            k[(2 * na + i, 2 * nb + j)] += k_el[(2 * a + i, 2 * b + j)];
                        }
                    }
                }
            }
        }
        Ok((residual, k, states))
    }

    /// Total vertical load transmitted to the supports, positive in
    /// compression.
    pub fn reaction(&self, residual: &DVector<f64>) -> f64 {
        self.reaction_dofs.iter().map(|&dof| residual[dof]).sum()
    }
}

/// Restriction of a full vector to the free dofs.
pub fn restrict(v: &DVector<f64>, free: &[usize]) -> DVector<f64> {
    DVector::from_iterator(free.len(), free.iter().map(|&d| v[d]))
}

/// Restriction of a full matrix to the free dofs (rows and columns).
pub fn restrict_matrix(m: &DMatrix<f64>, free: &[usize]) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(free.len(), free.len());
    for (i, &di) in free.iter().enumerate() {
        for (j, &dj) in free.iter().enumerate() {
            out[(i, j)] = m[(di, dj)];
        }
    }
    out
}

pub fn scatter_add(d: &mut DVector<f64>, free: &[usize], update: &DVector<f64>) {
    for (i, &dof) in free.iter().enumerate() {
        d[dof] += update[i];
    }
}
