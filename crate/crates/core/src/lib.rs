//! Two-scale solver for the normal contact of rough interfaces.
//!
//! A macroscopic finite-element model carries the bodies; every interface
//! integration point holds a microscopic boundary-element patch whose rough
//! topography turns approach into mean pressure. Three coupling strategies
//! trade tangent quality against micro-solve count, and a benchmark driver
//! reproduces pressure, stiffness, and convergence characteristics on a
//! randomized self-affine surface.

pub mod bem;
pub mod bench;
pub mod coupling;
pub mod elastic;
pub mod error;
pub mod fem;
pub mod fit;
pub mod surface;

pub use elastic::{composite_moduli, CompositeElastic};
pub use error::{Error, Result};
pub use surface::{
    composite_topography, generate_rmd, grid_size, read_surface_xyz, surface_stats,
    write_surface_xyz, RoughSurface, SurfaceStats,
};
