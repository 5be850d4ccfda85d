//! Circle patterns from face-weighted bipartite dimer models.
//!
//! The crate turns positive face weights on a bipartite graph into the
//! centers of a circle pattern (planar graphs with a degree-4 outer face and
//! biperiodic graphs on the torus), runs Miquel dynamics on square-grid
//! patterns as a cluster Y-system, and builds the circle patterns attached to
//! resistor networks (Temperley) and Ising models (s-embeddings).

pub mod error;
pub mod families;
pub mod graphcore;
pub mod io;
pub mod ising_sembed;
pub mod kasteleyn;
pub mod geom;
pub mod linalg;
pub mod miquel_dynamics;
pub mod plane_graph;
pub mod planar_embed;
pub mod resistor_networks;
pub mod svg;
pub mod torus_spectral;

pub use error::{Error, Result};
pub use num_complex::Complex64;
