//! Stabilizer simulation of random circuits assembled from graph-state
//! preparation blocks.

pub mod analysis;
pub mod catalog;
pub mod engine;
pub mod error;
pub mod gate;
pub mod gf2;
pub mod graph;
pub mod lc;
pub mod oracle;
pub mod pauli;
pub mod tableau;

pub use analysis::{OtocField, VelocityFit};
pub use catalog::{CatalogEntry, TableRow};
pub use engine::{EnsembleConfig, LayerPlacement, RunResult};
pub use error::{Error, Result};
pub use gate::{Boundary, EntropyUnit, Gate};
pub use graph::{BlockDescriptors, GraphSpec};
pub use pauli::{Letter, PauliString};
pub use tableau::{Region, StabilizerTableau};
