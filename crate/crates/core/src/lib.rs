//! Rearrangement inequalities for trap functionals and capacities of Lévy
//! processes, checked numerically on grids and by Monte Carlo.

pub mod error;
pub mod capacity;
pub mod grid;
mod lattice;
pub mod levy;
pub mod mc;
pub mod rearrange;
pub mod report;
pub mod scalar;
pub mod trap_continuum;
pub mod trap_discrete;

pub use error::{Error, Result};
pub use grid::{Grid, GridField};
pub use scalar::Scalar;

pub type Field = GridField<f64>;
pub type Field32 = GridField<f32>;
