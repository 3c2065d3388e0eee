//! Analysis of degenerate Lagrangian systems through a partial Hamiltonian
//! formalism: Hessian rank, partial Legendre transform, the `F`/`G` system,
//! new brackets, reduced dynamics, the Dirac picture and multi-time
//! dynamics.

pub mod bracket;
pub mod dirac;
pub mod dynamics;
pub mod error;
pub mod fixtures;
pub mod lagrangian;
pub mod linalg;
pub mod multitime;
pub mod partial;
pub mod symbolic;

pub use error::{Error, Result};
pub mod verify;
