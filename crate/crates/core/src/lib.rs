//! Exact and Monte Carlo engines for finite Ising systems, their random
//! current and random cluster representations, and Z2 lattice gauge models.

pub mod backbone;
pub mod check;
pub mod complex;
pub mod currents;
pub mod error;
pub mod fk;
pub mod gauge;
pub mod graph;
pub mod ineq;
pub mod lattice;
pub mod samplers;
pub mod spin;
pub mod sum;
pub mod unionfind;

pub use error::{Error, Result};
pub use graph::{BoundarySpec, Caps, Couplings, Designation, FieldSpec, Graph, Model};
