//! Unfitted Nitsche-XFEM discretization of distributed optimal control problems
//! governed by elliptic interface equations.
//!
//! The pipeline is: [`mesh`] builds a uniform triangulation, [`geometry`] cuts it
//! with a level set, [`space`] enriches the P1 space around the interface,
//! [`assembly`] builds the Nitsche system, and [`optctl`] solves the optimality
//! system. [`problems`] holds the benchmark problems and [`analysis`] measures
//! errors and convergence orders.

pub mod analysis;
pub mod assembly;
pub mod cli;
pub mod error;
pub mod geometry;
pub mod linalg;
pub mod mesh;
pub mod optctl;
pub mod problems;
pub mod space;

pub use error::{Error, Result};
