//! hp finite elements on quadrilaterals for energy minimization.
//!
//! The crate builds hierarchical (trunk-space) shape functions of arbitrary
//! degree, global DOF maps with edge-orientation signs, p-Laplace and
//! compressible Neo-Hookean energies with explicit gradients, and a
//! trust-region Newton solver driven by a colored finite-difference Hessian.

pub mod basis;
pub mod bench;
pub mod dofmap;
pub mod error;
pub mod fd;
pub mod mesh;
pub mod models;
pub mod problem;
pub mod quadrature;
pub mod solver;
pub mod sparse;
pub mod vtk;

pub use error::{Error, Result};
