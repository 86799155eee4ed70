//! Torsion functions and torsional energies of domains confined to a
//! cylinder, with volume-constrained shape optimization.
//!
//! The container is ω × ℝ (or the half-cylinder ω × (0, ∞)), truncated
//! axially for computation. Domains are cell masks; the torsion problem
//! −Δu = 1 with u = 0 on the free boundary and zero normal derivative on the
//! container wall is discretized by a cell-centered finite-volume scheme;
//! the torsional energy is −½∫u. On top of the solver sit closed-form
//! oracles (flat-cylinder and half-disk energies, the stability threshold β,
//! free-boundary measure bounds) and three interchangeable optimization
//! strategies selected by name: a level-set gradient flow, a discrete
//! cell-swap local search, and a brute-force enumerator for tiny instances.

pub mod error;
pub mod field;
pub mod geometry;
pub mod io;
pub mod levelset;
pub mod optimizer;
pub mod oracles;
pub mod rng;
pub mod torsion;

pub use error::{Error, Result};
pub use field::ScalarField;
pub use geometry::{
    build_grid, CrossSection, CylinderGrid, DomainMask, Mode, Shape, WallSide,
};
pub use optimizer::{OptimizerConfig, OptimizerReport, ShapeOptimizer};
pub use torsion::TorsionSolution;
