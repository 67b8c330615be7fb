//! Classical simulation of QCPU networks and discretized Schrodinger evolution.
//!
//! The crate is organized bottom-up:
//!
//! - [`numerics`]: dense complex matrices, structured operators and the
//!   exact `exp(+-iHt)` oracle.
//! - [`qcpu`]: networks `Q(U)`, the connector, sum and product composition.
//! - [`grid`]: periodic grids, momentum/kinetic/potential operators,
//!   two-particle lifts.
//! - [`evolve`]: Euler steps, step networks and the connector-chained
//!   whole-evolution network.
//! - [`systems`]: free particle, harmonic oscillator, constant field and the
//!   center-of-mass split of a two-body problem.
//! - [`cli`]: the `qcpu-sim` command-line front end.

pub mod cli;
pub mod error;
pub mod evolve;
pub mod grid;
pub mod numerics;
pub mod qcpu;
pub mod systems;

pub use error::{Error, Result};
pub use numerics::{ComplexMatrix, Sign, StructuredOperator, C64};
