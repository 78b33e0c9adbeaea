//! Generalized Morrey spaces on sampled functions.
//!
//! The crate is organised bottom-up:
//!
//! * [`weight`]: weight and kernel functions on `(0, ∞)`, class membership and
//!   integral conditions over a log-spaced probe grid;
//! * [`grid`]: uniform lattices, cubes, prefix-sum tables and a catalog of
//!   test functions;
//! * [`norms`]: Morrey and weak Morrey norms with witness cubes;
//! * [`operators`]: maximal operators, fractional integrals, Riesz transforms;
//! * [`blocks`]: blocks, block decompositions and the duality pairing;
//! * [`verify`]: ratio experiments and counterexample families.

pub mod blocks;
pub mod error;
pub mod grid;
pub mod norms;
pub mod operators;
mod par;
pub mod quadrature;
pub mod verify;
pub mod weight;

pub use error::{Error, Result};
pub use grid::{CatalogSpec, Cube, CubePolicy, Grid, GridFunction};
pub use weight::{ProbeGrid, WeightFunction};
