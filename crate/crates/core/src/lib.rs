//! Pseudo-spectral harmonic analysis on the periodic torus and solvers for the
//! density-dependent incompressible Oldroyd system.
//!
//! The crate is `no_std` (it needs `alloc`). Everything here is a pure function
//! of its inputs; file formats, configuration and the command-line front end
//! live in the companion `oldroyd-lab` crate.
//!
//! Layout:
//!
//! * [`grid`], [`field`], [`ops`], [`dyadic`]: torus grids, Fourier pairs,
//!   Fourier multipliers and the Littlewood-Paley ladder.
//! * [`norms`]: Lebesgue, homogeneous Besov, Chemin-Lerner and hybrid norms.
//! * [`solvers`]: transport, heat, variable-coefficient elliptic and the
//!   hyperbolic-parabolic coupled system.
//! * [`oldroyd`]: the nonlinear system, its pressure, stepping, the
//!   linearization map and constraint monitors.
//! * [`verify`]: ensemble experiments measuring empirical constants.
//!
//! Matrix fields are stored row-major, `h[i * dim + j]` is `H^{ij}`, and the
//! divergence of a matrix field is taken along rows: `(div A)^i = ∂_j A^{ij}`.
#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod dyadic;
pub mod error;
mod fft;
pub mod field;
pub mod grid;
pub mod norms;
pub mod oldroyd;
pub mod ops;
pub mod random;
pub mod solvers;
pub mod time;
pub mod verify;

pub use dyadic::{DyadicBlocks, DyadicLadder, PartitionProfile};
pub use error::{Error, Result};
pub use field::{forward_transform, inverse_transform, SpectralField};
pub use grid::GridSpec;
pub use norms::{BesovSpec, Exponent, HybridSpec, NormSeries};
pub use time::TimeGrid;
