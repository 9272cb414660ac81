//! Semi-discrete finite-difference schemes for the linear acoustic equations
//!
//! ```text
//! ∂t v + ∇p / ε² = 0
//! ∂t p + c² div v = 0
//! ```
//!
//! on periodic Cartesian grids, together with the tools to decide whether a
//! scheme keeps a discrete analogue of every divergence-free velocity field
//! stationary ("stationarity preserving"), and therefore conserves a discrete
//! vorticity exactly.
//!
//! The crate is `no_std` (it needs `alloc`). File formats, the command line
//! front end and parallel sweeps live in the companion `statpres` crate.
//!
//! Module map:
//!
//! - [`grid`]: periodic grid, the `(u, v, p)` state and the norms used by experiments
//! - [`stencil`]: scalar / row / 3×3-matrix stencils, bracket builders, named operators
//! - [`fourier`]: numeric evolution matrices, kernel scans, eigenvalue scaling
//! - [`laurent`]: exact rational Laurent-polynomial symbols and certification
//! - [`schemes`]: the scheme catalog and right-hand-side evaluation
//! - [`time`]: forward Euler stepping, probes and CFL sweeps
//! - [`experiments`]: vortex data, kernel-adapted data, decay fits, conserved operators
#![no_std]

extern crate alloc;

pub mod error;
pub mod experiments;
pub mod fourier;
pub mod grid;
pub mod laurent;
pub mod schemes;
pub mod stencil;
pub mod time;

pub use error::{Error, Result};
pub use grid::{AcousticParams, Axis, Component, FieldSet, GridSpec};
pub use schemes::{Family, SchemeKind, SchemeSpec};
pub use stencil::{MatrixStencil, Offset, ScalarStencil, Units, VecStencilRow};
