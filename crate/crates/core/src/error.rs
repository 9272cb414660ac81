use alloc::string::String;

use thiserror::Error;

/// Errors produced by the core library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    #[error("non-finite value {value} at cell ({i}, {j})")]
    NonFinite { i: usize, j: usize, value: f64 },

    #[error("field has {got} cells, grid expects {expected}")]
    ShapeMismatch { expected: usize, got: usize },

    #[error("grid {nx}x{ny} too small for stencil radius {radius}")]
    GridTooSmall { nx: usize, ny: usize, radius: i32 },

    #[error("cannot add stencils carrying different grid-spacing units")]
    UnitMismatch,

    #[error("kernel dimension is {0}, expected 1")]
    KernelDimension(usize),

    #[error("division by the zero polynomial")]
    DivisionByZero,

    #[error("coefficient {0} is not a finite rational")]
    NonRational(f64),

    #[error("infeasible constraint assembly: {0}")]
    Infeasible(String),

    #[error("divergence row components do not commute")]
    NonCommuting,

    #[error("no polynomial left-kernel row up to radius {0}; numeric-only mode")]
    NumericOnly(i32),

    #[error("instability at step {step} (t = {time})")]
    Unstable { step: usize, time: f64 },

    #[error("run needs {needed} steps, limit is {limit}")]
    StepLimit { needed: usize, limit: usize },

    #[error("non-positive value at index {index} inside the fit window")]
    NonPositive { index: usize },

    #[error("unknown low-Mach variant {0} (expected 1, 2 or 3)")]
    InvalidVariant(u8),
}

pub type Result<T> = core::result::Result<T, Error>;
