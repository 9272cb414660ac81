//! Jump and sum brackets, and the compound differences built from them.
//!
//! Half-integer brackets map cell data to face data (`[q]_{i+1/2}`,
//! `{q}_{i+1/2}`); the `±1/2` brackets map face data back to cells. All
//! other differences are compositions of the two.

use super::{Offset, ScalarStencil, Units};
use crate::grid::Axis;

fn two_point(axis: Axis, a: (i32, f64), b: (i32, f64)) -> ScalarStencil {
    ScalarStencil::from_entries(
        [(Offset::along(axis, a.0), a.1), (Offset::along(axis, b.0), b.1)],
        Units::NONE,
    )
}

/// `[q]_{i+1/2} = q_{i+1} - q_i`
pub fn diff_half(axis: Axis) -> ScalarStencil {
    two_point(axis, (1, 1.0), (0, -1.0))
}

/// `{q}_{i+1/2} = q_{i+1} + q_i`
pub fn sum_half(axis: Axis) -> ScalarStencil {
    two_point(axis, (1, 1.0), (0, 1.0))
}

/// `[w]_{i±1/2} = w_{i+1/2} - w_{i-1/2}` on face data.
pub fn diff_pm_half(axis: Axis) -> ScalarStencil {
    two_point(axis, (0, 1.0), (-1, -1.0))
}

/// `{w}_{i±1/2} = w_{i+1/2} + w_{i-1/2}` on face data.
pub fn sum_pm_half(axis: Axis) -> ScalarStencil {
    two_point(axis, (0, 1.0), (-1, 1.0))
}

/// `[q]_{i±1} = {[q]}_{i±1/2} = q_{i+1} - q_{i-1}`
pub fn diff_pm1(axis: Axis) -> ScalarStencil {
    sum_pm_half(axis).compose(&diff_half(axis))
}

/// `[[q]]_{i±1/2} = q_{i+1} - 2 q_i + q_{i-1}`
pub fn second_diff(axis: Axis) -> ScalarStencil {
    diff_pm_half(axis).compose(&diff_half(axis))
}

/// `{{q}}_{i±1/2} = q_{i+1} + 2 q_i + q_{i-1}`
pub fn double_sum(axis: Axis) -> ScalarStencil {
    sum_pm_half(axis).compose(&sum_half(axis))
}
