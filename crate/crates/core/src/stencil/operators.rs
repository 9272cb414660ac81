//! Named divergence, diffusion and curl rows.

use super::brackets::{diff_pm1, double_sum, second_diff};
use super::{ScalarStencil, Units, VecStencilRow};
use crate::grid::Axis;

fn per(axis: Axis, st: ScalarStencil) -> ScalarStencil {
    st.with_units(Units::inverse(axis))
}

/// `[u]_{i±1} / (2 dx) + [v]_{j±1} / (2 dy)`
pub fn central_div() -> VecStencilRow {
    VecStencilRow::new(
        per(Axis::X, diff_pm1(Axis::X).scale(0.5)),
        per(Axis::Y, diff_pm1(Axis::Y).scale(0.5)),
    )
}

/// `{{[u]_{i±1}}}_{j±1/2} / (8 dx) + {{[v]_{j±1}}}_{i±1/2} / (8 dy)`
pub fn averaged_div() -> VecStencilRow {
    VecStencilRow::new(
        per(Axis::X, double_sum(Axis::Y).compose(&diff_pm1(Axis::X)).scale(0.125)),
        per(Axis::Y, double_sum(Axis::X).compose(&diff_pm1(Axis::Y)).scale(0.125)),
    )
}

/// Divergence annihilated by the dimensionally split schemes with `a1 = 0`:
/// `([u]_{i±1} - (a3/c²) [[u]]_{i±1/2}) / (2 dx)` plus the y counterpart.
pub fn dimsplit_div(a3: f64, c: f64) -> VecStencilRow {
    let k = a3 / (c * c);
    let comp = |axis| {
        let st = diff_pm1(axis).try_add(&second_diff(axis).scale(-k)).expect("unitless");
        per(axis, st.scale(0.5))
    };
    VecStencilRow::new(comp(Axis::X), comp(Axis::Y))
}

/// Two-parameter family of second-difference rows that vanish wherever
/// [`averaged_div`] does.
pub fn consistent_diffusion(c1: f64, c2: f64) -> VecStencilRow {
    let cross = diff_pm1(Axis::X).compose(&diff_pm1(Axis::Y));
    let uu = second_diff(Axis::X).compose(&double_sum(Axis::Y));
    let vv = double_sum(Axis::X).compose(&second_diff(Axis::Y));
    let bu = uu.scale(0.25 * c1).try_add(&cross.scale(0.25 * c2)).expect("unitless");
    let bv = cross.scale(0.25 * c1).try_add(&vv.scale(0.25 * c2)).expect("unitless");
    VecStencilRow::new(per(Axis::X, bu), per(Axis::Y, bv))
}

pub fn central_curl() -> VecStencilRow {
    central_div().rotate()
}

pub fn averaged_curl() -> VecStencilRow {
    averaged_div().rotate()
}

/// `[v]_{i±1}/(2dx) - [u]_{j±1}/(2dy) + (a3/c²)([[u]]_{j±1/2}/(2dy) - [[v]]_{i±1/2}/(2dx))`
pub fn dimsplit_vorticity(a3: f64, c: f64) -> VecStencilRow {
    dimsplit_div(a3, c).rotate()
}
