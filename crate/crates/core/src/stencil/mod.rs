//! Linear finite-difference stencils on the periodic grid.
//!
//! A [`ScalarStencil`] stores dimensionless coefficients plus a [`Units`]
//! tag giving the power of `dx` and `dy` it carries, so `[q]_{i±1} / (2 dx)`
//! is stored as `{(1,0): 1/2, (-1,0): -1/2}` with `dx^-1`. Keeping the
//! spacing symbolic lets the exact algebra treat `dx` and `dy` as formal
//! variables. A [`MatrixStencil`] is fully numeric: its 3×3 blocks already
//! absorb the spacings and physical parameters.

pub mod brackets;
pub mod operators;

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Neg};

use nalgebra::{Complex, Matrix3};

use crate::error::{Error, Result};
use crate::grid::{Axis, FieldSet, GridSpec};

/// Integer cell offset `S = (sx, sy)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Offset {
    pub sx: i32,
    pub sy: i32,
}

impl Offset {
    pub const ZERO: Offset = Offset { sx: 0, sy: 0 };

    pub const fn new(sx: i32, sy: i32) -> Self {
        Self { sx, sy }
    }

    pub fn along(axis: Axis, s: i32) -> Self {
        match axis {
            Axis::X => Self::new(s, 0),
            Axis::Y => Self::new(0, s),
        }
    }

    pub fn radius(self) -> i32 {
        self.sx.abs().max(self.sy.abs())
    }
}

impl Add for Offset {
    type Output = Offset;
    fn add(self, o: Offset) -> Offset {
        Offset::new(self.sx + o.sx, self.sy + o.sy)
    }
}

impl Neg for Offset {
    type Output = Offset;
    fn neg(self) -> Offset {
        Offset::new(-self.sx, -self.sy)
    }
}

/// Exponents of `dx` and `dy` carried by an operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Units {
    pub dx: i32,
    pub dy: i32,
}

impl Units {
    pub const NONE: Units = Units { dx: 0, dy: 0 };

    pub const fn new(dx: i32, dy: i32) -> Self {
        Self { dx, dy }
    }

    /// `1 / delta` along `axis`.
    pub fn inverse(axis: Axis) -> Self {
        match axis {
            Axis::X => Self::new(-1, 0),
            Axis::Y => Self::new(0, -1),
        }
    }

    pub fn factor(self, dx: f64, dy: f64) -> f64 {
        dx.powi(self.dx) * dy.powi(self.dy)
    }
}

impl Add for Units {
    type Output = Units;
    fn add(self, o: Units) -> Units {
        Units::new(self.dx + o.dx, self.dy + o.dy)
    }
}

impl Neg for Units {
    type Output = Units;
    fn neg(self) -> Units {
        Units::new(-self.dx, -self.dy)
    }
}

/// Scalar stencil `q -> sum_S c_S q_{I+S}`, times `dx^a dy^b`.
#[derive(Debug, Clone, Default)]
pub struct ScalarStencil {
    coeffs: BTreeMap<Offset, f64>,
    units: Units,
}

impl PartialEq for ScalarStencil {
    fn eq(&self, other: &Self) -> bool {
        self.coeffs == other.coeffs && (self.coeffs.is_empty() || self.units == other.units)
    }
}

impl ScalarStencil {
    pub fn zero(units: Units) -> Self {
        Self { coeffs: BTreeMap::new(), units }
    }

    pub fn identity() -> Self {
        Self::from_entries([(Offset::ZERO, 1.0)], Units::NONE)
    }

    /// Builds a stencil, summing repeated offsets and dropping zeros.
    pub fn from_entries<I>(entries: I, units: Units) -> Self
    where
        I: IntoIterator<Item = (Offset, f64)>,
    {
        let mut st = Self::zero(units);
        for (o, c) in entries {
            *st.coeffs.entry(o).or_insert(0.0) += c;
        }
        st.prune();
        st
    }

    fn prune(&mut self) {
        self.coeffs.retain(|_, c| *c != 0.0);
    }

    pub fn units(&self) -> Units {
        self.units
    }

    pub fn with_units(mut self, units: Units) -> Self {
        self.units = units;
        self
    }

    pub fn coeff(&self, o: Offset) -> f64 {
        self.coeffs.get(&o).copied().unwrap_or(0.0)
    }

    pub fn entries(&self) -> impl Iterator<Item = (Offset, f64)> + '_ {
        self.coeffs.iter().map(|(o, c)| (*o, *c))
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn radius(&self) -> i32 {
        self.coeffs.keys().map(|o| o.radius()).max().unwrap_or(0)
    }

    /// Convolution of coefficient maps: applying `other` then `self`.
    pub fn compose(&self, other: &ScalarStencil) -> ScalarStencil {
        let mut out = BTreeMap::new();
        for (a, ca) in &self.coeffs {
            for (b, cb) in &other.coeffs {
                *out.entry(*a + *b).or_insert(0.0) += ca * cb;
            }
        }
        let mut st = ScalarStencil { coeffs: out, units: self.units + other.units };
        st.prune();
        st
    }

    pub fn try_add(&self, other: &ScalarStencil) -> Result<ScalarStencil> {
        if self.is_empty() {
            return Ok(other.clone());
        }
        if other.is_empty() {
            return Ok(self.clone());
        }
        if self.units != other.units {
            return Err(Error::UnitMismatch);
        }
        let mut st = self.clone();
        for (o, c) in &other.coeffs {
            *st.coeffs.entry(*o).or_insert(0.0) += c;
        }
        st.prune();
        Ok(st)
    }

    pub fn scale(&self, s: f64) -> ScalarStencil {
        let mut st = ScalarStencil {
            coeffs: self.coeffs.iter().map(|(o, c)| (*o, c * s)).collect(),
            units: self.units,
        };
        st.prune();
        st
    }

    /// Maps each offset through `f` (reflections, axis swaps).
    pub fn remap<F: Fn(Offset) -> Offset>(&self, f: F, units: Units) -> ScalarStencil {
        ScalarStencil::from_entries(self.entries().map(|(o, c)| (f(o), c)), units)
    }

    /// Reflection `x -> -x`.
    pub fn reflect_x(&self) -> ScalarStencil {
        self.remap(|o| Offset::new(-o.sx, o.sy), self.units)
    }

    /// Reflection `y -> -y`.
    pub fn reflect_y(&self) -> ScalarStencil {
        self.remap(|o| Offset::new(o.sx, -o.sy), self.units)
    }

    /// Exchange of the two axes, units included.
    pub fn swap_xy(&self) -> ScalarStencil {
        self.remap(|o| Offset::new(o.sy, o.sx), Units::new(self.units.dy, self.units.dx))
    }

    fn check_fits(&self, grid: &GridSpec) -> Result<()> {
        let r = self.radius();
        if grid.nx < (2 * r + 1) as usize || grid.ny < (2 * r + 1) as usize {
            return Err(Error::GridTooSmall { nx: grid.nx, ny: grid.ny, radius: r });
        }
        Ok(())
    }

    /// `out_I = dx^a dy^b sum_S c_S q_{I+S}` with periodic indexing.
    pub fn apply(&self, q: &[f64], grid: &GridSpec) -> Result<Vec<f64>> {
        grid.check_len(q.len())?;
        self.check_fits(grid)?;
        let f = self.units.factor(grid.dx, grid.dy);
        let mut out = vec![0.0; grid.len()];
        for (o, c) in &self.coeffs {
            let w = c * f;
            accumulate(grid, *o, w, q, &mut out);
        }
        Ok(out)
    }

    /// `sum_S c_S t_x^sx t_y^sy` at `t = exp(i theta)`, times the unit factor.
    pub fn symbol(&self, thx: f64, thy: f64, dx: f64, dy: f64) -> Complex<f64> {
        let f = self.units.factor(dx, dy);
        self.coeffs
            .iter()
            .map(|(o, c)| {
                let ph = o.sx as f64 * thx + o.sy as f64 * thy;
                Complex::new(c * f * ph.cos(), c * f * ph.sin())
            })
            .fold(Complex::new(0.0, 0.0), |a, b| a + b)
    }
}

/// `out[I] += w * q[I + o]` over the periodic grid.
fn accumulate(grid: &GridSpec, o: Offset, w: f64, q: &[f64], out: &mut [f64]) {
    let (nx, ny) = (grid.nx as i64, grid.ny as i64);
    let sy = (o.sy as i64).rem_euclid(ny) as usize;
    for i in 0..grid.nx {
        let ii = (i as i64 + o.sx as i64).rem_euclid(nx) as usize;
        let src = &q[ii * grid.ny..(ii + 1) * grid.ny];
        let dst = &mut out[i * grid.ny..(i + 1) * grid.ny];
        // j + sy wraps once: split into two contiguous runs
        let split = grid.ny - sy;
        for (d, s) in dst[..split].iter_mut().zip(&src[sy..]) {
            *d += w * s;
        }
        for (d, s) in dst[split..].iter_mut().zip(&src[..sy]) {
            *d += w * s;
        }
    }
}

/// A row operator `(u, v) -> B_u u + B_v v`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct VecStencilRow {
    pub u: ScalarStencil,
    pub v: ScalarStencil,
}

impl VecStencilRow {
    pub fn new(u: ScalarStencil, v: ScalarStencil) -> Self {
        Self { u, v }
    }

    pub fn radius(&self) -> i32 {
        self.u.radius().max(self.v.radius())
    }

    pub fn is_zero(&self) -> bool {
        self.u.is_empty() && self.v.is_empty()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::new(self.u.scale(s), self.v.scale(s))
    }

    pub fn try_add(&self, other: &VecStencilRow) -> Result<Self> {
        Ok(Self::new(self.u.try_add(&other.u)?, self.v.try_add(&other.v)?))
    }

    /// The substitution `(u, v) -> (v, -u)`: turns a divergence into a curl.
    pub fn rotate(&self) -> Self {
        Self::new(self.v.scale(-1.0), self.u.clone())
    }

    pub fn apply(&self, u: &[f64], v: &[f64], grid: &GridSpec) -> Result<Vec<f64>> {
        let mut out = self.u.apply(u, grid)?;
        for (o, x) in out.iter_mut().zip(self.v.apply(v, grid)?) {
            *o += x;
        }
        Ok(out)
    }

    pub fn symbol(&self, thx: f64, thy: f64, dx: f64, dy: f64) -> [Complex<f64>; 2] {
        [self.u.symbol(thx, thy, dx, dy), self.v.symbol(thx, thy, dx, dy)]
    }
}

/// Semi-discrete scheme `d/dt q_I + sum_S alpha_S q_{I+S} = 0`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MatrixStencil {
    blocks: BTreeMap<Offset, [[f64; 3]; 3]>,
}

impl MatrixStencil {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_blocks<I>(blocks: I) -> Self
    where
        I: IntoIterator<Item = (Offset, [[f64; 3]; 3])>,
    {
        let mut m = Self::new();
        for (o, b) in blocks {
            m.add_block(o, &b);
        }
        m
    }

    pub fn add_block(&mut self, o: Offset, b: &[[f64; 3]; 3]) {
        let e = self.blocks.entry(o).or_insert([[0.0; 3]; 3]);
        for r in 0..3 {
            for c in 0..3 {
                e[r][c] += b[r][c];
            }
        }
        self.prune();
    }

    /// Adds `factor * st` (with `st`'s unit factor evaluated at `dx`, `dy`)
    /// into matrix entry `(row, col)`.
    pub fn add_entry(&mut self, row: usize, col: usize, st: &ScalarStencil, factor: f64, dx: f64, dy: f64) {
        let f = factor * st.units().factor(dx, dy);
        for (o, c) in st.entries() {
            self.blocks.entry(o).or_insert([[0.0; 3]; 3])[row][col] += c * f;
        }
        self.prune();
    }

    fn prune(&mut self) {
        self.blocks.retain(|_, b| b.iter().flatten().any(|x| *x != 0.0));
    }

    pub fn blocks(&self) -> impl Iterator<Item = (Offset, &[[f64; 3]; 3])> + '_ {
        self.blocks.iter().map(|(o, b)| (*o, b))
    }

    pub fn block(&self, o: Offset) -> [[f64; 3]; 3] {
        self.blocks.get(&o).copied().unwrap_or([[0.0; 3]; 3])
    }

    pub fn radius(&self) -> i32 {
        self.blocks.keys().map(|o| o.radius()).max().unwrap_or(0)
    }

    /// Entry `(row, col)` as a unitless scalar stencil.
    pub fn entry(&self, row: usize, col: usize) -> ScalarStencil {
        ScalarStencil::from_entries(self.blocks.iter().map(|(o, b)| (*o, b[row][col])), Units::NONE)
    }

    /// `sum_S alpha_S`, zero for a consistent scheme.
    pub fn block_sum(&self) -> [[f64; 3]; 3] {
        let mut s = [[0.0; 3]; 3];
        for b in self.blocks.values() {
            for r in 0..3 {
                for c in 0..3 {
                    s[r][c] += b[r][c];
                }
            }
        }
        s
    }

    /// Largest absolute-sum over all coefficients.
    pub fn l1_norm(&self) -> f64 {
        self.blocks.values().flatten().flatten().map(|x| x.abs()).sum()
    }

    /// Evolution matrix `-i sum_S alpha_S t_x^sx t_y^sy` at phases `(thx, thy)`.
    pub fn evolution(&self, thx: f64, thy: f64) -> Matrix3<Complex<f64>> {
        let mut e = Matrix3::from_element(Complex::new(0.0, 0.0));
        for (o, b) in &self.blocks {
            let ph = o.sx as f64 * thx + o.sy as f64 * thy;
            // -i * exp(i ph) = sin(ph) - i cos(ph)
            let w = Complex::new(ph.sin(), -ph.cos());
            for r in 0..3 {
                for c in 0..3 {
                    e[(r, c)] += w * b[r][c];
                }
            }
        }
        e
    }

    /// `sum_S alpha_S q_{I+S}` (the negated tendency).
    pub fn apply(&self, state: &FieldSet) -> Result<FieldSet> {
        let grid = state.grid;
        let r = self.radius();
        if grid.nx < (2 * r + 1) as usize || grid.ny < (2 * r + 1) as usize {
            return Err(Error::GridTooSmall { nx: grid.nx, ny: grid.ny, radius: r });
        }
        let mut out = FieldSet::zeros(grid);
        let inputs = state.components();
        for (o, b) in &self.blocks {
            for (row, dst) in [&mut out.u, &mut out.v, &mut out.p].into_iter().enumerate() {
                for (col, src) in inputs.iter().enumerate() {
                    let w = b[row][col];
                    if w != 0.0 {
                        accumulate(&grid, *o, w, src, dst);
                    }
                }
            }
        }
        Ok(out)
    }
}
