//! Periodic Cartesian grid and the `(u, v, p)` state.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;


use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Axis {
    X,
    Y,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Component {
    U,
    V,
    P,
}

impl Component {
    pub const ALL: [Component; 3] = [Component::U, Component::V, Component::P];

    pub fn index(self) -> usize {
        match self {
            Component::U => 0,
            Component::V => 1,
            Component::P => 2,
        }
    }
}

/// Cell counts and widths of a doubly periodic grid.
///
/// Cells are stored row-major in `i` (the x index): cell `(i, j)` lives at
/// `i * ny + j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub nx: usize,
    pub ny: usize,
    pub dx: f64,
    pub dy: f64,
}

impl GridSpec {
    pub fn new(nx: usize, ny: usize, dx: f64, dy: f64) -> Result<Self> {
        if nx < 3 || ny < 3 {
            return Err(Error::InvalidGrid(format!(
                "need at least 3 cells per axis, got {nx}x{ny}"
            )));
        }
        if !(dx.is_finite() && dx > 0.0 && dy.is_finite() && dy > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "cell widths must be positive, got dx={dx}, dy={dy}"
            )));
        }
        Ok(Self { nx, ny, dx, dy })
    }

    /// `nx` by `ny` cells covering the unit square.
    pub fn unit_square(nx: usize, ny: usize) -> Result<Self> {
        Self::new(nx, ny, 1.0 / nx as f64, 1.0 / ny as f64)
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.ny + j
    }

    pub fn center(&self, i: usize, j: usize) -> (f64, f64) {
        ((i as f64 + 0.5) * self.dx, (j as f64 + 0.5) * self.dy)
    }

    pub fn width(&self) -> f64 {
        self.nx as f64 * self.dx
    }

    pub fn height(&self) -> f64 {
        self.ny as f64 * self.dy
    }

    /// Index of cell `(i + si, j + sj)` with periodic wraparound.
    #[inline]
    pub fn wrap(&self, i: usize, j: usize, si: i32, sj: i32) -> usize {
        let ii = (i as i64 + si as i64).rem_euclid(self.nx as i64) as usize;
        let jj = (j as i64 + sj as i64).rem_euclid(self.ny as i64) as usize;
        self.index(ii, jj)
    }

    pub fn check_len(&self, got: usize) -> Result<()> {
        if got != self.len() {
            return Err(Error::ShapeMismatch { expected: self.len(), got });
        }
        Ok(())
    }
}

/// Sound speed `c` and Mach scaling `eps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AcousticParams {
    pub c: f64,
    pub eps: f64,
}

impl AcousticParams {
    pub fn new(c: f64, eps: f64) -> Result<Self> {
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::InvalidParams(format!("c must be positive, got {c}")));
        }
        if !(eps.is_finite() && eps > 0.0) {
            return Err(Error::InvalidParams(format!("eps must be positive, got {eps}")));
        }
        Ok(Self { c, eps })
    }

    /// Fastest signal speed `c / eps`.
    pub fn speed(&self) -> f64 {
        self.c / self.eps
    }
}

impl Default for AcousticParams {
    fn default() -> Self {
        Self { c: 1.0, eps: 1.0 }
    }
}

/// Cell-centred velocity and pressure.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSet {
    pub grid: GridSpec,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub p: Vec<f64>,
}

impl FieldSet {
    pub fn zeros(grid: GridSpec) -> Self {
        let n = grid.len();
        Self { grid, u: vec![0.0; n], v: vec![0.0; n], p: vec![0.0; n] }
    }

    pub fn from_components(grid: GridSpec, u: Vec<f64>, v: Vec<f64>, p: Vec<f64>) -> Result<Self> {
        grid.check_len(u.len())?;
        grid.check_len(v.len())?;
        grid.check_len(p.len())?;
        let fs = Self { grid, u, v, p };
        fs.check_finite()?;
        Ok(fs)
    }

    pub fn component(&self, c: Component) -> &[f64] {
        match c {
            Component::U => &self.u,
            Component::V => &self.v,
            Component::P => &self.p,
        }
    }

    pub fn component_mut(&mut self, c: Component) -> &mut [f64] {
        match c {
            Component::U => &mut self.u,
            Component::V => &mut self.v,
            Component::P => &mut self.p,
        }
    }

    pub fn components(&self) -> [&[f64]; 3] {
        [&self.u, &self.v, &self.p]
    }

    pub fn check_finite(&self) -> Result<()> {
        for comp in self.components() {
            if let Some(k) = comp.iter().position(|x| !x.is_finite()) {
                return Err(Error::NonFinite {
                    i: k / self.grid.ny,
                    j: k % self.grid.ny,
                    value: comp[k],
                });
            }
        }
        Ok(())
    }

    /// Largest absolute entry over all three components.
    pub fn max_abs(&self) -> f64 {
        self.components()
            .iter()
            .flat_map(|c| c.iter())
            .fold(0.0, |m, x| m.max(x.abs()))
    }

    /// `self += s * other`.
    pub fn axpy(&mut self, s: f64, other: &FieldSet) {
        for (a, b) in [
            (&mut self.u, &other.u),
            (&mut self.v, &other.v),
            (&mut self.p, &other.p),
        ] {
            for (x, y) in a.iter_mut().zip(b) {
                *x += s * y;
            }
        }
    }

    pub fn scaled(&self, s: f64) -> FieldSet {
        let f = |c: &Vec<f64>| c.iter().map(|x| s * x).collect();
        FieldSet { grid: self.grid, u: f(&self.u), v: f(&self.v), p: f(&self.p) }
    }

    /// Max-norm distance to another state on the same grid.
    pub fn max_abs_diff(&self, other: &FieldSet) -> f64 {
        let mut m = 0.0f64;
        for (a, b) in self.components().iter().zip(other.components()) {
            for (x, y) in a.iter().zip(b) {
                m = m.max((x - y).abs());
            }
        }
        m
    }

    /// Periodic translation: the result at `(i, j)` is `self` at `(i - si, j - sj)`.
    pub fn shifted(&self, si: i32, sj: i32) -> FieldSet {
        FieldSet {
            grid: self.grid,
            u: shift(&self.grid, &self.u, si, sj),
            v: shift(&self.grid, &self.v, si, sj),
            p: shift(&self.grid, &self.p, si, sj),
        }
    }
}

/// Periodic translation of one component; see [`FieldSet::shifted`].
pub fn shift(grid: &GridSpec, q: &[f64], si: i32, sj: i32) -> Vec<f64> {
    let mut out = vec![0.0; grid.len()];
    for i in 0..grid.nx {
        for j in 0..grid.ny {
            out[grid.index(i, j)] = q[grid.wrap(i, j, -si, -sj)];
        }
    }
    out
}

/// Samples `init(x, y) -> (u, v, p)` at the cell centres.
pub fn make_field<F>(grid: GridSpec, mut init: F) -> Result<FieldSet>
where
    F: FnMut(f64, f64) -> (f64, f64, f64),
{
    let mut fs = FieldSet::zeros(grid);
    for i in 0..grid.nx {
        for j in 0..grid.ny {
            let (x, y) = grid.center(i, j);
            let (u, v, p) = init(x, y);
            for value in [u, v, p] {
                if !value.is_finite() {
                    return Err(Error::NonFinite { i, j, value });
                }
            }
            let k = grid.index(i, j);
            fs.u[k] = u;
            fs.v[k] = v;
            fs.p[k] = p;
        }
    }
    Ok(fs)
}

/// `sum |q_{+1} - q_{-1}| / (2 delta) * dx * dy` along `axis`, periodic.
pub fn l1_norm_central_diff(q: &[f64], axis: Axis, grid: &GridSpec) -> Result<f64> {
    grid.check_len(q.len())?;
    let (si, sj, h) = match axis {
        Axis::X => (1, 0, grid.dx),
        Axis::Y => (0, 1, grid.dy),
    };
    let mut sum = 0.0;
    for i in 0..grid.nx {
        for j in 0..grid.ny {
            let d = q[grid.wrap(i, j, si, sj)] - q[grid.wrap(i, j, -si, -sj)];
            if !d.is_finite() {
                return Err(Error::NonFinite { i, j, value: d });
            }
            sum += d.abs();
        }
    }
    Ok(sum / (2.0 * h) * grid.dx * grid.dy)
}
