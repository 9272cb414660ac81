//! Exact stationarity-consistency certification.
//!
//! A row operator `B` vanishes on every `(u, v)` annihilated by a divergence
//! row `A` iff the cross product `B_u A_v - B_v A_u` is the zero Laurent
//! polynomial. Searching for such `B` over a fixed stencil radius is a
//! finite linear system in the stencil coefficients, solved exactly here.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::linalg::{nullspace, rank};
use super::poly::{ratio, LaurentPoly, LaurentRow, Rational};
use super::taylor::moment;
use crate::error::{Error, Result};
use crate::grid::Axis;
use crate::stencil::operators::{averaged_div, consistent_diffusion};
use crate::stencil::Units;

/// `B_u A_v - B_v A_u`.
pub fn cross_product(b: &LaurentRow, a: &LaurentRow) -> Result<LaurentPoly> {
    (&b.u * &a.v).try_sub(&(&b.v * &a.u))
}

/// True iff `B` vanishes identically wherever `A` does.
pub fn cross_consistency(b: &LaurentRow, a: &LaurentRow) -> bool {
    match cross_product(b, a) {
        Ok(p) => p.is_zero(),
        // different formal spacing powers can only cancel if both vanish
        Err(_) => (&b.u * &a.v).is_zero() && (&b.v * &a.u).is_zero(),
    }
}

/// Constraints on the rows `B` searched by [`consistency_nullspace`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchConstraints {
    /// Taylor moments of derivative order `0..=vanish_through` must vanish.
    pub vanish_through: u32,
    /// `B(S) = B(-S)` for both components: no odd-derivative content.
    pub point_symmetric: bool,
    /// `B_u(sx, sy) = B_v(sy, sx)`: invariance under exchanging the axes.
    pub axis_swap: bool,
}

impl Default for SearchConstraints {
    fn default() -> Self {
        Self { vanish_through: 1, point_symmetric: true, axis_swap: false }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NullspaceReport {
    pub radius: i32,
    /// Dimension under all requested constraints.
    pub dim: usize,
    pub basis: Vec<LaurentRow>,
    /// Dimension with only the cross product and vanishing moments imposed.
    pub raw_dim: usize,
    /// Rank of the first non-vanishing moment order over the basis; equal
    /// to `dim` when every nonzero member carries that leading term.
    pub leading_rank: usize,
}

struct Layout {
    radius: i32,
    side: usize,
}

impl Layout {
    fn new(radius: i32) -> Self {
        Self { radius, side: (2 * radius + 1) as usize }
    }

    fn per_comp(&self) -> usize {
        self.side * self.side
    }

    fn len(&self) -> usize {
        2 * self.per_comp()
    }

    fn offsets(&self) -> impl Iterator<Item = (i32, i32)> + '_ {
        let r = self.radius;
        (-r..=r).flat_map(move |sx| (-r..=r).map(move |sy| (sx, sy)))
    }

    fn index(&self, comp: usize, s: (i32, i32)) -> usize {
        let ix = (s.0 + self.radius) as usize;
        let iy = (s.1 + self.radius) as usize;
        comp * self.per_comp() + ix * self.side + iy
    }

    fn row(&self, x: &[Rational], units: (Units, Units)) -> LaurentRow {
        let comp = |c: usize, u: Units| {
            LaurentPoly::from_terms(self.offsets().map(|s| (s, x[self.index(c, s)].clone())), u)
        };
        LaurentRow::new(comp(0, units.0), comp(1, units.1))
    }
}

fn int_pow(x: i32, e: u32) -> Rational {
    Rational::from_integer(BigInt::from(x).pow(e))
}

fn moment_rows(layout: &Layout, orders: core::ops::RangeInclusive<u32>) -> Vec<Vec<Rational>> {
    let mut rows = Vec::new();
    for comp in 0..2 {
        for total in orders.clone() {
            for m in 0..=total {
                let n = total - m;
                let mut row = vec![Rational::zero(); layout.len()];
                for s in layout.offsets() {
                    row[layout.index(comp, s)] = int_pow(s.0, m) * int_pow(s.1, n);
                }
                rows.push(row);
            }
        }
    }
    rows
}

fn cross_rows(layout: &Layout, a: &LaurentRow) -> Vec<Vec<Rational>> {
    let mut eqs: BTreeMap<(i32, i32), Vec<Rational>> = BTreeMap::new();
    let mut put = |e: (i32, i32), k: usize, c: Rational| {
        eqs.entry(e).or_insert_with(|| vec![Rational::zero(); layout.len()])[k] += c;
    };
    for s in layout.offsets() {
        for ((x, y), c) in a.v.terms() {
            put((s.0 + x, s.1 + y), layout.index(0, s), c.clone());
        }
        for ((x, y), c) in a.u.terms() {
            put((s.0 + x, s.1 + y), layout.index(1, s), -c.clone());
        }
    }
    eqs.into_values().collect()
}

fn pair_rows(layout: &Layout, pairs: impl Iterator<Item = (usize, usize)>) -> Vec<Vec<Rational>> {
    pairs
        .filter(|(i, j)| i != j)
        .map(|(i, j)| {
            let mut row = vec![Rational::zero(); layout.len()];
            row[i] = Rational::one();
            row[j] = -Rational::one();
            row
        })
        .collect()
}

/// Exact basis of the rows `B` of the given radius that vanish wherever `a`
/// does and satisfy `constraints`.
pub fn consistency_nullspace(a: &LaurentRow, radius: i32, constraints: SearchConstraints) -> Result<NullspaceReport> {
    if !(1..=2).contains(&radius) {
        return Err(Error::Infeasible(format!("radius {radius} outside 1..=2")));
    }
    if constraints.vanish_through + 1 > 2 * radius as u32 {
        return Err(Error::Infeasible(format!(
            "radius {radius} cannot carry derivatives of order {}",
            constraints.vanish_through + 1
        )));
    }
    let layout = Layout::new(radius);
    let mut eqs = cross_rows(&layout, a);
    eqs.extend(moment_rows(&layout, 0..=constraints.vanish_through));
    let raw_dim = nullspace(&eqs, layout.len()).len();

    if constraints.point_symmetric {
        let pairs = (0..2).flat_map(|c| {
            layout.offsets().map(move |s| (c, s)).filter(|(_, s)| *s > (-s.0, -s.1))
        });
        let idx: Vec<_> = pairs.map(|(c, s)| (layout.index(c, s), layout.index(c, (-s.0, -s.1)))).collect();
        eqs.extend(pair_rows(&layout, idx.into_iter()));
    }
    if constraints.axis_swap {
        let idx: Vec<_> = layout.offsets().map(|s| (layout.index(0, s), layout.index(1, (s.1, s.0)))).collect();
        eqs.extend(pair_rows(&layout, idx.into_iter()));
    }
    let vectors = nullspace(&eqs, layout.len());

    let lead = constraints.vanish_through + 1;
    let lead_rows: Vec<Vec<Rational>> = vectors
        .iter()
        .map(|x| {
            moment_rows(&layout, lead..=lead)
                .iter()
                .map(|r| r.iter().zip(x).map(|(p, q)| p * q).sum())
                .collect()
        })
        .collect();
    let ncols = lead_rows.first().map_or(0, |r| r.len());
    let leading_rank = rank(&lead_rows, ncols);

    let units = (a.u.units(), a.v.units());
    Ok(NullspaceReport {
        radius,
        dim: vectors.len(),
        basis: vectors.iter().map(|x| layout.row(x, units)).collect(),
        raw_dim,
        leading_rank,
    })
}

fn flatten(rows: &[LaurentRow]) -> (Vec<Vec<Rational>>, usize) {
    let mut keys = BTreeMap::new();
    for r in rows {
        for (c, p) in [(0u8, &r.u), (1u8, &r.v)] {
            for (e, _) in p.terms() {
                let n = keys.len();
                keys.entry((c, e)).or_insert(n);
            }
        }
    }
    let out = rows
        .iter()
        .map(|r| {
            let mut v = vec![Rational::zero(); keys.len()];
            for (c, p) in [(0u8, &r.u), (1u8, &r.v)] {
                for (e, x) in p.terms() {
                    v[keys[&(c, e)]] = x.clone();
                }
            }
            v
        })
        .collect();
    (out, keys.len())
}

/// True iff the two families span the same rational vector space.
pub fn same_span(a: &[LaurentRow], b: &[LaurentRow]) -> bool {
    let all: Vec<LaurentRow> = a.iter().chain(b).cloned().collect();
    let (m, n) = flatten(&all);
    let ra = rank(&m[..a.len()], n);
    let rb = rank(&m[a.len()..], n);
    ra == rb && rank(&m, n) == ra
}

/// Radius-1 row with `B_u(±1, 0) = ±alpha`, `B_u(±1, ±1) = ±beta` over `dx`,
/// `alpha = 1/2 - 2 beta` for first-order consistency, and `B_v` its mirror.
/// `beta = 0` is the central divergence, `beta = 1/8` the averaged one.
pub fn symmetric_moore_divergence(beta: &Rational) -> LaurentRow {
    let alpha = ratio(1, 2) - beta * ratio(2, 1);
    let mut terms = Vec::new();
    for sx in [-1i32, 1] {
        let sgn = ratio(sx as i64, 1);
        terms.push(((sx, 0), &sgn * &alpha));
        terms.push(((sx, 1), &sgn * beta));
        terms.push(((sx, -1), &sgn * beta));
    }
    let bu = LaurentPoly::from_terms(terms.clone(), Units::new(-1, 0));
    let bv = LaurentPoly::from_terms(terms.into_iter().map(|((a, b), c)| ((b, a), c)), Units::new(0, -1));
    LaurentRow::new(bu, bv)
}

fn remap(p: &LaurentPoly, f: impl Fn((i32, i32)) -> (i32, i32), sign: &Rational, units: Units) -> LaurentPoly {
    LaurentPoly::from_terms(p.terms().map(|(e, c)| (f(e), c * sign)), units)
}

/// Directional symmetry of a divergence row: `B_u` odd under `x -> -x` and
/// even under `y -> -y`, `B_v` the image of `B_u` under the axis swap, and
/// first-order consistency with `du/dx + dv/dy`.
pub fn is_symmetric_divergence(row: &LaurentRow) -> bool {
    let one = Rational::one();
    let neg = -Rational::one();
    let bu = &row.u;
    let odd_x = remap(bu, |(a, b)| (-a, b), &neg, bu.units()) == *bu;
    let even_y = remap(bu, |(a, b)| (a, -b), &one, bu.units()) == *bu;
    let swapped = remap(bu, |(a, b)| (b, a), &one, Units::new(bu.units().dy, bu.units().dx));
    let mirror = swapped == row.v;
    let consistent = bu.units() == Units::new(-1, 0)
        && moment(bu, 0, 0).is_zero()
        && moment(bu, 1, 0) == one
        && moment(bu, 0, 1).is_zero();
    odd_x && even_y && mirror && consistent
}

#[derive(Debug, Clone, PartialEq)]
pub struct MooreMember {
    pub beta: Rational,
    pub nullspace_dim: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MooreScan {
    pub members: Vec<MooreMember>,
    /// Members with a nonzero consistent diffusion.
    pub positive: Vec<Rational>,
    /// True iff `positive` is nonempty and every entry is the averaged divergence.
    pub only_averaged_ray: bool,
}

/// Scans `beta = k / denominator`, `|k| <= half_range`, of the symmetric
/// Moore family and records the consistent-diffusion dimension of each.
pub fn moore_symmetry_scan(denominator: i64, half_range: i64) -> Result<MooreScan> {
    let averaged = LaurentRow::from_row(&averaged_div())?;
    let mut members = Vec::new();
    let mut positive = Vec::new();
    let mut only_averaged = true;
    for k in -half_range..=half_range {
        let beta = ratio(k, denominator);
        let row = symmetric_moore_divergence(&beta);
        debug_assert!(is_symmetric_divergence(&row));
        let dim = consistency_nullspace(&row, 1, SearchConstraints::default())?.dim;
        if dim > 0 {
            positive.push(beta.clone());
            only_averaged &= row == averaged;
        }
        members.push(MooreMember { beta, nullspace_dim: dim });
    }
    Ok(MooreScan { only_averaged_ray: only_averaged && !positive.is_empty(), members, positive })
}

#[derive(Debug, Clone, PartialEq)]
pub struct IdentityCheck {
    pub name: String,
    pub holds: bool,
    pub residual: LaurentRow,
}

/// `(t + 1) * cd - 2 (t - 1) * div` along `axis`, where `cd` is the
/// consistent diffusion aligned with that axis.
pub fn identity_residual(div: &LaurentRow, axis: Axis) -> Result<LaurentRow> {
    let (cd, e) = match axis {
        Axis::X => (consistent_diffusion(1.0, 0.0), (1, 0)),
        Axis::Y => (consistent_diffusion(0.0, 1.0), (0, 1)),
    };
    let cd = LaurentRow::from_row(&cd)?;
    let one = LaurentPoly::one();
    let t = LaurentPoly::monomial(e.0, e.1, Rational::one());
    let plus = t.try_add(&one)?;
    let minus = t.try_sub(&one)?.scale(&ratio(2, 1));
    cd.mul_poly(&plus).try_sub(&div.mul_poly(&minus))
}

/// Both axis identities between the consistent diffusion and `div`.
pub fn operator_identity_check_with(div: &LaurentRow) -> Result<Vec<IdentityCheck>> {
    let mut out = Vec::new();
    for (axis, name) in [
        (Axis::X, "(tx+1) cd(1,0) = 2 (tx-1) div"),
        (Axis::Y, "(ty+1) cd(0,1) = 2 (ty-1) div"),
    ] {
        let residual = identity_residual(div, axis)?;
        out.push(IdentityCheck { name: String::from(name), holds: residual.is_zero(), residual });
    }
    Ok(out)
}

/// The identities for the averaged divergence.
pub fn operator_identity_check() -> Result<Vec<IdentityCheck>> {
    operator_identity_check_with(&LaurentRow::from_row(&averaged_div())?)
}
