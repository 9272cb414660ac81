//! The scheme catalog.
//!
//! Every scheme is a radius-1 [`MatrixStencil`] for
//! `d/dt q_I + sum_S alpha_S q_{I+S} = 0`, `q = (u, v, p)`.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::grid::{AcousticParams, Axis, FieldSet};
use crate::stencil::brackets::{diff_pm1, double_sum, second_diff};
use crate::stencil::operators::{averaged_div, dimsplit_div};
use crate::stencil::{MatrixStencil, ScalarStencil, Units, VecStencilRow};

/// Entries of the diffusion matrices
/// `D_x = [[a1, 0, a2], [0, 0, 0], [a3, 0, a4]]`,
/// `D_y = [[0, 0, 0], [0, a1, a2], [0, a3, a4]]`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DiffusionParams {
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub a4: f64,
}

impl DiffusionParams {
    pub const ZERO: DiffusionParams = DiffusionParams { a1: 0.0, a2: 0.0, a3: 0.0, a4: 0.0 };

    pub fn new(a1: f64, a2: f64, a3: f64, a4: f64) -> Self {
        Self { a1, a2, a3, a4 }
    }

    /// `D_x = |J_x|`, `D_y = |J_y|`.
    pub fn roe(p: &AcousticParams) -> Self {
        let s = p.c / p.eps;
        Self::new(s, 0.0, 0.0, s)
    }

    pub fn lowmach(p: &AcousticParams, variant: u8) -> Result<Self> {
        let (c, e) = (p.c, p.eps);
        match variant {
            1 => Ok(Self::new(0.0, 1.0 / (e * e), -c * c, 0.0)),
            2 => Ok(Self::new(0.0, 0.0, -c * c, 2.0 * c / e)),
            3 => Ok(Self::new(0.0, 1.0 / (e * e), 0.0, 2.0 * c / e)),
            v => Err(Error::InvalidVariant(v)),
        }
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.a1, self.a2, self.a3, self.a4]
    }

    fn check(&self) -> Result<()> {
        if self.as_array().iter().all(|x| x.is_finite()) {
            Ok(())
        } else {
            Err(Error::InvalidParams(String::from("diffusion parameters must be finite")))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    Central,
    Dimsplit,
    Roe,
    LowMach1,
    LowMach2,
    LowMach3,
    Multid,
}

impl Family {
    pub const ALL: [Family; 7] = [
        Family::Central,
        Family::Dimsplit,
        Family::Roe,
        Family::LowMach1,
        Family::LowMach2,
        Family::LowMach3,
        Family::Multid,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Central => "central",
            Family::Dimsplit => "dimsplit",
            Family::Roe => "roe",
            Family::LowMach1 => "lowmach1",
            Family::LowMach2 => "lowmach2",
            Family::LowMach3 => "lowmach3",
            Family::Multid => "multid",
        }
    }

    pub fn from_name(s: &str) -> Option<Family> {
        Family::ALL.into_iter().find(|f| f.name() == s)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Scheme selector; `build` turns it into a concrete stencil.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SchemeKind {
    Central,
    Dimsplit(DiffusionParams),
    Roe,
    LowMach(u8),
    Multid,
}

impl SchemeKind {
    pub fn family(&self) -> Result<Family> {
        Ok(match self {
            SchemeKind::Central => Family::Central,
            SchemeKind::Dimsplit(_) => Family::Dimsplit,
            SchemeKind::Roe => Family::Roe,
            SchemeKind::LowMach(1) => Family::LowMach1,
            SchemeKind::LowMach(2) => Family::LowMach2,
            SchemeKind::LowMach(3) => Family::LowMach3,
            SchemeKind::LowMach(v) => return Err(Error::InvalidVariant(*v)),
            SchemeKind::Multid => Family::Multid,
        })
    }

    pub fn build(&self, params: AcousticParams, dx: f64, dy: f64) -> Result<SchemeSpec> {
        match *self {
            SchemeKind::Central => Ok(central_scheme(params, dx, dy)),
            SchemeKind::Dimsplit(dp) => dimsplit_scheme(params, dp, dx, dy),
            SchemeKind::Roe => Ok(roe_scheme(params, dx, dy)),
            SchemeKind::LowMach(v) => lowmach_scheme(params, v, dx, dy),
            SchemeKind::Multid => Ok(multid_scheme(params, dx, dy)),
        }
    }
}

/// What a scheme is expected to do.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Claims {
    pub stationarity_preserving: bool,
    /// Largest stable forward-Euler CFL number, where one is expected.
    pub cfl_limit: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchemeSpec {
    pub name: String,
    pub family: Family,
    pub params: AcousticParams,
    /// Diffusion matrix entries of the dimensionally split members.
    pub diffusion: Option<DiffusionParams>,
    pub dx: f64,
    pub dy: f64,
    pub stencil: MatrixStencil,
    pub claims: Claims,
}

impl SchemeSpec {
    /// The divergence whose discrete kernel, with constant pressure, is
    /// stationary under this scheme (`None` if the scheme is not
    /// stationarity preserving).
    pub fn div_row(&self) -> Option<VecStencilRow> {
        match self.family {
            Family::Multid => Some(averaged_div()),
            Family::Roe => None,
            _ => {
                let d = self.diffusion.unwrap_or_default();
                (d.a1 == 0.0).then(|| dimsplit_div(d.a3, self.params.c))
            }
        }
    }

    /// Time derivative `-sum_S alpha_S q_{I+S}`.
    pub fn rhs(&self, state: &FieldSet) -> Result<FieldSet> {
        rhs(self, state)
    }
}

/// Time derivative `-sum_S alpha_S q_{I+S}` of `spec` at `state`.
pub fn rhs(spec: &SchemeSpec, state: &FieldSet) -> Result<FieldSet> {
    Ok(spec.stencil.apply(state)?.scaled(-1.0))
}

fn per(axis: Axis, st: ScalarStencil) -> ScalarStencil {
    st.with_units(Units::inverse(axis))
}

/// `(1/2dx)(J_x [q]_{i±1} - D_x [[q]]) + (1/2dy)(J_y [q]_{j±1} - D_y [[q]])`.
fn dimsplit_stencil(params: &AcousticParams, dp: &DiffusionParams, dx: f64, dy: f64) -> MatrixStencil {
    let (ie2, c2) = (1.0 / (params.eps * params.eps), params.c * params.c);
    let [a1, a2, a3, a4] = dp.as_array();
    let mut m = MatrixStencil::new();
    for (axis, vel) in [(Axis::X, 0usize), (Axis::Y, 1usize)] {
        let mut j = [[0.0; 3]; 3];
        j[vel][2] = ie2;
        j[2][vel] = c2;
        let mut d = [[0.0; 3]; 3];
        d[vel][vel] = a1;
        d[vel][2] = a2;
        d[2][vel] = a3;
        d[2][2] = a4;
        let jump = per(axis, diff_pm1(axis));
        let second = per(axis, second_diff(axis));
        for r in 0..3 {
            for c in 0..3 {
                if j[r][c] != 0.0 {
                    m.add_entry(r, c, &jump, 0.5 * j[r][c], dx, dy);
                }
                if d[r][c] != 0.0 {
                    m.add_entry(r, c, &second, -0.5 * d[r][c], dx, dy);
                }
            }
        }
    }
    m
}

pub fn dimsplit_scheme(params: AcousticParams, dp: DiffusionParams, dx: f64, dy: f64) -> Result<SchemeSpec> {
    dp.check()?;
    Ok(SchemeSpec {
        name: String::from("dimsplit"),
        family: Family::Dimsplit,
        params,
        diffusion: Some(dp),
        dx,
        dy,
        stencil: dimsplit_stencil(&params, &dp, dx, dy),
        claims: Claims { stationarity_preserving: dp.a1 == 0.0, cfl_limit: None },
    })
}

/// Centred fluxes without diffusion.
pub fn central_scheme(params: AcousticParams, dx: f64, dy: f64) -> SchemeSpec {
    SchemeSpec {
        name: String::from("central"),
        family: Family::Central,
        params,
        diffusion: Some(DiffusionParams::ZERO),
        dx,
        dy,
        stencil: dimsplit_stencil(&params, &DiffusionParams::ZERO, dx, dy),
        claims: Claims { stationarity_preserving: true, cfl_limit: None },
    }
}

pub fn roe_scheme(params: AcousticParams, dx: f64, dy: f64) -> SchemeSpec {
    let dp = DiffusionParams::roe(&params);
    SchemeSpec {
        name: String::from("roe"),
        family: Family::Roe,
        params,
        diffusion: Some(dp),
        dx,
        dy,
        stencil: dimsplit_stencil(&params, &dp, dx, dy),
        claims: Claims { stationarity_preserving: false, cfl_limit: Some(0.5) },
    }
}

pub fn lowmach_scheme(params: AcousticParams, variant: u8, dx: f64, dy: f64) -> Result<SchemeSpec> {
    let dp = DiffusionParams::lowmach(&params, variant)?;
    let family = SchemeKind::LowMach(variant).family()?;
    Ok(SchemeSpec {
        name: String::from(family.name()),
        family,
        params,
        diffusion: Some(dp),
        dx,
        dy,
        stencil: dimsplit_stencil(&params, &dp, dx, dy),
        claims: Claims { stationarity_preserving: true, cfl_limit: None },
    })
}

/// Averaged pressure gradient and divergence, with velocity diffusion that
/// vanishes on the kernel of the averaged divergence and an averaged
/// pressure Laplacian.
pub fn multid_scheme(params: AcousticParams, dx: f64, dy: f64) -> SchemeSpec {
    let (ie2, c2, s) = (1.0 / (params.eps * params.eps), params.c * params.c, params.c / params.eps);
    let (x, y) = (Axis::X, Axis::Y);
    // {{[q]_{i±1}}}_{j±1/2}
    let grad_x = per(x, double_sum(y).compose(&diff_pm1(x)));
    let grad_y = per(y, double_sum(x).compose(&diff_pm1(y)));
    // [[{{q}}_{j±1/2}]]_{i±1/2}
    let lap_x = per(x, second_diff(x).compose(&double_sum(y)));
    let lap_y = per(y, double_sum(x).compose(&second_diff(y)));
    // [[q]_{j±1}]_{i±1}
    let cross = diff_pm1(x).compose(&diff_pm1(y));

    let mut m = MatrixStencil::new();
    let f = 0.125;
    m.add_entry(0, 2, &grad_x, f * ie2, dx, dy);
    m.add_entry(1, 2, &grad_y, f * ie2, dx, dy);
    m.add_entry(2, 0, &grad_x, f * c2, dx, dy);
    m.add_entry(2, 1, &grad_y, f * c2, dx, dy);
    m.add_entry(0, 0, &lap_x, -f * s, dx, dy);
    m.add_entry(0, 1, &per(y, cross.clone()), -f * s, dx, dy);
    m.add_entry(1, 0, &per(x, cross), -f * s, dx, dy);
    m.add_entry(1, 1, &lap_y, -f * s, dx, dy);
    m.add_entry(2, 2, &lap_x, -f * s, dx, dy);
    m.add_entry(2, 2, &lap_y, -f * s, dx, dy);
    SchemeSpec {
        name: String::from("multid"),
        family: Family::Multid,
        params,
        diffusion: None,
        dx,
        dy,
        stencil: m,
        claims: Claims { stationarity_preserving: true, cfl_limit: Some(1.0) },
    }
}

/// One member of every named family (the dimensionally split entry uses
/// `a = (0, 1, 1, 1)`).
pub fn catalog(params: AcousticParams, dx: f64, dy: f64) -> Vec<SchemeSpec> {
    let mut out = Vec::new();
    for f in Family::ALL {
        let kind = match f {
            Family::Central => SchemeKind::Central,
            Family::Dimsplit => SchemeKind::Dimsplit(DiffusionParams::new(0.0, 1.0, 1.0, 1.0)),
            Family::Roe => SchemeKind::Roe,
            Family::LowMach1 => SchemeKind::LowMach(1),
            Family::LowMach2 => SchemeKind::LowMach(2),
            Family::LowMach3 => SchemeKind::LowMach(3),
            Family::Multid => SchemeKind::Multid,
        };
        out.push(kind.build(params, dx, dy).expect("catalog parameters are valid"));
    }
    out
}

/// The velocity-diffusion rows of the multid scheme, for comparison with
/// the consistent diffusion family.
pub fn multid_velocity_rows(spec: &SchemeSpec) -> [VecStencilRow; 2] {
    let m = &spec.stencil;
    [
        VecStencilRow::new(m.entry(0, 0), m.entry(0, 1)),
        VecStencilRow::new(m.entry(1, 0), m.entry(1, 1)),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourier::{dimsplit_evolution_closed_form, Phases};
    use crate::grid::{make_field, GridSpec};
    use crate::stencil::Offset;
    use nalgebra::Complex;

    fn params() -> AcousticParams {
        AcousticParams::new(1.0, 0.5).unwrap()
    }

    #[test]
    fn all_consistent() {
        for s in catalog(params(), 0.1, 0.2) {
            for row in s.stencil.block_sum() {
                for x in row {
                    assert!(x.abs() < 1e-12, "{}", s.name);
                }
            }
            assert!(s.stencil.radius() <= 1);
        }
    }

    #[test]
    fn central_has_no_centre_block() {
        let s = central_scheme(params(), 0.1, 0.1);
        assert_eq!(s.stencil.block(Offset::ZERO), [[0.0; 3]; 3]);
        assert_eq!(s.stencil.blocks().count(), 4);
    }

    #[test]
    fn closed_form_entry_p_u() {
        let p = params();
        let a = [0.0, 0.3, -0.7, 1.1];
        let s = dimsplit_scheme(p, DiffusionParams::new(a[0], a[1], a[2], a[3]), 0.1, 0.05).unwrap();
        let ph = Phases::new(0.4, -1.2);
        let e = s.stencil.evolution(ph.thx, ph.thy);
        let cf = dimsplit_evolution_closed_form(&p, a, 0.1, 0.05, ph);
        assert!((e - cf).norm() < 1e-13 * cf.norm());
        let tx = Complex::new(0.4f64.cos(), 0.4f64.sin());
        let one = Complex::new(1.0, 0.0);
        let direct = Complex::new(0.0, -1.0)
            * ((tx - 2.0 + one / tx) * -a[2] / 0.2 + (tx - one / tx) * p.c * p.c / 0.2);
        assert!(crate::fourier::cabs(e[(2, 0)] - direct) < 1e-13 * crate::fourier::cabs(direct));
    }

    #[test]
    fn lowmach_variants() {
        assert!(matches!(lowmach_scheme(params(), 4, 0.1, 0.1), Err(Error::InvalidVariant(4))));
        for v in 1..=3 {
            let s = lowmach_scheme(params(), v, 0.1, 0.1).unwrap();
            assert_eq!(s.diffusion.unwrap().a1, 0.0);
            assert!(s.div_row().is_some());
        }
        assert!(roe_scheme(params(), 0.1, 0.1).div_row().is_none());
    }

    #[test]
    fn fluxes_shared_with_roe_at_unit_eps() {
        let p = AcousticParams::new(1.0, 1.0).unwrap();
        let a = lowmach_scheme(p, 3, 0.1, 0.1).unwrap().stencil;
        let b = roe_scheme(p, 0.1, 0.1).stencil;
        // off-centre blocks differ only in the diffusion entries
        let (ba, bb) = (a.block(Offset::new(1, 0)), b.block(Offset::new(1, 0)));
        assert_eq!(ba[2][0], bb[2][0]);
        assert_ne!(ba[0][2], bb[0][2]);
    }

    /// Roe restricted to y-constant data against a hand-written 1-D upwind update.
    #[test]
    fn roe_and_multid_reduce_to_upwind() {
        let p = AcousticParams::new(1.5, 0.5).unwrap();
        let g = GridSpec::new(9, 4, 0.1, 0.2).unwrap();
        let f = make_field(g, |x, _| ((7.0 * x).sin(), (3.0 * x).cos(), 1.0 + x * x)).unwrap();
        let s = p.c / p.eps;
        let mut expect = FieldSet::zeros(g);
        for i in 0..g.nx {
            let (ip, im) = ((i + 1) % g.nx, (i + g.nx - 1) % g.nx);
            for j in 0..g.ny {
                let at = |q: &[f64], k: usize| q[g.index(k, j)];
                let k = g.index(i, j);
                let d = |q: &[f64]| (at(q, ip) - at(q, im)) / (2.0 * g.dx);
                let dd = |q: &[f64]| (at(q, ip) - 2.0 * at(q, i) + at(q, im)) / (2.0 * g.dx);
                expect.u[k] = -d(&f.p) / (p.eps * p.eps) + s * dd(&f.u);
                expect.v[k] = 0.0;
                expect.p[k] = -p.c * p.c * d(&f.u) + s * dd(&f.p);
            }
        }
        for spec in [roe_scheme(p, g.dx, g.dy), multid_scheme(p, g.dx, g.dy)] {
            let r = spec.rhs(&f).unwrap();
            assert!(r.max_abs_diff(&expect) < 1e-12 * expect.max_abs(), "{}", spec.name);
        }
    }

    /// Velocity rows against `(c / 2 eps)` times the consistent-diffusion
    /// rows, and the remaining blocks against the averaged divergence, as
    /// exact Laurent polynomials.
    #[test]
    fn multid_blocks_match_named_operators() {
        use crate::laurent::poly::LaurentPoly;
        use crate::stencil::operators::consistent_diffusion;
        let (dx, dy) = (0.125, 0.125);
        let p = AcousticParams::new(2.0, 0.25).unwrap();
        let s = multid_scheme(p, dx, dy);
        let num = |st: &ScalarStencil| LaurentPoly::from_stencil(st).unwrap();
        let named = |st: &ScalarStencil, f: f64| {
            let scaled = st.clone().with_units(Units::NONE).scale(f * st.units().factor(dx, dy));
            LaurentPoly::from_stencil(&scaled).unwrap()
        };
        // the scheme diffuses with a minus sign in alpha
        let k = -p.c / (2.0 * p.eps);
        let [ru, rv] = multid_velocity_rows(&s);
        let (cu, cv) = (consistent_diffusion(1.0, 0.0), consistent_diffusion(0.0, 1.0));
        assert_eq!(num(&ru.u), named(&cu.u, k));
        assert_eq!(num(&ru.v), named(&cu.v, k));
        assert_eq!(num(&rv.u), named(&cv.u, k));
        assert_eq!(num(&rv.v), named(&cv.v, k));
        let a = averaged_div();
        let ie2 = 1.0 / (p.eps * p.eps);
        assert_eq!(num(&s.stencil.entry(0, 2)), named(&a.u, ie2));
        assert_eq!(num(&s.stencil.entry(1, 2)), named(&a.v, ie2));
        assert_eq!(num(&s.stencil.entry(2, 0)), named(&a.u, p.c * p.c));
        assert_eq!(num(&s.stencil.entry(2, 1)), named(&a.v, p.c * p.c));
        // pressure diffusion: the trace of the velocity diffusion pattern
        let lap = num(&ru.u).try_add(&num(&rv.v)).unwrap();
        assert_eq!(num(&s.stencil.entry(2, 2)), lap);
    }

    #[test]
    fn constant_state_is_stationary() {
        let g = GridSpec::unit_square(6, 5).unwrap();
        let f = make_field(g, |_, _| (0.3, -0.2, 1.0)).unwrap();
        for s in catalog(params(), g.dx, g.dy) {
            assert!(s.rhs(&f).unwrap().max_abs() < 1e-12);
        }
    }
}
