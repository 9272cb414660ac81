//! Benchmark setups and measurements: vortex data, kernel-adapted data,
//! conserved-operator extraction, decay fits and consistency orders.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::Complex;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::grid::{l1_norm_central_diff, make_field, AcousticParams, Axis, FieldSet, GridSpec};
use crate::laurent::linalg::nullspace;
use crate::laurent::poly::{rational_from_f64, rational_to_f64, LaurentPoly, Rational};
use crate::schemes::{SchemeKind, SchemeSpec};
use crate::stencil::{Offset, ScalarStencil, Units, VecStencilRow};
use crate::time::{cfl_dt, run, Probe, StepControl, TimeSeries};

/// Piecewise-linear azimuthal vortex on a constant pressure background.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VortexParams {
    pub center: (f64, f64),
    pub r1: f64,
    pub r2: f64,
    /// Peak azimuthal speed, reached at `r1`.
    pub speed: f64,
    pub p0: f64,
}

impl Default for VortexParams {
    fn default() -> Self {
        Self { center: (0.5, 0.5), r1: 0.2, r2: 0.4, speed: 1.0, p0: 1.0 }
    }
}

impl VortexParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.r1 > 0.0 && self.r1 < self.r2) {
            return Err(Error::InvalidParams(String::from("vortex radii must satisfy 0 < r1 < r2")));
        }
        if ![self.center.0, self.center.1, self.speed, self.p0].iter().all(|x| x.is_finite()) {
            return Err(Error::InvalidParams(String::from("vortex parameters must be finite")));
        }
        Ok(())
    }

    /// True if the support `r < r2` stays inside the domain.
    pub fn fits(&self, grid: &GridSpec) -> bool {
        let (x0, y0) = self.center;
        x0 - self.r2 >= 0.0 && x0 + self.r2 <= grid.width() && y0 - self.r2 >= 0.0 && y0 + self.r2 <= grid.height()
    }

    pub fn azimuthal_speed(&self, r: f64) -> f64 {
        if r < self.r1 {
            self.speed * r / self.r1
        } else if r < self.r2 {
            self.speed * (self.r2 - r) / (self.r2 - self.r1)
        } else {
            0.0
        }
    }
}

/// Samples the vortex at cell centres. Callers check [`VortexParams::fits`]
/// to report a vortex touching the boundary.
pub fn gresho_vortex(grid: GridSpec, vp: &VortexParams) -> Result<FieldSet> {
    vp.validate()?;
    make_field(grid, |x, y| {
        let (dx, dy) = (x - vp.center.0, y - vp.center.1);
        let r = libm::hypot(dx, dy);
        if r == 0.0 {
            return (0.0, 0.0, vp.p0);
        }
        let w = vp.azimuthal_speed(r) / r;
        (-w * dy, w * dx, vp.p0)
    })
}

/// Velocity `(-A_v psi, A_u psi)` in the exact kernel of `div_row = (A_u, A_v)`.
pub fn stream_velocity(psi: &[f64], div_row: &VecStencilRow, grid: &GridSpec) -> Result<(Vec<f64>, Vec<f64>)> {
    let (au, av) = (&div_row.u, &div_row.v);
    if au.compose(av) != av.compose(au) {
        return Err(Error::NonCommuting);
    }
    let u = av.apply(psi, grid)?.into_iter().map(|x| -x).collect();
    let v = au.apply(psi, grid)?;
    Ok((u, v))
}

/// Kernel-adapted state: stream velocity and constant pressure `p0`.
pub fn kernel_adapted_state(psi: &[f64], div_row: &VecStencilRow, grid: GridSpec, p0: f64) -> Result<FieldSet> {
    let (u, v) = stream_velocity(psi, div_row, &grid)?;
    FieldSet::from_components(grid, u, v, vec![p0; grid.len()])
}

/// `||rhs||_inf / ((c/eps) ||q||_inf)`, zero for the zero state.
pub fn stationarity_residual(spec: &SchemeSpec, state: &FieldSet) -> Result<f64> {
    let scale = spec.params.speed() * state.max_abs();
    if scale == 0.0 {
        return Ok(0.0);
    }
    Ok(spec.rhs(state)?.max_abs() / scale)
}

/// A linear operator `Omega` with `Omega(rhs(q)) = 0` for every `q`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConservedOperator {
    pub row: VecStencilRow,
    pub pressure: ScalarStencil,
    /// Found by an exact rational null-space search.
    pub exact: bool,
    /// Stencil radius of the search that succeeded.
    pub radius: i32,
    /// Dimension of the left null space at that radius.
    pub nullspace_dim: usize,
}

impl ConservedOperator {
    pub fn apply(&self, q: &FieldSet) -> Result<Vec<f64>> {
        let mut out = self.row.apply(&q.u, &q.v, &q.grid)?;
        for (o, x) in out.iter_mut().zip(self.pressure.apply(&q.p, &q.grid)?) {
            *o += x;
        }
        Ok(out)
    }

    /// Sum of absolute coefficients, the natural roundoff scale of `apply`.
    pub fn l1_norm(&self) -> f64 {
        [&self.row.u, &self.row.v, &self.pressure]
            .iter()
            .flat_map(|s| s.entries().map(|(_, c)| c.abs()))
            .sum()
    }

    /// Symbol `(Omega_u, Omega_v, Omega_p)` at the given phases.
    pub fn symbol(&self, thx: f64, thy: f64) -> [Complex<f64>; 3] {
        let [u, v] = self.row.symbol(thx, thy, 1.0, 1.0);
        [u, v, self.pressure.symbol(thx, thy, 1.0, 1.0)]
    }
}

fn offsets(radius: i32) -> Vec<Offset> {
    let mut out = Vec::new();
    for sx in -radius..=radius {
        for sy in -radius..=radius {
            out.push(Offset::new(sx, sy));
        }
    }
    out
}

/// Left null space of the scheme symbol over rows supported in the given
/// radius, as exact coefficient vectors indexed `component * n + offset`.
fn left_nullspace(polys: &[[LaurentPoly; 3]; 3], radius: i32) -> (Vec<Offset>, Vec<Vec<Rational>>) {
    let offs = offsets(radius);
    let n = offs.len();
    let mut eqs: BTreeMap<(usize, i32, i32), BTreeMap<usize, Rational>> = BTreeMap::new();
    for (r, row) in polys.iter().enumerate() {
        for (k, s) in offs.iter().enumerate() {
            for (c, p) in row.iter().enumerate() {
                for ((a, b), coef) in p.terms() {
                    let slot = eqs.entry((c, a + s.sx, b + s.sy)).or_default().entry(r * n + k).or_insert_with(Rational::zero);
                    *slot += coef;
                }
            }
        }
    }
    let rows: Vec<Vec<Rational>> = eqs
        .into_values()
        .map(|m| {
            let mut row = vec![Rational::zero(); 3 * n];
            for (k, v) in m {
                row[k] = v;
            }
            row
        })
        .filter(|r| r.iter().any(|x| !x.is_zero()))
        .collect();
    (offs, nullspace(&rows, 3 * n))
}

/// The most compact, most centred member of the span of `basis`: greedily
/// forces coordinates to zero, pressure first, then outermost offsets.
fn most_compact(basis: &[Vec<Rational>], offs: &[Offset]) -> Vec<Rational> {
    let n = offs.len();
    let mut order: Vec<usize> = (0..3 * n).collect();
    order.sort_by_key(|&k| {
        let (comp, o) = (k / n, offs[k % n]);
        let pressure_first = if comp == 2 { 0 } else { 1 };
        (pressure_first, -o.radius(), -(o.sx.abs() + o.sy.abs()), -o.sx, -o.sy, comp)
    });
    let d = basis.len();
    let mut constraints: Vec<Vec<Rational>> = Vec::new();
    for k in order {
        let row: Vec<Rational> = basis.iter().map(|b| b[k].clone()).collect();
        if row.iter().all(|x| x.is_zero()) {
            continue;
        }
        constraints.push(row);
        if nullspace(&constraints, d).is_empty() {
            constraints.pop();
        }
    }
    let lambda = nullspace(&constraints, d).into_iter().next().expect("a nonzero basis always survives");
    let mut x = vec![Rational::zero(); 3 * n];
    for (l, b) in lambda.iter().zip(basis) {
        if l.is_zero() {
            continue;
        }
        for (xi, bi) in x.iter_mut().zip(b) {
            *xi += l * bi;
        }
    }
    x
}

/// Exact left kernel of the scheme's symbol as a physical-space operator,
/// normalised so that it reads `d_x v - d_y u + ...` where possible.
pub fn extract_conserved_operator(spec: &SchemeSpec) -> Result<ConservedOperator> {
    let m = &spec.stencil;
    let entry = |r: usize, c: usize| LaurentPoly::from_stencil(&m.entry(r, c));
    let polys = [
        [entry(0, 0)?, entry(0, 1)?, entry(0, 2)?],
        [entry(1, 0)?, entry(1, 1)?, entry(1, 2)?],
        [entry(2, 0)?, entry(2, 1)?, entry(2, 2)?],
    ];
    for radius in 1..=2 {
        let (offs, basis) = left_nullspace(&polys, radius);
        if basis.is_empty() {
            continue;
        }
        let mut x = most_compact(&basis, &offs);
        let n = offs.len();
        let (dx, dy) = (rational_from_f64(spec.dx)?, rational_from_f64(spec.dy)?);
        // d_x v and d_y u Taylor coefficients
        let mut dxv = Rational::zero();
        let mut dyu = Rational::zero();
        for (k, o) in offs.iter().enumerate() {
            dxv += &x[n + k] * Rational::from_integer(o.sx.into()) * &dx;
            dyu += &x[k] * Rational::from_integer(o.sy.into()) * &dy;
        }
        let norm = if !dxv.is_zero() {
            dxv
        } else if !dyu.is_zero() {
            -dyu
        } else {
            x.iter().max_by(|a, b| a.abs().cmp(&b.abs())).cloned().expect("nonempty")
        };
        for xi in x.iter_mut() {
            *xi /= &norm;
        }
        let comp = |c: usize| {
            ScalarStencil::from_entries(
                offs.iter().enumerate().map(|(k, o)| (*o, rational_to_f64(&x[c * n + k]))),
                Units::NONE,
            )
        };
        return Ok(ConservedOperator {
            row: VecStencilRow::new(comp(0), comp(1)),
            pressure: comp(2),
            exact: true,
            radius,
            nullspace_dim: basis.len(),
        });
    }
    Err(Error::NumericOnly(2))
}

/// `max |Omega(rhs(q))| / (||Omega||_1 ||rhs(q)||_inf)`.
pub fn conservation_defect(spec: &SchemeSpec, op: &ConservedOperator, q: &FieldSet) -> Result<f64> {
    let r = spec.rhs(q)?;
    let scale = op.l1_norm() * r.max_abs();
    if scale == 0.0 {
        return Ok(0.0);
    }
    let w = op.apply(&r)?;
    Ok(w.iter().fold(0.0f64, |a, x| a.max(x.abs())) / scale)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    /// `lambda` in `value ~ exp(intercept - lambda t)`.
    pub rate: f64,
    pub intercept: f64,
    pub window: (f64, f64),
    /// Root-mean-square residual of the log-linear fit.
    pub residual: f64,
    pub points: usize,
}

/// Least-squares line through `(t, ln value)` over `t_a <= t <= t_b`.
pub fn fit_decay(series: &TimeSeries, window: (f64, f64)) -> Result<DecayFit> {
    let (ta, tb) = window;
    if ta.is_nan() || tb.is_nan() || ta >= tb {
        return Err(Error::InvalidParams(format!("empty fit window [{ta}, {tb}]")));
    }
    let mut pts = Vec::new();
    for (i, (&t, &v)) in series.t.iter().zip(&series.values).enumerate() {
        if t < ta || t > tb {
            continue;
        }
        if v.is_nan() || v <= 0.0 {
            return Err(Error::NonPositive { index: i });
        }
        pts.push((t, libm::log(v)));
    }
    if pts.len() < 2 {
        return Err(Error::InvalidParams(String::from("fit window holds fewer than two samples")));
    }
    let n = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let ml = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let stt: f64 = pts.iter().map(|p| (p.0 - mt) * (p.0 - mt)).sum();
    let stl: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - ml)).sum();
    let slope = stl / stt;
    let intercept = ml - slope * mt;
    let ss: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    Ok(DecayFit { rate: -slope, intercept, window: (ta, tb), residual: libm::sqrt(ss / n), points: pts.len() })
}

/// Default fit window: from `t_start` to the end of the series or the
/// first value below `1e-14`, whichever comes first.
pub fn decay_window(series: &TimeSeries, t_start: f64) -> (f64, f64) {
    let mut end = series.t.last().copied().unwrap_or(0.0);
    for (&t, &v) in series.t.iter().zip(&series.values) {
        if t > t_start && v < 1e-14 {
            end = t;
            break;
        }
    }
    (t_start, end)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkRun {
    pub scheme: String,
    pub eps: f64,
    pub cfl: f64,
    pub t_end: f64,
    pub dt: f64,
    pub steps: usize,
    /// `||d_x u||_L1` over time.
    pub dxu: TimeSeries,
    /// `||d_y u||_L1` over time.
    pub dyu: TimeSeries,
    pub fit: Option<DecayFit>,
    /// Stationarity residual of the sampled initial data.
    pub initial_residual: f64,
    /// False when the vortex support touches the domain boundary.
    pub vortex_fits: bool,
    pub initial: FieldSet,
    pub final_state: FieldSet,
}

impl BenchmarkRun {
    /// Final over initial `||d_x u||_L1`.
    pub fn survival(&self) -> f64 {
        match (self.dxu.first(), self.dxu.last()) {
            (Some(a), Some(b)) if a > 0.0 => b / a,
            _ => 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchmarkSetup {
    pub c: f64,
    pub cfl: f64,
    /// End time; `None` selects `30 eps / c`.
    pub t_end: Option<f64>,
    pub probe_every: usize,
    pub vortex: VortexParams,
}

impl Default for BenchmarkSetup {
    fn default() -> Self {
        Self { c: 1.0, cfl: 0.2, t_end: None, probe_every: 1, vortex: VortexParams::default() }
    }
}

/// Vortex run of one scheme at one Mach number.
pub fn vortex_run(kind: SchemeKind, eps: f64, grid: GridSpec, setup: &BenchmarkSetup) -> Result<BenchmarkRun> {
    let params = AcousticParams::new(setup.c, eps)?;
    let spec = kind.build(params, grid.dx, grid.dy)?;
    let q0 = gresho_vortex(grid, &setup.vortex)?;
    let mut out = benchmark_from(&spec, q0, setup)?;
    out.vortex_fits = setup.vortex.fits(&grid);
    Ok(out)
}

/// Runs `spec` from `q0` with the `||d_x u||_L1` and `||d_y u||_L1` probes
/// and fits the decay of the former.
pub fn benchmark_from(spec: &SchemeSpec, q0: FieldSet, setup: &BenchmarkSetup) -> Result<BenchmarkRun> {
    let (params, grid) = (spec.params, q0.grid);
    let t_end = setup.t_end.unwrap_or(30.0 * params.eps / params.c);
    let control = StepControl::new(setup.cfl, t_end)?.with_max_steps(10_000_000).with_probe_every(setup.probe_every);
    let probes = [
        Probe::new("dxu_l1", |q: &FieldSet| l1_norm_central_diff(&q.u, Axis::X, &q.grid).unwrap_or(f64::NAN)),
        Probe::new("dyu_l1", |q: &FieldSet| l1_norm_central_diff(&q.u, Axis::Y, &q.grid).unwrap_or(f64::NAN)),
    ];
    let tr = run(spec, &q0, &control, &probes)?;
    let mut series = tr.series.into_iter();
    let dxu = series.next().expect("probe");
    let dyu = series.next().expect("probe");
    let t_start = 5.0 * cfl_dt(&params, &grid, setup.cfl) / setup.cfl;
    let window = decay_window(&dxu, t_start);
    let fit = fit_decay(&dxu, window).ok();
    Ok(BenchmarkRun {
        scheme: spec.name.clone(),
        eps: params.eps,
        cfl: setup.cfl,
        t_end,
        dt: tr.dt,
        steps: tr.steps,
        dxu,
        dyu,
        fit,
        initial_residual: stationarity_residual(spec, &q0)?,
        vortex_fits: true,
        initial: q0,
        final_state: tr.final_state,
    })
}

/// [`vortex_run`] for every Mach number in `eps_list`.
pub fn vortex_benchmark(kind: SchemeKind, eps_list: &[f64], grid: GridSpec, setup: &BenchmarkSetup) -> Result<Vec<BenchmarkRun>> {
    eps_list.iter().map(|&e| vortex_run(kind, e, grid, setup)).collect()
}

/// `log2(e_coarse / e_fine)` for a refinement by two.
pub fn observed_order(e_coarse: f64, e_fine: f64) -> f64 {
    libm::log2(e_coarse / e_fine)
}

/// Max-norm error of `row` against the exact value on an `n x n` unit square.
pub fn divergence_error<F, D>(row: &VecStencilRow, n: usize, field: F, exact: D) -> Result<f64>
where
    F: Fn(f64, f64) -> (f64, f64),
    D: Fn(f64, f64) -> f64,
{
    let grid = GridSpec::unit_square(n, n)?;
    let q = make_field(grid, |x, y| {
        let (u, v) = field(x, y);
        (u, v, 0.0)
    })?;
    let d = row.apply(&q.u, &q.v, &grid)?;
    let mut err = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let (x, y) = grid.center(i, j);
            err = err.max((d[grid.index(i, j)] - exact(x, y)).abs());
        }
    }
    Ok(err)
}

/// Observed order of `row` between `n` and `2n` cells per side.
pub fn consistency_order<F, D>(row: &VecStencilRow, n: usize, field: F, exact: D) -> Result<f64>
where
    F: Fn(f64, f64) -> (f64, f64),
    D: Fn(f64, f64) -> f64,
{
    let coarse = divergence_error(row, n, &field, &exact)?;
    let fine = divergence_error(row, 2 * n, &field, &exact)?;
    Ok(observed_order(coarse, fine))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schemes::{catalog, central_scheme, dimsplit_scheme, lowmach_scheme, multid_scheme, roe_scheme, DiffusionParams};
    use crate::stencil::operators::{averaged_div, central_curl, central_div, dimsplit_div, dimsplit_vorticity};
    use core::f64::consts::PI;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_state(grid: GridSpec, rng: &mut ChaCha8Rng) -> FieldSet {
        let mut q = FieldSet::zeros(grid);
        for x in q.u.iter_mut().chain(q.v.iter_mut()).chain(q.p.iter_mut()) {
            *x = rng.random_range(-1.0..1.0);
        }
        q
    }

    #[test]
    fn vortex_far_field_and_peak() {
        let g = GridSpec::unit_square(50, 50).unwrap();
        let vp = VortexParams::default();
        let q = gresho_vortex(g, &vp).unwrap();
        assert!(vp.fits(&g));
        let k = g.index(0, 0);
        assert_eq!((q.u[k], q.v[k], q.p[k]), (0.0, 0.0, 1.0));
        assert!(q.max_abs() <= 1.0 + 1e-15);
        assert!(VortexParams { r1: 0.3, r2: 0.2, ..vp }.validate().is_err());
        assert!(!VortexParams { center: (0.1, 0.5), ..vp }.fits(&g));
    }

    #[test]
    fn sampled_vortex_is_not_discretely_divergence_free() {
        let g = GridSpec::unit_square(50, 50).unwrap();
        let q = gresho_vortex(g, &VortexParams::default()).unwrap();
        let d = central_div().apply(&q.u, &q.v, &g).unwrap();
        let m = d.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        assert!(m > 1e-8 && m < 1.0, "{m}");
    }

    #[test]
    fn stream_data_in_kernel() {
        let g = GridSpec::new(9, 7, 0.1, 0.3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let psi: Vec<f64> = (0..g.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
        for row in [averaged_div(), central_div(), dimsplit_div(0.7, 1.3)] {
            let (u, v) = stream_velocity(&psi, &row, &g).unwrap();
            let d = row.apply(&u, &v, &g).unwrap();
            let scale = u.iter().chain(&v).fold(0.0f64, |a, x| a.max(x.abs()));
            assert!(d.iter().all(|x| x.abs() <= 1e-13 * scale / 0.1));
        }
        let (u, v) = stream_velocity(&vec![2.5; g.len()], &averaged_div(), &g).unwrap();
        assert!(u.iter().chain(&v).all(|x| *x == 0.0));
    }

    #[test]
    fn residuals_on_stream_data() {
        let g = GridSpec::unit_square(16, 16).unwrap();
        let p = AcousticParams::new(1.0, 0.1).unwrap();
        let psi: Vec<f64> = (0..g.len()).map(|k| ((k * 7919) % 13) as f64 - 6.0).collect();
        let m = multid_scheme(p, g.dx, g.dy);
        let q = kernel_adapted_state(&psi, &m.div_row().unwrap(), g, 1.0).unwrap();
        assert!(stationarity_residual(&m, &q).unwrap() <= 1e-12);
        let r = roe_scheme(p, g.dx, g.dy);
        assert!(stationarity_residual(&r, &q).unwrap() >= 1e-3);
        let l = lowmach_scheme(p, 2, g.dx, g.dy).unwrap();
        let ql = kernel_adapted_state(&psi, &l.div_row().unwrap(), g, 1.0).unwrap();
        assert!(stationarity_residual(&l, &ql).unwrap() <= 1e-12);
        assert_eq!(stationarity_residual(&m, &FieldSet::zeros(g)).unwrap(), 0.0);
    }

    #[test]
    fn central_left_kernel_is_central_curl() {
        let g = GridSpec::new(8, 8, 0.125, 0.25).unwrap();
        let s = central_scheme(AcousticParams::new(1.0, 0.5).unwrap(), g.dx, g.dy);
        let op = extract_conserved_operator(&s).unwrap();
        assert!(op.pressure.is_empty());
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let q = random_state(g, &mut rng);
        let a = op.apply(&q).unwrap();
        let b = central_curl().apply(&q.u, &q.v, &g).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn dimsplit_left_kernel_matches_a2_vorticity() {
        let p = AcousticParams::new(2.0, 0.5).unwrap();
        let g = GridSpec::new(8, 9, 0.125, 0.0625).unwrap();
        let dp = DiffusionParams::new(0.0, 0.75, 1.5, 0.25);
        let s = dimsplit_scheme(p, dp, g.dx, g.dy).unwrap();
        let op = extract_conserved_operator(&s).unwrap();
        let expect = dimsplit_vorticity(p.c * p.c * p.eps * p.eps * dp.a2, p.c);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let q = random_state(g, &mut rng);
        let a = op.apply(&q).unwrap();
        let b = expect.apply(&q.u, &q.v, &g).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12 * 16.0, "{x} {y}");
        }
    }

    #[test]
    fn conserved_operators_annihilate_rhs() {
        let g = GridSpec::unit_square(10, 10).unwrap();
        let p = AcousticParams::new(1.0, 0.1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for s in catalog(p, g.dx, g.dy).into_iter().filter(|s| s.claims.stationarity_preserving) {
            let op = extract_conserved_operator(&s).unwrap();
            for _ in 0..3 {
                let q = random_state(g, &mut rng);
                assert!(conservation_defect(&s, &op, &q).unwrap() < 1e-13, "{}", s.name);
            }
        }
        assert!(extract_conserved_operator(&roe_scheme(p, g.dx, g.dy)).is_err());
    }

    #[test]
    fn exponential_fit() {
        let mut s = TimeSeries::new("x");
        for k in 0..=50 {
            let t = k as f64 * 0.02;
            s.push(t, 5.0 * libm::exp(-3.0 * t));
        }
        let f = fit_decay(&s, (0.0, 1.0)).unwrap();
        assert!((f.rate - 3.0).abs() < 1e-10);
        let mut scaled = s.clone();
        scaled.values.iter_mut().for_each(|v| *v *= 1e4);
        assert!((fit_decay(&scaled, (0.0, 1.0)).unwrap().rate - f.rate).abs() < 1e-10);
        s.values[10] = 0.0;
        assert!(matches!(fit_decay(&s, (0.0, 1.0)), Err(Error::NonPositive { index: 10 })));
    }

    #[test]
    fn orders_of_named_divergences() {
        let field = |x: f64, y: f64| ((2.0 * PI * x).sin() * (2.0 * PI * y).cos(), (2.0 * PI * y).sin());
        let div = |x: f64, y: f64| 2.0 * PI * ((2.0 * PI * x).cos() * (2.0 * PI * y).cos() + (2.0 * PI * y).cos());
        assert!(consistency_order(&averaged_div(), 32, field, div).unwrap() > 1.9);
        let o = consistency_order(&dimsplit_div(1.0, 1.0), 32, field, div).unwrap();
        assert!((0.9..=1.1).contains(&o), "{o}");
    }
}
