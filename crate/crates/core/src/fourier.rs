//! Numeric symbol analysis.
//!
//! For a scheme `d/dt q_I + sum_S alpha_S q_{I+S} = 0` the Fourier mode
//! `q_I = q_hat exp(i k.x_I)` evolves by `d/dt q_hat = E(k) q_hat` up to the
//! factor `i`: `E(k) = -i sum_S alpha_S t_x^sx t_y^sy` with `t_m = exp(i theta_m)`.
//! Stationary modes are the kernel of `E`; a left null vector is the symbol
//! of a conserved quantity.

use alloc::vec::Vec;
use core::f64::consts::PI;

use nalgebra::{Complex, Matrix3, RowVector3, Schur, Vector3};

use crate::error::{Error, Result};
use crate::grid::AcousticParams;
use crate::stencil::MatrixStencil;

pub type CMatrix3 = Matrix3<Complex<f64>>;

/// Default relative singular-value threshold for kernel membership.
pub const KERNEL_TOL: f64 = 1e-12;
/// Eigenvector-matrix condition number above which a sample is flagged.
pub const COND_LIMIT: f64 = 1e8;
/// Samples keep `GUARD < |theta| < pi - GUARD` in each component.
pub const GUARD: f64 = 0.1;

pub fn cabs(z: Complex<f64>) -> f64 {
    z.norm_sqr().sqrt()
}

pub fn cis(t: f64) -> Complex<f64> {
    Complex::new(t.cos(), t.sin())
}

/// Physical wavevector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Wavevector {
    pub kx: f64,
    pub ky: f64,
}

impl Wavevector {
    pub fn new(kx: f64, ky: f64) -> Self {
        Self { kx, ky }
    }

    /// Phases `(kx dx, ky dy)` folded into `(-pi, pi]`.
    pub fn phases(&self, dx: f64, dy: f64) -> Phases {
        Phases::new(wrap_phase(self.kx * dx), wrap_phase(self.ky * dy))
    }
}

fn wrap_phase(t: f64) -> f64 {
    let w = t - 2.0 * PI * ((t + PI) / (2.0 * PI)).floor();
    if w <= -PI {
        w + 2.0 * PI
    } else {
        w
    }
}

/// Grid phases `theta = k delta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Phases {
    pub thx: f64,
    pub thy: f64,
}

impl Phases {
    pub fn new(thx: f64, thy: f64) -> Self {
        Self { thx, thy }
    }

    pub fn wavevector(&self, dx: f64, dy: f64) -> Wavevector {
        Wavevector::new(self.thx / dx, self.thy / dy)
    }

    pub fn is_generic(&self) -> bool {
        let ok = |t: f64| t.abs() > GUARD && t.abs() < PI - GUARD;
        ok(self.thx) && ok(self.thy)
    }
}

/// `J . k` of the continuous acoustic system.
pub fn jk_matrix(params: &AcousticParams, k: Wavevector) -> Matrix3<f64> {
    let e2 = params.eps * params.eps;
    let c2 = params.c * params.c;
    Matrix3::new(0.0, 0.0, k.kx / e2, 0.0, 0.0, k.ky / e2, c2 * k.kx, c2 * k.ky, 0.0)
}

/// Kernel dimension of `J . k`, computed from its singular values.
pub fn continuous_kernel_dim(params: &AcousticParams, k: Wavevector) -> usize {
    let m = jk_matrix(params, k).map(|x| Complex::new(x, 0.0));
    kernel_dim(&m, KERNEL_TOL)
}

/// `E = -i sum_S alpha_S t_x^sx t_y^sy`.
pub fn evolution_matrix(st: &MatrixStencil, ph: Phases) -> EvolutionSample {
    let e = st.evolution(ph.thx, ph.thy);
    EvolutionSample { phases: ph, eigenvalues: eigenvalues(&e), e }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionSample {
    pub phases: Phases,
    pub e: CMatrix3,
    pub eigenvalues: [Complex<f64>; 3],
}

pub fn eigenvalues(e: &CMatrix3) -> [Complex<f64>; 3] {
    let ev = Schur::new(*e).eigenvalues().expect("complex Schur form is triangular");
    [ev[0], ev[1], ev[2]]
}

/// Singular values, largest first.
pub fn singular_values(e: &CMatrix3) -> [f64; 3] {
    let sv = e.singular_values();
    let mut s = [sv[0], sv[1], sv[2]];
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// `E` in the energy variables `(u, v, p / (c eps))`, where the acoustic
/// part is skew-Hermitian; a similarity, so kernels and eigenvalues are kept.
pub fn energy_scaled(e: &CMatrix3, params: &AcousticParams) -> CMatrix3 {
    let s = params.c * params.eps;
    let mut out = *e;
    for k in 0..2 {
        out[(k, 2)] *= s;
        out[(2, k)] /= s;
    }
    out
}

/// Number of singular values at most `tol_rel * sigma_max`.
pub fn kernel_dim(e: &CMatrix3, tol_rel: f64) -> usize {
    let s = singular_values(e);
    if s[0] == 0.0 {
        return 3;
    }
    s.iter().filter(|x| **x <= tol_rel * s[0]).count()
}

/// Index of the smallest singular value and the SVD factors.
fn svd_min(e: &CMatrix3) -> (usize, CMatrix3, CMatrix3) {
    let svd = e.svd(true, true);
    let sv = svd.singular_values;
    let i = (0..3).min_by(|a, b| sv[*a].total_cmp(&sv[*b])).expect("three values");
    (i, svd.u.expect("requested"), svd.v_t.expect("requested"))
}

fn require_dim_one(e: &CMatrix3, tol_rel: f64) -> Result<()> {
    match kernel_dim(e, tol_rel) {
        1 => Ok(()),
        d => Err(Error::KernelDimension(d)),
    }
}

/// Unit vector `v` with `E v = 0`.
pub fn right_kernel(e: &CMatrix3, tol_rel: f64) -> Result<Vector3<Complex<f64>>> {
    require_dim_one(e, tol_rel)?;
    let (i, _, v_t) = svd_min(e);
    Ok(v_t.row(i).transpose().map(|z| z.conj()))
}

/// Unit row `w` with `w E = 0`.
pub fn left_kernel(e: &CMatrix3, tol_rel: f64) -> Result<RowVector3<Complex<f64>>> {
    require_dim_one(e, tol_rel)?;
    let (i, u, _) = svd_min(e);
    Ok(u.column(i).transpose().map(|z| z.conj()))
}

/// Whether `E` has a full set of eigenvectors, and the condition number of
/// the eigenvector matrix (infinite when defective).
pub fn diagonalizability(e: &CMatrix3) -> (bool, f64) {
    let ev = eigenvalues(e);
    let scale = singular_values(e)[0].max(f64::MIN_POSITIVE);
    let tol = 1e-8 * scale;
    // cluster nearly equal eigenvalues, then collect each cluster's eigenspace
    let mut reps: Vec<Complex<f64>> = Vec::new();
    for l in ev {
        if reps.iter().all(|r| cabs(r - l) > tol) {
            reps.push(l);
        }
    }
    let mut cols: Vec<Vector3<Complex<f64>>> = Vec::new();
    for l in reps {
        let shifted = e - CMatrix3::identity() * l;
        let svd = shifted.svd(false, true);
        let v_t = svd.v_t.expect("requested");
        for k in 0..3 {
            if svd.singular_values[k] <= 1e-9 * scale {
                cols.push(v_t.row(k).transpose().map(|z| z.conj()));
            }
        }
    }
    if cols.len() < 3 {
        return (false, f64::INFINITY);
    }
    let v = CMatrix3::from_columns(&cols[..3]);
    let s = singular_values(&v);
    let cond = if s[2] > 0.0 { s[0] / s[2] } else { f64::INFINITY };
    (cond <= COND_LIMIT, cond)
}

/// One sample of [`det_scan`].
#[derive(Debug, Clone, PartialEq)]
pub struct SampleReport {
    pub phases: Phases,
    pub generic: bool,
    pub absdet: f64,
    pub kernel_dim: usize,
    pub continuous_dim: usize,
    pub sigma_min_ratio: f64,
    pub diagonalizable: bool,
    pub eigvec_cond: f64,
    pub right_kernel: Option<[Complex<f64>; 3]>,
    pub left_kernel: Option<[Complex<f64>; 3]>,
}

impl SampleReport {
    pub fn passes(&self) -> bool {
        self.kernel_dim == self.continuous_dim
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralVerdict {
    pub is_stationarity_preserving: bool,
    pub samples: Vec<SampleReport>,
    /// Generic samples left out of the verdict because `E` is not diagonalizable.
    pub withheld: usize,
}

impl SpectralVerdict {
    pub fn generic(&self) -> impl Iterator<Item = &SampleReport> {
        self.samples.iter().filter(|s| s.generic)
    }
}

pub fn analyze_sample(st: &MatrixStencil, params: &AcousticParams, dx: f64, dy: f64, ph: Phases, tol_rel: f64) -> SampleReport {
    let e = st.evolution(ph.thx, ph.thy);
    let s = singular_values(&e);
    let kdim = kernel_dim(&e, tol_rel);
    let (diagonalizable, eigvec_cond) = diagonalizability(&e);
    let to_arr = |v: &[Complex<f64>]| [v[0], v[1], v[2]];
    let (rk, lk) = if kdim == 1 {
        (
            right_kernel(&e, tol_rel).ok().map(|v| to_arr(v.as_slice())),
            left_kernel(&e, tol_rel).ok().map(|v| to_arr(v.as_slice())),
        )
    } else {
        (None, None)
    };
    SampleReport {
        phases: ph,
        generic: ph.is_generic(),
        absdet: cabs(e.determinant()),
        kernel_dim: kdim,
        continuous_dim: continuous_kernel_dim(params, ph.wavevector(dx, dy)),
        sigma_min_ratio: if s[0] > 0.0 { s[2] / s[0] } else { 0.0 },
        diagonalizable,
        eigvec_cond,
        right_kernel: rk,
        left_kernel: lk,
    }
}

/// Stationarity preservation test: the kernel of `E` must have the same
/// dimension as that of `J . k` at every generic, diagonalizable sample.
pub fn det_scan(
    st: &MatrixStencil,
    params: &AcousticParams,
    dx: f64,
    dy: f64,
    samples: &[Phases],
    tol_rel: f64,
) -> SpectralVerdict {
    let reports: Vec<SampleReport> =
        samples.iter().map(|ph| analyze_sample(st, params, dx, dy, *ph, tol_rel)).collect();
    verdict_from(reports)
}

/// Reduces per-sample reports into a verdict.
pub fn verdict_from(samples: Vec<SampleReport>) -> SpectralVerdict {
    let counted: Vec<&SampleReport> = samples.iter().filter(|s| s.generic && s.diagonalizable).collect();
    let withheld = samples.iter().filter(|s| s.generic && !s.diagonalizable).count();
    let sp = !counted.is_empty() && counted.iter().all(|s| s.passes());
    SpectralVerdict { is_stationarity_preserving: sp, samples, withheld }
}

fn frac(x: f64) -> f64 {
    x - x.floor()
}

/// `n` quasi-random generic phases (additive recurrence on the plastic
/// number), each component in the guard band.
pub fn generic_samples(n: usize) -> Vec<Phases> {
    generic_samples_shifted(n, (0.0, 0.0))
}

/// [`generic_samples`] with the sequence rotated by `shift` (fractions of a
/// full period), for independent sample sets.
pub fn generic_samples_shifted(n: usize, shift: (f64, f64)) -> Vec<Phases> {
    let g = 1.324_717_957_244_746_f64;
    let (a1, a2) = (1.0 / g, 1.0 / (g * g));
    let mut out = Vec::with_capacity(n);
    let mut k = 0u64;
    while out.len() < n {
        k += 1;
        let ph = Phases::new(
            (2.0 * frac(0.5 + shift.0 + a1 * k as f64) - 1.0) * PI,
            (2.0 * frac(0.5 + shift.1 + a2 * k as f64) - 1.0) * PI,
        );
        if ph.is_generic() {
            out.push(ph);
        }
    }
    out
}

/// Phases on the two axes (`n` per axis), excluding the origin and `pi`.
pub fn axis_samples(n: usize) -> Vec<Phases> {
    let mut out = Vec::with_capacity(2 * n);
    for k in 0..n {
        let t = GUARD + (PI - 2.0 * GUARD) * (k as f64 + 0.5) / n as f64;
        let t = if k % 2 == 0 { t } else { -t };
        out.push(Phases::new(t, 0.0));
        out.push(Phases::new(0.0, t));
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingReport {
    pub checked: usize,
    pub skipped: usize,
    /// Largest `|w(2c)/w(c) - 2|` over matched nonzero eigenvalues.
    pub max_dev_c: f64,
    /// Largest `|w(eps/2)/w(eps) - 2|`.
    pub max_dev_eps: f64,
    /// Zero eigenvalues stayed zero under both scalings.
    pub kernel_preserved: bool,
    pub passed: bool,
}

/// Matches each nonzero eigenvalue of `base` against `scaled` after the
/// predicted doubling. `None` when the match is ambiguous.
fn scaling_deviation(base: &[Complex<f64>; 3], scaled: &[Complex<f64>; 3], zero_tol: f64) -> Option<(f64, bool)> {
    let zeros_base = base.iter().filter(|z| cabs(**z) <= zero_tol).count();
    let zeros_scaled = scaled.iter().filter(|z| cabs(**z) <= 2.0 * zero_tol).count();
    let mut dev = 0.0f64;
    for w in base.iter().filter(|z| cabs(**z) > zero_tol) {
        let target = w * 2.0;
        let mut d: Vec<(f64, Complex<f64>)> = scaled.iter().map(|s| (cabs(s - target), *s)).collect();
        d.sort_by(|a, b| a.0.total_cmp(&b.0));
        // a runner-up nearly as close as the best makes the pairing ambiguous
        if d[1].0 <= 10.0 * d[0].0 + 1e-9 * cabs(target) && d[1].0 < 0.5 * cabs(target) {
            return None;
        }
        dev = dev.max(cabs(d[0].1 / w - Complex::new(2.0, 0.0)));
    }
    Some((dev, zeros_base == zeros_scaled))
}

/// Checks that the nonzero eigenvalues of `E` are linear in `c` and in `1/eps`.
pub fn eigenvalue_scaling_check<F>(build: F, base: AcousticParams, samples: &[Phases], tol: f64) -> ScalingReport
where
    F: Fn(AcousticParams) -> MatrixStencil,
{
    let s0 = build(base);
    let sc = build(AcousticParams { c: 2.0 * base.c, eps: base.eps });
    let se = build(AcousticParams { c: base.c, eps: 0.5 * base.eps });
    let mut rep = ScalingReport {
        checked: 0,
        skipped: 0,
        max_dev_c: 0.0,
        max_dev_eps: 0.0,
        kernel_preserved: true,
        passed: false,
    };
    for ph in samples {
        let e0 = s0.evolution(ph.thx, ph.thy);
        let zero_tol = 1e-10 * singular_values(&e0)[0];
        let w0 = eigenvalues(&e0);
        let wc = eigenvalues(&sc.evolution(ph.thx, ph.thy));
        let we = eigenvalues(&se.evolution(ph.thx, ph.thy));
        match (scaling_deviation(&w0, &wc, zero_tol), scaling_deviation(&w0, &we, zero_tol)) {
            (Some((dc, kc)), Some((de, ke))) => {
                rep.checked += 1;
                rep.max_dev_c = rep.max_dev_c.max(dc);
                rep.max_dev_eps = rep.max_dev_eps.max(de);
                rep.kernel_preserved &= kc && ke;
            }
            _ => rep.skipped += 1,
        }
    }
    rep.passed = rep.checked > 0 && rep.max_dev_c <= tol && rep.max_dev_eps <= tol && rep.kernel_preserved;
    rep
}

/// Evolution matrix of the dimensionally split scheme written out entry by
/// entry from the scheme's flux form, independent of any stencil assembly.
/// `a = [a1, a2, a3, a4]`.
pub fn dimsplit_evolution_closed_form(params: &AcousticParams, a: [f64; 4], dx: f64, dy: f64, ph: Phases) -> CMatrix3 {
    let [a1, a2, a3, a4] = a;
    let (tx, ty) = (cis(ph.thx), cis(ph.thy));
    let one = Complex::new(1.0, 0.0);
    let zero = Complex::new(0.0, 0.0);
    let mi = Complex::new(0.0, -1.0);
    let dcx = (tx - one / tx) / (2.0 * dx);
    let dcy = (ty - one / ty) / (2.0 * dy);
    let d2x = (tx - 2.0 + one / tx) / (2.0 * dx);
    let d2y = (ty - 2.0 + one / ty) / (2.0 * dy);
    let (c2, ie2) = (params.c * params.c, 1.0 / (params.eps * params.eps));
    Matrix3::new(
        mi * (-d2x * a1),
        zero,
        mi * (dcx * ie2 - d2x * a2),
        zero,
        mi * (-d2y * a1),
        mi * (dcy * ie2 - d2y * a2),
        mi * (dcx * c2 - d2x * a3),
        mi * (dcy * c2 - d2y * a3),
        mi * (-(d2x + d2y) * a4),
    )
}

/// Stationary mode of the dimensionally split scheme with `a1 = 0`:
/// `(a3 d2y - c² dcy, -(a3 d2x - c² dcx), 0)`.
pub fn dimsplit_right_kernel_closed_form(params: &AcousticParams, a3: f64, dx: f64, dy: f64, ph: Phases) -> Vector3<Complex<f64>> {
    let (tx, ty) = (cis(ph.thx), cis(ph.thy));
    let one = Complex::new(1.0, 0.0);
    let c2 = params.c * params.c;
    let dcx = (tx - one / tx) / (2.0 * dx);
    let dcy = (ty - one / ty) / (2.0 * dy);
    let d2x = (tx - 2.0 + one / tx) / (2.0 * dx);
    let d2y = (ty - 2.0 + one / ty) / (2.0 * dy);
    Vector3::new(d2y * a3 - dcy * c2, -(d2x * a3 - dcx * c2), Complex::new(0.0, 0.0))
}

/// `min_lambda |a - lambda b| / |a|` for complex vectors: distance from
/// parallel, zero iff `a` and `b` agree up to complex scaling.
pub fn parallel_residual(a: &[Complex<f64>], b: &[Complex<f64>]) -> f64 {
    let bb: f64 = b.iter().map(|z| z.norm_sqr()).sum();
    let aa: f64 = a.iter().map(|z| z.norm_sqr()).sum();
    if bb == 0.0 || aa == 0.0 {
        return if aa == bb { 0.0 } else { 1.0 };
    }
    let lambda: Complex<f64> = a.iter().zip(b).map(|(x, y)| y.conj() * x).sum::<Complex<f64>>() / bb;
    let r: f64 = a.iter().zip(b).map(|(x, y)| (x - y * lambda).norm_sqr()).sum();
    (r / aa).sqrt()
}
