//! CSV and JSON artifacts.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use statpres_core::experiments::{BenchmarkRun, ConservedOperator, DecayFit};
use statpres_core::fourier::{SampleReport, ScalingReport, SpectralVerdict};
use statpres_core::laurent::certify::{IdentityCheck, MooreScan, NullspaceReport};
use statpres_core::laurent::poly::{rational_to_exact_string, LaurentPoly, LaurentRow};
use statpres_core::time::{CflSweep, TimeSeries};
use statpres_core::{FieldSet, GridSpec, MatrixStencil, Offset, ScalarStencil, Units, VecStencilRow};

use crate::error::{Error, Result};

/// 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub const FIELD_HEADER: [&str; 7] = ["i", "j", "x", "y", "u", "v", "p"];

pub fn write_field_csv<W: Write>(w: W, q: &FieldSet) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(FIELD_HEADER)?;
    let g = q.grid;
    for i in 0..g.nx {
        for j in 0..g.ny {
            let k = g.index(i, j);
            let (x, y) = g.center(i, j);
            out.write_record([
                i.to_string(),
                j.to_string(),
                fmt_f64(x),
                fmt_f64(y),
                fmt_f64(q.u[k]),
                fmt_f64(q.v[k]),
                fmt_f64(q.p[k]),
            ])?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Reads a field dump; the grid is recovered from the indices and the
/// coordinates of the first row and column.
pub fn read_field_csv<R: Read>(r: R) -> Result<FieldSet> {
    let mut rd = csv::Reader::from_reader(r);
    let header: Vec<String> = rd.headers()?.iter().map(str::to_owned).collect();
    if header != FIELD_HEADER {
        return Err(Error::Parse(format!("field header {header:?}")));
    }
    let mut rows = Vec::new();
    for rec in rd.records() {
        let rec = rec?;
        let idx = |k: usize| rec[k].parse::<usize>().map_err(|e| Error::Parse(e.to_string()));
        let val = |k: usize| rec[k].parse::<f64>().map_err(|e| Error::Parse(e.to_string()));
        rows.push((idx(0)?, idx(1)?, val(2)?, val(3)?, val(4)?, val(5)?, val(6)?));
    }
    let nx = rows.iter().map(|r| r.0).max().ok_or_else(|| Error::Parse("empty field".into()))? + 1;
    let ny = rows.iter().map(|r| r.1).max().unwrap_or(0) + 1;
    let first = rows.iter().find(|r| r.0 == 0 && r.1 == 0).ok_or_else(|| Error::Parse("missing cell (0, 0)".into()))?;
    let grid = GridSpec::new(nx, ny, 2.0 * first.2, 2.0 * first.3)?;
    if rows.len() != grid.len() {
        return Err(Error::Parse(format!("{} rows for a {nx}x{ny} grid", rows.len())));
    }
    let mut q = FieldSet::zeros(grid);
    for (i, j, _, _, u, v, p) in rows {
        if i >= nx || j >= ny {
            return Err(Error::Parse(format!("cell ({i}, {j}) outside grid")));
        }
        let k = grid.index(i, j);
        q.u[k] = u;
        q.v[k] = v;
        q.p[k] = p;
    }
    Ok(q)
}

pub fn write_series_csv<W: Write>(w: W, s: &TimeSeries) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["t", "value"])?;
    for (t, v) in s.t.iter().zip(&s.values) {
        out.write_record([fmt_f64(*t), fmt_f64(*v)])?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_series_csv<R: Read>(r: R, name: &str) -> Result<TimeSeries> {
    let mut rd = csv::Reader::from_reader(r);
    let mut s = TimeSeries::new(name);
    for rec in rd.records() {
        let rec = rec?;
        let f = |k: usize| rec[k].parse::<f64>().map_err(|e| Error::Parse(e.to_string()));
        s.push(f(0)?, f(1)?);
    }
    Ok(s)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridJson {
    pub nx: usize,
    pub ny: usize,
    pub dx: f64,
    pub dy: f64,
}

impl From<GridSpec> for GridJson {
    fn from(g: GridSpec) -> Self {
        Self { nx: g.nx, ny: g.ny, dx: g.dx, dy: g.dy }
    }
}

/// Sidecar written next to every CSV artifact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesMeta {
    pub artifact: String,
    pub scheme: String,
    pub eps: f64,
    pub c: f64,
    pub grid: GridJson,
    pub cfl: f64,
    pub normalization: String,
    pub t_end: f64,
    pub dt: f64,
    pub steps: usize,
    pub rerun: String,
}

pub const CFL_NORMALIZATION: &str = "nu = (c/eps) dt / min(dx, dy)";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitsJson {
    pub dx: i32,
    pub dy: i32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StencilEntry {
    pub sx: i32,
    pub sy: i32,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub value: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub matrix: Option<[[f64; 3]; 3]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StencilJson {
    pub radius: i32,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub units: Option<UnitsJson>,
    pub entries: Vec<StencilEntry>,
}

fn units_json(u: Units) -> Option<UnitsJson> {
    (u != Units::NONE).then_some(UnitsJson { dx: u.dx, dy: u.dy })
}

pub fn scalar_stencil_json(st: &ScalarStencil) -> StencilJson {
    StencilJson {
        radius: st.radius(),
        units: units_json(st.units()),
        entries: st
            .entries()
            .map(|(o, c)| StencilEntry { sx: o.sx, sy: o.sy, value: Some(Value::from(c)), matrix: None })
            .collect(),
    }
}

/// Inverse of [`scalar_stencil_json`]; exact decimal strings are accepted.
pub fn scalar_stencil_from_json(js: &StencilJson) -> Result<ScalarStencil> {
    let mut entries = Vec::new();
    for e in &js.entries {
        let v = match &e.value {
            Some(Value::Number(n)) => n.as_f64().ok_or_else(|| Error::Parse("stencil value".into()))?,
            Some(Value::String(s)) => parse_exact(s)?,
            _ => return Err(Error::Parse(format!("entry ({}, {}) has no scalar value", e.sx, e.sy))),
        };
        entries.push((Offset::new(e.sx, e.sy), v));
    }
    let units = js.units.as_ref().map_or(Units::NONE, |u| Units::new(u.dx, u.dy));
    Ok(ScalarStencil::from_entries(entries, units))
}

fn parse_exact(s: &str) -> Result<f64> {
    match s.split_once('/') {
        Some((n, d)) => {
            let n: f64 = n.trim().parse().map_err(|_| Error::Parse(format!("rational {s}")))?;
            let d: f64 = d.trim().parse().map_err(|_| Error::Parse(format!("rational {s}")))?;
            Ok(n / d)
        }
        None => s.trim().parse().map_err(|_| Error::Parse(format!("number {s}"))),
    }
}

pub fn matrix_stencil_json(m: &MatrixStencil) -> StencilJson {
    StencilJson {
        radius: m.radius(),
        units: None,
        entries: m.blocks().map(|(o, b)| StencilEntry { sx: o.sx, sy: o.sy, value: None, matrix: Some(*b) }).collect(),
    }
}

/// Exact Laurent polynomial as a stencil with decimal-string values.
pub fn laurent_json(p: &LaurentPoly) -> StencilJson {
    let radius = p.terms().map(|((a, b), _)| a.abs().max(b.abs())).max().unwrap_or(0);
    StencilJson {
        radius,
        units: units_json(p.units()),
        entries: p
            .terms()
            .map(|((a, b), c)| StencilEntry {
                sx: a,
                sy: b,
                value: Some(Value::String(rational_to_exact_string(c))),
                matrix: None,
            })
            .collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowJson {
    pub u: StencilJson,
    pub v: StencilJson,
}

pub fn row_json(r: &VecStencilRow) -> RowJson {
    RowJson { u: scalar_stencil_json(&r.u), v: scalar_stencil_json(&r.v) }
}

pub fn laurent_row_json(r: &LaurentRow) -> RowJson {
    RowJson { u: laurent_json(&r.u), v: laurent_json(&r.v) }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleJson {
    pub thx: f64,
    pub thy: f64,
    pub absdet: f64,
    pub kernel_dim: usize,
    pub sigma_min_ratio: f64,
    pub continuous_dim: usize,
    pub diagonalizable: bool,
}

impl From<&SampleReport> for SampleJson {
    fn from(s: &SampleReport) -> Self {
        Self {
            thx: s.phases.thx,
            thy: s.phases.thy,
            absdet: s.absdet,
            kernel_dim: s.kernel_dim,
            sigma_min_ratio: s.sigma_min_ratio,
            continuous_dim: s.continuous_dim,
            diagonalizable: s.diagonalizable,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingJson {
    pub checked: usize,
    pub skipped: usize,
    pub max_dev_c: f64,
    pub max_dev_eps: f64,
    pub kernel_preserved: bool,
    pub passed: bool,
}

impl From<&ScalingReport> for ScalingJson {
    fn from(r: &ScalingReport) -> Self {
        Self {
            checked: r.checked,
            skipped: r.skipped,
            max_dev_c: r.max_dev_c,
            max_dev_eps: r.max_dev_eps,
            kernel_preserved: r.kernel_preserved,
            passed: r.passed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConservedJson {
    pub exact: bool,
    pub radius: i32,
    pub nullspace_dim: usize,
    pub u: StencilJson,
    pub v: StencilJson,
    pub p: StencilJson,
}

impl From<&ConservedOperator> for ConservedJson {
    fn from(op: &ConservedOperator) -> Self {
        Self {
            exact: op.exact,
            radius: op.radius,
            nullspace_dim: op.nullspace_dim,
            u: scalar_stencil_json(&op.row.u),
            v: scalar_stencil_json(&op.row.v),
            p: scalar_stencil_json(&op.pressure),
        }
    }
}

pub const SP: &str = "stationarity-preserving";
pub const NOT_SP: &str = "not-stationarity-preserving";

pub fn verdict_label(sp: bool) -> &'static str {
    if sp {
        SP
    } else {
        NOT_SP
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerdictJson {
    pub scheme: String,
    pub params: BTreeMap<String, f64>,
    pub samples: Vec<SampleJson>,
    pub verdict: String,
    pub claim: String,
    pub matches_claim: bool,
    pub withheld: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub scaling: Option<ScalingJson>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub divergence: Option<RowJson>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub conserved: Option<ConservedJson>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub note: Option<String>,
}

pub fn verdict_json(scheme: &str, params: BTreeMap<String, f64>, v: &SpectralVerdict, claim: bool) -> VerdictJson {
    VerdictJson {
        scheme: scheme.to_owned(),
        params,
        samples: v.samples.iter().map(SampleJson::from).collect(),
        verdict: verdict_label(v.is_stationarity_preserving).to_owned(),
        claim: verdict_label(claim).to_owned(),
        matches_claim: v.is_stationarity_preserving == claim,
        withheld: v.withheld,
        scaling: None,
        divergence: None,
        conserved: None,
        note: None,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityJson {
    pub name: String,
    pub holds: bool,
    pub residual: RowJson,
}

impl From<&IdentityCheck> for IdentityJson {
    fn from(c: &IdentityCheck) -> Self {
        Self { name: c.name.clone(), holds: c.holds, residual: laurent_row_json(&c.residual) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NullspaceJson {
    pub operator: String,
    pub radius: i32,
    pub nullspace_dim: usize,
    pub raw_dim: usize,
    pub basis: Vec<RowJson>,
}

pub fn nullspace_json(operator: &str, r: &NullspaceReport) -> NullspaceJson {
    NullspaceJson {
        operator: operator.to_owned(),
        radius: r.radius,
        nullspace_dim: r.dim,
        raw_dim: r.raw_dim,
        basis: r.basis.iter().map(laurent_row_json).collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MooreJson {
    pub members: Vec<(String, usize)>,
    pub positive: Vec<String>,
    pub only_averaged_ray: bool,
}

impl From<&MooreScan> for MooreJson {
    fn from(s: &MooreScan) -> Self {
        Self {
            members: s.members.iter().map(|m| (rational_to_exact_string(&m.beta), m.nullspace_dim)).collect(),
            positive: s.positive.iter().map(rational_to_exact_string).collect(),
            only_averaged_ray: s.only_averaged_ray,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiffusionCheckJson {
    pub c1: f64,
    pub c2: f64,
    pub consistent: bool,
}

/// Certification report; `operator`, `nullspace_dim` and `basis` describe the
/// main search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificationJson {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub operator: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub radius: Option<i32>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub nullspace_dim: Option<usize>,
    pub basis: Vec<RowJson>,
    pub identities: Vec<IdentityJson>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub searches: Vec<NullspaceJson>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub moore_scan: Option<MooreJson>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub diffusion: Option<DiffusionCheckJson>,
    pub failures: Vec<String>,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitJson {
    pub rate: f64,
    pub intercept: f64,
    pub window: [f64; 2],
    pub residual: f64,
    pub points: usize,
}

impl From<&DecayFit> for FitJson {
    fn from(f: &DecayFit) -> Self {
        Self { rate: f.rate, intercept: f.intercept, window: [f.window.0, f.window.1], residual: f.residual, points: f.points }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualsJson {
    /// Stationarity residual of the initial data.
    pub initial_stationarity: f64,
    /// Final over initial `||d_x u||_L1`.
    pub dxu_survival: f64,
    /// Final over initial `||d_y u||_L1`.
    pub dyu_survival: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryJson {
    pub scheme: String,
    pub eps: f64,
    pub c: f64,
    pub grid: GridJson,
    pub cfl: f64,
    pub normalization: String,
    pub t_end: f64,
    pub dt: f64,
    pub steps: usize,
    pub init: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub vortex_fits: Option<bool>,
    pub lambda_fit: Option<FitJson>,
    pub residuals: ResidualsJson,
    pub files: BTreeMap<String, String>,
    pub rerun: String,
}

fn ratio_of(s: &TimeSeries) -> f64 {
    match (s.first(), s.last()) {
        (Some(a), Some(b)) if a > 0.0 => b / a,
        _ => 0.0,
    }
}

pub fn summary_json(
    run: &BenchmarkRun,
    c: f64,
    init: &str,
    vortex_fits: Option<bool>,
    files: BTreeMap<String, String>,
    rerun: String,
) -> SummaryJson {
    SummaryJson {
        scheme: run.scheme.clone(),
        eps: run.eps,
        c,
        grid: run.initial.grid.into(),
        cfl: run.cfl,
        normalization: CFL_NORMALIZATION.to_owned(),
        t_end: run.t_end,
        dt: run.dt,
        steps: run.steps,
        init: init.to_owned(),
        vortex_fits,
        lambda_fit: run.fit.as_ref().map(FitJson::from),
        residuals: ResidualsJson {
            initial_stationarity: run.initial_residual,
            dxu_survival: ratio_of(&run.dxu),
            dyu_survival: ratio_of(&run.dyu),
        },
        files,
        rerun,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPointJson {
    pub cfl: f64,
    pub growth: Option<f64>,
    pub stable: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CflSweepJson {
    pub scheme: String,
    pub eps: f64,
    pub c: f64,
    pub grid: GridJson,
    pub normalization: String,
    pub horizon: usize,
    pub growth_limit: f64,
    pub points: Vec<SweepPointJson>,
    pub max_stable_cfl: Option<f64>,
    pub rerun: String,
}

pub fn sweep_points_json(s: &CflSweep) -> Vec<SweepPointJson> {
    s.points
        .iter()
        .map(|p| SweepPointJson { cfl: p.cfl, growth: p.growth.is_finite().then_some(p.growth), stable: p.stable })
        .collect()
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

/// Pretty JSON on stdout; a closed pipe is not an error.
pub fn print_json<T: Serialize>(value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    match io::stdout().lock().write_all(text.as_bytes()) {
        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

pub fn write_field_file(path: &Path, q: &FieldSet) -> Result<()> {
    write_field_csv(BufWriter::new(File::create(path)?), q)
}

/// Writes `<stem>.csv` and its `<stem>.json` sidecar.
pub fn write_series_files(dir: &Path, stem: &str, s: &TimeSeries, meta: &SeriesMeta) -> Result<(String, String)> {
    let (csv_name, json_name) = (format!("{stem}.csv"), format!("{stem}.json"));
    write_series_csv(BufWriter::new(File::create(dir.join(&csv_name))?), s)?;
    write_json(&dir.join(&json_name), meta)?;
    Ok((csv_name, json_name))
}
