use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use statpres_core::experiments::{
    benchmark_from, extract_conserved_operator, gresho_vortex, kernel_adapted_state, BenchmarkRun, BenchmarkSetup,
    VortexParams,
};
use statpres_core::fourier::{det_scan, eigenvalue_scaling_check, generic_samples_shifted, KERNEL_TOL};
use statpres_core::laurent::certify::{
    consistency_nullspace, cross_consistency, moore_symmetry_scan, operator_identity_check, same_span,
    SearchConstraints,
};
use statpres_core::laurent::poly::LaurentRow;
use statpres_core::schemes::catalog as scheme_catalog;
use statpres_core::stencil::operators::{averaged_div, central_div, consistent_diffusion, dimsplit_div};
use statpres_core::time::{cfl_grid, cfl_sweep, step_plan, StepControl, SWEEP_GROWTH, SWEEP_HORIZON};
use statpres_core::{AcousticParams, FieldSet, SchemeKind, SchemeSpec};

use crate::cli::{Init, Settings};
use crate::error::{Error, Exit, Result};
use crate::formats::{
    self, laurent_row_json, nullspace_json, print_json, row_json, summary_json, sweep_points_json, verdict_json,
    write_field_file, write_json, write_series_files, CertificationJson, CflSweepJson, ConservedJson,
    DiffusionCheckJson, FitJson, IdentityJson, MooreJson, ScalingJson, SeriesMeta, CFL_NORMALIZATION,
};

/// Tolerance on the eigenvalue scaling check.
const SCALING_TOL: f64 = 1e-10;
/// Samples used by the eigenvalue scaling check.
const SCALING_SAMPLES: usize = 64;
/// CFL grid of `simulate --cfl-sweep`: 0.05, 0.10, ..., 1.50.
const SWEEP_STEP: f64 = 0.05;
const SWEEP_POINTS: usize = 30;
/// Magnitude bound of the integer streamfunction used by `--init stream`.
const STREAM_AMPLITUDE: i32 = 8;

fn out_dir(s: &Settings) -> Result<Option<&Path>> {
    match &s.out {
        Some(p) => {
            fs::create_dir_all(p)?;
            Ok(Some(p.as_path()))
        }
        None => Ok(None),
    }
}

/// Seed 0 keeps the canonical sample set; other seeds rotate it.
fn sample_shift(seed: u64) -> (f64, f64) {
    if seed == 0 {
        return (0.0, 0.0);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (rng.random::<f64>(), rng.random::<f64>())
}

fn build(s: &Settings, name: &str, eps: f64) -> Result<(SchemeKind, SchemeSpec)> {
    let kind = s.kind(name)?;
    let params = AcousticParams::new(s.c, eps).map_err(|e| Error::Usage(e.to_string()))?;
    let spec = kind.build(params, s.grid.dx, s.grid.dy).map_err(|e| Error::Usage(e.to_string()))?;
    Ok((kind, spec))
}

fn param_map(spec: &SchemeSpec) -> BTreeMap<String, f64> {
    let mut m = BTreeMap::new();
    m.insert("c".into(), spec.params.c);
    m.insert("eps".into(), spec.params.eps);
    m.insert("dx".into(), spec.dx);
    m.insert("dy".into(), spec.dy);
    if let Some(d) = spec.diffusion {
        for (k, v) in ["a1", "a2", "a3", "a4"].into_iter().zip(d.as_array()) {
            m.insert(k.into(), v);
        }
    }
    m
}

pub fn analyze(s: &Settings) -> Result<Exit> {
    let name = s.scheme()?;
    let eps = s.single_eps()?;
    let (kind, spec) = build(s, name, eps)?;
    let samples = generic_samples_shifted(s.k_samples, sample_shift(s.seed));
    let verdict = det_scan(&spec.stencil, &spec.params, spec.dx, spec.dy, &samples, KERNEL_TOL);
    let claim = spec.claims.stationarity_preserving;
    let mut js = verdict_json(&spec.name, param_map(&spec), &verdict, claim);
    let mut notes = Vec::new();

    if matches!(kind, SchemeKind::Dimsplit(_)) {
        notes.push("eigenvalue scaling skipped: fixed diffusion entries do not scale with c/eps".to_string());
    } else {
        let (dx, dy) = (spec.dx, spec.dy);
        let n = SCALING_SAMPLES.min(samples.len());
        let rep = eigenvalue_scaling_check(
            |p| kind.build(p, dx, dy).expect("parameters validated").stencil,
            spec.params,
            &samples[..n],
            SCALING_TOL,
        );
        js.scaling = Some(ScalingJson::from(&rep));
    }
    if verdict.is_stationarity_preserving {
        js.divergence = spec.div_row().map(|r| row_json(&r));
        match extract_conserved_operator(&spec) {
            Ok(op) => js.conserved = Some(ConservedJson::from(&op)),
            Err(e) => notes.push(format!("conserved operator: {e}")),
        }
    }
    if !notes.is_empty() {
        js.note = Some(notes.join("; "));
    }

    if let Some(dir) = out_dir(s)? {
        write_json(&dir.join("verdict.json"), &js)?;
    }
    print_json(&js)?;
    eprintln!(
        "{}: {} (claim {}), {} samples, {} withheld",
        js.scheme,
        js.verdict,
        js.claim,
        js.samples.len(),
        js.withheld
    );
    Ok(if js.matches_claim { Exit::Pass } else { Exit::CertificationFailure })
}

fn divergence_row(s: &Settings, which: &str) -> Result<(String, LaurentRow)> {
    let (label, row) = match which {
        "central" => ("central_div".to_string(), central_div()),
        "averaged" => ("averaged_div".to_string(), averaged_div()),
        "dimsplit" => {
            let a3 = s.a[2].unwrap_or(1.0);
            (format!("dimsplit_div(a3={a3}, c={})", s.c), dimsplit_div(a3, s.c))
        }
        other => return Err(Error::Usage(format!("unknown divergence {other:?} (central | averaged | dimsplit)"))),
    };
    let row = LaurentRow::from_row(&row).map_err(|e| Error::Usage(e.to_string()))?;
    Ok((label, row))
}

pub fn certify(s: &Settings) -> Result<Exit> {
    if s.radius < 1 {
        return Err(Error::Usage("--radius must be at least 1".into()));
    }
    let mut rep = CertificationJson {
        operator: None,
        radius: None,
        nullspace_dim: None,
        basis: Vec::new(),
        identities: Vec::new(),
        searches: Vec::new(),
        moore_scan: None,
        diffusion: None,
        failures: Vec::new(),
        passed: true,
    };
    let mut failed_identities = Vec::new();

    let run_identities = s.divergence.is_none() || s.identity_only;
    if run_identities {
        for c in operator_identity_check()? {
            if !c.holds {
                failed_identities.push(c.clone());
                rep.failures.push(format!("identity {} does not hold", c.name));
            }
            rep.identities.push(IdentityJson::from(&c));
        }
    }

    if !s.identity_only {
        match &s.divergence {
            Some(which) => {
                let (label, row) = divergence_row(s, which)?;
                let r = consistency_nullspace(&row, s.radius, SearchConstraints::default())?;
                rep.operator = Some(label.clone());
                rep.radius = Some(r.radius);
                rep.nullspace_dim = Some(r.dim);
                rep.basis = r.basis.iter().map(laurent_row_json).collect();
                rep.searches.push(nullspace_json(&label, &r));
            }
            None => {
                let cons = SearchConstraints::default();
                let (_, central) = divergence_row(s, "central")?;
                let (_, averaged) = divergence_row(s, "averaged")?;
                let rc = consistency_nullspace(&central, s.radius, cons)?;
                let ra = consistency_nullspace(&averaged, s.radius, cons)?;
                if rc.dim != 0 {
                    rep.failures.push(format!("central divergence admits {} consistent diffusions", rc.dim));
                }
                let family = [
                    LaurentRow::from_row(&consistent_diffusion(1.0, 0.0))?,
                    LaurentRow::from_row(&consistent_diffusion(0.0, 1.0))?,
                ];
                if ra.dim != 2 || !same_span(&ra.basis, &family) {
                    rep.failures.push(format!("averaged divergence: dimension {}, expected the two-member family", ra.dim));
                }
                let scan = moore_symmetry_scan(16, 8)?;
                if !scan.only_averaged_ray {
                    rep.failures.push("symmetric scan is positive off the averaged divergence".into());
                }
                rep.moore_scan = Some(MooreJson::from(&scan));
                rep.operator = Some("averaged_div".into());
                rep.radius = Some(ra.radius);
                rep.nullspace_dim = Some(ra.dim);
                rep.basis = ra.basis.iter().map(laurent_row_json).collect();
                rep.searches.push(nullspace_json("central_div", &rc));
                rep.searches.push(nullspace_json("averaged_div", &ra));
            }
        }
    }

    if s.c1.is_some() || s.c2.is_some() {
        let (c1, c2) = (s.c1.unwrap_or(0.0), s.c2.unwrap_or(0.0));
        let b = LaurentRow::from_row(&consistent_diffusion(c1, c2)).map_err(|e| Error::Usage(e.to_string()))?;
        let a = LaurentRow::from_row(&averaged_div())?;
        let consistent = cross_consistency(&b, &a);
        if !consistent {
            rep.failures.push(format!("consistent diffusion ({c1}, {c2}) is not consistent"));
        }
        rep.diffusion = Some(DiffusionCheckJson { c1, c2, consistent });
    }

    rep.passed = rep.failures.is_empty();
    if let Some(dir) = out_dir(s)? {
        write_json(&dir.join("certification.json"), &rep)?;
    }
    print_json(&rep)?;
    for c in &failed_identities {
        eprintln!("identity failed: {}", c.name);
        eprintln!("residual: {}", serde_json::to_string(&laurent_row_json(&c.residual))?);
    }
    for f in &rep.failures {
        eprintln!("FAIL: {f}");
    }
    Ok(if rep.passed { Exit::Pass } else { Exit::CertificationFailure })
}

fn initial_state(s: &Settings, spec: &SchemeSpec) -> Result<(FieldSet, Option<bool>)> {
    match s.init {
        Init::Vortex => {
            let vp = VortexParams::default();
            Ok((gresho_vortex(s.grid, &vp)?, Some(vp.fits(&s.grid))))
        }
        Init::Stream => {
            let row = spec
                .div_row()
                .ok_or_else(|| Error::Usage(format!("--init stream needs a stationarity-preserving scheme, not {}", spec.name)))?;
            let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
            let psi: Vec<f64> =
                (0..s.grid.len()).map(|_| rng.random_range(-STREAM_AMPLITUDE..=STREAM_AMPLITUDE) as f64).collect();
            Ok((kernel_adapted_state(&psi, &row, s.grid, 1.0)?, None))
        }
    }
}

fn setup(s: &Settings) -> BenchmarkSetup {
    BenchmarkSetup {
        c: s.c,
        cfl: s.cfl,
        t_end: s.t_end,
        probe_every: s.probe_every,
        vortex: VortexParams::default(),
    }
}

fn meta(s: &Settings, run: &BenchmarkRun, artifact: &str, rerun: &str) -> SeriesMeta {
    SeriesMeta {
        artifact: artifact.to_owned(),
        scheme: run.scheme.clone(),
        eps: run.eps,
        c: s.c,
        grid: s.grid.into(),
        cfl: run.cfl,
        normalization: CFL_NORMALIZATION.to_owned(),
        t_end: run.t_end,
        dt: run.dt,
        steps: run.steps,
        rerun: rerun.to_owned(),
    }
}

/// Series, field dumps (each with a sidecar) and the summary.
fn write_run(dir: &Path, s: &Settings, run: &BenchmarkRun, vortex_fits: Option<bool>, rerun: &str) -> Result<formats::SummaryJson> {
    fs::create_dir_all(dir)?;
    let mut files = BTreeMap::new();
    for series in [&run.dxu, &run.dyu] {
        let (c, j) = write_series_files(dir, &series.name, series, &meta(s, run, &series.name, rerun))?;
        files.insert(series.name.clone(), c);
        files.insert(format!("{}_meta", series.name), j);
    }
    for (stem, q) in [("field_initial", &run.initial), ("field_final", &run.final_state)] {
        let name = format!("{stem}.csv");
        write_field_file(&dir.join(&name), q)?;
        let side = format!("{stem}.json");
        write_json(&dir.join(&side), &meta(s, run, stem, rerun))?;
        files.insert(stem.to_owned(), name);
        files.insert(format!("{stem}_meta"), side);
    }
    files.insert("summary".into(), "summary.json".into());
    let sum = summary_json(run, s.c, s.init.name(), vortex_fits, files, rerun.to_owned());
    write_json(&dir.join("summary.json"), &sum)?;
    Ok(sum)
}

fn last_stable_time(spec: &SchemeSpec, s: &Settings, time: f64) -> f64 {
    let t_end = s.t_end.unwrap_or(30.0 * spec.params.eps / spec.params.c);
    let dt = StepControl::new(s.cfl, t_end)
        .ok()
        .and_then(|c| step_plan(&spec.params, &s.grid, &c.with_max_steps(usize::MAX)).ok())
        .map_or(0.0, |(_, dt)| dt);
    (time - dt).max(0.0)
}

pub fn simulate(s: &Settings) -> Result<Exit> {
    let name = s.scheme()?;
    let eps = s.single_eps()?;
    let (_, spec) = build(s, name, eps)?;
    let (q0, vortex_fits) = initial_state(s, &spec)?;
    let rerun = s.rerun("simulate", name, eps);

    if s.cfl_sweep {
        let sweep = cfl_sweep(&spec, &q0, &cfl_grid(SWEEP_STEP, SWEEP_POINTS), SWEEP_HORIZON)?;
        let js = CflSweepJson {
            scheme: spec.name.clone(),
            eps,
            c: s.c,
            grid: s.grid.into(),
            normalization: CFL_NORMALIZATION.to_owned(),
            horizon: SWEEP_HORIZON,
            growth_limit: SWEEP_GROWTH,
            points: sweep_points_json(&sweep),
            max_stable_cfl: sweep.max_stable,
            rerun,
        };
        if let Some(dir) = out_dir(s)? {
            write_json(&dir.join("cfl_sweep.json"), &js)?;
        }
        print_json(&js)?;
        match sweep.max_stable {
            Some(c) => eprintln!("{}: max stable cfl {c}", spec.name),
            None => eprintln!("{}: unstable at every cfl tried", spec.name),
        }
        return Ok(Exit::Pass);
    }

    let run = match benchmark_from(&spec, q0, &setup(s)) {
        Ok(r) => r,
        Err(statpres_core::Error::Unstable { step, time }) => {
            eprintln!(
                "{}: unstable at step {step} (t = {time}); last stable time {}",
                spec.name,
                last_stable_time(&spec, s, time)
            );
            return Ok(Exit::Unstable);
        }
        Err(e) => return Err(e.into()),
    };
    let sum = match out_dir(s)? {
        Some(dir) => write_run(dir, s, &run, vortex_fits, &rerun)?,
        None => summary_json(&run, s.c, s.init.name(), vortex_fits, BTreeMap::new(), rerun),
    };
    print_json(&sum)?;
    let rate = sum.lambda_fit.as_ref().map_or("none".to_string(), |f| format!("{:.6e}", f.rate));
    eprintln!(
        "{}: {} steps, dt {:.3e}, decay rate {rate}, survival {:.6}",
        sum.scheme, sum.steps, sum.dt, sum.residuals.dxu_survival
    );
    Ok(Exit::Pass)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepEntry {
    pub scheme: String,
    pub eps: f64,
    pub status: String,
    pub steps: Option<usize>,
    pub dt: Option<f64>,
    pub lambda_fit: Option<FitJson>,
    pub survival: Option<f64>,
    pub unstable_at: Option<f64>,
    pub dir: Option<String>,
    pub rerun: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepJson {
    pub grid: formats::GridJson,
    pub c: f64,
    pub cfl: f64,
    pub normalization: String,
    pub entries: Vec<SweepEntry>,
}

pub const SWEEP_SCHEMES: [&str; 3] = ["roe", "lowmach3", "multid"];
pub const SWEEP_EPS: [f64; 3] = [1.0, 0.1, 0.01];

pub fn sweep(s: &Settings) -> Result<Exit> {
    let schemes: Vec<String> = s.schemes.clone().unwrap_or_else(|| SWEEP_SCHEMES.map(String::from).to_vec());
    let eps_list = s.eps.clone().unwrap_or_else(|| SWEEP_EPS.to_vec());
    let mut points = Vec::new();
    for name in &schemes {
        for &eps in &eps_list {
            let (_, spec) = build(s, name, eps)?;
            points.push(spec);
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(s.jobs)
        .build()
        .map_err(|e| Error::Usage(format!("thread pool: {e}")))?;
    let runs: Vec<std::result::Result<(BenchmarkRun, Option<bool>), statpres_core::Error>> = pool.install(|| {
        points
            .par_iter()
            .map(|spec| {
                let vp = VortexParams::default();
                let q0 = gresho_vortex(s.grid, &vp)?;
                benchmark_from(spec, q0, &setup(s)).map(|r| (r, Some(vp.fits(&s.grid))))
            })
            .collect()
    });

    let dir = out_dir(s)?.map(Path::to_path_buf);
    let mut entries = Vec::new();
    let mut any_unstable = false;
    for (spec, res) in points.iter().zip(runs) {
        let eps = spec.params.eps;
        let rerun = s.rerun("simulate", &spec.name, eps);
        let mut e = SweepEntry {
            scheme: spec.name.clone(),
            eps,
            status: "ok".into(),
            steps: None,
            dt: None,
            lambda_fit: None,
            survival: None,
            unstable_at: None,
            dir: None,
            rerun,
        };
        match res {
            Ok((run, fits)) => {
                e.steps = Some(run.steps);
                e.dt = Some(run.dt);
                e.lambda_fit = run.fit.as_ref().map(FitJson::from);
                e.survival = Some(run.survival());
                if let Some(d) = &dir {
                    let sub = format!("{}_eps{}", spec.name, eps);
                    write_run(&d.join(&sub), s, &run, fits, &e.rerun)?;
                    e.dir = Some(sub);
                }
            }
            Err(statpres_core::Error::Unstable { time, .. }) => {
                any_unstable = true;
                e.status = "unstable".into();
                e.unstable_at = Some(time);
            }
            Err(err) => return Err(err.into()),
        }
        eprintln!(
            "{:>9} eps {:<6} {:>8} rate {:>14} survival {}",
            e.scheme,
            e.eps,
            e.status,
            e.lambda_fit.as_ref().map_or("-".into(), |f| format!("{:.6e}", f.rate)),
            e.survival.map_or("-".into(), |x| format!("{x:.6}"))
        );
        entries.push(e);
    }
    let js = SweepJson {
        grid: s.grid.into(),
        c: s.c,
        cfl: s.cfl,
        normalization: CFL_NORMALIZATION.to_owned(),
        entries,
    };
    if let Some(d) = &dir {
        write_json(&d.join("sweep.json"), &js)?;
    }
    print_json(&js)?;
    Ok(if any_unstable { Exit::Unstable } else { Exit::Pass })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub name: String,
    pub family: String,
    pub params: BTreeMap<String, f64>,
    pub stationarity_preserving: bool,
    pub cfl_limit: Option<f64>,
}

pub fn catalog(s: &Settings) -> Result<Exit> {
    let eps = s.single_eps()?;
    let params = AcousticParams::new(s.c, eps).map_err(|e| Error::Usage(e.to_string()))?;
    let entries: Vec<CatalogEntry> = scheme_catalog(params, s.grid.dx, s.grid.dy)
        .iter()
        .map(|spec| CatalogEntry {
            name: spec.name.clone(),
            family: spec.family.name().to_owned(),
            params: param_map(spec),
            stationarity_preserving: spec.claims.stationarity_preserving,
            cfl_limit: spec.claims.cfl_limit,
        })
        .collect();
    println!("{:<10} {:<10} {:>10} {:>10} {:>10} {:>10}  {:<4} cfl", "name", "family", "a1", "a2", "a3", "a4", "SP");
    for e in &entries {
        let a = |k: &str| e.params.get(k).map_or("-".to_string(), |v| format!("{v}"));
        println!(
            "{:<10} {:<10} {:>10} {:>10} {:>10} {:>10}  {:<4} {}",
            e.name,
            e.family,
            a("a1"),
            a("a2"),
            a("a3"),
            a("a4"),
            if e.stationarity_preserving { "yes" } else { "no" },
            e.cfl_limit.map_or("-".to_string(), |c| c.to_string())
        );
    }
    if let Some(dir) = out_dir(s)? {
        write_json(&dir.join("catalog.json"), &entries)?;
    }
    Ok(Exit::Pass)
}
