//! Acceptance gate: one pass/fail line per criterion, non-zero exit on any failure.

use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use statpres_core::experiments::{
    conservation_defect, consistency_order, extract_conserved_operator, gresho_vortex, kernel_adapted_state,
    stationarity_residual, vortex_benchmark, vortex_run, BenchmarkSetup, VortexParams,
};
use statpres_core::fourier::{
    analyze_sample, cabs, dimsplit_evolution_closed_form, energy_scaled, kernel_dim, singular_values, dimsplit_right_kernel_closed_form, eigenvalue_scaling_check,
    generic_samples, parallel_residual, Phases,
};
use statpres_core::laurent::certify::{
    consistency_nullspace, moore_symmetry_scan, operator_identity_check, same_span, SearchConstraints,
};
use statpres_core::laurent::poly::{ratio, LaurentRow};
use statpres_core::laurent::taylor::taylor_expand;
use statpres_core::schemes::{catalog, dimsplit_scheme, multid_scheme, roe_scheme, DiffusionParams};
use statpres_core::stencil::operators::{averaged_div, central_div, consistent_diffusion, dimsplit_div};
use statpres_core::time::{cfl_grid, cfl_sweep, forward_euler_step, SWEEP_HORIZON};
use statpres_core::{AcousticParams, Component, FieldSet, GridSpec, SchemeKind};

type Outcome = Result<String, String>;

fn check(cond: bool, what: String) -> Outcome {
    if cond {
        Ok(what)
    } else {
        Err(what)
    }
}

fn all(parts: Vec<Outcome>) -> Outcome {
    let ok = parts.iter().all(|p| p.is_ok());
    let text: Vec<String> = parts.into_iter().map(|p| p.unwrap_or_else(|e| format!("FAILED({e})"))).collect();
    check(ok, text.join("; "))
}

fn lrow(r: &statpres_core::VecStencilRow) -> LaurentRow {
    LaurentRow::from_row(r).expect("dyadic coefficients")
}

fn ac1() -> Outcome {
    let c = SearchConstraints::default();
    let central = consistency_nullspace(&lrow(&central_div()), 1, c).map_err(|e| e.to_string())?;
    let averaged = consistency_nullspace(&lrow(&averaged_div()), 1, c).map_err(|e| e.to_string())?;
    let family = [lrow(&consistent_diffusion(1.0, 0.0)), lrow(&consistent_diffusion(0.0, 1.0))];
    let ids = operator_identity_check().map_err(|e| e.to_string())?;
    let scan = moore_symmetry_scan(16, 8).map_err(|e| e.to_string())?;
    all(vec![
        check(central.dim == 0, format!("central dim {}", central.dim)),
        check(
            averaged.dim == 2 && same_span(&averaged.basis, &family),
            format!("averaged dim {} spans diffusion family", averaged.dim),
        ),
        check(ids.iter().all(|i| i.holds), format!("{} identities exact", ids.len())),
        check(
            scan.only_averaged_ray && scan.positive == vec![ratio(1, 8)],
            format!("scan of {} members positive only at beta=1/8", scan.members.len()),
        ),
    ])
}

fn ac2() -> Outcome {
    let samples = generic_samples(256);
    let (dx, dy) = (0.02, 0.03);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut parts = Vec::new();
    for eps in [1.0, 0.1, 0.01] {
        let p = AcousticParams::new(1.0, eps).unwrap();
        let mut specs = catalog(p, dx, dy);
        for _ in 0..10 {
            let dp = DiffusionParams::new(0.0, rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
            specs.push(dimsplit_scheme(p, dp, dx, dy).unwrap());
        }
        let (mut sp_ok, mut sp_worst, mut roe_ok, mut roe_min) = (true, 0.0f64, true, f64::INFINITY);
        for s in &specs {
            for ph in &samples {
                let r = analyze_sample(&s.stencil, &p, dx, dy, *ph, 1e-12);
                if s.claims.stationarity_preserving {
                    sp_ok &= r.kernel_dim == 1 && r.sigma_min_ratio <= 1e-12;
                    sp_worst = sp_worst.max(r.sigma_min_ratio);
                } else {
                    // raw variables at eps = 1, energy variables otherwise
                    let e = energy_scaled(&s.stencil.evolution(ph.thx, ph.thy), &p);
                    let sv = singular_values(&e);
                    let ratio = if eps == 1.0 { r.sigma_min_ratio } else { sv[2] / sv[0] };
                    roe_ok &= r.kernel_dim == 0 && kernel_dim(&e, 1e-12) == 0 && ratio >= 1e-3;
                    roe_min = roe_min.min(ratio);
                }
            }
        }
        parts.push(check(sp_ok, format!("eps={eps}: SP max sigma ratio {sp_worst:.1e}")));
        parts.push(check(roe_ok, format!("eps={eps}: roe min sigma ratio {roe_min:.2e}")));
    }
    all(parts)
}

fn ac3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut worst_e, mut worst_k) = (0.0f64, 0.0f64);
    for _ in 0..50 {
        let p = AcousticParams::new(rng.random_range(0.5..2.0), rng.random_range(0.01..1.0)).unwrap();
        let (dx, dy) = (rng.random_range(0.01..0.1), rng.random_range(0.01..0.1));
        let a = [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)];
        let ph = Phases::new(rng.random_range(-3.1..3.1), rng.random_range(-3.1..3.1));
        let st = dimsplit_scheme(p, DiffusionParams::new(a[0], a[1], a[2], a[3]), dx, dy).unwrap().stencil;
        let e = st.evolution(ph.thx, ph.thy);
        let cf = dimsplit_evolution_closed_form(&p, a, dx, dy, ph);
        let scale = cf.iter().fold(0.0f64, |m, z| m.max(cabs(*z)));
        worst_e = worst_e.max((e - cf).iter().fold(0.0f64, |m, z| m.max(cabs(*z))) / scale);
        // the right kernel exists for a1 = 0
        let st0 = dimsplit_scheme(p, DiffusionParams::new(0.0, a[1], a[2], a[3]), dx, dy).unwrap().stencil;
        let r = analyze_sample(&st0, &p, dx, dy, ph, 1e-12);
        let k = r.right_kernel.ok_or("no right kernel")?;
        let ck = dimsplit_right_kernel_closed_form(&p, a[2], dx, dy, ph);
        worst_k = worst_k.max(parallel_residual(&k, ck.as_slice()));
    }
    all(vec![
        check(worst_e <= 1e-13, format!("max entry deviation {worst_e:.1e}")),
        check(worst_k <= 1e-10, format!("max kernel misalignment {worst_k:.1e}")),
    ])
}

fn ac4() -> Outcome {
    let n = 64;
    let h = 1.0 / 64.0;
    let g = GridSpec::new(n, n, h, h).unwrap();
    let p = AcousticParams::new(1.0, 0.125).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let psi: Vec<f64> = (0..g.len()).map(|_| rng.random_range(-8i32..=8) as f64).collect();
    let mut parts = Vec::new();
    for s in catalog(p, h, h).into_iter().filter(|s| s.claims.stationarity_preserving) {
        let q0 = kernel_adapted_state(&psi, &s.div_row().unwrap(), g, 1.0).map_err(|e| e.to_string())?;
        let res = stationarity_residual(&s, &q0).map_err(|e| e.to_string())?;
        let dt = statpres_core::time::cfl_dt(&p, &g, 0.4);
        let mut q = q0.clone();
        for step in 1..=1000 {
            q = forward_euler_step(&s, &q, dt, step, 0.0).map_err(|e| e.to_string())?;
        }
        let change = q.max_abs_diff(&q0) / q0.max_abs();
        parts.push(check(res <= 1e-12 && change <= 1e-10, format!("{} residual {res:.1e} drift {change:.1e}", s.name)));
    }
    all(parts)
}

fn random_state(g: GridSpec, rng: &mut ChaCha8Rng) -> FieldSet {
    let mut q = FieldSet::zeros(g);
    for x in q.u.iter_mut().chain(q.v.iter_mut()).chain(q.p.iter_mut()) {
        *x = rng.random_range(-1.0..1.0);
    }
    q
}

fn ac5() -> Outcome {
    let g = GridSpec::unit_square(32, 32).unwrap();
    let p = AcousticParams::new(1.0, 0.1).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut parts = Vec::new();
    for s in catalog(p, g.dx, g.dy).into_iter().filter(|s| s.claims.stationarity_preserving) {
        let op = extract_conserved_operator(&s).map_err(|e| format!("{}: {e}", s.name))?;
        let mut worst = 0.0f64;
        for _ in 0..20 {
            worst = worst.max(conservation_defect(&s, &op, &random_state(g, &mut rng)).map_err(|e| e.to_string())?);
        }
        parts.push(check(worst <= 1e-12, format!("{} defect {worst:.1e}", s.name)));
    }
    let g = GridSpec::unit_square(50, 50).unwrap();
    let p = AcousticParams::new(1.0, 0.01).unwrap();
    let s = multid_scheme(p, g.dx, g.dy);
    let op = extract_conserved_operator(&s).map_err(|e| e.to_string())?;
    let q0 = gresho_vortex(g, &VortexParams::default()).map_err(|e| e.to_string())?;
    let w0 = op.apply(&q0).unwrap();
    let dt = statpres_core::time::cfl_dt(&p, &g, 0.4);
    let mut q = q0.clone();
    for step in 1..=500 {
        q = forward_euler_step(&s, &q, dt, step, 0.0).map_err(|e| e.to_string())?;
    }
    let w = op.apply(&q).unwrap();
    let drift = w.iter().zip(&w0).fold(0.0f64, |m, (a, b)| m.max((a - b).abs())) / (op.l1_norm() * q0.max_abs());
    parts.push(check(drift <= 1e-10, format!("multid vortex 500-step drift {drift:.1e}")));
    all(parts)
}

fn ac6() -> Outcome {
    let g = GridSpec::unit_square(50, 50).unwrap();
    let setup = BenchmarkSetup { probe_every: 10, ..BenchmarkSetup::default() };
    let runs = vortex_benchmark(SchemeKind::Roe, &[1.0, 0.1, 0.01], g, &setup).map_err(|e| e.to_string())?;
    let rates: Vec<f64> = runs.iter().map(|r| r.fit.map_or(f64::NAN, |f| f.rate)).collect();
    let mut parts = Vec::new();
    for w in rates.windows(2) {
        let q = w[1] / w[0];
        parts.push(check((7.0..=13.0).contains(&q), format!("rate ratio {q:.3}")));
    }
    let fixed = BenchmarkSetup { t_end: Some(0.3), ..setup };
    for (kind, want_survive) in [(SchemeKind::LowMach(3), true), (SchemeKind::Multid, true), (SchemeKind::Roe, false)] {
        let r = vortex_run(kind, 0.01, g, &fixed).map_err(|e| e.to_string())?;
        let s = r.survival();
        let ok = if want_survive { s >= 0.9 } else { s <= 0.05 };
        parts.push(check(ok, format!("{} survival {s:.3e}", r.scheme)));
    }
    all(parts)
}

fn ac7() -> Outcome {
    let g = GridSpec::unit_square(50, 50).unwrap();
    let setup = BenchmarkSetup { probe_every: 5, ..BenchmarkSetup::default() };
    let a = vortex_run(SchemeKind::Roe, 0.1, g, &BenchmarkSetup { t_end: Some(1.0), ..setup }).map_err(|e| e.to_string())?;
    let b = vortex_run(SchemeKind::Roe, 0.01, g, &BenchmarkSetup { t_end: Some(0.1), ..setup }).map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    let mut compared = 0;
    for (k, (ta, va)) in a.dxu.t.iter().zip(&a.dxu.values).enumerate() {
        let (Some(tb), Some(vb)) = (b.dxu.t.get(k), b.dxu.values.get(k)) else { break };
        if (ta / 0.1 - tb / 0.01).abs() > 1e-9 * (1.0 + ta / 0.1) {
            return Err(format!("sample times differ after rescaling at index {k}"));
        }
        worst = worst.max((va - vb).abs() / va.abs().max(vb.abs()));
        compared += 1;
    }
    let scaling = eigenvalue_scaling_check(
        |p| roe_scheme(p, g.dx, g.dy).stencil,
        AcousticParams::new(1.0, 0.1).unwrap(),
        &generic_samples(64),
        1e-10,
    );
    all(vec![
        check(compared > 10 && worst <= 0.05, format!("{compared} rescaled samples, max deviation {worst:.1e}")),
        check(
            scaling.passed,
            format!("eigenvalue scaling dev c {:.1e} eps {:.1e} over {} samples", scaling.max_dev_c, scaling.max_dev_eps, scaling.checked),
        ),
    ])
}

fn ac8() -> Outcome {
    let g = GridSpec::unit_square(50, 50).unwrap();
    let p = AcousticParams::new(1.0, 0.01).unwrap();
    let q = gresho_vortex(g, &VortexParams::default()).map_err(|e| e.to_string())?;
    let grid = cfl_grid(0.05, 30);
    let roe = cfl_sweep(&roe_scheme(p, g.dx, g.dy), &q, &grid, SWEEP_HORIZON).map_err(|e| e.to_string())?;
    let md = cfl_sweep(&multid_scheme(p, g.dx, g.dy), &q, &grid, SWEEP_HORIZON).map_err(|e| e.to_string())?;
    let (Some(r), Some(m)) = (roe.max_stable, md.max_stable) else {
        return Err(String::from("no stable cfl found"));
    };
    let ratio = m / r;
    check((1.6..=2.4).contains(&ratio), format!("max stable cfl roe {r:.2} multid {m:.2} ratio {ratio:.3}"))
}

fn ac9() -> Outcome {
    use std::f64::consts::PI;
    let field = |x: f64, y: f64| ((2.0 * PI * x).sin() * (2.0 * PI * y).cos(), (2.0 * PI * y).sin());
    let div = |x: f64, y: f64| 2.0 * PI * ((2.0 * PI * x).cos() * (2.0 * PI * y).cos() + (2.0 * PI * y).cos());
    let o_avg = consistency_order(&averaged_div(), 64, field, div).map_err(|e| e.to_string())?;
    let o_ds = consistency_order(&dimsplit_div(1.0, 1.0), 64, field, div).map_err(|e| e.to_string())?;
    let t = taylor_expand(&lrow(&averaged_div()), 2);
    let iso = t.isotropic(2);
    let expect = [
        ((Component::U, 1, 2), ratio(3, 12)),
        ((Component::U, 3, 0), ratio(2, 12)),
        ((Component::V, 0, 3), ratio(2, 12)),
        ((Component::V, 2, 1), ratio(3, 12)),
    ];
    let taylor_ok = t.isotropic(1).is_empty() && iso.len() == expect.len() && expect.iter().all(|(k, v)| iso.get(k) == Some(v));
    all(vec![
        check(o_avg >= 1.9, format!("averaged order {o_avg:.3}")),
        check((0.9..=1.1).contains(&o_ds), format!("dimsplit(a3=1) order {o_ds:.3}")),
        check(taylor_ok, String::from("second-order Taylor term (3,2,2,3)/12 exact")),
    ])
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("exact certification suite", ac1),
        ("symbol verdicts", ac2),
        ("closed-form evolution matrix and kernel", ac3),
        ("machine-precision stationarity", ac4),
        ("vorticity preservation", ac5),
        ("decay-rate scaling and survival", ac6),
        ("low-Mach / long-time equivalence", ac7),
        ("CFL ratio multid / roe", ac8),
        ("consistency orders", ac9),
    ];
    let mut failed = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let out = f();
        let secs = start.elapsed().as_secs_f64();
        match out {
            Ok(msg) => println!("[PASS] AC{} {name}: {msg} ({secs:.1}s)", k + 1),
            Err(msg) => {
                failed += 1;
                println!("[FAIL] AC{} {name}: {msg} ({secs:.1}s)", k + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
