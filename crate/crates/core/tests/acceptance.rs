//! Acceptance suite: one line per criterion, non-zero exit if any fails.

use std::sync::Arc;
use std::time::Instant;

use boussinesq_core::data::{
    build_a0_2d, build_a0_3d, make_linear_data, perturbation, suggested_grid_2d, suggested_grid_3d, Amplitude,
    DataParams2D, DataParams3D,
};
use boussinesq_core::diagnostics::{
    choose_sigma, commutator_check, condition_lhs, energy_identity_check, ConditionParams, EnergyReport, Verdict,
    YOUNG_CONSTANT,
};
use boussinesq_core::linear::{beta, LinearFlow, QuadratureOptions};
use boussinesq_core::lp::DyadicCutoff;
use boussinesq_core::random;
use boussinesq_core::sim::{run, Control, Mode, SimConfig, SimState, Stepper};
use boussinesq_core::{Grid, GridSpec, Norm, SpectralField};

type Outcome = Result<String, String>;

fn verdict(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn grid(spec: GridSpec) -> Arc<Grid> {
    Grid::new(spec).expect("valid grid")
}

fn data_2d(epsilon: f64, spec: GridSpec) -> (Arc<Grid>, SpectralField) {
    let g = grid(spec);
    // the amplitude law is undefined for ε ≥ 1/e; every checked ratio is amplitude-free
    let amplitude = if DataParams2D::new(epsilon).is_ok() { Amplitude::Law } else { Amplitude::Fixed(1.0 / epsilon) };
    let p = DataParams2D { epsilon, amplitude, transition_order: 1 };
    let a0 = build_a0_2d(&p, &g).unwrap();
    (g, a0)
}

fn data_3d(epsilon: f64) -> (Arc<Grid>, SpectralField) {
    let g = grid(suggested_grid_3d(epsilon).unwrap().with_dealias(1.0).unwrap());
    let a0 = build_a0_3d(&DataParams3D::new(epsilon, 2.0).unwrap(), &g).unwrap();
    (g, a0)
}

fn partition_of_unity() -> Outcome {
    let cut = DyadicCutoff::default();
    let mut worst = 0.0f64;
    for i in 0..10_000 {
        let r = 64.0 * i as f64 / 9_999.0;
        let sum: f64 = cut.chi(r) + (0..=8).map(|q| cut.phi(r / 2f64.powi(q))).sum::<f64>();
        worst = worst.max((sum - 1.0).abs());
    }
    verdict(worst <= 1e-12, format!("max defect {worst:.2e} (tol 1e-12)"))
}

fn besov_identity() -> Outcome {
    let (_, a0) = data_2d(0.25, suggested_grid_2d(0.25, 1).unwrap());
    let cut = DyadicCutoff::default();
    let phys = a0.to_physical();
    let mut worst = 0.0f64;
    for (s, p, r, norm) in [(3.0, 2.0, 2.0, Norm::Lp(2.0)), (0.0, f64::INFINITY, 1.0, Norm::Linf)] {
        let b = cut.besov_norm(&a0, s, p, r, false).unwrap().value;
        let l = phys.norm(norm);
        worst = worst.max((b - l).abs() / l);
    }
    verdict(worst <= 1e-10, format!("max relative gap {worst:.2e} (tol 1e-10)"))
}

fn structural_cancellations() -> Outcome {
    let mut lines = Vec::new();
    let mut ok = true;
    let cases: Vec<(Arc<Grid>, SpectralField)> = vec![
        data_2d(0.25, suggested_grid_2d(0.25, 1).unwrap()),
        data_3d(0.15),
    ];
    for (g, a0) in cases {
        let d = make_linear_data(&a0).unwrap();
        let div = d.u0.divergence().unwrap().to_physical().norm(Norm::Linf);
        let up = d.u0.to_physical();
        let gt = d.theta0.gradient_physical();
        let n = g.len();
        let mut cross = 0.0f64;
        for i in 0..n {
            let s: f64 = (0..g.dim()).map(|j| up.component(j)[i] * gt.get(0, j)[i]).sum();
            cross = cross.max(s.abs());
        }
        let scale = up.norm(Norm::Linf) * gt.max_magnitude();
        ok &= div <= 1e-12 && cross <= 1e-12 * scale;
        lines.push(format!("{}D: max|div U0| {div:.1e}, max|U0·∇Θ0|/scale {:.1e}", g.dim(), cross / scale));
    }
    verdict(ok, lines.join("; "))
}

fn fd_order(flow: &LinearFlow, t: f64) -> (Vec<f64>, f64) {
    let (nu, la) = (flow.nu(), flow.lambda());
    let d = flow.grid().dim();
    let buoy = |t: f64| {
        let th = flow.theta_at(t);
        let zero = SpectralField::zeros(flow.grid(), 1);
        let mut parts = vec![&zero; d];
        parts[d - 1] = &th;
        SpectralField::stack(&parts).unwrap().leray_project().unwrap()
    };
    let residuals = |h: f64| -> [f64; 3] {
        let th = flow.theta_at(t + h).sub(&flow.theta_at(t - h)).unwrap().scaled(0.5 / h);
        let r_th = th.add(&flow.theta_at(t).scaled(la)).unwrap().norm(Norm::Hm(3)) / flow.theta_at(t).norm(Norm::Hm(3));
        let u = flow.velocity_at(t + h).sub(&flow.velocity_at(t - h)).unwrap().scaled(0.5 / h);
        let force = buoy(t);
        let r_u = u
            .add(&flow.velocity_at(t).scaled(nu))
            .unwrap()
            .sub(&force)
            .unwrap()
            .norm(Norm::Hm(3))
            / force.norm(Norm::Hm(3));
        let w = flow.vorticity_at(t + h).unwrap().sub(&flow.vorticity_at(t - h).unwrap()).unwrap().scaled(0.5 / h);
        let wforce = force.curl().unwrap();
        let r_w = w
            .add(&flow.vorticity_at(t).unwrap().scaled(nu))
            .unwrap()
            .sub(&wforce)
            .unwrap()
            .norm(Norm::Hm(3))
            / wforce.norm(Norm::Hm(3));
        [r_th, r_u, r_w]
    };
    let a = residuals(1e-2);
    let b = residuals(5e-3);
    let ratios: Vec<f64> = (0..3).map(|i| a[i] / b[i]).collect();
    (ratios, a.iter().cloned().fold(0.0, f64::max))
}

fn linear_closed_form() -> Outcome {
    let mut ok = true;
    let mut lines = Vec::new();
    let (_, a2) = data_2d(0.25, suggested_grid_2d(0.25, 1).unwrap().with_dealias(1.0).unwrap());
    let (_, a3) = data_3d(0.15);
    for (a0, nu, la) in [(&a2, 1.0, 2.0), (&a3, 1.5, 0.5)] {
        let flow = LinearFlow::from_data(&make_linear_data(a0).unwrap(), nu, la).unwrap();
        let (ratios, worst) = fd_order(&flow, 1.0);
        ok &= ratios.iter().all(|r| (3.8..=4.2).contains(r));
        lines.push(format!(
            "{}D ratios Θ/U/W {:.3}/{:.3}/{:.3} (res {worst:.1e})",
            a0.dim(),
            ratios[0],
            ratios[1],
            ratios[2]
        ));
    }
    let mut gap = 0.0f64;
    for i in 0..=1000 {
        let t = 0.01 * i as f64;
        let m = 1.0 + 0.5e-6;
        gap = gap.max((beta(1.0 + 1e-6, 1.0, t) - beta(m, m, t)).abs());
    }
    ok &= gap <= 1e-8;
    lines.push(format!("confluent gap {gap:.1e}"));
    verdict(ok, lines.join("; "))
}

fn ratio_spread(xs: &[f64]) -> f64 {
    let hi = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = xs.iter().cloned().fold(f64::INFINITY, f64::min);
    hi / lo
}

fn scaling_row(a0: &SpectralField, epsilon: f64, tol: f64) -> (f64, f64) {
    let d = make_linear_data(a0).unwrap();
    let flow = LinearFlow::from_data(&d, 1.0, 1.0).unwrap();
    assert!(flow.products_alias_free());
    let q = flow
        .compute_e0_f0(&QuadratureOptions { tol, ..Default::default() })
        .unwrap();
    let l2 = a0.norm(Norm::Hm(0));
    let l1 = a0.norm(Norm::FourierL1);
    (q.e0.value / (epsilon * l2 * l1), q.f0.value / l1)
}

fn scaling() -> Outcome {
    let mut ok = true;
    let mut lines = Vec::new();
    let mut rows2 = Vec::new();
    for eps in [0.4, 0.2, 0.1] {
        let (_, a0) = data_2d(eps, suggested_grid_2d(eps, 1).unwrap().with_dealias(1.0).unwrap());
        rows2.push(scaling_row(&a0, eps, 1e-7));
    }
    let mut rows3 = Vec::new();
    for eps in [0.15, 0.1, 0.075] {
        let (_, a0) = data_3d(eps);
        rows3.push(scaling_row(&a0, eps, 1e-5));
    }
    for (name, rows) in [("2D", &rows2), ("3D", &rows3)] {
        let e: Vec<f64> = rows.iter().map(|r| r.0).collect();
        let f: Vec<f64> = rows.iter().map(|r| r.1).collect();
        let (se, sf) = (ratio_spread(&e), ratio_spread(&f));
        ok &= se <= 4.0 && sf <= 4.0;
        lines.push(format!(
            "{name} E0 ratios {:.3e}/{:.3e}/{:.3e} spread {se:.2}, F0 ratios {:.3e}/{:.3e}/{:.3e} spread {sf:.2}",
            e[0], e[1], e[2], f[0], f[1], f[2]
        ));
    }
    verdict(ok, lines.join("; "))
}

fn reference_flow() -> LinearFlow {
    let (_, a0) = data_2d(0.25, GridSpec::new(2, 16.0, 256).unwrap());
    LinearFlow::from_data(&make_linear_data(&a0).unwrap(), 1.0, 1.0).unwrap()
}

fn global_boundedness() -> Outcome {
    let flow = reference_flow();
    let q = flow.compute_e0_f0(&QuadratureOptions::default()).unwrap();
    let cond = condition_lhs(0.0, 0.0, q.e0.value, q.f0.value, &ConditionParams::default());
    let sigma = choose_sigma(1.0, 1.0, YOUNG_CONSTANT).unwrap();
    let cfg = SimConfig { t_end: 20.0, dt_max: 0.05, stride: 4, mode: Mode::Perturbation, ..Default::default() };
    let out = run(&cfg, SimState::zeros(flow.grid()), Some(&flow), &mut []).unwrap();
    let report = EnergyReport::build(&out.samples, sigma, 1.0, 1.0, cond.lhs);
    let (t_peak, peak) = report.peak_energy();
    let late = report.decay.map(|d| d.rate).unwrap_or(f64::NAN);
    let never = report.verdict == Verdict::NeverExited;
    let ok = never && peak.is_finite() && t_peak < 5.0 && late >= 0.5;
    verdict(
        ok,
        format!(
            "E0 {:.3e}, F0 {:.3e}, eta {:.3e}, sup A {:.3e}, monitor {:?}, peak energy at t = {t_peak:.2}, late decay rate {late:.3}",
            q.e0.value,
            q.f0.value,
            report.eta,
            report.rows.iter().map(|r| r.a).fold(0.0, f64::max),
            report.verdict
        ),
    )
}

fn dual_runs() -> Outcome {
    let flow = reference_flow();
    let g = flow.grid().clone();
    let h3 = 0.5 * flow.theta0().norm(Norm::Hm(3));
    let (v0, th0) = perturbation(&g, h3, 2.0, 17).unwrap();
    let u0 = flow.u0().add(&v0).unwrap();
    let theta_full = flow.theta0().add(&th0).unwrap();
    let base = SimConfig { t_end: 5.0, dt_max: 0.02, stride: 10, ..Default::default() };
    let mut full_states: Vec<(f64, SpectralField)> = Vec::new();
    let mut keep = |s: &SimState| {
        full_states.push((s.t, s.u.clone()));
        Control::Continue
    };
    run(&base, SimState::new(u0.clone(), theta_full).unwrap(), None, &mut [&mut keep]).unwrap();
    let mut worst = 0.0f64;
    let mut idx = 0;
    let mut compare = |s: &SimState| {
        let (t, u) = &full_states[idx];
        assert!((t - s.t).abs() < 1e-9);
        let diff = u.sub(&flow.velocity_at(s.t)).unwrap().sub(&s.u).unwrap();
        worst = worst.max(diff.norm(Norm::Hm(3)));
        idx += 1;
        Control::Continue
    };
    let pcfg = SimConfig { mode: Mode::Perturbation, ..base };
    run(&pcfg, SimState::new(v0, th0).unwrap(), Some(&flow), &mut [&mut compare]).unwrap();
    let rel = worst / u0.norm(Norm::Hm(3));
    verdict(rel <= 1e-8, format!("max_t ‖u − (U+v)‖_H3 / ‖u0‖_H3 = {rel:.2e} (tol 1e-8)"))
}

fn energy_identity() -> Outcome {
    let flow = reference_flow();
    let g = flow.grid().clone();
    let h3 = 0.5 * flow.theta0().norm(Norm::Hm(3));
    let (v0, th0) = perturbation(&g, h3, 2.0, 5).unwrap();
    let sigma = choose_sigma(1.0, 1.0, YOUNG_CONSTANT).unwrap();
    let cfg = SimConfig { t_end: 1.0, dt_max: 0.01, mode: Mode::Perturbation, stride: 1000, ..Default::default() };
    let start = run(&cfg, SimState::new(v0, th0).unwrap(), Some(&flow), &mut []).unwrap().final_state;
    let stepper = Stepper::new(&cfg, Some(&flow)).unwrap();
    let mut rows = Vec::new();
    for dt in [4e-3, 2e-3, 1e-3] {
        let mid = stepper.step(&start, dt).unwrap();
        let next = stepper.step(&mid, dt).unwrap();
        let chk = energy_identity_check([&start, &mid, &next], &flow, sigma).unwrap();
        rows.push((dt, chk.residual, chk.scale));
    }
    let r1 = rows[0].1 / rows[1].1;
    let r2 = rows[1].1 / rows[2].1;
    let last = rows[2];
    let rel = last.1 / last.2;
    let ok = (3.5..=4.5).contains(&r1) && (3.5..=4.5).contains(&r2) && rel < 1e-6;
    verdict(
        ok,
        format!(
            "residuals {:.2e}/{:.2e}/{:.2e}, ratios {r1:.2}/{r2:.2}, residual/(A+B) at dt=1e-3 {rel:.2e} (tol 1e-6)",
            rows[0].1, rows[1].1, rows[2].1
        ),
    )
}

fn commutator_stability() -> Outcome {
    let coarse = grid(GridSpec::new(2, 1.0, 16).unwrap().with_dealias(1.0).unwrap());
    let fine = grid(GridSpec::new(2, 1.0, 32).unwrap().with_dealias(1.0).unwrap());
    let (mut rc, mut rf) = (0.0f64, 0.0f64);
    for seed in 0..100u64 {
        let gfield = random::band_limited(&coarse, 1, 3.0, 2 * seed);
        let ffield = random::band_limited(&coarse, 1, 3.0, 2 * seed + 1);
        rc = rc.max(commutator_check(&gfield, &ffield, 3).unwrap());
        let gf = gfield.transfer(&fine).unwrap();
        let ff = ffield.transfer(&fine).unwrap();
        rf = rf.max(commutator_check(&gf, &ff, 3).unwrap());
    }
    let change = (rf / rc - 1.0).abs();
    verdict(
        rc.is_finite() && rf.is_finite() && change <= 0.2,
        format!("max ratio N=16 {rc:.4}, N=32 {rf:.4}, change {:.1}% (tol 20%)", 100.0 * change),
    )
}

fn integrator_order() -> Outcome {
    let g = grid(GridSpec::new(2, 1.0, 32).unwrap());
    let u0 = random::solenoidal(&g, 4.0, 3).unwrap().scaled(0.5);
    let th0 = random::band_limited(&g, 1, 4.0, 4).scaled(0.5);
    let init = SimState::new(u0, th0).unwrap();
    let solve = |dt: f64| {
        let cfg = SimConfig { nu: 0.5, lambda: 1.0, t_end: 1.0, dt_max: dt, stride: 100_000, ..Default::default() };
        run(&cfg, init.clone(), None, &mut []).unwrap().final_state
    };
    let reference = solve(0.05 / 64.0);
    let dts = [0.05, 0.025, 0.0125, 0.00625];
    let errs: Vec<f64> = dts
        .iter()
        .map(|&dt| {
            let s = solve(dt);
            s.u.sub(&reference.u).unwrap().norm(Norm::Hm(0)) + s.theta.sub(&reference.theta).unwrap().norm(Norm::Hm(0))
        })
        .collect();
    let n = dts.len() as f64;
    let xs: Vec<f64> = dts.iter().map(|d| d.ln()).collect();
    let ys: Vec<f64> = errs.iter().map(|e| e.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let slope = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
        / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
    verdict(
        slope >= 3.8,
        format!(
            "errors {}, slope {slope:.3} (need >= 3.8)",
            errs.iter().map(|e| format!("{e:.2e}")).collect::<Vec<_>>().join("/")
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("1 LP partition of unity", partition_of_unity),
        ("2 annulus Besov identity", besov_identity),
        ("3 structural cancellations", structural_cancellations),
        ("4 linear closed form", linear_closed_form),
        ("5 E0/F0 scaling", scaling),
        ("6 global boundedness run", global_boundedness),
        ("7 full/perturbation equivalence", dual_runs),
        ("8 energy identity", energy_identity),
        ("9 commutator estimate", commutator_stability),
        ("10 integrator order", integrator_order),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, f) in criteria {
        if !filter.is_empty() && !filter.iter().any(|p| name.contains(p.as_str())) {
            continue;
        }
        let start = Instant::now();
        let result = std::panic::catch_unwind(f).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("PASS criterion {name}: {detail} [{secs:.1}s]"),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {name}: {detail} [{secs:.1}s]");
            }
        }
    }
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        std::process::exit(1);
    }
}
