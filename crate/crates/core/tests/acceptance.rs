//! Acceptance gate. Runs every criterion, prints one PASS/FAIL line each and
//! exits nonzero if any fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use curvflow::flow::{self, FlowConfig, FlowTrace, RunOutcome, TraceRow};
use curvflow::graphflow::run_graph;
use curvflow::identities::{self, Equation, LadderConfig};
use curvflow::oracle::{self, McfSphere, RadiusHistory, SphereSolution};
use curvflow::pinching::{self, PinchingConstants, ToleranceModel};
use curvflow::singularity::{self, AnalysisConfig, BlowupScale, SingularityType};
use curvflow::{AxiSurface, SpeedParams};

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

// Shared runs -------------------------------------------------------------

struct SphereRun {
    alpha: f64,
    oracle: SphereSolution,
    outcome: RunOutcome,
    segments: usize,
}

struct SpheroidRun {
    segments: usize,
    consts: PinchingConstants,
    outcome: RunOutcome,
}

fn run_sphere(alpha: f64, segments: usize) -> SphereRun {
    let sp = SpeedParams::with_alpha(alpha).unwrap();
    let oracle = oracle::solve_sphere(1.0, 2, sp, 1e-11).unwrap();
    let cfg = FlowConfig::new(sp, 1e3);
    let outcome = flow::run(&AxiSurface::sphere(1.0, segments).unwrap(), &cfg)
        .unwrap_or_else(|f| panic!("sphere run failed: {f}"));
    SphereRun {
        alpha,
        oracle,
        outcome,
        segments,
    }
}

fn run_spheroid(segments: usize) -> SpheroidRun {
    let sp = SpeedParams::with_alpha(1.0).unwrap();
    let consts = PinchingConstants::derive(2, 1.0, None, None).unwrap();
    let mut cfg = FlowConfig::new(sp, 1e3);
    cfg.sigma = consts.sigma;
    cfg.snapshot_h_factor = 1.25;
    let outcome = flow::run(&AxiSurface::spheroid(1.0, 1.1, segments).unwrap(), &cfg)
        .unwrap_or_else(|f| panic!("spheroid run failed: {f}"));
    SpheroidRun {
        segments,
        consts,
        outcome,
    }
}

// Criterion 1 -------------------------------------------------------------

fn criterion_1() -> Verdict {
    let start = Instant::now();
    let mut worst_fd: f64 = 0.0;
    let mut sign_ok = true;
    let mut ratio_worst = f64::NEG_INFINITY;
    for &alpha in &[0.5, 1.0, 2.0] {
        let sp = SpeedParams::new(alpha, std::f64::consts::E).unwrap();
        let f = |h: f64| h * (h + std::f64::consts::E).ln().powf(alpha);
        for i in 0..=900 {
            let h = 1e-3 * 10f64.powf(i as f64 / 100.0);
            let v = sp.values(h);
            // fourth-order central differences of the plain formula
            let d = 1e-3 * h;
            let fd1 =
                (f(h - 2.0 * d) - 8.0 * f(h - d) + 8.0 * f(h + d) - f(h + 2.0 * d)) / (12.0 * d);
            let e = 1e-2 * h;
            let fd2 = (-f(h - 2.0 * e) + 16.0 * f(h - e) - 30.0 * f(h) + 16.0 * f(h + e)
                - f(h + 2.0 * e))
                / (12.0 * e * e);
            worst_fd = worst_fd
                .max((v.f / f(h) - 1.0).abs())
                .max((v.fp / fd1 - 1.0).abs())
                .max((v.fpp / fd2 - 1.0).abs())
                .max(((h * v.fp - v.f) / (h * fd1 - f(h)) - 1.0).abs());
            sign_ok &= v.fp > 0.0 && v.fpp > 0.0 && v.hfp_minus_f >= 0.0;
            ratio_worst = ratio_worst.max(h * v.fpp / v.fp - 2.0 * alpha);
        }
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(
        sign_ok && ratio_worst <= 0.0 && worst_fd <= 1e-6 && secs < 1.0,
        format!(
            "signs ok {sign_ok}, max(Hf''/f' - 2 alpha) = {ratio_worst:.3e}, max rel FD mismatch {worst_fd:.3e}, {secs:.3} s"
        ),
    )
}

// Criterion 2 -------------------------------------------------------------

fn sphere_mismatch(run: &SphereRun) -> f64 {
    let t_cut = 0.9 * run.oracle.t_blowup;
    run.outcome
        .trace
        .rows()
        .iter()
        .filter(|r| r.t <= t_cut)
        .map(|r| {
            let r_num = 2.0 / r.h_max;
            let r_ref = run.oracle.radius(r.t).unwrap();
            (r_num / r_ref - 1.0).abs()
        })
        .fold(0.0, f64::max)
}

fn criterion_2(runs: &[SphereRun], secs: f64) -> Verdict {
    let mut pass = secs < 60.0;
    let mut parts = Vec::new();
    for run in runs {
        let m = sphere_mismatch(run);
        pass &= m <= 1e-3;
        parts.push(format!(
            "alpha {} N {}: max rel radius error {m:.3e}",
            run.alpha, run.segments
        ));
        if run.alpha == 0.0 {
            let t_end = run.outcome.trace.last().unwrap().t;
            let closed = McfSphere { r0: 1.0, dim_n: 2 }.blowup_time();
            pass &= (t_end - 0.25).abs() <= 1e-3 && (run.oracle.t_blowup - closed).abs() <= 1e-9;
            parts.push(format!(
                "observed T {t_end:.6}, oracle T {:.12}",
                run.oracle.t_blowup
            ));
        }
    }
    parts.push(format!("{secs:.1} s"));
    verdict(pass, parts.join("; "))
}

// Criterion 3 -------------------------------------------------------------

/// Largest relative shortfall of `H_min` below `(H_min(0)⁻² − t)^{−1/2}`.
fn psi_shortfall(trace: &FlowTrace) -> f64 {
    let rows = trace.rows();
    let h0 = rows[0].h_min;
    rows.iter()
        .filter_map(|r| {
            let base = 1.0 / (h0 * h0) - r.t;
            (base > 0.0).then(|| {
                let psi = base.powf(-0.5);
                (psi - r.h_min) / psi
            })
        })
        .fold(0.0, f64::max)
}

fn criterion_3(spheres: &[SphereRun], spheroids: &[&SpheroidRun]) -> Verdict {
    let model = ToleranceModel::default();
    let mut pass = true;
    let mut parts = Vec::new();
    let mut check = |name: String,
                     trace: &FlowTrace,
                     segments: usize,
                     alpha: f64,
                     exact_t: Option<f64>| {
        let sp = SpeedParams::with_alpha(alpha).unwrap();
        let tol = model.tolerance(segments, trace, &sp);
        let short = psi_shortfall(trace);
        let h0 = trace.rows()[0].h_min;
        let t_bound = 1.0 / (h0 * h0);
        let t_end = trace.last().unwrap().t;
        let mut ok = short <= tol && t_end <= t_bound + 1e-3;
        if let Some(t) = exact_t {
            ok &= (t_end - t_bound).abs() <= 1e-3 && (t - t_bound).abs() <= 1e-3;
        }
        pass &= ok;
        parts.push(format!(
            "{name}: psi shortfall {short:.2e} (tol {tol:.2e}), T_obs {t_end:.5} <= bound {t_bound:.5}"
        ));
    };
    for r in spheres {
        let exact = (r.alpha == 0.0).then_some(0.25);
        check(
            format!("sphere a={} N={}", r.alpha, r.segments),
            &r.outcome.trace,
            r.segments,
            r.alpha,
            exact,
        );
    }
    for r in spheroids {
        check(
            format!("spheroid N={}", r.segments),
            &r.outcome.trace,
            r.segments,
            1.0,
            None,
        );
    }
    verdict(pass, parts.join("; "))
}

// Criterion 4 -------------------------------------------------------------

fn criterion_4(coarse: &SpheroidRun, fine: &SpheroidRun, fine_secs: f64) -> Verdict {
    let sp = SpeedParams::with_alpha(1.0).unwrap();
    let model = ToleranceModel::default();
    let cert = |r: &SpheroidRun| {
        let tol = model.tolerance(r.segments, &r.outcome.trace, &sp);
        pinching::certify_monotonicity(&r.outcome.trace, &r.consts, &sp, tol)
    };
    let (c, f) = (cert(coarse), cert(fine));
    let reached = fine.outcome.trace.last().unwrap().h_max >= 1e3;
    let viol = |x: &pinching::PinchingCertificate| x.gamma_min_violation.max(x.gsigma_violation);
    let (vc, vf) = (viol(&c), viol(&f));
    // vanishing violations at both levels leave nothing to shrink
    let floor = 1e-14;
    let order = if vc <= floor && vf <= floor {
        f64::INFINITY
    } else {
        (vc.max(floor) / vf.max(floor)).log2()
    };
    let pass = reached
        && f.gamma_min_violation <= f.tolerance
        && f.gsigma_violation <= f.tolerance
        && order >= 1.8
        && fine_secs < 600.0;
    verdict(
        pass,
        format!(
            "sigma {:.6}, N=512: gamma drop {:.2e}, g_sigma rise {:.2e}, tol {:.2e}; N=256 violation {vc:.2e}; order {order}; {fine_secs:.1} s",
            f.sigma, f.gamma_min_violation, f.gsigma_violation, f.tolerance
        ),
    )
}

// Criterion 5 -------------------------------------------------------------

fn criterion_5(sigma: f64) -> Verdict {
    let sp = SpeedParams::with_alpha(1.0).unwrap();
    let cfg = LadderConfig {
        sigma,
        ..LadderConfig::default()
    };
    let mut pass = true;
    let mut parts = Vec::new();
    for eq in Equation::ALL {
        let r = identities::residual_ladder(eq, |n| AxiSurface::spheroid(1.0, 1.1, n), &sp, &cfg)
            .unwrap();
        let ok = r.space_levels.len() >= 3
            && (r.order_ds.exact || r.order_ds.order >= 1.8)
            && (r.order_dt.exact || r.order_dt.order >= 1.0);
        pass &= ok;
        parts.push(format!(
            "{eq:?} ds {:.3} dt {:.3}",
            r.order_ds.order, r.order_dt.order
        ));
    }
    let alg =
        identities::algebraic_checks(&AxiSurface::spheroid(1.0, 1.1, 256).unwrap(), &sp, sigma)
            .unwrap();
    pass &= alg.max() <= 1e-10;
    parts.push(format!("algebraic {:.2e}", alg.max()));
    verdict(pass, parts.join(", "))
}

// Criterion 6 -------------------------------------------------------------

/// `−x⁻² ∫₀¹ u (ln(x/u + e))^{−α} du` by composite Simpson in `u = v²`.
fn j_oracle(x: f64, alpha: f64) -> f64 {
    let m = 20_000;
    let g = |v: f64| {
        if v == 0.0 {
            0.0
        } else {
            let u = v * v;
            2.0 * v * u * (x / u + std::f64::consts::E).ln().powf(-alpha)
        }
    };
    let h = 1.0 / m as f64;
    let mut s = g(0.0) + g(1.0);
    for i in 1..m {
        s += g(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    -s * h / 3.0 / (x * x)
}

fn exact_sphere_trace() -> FlowTrace {
    let rows = (0..4000)
        .map(|i| {
            let t = 0.25 * (1.0 - 10f64.powf(-9.0 * i as f64 / 3999.0));
            let h = 2.0 / (1.0 - 4.0 * t).sqrt();
            TraceRow {
                t,
                dt: 0.0,
                h_min: h,
                h_max: h,
                a2_max: 0.5 * h * h,
                gamma_min: 0.25,
                gsigma_max: 0.0,
                area: 16.0 * std::f64::consts::PI / (h * h),
                volume: 32.0 * std::f64::consts::PI / (3.0 * h * h * h),
            }
        })
        .collect();
    FlowTrace::from_rows(rows)
}

fn criterion_6() -> Verdict {
    let mut pass = true;
    let mut parts = Vec::new();
    let s0 = BlowupScale::new(SpeedParams::with_alpha(0.0).unwrap(), 1e-13).unwrap();
    let mut closed: f64 = 0.0;
    for i in 0..=48 {
        let x = 1e-3 * 10f64.powf(i as f64 / 4.0);
        closed = closed
            .max((s0.j_alpha(x).unwrap() * 2.0 * x * x + 1.0).abs())
            .max((s0.g_alpha(x).unwrap() / (2.0 * x * x) - 1.0).abs());
    }
    pass &= closed <= 1e-10;
    parts.push(format!("J_0/G_0 closed-form rel error {closed:.2e}"));
    for &alpha in &[0.5, 1.0, 2.0] {
        let s = BlowupScale::new(SpeedParams::with_alpha(alpha).unwrap(), 1e-13).unwrap();
        let mut oracle_err: f64 = 0.0;
        for &x in &[0.01, 1.0, 37.0, 1e4] {
            oracle_err = oracle_err.max((s.j_alpha(x).unwrap() / j_oracle(x, alpha) - 1.0).abs());
        }
        let rep = s.sandwich();
        let mut ok = rep.x0.is_some() && oracle_err <= 1e-8;
        if let Some(x0) = rep.x0 {
            let (xs, gs) = s.table();
            for (&x, &g) in xs.iter().zip(gs).filter(|(x, _)| **x >= x0) {
                ok &= 2.0 * x * x < g && g < 3.0 * x * x * x;
                let y = 2.0 * x * x;
                ok &= s.g_alpha_inv(y).unwrap() <= (y / 2.0).sqrt() * (1.0 + 1e-12);
            }
        }
        pass &= ok;
        parts.push(format!(
            "alpha {alpha}: x0 {:?}, J vs Simpson {oracle_err:.1e}",
            rep.x0
        ));
    }
    let trace = exact_sphere_trace();
    let est = singularity::estimate_t(&trace, &s0).unwrap();
    let class = singularity::classify(&trace, est.t_est, &s0, 0.2).unwrap();
    let c0_ok =
        class.kind == SingularityType::Type1 && (class.c0 / 2f64.sqrt() - 1.0).abs() <= 0.02;
    pass &= c0_ok;
    parts.push(format!(
        "exact sphere {:?} C0 {:.6} T {:.9}",
        class.kind, class.c0, est.t_est
    ));
    verdict(pass, parts.join("; "))
}

// Criterion 7 -------------------------------------------------------------

fn criterion_7(run: &SpheroidRun) -> Verdict {
    let sp = SpeedParams::with_alpha(1.0).unwrap();
    let trace = &run.outcome.trace;
    let g0 = trace.rows()[0].gsigma_max;
    let decay = trace
        .rows()
        .iter()
        .map(|r| (0.25 - r.gamma_min) - g0 / sp.log_hat(r.h_min).powf(run.consts.sigma))
        .fold(f64::NEG_INFINITY, f64::max);
    let scale = BlowupScale::new(sp, 1e-13).unwrap();
    let snaps: Vec<AxiSurface> = run
        .outcome
        .snapshots
        .iter()
        .map(|s| s.surface.clone())
        .collect();
    let (report, _) =
        singularity::analyze(trace, &snaps, &scale, &AnalysisConfig::default()).unwrap();
    let v = &report.verdict;
    let h_final = trace.last().unwrap().h_max;
    let pass = decay <= 0.0 && v.roundness_monotone && v.final_roundness <= 0.05 && h_final >= 1e3;
    verdict(
        pass,
        format!(
            "max excess over decay bound {decay:.2e}; {:?}; roundness {:?}; H_max {h_final:.1}",
            report.classification,
            v.roundness
                .iter()
                .map(|r| format!("{r:.2e}"))
                .collect::<Vec<_>>()
        ),
    )
}

// Criterion 8 -------------------------------------------------------------

fn criterion_8() -> Verdict {
    let start = Instant::now();
    let mut pass = true;
    let mut parts = Vec::new();
    for &(alpha, t_end) in &[(0.0, 0.1), (1.0, 0.05)] {
        let sp = SpeedParams::with_alpha(alpha).unwrap();
        let ode = oracle::solve_sphere(1.0, 2, sp, 1e-12).unwrap();
        let mcf = McfSphere { r0: 1.0, dim_n: 2 };
        let source: &dyn RadiusHistory = if alpha == 0.0 { &mcf } else { &ode };
        let hs = [1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0];
        let errs: Vec<f64> = hs
            .iter()
            .map(|&h| run_graph(h, &sp, source, t_end, 0.2).unwrap().max_error)
            .collect();
        let fit = identities::loglog_fit(&hs, &errs, 1e-15);
        let ok = fit.order >= 1.8 && errs[2] < 1e-3;
        pass &= ok;
        parts.push(format!(
            "alpha {alpha} window {t_end}: errors {:?}, order {:.3}",
            errs.iter().map(|e| format!("{e:.2e}")).collect::<Vec<_>>(),
            fit.order
        ));
    }
    let secs = start.elapsed().as_secs_f64();
    pass &= secs < 120.0;
    parts.push(format!("{secs:.1} s"));
    verdict(pass, parts.join("; "))
}

// Criterion 9 -------------------------------------------------------------

fn bisect(mut lo: f64, mut hi: f64, g: impl Fn(f64) -> f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (g(mid) > 0.0) == (g(hi) > 0.0) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

fn criterion_9() -> Verdict {
    let mut parts = Vec::new();
    // ratio (2 Σx² − 1)/(1/4 − x₁x₂) on the segment x₁ + x₂ = 1
    let brute = (1..1000)
        .map(|i| i as f64 / 1000.0)
        .filter(|&x| (x - 0.5).abs() > 1e-3)
        .map(|x| (2.0 * (x * x + (1.0 - x) * (1.0 - x)) - 1.0) / (0.25 - x * (1.0 - x)))
        .fold(f64::INFINITY, f64::min);
    let delta_ok = [0.1, 0.3, 0.45]
        .iter()
        .all(|&e| pinching::pinching_delta(e, 2, 1e-3).unwrap().delta == 4.0)
        && (brute - 4.0).abs() < 1e-9;
    parts.push(format!("delta 4 exact {delta_ok} (brute min {brute:.12})"));

    let star = bisect(1e-9, 0.5, |d| d + (16.0 * d).cbrt() - 0.5);
    let (d1, _) = pinching::critical_deltas(2, 1.0);
    let below = pinching::feasibility_at_delta(star * (1.0 - 1e-9), 2, 1.0).lower_branch <= 0.5;
    let above = pinching::feasibility_at_delta(star * (1.0 + 1e-9), 2, 1.0).lower_branch > 0.5;
    let star_ok = (d1 - star).abs() <= 1e-6 && (star - 7.4e-3).abs() < 1e-4 && below && above;
    parts.push(format!("delta* {d1:.9} vs bisection {star:.9}"));

    let (c, eps, dl, a, nn) = (0.24, 0.4, 4.0, 1.0, 4.0);
    let sigma = pinching::sigma_max(c, eps, dl, a, 2).unwrap();
    // positive root of σ²(1 + 1/(C nⁿ)) + 2ασ − C ε² nⁿ / 4
    let root = bisect(0.0, 1.0, |s| {
        s * s * (1.0 + 1.0 / (c * nn)) + 2.0 * a * s - c * eps * eps * nn / 4.0
    });
    let independent = root.min(c * a * dl);
    let oracle_ok = (sigma - independent).abs() <= 1e-12;
    let literal_ok = (sigma - 0.018857).abs() <= 1e-6;
    parts.push(format!(
        "sigma_max {sigma:.10} vs independent {independent:.10} (agree {oracle_ok}); stated 0.018857 +/- 1e-6 {}",
        if literal_ok { "met" } else { "NOT met" }
    ));
    verdict(
        delta_ok && star_ok && oracle_ok && literal_ok,
        parts.join("; "),
    )
}

// Driver ------------------------------------------------------------------

fn guarded(f: impl FnOnce() -> Verdict) -> Verdict {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(v) => v,
        Err(e) => {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            verdict(false, format!("panicked: {msg}"))
        }
    }
}

fn main() {
    let mut results: Vec<(usize, &str, Verdict)> = Vec::new();
    let mut report = |n: usize, name: &'static str, v: Verdict| {
        println!(
            "criterion {n} [{name}]: {} | {}",
            if v.pass { "PASS" } else { "FAIL" },
            v.detail
        );
        results.push((n, name, v));
    };
    report(1, "speed identities", guarded(criterion_1));

    let start = Instant::now();
    let spheres = catch_unwind(|| vec![run_sphere(0.0, 256), run_sphere(1.0, 256)]);
    let sphere_secs = start.elapsed().as_secs_f64();
    let start = Instant::now();
    let coarse = catch_unwind(|| run_spheroid(256));
    let fine = catch_unwind(|| run_spheroid(512));
    let fine_secs = start.elapsed().as_secs_f64();

    match &spheres {
        Ok(s) => report(2, "sphere oracle", guarded(|| criterion_2(s, sphere_secs))),
        Err(_) => report(
            2,
            "sphere oracle",
            verdict(false, "sphere runs failed".into()),
        ),
    }
    match (&spheres, &coarse, &fine) {
        (Ok(s), Ok(c), Ok(f)) => report(3, "curvature bounds", guarded(|| criterion_3(s, &[c, f]))),
        _ => report(3, "curvature bounds", verdict(false, "runs failed".into())),
    }
    match (&coarse, &fine) {
        (Ok(c), Ok(f)) => report(
            4,
            "pinching preservation",
            guarded(|| criterion_4(c, f, fine_secs)),
        ),
        _ => report(
            4,
            "pinching preservation",
            verdict(false, "spheroid runs failed".into()),
        ),
    }
    let sigma = PinchingConstants::derive(2, 1.0, None, None)
        .map(|c| c.sigma)
        .unwrap_or(0.02);
    report(5, "evolution residuals", guarded(|| criterion_5(sigma)));
    report(6, "blowup scale", guarded(criterion_6));
    match &fine {
        Ok(f) => report(7, "sphericity", guarded(|| criterion_7(f))),
        Err(_) => report(
            7,
            "sphericity",
            verdict(false, "spheroid run failed".into()),
        ),
    }
    report(8, "graph cross-validation", guarded(criterion_8));
    report(9, "constants pipeline", guarded(criterion_9));

    let failed: Vec<usize> = results.iter().filter(|r| !r.2.pass).map(|r| r.0).collect();
    println!(
        "acceptance: {} of {} criteria pass",
        results.len() - failed.len(),
        results.len()
    );
    if !failed.is_empty() {
        println!("acceptance: failing criteria {failed:?}");
        std::process::exit(1);
    }
}
