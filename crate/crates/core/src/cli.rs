//! Subcommand bodies shared by the `curvflow` binary and the tests.
//!
//! Each command returns a process exit code:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success |
//! | 1 | configuration, input or other failure |
//! | 2 | convexity lost during the flow |
//! | 3 | time step fell below `dt_min` |
//! | 4 | a certificate failed |
//! | 5 | not enough curvature growth for singularity analysis |

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::{GeometrySection, RunConfig};
use crate::error::{Error, Result};
use crate::flow::{self, FlowTrace, Snapshot, Termination};
use crate::geometry::AxiSurface;
use crate::identities::{self, AlgebraicReport, Equation, ResidualReport};
use crate::io;
use crate::oracle::{self, VmaxReport};
use crate::pinching::{self, PinchingCertificate, PinchingConstants};
use crate::singularity::{self, BlowupScale, Rescaled, SingularityReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_CONVEXITY: i32 = 2;
pub const EXIT_STEP: i32 = 3;
pub const EXIT_CERTIFICATE: i32 = 4;
pub const EXIT_BLOWUP: i32 = 5;

pub const RUN_CONFIG_FILE: &str = "run_config.json";
pub const TRACE_FILE: &str = "trace.csv";
pub const SNAPSHOT_DIR: &str = "snapshots";
pub const SUMMARY_FILE: &str = "summary.json";
pub const VERIFY_FILE: &str = "verify_report.json";
pub const SINGULARITY_FILE: &str = "singularity_report.json";
pub const RESCALED_DIR: &str = "rescaled";
pub const ORACLE_CSV: &str = "sphere_oracle.csv";
pub const ORACLE_JSON: &str = "sphere_oracle.json";
pub const CONSTANTS_FILE: &str = "constants.json";

const ALGEBRAIC_TOL: f64 = 1e-10;
const SCALE_TOL: f64 = 1e-13;
const ORACLE_TOL: f64 = 1e-10;

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::ConvexityLost { .. } => EXIT_CONVEXITY,
        Error::StepTooSmall { .. } => EXIT_STEP,
        Error::InsufficientBlowup { .. } => EXIT_BLOWUP,
        _ => EXIT_CONFIG,
    }
}

struct Ctx {
    quiet: bool,
}

impl Ctx {
    fn say(&self, msg: impl AsRef<str>) {
        if !self.quiet {
            println!("{}", msg.as_ref());
        }
    }
}

fn finish(result: Result<i32>) -> i32 {
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn output_dir(cfg: Option<&RunConfig>, out: Option<&Path>) -> Result<PathBuf> {
    let dir = out
        .map(Path::to_path_buf)
        .or_else(|| cfg.and_then(|c| c.output.clone()))
        .ok_or_else(|| Error::Config("no output directory: pass --out or set `output`".into()))?;
    std::fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn load(config: &Path) -> Result<RunConfig> {
    RunConfig::load(config)
}

fn surface_with_segments(cfg: &RunConfig, segments: usize) -> Result<AxiSurface> {
    match &cfg.geometry {
        GeometrySection::Sphere { radius, .. } => AxiSurface::sphere(*radius, segments),
        GeometrySection::Spheroid { a, c, .. } => AxiSurface::spheroid(*a, *c, segments),
        GeometrySection::ProfileFile { .. } => Err(Error::Config(
            "refinement ladders need a sphere or spheroid geometry".into(),
        )),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulationSummary {
    pub status: String,
    pub termination: Option<Termination>,
    pub error: Option<String>,
    pub exit_code: i32,
    pub steps: usize,
    pub segments: usize,
    pub sigma: f64,
    pub t_final: f64,
    #[serde(rename = "H_min_final")]
    pub h_min_final: f64,
    #[serde(rename = "H_max_final")]
    pub h_max_final: f64,
    pub gamma_min_final: f64,
    pub gsigma_max_final: f64,
    pub snapshots: usize,
}

fn write_run(dir: &Path, trace: &FlowTrace, snapshots: &[Snapshot]) -> Result<()> {
    io::write_trace(&dir.join(TRACE_FILE), trace)?;
    let snap_dir = dir.join(SNAPSHOT_DIR);
    std::fs::create_dir_all(&snap_dir)?;
    io::write_snapshots(&snap_dir, snapshots)
}

/// Runs the flow and writes `trace.csv`, `snapshots/` and `summary.json`.
pub fn cmd_simulate(config: &Path, out: Option<&Path>, quiet: bool) -> i32 {
    finish(simulate(config, out, &Ctx { quiet }))
}

fn simulate(config: &Path, out: Option<&Path>, ctx: &Ctx) -> Result<i32> {
    let cfg = load(config)?;
    let dir = output_dir(Some(&cfg), out)?;
    let initial = cfg.initial_surface()?;
    let fc = cfg.flow_config()?;
    io::write_json(&dir.join(RUN_CONFIG_FILE), &cfg)?;
    let (trace, snapshots, termination, steps, error) = match flow::run(&initial, &fc) {
        Ok(o) => (o.trace, o.snapshots, Some(o.termination), o.steps, None),
        Err(f) => {
            let steps = f.trace.len().saturating_sub(1);
            (f.trace, f.snapshots, None, steps, Some(f.error))
        }
    };
    if trace.is_empty() {
        return Err(error.unwrap_or_else(|| Error::Degenerate("empty trace".into())));
    }
    write_run(&dir, &trace, &snapshots)?;
    let code = error.as_ref().map_or(EXIT_OK, exit_code);
    let last = trace.last().expect("nonempty trace");
    let summary = SimulationSummary {
        status: match &error {
            None => "ok".into(),
            Some(Error::ConvexityLost { .. }) => "convexity-lost".into(),
            Some(Error::StepTooSmall { .. }) => "step-too-small".into(),
            Some(_) => "failed".into(),
        },
        termination,
        error: error.as_ref().map(|e| e.to_string()),
        exit_code: code,
        steps,
        segments: initial.segments(),
        sigma: fc.sigma,
        t_final: last.t,
        h_min_final: last.h_min,
        h_max_final: last.h_max,
        gamma_min_final: last.gamma_min,
        gsigma_max_final: last.gsigma_max,
        snapshots: snapshots.len(),
    };
    io::write_json(&dir.join(SUMMARY_FILE), &summary)?;
    match &error {
        Some(e) => eprintln!("error: {e}"),
        None => ctx.say(format!(
            "simulate: {} steps, t = {}, H_max = {} ({} snapshots) -> {}",
            steps,
            io::fmt(last.t),
            io::fmt(last.h_max),
            snapshots.len(),
            dir.display()
        )),
    }
    Ok(code)
}

#[derive(Debug, Clone, Serialize)]
pub struct AlgebraicSection {
    pub report: AlgebraicReport,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct LadderSection {
    pub report: ResidualReport,
    pub min_order_ds: f64,
    pub min_order_dt: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundsSection {
    /// Largest relative shortfall `(ψ(t) − H_min(t)) / ψ(t)`.
    pub psi_violation: f64,
    pub psi_violation_row: Option<usize>,
    pub t_final: f64,
    pub existence_time_bound: f64,
    pub existence_ok: bool,
    pub vmax: VmaxReport,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub algebraic: AlgebraicSection,
    pub ladders: Vec<LadderSection>,
    pub run_termination: Option<Termination>,
    pub run_error: Option<String>,
    pub pinching: PinchingCertificate,
    pub bounds: BoundsSection,
    pub pass: bool,
}

/// Residual ladders, algebraic recombinations and monotonicity
/// certificates; `verify_report.json` is always written.
pub fn cmd_verify(config: &Path, out: Option<&Path>, quiet: bool) -> i32 {
    finish(verify(config, out, &Ctx { quiet }))
}

fn ladder_passes(r: &ResidualReport, min_ds: f64, min_dt: f64) -> bool {
    (r.order_ds.exact || r.order_ds.order >= min_ds)
        && (r.order_dt.exact || r.order_dt.order >= min_dt)
}

fn bounds(
    trace: &FlowTrace,
    scale: &BlowupScale,
    tolerance: f64,
    dim_n: u32,
) -> Result<BoundsSection> {
    let rows = trace.rows();
    let h0 = rows[0].h_min;
    let mut worst: f64 = 0.0;
    let mut worst_row = None;
    for (i, r) in rows.iter().enumerate() {
        let Ok(psi) = oracle::psi_bound(r.t, h0, dim_n) else {
            continue;
        };
        let v = (psi - r.h_min) / psi;
        if v > worst {
            worst = v;
            worst_row = Some(i);
        }
    }
    let t_final = rows[rows.len() - 1].t;
    let t_bound = oracle::existence_time_bound(h0, dim_n);
    let existence_ok = t_final <= t_bound + 1e-3;
    let vmax = oracle::vmax_bound_check(trace, scale, tolerance)?;
    Ok(BoundsSection {
        psi_violation: worst,
        psi_violation_row: worst_row,
        t_final,
        existence_time_bound: t_bound,
        existence_ok,
        pass: worst <= tolerance && existence_ok && vmax.pass,
        vmax,
        tolerance,
    })
}

fn verify(config: &Path, out: Option<&Path>, ctx: &Ctx) -> Result<i32> {
    let cfg = load(config)?;
    let dir = output_dir(Some(&cfg), out)?;
    let sp = cfg.speed()?;
    let initial = cfg.initial_surface()?;
    let v = &cfg.verify;

    let algebraic_report = identities::algebraic_checks(&initial, &sp, v.ladder_sigma)?;
    let algebraic = AlgebraicSection {
        pass: algebraic_report.max() <= ALGEBRAIC_TOL,
        report: algebraic_report,
        tolerance: ALGEBRAIC_TOL,
    };

    let ladder_cfg = cfg.ladder();
    let mut ladders = Vec::new();
    for eq in Equation::ALL {
        let report =
            identities::residual_ladder(eq, |n| surface_with_segments(&cfg, n), &sp, &ladder_cfg)?;
        ladders.push(LadderSection {
            pass: ladder_passes(&report, v.min_order_ds, v.min_order_dt),
            report,
            min_order_ds: v.min_order_ds,
            min_order_dt: v.min_order_dt,
        });
    }

    let consts = match cfg.pinching_constants()? {
        Some(c) => c,
        None => PinchingConstants::reference(2),
    };
    let mut fc = cfg.flow_config()?;
    fc.sigma = consts.sigma;
    let (trace, termination, run_error) = match flow::run(&initial, &fc) {
        Ok(o) => (o.trace, Some(o.termination), None),
        Err(f) => (f.trace, None, Some(f.error)),
    };
    if trace.is_empty() {
        return Err(run_error.unwrap_or_else(|| Error::Degenerate("empty trace".into())));
    }
    let tolerance = cfg
        .tolerance_model()
        .tolerance(initial.segments(), &trace, &sp);
    let cert = pinching::certify_monotonicity(&trace, &consts, &sp, tolerance);
    let scale = BlowupScale::new(sp, SCALE_TOL)?;
    let bounds = bounds(&trace, &scale, tolerance, 2)?;

    let pass = algebraic.pass
        && ladders.iter().all(|l| l.pass)
        && cert.pass
        && bounds.pass
        && run_error.is_none();
    let report = VerifyReport {
        algebraic,
        ladders,
        run_termination: termination,
        run_error: run_error.as_ref().map(|e| e.to_string()),
        pinching: cert,
        bounds,
        pass,
    };
    io::write_json(&dir.join(VERIFY_FILE), &report)?;

    let rows = trace.rows();
    let cite = |row: Option<usize>| match row {
        Some(i) => format!("row {i} (t = {})", io::fmt(rows[i].t)),
        None => "no row".into(),
    };
    if !report.algebraic.pass {
        eprintln!(
            "FAIL algebraic recombination: {:e}",
            report.algebraic.report.max()
        );
    }
    for l in report.ladders.iter().filter(|l| !l.pass) {
        eprintln!(
            "FAIL {:?} ladder: order in ds {}, order in dt {}",
            l.report.equation, l.report.order_ds.order, l.report.order_dt.order
        );
    }
    let c = &report.pinching;
    if c.gamma_min_violation > c.tolerance {
        eprintln!(
            "FAIL gamma_min monotonicity: drop {:e} > {:e} at {}",
            c.gamma_min_violation,
            c.tolerance,
            cite(c.gamma_violation_row)
        );
    }
    if c.gsigma_violation > c.tolerance {
        eprintln!(
            "FAIL g_sigma monotonicity: rise {:e} > {:e} at {}",
            c.gsigma_violation,
            c.tolerance,
            cite(c.gsigma_violation_row)
        );
    }
    if c.decay_bound_violation > c.tolerance {
        eprintln!(
            "FAIL pinching decay bound: excess {:e}",
            c.decay_bound_violation
        );
    }
    if !report.bounds.pass {
        eprintln!(
            "FAIL curvature bounds: psi shortfall {:e} at {}, existence ok {}, vmax violation {:e}",
            report.bounds.psi_violation,
            cite(report.bounds.psi_violation_row),
            report.bounds.existence_ok,
            report.bounds.vmax.max_violation
        );
    }
    if let Some(e) = &run_error {
        eprintln!("FAIL flow run: {e}");
    }
    ctx.say(format!(
        "verify: {} -> {}",
        if pass {
            "all certificates pass"
        } else {
            "certificate failure"
        },
        dir.join(VERIFY_FILE).display()
    ));
    Ok(if pass { EXIT_OK } else { EXIT_CERTIFICATE })
}

/// Reads a run directory written by `simulate` and writes
/// `singularity_report.json` and `rescaled/`.
pub fn cmd_singularity(config: Option<&Path>, run_dir: Option<&Path>, quiet: bool) -> i32 {
    finish(singularity_cmd(config, run_dir, &Ctx { quiet }))
}

pub fn analyze_run_dir(cfg: &RunConfig, dir: &Path) -> Result<(SingularityReport, Vec<Rescaled>)> {
    let trace = io::read_trace(&dir.join(TRACE_FILE))?;
    let snapshots: Vec<AxiSurface> = io::read_snapshots(&dir.join(SNAPSHOT_DIR))?
        .into_iter()
        .map(|s| s.surface)
        .collect();
    let scale = BlowupScale::new(cfg.speed()?, SCALE_TOL)?;
    singularity::analyze(&trace, &snapshots, &scale, &cfg.analysis())
}

fn singularity_cmd(config: Option<&Path>, run_dir: Option<&Path>, ctx: &Ctx) -> Result<i32> {
    let dir = run_dir
        .map(Path::to_path_buf)
        .ok_or_else(|| Error::Config("singularity needs the run directory via --out".into()))?;
    let cfg = match config {
        Some(p) => load(p)?,
        None => RunConfig::load(&dir.join(RUN_CONFIG_FILE))?,
    };
    let (report, seq) = analyze_run_dir(&cfg, &dir)?;
    io::write_json(&dir.join(SINGULARITY_FILE), &report)?;
    let rdir = dir.join(RESCALED_DIR);
    std::fs::create_dir_all(&rdir)?;
    for (i, r) in seq.iter().enumerate() {
        io::write_profile(&rdir.join(format!("rescaled_{i:04}.csv")), &r.surface)?;
    }
    io::write_json(&rdir.join("sequence.json"), &seq)?;
    ctx.say(format!(
        "singularity: {:?}, T = {} (+/- {:e}), final roundness {:e}",
        report.classification,
        io::fmt(report.t_est),
        report.t_uncertainty,
        report.verdict.final_roundness
    ));
    Ok(EXIT_OK)
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleSummary {
    pub r0: f64,
    pub dim_n: u32,
    pub alpha: f64,
    pub h0: f64,
    pub tol: f64,
    #[serde(rename = "T_blowup")]
    pub t_blowup: f64,
    #[serde(rename = "T_blowup_refined")]
    pub t_blowup_refined: f64,
    pub refined_tol: f64,
    pub self_consistency: f64,
    pub steps: usize,
    pub existence_time_bound: f64,
}

/// Round-sphere radius history: `sphere_oracle.csv` and
/// `sphere_oracle.json`. Without `--config` the unit sphere at `α = 1`.
pub fn cmd_oracle(config: Option<&Path>, out: Option<&Path>, quiet: bool) -> i32 {
    finish(oracle_cmd(config, out, &Ctx { quiet }))
}

fn oracle_cmd(config: Option<&Path>, out: Option<&Path>, ctx: &Ctx) -> Result<i32> {
    let cfg = config.map(load).transpose()?;
    let dir = output_dir(cfg.as_ref(), out)?;
    let (sp, r0) = match &cfg {
        Some(c) => (
            c.speed()?,
            match c.geometry {
                GeometrySection::Sphere { radius, .. } => radius,
                _ => 1.0,
            },
        ),
        None => (crate::SpeedParams::with_alpha(1.0)?, 1.0),
    };
    let n = 2;
    let sol = oracle::solve_sphere(r0, n, sp, ORACLE_TOL)?;
    let fine = oracle::solve_sphere(r0, n, sp, 0.1 * ORACLE_TOL)?;
    io::write_sphere_dense(&dir.join(ORACLE_CSV), &sol)?;
    let summary = OracleSummary {
        r0,
        dim_n: n,
        alpha: sp.alpha(),
        h0: sp.h0(),
        tol: ORACLE_TOL,
        t_blowup: sol.t_blowup,
        t_blowup_refined: fine.t_blowup,
        refined_tol: 0.1 * ORACLE_TOL,
        self_consistency: (sol.t_blowup - fine.t_blowup).abs(),
        steps: sol.t.len() - 1,
        existence_time_bound: oracle::existence_time_bound(n as f64 / r0, n),
    };
    io::write_json(&dir.join(ORACLE_JSON), &summary)?;
    ctx.say(format!(
        "oracle: T = {} (refined {}), {} steps",
        io::fmt(summary.t_blowup),
        io::fmt(summary.t_blowup_refined),
        summary.steps
    ));
    Ok(EXIT_OK)
}

#[derive(Debug, Clone, Serialize)]
pub struct ConstantsReport {
    pub constants: PinchingConstants,
    pub critical_delta_lower: f64,
    pub critical_delta_upper: f64,
}

/// The `C → ε → δ → σ` chain for the configured speed (`α = 1` without a
/// config).
pub fn cmd_constants(config: Option<&Path>, out: Option<&Path>, quiet: bool) -> i32 {
    finish(constants_cmd(config, out, &Ctx { quiet }))
}

fn constants_cmd(config: Option<&Path>, out: Option<&Path>, ctx: &Ctx) -> Result<i32> {
    let cfg = config.map(load).transpose()?;
    let (alpha, c, sigma) = match &cfg {
        Some(cfg) => {
            let sp = cfg.speed()?;
            if sp.is_reference() {
                return Err(Error::Config("pinching constants need alpha > 0".into()));
            }
            (
                sp.alpha(),
                cfg.pinching.c.value(),
                cfg.pinching.sigma.value(),
            )
        }
        None => (1.0, None, None),
    };
    let n = 2;
    let constants = PinchingConstants::derive(n, alpha, c, sigma)?;
    let (d1, d2) = pinching::critical_deltas(n, alpha);
    let report = ConstantsReport {
        constants,
        critical_delta_lower: d1,
        critical_delta_upper: d2,
    };
    let json = serde_json::to_string_pretty(&report)?;
    if out.is_some() || cfg.as_ref().is_some_and(|c| c.output.is_some()) {
        let dir = output_dir(cfg.as_ref(), out)?;
        io::write_json(&dir.join(CONSTANTS_FILE), &report)?;
    }
    ctx.say(json);
    Ok(EXIT_OK)
}
