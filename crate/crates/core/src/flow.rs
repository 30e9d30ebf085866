//! Explicit time stepping of `∂_t F = −f(H) ν` on axisymmetric profiles.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{gamma_extrema, AxiSurface, CurvatureField};
use crate::jet::UMBILIC_GAMMA;
use crate::speed::SpeedParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Integrator {
    Euler,
    Midpoint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowConfig {
    pub speed: SpeedParams,
    pub cfl: f64,
    pub h_stop: f64,
    pub dt_min: f64,
    /// Flow-time cadence of stored snapshots.
    pub snapshot_every: f64,
    /// Also snapshot whenever `H_max` has grown by this factor since the
    /// previous snapshot. Values `<= 1` disable the rule.
    pub snapshot_h_factor: f64,
    pub redistribute_every: usize,
    pub max_steps: usize,
    /// Exponent of the `g_σ` column in the trace.
    pub sigma: f64,
    pub integrator: Integrator,
    /// Overrides the stability-limited step when set.
    pub forced_dt: Option<f64>,
}

impl FlowConfig {
    pub fn new(speed: SpeedParams, h_stop: f64) -> Self {
        Self {
            speed,
            cfl: 0.2,
            h_stop,
            dt_min: 1e-14,
            snapshot_every: f64::INFINITY,
            snapshot_h_factor: 1.25,
            redistribute_every: 20,
            max_steps: 50_000_000,
            sigma: 0.0,
            integrator: Integrator::Midpoint,
            forced_dt: None,
        }
    }

    pub fn validate(&self, initial_h_max: f64) -> Result<()> {
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(Error::Config(format!(
                "flow.cfl must lie in (0, 1], got {}",
                self.cfl
            )));
        }
        if !(self.h_stop > initial_h_max) {
            return Err(Error::Config(format!(
                "flow.h_stop = {} must exceed the initial H_max = {initial_h_max}",
                self.h_stop
            )));
        }
        if !(self.dt_min > 0.0) {
            return Err(Error::Config(format!(
                "flow.dt_min must be positive, got {}",
                self.dt_min
            )));
        }
        if self.redistribute_every == 0 {
            return Err(Error::Config("flow.redistribute_every must be >= 1".into()));
        }
        if !(self.sigma >= 0.0) {
            return Err(Error::Config(format!(
                "sigma must be >= 0, got {}",
                self.sigma
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub t: f64,
    pub dt: f64,
    #[serde(rename = "H_min")]
    pub h_min: f64,
    #[serde(rename = "H_max")]
    pub h_max: f64,
    #[serde(rename = "A2_max")]
    pub a2_max: f64,
    pub gamma_min: f64,
    pub gsigma_max: f64,
    pub area: f64,
    pub volume: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct FlowTrace {
    rows: Vec<TraceRow>,
}

impl FlowTrace {
    pub fn from_rows(rows: Vec<TraceRow>) -> Self {
        Self { rows }
    }

    pub fn rows(&self) -> &[TraceRow] {
        &self.rows
    }

    pub fn push(&mut self, row: TraceRow) {
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn last(&self) -> Option<&TraceRow> {
        self.rows.last()
    }

    /// Every other row, keeping the last one.
    pub fn subsampled(&self, stride: usize) -> Self {
        let mut rows: Vec<TraceRow> = self.rows.iter().step_by(stride.max(1)).copied().collect();
        if let (Some(a), Some(b)) = (rows.last(), self.rows.last()) {
            if a.t != b.t {
                rows.push(*b);
            }
        }
        Self { rows }
    }

    /// Largest drop of `H_min` below its running maximum.
    pub fn h_min_drop(&self) -> f64 {
        running_drop(self.rows.iter().map(|r| r.h_min))
    }

    /// Largest drop of `γ_min` below its running maximum.
    pub fn gamma_min_drop(&self) -> f64 {
        running_drop(self.rows.iter().map(|r| r.gamma_min))
    }

    /// Largest rise of `g_σ,max` above its running minimum.
    pub fn gsigma_rise(&self) -> f64 {
        running_drop(self.rows.iter().map(|r| -r.gsigma_max))
    }

    pub fn volume_strictly_decreasing(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].volume < w[0].volume)
    }
}

fn running_drop(values: impl Iterator<Item = f64>) -> f64 {
    let mut best = f64::NEG_INFINITY;
    let mut worst: f64 = 0.0;
    for v in values {
        best = best.max(v);
        worst = worst.max(best - v);
    }
    worst
}

/// A stored surface with the trace row index it belongs to.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub row: usize,
    pub surface: AxiSurface,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    HStop,
    MaxSteps,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub trace: FlowTrace,
    pub surface: AxiSurface,
    pub snapshots: Vec<Snapshot>,
    pub termination: Termination,
    pub steps: usize,
}

/// A failed run together with everything computed before the failure.
#[derive(Debug, Clone)]
pub struct RunFailure {
    pub error: Error,
    pub trace: FlowTrace,
    pub surface: AxiSurface,
    pub snapshots: Vec<Snapshot>,
}

impl std::fmt::Display for RunFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} after {} trace rows", self.error, self.trace.len())
    }
}

impl std::error::Error for RunFailure {}

/// Nodal velocity `−f(H) ν` with `ν = (t_z, −t_ρ)`.
pub fn normal_velocity(field: &CurvatureField, speed: &SpeedParams) -> Result<Vec<(f64, f64)>> {
    field
        .h
        .iter()
        .zip(&field.tangent)
        .enumerate()
        .map(|(i, (&h, &(tr, tz)))| {
            if !(h >= 0.0) {
                return Err(Error::Domain(format!("H = {h} at node {i}")));
            }
            let f = speed.values(h).f;
            Ok((-f * tz, f * tr))
        })
        .collect()
}

/// Stability-limited step `cfl · Δs_min² / max f'(H)`.
pub fn stable_dt(field: &CurvatureField, speed: &SpeedParams, cfl: f64) -> f64 {
    let fp_max = field
        .h
        .iter()
        .map(|&h| speed.values(h.max(0.0)).fp)
        .fold(0.0, f64::max);
    cfl * field.ds_min * field.ds_min / fp_max
}

fn convexity_check(field: &CurvatureField, t: f64) -> Result<()> {
    for i in 0..field.len() {
        let (l1, l2) = (field.lambda1[i], field.lambda2[i]);
        if !(l1 > 0.0 && l2 > 0.0) {
            return Err(Error::ConvexityLost {
                node: i,
                t,
                lambda1: l1,
                lambda2: l2,
            });
        }
    }
    Ok(())
}

fn curvatures_convex(surface: &AxiSurface) -> Result<CurvatureField> {
    let field = surface.curvatures().map_err(|e| match e {
        Error::Degenerate(_) => Error::ConvexityLost {
            node: 0,
            t: surface.time,
            lambda1: f64::NAN,
            lambda2: f64::NAN,
        },
        other => other,
    })?;
    convexity_check(&field, surface.time)?;
    Ok(field)
}

/// A single forward Euler step of length `dt`, with no redistribution.
/// Node `i` of the result is the normal image of node `i` of the input.
pub fn euler_step(surface: &AxiSurface, speed: &SpeedParams, dt: f64) -> Result<AxiSurface> {
    let field = curvatures_convex(surface)?;
    let v = normal_velocity(&field, speed)?;
    let next = surface.displaced(&v, dt);
    curvatures_convex(&next)?;
    Ok(next)
}

/// One step of the configured integrator. Returns the new surface, its
/// curvature field and the step used.
pub fn step(
    surface: &AxiSurface,
    field: &CurvatureField,
    cfg: &FlowConfig,
) -> Result<(AxiSurface, CurvatureField, f64)> {
    convexity_check(field, surface.time)?;
    let dt = cfg
        .forced_dt
        .unwrap_or_else(|| stable_dt(field, &cfg.speed, cfg.cfl));
    if !(dt >= cfg.dt_min) {
        return Err(Error::StepTooSmall {
            dt,
            dt_min: cfg.dt_min,
            t: surface.time,
        });
    }
    let v1 = normal_velocity(field, &cfg.speed)?;
    let next = match cfg.integrator {
        Integrator::Euler => surface.displaced(&v1, dt),
        Integrator::Midpoint => {
            let half = surface.displaced(&v1, 0.5 * dt);
            let half_field = curvatures_convex(&half)?;
            let v2 = normal_velocity(&half_field, &cfg.speed)?;
            surface.displaced(&v2, dt)
        }
    };
    let next_field = curvatures_convex(&next)?;
    Ok((next, next_field, dt))
}

/// Trace row for a surface and its field.
pub fn trace_row(
    surface: &AxiSurface,
    field: &CurvatureField,
    dt: f64,
    speed: &SpeedParams,
    sigma: f64,
) -> TraceRow {
    let (gamma_min, _, _) = gamma_extrema(field);
    let gsigma_max = field
        .h
        .iter()
        .zip(&field.gamma)
        .map(|(&h, &g)| (UMBILIC_GAMMA - g) * speed.log_hat(h).powf(sigma))
        .fold(f64::NEG_INFINITY, f64::max);
    TraceRow {
        t: surface.time,
        dt,
        h_min: field.h_min(),
        h_max: field.h_max(),
        a2_max: field.norm_a2_max(),
        gamma_min,
        gsigma_max,
        area: surface.area(),
        volume: surface.volume(),
    }
}

/// Steps until `H_max >= h_stop` or `max_steps`, redistributing every
/// `redistribute_every` steps and storing snapshots by flow-time cadence and
/// by `H_max` growth. The initial and final surfaces are always stored.
pub fn run(initial: &AxiSurface, cfg: &FlowConfig) -> std::result::Result<RunOutcome, RunFailure> {
    let mut trace = FlowTrace::default();
    let mut snapshots = Vec::new();
    let fail = |error: Error, trace: FlowTrace, surface: AxiSurface, snapshots: Vec<Snapshot>| {
        RunFailure {
            error,
            trace,
            surface,
            snapshots,
        }
    };
    let mut field = match curvatures_convex(initial) {
        Ok(f) => f,
        Err(e) => return Err(fail(e, trace, initial.clone(), snapshots)),
    };
    if let Err(e) = cfg.validate(field.h_max()) {
        return Err(fail(e, trace, initial.clone(), snapshots));
    }
    let mut surface = initial.clone();
    trace.push(trace_row(&surface, &field, 0.0, &cfg.speed, cfg.sigma));
    snapshots.push(Snapshot {
        row: 0,
        surface: surface.clone(),
    });
    let mut next_snap_t = surface.time + cfg.snapshot_every;
    let mut last_snap_h = field.h_max();
    let mut steps = 0;
    let termination = loop {
        if field.h_max() >= cfg.h_stop {
            break Termination::HStop;
        }
        if steps >= cfg.max_steps {
            break Termination::MaxSteps;
        }
        let (mut next, mut next_field, dt) = match step(&surface, &field, cfg) {
            Ok(r) => r,
            Err(e) => {
                snapshots.push(Snapshot {
                    row: trace.len() - 1,
                    surface: surface.clone(),
                });
                return Err(fail(e, trace, surface, snapshots));
            }
        };
        steps += 1;
        if steps % cfg.redistribute_every == 0 {
            next = next.redistribute();
            next_field = match curvatures_convex(&next) {
                Ok(f) => f,
                Err(e) => return Err(fail(e, trace, surface, snapshots)),
            };
        }
        surface = next;
        field = next_field;
        trace.push(trace_row(&surface, &field, dt, &cfg.speed, cfg.sigma));
        let by_time = surface.time >= next_snap_t;
        let by_growth =
            cfg.snapshot_h_factor > 1.0 && field.h_max() >= last_snap_h * cfg.snapshot_h_factor;
        if by_time || by_growth {
            snapshots.push(Snapshot {
                row: trace.len() - 1,
                surface: surface.clone(),
            });
            last_snap_h = field.h_max();
            while next_snap_t <= surface.time {
                next_snap_t += cfg.snapshot_every;
            }
        }
    };
    if snapshots.last().map(|s| s.row) != Some(trace.len() - 1) {
        snapshots.push(Snapshot {
            row: trace.len() - 1,
            surface: surface.clone(),
        });
    }
    Ok(RunOutcome {
        trace,
        surface,
        snapshots,
        termination,
        steps,
    })
}

/// Mean distance from the nodes to the midpoint of the poles, and the
/// largest relative deviation from that mean.
pub fn sphere_radius(surface: &AxiSurface) -> (f64, f64) {
    let z = surface.z();
    let zc = 0.5 * (z[0] + z[z.len() - 1]);
    let d: Vec<f64> = surface
        .rho()
        .iter()
        .zip(z)
        .map(|(r, z)| r.hypot(z - zc))
        .collect();
    let mean = d.iter().sum::<f64>() / d.len() as f64;
    let dev = d.iter().map(|x| (x / mean - 1.0).abs()).fold(0.0, f64::max);
    (mean, dev)
}
