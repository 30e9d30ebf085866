//! Blowup analysis: the rate functions `J_α` and `G_α = −1/J_α`, blowup-time
//! estimation, type classification, the two rescaling procedures and the
//! sphericity verdict on the rescaled sequence.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::flow::FlowTrace;
use crate::geometry::{roundness, umbilic_gap, AxiSurface};
use crate::quad;
use crate::speed::SpeedParams;

const TABLE_LO: f64 = 1e-3;
const TABLE_HI: f64 = 1e9;
const PER_DECADE: usize = 16;
const MAX_FIT_ROWS: usize = 4000;

/// `J_α` with a monotone table for inversion.
#[derive(Debug, Clone)]
pub struct BlowupScale {
    speed: SpeedParams,
    tol: f64,
    xs: Vec<f64>,
    gs: Vec<f64>,
}

/// Where the sandwich `−1/(2x²) < J_α(x) < −1/(3x³)` starts to hold on the
/// table.
#[derive(Debug, Clone, Serialize)]
pub struct SandwichReport {
    /// Smallest table abscissa from which every larger one satisfies both
    /// sides strictly, or `None` if none does.
    pub x0: Option<f64>,
    pub points_checked: usize,
}

impl BlowupScale {
    pub fn new(speed: SpeedParams, tol: f64) -> Result<Self> {
        if !(tol > 0.0) {
            return Err(Error::Domain(format!(
                "quadrature tolerance must be positive, got {tol}"
            )));
        }
        let mut s = Self {
            speed,
            tol,
            xs: Vec::new(),
            gs: Vec::new(),
        };
        let decades = (TABLE_HI / TABLE_LO).log10().round() as usize;
        let count = decades * PER_DECADE + 1;
        for i in 0..count {
            let x = TABLE_LO * 10f64.powf(i as f64 / PER_DECADE as f64);
            let g = -1.0 / s.j_alpha(x)?;
            s.xs.push(x);
            s.gs.push(g);
        }
        if s.gs.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Domain(
                "G_alpha table is not strictly increasing".into(),
            ));
        }
        Ok(s)
    }

    pub fn speed(&self) -> &SpeedParams {
        &self.speed
    }

    pub fn table(&self) -> (&[f64], &[f64]) {
        (&self.xs, &self.gs)
    }

    /// `J_α(x) = −∫_x^∞ dt / (t³ (ln(t + H₀))^α)`, computed as
    /// `−x⁻² ∫₀¹ u (ln(x/u + H₀))^{−α} du`.
    pub fn j_alpha(&self, x: f64) -> Result<f64> {
        if !(x > 0.0) || !x.is_finite() {
            return Err(Error::Domain(format!("J_alpha needs x > 0, got {x}")));
        }
        let a = self.speed.alpha();
        if a == 0.0 {
            return Ok(-0.5 / (x * x));
        }
        let h0 = self.speed.h0();
        let q = quad::integrate(
            |u| {
                if u <= 0.0 {
                    0.0
                } else {
                    u * (x / u + h0).ln().powf(-a)
                }
            },
            0.0,
            1.0,
            1e-300,
            self.tol,
        );
        Ok(-q.value / (x * x))
    }

    /// `J_α'(x) = 1 / (x³ (ln x̂)^α)`.
    pub fn j_prime(&self, x: f64) -> f64 {
        1.0 / (x * x * x * self.speed.log_hat(x).powf(self.speed.alpha()))
    }

    pub fn g_alpha(&self, x: f64) -> Result<f64> {
        Ok(-1.0 / self.j_alpha(x)?)
    }

    /// Solves `G_α(x) = y` inside the table by safeguarded Newton iteration
    /// on a bisection bracket.
    pub fn g_alpha_inv(&self, y: f64) -> Result<f64> {
        let (lo_g, hi_g) = (self.gs[0], *self.gs.last().unwrap());
        if !(y >= lo_g && y <= hi_g) {
            return Err(Error::Range {
                y,
                lo: lo_g,
                hi: hi_g,
            });
        }
        if self.speed.alpha() == 0.0 {
            return Ok((0.5 * y).sqrt());
        }
        let i = self
            .gs
            .partition_point(|&g| g < y)
            .clamp(1, self.gs.len() - 1);
        let (mut lo, mut hi) = (self.xs[i - 1], self.xs[i]);
        let w = (y.ln() - self.gs[i - 1].ln()) / (self.gs[i].ln() - self.gs[i - 1].ln());
        let mut x = (lo.ln() + w * (hi.ln() - lo.ln())).exp();
        for _ in 0..100 {
            let j = self.j_alpha(x)?;
            let g = -1.0 / j;
            let r = g - y;
            if r.abs() <= 1e-13 * y {
                return Ok(x);
            }
            if r < 0.0 {
                lo = x;
            } else {
                hi = x;
            }
            let gp = self.j_prime(x) / (j * j);
            let newton = x - r / gp;
            x = if newton > lo && newton < hi {
                newton
            } else {
                (lo * hi).sqrt()
            };
            if (hi - lo) <= 1e-15 * hi {
                return Ok(x);
            }
        }
        Ok(x)
    }

    /// Checks the sandwich and `2x² < G_α < 3x³`, `G_α⁻¹(G_α(x)) ≤ √(G_α(x)/2)`
    /// at every table abscissa.
    pub fn sandwich(&self) -> SandwichReport {
        let ok: Vec<bool> = self
            .xs
            .iter()
            .zip(&self.gs)
            .map(|(&x, &g)| {
                let j = -1.0 / g;
                let left = -0.5 / (x * x) < j;
                let right = j < -1.0 / (3.0 * x * x * x);
                let gbounds = 2.0 * x * x < g && g < 3.0 * x * x * x;
                let inv = x <= (0.5 * g).sqrt();
                left && right && gbounds && inv
            })
            .collect();
        let mut x0 = None;
        for i in (0..ok.len()).rev() {
            if ok[i] {
                x0 = Some(self.xs[i]);
            } else {
                break;
            }
        }
        SandwichReport {
            x0,
            points_checked: ok.len(),
        }
    }
}

fn thinned_indices(len: usize, max: usize) -> Vec<usize> {
    let stride = len.div_ceil(max).max(1);
    let mut idx: Vec<usize> = (0..len).step_by(stride).collect();
    if idx.last() != Some(&(len - 1)) {
        idx.push(len - 1);
    }
    idx
}

#[derive(Debug, Clone, Serialize)]
pub struct BlowupEstimate {
    pub t_est: f64,
    /// RMS residual of the fit.
    pub uncertainty: f64,
    /// Fitted `c` in `t ≈ T − c·(−J_α(H_max))`.
    pub slope: f64,
    pub window_start: f64,
    pub rows_used: usize,
}

/// Least-squares fit of `t = T − c w` with `w = −J_α(H_max(t))` over the
/// rows with `H_max ≥ H_max,final / 10`.
pub fn estimate_t(trace: &FlowTrace, scale: &BlowupScale) -> Result<BlowupEstimate> {
    let rows = trace.rows();
    if rows.len() < 3 {
        return Err(Error::InsufficientBlowup { growth: 1.0 });
    }
    let first = rows[0].h_max;
    let last = rows[rows.len() - 1];
    let growth = last.h_max / first;
    if !(growth >= 10.0) {
        return Err(Error::InsufficientBlowup { growth });
    }
    let start = rows.partition_point(|r| r.h_max < 0.1 * last.h_max);
    let tail = &rows[start..];
    let idx = thinned_indices(tail.len(), MAX_FIT_ROWS);
    let pts: Vec<(f64, f64)> = idx
        .iter()
        .map(|&i| Ok((-scale.j_alpha(tail[i].h_max)?, tail[i].t)))
        .collect::<Result<_>>()?;
    let m = pts.len() as f64;
    let (sw, st) = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
    let (mw, mt) = (sw / m, st / m);
    let (mut sww, mut swt) = (0.0, 0.0);
    for &(w, t) in &pts {
        sww += (w - mw) * (w - mw);
        swt += (w - mw) * (t - mt);
    }
    let (slope, intercept) = if pts.len() >= 2 && sww > 0.0 {
        let b = swt / sww;
        (-b, mt - b * mw)
    } else {
        (2.0, last.t + 2.0 * pts[0].0)
    };
    let rms = (pts
        .iter()
        .map(|&(w, t)| (t - (intercept - slope * w)).powi(2))
        .sum::<f64>()
        / m)
        .sqrt();
    let w_last = -scale.j_alpha(last.h_max)?;
    let t_est = if intercept > last.t {
        intercept
    } else {
        last.t + slope.abs().max(f64::MIN_POSITIVE) * w_last
    };
    Ok(BlowupEstimate {
        t_est,
        uncertainty: rms,
        slope,
        window_start: tail[0].t,
        rows_used: pts.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SingularityType {
    Type1,
    Type2,
}

#[derive(Debug, Clone, Serialize)]
pub struct Classification {
    pub kind: SingularityType,
    /// `max R` over the trace, reported for either type.
    pub c0: f64,
    /// Relative growth of the running max of `R` over the last decade of
    /// `T − t`.
    pub tail_variation: f64,
    /// `(t, R(t))` with `R = H_max / G_α⁻¹(1/(T − t))`, thinned.
    pub ratio: Vec<(f64, f64)>,
}

pub fn classify(
    trace: &FlowTrace,
    t_est: f64,
    scale: &BlowupScale,
    threshold: f64,
) -> Result<Classification> {
    let rows = trace.rows();
    let last = match rows.last() {
        Some(r) => *r,
        None => return Err(Error::InsufficientBlowup { growth: 1.0 }),
    };
    if !(t_est > last.t) {
        return Err(Error::Domain(format!(
            "T_est = {t_est} must exceed every trace time (last {})",
            last.t
        )));
    }
    let idx = thinned_indices(rows.len(), MAX_FIT_ROWS);
    let mut ratio = Vec::with_capacity(idx.len());
    for &i in &idx {
        let r = rows[i];
        let x = scale.g_alpha_inv(1.0 / (t_est - r.t))?;
        ratio.push((r.t, r.h_max / x));
    }
    let gap_last = t_est - last.t;
    let mut running = f64::NEG_INFINITY;
    let mut at_window: Option<f64> = None;
    for &(t, r) in &ratio {
        running = running.max(r);
        if at_window.is_none() && t_est - t <= 10.0 * gap_last {
            at_window = Some(running);
        }
    }
    let start = at_window.unwrap_or(running);
    let tail_variation = (running - start) / start;
    let kind = if tail_variation < threshold {
        SingularityType::Type1
    } else {
        SingularityType::Type2
    };
    Ok(Classification {
        kind,
        c0: running,
        tail_variation,
        ratio,
    })
}

/// `1/k_j` geometric from `(T − t_first)/2` down to `T − t_last`.
pub fn auto_k_schedule(t_est: f64, t_first: f64, t_last: f64, levels: usize) -> Vec<f64> {
    let a = 0.5 * (t_est - t_first);
    let b = t_est - t_last;
    let levels = levels.max(2);
    (0..levels)
        .map(|j| {
            let s = j as f64 / (levels - 1) as f64;
            1.0 / (a.ln() + s * (b.ln() - a.ln())).exp()
        })
        .collect()
}

/// One member of a rescaled sequence.
#[derive(Debug, Clone, Serialize)]
pub struct Rescaled {
    pub k: f64,
    pub t_k: f64,
    /// Profile node of `x_k`.
    pub node: usize,
    pub eps_k: f64,
    /// `ρ(x_k, t_k)`; the translation is along the axis only.
    pub rho_offset: f64,
    pub z_offset: f64,
    pub tau_range: (f64, f64),
    /// `H̃` at `(x_k, 0)`.
    pub h_tilde_at_xk: f64,
    pub h_tilde_max: f64,
    /// Selection ratio `H/G_α⁻¹(·)` for type-2, `H_max ε_k` for type-1.
    pub selection_ratio: f64,
    pub roundness: f64,
    pub gamma_gap: f64,
    #[serde(skip)]
    pub surface: AxiSurface,
}

fn cutoff_for(k: f64, t_est: f64, snapshots: &[AxiSurface]) -> Result<f64> {
    let cutoff = t_est - 1.0 / k;
    let tol = 1e-12 * t_est.abs().max(1.0);
    let t_first = snapshots[0].time;
    let t_last = snapshots[snapshots.len() - 1].time;
    if cutoff < t_first - tol || cutoff > t_last + tol {
        return Err(Error::Index(format!(
            "k = {k}: T - 1/k = {cutoff} is outside the snapshot range [{t_first}, {t_last}]"
        )));
    }
    Ok(cutoff + tol)
}

fn finish(
    k: f64,
    snap: &AxiSurface,
    node: usize,
    eps: f64,
    tau_range: (f64, f64),
    selection_ratio: f64,
) -> Result<Rescaled> {
    let z0 = snap.z()[node];
    let surface = snap.rescaled_about(z0, eps);
    let field = surface.curvatures()?;
    Ok(Rescaled {
        k,
        t_k: snap.time,
        node,
        eps_k: eps,
        rho_offset: snap.rho()[node] / eps,
        z_offset: z0,
        tau_range,
        h_tilde_at_xk: field.h[node],
        h_tilde_max: field.h_max(),
        selection_ratio,
        roundness: roundness(&field)?,
        gamma_gap: umbilic_gap(&field),
        surface,
    })
}

fn check_snapshots(snapshots: &[AxiSurface]) -> Result<()> {
    if snapshots.is_empty() {
        return Err(Error::Index("no snapshots".into()));
    }
    if snapshots.windows(2).any(|w| !(w[1].time > w[0].time)) {
        return Err(Error::Index("snapshot times are not increasing".into()));
    }
    Ok(())
}

/// Type-1 sequence: `t_k` maximises `H_max` over snapshots with
/// `t ≤ T − 1/k`, and `ε_k = 1/G_α⁻¹(1/(T − t_k))`.
pub fn rescale_type1(
    snapshots: &[AxiSurface],
    t_est: f64,
    scale: &BlowupScale,
    ks: &[f64],
) -> Result<Vec<Rescaled>> {
    check_snapshots(snapshots)?;
    let h: Vec<(f64, usize)> = snapshots
        .iter()
        .map(|s| {
            let f = s.curvatures()?;
            Ok((f.h_max(), f.argmax_h()))
        })
        .collect::<Result<_>>()?;
    let mut out = Vec::with_capacity(ks.len());
    for &k in ks {
        let cutoff = cutoff_for(k, t_est, snapshots)?;
        let mut best: Option<usize> = None;
        for (i, s) in snapshots.iter().enumerate() {
            if s.time <= cutoff && best.is_none_or(|b| h[i].0 > h[b].0) {
                best = Some(i);
            }
        }
        let i =
            best.ok_or_else(|| Error::Index(format!("no snapshot before T - 1/k for k = {k}")))?;
        let snap = &snapshots[i];
        let gap = t_est - snap.time;
        let eps = 1.0 / scale.g_alpha_inv(1.0 / gap)?;
        let tau = (-snap.time / gap, 1.0);
        out.push(finish(k, snap, h[i].1, eps, tau, h[i].0 * eps)?);
    }
    Ok(out)
}

/// Type-2 sequence: `(x_k, t_k)` maximises `H / G_α⁻¹(1/(T − 1/k − t))`
/// over snapshots strictly before `T − 1/k`, and `ε_k = 1/H(x_k, t_k)`.
pub fn rescale_type2(
    snapshots: &[AxiSurface],
    t_est: f64,
    scale: &BlowupScale,
    ks: &[f64],
) -> Result<Vec<Rescaled>> {
    check_snapshots(snapshots)?;
    let mut out = Vec::with_capacity(ks.len());
    for &k in ks {
        let cutoff = cutoff_for(k, t_est, snapshots)?;
        let edge = t_est - 1.0 / k;
        let mut best: Option<(usize, usize, f64)> = None;
        for (i, s) in snapshots.iter().enumerate() {
            let gap = edge - s.time;
            if s.time > cutoff || gap <= 0.0 {
                continue;
            }
            let x = match scale.g_alpha_inv(1.0 / gap) {
                Ok(x) => x,
                Err(Error::Range { .. }) => continue,
                Err(e) => return Err(e),
            };
            let f = s.curvatures()?;
            let node = f.argmax_h();
            let r = f.h[node] / x;
            if best.is_none_or(|b| r > b.2) {
                best = Some((i, node, r));
            }
        }
        let (i, node, r) =
            best.ok_or_else(|| Error::Index(format!("no admissible snapshot for k = {k}")))?;
        let snap = &snapshots[i];
        let h = snap.curvatures()?.h[node];
        let eps = 1.0 / h;
        let g = scale.g_alpha(h)?;
        let tau = (-g * snap.time, g * (t_est - snap.time - 1.0 / k));
        out.push(finish(k, snap, node, eps, tau, r)?);
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct SphericityVerdict {
    pub gamma_gap: Vec<f64>,
    pub roundness: Vec<f64>,
    pub gap_monotone: bool,
    pub roundness_monotone: bool,
    pub final_roundness: f64,
    pub threshold: f64,
    pub pass: bool,
}

fn nonincreasing(v: &[f64]) -> bool {
    v.windows(2)
        .all(|w| w[1] <= w[0] + 1e-12 * w[0].abs().max(1e-12))
}

pub fn sphericity_verdict(seq: &[Rescaled], threshold: f64) -> SphericityVerdict {
    let gamma_gap: Vec<f64> = seq.iter().map(|r| r.gamma_gap.max(0.0)).collect();
    let roundness: Vec<f64> = seq.iter().map(|r| r.roundness).collect();
    let gap_monotone = nonincreasing(&gamma_gap);
    let roundness_monotone = nonincreasing(&roundness);
    let final_roundness = roundness.last().copied().unwrap_or(f64::INFINITY);
    SphericityVerdict {
        pass: seq.len() >= 3 && gap_monotone && roundness_monotone && final_roundness <= threshold,
        gamma_gap,
        roundness,
        gap_monotone,
        roundness_monotone,
        final_roundness,
        threshold,
    }
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct PerK {
    pub k: f64,
    pub t_k: f64,
    pub eps_k: f64,
    pub roundness: f64,
    pub gamma_gap: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SingularityReport {
    #[serde(rename = "T_est")]
    pub t_est: f64,
    #[serde(rename = "T_uncertainty")]
    pub t_uncertainty: f64,
    pub classification: SingularityType,
    #[serde(rename = "C0")]
    pub c0: Option<f64>,
    pub tail_variation: f64,
    pub sandwich_x0: Option<f64>,
    pub reference_mode: bool,
    pub per_k: Vec<PerK>,
    pub verdict: SphericityVerdict,
}

/// Settings of [`analyze`].
#[derive(Debug, Clone)]
pub struct AnalysisConfig {
    pub classifier_threshold: f64,
    /// Explicit `k` values; empty selects [`auto_k_schedule`].
    pub k_schedule: Vec<f64>,
    pub k_levels: usize,
    pub roundness_threshold: f64,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            classifier_threshold: 0.2,
            k_schedule: Vec::new(),
            k_levels: 6,
            roundness_threshold: 0.05,
        }
    }
}

/// Estimate, classify, rescale and judge in one pass.
pub fn analyze(
    trace: &FlowTrace,
    snapshots: &[AxiSurface],
    scale: &BlowupScale,
    cfg: &AnalysisConfig,
) -> Result<(SingularityReport, Vec<Rescaled>)> {
    let est = estimate_t(trace, scale)?;
    let class = classify(trace, est.t_est, scale, cfg.classifier_threshold)?;
    check_snapshots(snapshots)?;
    let ks = if cfg.k_schedule.is_empty() {
        let t_last = snapshots[snapshots.len() - 1].time;
        auto_k_schedule(est.t_est, snapshots[0].time, t_last, cfg.k_levels)
    } else {
        cfg.k_schedule.clone()
    };
    let seq = match class.kind {
        SingularityType::Type1 => rescale_type1(snapshots, est.t_est, scale, &ks)?,
        SingularityType::Type2 => rescale_type2(snapshots, est.t_est, scale, &ks)?,
    };
    let verdict = sphericity_verdict(&seq, cfg.roundness_threshold);
    let report = SingularityReport {
        t_est: est.t_est,
        t_uncertainty: est.uncertainty,
        classification: class.kind,
        c0: (class.kind == SingularityType::Type1).then_some(class.c0),
        tail_variation: class.tail_variation,
        sandwich_x0: scale.sandwich().x0,
        reference_mode: scale.speed().is_reference(),
        per_k: seq
            .iter()
            .map(|r| PerK {
                k: r.k,
                t_k: r.t_k,
                eps_k: r.eps_k,
                roundness: r.roundness,
                gamma_gap: r.gamma_gap,
            })
            .collect(),
        verdict,
    };
    Ok((report, seq))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scale(alpha: f64) -> BlowupScale {
        BlowupScale::new(SpeedParams::with_alpha(alpha).unwrap(), 1e-13).unwrap()
    }

    #[test]
    fn reference_closed_forms() {
        let s = scale(0.0);
        assert_eq!(s.j_alpha(10.0).unwrap(), -0.005);
        assert!((s.g_alpha_inv(200.0).unwrap() - 10.0).abs() < 1e-12);
        assert!(s.j_alpha(0.0).is_err());
    }

    #[test]
    fn j_is_increasing_and_negative() {
        let s = scale(1.0);
        let (xs, gs) = s.table();
        assert!(gs.iter().all(|&g| g > 0.0));
        assert!(xs.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn inverse_round_trip() {
        let s = scale(2.0);
        let mut y = 1.0;
        while y < 1e12 {
            let x = s.g_alpha_inv(y).unwrap();
            let back = s.g_alpha(x).unwrap();
            assert!((back / y - 1.0).abs() < 1e-9, "y={y}");
            y *= 7.3;
        }
        assert!(matches!(s.g_alpha_inv(1e-12), Err(Error::Range { .. })));
    }

    #[test]
    fn auto_schedule_ends_at_last_time() {
        let ks = auto_k_schedule(0.25, 0.0, 0.249, 5);
        assert_eq!(ks.len(), 5);
        assert!((1.0 / ks[0] - 0.125).abs() < 1e-15);
        assert!((1.0 / ks[4] - 0.001).abs() < 1e-15);
        assert!(ks.windows(2).all(|w| w[1] > w[0]));
    }
}
