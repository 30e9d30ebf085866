//! Pinching constants and certificates.
//!
//! Curvature ratios are written `x_i = λ_i / H`, so `Σ x_i = 1`,
//! `γ = Π x_i` and `(n|A|² − H²)/H² = n Σ x_i² − 1`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::flow::FlowTrace;
use crate::geometry::CurvatureField;
use crate::jet::{CurvatureJet, DIM};
use crate::speed::SpeedParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EpsilonMode {
    /// `ε = C`.
    Simple,
    /// The extremal ratio: root of `x ((1 − x)/(n − 1))^{n−1} = C`.
    Sharp,
}

fn umbilic_gamma(n: u32) -> f64 {
    let nf = n as f64;
    nf.powf(-nf)
}

/// `x ((1 − x)/(n − 1))^{n−1}`, the smallest `γ` compatible with a
/// smallest ratio `x`.
pub fn extremal_gamma(x: f64, n: u32) -> f64 {
    if n == 1 {
        return x;
    }
    let m = (n - 1) as f64;
    x * ((1.0 - x) / m).powf(m)
}

fn check_c(c: f64, n: u32) -> Result<()> {
    if n == 0 || !(c > 0.0 && c < umbilic_gamma(n)) {
        return Err(Error::Domain(format!(
            "C must lie in (0, 1/n^n) = (0, {}), got {c}",
            umbilic_gamma(n.max(1))
        )));
    }
    Ok(())
}

pub fn epsilon_lower_bound(c: f64, n: u32, mode: EpsilonMode) -> Result<f64> {
    check_c(c, n)?;
    match mode {
        EpsilonMode::Simple => Ok(c),
        EpsilonMode::Sharp => {
            if n == 1 {
                return Ok(c);
            }
            let (mut lo, mut hi) = (0.0, 1.0 / n as f64);
            while hi - lo > 1e-15 {
                let mid = 0.5 * (lo + hi);
                if extremal_gamma(mid, n) < c {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            Ok(0.5 * (lo + hi))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Feasibility {
    pub feasible: bool,
    pub delta: f64,
    /// `δ + (8αnδ)^{1/3}`.
    pub lower_branch: f64,
    /// `δ + (8αn²δ)^{1/3}`.
    pub upper_branch: f64,
}

/// Both cube-root conditions at a given `δ`.
pub fn feasibility_at_delta(delta: f64, n: u32, alpha: f64) -> Feasibility {
    let nf = n as f64;
    let lower_branch = delta + (8.0 * alpha * nf * delta).cbrt();
    let upper_branch = delta + (8.0 * alpha * nf * nf * delta).cbrt();
    let bound = 1.0 / nf;
    Feasibility {
        feasible: lower_branch <= bound && upper_branch <= bound,
        delta,
        lower_branch,
        upper_branch,
    }
}

/// `δ = 1/n − ε_sharp(C)` and both conditions.
pub fn second_epsilon_feasible(c: f64, n: u32, alpha: f64) -> Result<Feasibility> {
    let eps = epsilon_lower_bound(c, n, EpsilonMode::Sharp)?;
    Ok(feasibility_at_delta(
        (1.0 / n as f64 - eps).max(0.0),
        n,
        alpha,
    ))
}

/// Root of `δ + (m α δ)^{1/3} = 1/n` by bisection.
pub fn critical_delta(n: u32, alpha: f64, m: f64) -> f64 {
    let target = 1.0 / n as f64;
    let (mut lo, mut hi) = (0.0, target);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid + (m * alpha * mid).cbrt() < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// The two critical values, for `m = 8n` and `m = 8n²`.
pub fn critical_deltas(n: u32, alpha: f64) -> (f64, f64) {
    let nf = n as f64;
    (
        critical_delta(n, alpha, 8.0 * nf),
        critical_delta(n, alpha, 8.0 * nf * nf),
    )
}

/// Smallest `C` on the grid `{j·resolution}` below `1/nⁿ` that passes
/// [`second_epsilon_feasible`].
pub fn smallest_feasible_c(n: u32, alpha: f64, resolution: f64) -> Option<f64> {
    let top = umbilic_gamma(n);
    let steps = (top / resolution).ceil() as usize;
    (1..steps)
        .map(|j| j as f64 * resolution)
        .filter(|&c| c < top)
        .find(|&c| second_epsilon_feasible(c, n, alpha).is_ok_and(|f| f.feasible))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaSearch {
    pub delta: f64,
    pub grid_min: f64,
    pub refined_min: f64,
}

/// Constant `δ` with `(n|A|² − H²)/H² ≥ δ (1/nⁿ − K/Hⁿ)` for all
/// ratio vectors with `x_i ≥ ε`. For `n = 2` the ratio is identically 4.
/// Otherwise the minimum over a simplex grid at `resolution` and at half of
/// it, less their difference, capped by the umbilic limit `2n^{n−1}`.
pub fn pinching_delta(eps: f64, n: u32, resolution: f64) -> Result<DeltaSearch> {
    let nf = n as f64;
    if !(eps > 0.0) || eps > 1.0 / nf + 1e-15 || n < 2 {
        return Err(Error::Domain(format!(
            "need 0 < eps <= 1/n and n >= 2, got eps = {eps}, n = {n}"
        )));
    }
    if n == 2 {
        return Ok(DeltaSearch {
            delta: 4.0,
            grid_min: 4.0,
            refined_min: 4.0,
        });
    }
    let limit = 2.0 * nf.powf(nf - 1.0);
    let coarse = simplex_min_ratio(eps, n, resolution).min(limit);
    let fine = simplex_min_ratio(eps, n, 0.5 * resolution).min(limit);
    let delta = (fine.min(coarse) - (coarse - fine).abs()).max(0.0);
    Ok(DeltaSearch {
        delta,
        grid_min: coarse,
        refined_min: fine,
    })
}

/// `(n Σx² − 1) / (1/nⁿ − Π x)`, or `None` within `1e-9` of the umbilic
/// point.
pub fn pinching_ratio(x: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    let lhs = n * x.iter().map(|v| v * v).sum::<f64>() - 1.0;
    let rhs = n.powf(-n) - x.iter().product::<f64>();
    if rhs <= 1e-9 * n.powf(-n) {
        None
    } else {
        Some(lhs / rhs)
    }
}

fn simplex_min_ratio(eps: f64, n: u32, h: f64) -> f64 {
    fn recurse(x: &mut Vec<f64>, left: usize, remaining: f64, eps: f64, h: f64, best: &mut f64) {
        if left == 1 {
            if remaining >= eps - 1e-12 {
                x.push(remaining);
                if let Some(r) = pinching_ratio(x) {
                    *best = best.min(r);
                }
                x.pop();
            }
            return;
        }
        let mut v = eps;
        while v <= remaining - (left - 1) as f64 * eps + 1e-12 {
            x.push(v);
            recurse(x, left - 1, remaining - v, eps, h, best);
            x.pop();
            v += h;
        }
    }
    let mut best = f64::INFINITY;
    recurse(
        &mut Vec::with_capacity(n as usize),
        n as usize,
        1.0,
        eps,
        h,
        &mut best,
    );
    best
}

/// `min{Cαδ, (−2α + √(4α² + Cε²nⁿ + ε²)) / (2(1 + 1/(Cnⁿ)))}`.
pub fn sigma_max(c: f64, eps: f64, delta_l: f64, alpha: f64, n: u32) -> Result<f64> {
    if !(c > 0.0 && eps > 0.0 && delta_l > 0.0 && alpha > 0.0) || n == 0 {
        return Err(Error::Domain(format!(
            "sigma_max needs positive C, eps, delta, alpha; got {c}, {eps}, {delta_l}, {alpha}"
        )));
    }
    let nn = (n as f64).powf(n as f64);
    let a = alpha;
    let root = (4.0 * a * a + c * eps * eps * nn + eps * eps).sqrt();
    let second = (-2.0 * a + root) / (2.0 * (1.0 + 1.0 / (c * nn)));
    Ok((c * a * delta_l).min(second))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CSource {
    Given,
    /// Smallest feasible value on the search grid.
    Grid,
    /// `C = γ_extremal(1/n − δ*)` at the binding critical `δ*`, used when no
    /// grid point is feasible.
    Critical,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PinchingConstants {
    pub n: u32,
    pub alpha: f64,
    #[serde(rename = "C")]
    pub c: f64,
    pub epsilon: f64,
    pub delta_l: f64,
    pub sigma: f64,
    pub c_source: CSource,
    pub second_epsilon: Feasibility,
}

impl PinchingConstants {
    /// Builds the chain `C → ε(sharp) → δ → σ`. `c = None` selects `C`
    /// automatically; `sigma = None` takes `sigma_max`.
    pub fn derive(n: u32, alpha: f64, c: Option<f64>, sigma: Option<f64>) -> Result<Self> {
        let (c, c_source) = match c {
            Some(c) => (c, CSource::Given),
            None => auto_c(n, alpha),
        };
        let epsilon = epsilon_lower_bound(c, n, EpsilonMode::Sharp)?;
        let delta_l = pinching_delta(epsilon, n, 1e-3)?.delta;
        let sigma_cap = sigma_max(c, epsilon, delta_l, alpha, n)?;
        let sigma = sigma.unwrap_or(sigma_cap);
        if !(sigma >= 0.0) {
            return Err(Error::Domain(format!("sigma must be >= 0, got {sigma}")));
        }
        Ok(Self {
            n,
            alpha,
            c,
            epsilon,
            delta_l,
            sigma,
            c_source,
            second_epsilon: second_epsilon_feasible(c, n, alpha)?,
        })
    }
}

impl PinchingConstants {
    /// Placeholder chain for the reference speed: `σ = 0`, so the
    /// certificate reduces to monotonicity of `γ_min` and `1/nⁿ − γ_min`.
    pub fn reference(n: u32) -> Self {
        Self {
            n,
            alpha: 0.0,
            c: 0.0,
            epsilon: 0.0,
            delta_l: 0.0,
            sigma: 0.0,
            c_source: CSource::Given,
            second_epsilon: feasibility_at_delta(0.0, n, 0.0),
        }
    }
}

fn auto_c(n: u32, alpha: f64) -> (f64, CSource) {
    if let Some(c) = smallest_feasible_c(n, alpha, 1e-4) {
        return (c, CSource::Grid);
    }
    let (d1, d2) = critical_deltas(n, alpha);
    let eps = 1.0 / n as f64 - d1.min(d2);
    // nudge inward so the root-found δ sits on the feasible side
    let c = extremal_gamma(eps, n) * (1.0 + 1e-15);
    (c.min(umbilic_gamma(n) * (1.0 - 1e-15)), CSource::Critical)
}

/// `g_σ = (1/nⁿ − γ)(ln Ĥ)^σ` per node.
#[derive(Debug, Clone, PartialEq)]
pub struct GSigmaField {
    pub values: Vec<f64>,
    pub max: f64,
    pub argmax: usize,
}

pub fn g_sigma_field(field: &CurvatureField, sigma: f64, speed: &SpeedParams) -> GSigmaField {
    let u = DIM.powf(-DIM);
    let values: Vec<f64> = field
        .gamma
        .iter()
        .zip(&field.h)
        .map(|(&g, &h)| (u - g) * speed.log_hat(h).powf(sigma))
        .collect();
    let mut argmax = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[argmax] {
            argmax = i;
        }
    }
    GSigmaField {
        max: values[argmax],
        argmax,
        values,
    }
}

/// The three non-gradient groups of the `g_σ` equation at one jet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReactionTerms {
    pub l2: f64,
    pub l3: f64,
    pub l4: f64,
}

impl ReactionTerms {
    pub fn sum(&self) -> f64 {
        self.l2 + self.l3 + self.l4
    }
}

pub fn reaction_terms(jet: &CurvatureJet, sigma: f64, speed: &SpeedParams) -> ReactionTerms {
    let n = DIM;
    let h = jet.mean();
    let k = jet.gauss().v;
    let sv = speed.values(h.v);
    let hat = h.v + speed.h0();
    let l = sv.log_hat;
    let phi = l.powf(sigma);
    let dphi = sigma * l.powf(sigma - 1.0) / hat;
    let gamma = k / h.v.powf(n);
    let g = n.powf(-n) - gamma;
    let gsig = g * phi;
    let hpp = h.v * dphi / phi;
    let hpp2 = if sigma == 0.0 {
        0.0
    } else {
        h.v * ((sigma - 1.0) - l) / (hat * l)
    };
    let hfpp = if sv.fp > 0.0 {
        h.v * sv.fpp / sv.fp
    } else {
        0.0
    };
    let hk = h.v.powf(n) / k;
    let grad2 = h.d * h.d / (h.v * h.v);
    let l2 = sv.fp * hpp * (hfpp - hpp2 - 2.0 * (1.0 - hpp) + hk * hpp * g) * grad2 * gsig;
    let l3 =
        -phi * gamma * (sv.fp * jet.y2() / (h.v * h.v) + sv.fpp * jet.umbilic_defect_grad_h2());
    let a2 = jet.norm_a2();
    let l4 = -phi * gamma * sv.hfp_minus_f / h.v * (n * a2 - h.v * h.v) + sv.f * g * dphi * a2;
    ReactionTerms { l2, l3, l4 }
}

/// Relative-resolution tolerance `c₁ (π/N)² + c₂ max_t(dt H_max² (ln Ĥ_max)^α)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ToleranceModel {
    pub c1: f64,
    pub c2: f64,
}

impl Default for ToleranceModel {
    fn default() -> Self {
        Self { c1: 2.0, c2: 2.0 }
    }
}

impl ToleranceModel {
    pub fn tolerance(&self, segments: usize, trace: &FlowTrace, speed: &SpeedParams) -> f64 {
        let ds = std::f64::consts::PI / segments as f64;
        let step = trace
            .rows()
            .iter()
            .map(|r| r.dt * r.h_max * r.h_max * speed.log_hat(r.h_max).powf(speed.alpha()))
            .fold(0.0, f64::max);
        self.c1 * ds * ds + self.c2 * step
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PinchingCertificate {
    #[serde(rename = "C")]
    pub c: f64,
    pub epsilon: f64,
    pub delta: f64,
    pub sigma: f64,
    pub gamma_min_violation: f64,
    pub gsigma_violation: f64,
    pub gamma_violation_row: Option<usize>,
    pub gsigma_violation_row: Option<usize>,
    /// Largest excess of `1/nⁿ − γ_min(t)` over `g_σ,max(0) / (ln Ĥ_min(t))^σ`.
    pub decay_bound_violation: f64,
    pub initially_pinched: bool,
    pub tolerance: f64,
    pub pass: bool,
}

fn worst_drop_row(values: impl Iterator<Item = f64>) -> (f64, Option<usize>) {
    let mut best = f64::NEG_INFINITY;
    let mut worst = 0.0;
    let mut row = None;
    for (i, v) in values.enumerate() {
        best = best.max(v);
        if best - v > worst {
            worst = best - v;
            row = Some(i);
        }
    }
    (worst, row)
}

pub fn certify_monotonicity(
    trace: &FlowTrace,
    consts: &PinchingConstants,
    speed: &SpeedParams,
    tolerance: f64,
) -> PinchingCertificate {
    let rows = trace.rows();
    let (gv, grow) = worst_drop_row(rows.iter().map(|r| r.gamma_min));
    let (sv, srow) = worst_drop_row(rows.iter().map(|r| -r.gsigma_max));
    let g0 = rows.first().map(|r| r.gsigma_max).unwrap_or(0.0);
    let u = umbilic_gamma(consts.n);
    let decay = rows
        .iter()
        .map(|r| (u - r.gamma_min) - g0 / speed.log_hat(r.h_min).powf(consts.sigma))
        .fold(0.0, f64::max);
    PinchingCertificate {
        c: consts.c,
        epsilon: consts.epsilon,
        delta: consts.delta_l,
        sigma: consts.sigma,
        gamma_min_violation: gv,
        gsigma_violation: sv,
        gamma_violation_row: grow,
        gsigma_violation_row: srow,
        decay_bound_violation: decay,
        initially_pinched: rows.first().is_some_and(|r| r.gamma_min >= consts.c),
        tolerance,
        pass: gv <= tolerance && sv <= tolerance && decay <= tolerance,
    }
}
